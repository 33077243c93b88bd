//! Direct 2D convolution with zero padding, output the size of the image.
//!
//! Rank-one kernels (such as Gaussian PSFs) are applied as a row pass
//! followed by a column pass.

use ndarray::{Array2, ArrayView2, Axis};
use rayon::prelude::*;

/// Relative tolerance for treating a kernel as an outer product.
const RANK_ONE_TOLERANCE: f64 = 1e-13;

/// `out = kernel ∗ image` (or the correlation when `flip` is set, which is
/// the adjoint of the convolution). The kernel center is `(rows/2, cols/2)`.
pub fn convolve_same(image: &Array2<f64>, kernel: &Array2<f64>, flip: bool) -> Array2<f64> {
    let image = image.as_standard_layout();
    let (cr, cc) = ((kernel.nrows() / 2) as isize, (kernel.ncols() / 2) as isize);
    // offset of the source sample feeding tap (a, b)
    let shift = |a: usize, center: isize| {
        let d = a as isize - center;
        if flip {
            d
        } else {
            -d
        }
    };
    if let Some((u, v)) = rank_one_factors(kernel) {
        let col_taps: Vec<(isize, f64)> = u.iter().enumerate().map(|(a, w)| (shift(a, cr), *w)).collect();
        let row_taps: Vec<(isize, f64)> = v.iter().enumerate().map(|(b, w)| (shift(b, cc), *w)).collect();
        let rows_done = pass(image.view(), &row_taps.iter().map(|&(db, w)| (0, db, w)).collect::<Vec<_>>());
        return pass(rows_done.view(), &col_taps.iter().map(|&(da, w)| (da, 0, w)).collect::<Vec<_>>());
    }
    let taps: Vec<(isize, isize, f64)> = kernel
        .indexed_iter()
        .filter(|(_, w)| **w != 0.0)
        .map(|((a, b), w)| (shift(a, cr), shift(b, cc), *w))
        .collect();
    pass(image.view(), &taps)
}

/// `(u, v)` with `kernel = u·vᵀ`, if the kernel is rank one.
fn rank_one_factors(kernel: &Array2<f64>) -> Option<(Vec<f64>, Vec<f64>)> {
    let ((pa, pb), peak) = kernel
        .indexed_iter()
        .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))?;
    if *peak == 0.0 {
        return None;
    }
    let u: Vec<f64> = kernel.column(pb).to_vec();
    let v: Vec<f64> = kernel.row(pa).iter().map(|x| x / peak).collect();
    let scale = peak.abs();
    let separable = kernel
        .indexed_iter()
        .all(|((a, b), k)| (k - u[a] * v[b]).abs() <= RANK_ONE_TOLERANCE * scale);
    separable.then_some((u, v))
}

/// `out[i, j] = Σ w · image[i + da, j + db]` over the taps, zero outside.
fn pass(image: ArrayView2<f64>, taps: &[(isize, isize, f64)]) -> Array2<f64> {
    let (rows, cols) = image.dim();
    let data = image.as_slice().expect("standard layout");
    let mut out = Array2::<f64>::zeros((rows, cols));
    out.axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(i, mut row)| {
            let row = row.as_slice_mut().expect("fresh arrays are contiguous");
            for &(da, db, w) in taps {
                let src = i as isize + da;
                if src < 0 || src >= rows as isize {
                    continue;
                }
                let src_row = &data[src as usize * cols..(src as usize + 1) * cols];
                let lo = (-db).clamp(0, cols as isize) as usize;
                let hi = (cols as isize - db).clamp(0, cols as isize) as usize;
                if lo >= hi {
                    continue;
                }
                let s_lo = (lo as isize + db) as usize;
                let src_part = &src_row[s_lo..s_lo + (hi - lo)];
                for (o, s) in row[lo..hi].iter_mut().zip(src_part) {
                    *o += w * s;
                }
            }
        });
    out
}
