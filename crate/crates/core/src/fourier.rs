//! Centred Fourier transforms between detuning and time.
//!
//! Frequencies are sampled at `ν_k = (k − (n−1)/2)·δν` around the grid
//! center and times at `t_j = (j − ⌊n/2⌋)·δt` with `δt = 1/(n·δν)`, so `t = 0`
//! lands on index `⌊n/2⌋`. The kernel is `exp(−i2πνt)`: a spectral phase
//! `exp(+i2πν·τ)` moves a pulse to `t = +τ`.

use std::f64::consts::TAU;
use std::sync::Arc;

use ndarray::{Array2, Axis, Zip};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::grid::FrequencyGrid;

/// Unitary centred DFT of fixed length.
#[derive(Clone)]
pub struct CenteredFft {
    fft: Arc<dyn Fft<f64>>,
    pre: Vec<Complex64>,
    post: Vec<Complex64>,
}

impl CenteredFft {
    pub fn new(n: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(n);
        let nf = n as f64;
        let c = 0.5 * (n as f64 - 1.0);
        let m = (n / 2) as f64;
        let pre = (0..n)
            .map(|k| Complex64::from_polar(1.0, TAU * k as f64 * m / nf))
            .collect();
        let scale = 1.0 / nf.sqrt();
        let post = (0..n)
            .map(|j| Complex64::from_polar(scale, TAU * c * (j as f64 - m) / nf))
            .collect();
        Self { fft, pre, post }
    }

    pub fn len(&self) -> usize {
        self.pre.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pre.is_empty()
    }

    /// In-place transform; `Σ|x|²` is preserved.
    pub fn process(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.len(), "CenteredFft length mismatch");
        for (x, p) in data.iter_mut().zip(&self.pre) {
            *x *= p;
        }
        self.fft.process(data);
        for (x, p) in data.iter_mut().zip(&self.post) {
            *x *= p;
        }
    }
}

/// Continuous-normalized transform of a sampled spectrum:
/// `F(t_j) ≈ ∫ f(ν) exp(−i2πνt_j) dν`, so `Σ|F|²δt = Σ|f|²δν`.
pub fn spectrum_to_time(values: &[Complex64], spacing: f64) -> Vec<Complex64> {
    let n = values.len();
    let mut out = values.to_vec();
    CenteredFft::new(n).process(&mut out);
    let scale = spacing * (n as f64).sqrt();
    out.iter_mut().for_each(|x| *x *= scale);
    out
}

/// Unitary 2D centred transform (rows are the first axis).
pub fn transform_2d(data: &Array2<Complex64>) -> Array2<Complex64> {
    let (rows, cols) = data.dim();
    let mut out = data.clone();
    let row_fft = CenteredFft::new(cols);
    out.axis_iter_mut(Axis(0))
        .into_par_iter()
        .for_each(|mut row| {
            let mut buf: Vec<Complex64> = row.to_vec();
            row_fft.process(&mut buf);
            row.iter_mut().zip(buf).for_each(|(d, s)| *d = s);
        });
    let col_fft = CenteredFft::new(rows);
    out.axis_iter_mut(Axis(1))
        .into_par_iter()
        .for_each(|mut col| {
            let mut buf: Vec<Complex64> = col.to_vec();
            col_fft.process(&mut buf);
            col.iter_mut().zip(buf).for_each(|(d, s)| *d = s);
        });
    out
}

/// Band-limited (trigonometric) interpolation weights.
///
/// Row `r` holds the weights that evaluate, at `points[r]`, the unique
/// trigonometric interpolant of samples on `grid` whose conjugate-time
/// content lies in the grid's window `1/spacing` (Nyquist term split
/// symmetrically, so real samples give a real interpolant). Points outside
/// `[grid.min(), grid.max()]` get a zero row.
pub fn bandlimited_weights(grid: &FrequencyGrid, points: &[f64]) -> Array2<f64> {
    let n = grid.len();
    let nf = n as f64;
    let kernel = |u: f64| -> f64 {
        let half = std::f64::consts::PI * u / nf;
        let s = half.sin();
        if s.abs() < 1e-12 {
            1.0
        } else if n % 2 == 1 {
            (nf * half).sin() / (nf * s)
        } else {
            (((nf - 1.0) * half).sin() / s + (nf * half).cos()) / nf
        }
    };
    let mut out = Array2::zeros((points.len(), n));
    out.axis_iter_mut(Axis(0))
        .into_par_iter()
        .zip(points.par_iter())
        .for_each(|(mut row, &nu)| {
            let tol = 1e-9 * grid.spacing();
            if nu < grid.min() - tol || nu > grid.max() + tol {
                return;
            }
            let pos = grid.position(nu);
            for (k, w) in row.iter_mut().enumerate() {
                *w = kernel(pos - k as f64);
            }
        });
    out
}

/// Evaluates `rows · values · colsᵀ` for a complex matrix and real weights.
pub fn interpolate_2d_complex(
    values: &Array2<Complex64>,
    rows: &Array2<f64>,
    cols: &Array2<f64>,
) -> Array2<Complex64> {
    let re = rows.dot(&values.mapv(|v| v.re)).dot(&cols.t());
    let im = rows.dot(&values.mapv(|v| v.im)).dot(&cols.t());
    Zip::from(&re).and(&im).map_collect(|a, b| Complex64::new(*a, *b))
}

/// Evaluates `rows · values · colsᵀ`.
pub fn interpolate_2d(values: &Array2<f64>, rows: &Array2<f64>, cols: &Array2<f64>) -> Array2<f64> {
    rows.dot(values).dot(&cols.t())
}
