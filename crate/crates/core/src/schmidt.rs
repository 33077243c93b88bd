//! Schmidt decomposition of a joint amplitude and the g²/K relation.

use faer::Mat;
use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jsa::JointAmplitude;

/// Default rank threshold, relative to the largest weight.
pub const DEFAULT_RANK_THRESHOLD: f64 = 1e-6;

/// Schmidt coefficients and mode functions of a joint amplitude:
/// `f(νs, νi) = Σₖ √λₖ ψᵏ(νs) φᵏ(νi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtData {
    /// `√λₖ`, descending.
    pub coefficients: Vec<f64>,
    /// `λₖ`, summing to one.
    pub weights: Vec<f64>,
    /// Columns are the signal modes ψᵏ.
    pub signal_modes: Array2<Complex64>,
    /// Columns are the idler modes φᵏ.
    pub idler_modes: Array2<Complex64>,
    /// `K = 1/Σλₖ²`.
    pub schmidt_number: f64,
    /// Number of weights above `threshold·λ₀`.
    pub rank: usize,
    pub threshold: f64,
}

pub fn schmidt_number(weights: &[f64]) -> f64 {
    let total: f64 = weights.iter().sum();
    let sq: f64 = weights.iter().map(|w| (w / total).powi(2)).sum();
    1.0 / sq
}

fn count_rank(weights: &[f64], threshold: f64) -> usize {
    let max = weights.iter().copied().fold(0.0, f64::max);
    weights.iter().filter(|&&w| w > threshold * max).count()
}

fn to_faer(values: &Array2<Complex64>) -> Mat<Complex64> {
    let (m, n) = values.dim();
    Mat::from_fn(m, n, |i, j| values[[i, j]])
}

impl SchmidtData {
    /// Decomposition of a plain weight spectrum with trivial (unit-vector)
    /// modes; useful for photon-statistics work where only `λₖ` matter.
    pub fn from_weights(weights: &[f64], threshold: f64) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidWeights("weights must be non-negative and finite".into()));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidWeights("weights sum to zero".into()));
        }
        let mut w: Vec<f64> = weights.iter().map(|x| x / total).collect();
        w.sort_by(|a, b| b.total_cmp(a));
        let n = w.len();
        let eye = Array2::from_shape_fn((n, n), |(i, j)| {
            if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }
        });
        Ok(Self {
            coefficients: w.iter().map(|x| x.sqrt()).collect(),
            schmidt_number: schmidt_number(&w),
            rank: count_rank(&w, threshold),
            weights: w,
            signal_modes: eye.clone(),
            idler_modes: eye,
            threshold,
        })
    }

    /// Rebuilds `Σₖ √λₖ ψᵏ ⊗ φᵏ`.
    pub fn reconstruct(&self) -> Array2<Complex64> {
        let (m, n) = (self.signal_modes.nrows(), self.idler_modes.nrows());
        let mut out = Array2::<Complex64>::zeros((m, n));
        for (k, c) in self.coefficients.iter().enumerate() {
            let u = self.signal_modes.column(k);
            let v = self.idler_modes.column(k);
            for s in 0..m {
                let us = u[s] * *c;
                for i in 0..n {
                    out[[s, i]] += us * v[i];
                }
            }
        }
        out
    }
}

/// Full Schmidt decomposition via singular value decomposition.
pub fn schmidt_decompose(jsa: &JointAmplitude, threshold: f64) -> Result<SchmidtData> {
    if !(threshold >= 0.0) {
        return Err(Error::param("schmidt.threshold", "must be non-negative"));
    }
    let m = to_faer(jsa.values());
    let svd = m
        .thin_svd()
        .map_err(|e| Error::Numerical(format!("SVD did not converge: {e:?}")))?;
    let s = svd.S().column_vector();
    let (u, v) = (svd.U(), svd.V());
    let r = s.nrows();
    let raw: Vec<f64> = (0..r).map(|k| s[k].re.max(0.0).powi(2)).collect();
    let total: f64 = raw.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::Numerical("singular values vanish".into()));
    }
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let signal_modes = Array2::from_shape_fn((u.nrows(), r), |(i, k)| u[(i, k)]);
    // f = U S Vᴴ, so the idler functions are the conjugated right vectors.
    let idler_modes = Array2::from_shape_fn((v.nrows(), r), |(i, k)| v[(i, k)].conj());
    Ok(SchmidtData {
        coefficients: weights.iter().map(|w| w.sqrt()).collect(),
        schmidt_number: schmidt_number(&weights),
        rank: count_rank(&weights, threshold),
        weights,
        signal_modes,
        idler_modes,
        threshold,
    })
}

/// Normalized Schmidt weights only (singular values, no modes).
pub fn schmidt_weights(jsa: &JointAmplitude) -> Result<Vec<f64>> {
    let m = to_faer(jsa.values());
    let s = m
        .singular_values()
        .map_err(|e| Error::Numerical(format!("SVD did not converge: {e:?}")))?;
    let raw: Vec<f64> = s.iter().map(|x| x.max(0.0).powi(2)).collect();
    let total: f64 = raw.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::Numerical("singular values vanish".into()));
    }
    let mut w: Vec<f64> = raw.iter().map(|x| x / total).collect();
    w.sort_by(|a, b| b.total_cmp(a));
    Ok(w)
}

/// Keeps the leading `keep` modes and renormalizes their weights.
pub fn prune_spurious_modes(sd: &SchmidtData, keep: usize) -> Result<SchmidtData> {
    if keep == 0 {
        return Err(Error::param("keep", "must be at least 1"));
    }
    if keep > sd.rank {
        return Err(Error::KeepExceedsRank { keep, rank: sd.rank });
    }
    let total: f64 = sd.weights[..keep].iter().sum();
    let weights: Vec<f64> = sd.weights[..keep].iter().map(|w| w / total).collect();
    Ok(SchmidtData {
        coefficients: weights.iter().map(|w| w.sqrt()).collect(),
        schmidt_number: schmidt_number(&weights),
        rank: count_rank(&weights, sd.threshold),
        weights,
        signal_modes: sd.signal_modes.slice(ndarray::s![.., ..keep]).to_owned(),
        idler_modes: sd.idler_modes.slice(ndarray::s![.., ..keep]).to_owned(),
        threshold: sd.threshold,
    })
}

/// Low-gain `g² = 1 + 1/K`.
pub fn g2_from_k(k: f64) -> Result<f64> {
    if !(k >= 1.0) || !k.is_finite() {
        return Err(Error::Domain {
            operation: "g2_from_k",
            value: k,
            reason: "Schmidt number must be at least 1",
        });
    }
    Ok(1.0 + 1.0 / k)
}

/// Inverse of [`g2_from_k`]: `K = 1/(g² − 1)`.
pub fn k_from_g2(g2: f64) -> Result<f64> {
    if !(g2 > 1.0 && g2 <= 2.0) {
        return Err(Error::Domain {
            operation: "k_from_g2",
            value: g2,
            reason: "g2 must lie in (1, 2]",
        });
    }
    Ok(1.0 / (g2 - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::FrequencyGrid;

    fn grids(n: usize, m: usize) -> (FrequencyGrid, FrequencyGrid) {
        (
            FrequencyGrid::new(n, 0.0, 1.0).unwrap(),
            FrequencyGrid::new(m, 0.0, 1.0).unwrap(),
        )
    }

    #[test]
    fn separable_is_rank_one() {
        let (g, h) = grids(20, 15);
        let a: Vec<f64> = (0..20).map(|k| (k as f64 * 0.3).sin() + 1.5).collect();
        let b: Vec<Complex64> = (0..15).map(|k| Complex64::from_polar(1.0 + k as f64, k as f64)).collect();
        let f = JointAmplitude::new(g, h, Array2::from_shape_fn((20, 15), |(s, i)| a[s] * b[i])).unwrap();
        let sd = schmidt_decompose(&f, DEFAULT_RANK_THRESHOLD).unwrap();
        assert!((sd.weights[0] - 1.0).abs() < 1e-12);
        assert!((sd.schmidt_number - 1.0).abs() < 1e-12);
        assert_eq!(sd.rank, 1);
    }

    #[test]
    fn rebuilds_rectangular_matrix() {
        let (g, h) = grids(9, 13);
        let vals = Array2::from_shape_fn((9, 13), |(s, i)| {
            Complex64::new(((s * 3 + i) % 7) as f64, ((s + 2 * i) % 5) as f64 - 2.0)
        });
        let f = JointAmplitude::new(g, h, vals).unwrap();
        let sd = schmidt_decompose(&f, DEFAULT_RANK_THRESHOLD).unwrap();
        assert_eq!(sd.weights.len(), 9);
        let err = (&sd.reconstruct() - f.values()).mapv(|v| v.norm_sqr()).sum().sqrt();
        assert!(err < 1e-12);
        assert!(sd.weights.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn prune_behaviour() {
        let sd = SchmidtData::from_weights(&[0.25; 4], DEFAULT_RANK_THRESHOLD).unwrap();
        let same = prune_spurious_modes(&sd, 4).unwrap();
        assert!((same.schmidt_number - 4.0).abs() < 1e-12);

        let tail = SchmidtData::from_weights(&[0.5, 0.5, 1e-4, 1e-5], DEFAULT_RANK_THRESHOLD).unwrap();
        let two = prune_spurious_modes(&tail, 2).unwrap();
        assert_eq!(two.schmidt_number, 2.0);
        assert!(matches!(prune_spurious_modes(&tail, 5), Err(Error::KeepExceedsRank { .. })));
        assert!(prune_spurious_modes(&tail, 0).is_err());
    }

    #[test]
    fn g2_relations() {
        assert_eq!(g2_from_k(1.0).unwrap(), 2.0);
        assert!((k_from_g2(1.93).unwrap() - 1.075).abs() < 1e-3);
        assert!((k_from_g2(1.88).unwrap() - 1.136).abs() < 1e-3);
        assert!(g2_from_k(0.5).is_err());
        assert!(g2_from_k(f64::NAN).is_err());
        assert!(k_from_g2(1.0).is_err());
        assert!(k_from_g2(2.1).is_err());
        assert_eq!(k_from_g2(2.0).unwrap(), 1.0);
    }
}
