//! Phase-matching functions: a ridge through `(νs0, νi0)` at angle θ from the
//! signal axis, with a sinc or Gaussian profile across it.

use std::sync::OnceLock;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseMatchProfile {
    Sinc,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseMatchSpec {
    pub profile: PhaseMatchProfile,
    /// Ridge angle from the signal-frequency axis, degrees, in (0, 90).
    pub angle_deg: f64,
    /// Intensity FWHM across the ridge (THz).
    pub bandwidth_thz: f64,
    pub signal_center_thz: f64,
    pub idler_center_thz: f64,
}

/// `x > 0` with `sinc²(x) = 1/2`, `sinc(x) = sin(x)/x`.
pub fn sinc_half_power_point() -> f64 {
    static X: OnceLock<f64> = OnceLock::new();
    *X.get_or_init(|| {
        let f = |x: f64| (x.sin() / x).powi(2) - 0.5;
        let (mut lo, mut hi) = (1.0, 2.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    })
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

impl PhaseMatchSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.angle_deg > 0.0 && self.angle_deg < 90.0) {
            return Err(Error::param(
                "phasematch.angle_deg",
                format!("must lie strictly between 0 and 90, got {}", self.angle_deg),
            ));
        }
        if !(self.bandwidth_thz > 0.0) || !self.bandwidth_thz.is_finite() {
            return Err(Error::param(
                "phasematch.bandwidth_thz",
                format!("must be positive, got {}", self.bandwidth_thz),
            ));
        }
        if !self.signal_center_thz.is_finite() || !self.idler_center_thz.is_finite() {
            return Err(Error::param("phasematch.center", "must be finite"));
        }
        Ok(())
    }

    /// Scale `c₁` in `sinc(c₁·p/B)` giving an intensity FWHM of `B`.
    pub fn sinc_scale() -> f64 {
        2.0 * sinc_half_power_point()
    }

    /// Scale `c₂` in `exp(−c₂·p²/B²)` giving an intensity FWHM of `B`.
    pub fn gaussian_scale() -> f64 {
        2.0 * std::f64::consts::LN_2
    }

    /// Coordinate across the ridge for detunings `(Δs, Δi)`.
    pub fn perpendicular(&self, signal_detuning: f64, idler_detuning: f64) -> f64 {
        let theta = self.angle_deg.to_radians();
        -signal_detuning * theta.sin() + idler_detuning * theta.cos()
    }

    /// Unnormalized profile value at absolute frequencies.
    pub fn amplitude(&self, nu_s: f64, nu_i: f64) -> f64 {
        let p = self.perpendicular(nu_s - self.signal_center_thz, nu_i - self.idler_center_thz);
        let u = p / self.bandwidth_thz;
        match self.profile {
            PhaseMatchProfile::Sinc => sinc(Self::sinc_scale() * u),
            PhaseMatchProfile::Gaussian => (-Self::gaussian_scale() * u * u).exp(),
        }
    }
}

/// Frobenius-normalized phase-matching matrix, rows indexed by signal.
pub fn make_phasematching(
    spec: &PhaseMatchSpec,
    signal_grid: &FrequencyGrid,
    idler_grid: &FrequencyGrid,
) -> Result<Array2<f64>> {
    spec.validate()?;
    let mut m = Array2::from_shape_fn((signal_grid.len(), idler_grid.len()), |(s, i)| {
        spec.amplitude(signal_grid.at(s), idler_grid.at(i))
    });
    let norm = m.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::DegenerateGrid(
            "phase-matching function vanishes on the grid".into(),
        ));
    }
    m.mapv_inplace(|v| v / norm);
    Ok(m)
}
