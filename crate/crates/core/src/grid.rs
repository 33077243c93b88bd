//! Uniform frequency sampling.

use crate::error::{Error, Result};

/// A uniform grid of `n_points` optical frequencies (THz) spanning `span`
/// around `center`. Sample `k` sits at `center + span·(k/(n−1) − 1/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    n_points: usize,
    center: f64,
    span: f64,
}

impl FrequencyGrid {
    pub fn new(n_points: usize, center: f64, span: f64) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::DegenerateGrid(format!(
                "need at least 2 points, got {n_points}"
            )));
        }
        if !(span > 0.0) || !span.is_finite() {
            return Err(Error::DegenerateGrid(format!(
                "span must be positive and finite, got {span}"
            )));
        }
        if !center.is_finite() {
            return Err(Error::DegenerateGrid(format!("center must be finite, got {center}")));
        }
        Ok(Self {
            n_points,
            center,
            span,
        })
    }

    /// Smallest grid centred on `center` covering `span` whose spacing does
    /// not exceed `max_spacing`.
    pub fn with_max_spacing(center: f64, span: f64, max_spacing: f64) -> Result<Self> {
        if !(max_spacing > 0.0) {
            return Err(Error::DegenerateGrid(format!(
                "spacing must be positive, got {max_spacing}"
            )));
        }
        let n = (span / max_spacing).ceil() as usize + 1;
        Self::new(n.max(2), center, span)
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn span(&self) -> f64 {
        self.span
    }

    pub fn spacing(&self) -> f64 {
        self.span / (self.n_points - 1) as f64
    }

    pub fn min(&self) -> f64 {
        self.center - 0.5 * self.span
    }

    pub fn max(&self) -> f64 {
        self.center + 0.5 * self.span
    }

    pub fn at(&self, k: usize) -> f64 {
        self.min() + self.spacing() * k as f64
    }

    /// Offset of sample `k` from the grid center.
    pub fn detuning(&self, k: usize) -> f64 {
        self.spacing() * (k as f64 - 0.5 * (self.n_points - 1) as f64)
    }

    pub fn samples(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.at(k)).collect()
    }

    pub fn contains(&self, nu: f64) -> bool {
        let tol = 1e-9 * self.spacing();
        nu >= self.min() - tol && nu <= self.max() + tol
    }

    /// Fractional index of `nu`, i.e. `k` such that `at(k) == nu`.
    pub fn position(&self, nu: f64) -> f64 {
        (nu - self.min()) / self.spacing()
    }

    /// Index of the sample nearest to `nu`, clamped to the grid.
    pub fn nearest(&self, nu: f64) -> usize {
        let p = self.position(nu).round();
        p.clamp(0.0, (self.n_points - 1) as f64) as usize
    }

    /// Conjugate time axis (ps) used by the centred Fourier transform:
    /// `t_j = (j − n/2) / (n·spacing)`.
    pub fn time_axis(&self) -> Vec<f64> {
        let n = self.n_points;
        let dt = 1.0 / (n as f64 * self.spacing());
        (0..n).map(|j| (j as f64 - (n / 2) as f64) * dt).collect()
    }

    pub fn time_step(&self) -> f64 {
        1.0 / (self.n_points as f64 * self.spacing())
    }
}
