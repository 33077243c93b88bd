//! Pump spectral amplitudes: Gaussian, Hermite-Gauss, cosine-kernel and
//! weighted time-bin shapes, with optional chirp and pulse-shaper emulation.
//!
//! All widths are intensity FWHM. The amplitude envelope of a pump with
//! intensity FWHM `Δν` is `exp(−(ν−ν0)²/(4σ²))` with `σ = Δν/(2√(2 ln 2))`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier;
use crate::grid::FrequencyGrid;
use crate::units::fwhm_to_sigma;

/// Tolerance on `Σ weights = 1` for weighted time bins.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum PumpShape {
    Gaussian,
    HermiteGauss { order: usize },
    /// `order + 1` equally weighted Gaussian time bins.
    CosineKernel { order: usize },
    /// One time bin per weight; weights are power fractions summing to one.
    WeightedTimeBins { weights: Vec<f64> },
}

impl PumpShape {
    /// Number of time bins for the bin-based shapes.
    pub fn bins(&self) -> Option<usize> {
        match self {
            PumpShape::CosineKernel { order } => Some(order + 1),
            PumpShape::WeightedTimeBins { weights } => Some(weights.len()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PumpSpec {
    pub shape: PumpShape,
    /// Central pump frequency ν0 (THz).
    pub center_thz: f64,
    /// Intensity FWHM of the envelope (THz).
    pub fwhm_thz: f64,
    /// Quadratic spectral phase coefficient (ps²); adds `+(chirp/2)·ω²`
    /// with `ω = 2π(ν − ν0)`.
    pub chirp_ps2: f64,
    /// Time-bin separation Δt (ps), used by the bin-based shapes.
    pub bin_separation_ps: f64,
    /// Pulse-shaper resolution (THz); zero means an ideal shaper.
    pub shaper_resolution_thz: f64,
}

impl PumpSpec {
    pub fn gaussian(center_thz: f64, fwhm_thz: f64) -> Self {
        Self {
            shape: PumpShape::Gaussian,
            center_thz,
            fwhm_thz,
            chirp_ps2: 0.0,
            bin_separation_ps: 0.0,
            shaper_resolution_thz: 0.0,
        }
    }

    pub fn cosine_kernel(center_thz: f64, fwhm_thz: f64, order: usize, bin_separation_ps: f64) -> Self {
        Self {
            shape: PumpShape::CosineKernel { order },
            bin_separation_ps,
            ..Self::gaussian(center_thz, fwhm_thz)
        }
    }

    pub fn weighted_time_bins(
        center_thz: f64,
        fwhm_thz: f64,
        weights: Vec<f64>,
        bin_separation_ps: f64,
    ) -> Self {
        Self {
            shape: PumpShape::WeightedTimeBins { weights },
            bin_separation_ps,
            ..Self::gaussian(center_thz, fwhm_thz)
        }
    }

    pub fn with_chirp(mut self, chirp_ps2: f64) -> Self {
        self.chirp_ps2 = chirp_ps2;
        self
    }

    pub fn with_shaper_resolution(mut self, resolution_thz: f64) -> Self {
        self.shaper_resolution_thz = resolution_thz;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fwhm_thz > 0.0) || !self.fwhm_thz.is_finite() {
            return Err(Error::param("pump.fwhm_thz", format!("must be positive, got {}", self.fwhm_thz)));
        }
        if !self.center_thz.is_finite() {
            return Err(Error::param("pump.center_thz", "must be finite"));
        }
        if !self.chirp_ps2.is_finite() {
            return Err(Error::param("pump.chirp_ps2", "must be finite"));
        }
        if !(self.shaper_resolution_thz >= 0.0) || !self.shaper_resolution_thz.is_finite() {
            return Err(Error::param(
                "pump.shaper_resolution_thz",
                format!("must be non-negative, got {}", self.shaper_resolution_thz),
            ));
        }
        if self.shape.bins().is_some() && (!(self.bin_separation_ps > 0.0) || !self.bin_separation_ps.is_finite()) {
            return Err(Error::param(
                "pump.bin_separation_ps",
                format!("must be positive, got {}", self.bin_separation_ps),
            ));
        }
        if let PumpShape::WeightedTimeBins { weights } = &self.shape {
            if weights.is_empty() {
                return Err(Error::InvalidWeights("no weights given".into()));
            }
            if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
                return Err(Error::InvalidWeights(format!("weight {w} is negative or not finite")));
            }
            let sum: f64 = weights.iter().sum();
            if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
                return Err(Error::InvalidWeights(format!("weights sum to {sum}, expected 1")));
            }
        }
        Ok(())
    }

    /// Null-to-null width `2/(KΔt)` of the spectral peaks of a K-bin shape.
    pub fn peak_width_thz(&self) -> Option<f64> {
        self.shape
            .bins()
            .map(|k| 2.0 / (k as f64 * self.bin_separation_ps))
    }

    /// Times (ps) of the bin centres, `Δt·(k − (K−1)/2)`.
    pub fn bin_times(&self) -> Vec<f64> {
        let k = self.shape.bins().unwrap_or(1);
        (0..k)
            .map(|j| self.bin_separation_ps * (j as f64 - 0.5 * (k as f64 - 1.0)))
            .collect()
    }
}

/// A complex spectral amplitude on a uniform grid, normalized so that
/// `Σ|v|²·δν = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralAmplitude {
    grid: FrequencyGrid,
    values: Vec<Complex64>,
}

impl SpectralAmplitude {
    /// Normalizes `values` onto `grid`.
    pub fn new(grid: FrequencyGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        let mut out = Self { grid, values };
        let norm = out.l2_norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::EmptyIntensity("spectral amplitude has zero norm".into()));
        }
        out.values.iter_mut().for_each(|v| *v /= norm);
        Ok(out)
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `sqrt(Σ|v|²·δν)`.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.spacing()).sqrt()
    }

    /// Linear interpolation of the complex amplitude at absolute frequency
    /// `nu`; `None` outside the grid.
    pub fn interpolate(&self, nu: f64) -> Option<Complex64> {
        if !self.grid.contains(nu) {
            return None;
        }
        let last = self.values.len() - 1;
        let pos = self.grid.position(nu).clamp(0.0, last as f64);
        let i = (pos.floor() as usize).min(last - 1);
        let frac = pos - i as f64;
        Some(self.values[i] * (1.0 - frac) + self.values[i + 1] * frac)
    }

    /// Frequency of the intensity maximum, refined between samples with a
    /// parabola through the log-intensities around the largest sample.
    pub fn peak_frequency(&self) -> f64 {
        let intensity: Vec<f64> = self.values.iter().map(|v| v.norm_sqr()).collect();
        let k = argmax_closest_to_center(intensity.iter().copied(), intensity.len());
        self.grid.at(k) + self.grid.spacing() * log_parabola_offset(&intensity, k)
    }
}

/// Sub-sample offset of a peak at `k` from a parabola through the logarithms
/// of it and its two neighbours; zero at the edges or with non-positive
/// samples.
pub(crate) fn log_parabola_offset(values: &[f64], k: usize) -> f64 {
    if k == 0 || k + 1 >= values.len() || values[k - 1..=k + 1].iter().any(|v| *v <= 0.0) {
        return 0.0;
    }
    let (a, b, c) = (values[k - 1].ln(), values[k].ln(), values[k + 1].ln());
    let curvature = a - 2.0 * b + c;
    if curvature >= 0.0 {
        return 0.0;
    }
    (0.5 * (a - c) / curvature).clamp(-0.5, 0.5)
}

/// Index of the largest value; ties go to the index nearest `len/2`.
pub(crate) fn argmax_closest_to_center(values: impl Iterator<Item = f64>, len: usize) -> usize {
    let mid = 0.5 * (len as f64 - 1.0);
    let mut best = 0usize;
    let mut best_val = f64::NEG_INFINITY;
    for (k, v) in values.enumerate() {
        let closer = (k as f64 - mid).abs() < (best as f64 - mid).abs();
        if v > best_val || (v == best_val && closer) {
            best = k;
            best_val = v;
        }
    }
    best
}

/// `sin(πKy)/sin(πy)`, with its limit `(−1)^{m(K−1)}·K` at integer `y = m`.
fn dirichlet_kernel(y: f64, k: usize) -> f64 {
    let den = (PI * y).sin();
    if den.abs() < 1e-10 {
        let m = y.round() as i64;
        let sign = if (m * (k as i64 - 1)).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        sign * k as f64
    } else {
        (PI * k as f64 * y).sin() / den
    }
}

/// Normalized Hermite functions `h_n(x) ∝ H_n(x)·exp(−x²/2)` via the stable
/// three-term recurrence.
fn hermite_function(order: usize, x: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25) * (-0.5 * x * x).exp();
    for n in 0..order {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * cur - (nf / (nf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Builds the pump amplitude described by `spec` on `grid`.
pub fn make_pump(spec: &PumpSpec, grid: &FrequencyGrid) -> Result<SpectralAmplitude> {
    spec.validate()?;
    let required = 4.0 * spec.fwhm_thz;
    if grid.span() < required {
        return Err(Error::GridTooNarrow {
            span: grid.span(),
            required,
        });
    }
    if let Some(width) = spec.peak_width_thz() {
        let limit = width / 4.0;
        if grid.spacing() >= limit {
            return Err(Error::GridTooCoarse {
                spacing: grid.spacing(),
                limit,
                feature: width,
            });
        }
    }

    let sigma = fwhm_to_sigma(spec.fwhm_thz);
    let dt = spec.bin_separation_ps;
    let bin_times = spec.bin_times();
    let mut values: Vec<Complex64> = (0..grid.len())
        .map(|k| {
            let x = grid.at(k) - spec.center_thz;
            let envelope = (-x * x / (4.0 * sigma * sigma)).exp();
            match &spec.shape {
                PumpShape::Gaussian => Complex64::new(envelope, 0.0),
                PumpShape::HermiteGauss { order } => {
                    Complex64::new(hermite_function(*order, x / (2f64.sqrt() * sigma)), 0.0)
                }
                PumpShape::CosineKernel { order } => {
                    Complex64::new(envelope * dirichlet_kernel(x * dt, order + 1), 0.0)
                }
                PumpShape::WeightedTimeBins { weights } => {
                    let comb: Complex64 = weights
                        .iter()
                        .zip(&bin_times)
                        .map(|(w, t)| Complex64::from_polar(w.sqrt(), TAU * x * t))
                        .sum();
                    envelope * comb
                }
            }
        })
        .collect();

    if spec.chirp_ps2 != 0.0 {
        for (k, v) in values.iter_mut().enumerate() {
            let omega = TAU * (grid.at(k) - spec.center_thz);
            *v *= Complex64::from_polar(1.0, 0.5 * spec.chirp_ps2 * omega * omega);
        }
    }

    if spec.shaper_resolution_thz > 0.0 {
        values = emulate_shaper(&values, grid, spec.center_thz, spec.shaper_resolution_thz);
    }

    SpectralAmplitude::new(*grid, values)
}

/// Finite-resolution pulse shaper: the spectral phase is held constant over
/// each resolvable bin of width `resolution` (bins centred on `center`),
/// then the field is smoothed by a Gaussian of amplitude FWHM `resolution`.
fn emulate_shaper(
    values: &[Complex64],
    grid: &FrequencyGrid,
    center: f64,
    resolution: f64,
) -> Vec<Complex64> {
    let bin_of = |k: usize| ((grid.at(k) - center) / resolution + 0.5).floor() as i64;
    let mut quantized = values.to_vec();
    let mut start = 0;
    while start < values.len() {
        let bin = bin_of(start);
        let mut end = start;
        while end < values.len() && bin_of(end) == bin {
            end += 1;
        }
        let sum: Complex64 = values[start..end].iter().sum();
        if sum.norm() > 0.0 {
            let phasor = sum / sum.norm();
            for v in &mut quantized[start..end] {
                *v = phasor * v.norm();
            }
        }
        start = end;
    }

    let sigma = fwhm_to_sigma(resolution) / grid.spacing();
    let half = (4.0 * sigma).ceil() as isize;
    let kernel: Vec<f64> = (-half..=half)
        .map(|j| (-(j * j) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let ksum: f64 = kernel.iter().sum();
    let n = quantized.len() as isize;
    (0..n)
        .map(|i| {
            kernel
                .iter()
                .enumerate()
                .filter_map(|(j, w)| {
                    let src = i + j as isize - half;
                    (0..n).contains(&src).then(|| quantized[src as usize] * (*w / ksum))
                })
                .sum()
        })
        .collect()
}

/// A pump field in the time domain.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeProfile {
    /// Times in ps, with `t = 0` at index `n/2`.
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl TimeProfile {
    pub fn time_step(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.time_step()).sqrt()
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }
}

/// Temporal field of a pump (continuous-normalized Fourier transform over the
/// detuning from the grid center), with `‖profile‖₂ = ‖pump‖₂`.
pub fn pump_time_profile(pump: &SpectralAmplitude) -> TimeProfile {
    TimeProfile {
        times: pump.grid().time_axis(),
        values: fourier::spectrum_to_time(pump.values(), pump.grid().spacing()),
    }
}
