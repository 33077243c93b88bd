//! The joint spectral amplitude `f(νs, νi) = α(νs + νi)·Φ(νs, νi)`, spectral
//! filtering, and the joint temporal intensity.

use std::f64::consts::PI;

use ndarray::{Array2, Zip};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier;
use crate::grid::FrequencyGrid;
use crate::phasematch::PhaseMatchSpec;
use crate::pump::{PumpSpec, SpectralAmplitude};

/// Tolerance on the Frobenius normalization of a [`JointAmplitude`].
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Complex matrix over (signal, idler) frequencies with unit Frobenius norm.
/// Rows follow the signal grid, columns the idler grid.
#[derive(Debug, Clone, PartialEq)]
pub struct JointAmplitude {
    signal_grid: FrequencyGrid,
    idler_grid: FrequencyGrid,
    values: Array2<Complex64>,
}

impl JointAmplitude {
    /// Normalizes `values` and attaches the grids.
    pub fn new(
        signal_grid: FrequencyGrid,
        idler_grid: FrequencyGrid,
        values: Array2<Complex64>,
    ) -> Result<Self> {
        if values.dim() != (signal_grid.len(), idler_grid.len()) {
            return Err(Error::Shape(format!(
                "matrix is {:?} but grids are {}×{}",
                values.dim(),
                signal_grid.len(),
                idler_grid.len()
            )));
        }
        let norm = frobenius(&values);
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::EmptyIntensity("joint amplitude has zero norm".into()));
        }
        Ok(Self {
            signal_grid,
            idler_grid,
            values: values.mapv(|v| v / norm),
        })
    }

    pub fn signal_grid(&self) -> &FrequencyGrid {
        &self.signal_grid
    }

    pub fn idler_grid(&self) -> &FrequencyGrid {
        &self.idler_grid
    }

    pub fn values(&self) -> &Array2<Complex64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<Complex64> {
        self.values
    }

    pub fn norm(&self) -> f64 {
        frobenius(&self.values)
    }

    /// Joint spectral intensity `|f|²`.
    pub fn intensity(&self) -> Array2<f64> {
        self.values.mapv(|v| v.norm_sqr())
    }

    /// Swaps the roles of signal and idler.
    pub fn transpose(&self) -> Self {
        Self {
            signal_grid: self.idler_grid,
            idler_grid: self.signal_grid,
            values: self.values.t().to_owned(),
        }
    }

    /// Multiplies by `exp(iφ(νs))·exp(iχ(νi))`.
    pub fn with_separable_phase(
        &self,
        signal_phase: impl Fn(f64) -> f64,
        idler_phase: impl Fn(f64) -> f64,
    ) -> Self {
        let ps: Vec<Complex64> = (0..self.signal_grid.len())
            .map(|s| Complex64::from_polar(1.0, signal_phase(self.signal_grid.at(s))))
            .collect();
        let pi: Vec<Complex64> = (0..self.idler_grid.len())
            .map(|i| Complex64::from_polar(1.0, idler_phase(self.idler_grid.at(i))))
            .collect();
        let values = Array2::from_shape_fn(self.values.dim(), |(s, i)| self.values[[s, i]] * ps[s] * pi[i]);
        Self { values, ..self.clone() }
    }
}

pub(crate) fn frobenius(values: &Array2<Complex64>) -> f64 {
    values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Square grids centred on the phase-matching center spanning six times the
/// larger of the pump and phase-matching bandwidths.
pub fn default_joint_grids(
    pm: &PhaseMatchSpec,
    pump_fwhm_thz: f64,
    n_points: usize,
) -> Result<(FrequencyGrid, FrequencyGrid)> {
    let span = 6.0 * pump_fwhm_thz.max(pm.bandwidth_thz);
    Ok((
        FrequencyGrid::new(n_points, pm.signal_center_thz, span)?,
        FrequencyGrid::new(n_points, pm.idler_center_thz, span)?,
    ))
}

/// A pump grid around `pump.center_thz` covering every `νs + νi` reachable
/// from the two joint grids, dense enough for the pump's finest features.
pub fn pump_grid_for(
    pump: &PumpSpec,
    signal_grid: &FrequencyGrid,
    idler_grid: &FrequencyGrid,
) -> Result<FrequencyGrid> {
    let lo = signal_grid.min() + idler_grid.min();
    let hi = signal_grid.max() + idler_grid.max();
    let half = (hi - pump.center_thz).abs().max((pump.center_thz - lo).abs());
    let span = (2.0 * half).max(4.0 * pump.fwhm_thz) * 1.01;
    // linear interpolation along νs + νi is accurate to ~1e-4 at these
    // densities
    let mut spacing = pump.fwhm_thz / 256.0;
    if let Some(width) = pump.peak_width_thz() {
        spacing = spacing.min(width / 64.0);
    }
    if pump.shaper_resolution_thz > 0.0 {
        spacing = spacing.min(pump.shaper_resolution_thz / 8.0);
    }
    if pump.chirp_ps2 != 0.0 {
        // keep the chirp phase step below 0.05 rad out to two FWHM
        let slope = 4.0 * PI * PI * pump.chirp_ps2.abs() * 2.0 * pump.fwhm_thz;
        spacing = spacing.min(0.05 / slope);
    }
    FrequencyGrid::with_max_spacing(pump.center_thz, span, spacing)
}

/// Builds the JSA, interpolating the pump linearly along `νs + νi`.
pub fn build_jsa(
    pump: &SpectralAmplitude,
    pm: &PhaseMatchSpec,
    signal_grid: &FrequencyGrid,
    idler_grid: &FrequencyGrid,
) -> Result<JointAmplitude> {
    pm.validate()?;
    let needed_min = signal_grid.min() + idler_grid.min();
    let needed_max = signal_grid.max() + idler_grid.max();
    let pg = pump.grid();
    if !pg.contains(needed_min) || !pg.contains(needed_max) {
        return Err(Error::PumpCoverage {
            pump_min: pg.min(),
            pump_max: pg.max(),
            needed_min,
            needed_max,
        });
    }
    let values = Array2::from_shape_fn((signal_grid.len(), idler_grid.len()), |(s, i)| {
        let (nu_s, nu_i) = (signal_grid.at(s), idler_grid.at(i));
        let alpha = pump
            .interpolate((nu_s + nu_i).clamp(pg.min(), pg.max()))
            .unwrap_or_default();
        alpha * pm.amplitude(nu_s, nu_i)
    });
    JointAmplitude::new(*signal_grid, *idler_grid, values)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FilterProfile {
    /// Hard-edged box of full width `fwhm`.
    Rectangular,
    Gaussian,
    /// `exp(−ln2·(2|ν−ν_c|/fwhm)^{2m})`.
    SuperGaussian { order: u32 },
}

/// A band-pass filter described by its intensity transmission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub center_thz: f64,
    pub fwhm_thz: f64,
    pub profile: FilterProfile,
}

impl FilterSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.fwhm_thz > 0.0) || !self.fwhm_thz.is_finite() {
            return Err(Error::param(
                "filters.fwhm",
                format!("must be positive, got {}", self.fwhm_thz),
            ));
        }
        if let FilterProfile::SuperGaussian { order: 0 } = self.profile {
            return Err(Error::param("filters.order", "super-Gaussian order must be ≥ 1"));
        }
        Ok(())
    }

    pub fn intensity_transmission(&self, nu: f64) -> f64 {
        let x = 2.0 * (nu - self.center_thz).abs() / self.fwhm_thz;
        match self.profile {
            FilterProfile::Rectangular => {
                if x <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            FilterProfile::Gaussian => (-std::f64::consts::LN_2 * x * x).exp(),
            FilterProfile::SuperGaussian { order } => {
                (-std::f64::consts::LN_2 * x.powi(2 * order as i32)).exp()
            }
        }
    }

    pub fn amplitude_transmission(&self, nu: f64) -> f64 {
        self.intensity_transmission(nu).sqrt()
    }
}

/// A filtered JSA together with the fraction of pair probability that passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Filtered {
    pub jsa: JointAmplitude,
    pub transmission: f64,
}

/// Applies amplitude transmissions `√T` along each axis and renormalizes.
pub fn apply_filters(
    jsa: &JointAmplitude,
    signal_filter: &FilterSpec,
    idler_filter: &FilterSpec,
) -> Result<Filtered> {
    signal_filter.validate()?;
    idler_filter.validate()?;
    let ts: Vec<f64> = (0..jsa.signal_grid.len())
        .map(|s| signal_filter.amplitude_transmission(jsa.signal_grid.at(s)))
        .collect();
    let ti: Vec<f64> = (0..jsa.idler_grid.len())
        .map(|i| idler_filter.amplitude_transmission(jsa.idler_grid.at(i)))
        .collect();
    let mut values = jsa.values.clone();
    Zip::indexed(&mut values).for_each(|(s, i), v| *v *= ts[s] * ti[i]);
    let transmission = frobenius(&values).powi(2);
    if !(transmission > 0.0) {
        return Err(Error::EmptyIntensity(
            "filters block the whole joint spectrum".into(),
        ));
    }
    Ok(Filtered {
        jsa: JointAmplitude::new(jsa.signal_grid, jsa.idler_grid, values)?,
        transmission,
    })
}

/// Joint temporal intensity on the conjugate time axes (ps).
#[derive(Debug, Clone, PartialEq)]
pub struct JointTemporalIntensity {
    pub signal_times: Vec<f64>,
    pub idler_times: Vec<f64>,
    pub values: Array2<f64>,
}

impl JointTemporalIntensity {
    pub fn total(&self) -> f64 {
        self.values.sum()
    }

    /// Integrated intensity inside the square of half-width `half_width`
    /// centred at `(ts, ti)`.
    pub fn integrate_box(&self, ts: f64, ti: f64, half_width: f64) -> f64 {
        let mut acc = 0.0;
        for (s, &t_s) in self.signal_times.iter().enumerate() {
            if (t_s - ts).abs() > half_width {
                continue;
            }
            for (i, &t_i) in self.idler_times.iter().enumerate() {
                if (t_i - ti).abs() <= half_width {
                    acc += self.values[[s, i]];
                }
            }
        }
        acc
    }
}

/// `|F{f}|²` with a unitary centred 2D transform, so the total is preserved.
pub fn jti(jsa: &JointAmplitude) -> JointTemporalIntensity {
    JointTemporalIntensity {
        signal_times: jsa.signal_grid.time_axis(),
        idler_times: jsa.idler_grid.time_axis(),
        values: fourier::transform_2d(&jsa.values).mapv(|v| v.norm_sqr()),
    }
}
