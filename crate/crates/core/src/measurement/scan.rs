//! Gaussian-pump bandwidth/chirp scan used to find the decorrelated
//! operating point.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::jsa::{apply_filters, build_jsa, pump_grid_for, FilterSpec};
use crate::phasematch::PhaseMatchSpec;
use crate::pump::{make_pump, PumpSpec};
use crate::schmidt::{g2_from_k, schmidt_number, schmidt_weights};

/// Fixed source geometry for a scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanGeometry {
    pub phasematch: PhaseMatchSpec,
    /// Signal and idler band-pass filters, if any.
    pub filters: Option<(FilterSpec, FilterSpec)>,
    pub pump_center_thz: f64,
    /// Chirp (ps²) present on the pump before any correction is applied.
    pub setup_chirp_ps2: f64,
    pub signal_grid: FrequencyGrid,
    pub idler_grid: FrequencyGrid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub fwhm_thz: f64,
    /// Chirp correction (ps²) added on top of the setup chirp.
    pub chirp_ps2: f64,
    pub schmidt_number: f64,
    pub g2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    /// Row-major over `(fwhm, chirp)`.
    pub points: Vec<ScanPoint>,
    pub best: ScanPoint,
}

impl ScanResult {
    /// Points at a fixed chirp correction, in scan order.
    pub fn at_chirp(&self, chirp_ps2: f64) -> Vec<ScanPoint> {
        self.points.iter().filter(|p| p.chirp_ps2 == chirp_ps2).copied().collect()
    }

    pub fn at_fwhm(&self, fwhm_thz: f64) -> Vec<ScanPoint> {
        self.points.iter().filter(|p| p.fwhm_thz == fwhm_thz).copied().collect()
    }
}

fn evaluate(geometry: &ScanGeometry, fwhm: f64, chirp: f64) -> Result<ScanPoint> {
    let spec = PumpSpec::gaussian(geometry.pump_center_thz, fwhm).with_chirp(geometry.setup_chirp_ps2 + chirp);
    let pg = pump_grid_for(&spec, &geometry.signal_grid, &geometry.idler_grid)?;
    let pump = make_pump(&spec, &pg)?;
    let mut jsa = build_jsa(&pump, &geometry.phasematch, &geometry.signal_grid, &geometry.idler_grid)?;
    if let Some((fs, fi)) = &geometry.filters {
        jsa = apply_filters(&jsa, fs, fi)?.jsa;
    }
    let k = schmidt_number(&schmidt_weights(&jsa)?);
    Ok(ScanPoint {
        fwhm_thz: fwhm,
        chirp_ps2: chirp,
        schmidt_number: k,
        g2: g2_from_k(k.max(1.0))?,
    })
}

/// Evaluates K over the `fwhm × chirp` grid and reports the minimum.
pub fn decorrelation_scan(
    fwhm_values: &[f64],
    chirp_values: &[f64],
    geometry: &ScanGeometry,
) -> Result<ScanResult> {
    if fwhm_values.is_empty() {
        return Err(Error::param("scan.fwhm_thz", "range is empty"));
    }
    if chirp_values.is_empty() {
        return Err(Error::param("scan.chirp_ps2", "range is empty"));
    }
    let combos: Vec<(f64, f64)> = fwhm_values
        .iter()
        .flat_map(|f| chirp_values.iter().map(move |c| (*f, *c)))
        .collect();
    let points = combos
        .par_iter()
        .map(|(f, c)| evaluate(geometry, *f, *c))
        .collect::<Result<Vec<_>>>()?;
    let best = *points
        .iter()
        .min_by(|a, b| a.schmidt_number.total_cmp(&b.schmidt_number))
        .expect("non-empty scan");
    Ok(ScanResult { points, best })
}
