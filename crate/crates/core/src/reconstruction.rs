//! Recovering a joint amplitude from a blurred, noisy joint-spectrum
//! measurement: Richardson-Lucy deconvolution, square root, the known pump
//! phase applied along `νs + νi`, and Schmidt analysis of the result.

use ndarray::{Array2, Zip};
use num_complex::Complex64;

use crate::convolve::convolve_same;
use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::jsa::JointAmplitude;
use crate::measurement::{
    resample_to_frequencies, simulate_tof_jsi, tof_expected_counts, DelayAxis, JsiRecord, Psf,
    ToFSpec,
};
use crate::pump::{log_parabola_offset, SpectralAmplitude};
use crate::schmidt::{prune_spurious_modes, schmidt_decompose, DEFAULT_RANK_THRESHOLD};

pub const DEFAULT_RL_ITERATIONS: usize = 50;
/// Divide-stability floor, relative to the maximum of the measured image.
pub const DEFAULT_RL_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RlSettings {
    pub iterations: usize,
    pub floor: f64,
    /// Stop early once `‖u⁽ᵏ⁺¹⁾ − u⁽ᵏ⁾‖/‖u⁽ᵏ⁾‖` drops below this.
    pub tolerance: Option<f64>,
}

impl Default for RlSettings {
    fn default() -> Self {
        Self {
            iterations: DEFAULT_RL_ITERATIONS,
            floor: DEFAULT_RL_FLOOR,
            tolerance: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RlOutcome {
    pub image: Array2<f64>,
    pub iterations_run: usize,
}

/// Richardson-Lucy deconvolution with the default floor and no early stop.
pub fn richardson_lucy(blurred: &Array2<f64>, psf: &Psf, iterations: usize) -> Result<Array2<f64>> {
    let settings = RlSettings {
        iterations,
        ..Default::default()
    };
    richardson_lucy_with(blurred, psf, &settings).map(|o| o.image)
}

/// Multiplicative update `u ← u · (psf⋆ ∗ (blurred / (psf ∗ u)))`, starting
/// from `u = blurred`.
pub fn richardson_lucy_with(blurred: &Array2<f64>, psf: &Psf, settings: &RlSettings) -> Result<RlOutcome> {
    if settings.iterations < 1 {
        return Err(Error::param("reconstruction.rl_iterations", "must be at least 1"));
    }
    if !(settings.floor > 0.0) {
        return Err(Error::param("reconstruction.rl_floor", "must be positive"));
    }
    if blurred.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::param("blurred", "image must be non-negative and finite"));
    }
    let kernel = psf.kernel();
    let floor = settings.floor * blurred.iter().copied().fold(0.0, f64::max);
    let mut u = blurred.clone();
    let mut run = 0;
    for _ in 0..settings.iterations {
        run += 1;
        let estimate = convolve_same(&u, kernel, false);
        let mut ratio = blurred.clone();
        Zip::from(&mut ratio).and(&estimate).for_each(|r, e| {
            *r = if *r > 0.0 { *r / e.max(floor) } else { 0.0 };
        });
        let correction = convolve_same(&ratio, kernel, true);
        let next = &u * &correction;
        let stop = settings.tolerance.is_some_and(|tol| {
            let diff = (&next - &u).mapv(|v| v * v).sum().sqrt();
            let base = u.mapv(|v| v * v).sum().sqrt();
            base > 0.0 && diff / base < tol
        });
        u = next;
        if stop {
            break;
        }
    }
    Ok(RlOutcome { image: u, iterations_run: run })
}

/// Where the origin of the pump phase is placed on the `νs + νi` axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CenterPolicy {
    /// Align the pump's intensity peak with the maximum of the JSI (ties
    /// resolved towards the grid center), refined to sub-sample precision
    /// with a log-parabola through the neighbouring samples.
    JsiMaximum,
    /// Use absolute frequencies as they are.
    Absolute,
    /// Shift `νs + νi` by this many THz before looking up the phase.
    Offset(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionConfig {
    pub rl_iterations: usize,
    pub rl_floor: f64,
    pub rl_tolerance: Option<f64>,
    /// Known pump field; only its phase is used.
    pub phase_source: SpectralAmplitude,
    pub center_policy: CenterPolicy,
}

impl ReconstructionConfig {
    pub fn new(phase_source: SpectralAmplitude) -> Self {
        Self {
            rl_iterations: DEFAULT_RL_ITERATIONS,
            rl_floor: DEFAULT_RL_FLOOR,
            rl_tolerance: None,
            phase_source,
            center_policy: CenterPolicy::JsiMaximum,
        }
    }

    pub fn rl_settings(&self) -> RlSettings {
        RlSettings {
            iterations: self.rl_iterations,
            floor: self.rl_floor,
            tolerance: self.rl_tolerance,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rl_iterations < 1 {
            return Err(Error::param("reconstruction.rl_iterations", "must be at least 1"));
        }
        if !(self.rl_floor > 0.0) {
            return Err(Error::param("reconstruction.rl_floor", "must be positive"));
        }
        Ok(())
    }
}

/// `√jsi · exp(iφ_pump(νs + νi − shift))`, Frobenius-normalized.
pub fn reconstruct_jsa(
    jsi: &Array2<f64>,
    signal_grid: &FrequencyGrid,
    idler_grid: &FrequencyGrid,
    cfg: &ReconstructionConfig,
) -> Result<JointAmplitude> {
    cfg.validate()?;
    if jsi.dim() != (signal_grid.len(), idler_grid.len()) {
        return Err(Error::Shape(format!(
            "JSI is {:?} but grids are {}×{}",
            jsi.dim(),
            signal_grid.len(),
            idler_grid.len()
        )));
    }
    let shift = match cfg.center_policy {
        CenterPolicy::Absolute => 0.0,
        CenterPolicy::Offset(x) => x,
        CenterPolicy::JsiMaximum => {
            let (s, i) = jsi_peak(jsi);
            let column: Vec<f64> = jsi.column(i).to_vec();
            let row: Vec<f64> = jsi.row(s).to_vec();
            let along_s = signal_grid.at(s) + signal_grid.spacing() * log_parabola_offset(&column, s);
            let along_i = idler_grid.at(i) + idler_grid.spacing() * log_parabola_offset(&row, i);
            // each single-axis refinement estimates the peak's νs + νi
            0.5 * (along_s + idler_grid.at(i) + signal_grid.at(s) + along_i)
                - cfg.phase_source.peak_frequency()
        }
    };
    let lo = signal_grid.min() + idler_grid.min() - shift;
    let hi = signal_grid.max() + idler_grid.max() - shift;
    let pg = cfg.phase_source.grid();
    if !pg.contains(lo) || !pg.contains(hi) {
        return Err(Error::PhaseCoverage {
            min: pg.min(),
            max: pg.max(),
            needed_min: lo,
            needed_max: hi,
        });
    }
    let values = Array2::from_shape_fn(jsi.dim(), |(s, i)| {
        let amplitude = jsi[[s, i]].max(0.0).sqrt();
        let nu = (signal_grid.at(s) + idler_grid.at(i) - shift).clamp(pg.min(), pg.max());
        let field = cfg.phase_source.interpolate(nu).unwrap_or_default();
        let phasor = if field.norm() > 0.0 { field / field.norm() } else { Complex64::new(1.0, 0.0) };
        phasor * amplitude
    });
    JointAmplitude::new(*signal_grid, *idler_grid, values)
}

/// Largest entry, ties resolved towards the grid center.
fn jsi_peak(jsi: &Array2<f64>) -> (usize, usize) {
    let (rows, cols) = jsi.dim();
    let mid = (0.5 * (rows as f64 - 1.0), 0.5 * (cols as f64 - 1.0));
    let dist = |(s, i): (usize, usize)| (s as f64 - mid.0).hypot(i as f64 - mid.1);
    let mut best = (0, 0);
    let mut best_val = f64::NEG_INFINITY;
    for ((s, i), v) in jsi.indexed_iter() {
        if *v > best_val || (*v == best_val && dist((s, i)) < dist(best)) {
            best = (s, i);
            best_val = *v;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionReport {
    pub weights: Vec<f64>,
    pub schmidt_number: f64,
    /// K after keeping only the first `k_expected` modes.
    pub pruned_schmidt_number: f64,
    /// `max |λₖ − 1/k_expected|` over the first `k_expected` weights.
    pub flatness: f64,
    pub k_expected: usize,
}

impl ReconstructionReport {
    /// Largest weight beyond the expected dimension, zero if there is none.
    pub fn largest_tail_weight(&self) -> f64 {
        self.weights.iter().skip(self.k_expected).copied().fold(0.0, f64::max)
    }
}

pub fn analyze_reconstruction(jsa: &JointAmplitude, k_expected: usize) -> Result<ReconstructionReport> {
    if k_expected < 1 {
        return Err(Error::param("k_expected", "must be at least 1"));
    }
    let sd = schmidt_decompose(jsa, DEFAULT_RANK_THRESHOLD)?;
    let keep = k_expected.min(sd.rank).max(1);
    let pruned = prune_spurious_modes(&sd, keep)?;
    let target = 1.0 / k_expected as f64;
    let flatness = (0..k_expected)
        .map(|k| (sd.weights.get(k).copied().unwrap_or(0.0) - target).abs())
        .fold(0.0, f64::max);
    Ok(ReconstructionReport {
        schmidt_number: sd.schmidt_number,
        pruned_schmidt_number: pruned.schmidt_number,
        flatness,
        k_expected,
        weights: sd.weights,
    })
}

/// Whether the simulated measurement draws Poisson counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Noise {
    Poisson,
    Noiseless,
}

/// Every stage of a simulated measure-and-reconstruct run.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub signal_axis: DelayAxis,
    pub idler_axis: DelayAxis,
    /// Counts on the delay grid as measured (Poisson or expected).
    pub measured: Array2<f64>,
    /// Present when counts were sampled.
    pub record: Option<JsiRecord>,
    pub deconvolved: Array2<f64>,
    /// Raw and deconvolved JSIs mapped back onto the frequency grids.
    pub raw_jsi: Array2<f64>,
    pub deconvolved_jsi: Array2<f64>,
    pub raw_reconstruction: JointAmplitude,
    pub reconstruction: JointAmplitude,
    pub raw_report: ReconstructionReport,
    pub report: ReconstructionReport,
}

/// Forward-simulates a ToF measurement of `truth` and reconstructs it both
/// with and without deconvolution.
pub fn run_pipeline(
    truth: &JointAmplitude,
    tof: &ToFSpec,
    cfg: &ReconstructionConfig,
    k_expected: usize,
    noise: Noise,
) -> Result<PipelineOutput> {
    cfg.validate()?;
    let (signal_axis, idler_axis, measured, record) = match noise {
        Noise::Poisson => {
            let record = simulate_tof_jsi(truth, tof)?;
            (record.signal.clone(), record.idler.clone(), record.counts_f64(), Some(record))
        }
        Noise::Noiseless => {
            let (s, i, expected) = tof_expected_counts(truth, tof)?;
            (s, i, expected, None)
        }
    };
    let deconvolved = richardson_lucy_with(&measured, &tof.psf, &cfg.rl_settings())?.image;
    let (sg, ig) = (*truth.signal_grid(), *truth.idler_grid());
    let raw_jsi = resample_to_frequencies(&measured, &signal_axis, &idler_axis);
    let deconvolved_jsi = resample_to_frequencies(&deconvolved, &signal_axis, &idler_axis);
    let raw_reconstruction = reconstruct_jsa(&raw_jsi, &sg, &ig, cfg)?;
    let reconstruction = reconstruct_jsa(&deconvolved_jsi, &sg, &ig, cfg)?;
    let raw_report = analyze_reconstruction(&raw_reconstruction, k_expected)?;
    let report = analyze_reconstruction(&reconstruction, k_expected)?;
    Ok(PipelineOutput {
        signal_axis,
        idler_axis,
        measured,
        record,
        deconvolved,
        raw_jsi,
        deconvolved_jsi,
        raw_reconstruction,
        reconstruction,
        raw_report,
        report,
    })
}
