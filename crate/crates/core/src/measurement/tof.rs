//! Time-of-flight spectrograph: dispersion maps each photon's frequency to
//! an arrival delay `t = D·(λ(ν) − λ(ν_c))`, the detection system blurs the
//! joint histogram with a point-spread function, and counts are Poissonian.

use ndarray::Array2;
use rand_distr::{Distribution, Poisson};

use crate::convolve::convolve_same;
use crate::error::{Error, Result};
use crate::fourier::{bandlimited_weights, interpolate_2d, interpolate_2d_complex};
use crate::grid::FrequencyGrid;
use crate::jsa::JointAmplitude;
use crate::units::SPEED_OF_LIGHT_NM_THZ;

/// Tolerance on the unit sum of a PSF.
pub const PSF_SUM_TOLERANCE: f64 = 1e-9;

/// Non-negative blur kernel with odd dimensions and unit sum.
#[derive(Debug, Clone, PartialEq)]
pub struct Psf(Array2<f64>);

impl Psf {
    pub fn new(kernel: Array2<f64>) -> Result<Self> {
        let (r, c) = kernel.dim();
        if r % 2 == 0 || c % 2 == 0 {
            return Err(Error::InvalidPsf(format!("dimensions must be odd, got {r}×{c}")));
        }
        if kernel.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidPsf("entries must be non-negative and finite".into()));
        }
        let sum = kernel.sum();
        if (sum - 1.0).abs() > PSF_SUM_TOLERANCE {
            return Err(Error::InvalidPsf(format!("entries sum to {sum}, expected 1")));
        }
        Ok(Self(kernel))
    }

    /// Scales `kernel` to unit sum before validating it.
    pub fn normalized(kernel: Array2<f64>) -> Result<Self> {
        let sum = kernel.sum();
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(Error::InvalidPsf("kernel has no positive weight".into()));
        }
        Self::new(kernel / sum)
    }

    pub fn identity() -> Self {
        Self(Array2::from_elem((1, 1), 1.0))
    }

    /// Isotropic Gaussian with the given FWHM in delay bins, truncated at 4σ.
    pub fn gaussian(fwhm_bins: f64) -> Result<Self> {
        Self::gaussian_2d(fwhm_bins, fwhm_bins)
    }

    pub fn gaussian_2d(fwhm_rows: f64, fwhm_cols: f64) -> Result<Self> {
        if !(fwhm_rows > 0.0) || !(fwhm_cols > 0.0) {
            return Err(Error::param("tof.psf_fwhm_bins", "must be positive"));
        }
        let sr = crate::units::fwhm_to_sigma(fwhm_rows);
        let sc = crate::units::fwhm_to_sigma(fwhm_cols);
        let (hr, hc) = ((4.0 * sr).ceil() as usize, (4.0 * sc).ceil() as usize);
        let kernel = Array2::from_shape_fn((2 * hr + 1, 2 * hc + 1), |(a, b)| {
            let x = a as f64 - hr as f64;
            let y = b as f64 - hc as f64;
            (-0.5 * (x * x / (sr * sr) + y * y / (sc * sc))).exp()
        });
        Self::normalized(kernel)
    }

    pub fn kernel(&self) -> &Array2<f64> {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToFSpec {
    /// Chromatic dispersion of each arm (ps/nm).
    pub dispersion_ps_per_nm: f64,
    pub psf: Psf,
    /// Expected number of detected coincidences.
    pub total_counts: f64,
    pub seed: u64,
}

impl ToFSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.dispersion_ps_per_nm != 0.0) || !self.dispersion_ps_per_nm.is_finite() {
            return Err(Error::param("tof.dispersion_ps_per_nm", "must be non-zero and finite"));
        }
        if !(self.total_counts > 0.0) || !self.total_counts.is_finite() {
            return Err(Error::param(
                "tof.total_counts",
                format!("must be positive, got {}", self.total_counts),
            ));
        }
        Ok(())
    }
}

/// Uniform arrival-delay axis (ps) spanning the image of a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayAxis {
    pub grid: FrequencyGrid,
    pub dispersion_ps_per_nm: f64,
    pub delays: Vec<f64>,
}

impl DelayAxis {
    pub fn new(grid: FrequencyGrid, dispersion_ps_per_nm: f64) -> Self {
        let mut axis = Self {
            grid,
            dispersion_ps_per_nm,
            delays: Vec::new(),
        };
        let (a, b) = (axis.delay_of(grid.min()), axis.delay_of(grid.max()));
        let (lo, hi) = (a.min(b), a.max(b));
        let n = grid.len();
        axis.delays = (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect();
        axis
    }

    fn reference_wavelength(&self) -> f64 {
        SPEED_OF_LIGHT_NM_THZ / self.grid.center()
    }

    pub fn delay_of(&self, nu: f64) -> f64 {
        self.dispersion_ps_per_nm * (SPEED_OF_LIGHT_NM_THZ / nu - self.reference_wavelength())
    }

    pub fn frequency_of(&self, delay: f64) -> f64 {
        SPEED_OF_LIGHT_NM_THZ / (self.reference_wavelength() + delay / self.dispersion_ps_per_nm)
    }

    /// `|dν/dt|` at frequency `nu`.
    pub fn jacobian(&self, nu: f64) -> f64 {
        nu * nu / (SPEED_OF_LIGHT_NM_THZ * self.dispersion_ps_per_nm.abs())
    }

    pub fn step(&self) -> f64 {
        self.delays[1] - self.delays[0]
    }

    /// The delay samples as a uniform grid.
    pub fn delay_grid(&self) -> FrequencyGrid {
        let (lo, hi) = (self.delays[0], self.delays[self.delays.len() - 1]);
        FrequencyGrid::new(self.delays.len(), 0.5 * (lo + hi), hi - lo).expect("delay axis is non-degenerate")
    }
}

/// Samples the joint amplitude at the frequencies of the delay bins by
/// band-limited interpolation and returns the density per ps², `|f|²·J_s·J_i`.
pub fn resample_to_delays(jsa: &JointAmplitude, signal: &DelayAxis, idler: &DelayAxis) -> Array2<f64> {
    let freqs = |axis: &DelayAxis| -> Vec<f64> { axis.delays.iter().map(|&t| axis.frequency_of(t)).collect() };
    let (fs, fi) = (freqs(signal), freqs(idler));
    let rows = bandlimited_weights(jsa.signal_grid(), &fs);
    let cols = bandlimited_weights(jsa.idler_grid(), &fi);
    let amplitude = interpolate_2d_complex(jsa.values(), &rows, &cols);
    let js: Vec<f64> = fs.iter().map(|nu| signal.jacobian(*nu)).collect();
    let ji: Vec<f64> = fi.iter().map(|nu| idler.jacobian(*nu)).collect();
    Array2::from_shape_fn(amplitude.dim(), |(a, b)| amplitude[[a, b]].norm_sqr() * js[a] * ji[b])
}

/// Maps a density on the delay grid back onto the frequency grids (density
/// per THz²) by band-limited interpolation. Ringing can leave small negative
/// values where the input has sharp edges.
pub fn resample_to_frequencies(
    delayed: &Array2<f64>,
    signal: &DelayAxis,
    idler: &DelayAxis,
) -> Array2<f64> {
    let weights = |axis: &DelayAxis| -> (Array2<f64>, Vec<f64>) {
        let (delays, jac): (Vec<f64>, Vec<f64>) = (0..axis.grid.len())
            .map(|k| {
                let nu = axis.grid.at(k);
                (axis.delay_of(nu), axis.jacobian(nu))
            })
            .unzip();
        (bandlimited_weights(&axis.delay_grid(), &delays), jac)
    };
    let (rows, js) = weights(signal);
    let (cols, ji) = weights(idler);
    let mut out = interpolate_2d(delayed, &rows, &cols);
    out.indexed_iter_mut().for_each(|((a, b), v)| *v /= js[a] * ji[b]);
    out
}

/// A simulated ToF joint-spectrum measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct JsiRecord {
    pub signal: DelayAxis,
    pub idler: DelayAxis,
    pub counts: Array2<u64>,
    pub psf: Psf,
    pub total_counts: f64,
    pub seed: u64,
}

impl JsiRecord {
    pub fn counts_f64(&self) -> Array2<f64> {
        self.counts.mapv(|c| c as f64)
    }

    pub fn total(&self) -> u64 {
        self.counts.sum()
    }
}

/// Expected (noise-free) blurred counts on the delay grid, summing to
/// `total_counts`.
pub fn tof_expected_counts(jsa: &JointAmplitude, tof: &ToFSpec) -> Result<(DelayAxis, DelayAxis, Array2<f64>)> {
    tof.validate()?;
    let signal = DelayAxis::new(*jsa.signal_grid(), tof.dispersion_ps_per_nm);
    let idler = DelayAxis::new(*jsa.idler_grid(), tof.dispersion_ps_per_nm);
    let delayed = resample_to_delays(jsa, &signal, &idler);
    let blurred = convolve_same(&delayed, tof.psf.kernel(), false);
    let sum = blurred.sum();
    if !(sum > 0.0) || !sum.is_finite() {
        return Err(Error::EmptyIntensity("no intensity reaches the delay grid".into()));
    }
    Ok((signal, idler, blurred * (tof.total_counts / sum)))
}

/// Forward-simulates a ToF measurement of `|f|²` with Poisson counts.
pub fn simulate_tof_jsi(jsa: &JointAmplitude, tof: &ToFSpec) -> Result<JsiRecord> {
    let (signal, idler, expected) = tof_expected_counts(jsa, tof)?;
    let mut rng = super::task_rng(tof.seed, 0);
    let counts = expected.mapv(|mean| {
        if mean > 0.0 {
            Poisson::new(mean).map(|d| d.sample(&mut rng) as u64).unwrap_or(0)
        } else {
            0
        }
    });
    Ok(JsiRecord {
        signal,
        idler,
        counts,
        psf: tof.psf.clone(),
        total_counts: tof.total_counts,
        seed: tof.seed,
    })
}
