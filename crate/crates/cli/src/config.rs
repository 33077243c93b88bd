//! TOML experiment configuration.
//!
//! Every dimensioned key carries its unit in the name (`pump.fwhm_thz`,
//! `source.signal_wavelength_nm`, `tof.dispersion_ps_per_nm`). Widths are
//! intensity FWHM. Wavelengths are converted to frequencies in
//! [`ExperimentConfig::resolve`] and nowhere else; everything downstream
//! works in THz and ps.
//!
//! Parsing fills in defaults, and [`ExperimentConfig::to_toml_string`] writes
//! every key explicitly, so `to_toml_string(parse(text))` is the normalized
//! form of `text`.

use std::fs;
use std::path::Path;

use pdcshape_core::jsa::{default_joint_grids, FilterProfile, FilterSpec};
use pdcshape_core::phasematch::{PhaseMatchProfile, PhaseMatchSpec};
use pdcshape_core::pump::{PumpShape, PumpSpec};
use pdcshape_core::reconstruction::{CenterPolicy, Noise, DEFAULT_RL_FLOOR, DEFAULT_RL_ITERATIONS};
use pdcshape_core::units::{bandwidth_nm_to_thz, wavelength_nm_to_thz};
use pdcshape_core::{FrequencyGrid, GainSpec, Psf, ToFSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Relative mismatch of `1/λp` against `1/λs + 1/λi` above which a warning
/// is emitted.
pub const ENERGY_MISMATCH_WARNING: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Base seed for every stochastic step.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub source: SourceSection,
    pub phasematch: PhaseMatchSection,
    pub pump: PumpSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filters: Option<FilterSection>,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub tof: TofSection,
    #[serde(default)]
    pub reconstruction: ReconstructionSection,
    #[serde(default)]
    pub gain: GainSection,
    #[serde(default)]
    pub scan: ScanSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    pub signal_wavelength_nm: f64,
    pub idler_wavelength_nm: f64,
    pub pump_wavelength_nm: f64,
}

impl Default for SourceSection {
    fn default() -> Self {
        Self {
            signal_wavelength_nm: 1511.0,
            idler_wavelength_nm: 1524.0,
            pump_wavelength_nm: 758.7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseMatchName {
    Sinc,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseMatchSection {
    pub profile: PhaseMatchName,
    /// Ridge angle from the signal-frequency axis.
    pub angle_deg: f64,
    /// Intensity FWHM across the ridge.
    pub bandwidth_thz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PumpShapeName {
    Gaussian,
    HermiteGauss,
    CosineKernel,
    TimeBins,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSection {
    pub shape: PumpShapeName,
    /// Intensity FWHM of the spectral envelope.
    pub fwhm_thz: f64,
    /// Hermite-Gauss or cosine-kernel order; ignored by the other shapes.
    #[serde(default)]
    pub order: usize,
    /// Time-bin separation; required by `cosine-kernel` and `time-bins`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bin_separation_ps: Option<f64>,
    /// Power fraction per time bin for `time-bins`; must sum to one.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bin_weights: Vec<f64>,
    #[serde(default)]
    pub chirp_ps2: f64,
    /// Pulse-shaper resolution; 0 is an ideal shaper.
    #[serde(default)]
    pub shaper_resolution_thz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterName {
    Rectangular,
    Gaussian,
    SuperGaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSection {
    pub profile: FilterName,
    /// Full width around the signal center wavelength.
    pub signal_width_nm: f64,
    pub idler_width_nm: f64,
    /// Super-Gaussian order m in `exp(−ln2·(2|Δ|/w)^{2m})`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Points per frequency axis.
    pub points: usize,
    /// Span of each axis; defaults to six times the larger of the pump and
    /// phase-matching bandwidths.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span_thz: Option<f64>,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { points: 512, span_thz: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseName {
    Poisson,
    Noiseless,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TofSection {
    pub dispersion_ps_per_nm: f64,
    /// Gaussian PSF width in delay bins; 0 selects the identity PSF.
    pub psf_fwhm_bins: f64,
    /// Expected number of recorded coincidences.
    pub total_counts: f64,
    pub noise: NoiseName,
}

impl Default for TofSection {
    fn default() -> Self {
        Self {
            dispersion_ps_per_nm: -418.0,
            psf_fwhm_bins: 5.0,
            total_counts: 1e6,
            noise: NoiseName::Poisson,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CenterName {
    /// Align the pump phase to the measured JSI peak.
    JsiMaximum,
    /// Use absolute frequencies.
    Absolute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructionSection {
    pub rl_iterations: usize,
    pub rl_floor: f64,
    /// Stop early once the relative update falls below this value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rl_tolerance: Option<f64>,
    pub center: CenterName,
    /// Modes kept by pruning; defaults to the pump's number of time bins.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_expected: Option<usize>,
}

impl Default for ReconstructionSection {
    fn default() -> Self {
        Self {
            rl_iterations: DEFAULT_RL_ITERATIONS,
            rl_floor: DEFAULT_RL_FLOOR,
            rl_tolerance: None,
            center: CenterName::JsiMaximum,
            k_expected: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainSection {
    /// Squeezing scale B.
    pub gain: f64,
    pub eta_signal: f64,
    pub eta_idler: f64,
    pub pulses: u64,
    /// Mean background photons per pulse and arm.
    pub background_per_pulse: f64,
}

impl Default for GainSection {
    fn default() -> Self {
        let g = GainSpec::default();
        Self {
            gain: g.gain,
            eta_signal: g.eta_signal,
            eta_idler: g.eta_idler,
            pulses: g.pulses,
            background_per_pulse: g.background_per_pulse,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    /// Chirp already present on the pump before correction.
    pub setup_chirp_ps2: f64,
    pub fwhm_min_thz: f64,
    pub fwhm_max_thz: f64,
    pub fwhm_step_thz: f64,
    pub chirp_min_ps2: f64,
    pub chirp_max_ps2: f64,
    pub chirp_step_ps2: f64,
    /// Highest cosine-kernel order for `scan-ck`.
    pub ck_max_order: usize,
}

impl Default for ScanSection {
    fn default() -> Self {
        Self {
            setup_chirp_ps2: 0.0,
            fwhm_min_thz: 0.4,
            fwhm_max_thz: 2.6,
            fwhm_step_thz: 0.2,
            chirp_min_ps2: -0.3,
            chirp_max_ps2: 0.3,
            chirp_step_ps2: 0.05,
            ck_max_order: 19,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<String>,
}

/// Reconstruction settings in core types.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionSettings {
    pub rl_iterations: usize,
    pub rl_floor: f64,
    pub rl_tolerance: Option<f64>,
    pub center_policy: CenterPolicy,
    pub k_expected: usize,
}

/// Scan ranges expanded to explicit values.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRanges {
    pub setup_chirp_ps2: f64,
    pub fwhm_thz: Vec<f64>,
    pub chirp_ps2: Vec<f64>,
    pub ck_max_order: usize,
}

/// A validated configuration in THz/ps and core types.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub seed: u64,
    pub signal_center_thz: f64,
    pub idler_center_thz: f64,
    pub pump_center_thz: f64,
    pub phasematch: PhaseMatchSpec,
    pub pump: PumpSpec,
    pub filters: Option<(FilterSpec, FilterSpec)>,
    pub signal_grid: FrequencyGrid,
    pub idler_grid: FrequencyGrid,
    pub tof: ToFSpec,
    pub noise: Noise,
    pub reconstruction: ReconstructionSettings,
    pub gain: GainSpec,
    pub scan: ScanRanges,
    /// Non-fatal findings, such as an energy mismatch between the
    /// configured wavelengths.
    pub warnings: Vec<String>,
}

fn positive(key: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::key(key, format!("must be positive, got {v}")))
    }
}

fn non_negative(key: &str, v: f64) -> CliResult<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::key(key, format!("must be non-negative, got {v}")))
    }
}

fn finite(key: &str, v: f64) -> CliResult<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::key(key, format!("must be finite, got {v}")))
    }
}

/// `min, min + step, …` up to `max` inclusive, computed without accumulating
/// rounding error and snapped to 1e-12.
pub fn inclusive_range(key: &str, min: f64, max: f64, step: f64) -> CliResult<Vec<f64>> {
    finite(key, min)?;
    finite(key, max)?;
    positive(&format!("{key} step"), step)?;
    if max < min {
        return Err(CliError::key(key, format!("range is empty: max {max} < min {min}")));
    }
    let n = ((max - min) / step + 1e-9).floor() as usize + 1;
    Ok((0..n)
        .map(|k| ((min + k as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

impl ExperimentConfig {
    /// Lab source: sinc phase matching at 31°, 1 THz bandwidth, 1.3 THz
    /// Gaussian pump and 7 nm rectangular filters.
    pub fn lab() -> Self {
        Self {
            seed: 0,
            source: SourceSection::default(),
            phasematch: PhaseMatchSection {
                profile: PhaseMatchName::Sinc,
                angle_deg: 31.0,
                bandwidth_thz: 1.0,
            },
            pump: PumpSection {
                shape: PumpShapeName::Gaussian,
                fwhm_thz: 1.3,
                order: 0,
                bin_separation_ps: Some(2.0),
                bin_weights: Vec::new(),
                chirp_ps2: 0.0,
                shaper_resolution_thz: 0.0,
            },
            filters: Some(FilterSection {
                profile: FilterName::Rectangular,
                signal_width_nm: 7.0,
                idler_width_nm: 7.0,
                order: None,
            }),
            grid: GridSection::default(),
            tof: TofSection::default(),
            reconstruction: ReconstructionSection::default(),
            gain: GainSection::default(),
            scan: ScanSection::default(),
            output: OutputSection::default(),
        }
    }

    /// Decorrelated reference: Gaussian phase matching at 45°, 1 THz
    /// bandwidth, Gaussian pump of FWHM √2 THz, no filters, and time bins
    /// three inverse bandwidths apart.
    pub fn ideal() -> Self {
        let mut cfg = Self::lab();
        cfg.phasematch = PhaseMatchSection {
            profile: PhaseMatchName::Gaussian,
            angle_deg: 45.0,
            bandwidth_thz: 1.0,
        };
        cfg.pump.fwhm_thz = std::f64::consts::SQRT_2;
        cfg.pump.bin_separation_ps = Some(3.0);
        cfg.filters = None;
        cfg
    }

    pub fn from_toml_str(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string().trim_end().to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Normalized TOML with every key written out.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration is always representable in TOML")
    }

    /// SHA-256 of the normalized form, recorded in output headers.
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml_string().as_bytes()))
    }

    fn pump_spec(&self, center: f64) -> CliResult<PumpSpec> {
        let p = &self.pump;
        let fwhm = positive("pump.fwhm_thz", p.fwhm_thz)?;
        let chirp = finite("pump.chirp_ps2", p.chirp_ps2)?;
        let shaper = non_negative("pump.shaper_resolution_thz", p.shaper_resolution_thz)?;
        let dt = || -> CliResult<f64> {
            let dt = p.bin_separation_ps.ok_or_else(|| {
                CliError::key("pump.bin_separation_ps", "is required for time-bin pump shapes")
            })?;
            positive("pump.bin_separation_ps", dt)
        };
        let spec = match p.shape {
            PumpShapeName::Gaussian => PumpSpec::gaussian(center, fwhm),
            PumpShapeName::HermiteGauss => PumpSpec {
                shape: PumpShape::HermiteGauss { order: p.order },
                ..PumpSpec::gaussian(center, fwhm)
            },
            PumpShapeName::CosineKernel => PumpSpec::cosine_kernel(center, fwhm, p.order, dt()?),
            PumpShapeName::TimeBins => {
                if p.bin_weights.is_empty() {
                    return Err(CliError::key("pump.bin_weights", "is required for the time-bins shape"));
                }
                PumpSpec::weighted_time_bins(center, fwhm, p.bin_weights.clone(), dt()?)
            }
        };
        let spec = spec.with_chirp(chirp).with_shaper_resolution(shaper);
        spec.validate()?;
        Ok(spec)
    }

    /// Validates the configuration and converts it to core types.
    pub fn resolve(&self) -> CliResult<Experiment> {
        let s = &self.source;
        let lambda_s = positive("source.signal_wavelength_nm", s.signal_wavelength_nm)?;
        let lambda_i = positive("source.idler_wavelength_nm", s.idler_wavelength_nm)?;
        let lambda_p = positive("source.pump_wavelength_nm", s.pump_wavelength_nm)?;
        let nu_s = wavelength_nm_to_thz(lambda_s);
        let nu_i = wavelength_nm_to_thz(lambda_i);
        let nu_p = wavelength_nm_to_thz(lambda_p);
        let mut warnings = Vec::new();
        let mismatch = (nu_p - nu_s - nu_i).abs() / nu_p;
        if mismatch > ENERGY_MISMATCH_WARNING {
            warnings.push(format!(
                "source wavelengths violate energy conservation by {:.3}%: \
                 1/λp = 1/{lambda_p} nm but 1/λs + 1/λi corresponds to {:.3} nm",
                100.0 * mismatch,
                1.0 / (1.0 / lambda_s + 1.0 / lambda_i)
            ));
        }

        let pm = &self.phasematch;
        let angle = finite("phasematch.angle_deg", pm.angle_deg)?;
        if !(angle > 0.0 && angle < 90.0) {
            return Err(CliError::key("phasematch.angle_deg", format!("must lie in (0, 90), got {angle}")));
        }
        let phasematch = PhaseMatchSpec {
            profile: match pm.profile {
                PhaseMatchName::Sinc => PhaseMatchProfile::Sinc,
                PhaseMatchName::Gaussian => PhaseMatchProfile::Gaussian,
            },
            angle_deg: angle,
            bandwidth_thz: positive("phasematch.bandwidth_thz", pm.bandwidth_thz)?,
            signal_center_thz: nu_s,
            idler_center_thz: nu_i,
        };
        phasematch.validate()?;

        let pump = self.pump_spec(nu_p)?;

        let filters = match &self.filters {
            None => None,
            Some(f) => {
                let profile = match f.profile {
                    FilterName::Rectangular => FilterProfile::Rectangular,
                    FilterName::Gaussian => FilterProfile::Gaussian,
                    FilterName::SuperGaussian => FilterProfile::SuperGaussian {
                        order: f.order.ok_or_else(|| {
                            CliError::key("filters.order", "is required for the super-gaussian profile")
                        })?,
                    },
                };
                let ws = positive("filters.signal_width_nm", f.signal_width_nm)?;
                let wi = positive("filters.idler_width_nm", f.idler_width_nm)?;
                let fs = FilterSpec {
                    center_thz: nu_s,
                    fwhm_thz: bandwidth_nm_to_thz(lambda_s, ws),
                    profile,
                };
                let fi = FilterSpec {
                    center_thz: nu_i,
                    fwhm_thz: bandwidth_nm_to_thz(lambda_i, wi),
                    profile,
                };
                fs.validate()?;
                fi.validate()?;
                Some((fs, fi))
            }
        };

        if self.grid.points < 2 {
            return Err(CliError::key("grid.points", format!("must be at least 2, got {}", self.grid.points)));
        }
        let (signal_grid, idler_grid) = match self.grid.span_thz {
            None => default_joint_grids(&phasematch, pump.fwhm_thz, self.grid.points)?,
            Some(span) => {
                let span = positive("grid.span_thz", span)?;
                (
                    FrequencyGrid::new(self.grid.points, nu_s, span)?,
                    FrequencyGrid::new(self.grid.points, nu_i, span)?,
                )
            }
        };

        let t = &self.tof;
        let dispersion = finite("tof.dispersion_ps_per_nm", t.dispersion_ps_per_nm)?;
        if dispersion == 0.0 {
            return Err(CliError::key("tof.dispersion_ps_per_nm", "must be non-zero"));
        }
        let psf = if non_negative("tof.psf_fwhm_bins", t.psf_fwhm_bins)? == 0.0 {
            Psf::identity()
        } else {
            Psf::gaussian(t.psf_fwhm_bins)?
        };
        let tof = ToFSpec {
            dispersion_ps_per_nm: dispersion,
            psf,
            total_counts: positive("tof.total_counts", t.total_counts)?,
            seed: self.seed,
        };
        tof.validate()?;
        let noise = match t.noise {
            NoiseName::Poisson => Noise::Poisson,
            NoiseName::Noiseless => Noise::Noiseless,
        };

        let r = &self.reconstruction;
        if r.rl_iterations < 1 {
            return Err(CliError::key("reconstruction.rl_iterations", "must be at least 1"));
        }
        positive("reconstruction.rl_floor", r.rl_floor)?;
        if let Some(tol) = r.rl_tolerance {
            positive("reconstruction.rl_tolerance", tol)?;
        }
        let k_expected = match r.k_expected {
            Some(0) => return Err(CliError::key("reconstruction.k_expected", "must be at least 1")),
            Some(k) => k,
            None => pump.shape.bins().unwrap_or(1),
        };
        let reconstruction = ReconstructionSettings {
            rl_iterations: r.rl_iterations,
            rl_floor: r.rl_floor,
            rl_tolerance: r.rl_tolerance,
            center_policy: match r.center {
                CenterName::JsiMaximum => CenterPolicy::JsiMaximum,
                CenterName::Absolute => CenterPolicy::Absolute,
            },
            k_expected,
        };

        let g = &self.gain;
        let gain = GainSpec {
            gain: g.gain,
            eta_signal: g.eta_signal,
            eta_idler: g.eta_idler,
            pulses: g.pulses,
            background_per_pulse: g.background_per_pulse,
            seed: self.seed,
        };
        gain.validate()?;

        let sc = &self.scan;
        let scan = ScanRanges {
            setup_chirp_ps2: finite("scan.setup_chirp_ps2", sc.setup_chirp_ps2)?,
            fwhm_thz: inclusive_range("scan.fwhm", sc.fwhm_min_thz, sc.fwhm_max_thz, sc.fwhm_step_thz)?,
            chirp_ps2: inclusive_range("scan.chirp", sc.chirp_min_ps2, sc.chirp_max_ps2, sc.chirp_step_ps2)?,
            ck_max_order: sc.ck_max_order,
        };
        positive("scan.fwhm_min_thz", sc.fwhm_min_thz)?;

        Ok(Experiment {
            seed: self.seed,
            signal_center_thz: nu_s,
            idler_center_thz: nu_i,
            pump_center_thz: nu_p,
            phasematch,
            pump,
            filters,
            signal_grid,
            idler_grid,
            tof,
            noise,
            reconstruction,
            gain,
            scan,
            warnings,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_resolve() {
        for cfg in [ExperimentConfig::lab(), ExperimentConfig::ideal()] {
            let exp = cfg.resolve().unwrap();
            assert!(exp.warnings.is_empty(), "{:?}", exp.warnings);
            assert_eq!(exp.signal_grid.len(), 512);
        }
    }

    #[test]
    fn lab_filters_are_about_0_92_thz() {
        let exp = ExperimentConfig::lab().resolve().unwrap();
        let (fs, fi) = exp.filters.unwrap();
        assert!((fs.fwhm_thz - 0.919).abs() < 0.002, "{}", fs.fwhm_thz);
        assert!((fi.fwhm_thz - 0.904).abs() < 0.002, "{}", fi.fwhm_thz);
    }

    #[test]
    fn energy_mismatch_warns() {
        let mut cfg = ExperimentConfig::lab();
        cfg.source.pump_wavelength_nm = 770.0;
        assert_eq!(cfg.resolve().unwrap().warnings.len(), 1);
    }

    #[test]
    fn ranges_hit_their_endpoints() {
        let r = inclusive_range("scan.chirp", -0.3, 0.3, 0.05).unwrap();
        assert_eq!(r.len(), 13);
        assert_eq!(r[3], -0.15);
        assert_eq!(r[12], 0.3);
        assert!(inclusive_range("scan.chirp", 1.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn missing_bin_separation_names_the_key() {
        let mut cfg = ExperimentConfig::ideal();
        cfg.pump.shape = PumpShapeName::CosineKernel;
        cfg.pump.bin_separation_ps = None;
        let err = cfg.resolve().unwrap_err().to_string();
        assert!(err.contains("pump.bin_separation_ps"), "{err}");
    }
}
