//! Numerical toolkit for programmable time-frequency entangled photon-pair
//! sources.
//!
//! A shaped pump spectrum and a phase-matching ridge give the joint spectral
//! amplitude; its Schmidt decomposition measures the entanglement
//! dimensionality. The [`measurement`] module simulates what a laboratory
//! records (time-of-flight joint spectra, g² photon statistics, heralding
//! efficiencies) and [`reconstruction`] recovers the state from a blurred
//! joint-spectrum measurement.
//!
//! Units: frequencies in THz, times in ps, chirp in ps², wavelengths (only at
//! the edges) in nm.

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod convolve;
pub mod error;
pub mod fourier;
pub mod grid;
pub mod jsa;
pub mod measurement;
pub mod phasematch;
pub mod pump;
pub mod reconstruction;
pub mod schmidt;
pub mod units;

pub use error::{Error, Result};
pub use grid::FrequencyGrid;
pub use jsa::{
    apply_filters, build_jsa, default_joint_grids, jti, pump_grid_for, FilterProfile, FilterSpec,
    Filtered, JointAmplitude, JointTemporalIntensity,
};
pub use measurement::{
    decorrelation_scan, klyshko, simulate_g2, simulate_tof_jsi, G2Estimate, GainSpec,
    JsiRecord, KlyshkoEstimate, Psf, ScanGeometry, ScanResult, ToFSpec,
};
pub use phasematch::{make_phasematching, PhaseMatchProfile, PhaseMatchSpec};
pub use pump::{make_pump, pump_time_profile, PumpShape, PumpSpec, SpectralAmplitude, TimeProfile};
pub use reconstruction::{
    analyze_reconstruction, reconstruct_jsa, richardson_lucy, run_pipeline, CenterPolicy, Noise,
    PipelineOutput, ReconstructionConfig, ReconstructionReport,
};
pub use schmidt::{
    g2_from_k, k_from_g2, prune_spurious_modes, schmidt_decompose, schmidt_number,
    schmidt_weights, SchmidtData,
};
