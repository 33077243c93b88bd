//! Simulated laboratory measurements: time-of-flight joint spectra,
//! unheralded photon statistics, Klyshko efficiencies, and decorrelation
//! scans.
//!
//! Every sampler takes an explicit seed. Work split into independent tasks
//! (batches, scan points) uses the seed `seed + task_index` for task
//! `task_index`, so results do not depend on thread scheduling.

mod photon;
mod scan;
mod tof;

pub use photon::{klyshko, simulate_g2, G2Estimate, GainSpec, KlyshkoEstimate};
pub use scan::{decorrelation_scan, ScanGeometry, ScanPoint, ScanResult};
pub use tof::{
    resample_to_delays, resample_to_frequencies, simulate_tof_jsi, tof_expected_counts, DelayAxis, JsiRecord, Psf, ToFSpec};

pub(crate) fn task_rng(seed: u64, task: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_add(task))
}
