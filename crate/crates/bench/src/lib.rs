//! Fixtures shared by the benchmarks: the decorrelated reference geometry
//! with cosine-kernel pumps.

use pdcshape_core::phasematch::PhaseMatchProfile;
use pdcshape_core::{
    build_jsa, default_joint_grids, make_pump, pump_grid_for, JointAmplitude, PhaseMatchSpec, PumpSpec,
    SpectralAmplitude,
};

pub const SIGNAL_THZ: f64 = 198.4;
pub const IDLER_THZ: f64 = 196.7;

pub fn phasematch() -> PhaseMatchSpec {
    PhaseMatchSpec {
        profile: PhaseMatchProfile::Gaussian,
        angle_deg: 45.0,
        bandwidth_thz: 1.0,
        signal_center_thz: SIGNAL_THZ,
        idler_center_thz: IDLER_THZ,
    }
}

/// Cosine-kernel pump of the given order, bins 3 ps apart.
pub fn ck_spec(order: usize) -> PumpSpec {
    PumpSpec::cosine_kernel(SIGNAL_THZ + IDLER_THZ, std::f64::consts::SQRT_2, order, 3.0)
}

/// Pump amplitude on a grid sized for `points`-point joint grids.
pub fn ck_pump(order: usize, points: usize) -> SpectralAmplitude {
    let spec = ck_spec(order);
    let (sg, ig) = default_joint_grids(&phasematch(), spec.fwhm_thz, points).expect("valid grid");
    let pg = pump_grid_for(&spec, &sg, &ig).expect("valid pump grid");
    make_pump(&spec, &pg).expect("valid pump")
}

pub fn ck_jsa(order: usize, points: usize) -> JointAmplitude {
    let spec = ck_spec(order);
    let pm = phasematch();
    let (sg, ig) = default_joint_grids(&pm, spec.fwhm_thz, points).expect("valid grid");
    build_jsa(&ck_pump(order, points), &pm, &sg, &ig).expect("valid JSA")
}
