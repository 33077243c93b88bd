//! Statistical checks of the simulated measurements against their
//! closed-form expectations.

use ndarray::Array2;
use num_complex::Complex64;
use pdcshape_core::measurement::{resample_to_delays, tof_expected_counts, DelayAxis};
use pdcshape_core::schmidt::DEFAULT_RANK_THRESHOLD;
use pdcshape_core::*;

fn uniform(k: usize) -> SchmidtData {
    SchmidtData::from_weights(&vec![1.0 / k as f64; k], DEFAULT_RANK_THRESHOLD).unwrap()
}

/// Exact g² for independent thermal modes: `1 + Σμₖ²/(Σμₖ)²`.
fn exact_g2(weights: &[f64], gain: f64) -> f64 {
    let mu: Vec<f64> = weights.iter().map(|w| (gain * w.sqrt()).sinh().powi(2)).collect();
    let s: f64 = mu.iter().sum();
    1.0 + mu.iter().map(|m| m * m).sum::<f64>() / (s * s)
}

#[test]
fn low_gain_estimates_converge_to_one_plus_inverse_k() {
    for k in [1usize, 2, 3] {
        let gain = GainSpec { gain: 0.1, pulses: 2_000_000, seed: 40 + k as u64, ..Default::default() };
        let est = simulate_g2(&uniform(k), &gain).unwrap();
        let target = 1.0 + 1.0 / k as f64;
        assert!((est.g2 - target).abs() < 3.0 * est.stderr, "K={k}: {} ± {}", est.g2, est.stderr);
        assert!(est.factorial_moment_sum > 100);
    }
}

#[test]
fn k_of_1_08_gives_g2_near_1_93() {
    // two weights chosen so that 1/Σλ² = 1.08
    let s: f64 = 1.0 / 1.08;
    let l1 = 0.5 * (1.0 + (2.0 * s - 1.0).sqrt());
    let weights = [l1, 1.0 - l1];
    assert!((schmidt_number(&weights) - 1.08).abs() < 1e-12);
    assert!((g2_from_k(1.08).unwrap() - 1.926).abs() < 1e-3);
    let sd = SchmidtData::from_weights(&weights, DEFAULT_RANK_THRESHOLD).unwrap();
    let gain = GainSpec { gain: 0.3, pulses: 2_000_000, seed: 3, ..Default::default() };
    let est = simulate_g2(&sd, &gain).unwrap();
    let exact = exact_g2(&weights, 0.3);
    assert!((exact - 1.926).abs() < 3e-3);
    assert!((est.g2 - exact).abs() < 3.0 * est.stderr, "{} ± {} vs {exact}", est.g2, est.stderr);
}

#[test]
fn loss_does_not_change_g2() {
    for weights in [vec![1.0], vec![0.6, 0.3, 0.1], vec![0.25; 4]] {
        let sd = SchmidtData::from_weights(&weights, DEFAULT_RANK_THRESHOLD).unwrap();
        let full = simulate_g2(&sd, &GainSpec { gain: 0.5, seed: 1, ..Default::default() }).unwrap();
        let lossy = simulate_g2(&sd, &GainSpec { gain: 0.5, eta_signal: 0.25, seed: 2, ..Default::default() }).unwrap();
        let combined = full.stderr.hypot(lossy.stderr);
        assert!((full.g2 - lossy.g2).abs() < 3.0 * combined, "{weights:?}: {} vs {}", full.g2, lossy.g2);
        let exact = exact_g2(&weights, 0.5);
        assert!((full.g2 - exact).abs() < 3.0 * full.stderr);
    }
}

#[test]
fn background_pulls_g2_towards_one() {
    let sd = uniform(2);
    let estimates: Vec<f64> = [0.0, 0.02, 0.1, 0.5]
        .iter()
        .map(|bg| {
            let gain = GainSpec { gain: 0.5, background_per_pulse: *bg, seed: 9, ..Default::default() };
            simulate_g2(&sd, &gain).unwrap().g2
        })
        .collect();
    assert!(estimates.windows(2).all(|w| w[1] < w[0]), "{estimates:?}");
    assert!(estimates.iter().all(|g| *g > 1.0));
}

#[test]
fn g2_is_deterministic_per_seed() {
    let sd = uniform(3);
    let gain = GainSpec { gain: 0.4, pulses: 100_000, seed: 77, ..Default::default() };
    assert_eq!(simulate_g2(&sd, &gain).unwrap(), simulate_g2(&sd, &gain).unwrap());
    let other = GainSpec { seed: 78, ..gain };
    assert_ne!(simulate_g2(&sd, &gain).unwrap().g2, simulate_g2(&sd, &other).unwrap().g2);
}

#[test]
fn klyshko_recovers_configured_efficiencies() {
    let lossless = klyshko(&GainSpec { gain: 0.1, seed: 5, ..Default::default() }, 1_000_000).unwrap();
    assert!((lossless.eta_signal - 1.0).abs() < 1e-12 && (lossless.eta_idler - 1.0).abs() < 1e-12);

    let quarter = GainSpec { gain: 0.1, eta_signal: 0.25, eta_idler: 0.25, seed: 6, ..Default::default() };
    let est = klyshko(&quarter, 10_000_000).unwrap();
    assert!((est.eta_signal - 0.25).abs() < 0.01, "{est:?}");
    assert!((est.eta_idler - 0.25).abs() < 0.01, "{est:?}");

    let asym = GainSpec { gain: 0.1, eta_signal: 0.5, eta_idler: 0.1, seed: 7, ..Default::default() };
    let est = klyshko(&asym, 10_000_000).unwrap();
    assert!((est.eta_signal - 0.5).abs() < 0.02, "{est:?}");
    assert!((est.eta_idler - 0.1).abs() < 0.01, "{est:?}");
}

fn blob(points: usize) -> JointAmplitude {
    let g = FrequencyGrid::new(points, 198.4, 4.0).unwrap();
    let h = FrequencyGrid::new(points, 196.7, 4.0).unwrap();
    let values = Array2::from_shape_fn((points, points), |(s, i)| {
        let (x, y) = (g.at(s) - 198.4, h.at(i) - 196.7);
        Complex64::new((-(x * x + 0.8 * x * y + y * y) / 0.5).exp(), 0.0)
    });
    JointAmplitude::new(g, h, values).unwrap()
}

#[test]
fn identity_psf_counts_converge_to_resampled_jsi() {
    let f = blob(64);
    let tof = ToFSpec { dispersion_ps_per_nm: -418.0, psf: Psf::identity(), total_counts: 1e7, seed: 2 };
    let record = simulate_tof_jsi(&f, &tof).unwrap();
    let (s, i) = (DelayAxis::new(*f.signal_grid(), -418.0), DelayAxis::new(*f.idler_grid(), -418.0));
    let truth = resample_to_delays(&f, &s, &i);
    let truth = &truth / truth.sum();
    let measured = record.counts_f64() / record.total() as f64;
    let rms = (&measured - &truth).mapv(|v| v * v).sum().sqrt() / truth.mapv(|v| v * v).sum().sqrt();
    assert!(rms < 0.02, "relative rms {rms}");
}

#[test]
fn poisson_counts_have_unit_chi_square() {
    let f = blob(48);
    let base = ToFSpec { dispersion_ps_per_nm: -418.0, psf: Psf::gaussian(2.0).unwrap(), total_counts: 2e5, seed: 0 };
    let (_, _, expected) = tof_expected_counts(&f, &base).unwrap();
    assert!((expected.sum() - 2e5).abs() < 1e-6 * 2e5);
    let mask: Vec<usize> = expected.iter().enumerate().filter(|(_, m)| **m > 5.0).map(|(k, _)| k).collect();
    let dof = mask.len() as f64;
    for seed in 0..4 {
        let record = simulate_tof_jsi(&f, &ToFSpec { seed, ..base.clone() }).unwrap();
        let counts: Vec<f64> = record.counts.iter().map(|c| *c as f64).collect();
        let exp: Vec<f64> = expected.iter().copied().collect();
        let chi2: f64 = mask.iter().map(|k| (counts[*k] - exp[*k]).powi(2) / exp[*k]).sum();
        let z = (chi2 / dof - 1.0) / (2.0_f64 / dof).sqrt();
        assert!(z.abs() < 3.0, "seed {seed}: chi2/dof {} (z = {z})", chi2 / dof);
    }
}

#[test]
fn tof_records_are_deterministic() {
    let f = blob(32);
    let tof = ToFSpec { dispersion_ps_per_nm: -418.0, psf: Psf::gaussian(3.0).unwrap(), total_counts: 1e4, seed: 99 };
    assert_eq!(simulate_tof_jsi(&f, &tof).unwrap(), simulate_tof_jsi(&f, &tof).unwrap());
}

#[test]
fn scan_finds_the_matched_gaussian() {
    let pm = PhaseMatchSpec {
        profile: PhaseMatchProfile::Gaussian,
        angle_deg: 45.0,
        bandwidth_thz: 1.0,
        signal_center_thz: 198.4,
        idler_center_thz: 196.7,
    };
    let (sg, ig) = default_joint_grids(&pm, 2.0, 192).unwrap();
    let geometry = ScanGeometry {
        phasematch: pm,
        filters: None,
        pump_center_thz: 395.1,
        setup_chirp_ps2: 0.0,
        signal_grid: sg,
        idler_grid: ig,
    };
    let fwhms: Vec<f64> = (0..9).map(|k| 1.0 + 0.1 * k as f64).collect();
    let result = decorrelation_scan(&fwhms, &[-0.1, 0.0, 0.1], &geometry).unwrap();
    assert_eq!(result.best.chirp_ps2, 0.0);
    // matched Gaussian: intensity bandwidth √2·B along νs + νi
    assert!((result.best.fwhm_thz - std::f64::consts::SQRT_2).abs() <= 0.05 + 1e-9);
    assert!((result.best.schmidt_number - 1.0).abs() < 1e-3);
    assert!(decorrelation_scan(&[], &[0.0], &geometry).is_err());
}
