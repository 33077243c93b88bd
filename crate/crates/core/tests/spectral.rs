//! Pump-shaping and phase-matching properties checked against direct
//! evaluations of the underlying sums.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use pdcshape_core::units::fwhm_to_sigma;
use pdcshape_core::{make_pump, pump_time_profile, FrequencyGrid, PumpShape, PumpSpec};
use proptest::prelude::*;

const NU0: f64 = 395.0;

fn wide_grid() -> FrequencyGrid {
    FrequencyGrid::new(8192, NU0, 16.0).unwrap()
}

#[test]
fn every_shape_and_order_is_normalized() {
    let g = wide_grid();
    for order in 0..=40 {
        let shapes = [
            PumpSpec::cosine_kernel(NU0, 1.3, order, 2.0),
            PumpSpec { shape: PumpShape::HermiteGauss { order }, ..PumpSpec::gaussian(NU0, 1.3) },
        ];
        for spec in shapes {
            let p = make_pump(&spec, &g).unwrap();
            assert!((p.l2_norm() - 1.0).abs() < 1e-9, "{:?}: {}", spec.shape, p.l2_norm());
        }
    }
    let weights = vec![0.1, 0.2, 0.3, 0.4];
    let p = make_pump(&PumpSpec::weighted_time_bins(NU0, 1.3, weights, 2.0), &g).unwrap();
    assert!((p.l2_norm() - 1.0).abs() < 1e-9);
}

#[test]
fn gaussian_intensity_fwhm_is_configured_value() {
    let g = wide_grid();
    let p = make_pump(&PumpSpec::gaussian(NU0, 1.3), &g).unwrap();
    let peak = p.values().iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
    let above: Vec<f64> = (0..g.len())
        .filter(|k| p.values()[*k].norm_sqr() >= 0.5 * peak)
        .map(|k| g.at(k))
        .collect();
    let width = above.last().unwrap() - above.first().unwrap();
    assert!((width - 1.3).abs() < 2.0 * g.spacing(), "width {width}");
    assert!(p.values().iter().all(|v| v.im == 0.0 && v.re >= 0.0));
}

/// Closed-form CK intensity: Gaussian envelope times the Dirichlet kernel.
fn ck_intensity(nu: f64, n: usize, dt: f64, fwhm: f64) -> f64 {
    let sigma = fwhm_to_sigma(fwhm);
    let x = nu - NU0;
    let k = (n + 1) as f64;
    let y = x * dt;
    let dirichlet = if (y - y.round()).abs() < 1e-12 { k } else { (PI * k * y).sin() / (PI * y).sin() };
    ((-x * x / (4.0 * sigma * sigma)).exp() * dirichlet).powi(2)
}

#[test]
fn ck_peaks_sit_on_the_comb() {
    let g = FrequencyGrid::new(2048, NU0, 8.0).unwrap();
    for (n, dt) in [(2usize, 2.0), (5, 2.0), (10, 3.0), (19, 3.0)] {
        let p = make_pump(&PumpSpec::cosine_kernel(NU0, 1.3, n, dt), &g).unwrap();
        let intensity: Vec<f64> = p.values().iter().map(|v| v.norm_sqr()).collect();
        let half = (n / 2) as i32;
        for m in -half..=half {
            let target = NU0 + m as f64 / dt;
            let reach = 0.25 / dt;
            let sampled = (0..g.len())
                .filter(|k| (g.at(*k) - target).abs() < reach)
                .max_by(|a, b| intensity[*a].total_cmp(&intensity[*b]))
                .map(|k| g.at(k))
                .unwrap();
            // oracle: argmax of the closed form on a grid 200× denser
            let step = g.spacing() / 200.0;
            let steps = (reach / step) as i64;
            let dense = (-steps..=steps)
                .map(|j| target + j as f64 * step)
                .max_by(|a, b| ck_intensity(*a, n, dt, 1.3).total_cmp(&ck_intensity(*b, n, dt, 1.3)))
                .unwrap();
            assert!(
                (sampled - dense).abs() <= 0.5 * g.spacing() + 1e-12,
                "n={n} m={m}: sampled {sampled}, oracle {dense}"
            );
            // the envelope pulls teeth inwards only slightly
            assert!((dense - target).abs() < 0.05 / dt, "n={n} m={m}: {dense} vs comb {target}");
        }
    }
}

/// Direct evaluation of the time-bin sum behind the pump shapes:
/// `Σₖ √wₖ · G(t − tₖ)` with `G` the transform of the Gaussian envelope.
fn direct_time_bins(weights: &[f64], dt: f64, fwhm: f64, times: &[f64]) -> Vec<f64> {
    let sigma = fwhm_to_sigma(fwhm);
    let k = weights.len();
    times
        .iter()
        .map(|t| {
            weights
                .iter()
                .enumerate()
                .map(|(j, w)| {
                    let tj = dt * (j as f64 - 0.5 * (k as f64 - 1.0));
                    w.sqrt() * (-4.0 * PI * PI * sigma * sigma * (t - tj).powi(2)).exp()
                })
                .sum()
        })
        .collect()
}

fn rms_after_normalizing(a: &[Complex64], b: &[f64], dt: f64) -> f64 {
    let na = (a.iter().map(|v| v.norm_sqr()).sum::<f64>() * dt).sqrt();
    let nb = (b.iter().map(|v| v * v).sum::<f64>() * dt).sqrt();
    let sq: f64 = a.iter().zip(b).map(|(x, y)| (x / na - y / nb).norm_sqr()).sum();
    (sq / a.len() as f64).sqrt()
}

#[test]
fn time_and_frequency_pictures_agree() {
    let g = wide_grid();
    for n in [0usize, 1, 3, 7] {
        let p = make_pump(&PumpSpec::cosine_kernel(NU0, 1.3, n, 2.0), &g).unwrap();
        let tp = pump_time_profile(&p);
        let oracle = direct_time_bins(&vec![1.0 / (n + 1) as f64; n + 1], 2.0, 1.3, &tp.times);
        let rms = rms_after_normalizing(&tp.values, &oracle, tp.time_step());
        assert!(rms < 1e-6, "CK_{n}: rms {rms}");
    }
    let weights = [0.5, 0.2, 0.3];
    let p = make_pump(&PumpSpec::weighted_time_bins(NU0, 1.3, weights.to_vec(), 2.5), &g).unwrap();
    let tp = pump_time_profile(&p);
    let oracle = direct_time_bins(&weights, 2.5, 1.3, &tp.times);
    assert!(rms_after_normalizing(&tp.values, &oracle, tp.time_step()) < 1e-6);
}

#[test]
fn ck3_has_four_equal_bins() {
    let g = wide_grid();
    let tp = pump_time_profile(&make_pump(&PumpSpec::cosine_kernel(NU0, 1.3, 3, 2.0), &g).unwrap());
    let intensity = tp.intensity();
    let power_near = |t0: f64| -> f64 {
        tp.times.iter().zip(&intensity).filter(|(t, _)| (*t - t0).abs() < 0.5).map(|(_, v)| v).sum::<f64>()
            * tp.time_step()
    };
    let bins: Vec<f64> = [-3.0, -1.0, 1.0, 3.0].iter().map(|t| power_near(*t)).collect();
    for b in &bins {
        assert!((b - 0.25).abs() < 1e-3, "{bins:?}");
    }
}

#[test]
fn half_and_half_weights_give_two_bins() {
    let g = wide_grid();
    let spec = PumpSpec::weighted_time_bins(NU0, 1.3, vec![0.5, 0.5, 0.0], 2.0);
    let tp = pump_time_profile(&make_pump(&spec, &g).unwrap());
    let intensity = tp.intensity();
    let power_near = |t0: f64| -> f64 {
        tp.times.iter().zip(&intensity).filter(|(t, _)| (*t - t0).abs() < 0.5).map(|(_, v)| v).sum::<f64>()
            * tp.time_step()
    };
    assert!((power_near(-2.0) - 0.5).abs() < 1e-3);
    assert!((power_near(0.0) - 0.5).abs() < 1e-3);
    assert!(power_near(2.0) < 1e-9);
}

#[test]
fn chirp_sign_convention() {
    let g = wide_grid();
    let p = make_pump(&PumpSpec::gaussian(NU0, 1.3).with_chirp(-0.2), &g).unwrap();
    let k = g.nearest(NU0 + 0.4);
    let omega = TAU * (g.at(k) - NU0);
    let expected = Complex64::from_polar(1.0, 0.5 * -0.2 * omega * omega);
    let got = p.values()[k] / p.values()[k].norm();
    assert!((got - expected).norm() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ck_is_real_and_parseval_holds(order in 0usize..20, fwhm in 0.6f64..2.0, dt in 1.0f64..3.0) {
        let g = FrequencyGrid::new(4096, NU0, 8.0 * fwhm).unwrap();
        let spec = PumpSpec::cosine_kernel(NU0, fwhm, order, dt);
        prop_assume!(spec.peak_width_thz().map_or(true, |w| g.spacing() < w / 4.0));
        let p = make_pump(&spec, &g).unwrap();
        let peak = p.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
        prop_assert!(p.values().iter().all(|v| v.im.abs() < 1e-12 * peak));
        let tp = pump_time_profile(&p);
        prop_assert!((tp.l2_norm() - p.l2_norm()).abs() < 1e-9);
    }

    #[test]
    fn chirped_pumps_keep_their_norm(chirp in -0.5f64..0.5, fwhm in 0.6f64..2.0) {
        let g = FrequencyGrid::new(4096, NU0, 8.0 * fwhm).unwrap();
        let p = make_pump(&PumpSpec::gaussian(NU0, fwhm).with_chirp(chirp), &g).unwrap();
        prop_assert!((p.l2_norm() - 1.0).abs() < 1e-9);
        prop_assert!((pump_time_profile(&p).l2_norm() - 1.0).abs() < 1e-9);
    }
}
