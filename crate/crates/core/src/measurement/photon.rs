//! Photon-number statistics of multimode pulsed down-conversion.
//!
//! Each Schmidt mode is an independent two-mode squeezer; its marginal photon
//! number is thermal with mean `μₖ = sinh²(B·√λₖ)`. Losses thin photon
//! numbers binomially and a flat Poissonian background models fluorescence.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::schmidt::SchmidtData;

const BATCHES: u64 = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainSpec {
    /// Squeezing scale B (dimensionless).
    pub gain: f64,
    pub eta_signal: f64,
    pub eta_idler: f64,
    pub pulses: u64,
    /// Mean background photons per pulse and arm.
    pub background_per_pulse: f64,
    pub seed: u64,
}

impl Default for GainSpec {
    fn default() -> Self {
        Self {
            gain: 0.05,
            eta_signal: 1.0,
            eta_idler: 1.0,
            pulses: 1_000_000,
            background_per_pulse: 0.0,
            seed: 0,
        }
    }
}

impl GainSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.gain >= 0.0) || !self.gain.is_finite() {
            return Err(Error::param("gain.gain", "must be non-negative"));
        }
        for (name, eta) in [("gain.eta_signal", self.eta_signal), ("gain.eta_idler", self.eta_idler)] {
            if !(0.0..=1.0).contains(&eta) {
                return Err(Error::param(name, format!("must lie in [0, 1], got {eta}")));
            }
        }
        if self.pulses < 1 {
            return Err(Error::param("gain.pulses", "must be at least 1"));
        }
        if !(self.background_per_pulse >= 0.0) || !self.background_per_pulse.is_finite() {
            return Err(Error::param("gain.background_per_pulse", "must be non-negative"));
        }
        Ok(())
    }

    fn batch_sizes(&self) -> Vec<u64> {
        let batches = BATCHES.min(self.pulses);
        let base = self.pulses / batches;
        (0..batches)
            .map(|b| if b + 1 == batches { self.pulses - base * (batches - 1) } else { base })
            .collect()
    }
}

/// Thermal photon number with mean `mu`, by inversion of the geometric law.
fn thermal<R: Rng>(rng: &mut R, mu: f64) -> u64 {
    if mu <= 0.0 {
        return 0;
    }
    let u: f64 = 1.0 - rng.random::<f64>();
    (u.ln() / (mu / (1.0 + mu)).ln()).floor() as u64
}

fn thin<R: Rng>(rng: &mut R, n: u64, eta: f64) -> u64 {
    if n == 0 || eta >= 1.0 {
        return n;
    }
    Binomial::new(n, eta).map(|d| d.sample(rng)).unwrap_or(0)
}

fn background<R: Rng>(rng: &mut R, dist: &Option<Poisson<f64>>) -> u64 {
    dist.as_ref().map_or(0, |d| d.sample(rng) as u64)
}

/// Outcome of a simulated unheralded g² measurement on the signal arm.
#[derive(Debug, Clone, PartialEq)]
pub struct G2Estimate {
    pub g2: f64,
    pub stderr: f64,
    pub mean_photons: f64,
    pub pulses: u64,
    /// `Σ n(n−1)` over all pulses. The estimate is only informative when
    /// this is large; with zero multi-photon events `g2` is 0 and the
    /// batch spread (hence `stderr`) vanishes.
    pub factorial_moment_sum: u64,
    /// `histogram[n]` = number of pulses with `n` detected photons.
    pub histogram: Vec<u64>,
}

#[derive(Default, Clone)]
struct Moments {
    pulses: u64,
    first: f64,
    second: f64,
    histogram: Vec<u64>,
}

/// Monte-Carlo estimate of `g² = ⟨n(n−1)⟩/⟨n⟩²` for the signal marginal.
///
/// Only modes above the decomposition's rank threshold are sampled. The
/// standard error comes from the spread of the per-batch moments propagated
/// through the ratio.
pub fn simulate_g2(sd: &SchmidtData, gain: &GainSpec) -> Result<G2Estimate> {
    gain.validate()?;
    let means: Vec<f64> = sd.weights[..sd.rank.max(1)]
        .iter()
        .map(|w| (gain.gain * w.sqrt()).sinh().powi(2))
        .filter(|mu| *mu > 0.0)
        .collect();
    let bg = (gain.background_per_pulse > 0.0)
        .then(|| Poisson::new(gain.background_per_pulse))
        .transpose()
        .map_err(|e| Error::param("gain.background_per_pulse", e.to_string()))?;

    let batches: Vec<Moments> = gain
        .batch_sizes()
        .into_par_iter()
        .enumerate()
        .map(|(b, size)| {
            let mut rng = super::task_rng(gain.seed, b as u64);
            let mut m = Moments { pulses: size, ..Default::default() };
            for _ in 0..size {
                let generated: u64 = means.iter().map(|mu| thermal(&mut rng, *mu)).sum();
                let n = thin(&mut rng, generated, gain.eta_signal) + background(&mut rng, &bg);
                let nf = n as f64;
                m.first += nf;
                m.second += nf * (nf - 1.0);
                let idx = n as usize;
                if m.histogram.len() <= idx {
                    m.histogram.resize(idx + 1, 0);
                }
                m.histogram[idx] += 1;
            }
            m
        })
        .collect();

    let total = gain.pulses as f64;
    let first: f64 = batches.iter().map(|m| m.first).sum::<f64>() / total;
    let second: f64 = batches.iter().map(|m| m.second).sum::<f64>() / total;
    if first <= 0.0 {
        return Err(Error::Degenerate("no photons detected".into()));
    }
    let g2 = second / (first * first);

    // delta method on batch means
    let nb = batches.len() as f64;
    let stderr = if nb > 1.0 {
        let xs: Vec<f64> = batches.iter().map(|m| m.first / m.pulses as f64).collect();
        let ys: Vec<f64> = batches.iter().map(|m| m.second / m.pulses as f64).collect();
        let (mx, my) = (xs.iter().sum::<f64>() / nb, ys.iter().sum::<f64>() / nb);
        let (mut vxx, mut vyy, mut vxy) = (0.0, 0.0, 0.0);
        for (x, y) in xs.iter().zip(&ys) {
            vxx += (x - mx) * (x - mx);
            vyy += (y - my) * (y - my);
            vxy += (x - mx) * (y - my);
        }
        let scale = 1.0 / (nb * (nb - 1.0));
        let (vxx, vyy, vxy) = (vxx * scale, vyy * scale, vxy * scale);
        let (dx, dy) = (-2.0 * second / first.powi(3), 1.0 / (first * first));
        (dy * dy * vyy + dx * dx * vxx + 2.0 * dx * dy * vxy).max(0.0).sqrt()
    } else {
        f64::NAN
    };

    let mut histogram = Vec::new();
    for m in &batches {
        if histogram.len() < m.histogram.len() {
            histogram.resize(m.histogram.len(), 0);
        }
        for (h, c) in histogram.iter_mut().zip(&m.histogram) {
            *h += c;
        }
    }
    let factorial_moment_sum = histogram
        .iter()
        .enumerate()
        .map(|(n, c)| (n as u64) * (n as u64).saturating_sub(1) * c)
        .sum();
    Ok(G2Estimate {
        g2,
        stderr,
        mean_photons: first,
        pulses: gain.pulses,
        factorial_moment_sum,
        histogram,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlyshkoEstimate {
    /// `p_coinc / p_idler`.
    pub eta_signal: f64,
    /// `p_coinc / p_signal`.
    pub eta_idler: f64,
    pub signal_clicks: u64,
    pub idler_clicks: u64,
    pub coincidences: u64,
}

/// Simulates heralding-efficiency measurements with threshold detectors.
///
/// Pairs per pulse follow single-mode thermal statistics with mean
/// `sinh²(B)`; each photon reaches its detector with the configured
/// efficiency, and background photons add to both arms.
pub fn klyshko(gain: &GainSpec, pulses: u64) -> Result<KlyshkoEstimate> {
    let spec = GainSpec { pulses, ..*gain };
    spec.validate()?;
    let mu = gain.gain.sinh().powi(2);
    let bg = (gain.background_per_pulse > 0.0)
        .then(|| Poisson::new(gain.background_per_pulse))
        .transpose()
        .map_err(|e| Error::param("gain.background_per_pulse", e.to_string()))?;

    let tallies: Vec<(u64, u64, u64)> = spec
        .batch_sizes()
        .into_par_iter()
        .enumerate()
        .map(|(b, size)| {
            let mut rng = super::task_rng(gain.seed, b as u64);
            let (mut s, mut i, mut c) = (0u64, 0u64, 0u64);
            for _ in 0..size {
                let pairs = thermal(&mut rng, mu);
                let ns = thin(&mut rng, pairs, gain.eta_signal) + background(&mut rng, &bg);
                let ni = thin(&mut rng, pairs, gain.eta_idler) + background(&mut rng, &bg);
                s += (ns > 0) as u64;
                i += (ni > 0) as u64;
                c += (ns > 0 && ni > 0) as u64;
            }
            (s, i, c)
        })
        .collect();
    let (s, i, c) = tallies
        .iter()
        .fold((0, 0, 0), |acc, t| (acc.0 + t.0, acc.1 + t.1, acc.2 + t.2));
    if s == 0 || i == 0 {
        return Err(Error::Degenerate("an arm recorded no clicks".into()));
    }
    Ok(KlyshkoEstimate {
        eta_signal: c as f64 / i as f64,
        eta_idler: c as f64 / s as f64,
        signal_clicks: s,
        idler_clicks: i,
        coincidences: c,
    })
}
