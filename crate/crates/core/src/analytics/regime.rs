//! Stable-versus-oscillatory classification from savings-rate samples.

use serde::{Deserialize, Serialize};

use crate::engine::Trajectory;
use crate::error::{Error, Result};

const MIN_SAMPLES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegimeConfig {
    pub bin_width: f64,
    /// A smoothed bin counts as a mode only above `mode_mass_factor / bins`.
    pub mode_mass_factor: f64,
    /// Oscillatory whenever the standard deviation of the aggregate savings rate exceeds this.
    pub order_threshold: f64,
}

impl Default for RegimeConfig {
    fn default() -> Self {
        RegimeConfig {
            bin_width: 0.02,
            mode_mass_factor: 0.5,
            order_threshold: 0.05,
        }
    }
}

impl RegimeConfig {
    pub fn bins(&self) -> usize {
        (1.0 / self.bin_width).round().max(1.0) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Stable,
    Oscillatory,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub location: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub classification: Regime,
    pub modes: Vec<Mode>,
    pub order_parameter: f64,
    pub s_tilde_mean: f64,
    pub samples: usize,
}

/// Normalised histogram of rates on `[0, 1]`; a rate of exactly 1 lands in the last bin.
pub fn savings_histogram(samples: &[f64], bins: usize) -> Vec<f64> {
    let mut h = vec![0.0; bins];
    if samples.is_empty() {
        return h;
    }
    for &s in samples {
        let b = ((s * bins as f64).floor().max(0.0) as usize).min(bins - 1);
        h[b] += 1.0;
    }
    let total = samples.len() as f64;
    h.iter_mut().for_each(|x| *x /= total);
    h
}

/// Three-bin moving average; edge bins average over the neighbours that exist.
fn smooth(h: &[f64]) -> Vec<f64> {
    (0..h.len())
        .map(|b| {
            let lo = b.saturating_sub(1);
            let hi = (b + 1).min(h.len() - 1);
            h[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect()
}

/// Local maxima of the smoothed histogram above the mass threshold. Each mode
/// owns the raw mass between the neighbouring minima.
pub fn find_modes(hist: &[f64], threshold: f64) -> Vec<Mode> {
    let bins = hist.len();
    let width = 1.0 / bins as f64;
    let sm = smooth(hist);
    let peaks: Vec<usize> = (0..bins)
        .filter(|&b| {
            let left = b == 0 || sm[b] > sm[b - 1];
            let right = b + 1 == bins || sm[b] >= sm[b + 1];
            left && right && sm[b] >= threshold
        })
        .collect();
    let mut bounds = vec![0usize];
    for w in peaks.windows(2) {
        let valley = (w[0]..=w[1])
            .min_by(|&a, &b| sm[a].partial_cmp(&sm[b]).unwrap())
            .unwrap();
        bounds.push(valley);
    }
    bounds.push(bins);
    peaks
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let lo = p.saturating_sub(1);
            let hi = (p + 1).min(bins - 1);
            let m: f64 = hist[lo..=hi].iter().sum();
            let location = if m > 0.0 {
                (lo..=hi).map(|b| hist[b] * (b as f64 + 0.5) * width).sum::<f64>() / m
            } else {
                (p as f64 + 0.5) * width
            };
            let mass = hist[bounds[k]..bounds[k + 1]].iter().sum();
            Mode { location, mass }
        })
        .collect()
}

pub fn classify_regime(
    samples: &[f64],
    order_parameter: f64,
    s_tilde_mean: f64,
    config: &RegimeConfig,
) -> Result<RegimeReport> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "need at least {MIN_SAMPLES} savings-rate samples, got {}",
            samples.len()
        )));
    }
    let bins = config.bins();
    let hist = savings_histogram(samples, bins);
    let modes = find_modes(&hist, config.mode_mass_factor / bins as f64);
    let classification = if modes.len() >= 2 || order_parameter > config.order_threshold {
        Regime::Oscillatory
    } else {
        Regime::Stable
    };
    Ok(RegimeReport {
        classification,
        modes,
        order_parameter,
        s_tilde_mean,
        samples: samples.len(),
    })
}

/// Uses the snapshots past burn-in and the run's summary statistics.
pub fn classify_trajectory(trajectory: &Trajectory, config: &RegimeConfig) -> Result<RegimeReport> {
    let samples = trajectory.pooled_savings(trajectory.summary.window_start);
    classify_regime(
        &samples,
        trajectory.summary.std_s_tilde,
        trajectory.summary.mean_s_tilde,
        config,
    )
}

/// Pools snapshots across runs; the order parameter is the mean over runs.
pub fn classify_ensemble(trajectories: &[&Trajectory], config: &RegimeConfig) -> Result<RegimeReport> {
    if trajectories.is_empty() {
        return Err(Error::InsufficientData("no trajectories".into()));
    }
    let samples: Vec<f64> = trajectories
        .iter()
        .flat_map(|t| t.pooled_savings(t.summary.window_start))
        .collect();
    let n = trajectories.len() as f64;
    let order = trajectories.iter().map(|t| t.summary.std_s_tilde).sum::<f64>() / n;
    let mean = trajectories.iter().map(|t| t.summary.mean_s_tilde).sum::<f64>() / n;
    classify_regime(&samples, order, mean, config)
}
