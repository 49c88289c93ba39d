//! Bisection for the critical interaction time.

use serde::{Deserialize, Serialize};

use super::regime::{classify_trajectory, Regime, RegimeConfig};
use crate::ensemble::{run_members, MemberSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BisectionConfig {
    pub lo: f64,
    pub hi: f64,
    pub max_iter: usize,
    /// Stop once the bracket is narrower than this fraction of its midpoint.
    pub rel_width: f64,
    /// Split brackets at the geometric rather than the arithmetic mean.
    pub geometric: bool,
}

impl Default for BisectionConfig {
    fn default() -> Self {
        BisectionConfig {
            lo: 100.0,
            hi: 500.0,
            max_iter: 6,
            rel_width: 0.05,
            geometric: false,
        }
    }
}

impl BisectionConfig {
    pub fn midpoint(&self, lo: f64, hi: f64) -> f64 {
        if self.geometric {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub tau: f64,
    /// Fraction of ensemble members classified oscillatory.
    pub oscillatory_fraction: f64,
    /// Members that failed and were left out of the vote.
    pub failed: usize,
}

impl Probe {
    pub fn oscillatory(&self) -> bool {
        self.oscillatory_fraction > 0.5
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauCEstimate {
    pub tau_c: f64,
    pub lo: f64,
    pub hi: f64,
    pub width: f64,
    pub probes: Vec<Probe>,
}

impl TauCEstimate {
    pub fn degraded(&self) -> bool {
        self.probes.iter().any(|p| p.failed > 0)
    }
}

/// Bisects on a majority-vote probe. The low end must be stable and the high
/// end oscillatory.
pub fn bisect_transition<F>(config: &BisectionConfig, mut probe: F) -> Result<TauCEstimate>
where
    F: FnMut(f64) -> Result<Probe>,
{
    if !(config.lo > 0.0 && config.hi > config.lo) {
        return Err(Error::Bracket(format!("need 0 < lo < hi, got [{}, {}]", config.lo, config.hi)));
    }
    let mut probes = Vec::new();
    let p_lo = probe(config.lo)?;
    let p_hi = probe(config.hi)?;
    probes.push(p_lo);
    probes.push(p_hi);
    if p_lo.oscillatory() == p_hi.oscillatory() {
        return Err(Error::Bracket(format!(
            "both ends classify {} (oscillatory fractions {} at {} and {} at {})",
            if p_lo.oscillatory() { "oscillatory" } else { "stable" },
            p_lo.oscillatory_fraction,
            config.lo,
            p_hi.oscillatory_fraction,
            config.hi
        )));
    }
    if p_lo.oscillatory() {
        return Err(Error::Bracket(format!(
            "regime is oscillatory at tau = {} but stable at tau = {}",
            config.lo, config.hi
        )));
    }
    let (mut lo, mut hi) = (config.lo, config.hi);
    for _ in 0..config.max_iter {
        let mid = config.midpoint(lo, hi);
        if hi - lo <= config.rel_width * mid {
            break;
        }
        let p = probe(mid)?;
        probes.push(p);
        if p.oscillatory() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(TauCEstimate {
        tau_c: config.midpoint(lo, hi),
        lo,
        hi,
        width: hi - lo,
        probes,
    })
}

/// How an ensemble probe scales its run with `tau`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    pub members: usize,
    /// Horizon in units of `tau`.
    pub horizon_taus: f64,
    /// Snapshots taken over the whole run; those past burn-in feed the classifier.
    pub snapshots: u64,
    pub regime: RegimeConfig,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            members: 10,
            horizon_taus: crate::params::HORIZON_TAUS,
            snapshots: 100,
            regime: RegimeConfig::default(),
        }
    }
}

/// Runs the ensemble at `tau` and classifies every member on its own.
pub fn ensemble_probe(base: &MemberSpec, config: &ProbeConfig, tau: f64) -> Result<Probe> {
    let mut spec = base.clone();
    spec.params.tau = tau;
    spec.params.horizon = Some(config.horizon_taus * tau);
    spec.params.validate()?;
    let steps = spec.params.steps();
    spec.record.aggregate_stride = 0;
    spec.record.snapshot_stride = (steps / config.snapshots.max(1)).max(1);
    let results = run_members(&spec, config.members)?;
    let mut votes = 0usize;
    let mut counted = 0usize;
    let mut failed = 0usize;
    for r in results {
        match r.and_then(|t| classify_trajectory(&t, &config.regime)) {
            Ok(report) => {
                counted += 1;
                if report.classification == Regime::Oscillatory {
                    votes += 1;
                }
            }
            Err(_) => failed += 1,
        }
    }
    if counted == 0 {
        return Err(Error::InsufficientData(format!("every ensemble member failed at tau = {tau}")));
    }
    Ok(Probe {
        tau,
        oscillatory_fraction: votes as f64 / counted as f64,
        failed,
    })
}

pub fn estimate_tau_c(base: &MemberSpec, probe: &ProbeConfig, bisection: &BisectionConfig) -> Result<TauCEstimate> {
    bisect_transition(bisection, |tau| ensemble_probe(base, probe, tau))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stub(flip: f64) -> impl FnMut(f64) -> Result<Probe> {
        move |tau| {
            Ok(Probe {
                tau,
                oscillatory_fraction: if tau > flip { 1.0 } else { 0.0 },
                failed: 0,
            })
        }
    }

    #[test]
    fn stub_classifier_is_located() {
        let cfg = BisectionConfig { lo: 10.0, hi: 500.0, max_iter: 30, rel_width: 1e-6, ..Default::default() };
        let est = bisect_transition(&cfg, stub(100.0)).unwrap();
        assert!(est.lo <= 100.0 && est.hi >= 100.0);
        assert!((est.tau_c - 100.0).abs() <= est.width);
        assert!(est.width < 1e-3);
    }

    #[test]
    fn geometric_split_locates_small_thresholds() {
        let cfg = BisectionConfig { lo: 1.0, hi: 1000.0, max_iter: 12, rel_width: 0.05, geometric: true };
        let est = bisect_transition(&cfg, stub(7.0)).unwrap();
        assert!(est.lo <= 7.0 && est.hi >= 7.0);
        assert!(est.width <= 0.05 * est.tau_c);
        assert_eq!(est.probes[2].tau, (1000.0f64).sqrt());
    }

    #[test]
    fn identical_endpoints_are_rejected() {
        let cfg = BisectionConfig { lo: 10.0, hi: 50.0, ..Default::default() };
        assert!(matches!(bisect_transition(&cfg, stub(100.0)), Err(Error::Bracket(_))));
        let cfg = BisectionConfig { lo: 200.0, hi: 500.0, ..Default::default() };
        assert!(matches!(bisect_transition(&cfg, stub(100.0)), Err(Error::Bracket(_))));
    }

    #[test]
    fn inverted_regimes_are_rejected() {
        let cfg = BisectionConfig { lo: 10.0, hi: 500.0, ..Default::default() };
        let inverted = |tau: f64| Ok(Probe { tau, oscillatory_fraction: if tau < 100.0 { 1.0 } else { 0.0 }, failed: 0 });
        assert!(bisect_transition(&cfg, inverted).is_err());
    }

    #[test]
    fn stops_on_relative_width() {
        let cfg = BisectionConfig { lo: 100.0, hi: 500.0, max_iter: 50, rel_width: 0.1, ..Default::default() };
        let est = bisect_transition(&cfg, stub(250.0)).unwrap();
        assert!(est.width <= 0.1 * est.tau_c);
        assert!(est.probes.len() < 10);
    }
}
