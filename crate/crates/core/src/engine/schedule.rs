//! Poisson clocks deciding which households revise their savings rate in a step.

use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleMode {
    /// Independent per-step inclusion with probability `1 - exp(-dt/tau)`.
    #[default]
    Bernoulli,
    /// Exponential waiting times tracked per household in continuous time.
    ExactPoisson,
    /// Every household updates once per `tau`, always in the same order.
    FixedCyclic,
    /// Savings rates are frozen.
    Disabled,
}

/// Per-step update probability of a rate-`1/tau` Poisson clock.
pub fn update_probability(dt: f64, tau: f64) -> f64 {
    -(-dt / tau).exp_m1()
}

#[derive(Debug, Clone)]
pub enum Scheduler {
    /// Bernoulli thinning realised by geometric skipping over the flattened
    /// sequence of (step, household) trials. Same distribution as one coin per
    /// household per step, but RNG cost scales with the number of updates.
    Bernoulli { n: usize, steps_per_tau: f64, next_trial: u64 },
    ExactPoisson { tau: f64, next_time: Vec<f64> },
    FixedCyclic { n: usize, period: u64 },
    Disabled,
}

impl Scheduler {
    pub fn new<R: Rng + ?Sized>(mode: ScheduleMode, n: usize, tau: f64, dt: f64, rng: &mut R) -> Self {
        match mode {
            ScheduleMode::Bernoulli => {
                let steps_per_tau = tau / dt;
                let next_trial = geometric_gap(steps_per_tau, rng);
                Scheduler::Bernoulli { n, steps_per_tau, next_trial }
            }
            ScheduleMode::ExactPoisson => Scheduler::ExactPoisson {
                tau,
                next_time: (0..n).map(|_| exponential(tau, rng)).collect(),
            },
            ScheduleMode::FixedCyclic => Scheduler::FixedCyclic {
                n,
                period: (tau / dt).round().max(1.0) as u64,
            },
            ScheduleMode::Disabled => Scheduler::Disabled,
        }
    }

    /// Fills `out` with the households updating during step `step`, which covers
    /// `[t, t + dt)`. Indices come out in increasing order.
    pub fn due<R: Rng + ?Sized>(&mut self, step: u64, t: f64, dt: f64, rng: &mut R, out: &mut Vec<usize>) {
        out.clear();
        match self {
            Scheduler::Bernoulli { n, steps_per_tau, next_trial } => {
                let n = *n as u64;
                let end = (step + 1).saturating_mul(n);
                let start = step.saturating_mul(n);
                // Skip trials belonging to steps that were never asked about.
                while *next_trial < start {
                    *next_trial = next_trial.saturating_add(1 + geometric_gap(*steps_per_tau, rng));
                }
                while *next_trial < end {
                    out.push((*next_trial - start) as usize);
                    *next_trial = next_trial.saturating_add(1 + geometric_gap(*steps_per_tau, rng));
                }
            }
            Scheduler::ExactPoisson { tau, next_time } => {
                let end = t + dt;
                for (i, next) in next_time.iter_mut().enumerate() {
                    if *next < end {
                        out.push(i);
                        while *next < end {
                            *next += exponential(*tau, rng);
                        }
                    }
                }
            }
            Scheduler::FixedCyclic { n, period } => {
                let phase = step % *period;
                for i in 0..*n {
                    if (i as u64 * *period) / *n as u64 == phase {
                        out.push(i);
                    }
                }
            }
            Scheduler::Disabled => {}
        }
    }
}

/// Number of failures before the first success, success probability
/// `1 - exp(-1/steps_per_tau)`.
fn geometric_gap<R: Rng + ?Sized>(steps_per_tau: f64, rng: &mut R) -> u64 {
    let u: f64 = 1.0 - rng.random::<f64>();
    let x = -steps_per_tau * u.ln();
    if x >= 1.8e19 {
        u64::MAX / 2
    } else {
        x.floor() as u64
    }
}

fn exponential<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> f64 {
    let u: f64 = 1.0 - rng.random::<f64>();
    -mean * u.ln()
}
