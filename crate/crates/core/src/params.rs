//! Economic and behavioural constants of a run.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Horizon multiplier: runs last `HORIZON_TAUS * tau` time units by default.
pub const HORIZON_TAUS: f64 = 5_000.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    /// Capital elasticity of output.
    pub alpha: f64,
    /// Depreciation rate per unit time.
    pub delta: f64,
    /// Mean waiting time between a household's savings-rate updates.
    pub tau: f64,
    /// Half-width of the uniform copy noise.
    pub eps_width: f64,
    /// Total labor supply, split evenly across households.
    pub big_l: f64,
    pub n: usize,
    pub dt: f64,
    /// Simulated time; `None` means `5000 * tau`.
    pub horizon: Option<f64>,
    pub seed: u64,
    /// CRRA coefficient, used only by the representative-agent reference model.
    pub theta: f64,
    /// Discount rate, used only by the representative-agent reference model.
    pub rho: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            alpha: 0.5,
            delta: 0.05,
            tau: 100.0,
            eps_width: 0.01,
            big_l: 1.0,
            n: 100,
            dt: 1.0,
            horizon: None,
            seed: 0,
            theta: 1.0,
            rho: 0.0,
        }
    }
}

impl Params {
    /// Defaults used for network-structure studies (faster depreciation).
    pub fn network_study() -> Self {
        Params {
            delta: 0.2,
            ..Params::default()
        }
    }

    pub fn horizon(&self) -> f64 {
        self.horizon.unwrap_or(HORIZON_TAUS * self.tau)
    }

    /// Number of whole `dt` steps needed to reach the horizon.
    pub fn steps(&self) -> u64 {
        (self.horizon() / self.dt - 1e-9).ceil().max(0.0) as u64
    }

    pub fn labor_per_household(&self) -> f64 {
        self.big_l / self.n as f64
    }

    pub fn validate(&self) -> Result<()> {
        fn finite(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be finite, got {v}")))
            }
        }
        for (name, v) in [
            ("alpha", self.alpha),
            ("delta", self.delta),
            ("tau", self.tau),
            ("eps_width", self.eps_width),
            ("big_l", self.big_l),
            ("dt", self.dt),
            ("theta", self.theta),
            ("rho", self.rho),
        ] {
            finite(name, v)?;
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::param("alpha", format!("must lie in (0,1), got {}", self.alpha)));
        }
        if self.delta <= 0.0 {
            return Err(Error::param("delta", format!("must be > 0, got {}", self.delta)));
        }
        if self.tau <= 0.0 {
            return Err(Error::param("tau", format!("must be > 0, got {}", self.tau)));
        }
        if self.dt <= 0.0 {
            return Err(Error::param("dt", format!("must be > 0, got {}", self.dt)));
        }
        if self.delta * self.dt >= 1.0 {
            return Err(Error::param(
                "dt",
                format!("delta*dt = {} must be < 1 for a stable Euler step", self.delta * self.dt),
            ));
        }
        if self.n < 2 {
            return Err(Error::param("n", format!("need at least 2 households, got {}", self.n)));
        }
        if !(0.0..0.5).contains(&self.eps_width) {
            return Err(Error::param(
                "eps_width",
                format!("must lie in [0, 0.5), got {}", self.eps_width),
            ));
        }
        if self.big_l <= 0.0 {
            return Err(Error::param("big_l", format!("must be > 0, got {}", self.big_l)));
        }
        if self.theta < 0.0 {
            return Err(Error::param("theta", format!("must be >= 0, got {}", self.theta)));
        }
        if self.rho < 0.0 {
            return Err(Error::param("rho", format!("must be >= 0, got {}", self.rho)));
        }
        if let Some(h) = self.horizon {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::param("horizon", format!("must be finite and > 0, got {h}")));
            }
        }
        Ok(())
    }
}
