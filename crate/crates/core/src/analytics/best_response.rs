//! Single-household best response to an aggregate savings rate.

use serde::{Deserialize, Serialize};

use super::closed_form::{consumption_at_horizon, require_alpha_half, s_star_tau, steady_capital, HorizonSetup};
use crate::error::Result;
use crate::params::Params;

/// Points in the coarse scan preceding golden-section refinement. Horizon
/// consumption is not unimodal in `s_i` once `tau` is large.
const SCAN_POINTS: usize = 2001;
const TOLERANCE: f64 = 1e-6;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestResponse {
    pub s_i: f64,
    pub consumption: f64,
}

/// Rate in `[0, 1]` maximising a single household's consumption after `tau`
/// while everybody else holds `s` and aggregate capital sits at the steady
/// state of `s`.
pub fn best_response(s: f64, tau: f64, params: &Params) -> Result<BestResponse> {
    require_alpha_half(params.alpha)?;
    let n = params.n as f64;
    let labor = params.big_l;
    let k0 = steady_capital(s, labor, params.delta);
    let base = HorizonSetup {
        k_i0: k0 / n,
        l_i: labor / n,
        s_i: s,
        s,
        k0,
        labor,
        delta: params.delta,
        tau,
    };
    let c = |s_i: f64| consumption_at_horizon(&HorizonSetup { s_i, ..base });

    let step = 1.0 / (SCAN_POINTS - 1) as f64;
    let mut best = (0.0, c(0.0)?);
    for i in 1..SCAN_POINTS {
        let x = i as f64 * step;
        let v = c(x)?;
        if v > best.1 {
            best = (x, v);
        }
    }

    let (mut a, mut b) = ((best.0 - step).max(0.0), (best.0 + step).min(1.0));
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let (mut f1, mut f2) = (c(x1)?, c(x2)?);
    while b - a > TOLERANCE {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = c(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = c(x1)?;
        }
    }
    let mid = 0.5 * (a + b);
    let refined = (mid, c(mid)?);
    // Keep the scan point if refinement could not beat it (boundary optimum).
    let pick = [refined, best]
        .into_iter()
        .fold(refined, |acc, p| if p.1 > acc.1 { p } else { acc });
    Ok(BestResponse {
        s_i: pick.0,
        consumption: pick.1,
    })
}

/// One row of the best-response curve: responses to `s* + Δ` and `s* - Δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestResponseRow {
    pub tau: f64,
    pub s_star: f64,
    pub above: f64,
    pub below: f64,
}

pub fn best_response_curve(taus: &[f64], perturbation: f64, params: &Params) -> Result<Vec<BestResponseRow>> {
    taus.iter()
        .map(|&tau| {
            let s_star = s_star_tau(tau, params.delta);
            Ok(BestResponseRow {
                tau,
                s_star,
                above: best_response(s_star + perturbation, tau, params)?.s_i,
                below: best_response(s_star - perturbation, tau, params)?.s_i,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilibrium_is_a_fixed_point_below_the_transition() {
        let p = Params::default();
        for tau in [1.0, 5.0, 10.0, 20.0, 40.0] {
            let s = s_star_tau(tau, p.delta);
            let br = best_response(s, tau, &p).unwrap();
            assert!((br.s_i - s).abs() < 1e-5, "tau {tau}: {} vs {s}", br.s_i);
        }
    }

    #[test]
    fn rejects_other_elasticities() {
        let p = Params { alpha: 0.3, ..Params::default() };
        assert!(best_response(0.2, 10.0, &p).is_err());
    }
}
