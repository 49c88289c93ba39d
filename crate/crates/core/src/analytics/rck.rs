//! Representative-agent reference: the `k' = 0` locus and the saddle path
//! through the modified golden rule.

use serde::{Deserialize, Serialize};

use super::closed_form::{golden_rule, RckSteadyState};
use crate::error::{Error, Result};
use crate::params::Params;

/// Initial displacement from the steady state along the stable eigenvector.
const SEED_OFFSET: f64 = 1e-6;
const STEP: f64 = 0.01;
const MAX_STEPS: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    /// Time relative to reaching the steady-state neighbourhood (non-positive).
    pub t: f64,
    pub k: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RckReference {
    pub steady_state: RckSteadyState,
    /// `(k, c)` with `c = k^alpha - delta k`.
    pub locus: Vec<(f64, f64)>,
    /// Branch approaching the steady state from below (`k < k*`), ordered by time.
    pub lower_branch: Vec<PathPoint>,
    /// Branch approaching from above (`k > k*`), ordered by time.
    pub upper_branch: Vec<PathPoint>,
}

impl RckReference {
    /// Whole saddle path ordered by increasing `k`, steady state included.
    pub fn saddle_path(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = self.lower_branch.iter().map(|p| (p.k, p.c)).collect();
        out.push((self.steady_state.k_star, self.steady_state.c_star));
        out.extend(self.upper_branch.iter().rev().map(|p| (p.k, p.c)));
        out
    }
}

/// `(dk/dt, dc/dt)` of the optimal-growth system with `r = alpha k^{alpha-1}`.
pub fn rck_vector_field(k: f64, c: f64, alpha: f64, delta: f64, rho: f64, theta: f64) -> (f64, f64) {
    let r_net = alpha * k.powf(alpha - 1.0) - delta;
    (k.powf(alpha) - delta * k - c, c * (r_net - rho) / theta)
}

pub fn rck_reference_trajectory(params: &Params, k_min: f64, k_max: f64, points: usize) -> Result<RckReference> {
    let (alpha, delta, rho, theta) = (params.alpha, params.delta, params.rho, params.theta);
    if !(theta > 0.0) {
        return Err(Error::param("theta", format!("saddle path needs theta > 0, got {theta}")));
    }
    if !(k_min > 0.0 && k_max > k_min) || points < 2 {
        return Err(Error::Domain(format!("bad k range [{k_min}, {k_max}] with {points} points")));
    }
    let ss = golden_rule(alpha, delta, rho);
    let locus = (0..points)
        .map(|i| {
            let k = k_min + (k_max - k_min) * i as f64 / (points - 1) as f64;
            (k, k.powf(alpha) - delta * k)
        })
        .collect();

    // Linearisation at the steady state: [[rho, -1], [m, 0]].
    let m = ss.c_star * alpha * (alpha - 1.0) * ss.k_star.powf(alpha - 2.0) / theta;
    let stable = 0.5 * (rho - (rho * rho - 4.0 * m).sqrt());
    let (vk, vc) = (1.0, rho - stable);
    let norm = (vk * vk + vc * vc).sqrt();
    let scale = SEED_OFFSET * ss.k_star;

    let branch = |sign: f64| {
        let mut k = ss.k_star + sign * scale * vk / norm;
        let mut c = ss.c_star + sign * scale * vc / norm;
        let mut t = 0.0;
        let mut out = vec![PathPoint { t, k, c }];
        let f = |k: f64, c: f64| rck_vector_field(k, c, alpha, delta, rho, theta);
        let h = -STEP;
        for _ in 0..MAX_STEPS {
            let (a1, b1) = f(k, c);
            let (a2, b2) = f(k + 0.5 * h * a1, c + 0.5 * h * b1);
            let (a3, b3) = f(k + 0.5 * h * a2, c + 0.5 * h * b2);
            let (a4, b4) = f(k + h * a3, c + h * b3);
            let nk = k + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
            let nc = c + h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
            if !(nk > 0.0 && nc > 0.0 && nk.is_finite() && nc.is_finite()) || nk < k_min || nk > k_max {
                break;
            }
            k = nk;
            c = nc;
            t += h;
            out.push(PathPoint { t, k, c });
        }
        out.reverse();
        out
    };

    Ok(RckReference {
        steady_state: ss,
        locus,
        lower_branch: branch(-1.0),
        upper_branch: branch(1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> Params {
        Params { rho: 0.01, theta: 1.0, ..Params::default() }
    }

    #[test]
    fn locus_example() {
        let p = Params::default();
        let r = rck_reference_trajectory(&p, 1.0, 400.0, 400).unwrap();
        let at_100 = r.locus.iter().find(|(k, _)| (*k - 100.0).abs() < 1e-9).unwrap();
        assert!((at_100.1 - 5.0).abs() < 1e-12);
    }

    #[test]
    fn saddle_path_passes_through_steady_state() {
        let r = rck_reference_trajectory(&params(), 1.0, 400.0, 100).unwrap();
        let path = r.saddle_path();
        assert!(path.iter().any(|&(k, c)| k == r.steady_state.k_star && c == r.steady_state.c_star));
        assert!(path.windows(2).all(|w| w[0].0 < w[1].0));
        assert!(r.lower_branch.len() > 100 && r.upper_branch.len() > 100);
        // Ends of both branches approach the steady state.
        let last = r.lower_branch.last().unwrap();
        assert!((last.k - r.steady_state.k_star).abs() < 1e-3 * r.steady_state.k_star);
    }

    #[test]
    fn ramsey_keynes_holds_along_path() {
        let p = params();
        let r = rck_reference_trajectory(&p, 1.0, 400.0, 100).unwrap();
        for branch in [&r.lower_branch, &r.upper_branch] {
            for w in branch.windows(3).step_by(97) {
                let h = w[2].t - w[0].t;
                let c_dot = (w[2].c - w[0].c) / h;
                let k = w[1].k;
                let r_net = p.alpha * k.powf(p.alpha - 1.0) - p.delta;
                let predicted = (r_net - p.rho) / p.theta;
                assert!((c_dot / w[1].c - predicted).abs() < 1e-6, "{} vs {predicted}", c_dot / w[1].c);
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = Params { theta: 0.0, ..params() };
        assert!(rck_reference_trajectory(&p, 1.0, 10.0, 10).is_err());
        assert!(rck_reference_trajectory(&params(), 10.0, 1.0, 10).is_err());
    }
}
