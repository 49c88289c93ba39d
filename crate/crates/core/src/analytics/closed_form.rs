//! Closed-form results for the Cobb–Douglas economy. Everything past the
//! golden rule assumes a capital elasticity of exactly 1/2.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Steady state of the representative-agent model with discount rate `rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RckSteadyState {
    pub k_star: f64,
    pub c_star: f64,
    pub s_star_rck: f64,
    pub alpha: f64,
}

impl RckSteadyState {
    /// Per-capita output `k*^alpha`.
    pub fn y_star(&self) -> f64 {
        self.k_star.powf(self.alpha)
    }
}

/// Modified golden rule: `r - delta = rho`.
pub fn golden_rule(alpha: f64, delta: f64, rho: f64) -> RckSteadyState {
    let k_star = (alpha / (rho + delta)).powf(1.0 / (1.0 - alpha));
    RckSteadyState {
        k_star,
        c_star: k_star.powf(alpha) - delta * k_star,
        s_star_rck: alpha * delta / (rho + delta),
        alpha,
    }
}

/// Approximate stable-regime aggregate savings rate for interaction time `tau`.
pub fn s_star_tau(tau: f64, delta: f64) -> f64 {
    let x = (-delta * tau / 2.0).exp();
    (1.0 - x) / (2.0 - x)
}

/// Discount rate under which the representative agent saves `s_star_tau(tau)`.
pub fn rho_of_tau(tau: f64, delta: f64) -> f64 {
    (delta / 2.0) / (delta * tau / 2.0).exp_m1()
}

/// Inverse of [`rho_of_tau`].
pub fn tau_of_rho(rho: f64, delta: f64) -> f64 {
    (2.0 / delta) * (delta / (2.0 * rho)).ln_1p()
}

fn ensure_alpha_half(alpha: f64) -> Result<()> {
    if alpha == 0.5 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "closed-form results need alpha = 0.5, got {alpha}"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregatePoint {
    pub capital: f64,
    pub r: f64,
    pub w: f64,
}

/// Constants of the aggregate solution `K(t) = ((B - E e^{-delta t/2}) / delta)^2`.
#[derive(Debug, Clone, Copy)]
struct AggregateSolution {
    a: f64,
    b: f64,
    e: f64,
    delta: f64,
}

impl AggregateSolution {
    fn new(k0: f64, s: f64, labor: f64, delta: f64) -> Self {
        let sqrt_l = labor.sqrt();
        AggregateSolution {
            a: delta * sqrt_l / 2.0,
            b: s * sqrt_l,
            e: s * sqrt_l - delta * k0.sqrt(),
            delta,
        }
    }

    /// `B - E e^{-delta t / 2}`, which must stay positive.
    fn d(&self, t: f64) -> Result<f64> {
        let d = self.b - self.e * (-self.delta * t / 2.0).exp();
        if d > 0.0 && d.is_finite() {
            Ok(d)
        } else {
            Err(Error::Domain(format!("B - E exp(-delta t/2) = {d} is not positive at t = {t}")))
        }
    }
}

/// Exact aggregate path of `dK/dt = s sqrt(L K) - delta K` with constant `s`.
pub fn aggregate_capital_closed_form(k0: f64, s: f64, labor: f64, delta: f64, t: f64) -> Result<AggregatePoint> {
    if !(k0 > 0.0) {
        return Err(Error::Domain(format!("initial capital must be positive, got {k0}")));
    }
    let sol = AggregateSolution::new(k0, s, labor, delta);
    let d = sol.d(t)?;
    Ok(AggregatePoint {
        capital: (d / delta).powi(2),
        r: sol.a / d,
        w: d / (4.0 * sol.a),
    })
}

/// `(e^{g tau} - 1) / g`, continuous through `g = 0`.
fn growth_factor(g: f64, tau: f64) -> f64 {
    if g.abs() < 1e-9 {
        tau
    } else {
        (g * tau).exp_m1() / g
    }
}

/// Derivative of [`growth_factor`] with respect to `g`.
fn growth_factor_dg(g: f64, tau: f64) -> f64 {
    let x = g * tau;
    if x.abs() < 1e-3 {
        tau * tau * (0.5 + x / 3.0 + x * x / 8.0 + x * x * x / 30.0)
    } else {
        (tau * x.exp() * g - x.exp_m1()) / (g * g)
    }
}

/// Inputs of the single-household horizon approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizonSetup {
    /// Household initial capital.
    pub k_i0: f64,
    /// Household labor.
    pub l_i: f64,
    /// Household savings rate.
    pub s_i: f64,
    /// Savings rate of everybody else.
    pub s: f64,
    /// Aggregate initial capital.
    pub k0: f64,
    /// Aggregate labor.
    pub labor: f64,
    pub delta: f64,
    pub tau: f64,
}

/// Linearised household dynamics `dK_i/dt ~ G K_i + F` with prices frozen at
/// their mid-horizon values, plus the end-of-horizon rent `H`.
struct HorizonTerms {
    g: f64,
    f: f64,
    h: f64,
    /// `dG/ds_i`.
    dg: f64,
    /// `dF/ds_i`.
    df: f64,
}

fn horizon_terms(x: &HorizonSetup) -> Result<HorizonTerms> {
    let sol = AggregateSolution::new(x.k0, x.s, x.labor, x.delta);
    let d_mid = sol.d(x.tau / 2.0)?;
    let d_end = sol.d(x.tau)?;
    let dg = sol.a / d_mid;
    let df = d_mid / (4.0 * sol.a) * x.l_i;
    Ok(HorizonTerms {
        g: x.s_i * dg - x.delta,
        f: x.s_i * df,
        h: sol.a / d_end,
        dg,
        df,
    })
}

/// Approximate consumption of household `i` after a horizon `tau`, all other
/// households holding rate `s`.
pub fn consumption_at_horizon(x: &HorizonSetup) -> Result<f64> {
    let t = horizon_terms(x)?;
    let k_tau = x.k_i0 * (t.g * x.tau).exp() + t.f * growth_factor(t.g, x.tau);
    Ok((1.0 - x.s_i) * (t.h * k_tau + x.l_i / (4.0 * t.h)))
}

/// `N dC_i(tau)/ds_i` at `s_i = s`, for a household holding a `1/N` share of
/// capital and labor. Scale-free in `N`.
///
/// At the aggregate steady state `K0 = L s^2 / delta^2` this is the classic
/// criterion whose root is [`s_star_tau`].
pub fn ds_criterion(s: f64, k0: f64, labor: f64, delta: f64, tau: f64) -> Result<f64> {
    let x = HorizonSetup {
        k_i0: k0,
        l_i: labor,
        s_i: s,
        s,
        k0,
        labor,
        delta,
        tau,
    };
    let t = horizon_terms(&x)?;
    let e = (t.g * tau).exp();
    let phi = growth_factor(t.g, tau);
    let k_tau = k0 * e + t.f * phi;
    let dk = k0 * tau * e * t.dg + t.df * phi + t.f * growth_factor_dg(t.g, tau) * t.dg;
    Ok(-(t.h * k_tau + labor / (4.0 * t.h)) + (1.0 - s) * t.h * dk)
}

/// Steady-state aggregate capital for rate `s`: `L s^2 / delta^2`.
pub fn steady_capital(s: f64, labor: f64, delta: f64) -> f64 {
    labor * s * s / (delta * delta)
}

pub(crate) fn require_alpha_half(alpha: f64) -> Result<()> {
    ensure_alpha_half(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn golden_rule_examples() {
        let g = golden_rule(0.5, 0.05, 0.0);
        assert_relative_eq!(g.k_star, 100.0, max_relative = 1e-12);
        assert_relative_eq!(g.c_star, 5.0, max_relative = 1e-12);
        assert_relative_eq!(g.s_star_rck, 0.5, max_relative = 1e-12);
        assert_relative_eq!(g.y_star(), 10.0, max_relative = 1e-12);

        assert_relative_eq!(golden_rule(0.5, 0.05, 0.05).s_star_rck, 0.25, max_relative = 1e-15);
        assert!(golden_rule(0.5, 0.05, 1e12).s_star_rck < 1e-12);
        for alpha in [0.2, 0.33, 0.7] {
            assert_relative_eq!(golden_rule(alpha, 0.1, 0.0).s_star_rck, alpha, max_relative = 1e-12);
        }
    }

    #[test]
    fn golden_rule_maximises_steady_consumption() {
        // Steady state of dk = s k^a - delta k: k = (s/delta)^{1/(1-a)}.
        for alpha in [0.3, 0.5, 0.7] {
            let delta = 0.05;
            let c = |s: f64| (1.0 - s) * (s / delta).powf(alpha / (1.0 - alpha));
            let grid = 10_000;
            let best = (1..grid)
                .map(|i| i as f64 / grid as f64)
                .max_by(|a, b| c(*a).partial_cmp(&c(*b)).unwrap())
                .unwrap();
            let g = golden_rule(alpha, delta, 0.0);
            assert!((best - g.s_star_rck).abs() <= 1.0 / grid as f64);
            assert_relative_eq!(c(alpha), g.c_star, max_relative = 1e-12);
        }
    }

    #[test]
    fn s_star_examples() {
        assert_eq!(s_star_tau(0.0, 0.05), 0.0);
        assert!((s_star_tau(1e6, 0.05) - 0.5).abs() < 1e-15);
        let x = (-1.0f64).exp();
        assert_relative_eq!(s_star_tau(40.0, 0.05), (1.0 - x) / (2.0 - x), max_relative = 1e-15);
        assert!((s_star_tau(40.0, 0.05) - 0.38730).abs() < 1e-5);
        // e^{-0.25} = 0.778801: 0.221199 / 1.221199.
        assert!((s_star_tau(10.0, 0.05) - 0.181133).abs() < 1e-6);
    }

    #[test]
    fn rho_tau_examples() {
        // 0.025 / 1.718282
        assert!((rho_of_tau(40.0, 0.05) - 0.0145494).abs() < 1e-7);
        for delta in [0.01, 0.05, 0.2] {
            for tau in [0.1, 0.5, 1.0] {
                if delta * tau < 0.1 {
                    let rho = rho_of_tau(tau, delta);
                    assert!((rho * tau - 1.0).abs() < 0.05, "rho tau = {}", rho * tau);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn rho_tau_round_trip(log_rho in -3.0f64..1.0, delta in 0.01f64..0.5) {
            let rho = 10f64.powf(log_rho);
            let back = rho_of_tau(tau_of_rho(rho, delta), delta);
            prop_assert!((back - rho).abs() <= 1e-12 * rho);
            let tau = tau_of_rho(rho, delta);
            let again = tau_of_rho(rho_of_tau(tau, delta), delta);
            prop_assert!((again - tau).abs() <= 1e-12 * tau);
        }

        #[test]
        fn s_star_increasing_and_bounded(t1 in 0.0f64..2000.0, dt in 1e-3f64..100.0, delta in 0.01f64..0.5) {
            let a = s_star_tau(t1, delta);
            let b = s_star_tau(t1 + dt, delta);
            prop_assert!(b > a || (a - 0.5).abs() < 1e-15);
            prop_assert!(b <= 0.5);
        }

        #[test]
        fn rho_decreasing(t1 in 0.1f64..500.0, dt in 1e-2f64..100.0, delta in 0.01f64..0.5) {
            prop_assert!(rho_of_tau(t1 + dt, delta) < rho_of_tau(t1, delta));
        }
    }

    #[test]
    fn aggregate_closed_form_fixed_points() {
        let (s, l, delta) = (0.3, 1.0, 0.05);
        let k0 = steady_capital(s, l, delta);
        for t in [0.0, 1.0, 50.0, 1000.0] {
            let p = aggregate_capital_closed_form(k0, s, l, delta, t).unwrap();
            assert_relative_eq!(p.capital, k0, max_relative = 1e-12);
        }
        for k0 in [0.5, 1.0, 30.0, 500.0] {
            let p = aggregate_capital_closed_form(k0, s, l, delta, 0.0).unwrap();
            assert_relative_eq!(p.capital, k0, max_relative = 1e-12);
            assert_relative_eq!(p.r, 0.5 * (l / k0).sqrt(), max_relative = 1e-12);
            assert_relative_eq!(p.w, 0.5 * (k0 / l).sqrt(), max_relative = 1e-12);
        }
        assert!(aggregate_capital_closed_form(0.0, s, l, delta, 1.0).is_err());
    }

    #[test]
    fn aggregate_closed_form_matches_rk4_oracle() {
        for (k0, s, l, delta) in [(1.0, 0.3, 1.0, 0.05), (400.0, 0.2, 2.0, 0.1), (5.0, 0.7, 1.0, 0.02)] {
            let f = |k: f64| s * (l * k).sqrt() - delta * k;
            let h = 0.01;
            let mut k: f64 = k0;
            let mut worst: f64 = 0.0;
            for step in 0..=10_000 {
                if step % 100 == 0 {
                    let t = step as f64 * h;
                    let exact = aggregate_capital_closed_form(k0, s, l, delta, t).unwrap().capital;
                    worst = worst.max((k - exact).abs() / exact);
                }
                let a = f(k);
                let b = f(k + 0.5 * h * a);
                let c = f(k + 0.5 * h * b);
                let d = f(k + h * c);
                k += h / 6.0 * (a + 2.0 * b + 2.0 * c + d);
            }
            assert!(worst < 1e-9, "worst relative error {worst}");
        }
    }

    #[test]
    fn aggregate_closed_form_domain_error() {
        // s = 0: B = 0 and E < 0, so D = -E e^{..} > 0 always. Negative s breaks it.
        assert!(aggregate_capital_closed_form(1.0, -0.5, 1.0, 0.05, 100.0).is_err());
    }

    fn setup(s_i: f64, s: f64, n: f64, tau: f64) -> HorizonSetup {
        let (l, delta) = (1.0, 0.05);
        let k0 = steady_capital(s, l, delta);
        HorizonSetup { k_i0: k0 / n, l_i: l / n, s_i, s, k0, labor: l, delta, tau }
    }

    #[test]
    fn horizon_consumption_at_steady_state() {
        let (s, n) = (0.3, 100.0);
        for tau in [1.0, 10.0, 100.0] {
            let x = setup(s, s, n, tau);
            let r = 0.5 * (x.labor / x.k0).sqrt();
            let w = 0.5 * (x.k0 / x.labor).sqrt();
            let expected = (1.0 - s) * (r * x.k_i0 + w * x.l_i);
            assert_relative_eq!(consumption_at_horizon(&x).unwrap(), expected, max_relative = 1e-12);
        }
        assert_eq!(consumption_at_horizon(&setup(1.0, 0.3, n, 20.0)).unwrap(), 0.0);
    }

    #[test]
    fn horizon_consumption_continuous_through_g_zero() {
        // G = s_i A / D_mid - delta vanishes at s_i = 2 s on the steady state.
        let s = 0.3;
        let at = consumption_at_horizon(&setup(2.0 * s, s, 100.0, 30.0)).unwrap();
        let near = consumption_at_horizon(&setup(2.0 * s + 1e-7, s, 100.0, 30.0)).unwrap();
        assert!((at - near).abs() < 1e-6 * at);
    }

    #[test]
    fn horizon_consumption_tracks_direct_simulation() {
        // Oracle: Euler integration (dt = 1e-3) of N households, one deviant.
        let n = 20;
        let (l, delta) = (1.0, 0.05);
        for (s, s_i, tau) in [(0.3, 0.35, 10.0), (0.3, 0.2, 20.0), (0.4, 0.45, 15.0)] {
            let k0: f64 = 30.0;
            let mut ks = vec![k0 / n as f64; n];
            let li = l / n as f64;
            let h: f64 = 1e-3;
            let steps = (tau / h).round() as usize;
            let rate = |i: usize| if i == 0 { s_i } else { s };
            for _ in 0..steps {
                let big_k: f64 = ks.iter().sum();
                let r = 0.5 * (l / big_k).sqrt();
                let w = 0.5 * (big_k / l).sqrt();
                for (i, k) in ks.iter_mut().enumerate() {
                    *k += h * (rate(i) * (r * *k + w * li) - delta * *k);
                }
            }
            let big_k: f64 = ks.iter().sum();
            let r = 0.5 * (l / big_k).sqrt();
            let w = 0.5 * (big_k / l).sqrt();
            let direct = (1.0 - s_i) * (r * ks[0] + w * li);
            let x = HorizonSetup { k_i0: k0 / n as f64, l_i: li, s_i, s, k0, labor: l, delta, tau };
            let approx = consumption_at_horizon(&x).unwrap();
            assert!((approx - direct).abs() <= 0.05 * direct, "s={s} s_i={s_i} tau={tau}: {approx} vs {direct}");
        }
    }

    /// The criterion as printed for the steady-state case, with the end-of-horizon
    /// rent standing in for the mid-horizon one.
    fn criterion_printed_form(s: f64, k0: f64, l: f64, delta: f64, tau: f64) -> f64 {
        let a = delta * l.sqrt() / 2.0;
        let b = s * l.sqrt();
        let e = s * l.sqrt() - delta * k0.sqrt();
        let d_mid = b - e * (-delta * tau / 4.0).exp();
        let h = a / (b - e * (-delta * tau / 2.0).exp());
        let f = d_mid / (4.0 * a) * s * l;
        let g = s * a / d_mid - delta;
        let eg = (g * tau).exp();
        (1.0 - s) * h * ((eg - 1.0) / g * (l / (4.0 * h) - h * f / g) + eg * tau * h * (k0 + f / g))
            - h * ((eg - 1.0) * f / g + eg * k0)
            - l / (4.0 * h)
    }

    #[test]
    fn criterion_matches_printed_form_on_steady_state() {
        for s in [0.1, 0.25, 0.4] {
            for tau in [5.0, 40.0, 200.0] {
                let k0 = steady_capital(s, 1.0, 0.05);
                let ours = ds_criterion(s, k0, 1.0, 0.05, tau).unwrap();
                let printed = criterion_printed_form(s, k0, 1.0, 0.05, tau);
                assert!((ours - printed).abs() <= 1e-10 * printed.abs().max(1.0), "{ours} vs {printed}");
            }
        }
    }

    #[test]
    fn criterion_vanishes_at_s_star() {
        for tau in [1.0, 10.0, 40.0, 100.0, 400.0] {
            let s = s_star_tau(tau, 0.05);
            let k0 = steady_capital(s, 1.0, 0.05);
            let v = ds_criterion(s, k0, 1.0, 0.05, tau).unwrap();
            assert!(v.abs() < 1e-8, "tau {tau}: {v}");
        }
    }

    #[test]
    fn criterion_root_is_s_star() {
        let (l, delta) = (1.0, 0.05);
        for tau in [5.0, 20.0, 60.0, 150.0] {
            let f = |s: f64| ds_criterion(s, steady_capital(s, l, delta), l, delta, tau).unwrap();
            let (mut lo, mut hi) = (1e-6, 0.5 - 1e-9);
            assert!(f(lo) > 0.0 && f(hi) < 0.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if f(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            assert!((lo - s_star_tau(tau, delta)).abs() < 1e-9);
        }
    }

    #[test]
    fn criterion_sign_below_s_star() {
        let tau = 40.0;
        let s_star = s_star_tau(tau, 0.05);
        let s = 0.5 * s_star;
        let k0 = steady_capital(s, 1.0, 0.05);
        assert!(ds_criterion(s, k0, 1.0, 0.05, tau).unwrap() > 0.0);
        // Same sign from the finite-difference oracle.
        let n = 100.0;
        let c = |si: f64| consumption_at_horizon(&HorizonSetup { s_i: si, ..setup(si, s, n, tau) }).unwrap();
        assert!(c(s + 1e-4) > c(s - 1e-4));
    }

    #[test]
    fn criterion_matches_finite_differences_on_grid() {
        // Off the steady state too: K0 fixed at 1 while s varies.
        let n = 100.0;
        let h = 1e-6;
        let (l, delta) = (1.0, 0.05);
        for &k0 in &[1.0, 30.0] {
            for i in 1..10 {
                let s = i as f64 * 0.05;
                for &tau in &[1.0, 5.0, 20.0, 50.0, 100.0, 250.0] {
                    let base = HorizonSetup { k_i0: k0 / n, l_i: l / n, s_i: s, s, k0, labor: l, delta, tau };
                    let plus = consumption_at_horizon(&HorizonSetup { s_i: s + h, ..base }).unwrap();
                    let minus = consumption_at_horizon(&HorizonSetup { s_i: s - h, ..base }).unwrap();
                    let fd = (plus - minus) / (2.0 * h) * n;
                    let exact = ds_criterion(s, k0, l, delta, tau).unwrap();
                    let scale = exact.abs().max(1e-3 * (plus.abs() * n));
                    assert!((fd - exact).abs() <= 1e-4 * scale, "k0 {k0} s {s} tau {tau}: fd {fd} vs {exact}");
                }
            }
        }
    }
}
