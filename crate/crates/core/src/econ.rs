//! One-good economy: Cobb-Douglas production, competitive factor prices,
//! household incomes and Euler capital dynamics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Household {
    pub capital: f64,
    pub savings_rate: f64,
    pub labor: f64,
}

impl Household {
    pub fn new(capital: f64, savings_rate: f64, labor: f64) -> Self {
        Household {
            capital,
            savings_rate,
            labor,
        }
    }
}

/// Competitive factor prices: rent per unit capital and wage per unit labor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorPrices {
    pub r: f64,
    pub w: f64,
}

/// `Y = K^alpha L^(1-alpha)`.
pub fn production(capital: f64, labor: f64, alpha: f64) -> Result<f64> {
    if !capital.is_finite() || !labor.is_finite() || !alpha.is_finite() {
        return Err(Error::NonFinite { what: "production input" });
    }
    if capital < 0.0 {
        return Err(Error::Domain(format!("negative capital {capital}")));
    }
    if labor <= 0.0 {
        return Err(Error::Domain(format!("labor must be positive, got {labor}")));
    }
    if capital == 0.0 {
        return Ok(0.0);
    }
    Ok(capital.powf(alpha) * labor.powf(1.0 - alpha))
}

/// Marginal products `w = (1-alpha) y`, `r = alpha y / k` with `k = K/L`, `y = k^alpha`.
pub fn factor_prices(capital: f64, labor: f64, alpha: f64) -> Result<FactorPrices> {
    if !capital.is_finite() || !labor.is_finite() {
        return Err(Error::NonFinite { what: "factor price input" });
    }
    if labor <= 0.0 {
        return Err(Error::Domain(format!("labor must be positive, got {labor}")));
    }
    if capital <= 0.0 {
        return Err(Error::DegenerateEconomy);
    }
    let k = capital / labor;
    let y = k.powf(alpha);
    Ok(FactorPrices {
        r: alpha * y / k,
        w: (1.0 - alpha) * y,
    })
}

/// `I_i = r K_i + w L_i`.
#[inline]
pub fn household_income(h: &Household, prices: FactorPrices) -> f64 {
    prices.r * h.capital + prices.w * h.labor
}

/// `C_i = (1 - s_i) I_i`.
#[inline]
pub fn consumption(h: &Household, income: f64) -> f64 {
    (1.0 - h.savings_rate) * income
}

/// One explicit Euler step of `dK_i/dt = s_i I_i - delta K_i`, clamped at zero.
pub fn capital_step(h: &Household, prices: FactorPrices, delta: f64, dt: f64) -> Result<f64> {
    let income = household_income(h, prices);
    let next = h.capital + dt * (h.savings_rate * income - delta * h.capital);
    if !next.is_finite() {
        return Err(Error::NonFinite { what: "household capital" });
    }
    Ok(next.max(0.0))
}

/// Economy-wide quantities derived from a cross-section of households.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Aggregates {
    pub capital: f64,
    pub output: f64,
    pub r: f64,
    pub w: f64,
    /// Income-weighted mean savings rate (total investment over total income).
    pub s_tilde: f64,
    pub consumption: f64,
}

impl Aggregates {
    pub fn investment(&self) -> f64 {
        self.output - self.consumption
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EconomyState {
    pub t: f64,
    pub households: Vec<Household>,
}

impl EconomyState {
    pub fn total_capital(&self) -> f64 {
        self.households.iter().map(|h| h.capital).sum()
    }

    pub fn total_labor(&self) -> f64 {
        self.households.iter().map(|h| h.labor).sum()
    }

    pub fn prices(&self, alpha: f64) -> Result<FactorPrices> {
        factor_prices(self.total_capital(), self.total_labor(), alpha)
    }

    pub fn incomes(&self, prices: FactorPrices) -> Vec<f64> {
        self.households
            .iter()
            .map(|h| household_income(h, prices))
            .collect()
    }

    pub fn consumptions(&self, prices: FactorPrices) -> Vec<f64> {
        self.households
            .iter()
            .map(|h| consumption(h, household_income(h, prices)))
            .collect()
    }

    pub fn aggregates(&self, alpha: f64) -> Result<Aggregates> {
        let capital = self.total_capital();
        let labor = self.total_labor();
        let prices = factor_prices(capital, labor, alpha)?;
        let mut income = 0.0;
        let mut investment = 0.0;
        for h in &self.households {
            let i = household_income(h, prices);
            income += i;
            investment += h.savings_rate * i;
        }
        let output = production(capital, labor, alpha)?;
        Ok(Aggregates {
            capital,
            output,
            r: prices.r,
            w: prices.w,
            s_tilde: investment / income,
            consumption: income - investment,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn production_examples() {
        assert_relative_eq!(production(100.0, 1.0, 0.5).unwrap(), 10.0, max_relative = 1e-15);
        assert_eq!(production(0.0, 1.0, 0.5).unwrap(), 0.0);
        for alpha in [0.1, 0.3, 0.5, 0.9] {
            assert_eq!(production(1.0, 1.0, alpha).unwrap(), 1.0);
        }
        assert!(production(-1.0, 1.0, 0.5).is_err());
        assert!(production(f64::NAN, 1.0, 0.5).is_err());
        assert!(production(1.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn factor_price_examples() {
        let p = factor_prices(100.0, 1.0, 0.5).unwrap();
        assert_relative_eq!(p.r, 0.05, max_relative = 1e-14);
        assert_relative_eq!(p.w, 5.0, max_relative = 1e-14);
        let p = factor_prices(3.0, 3.0, 0.5).unwrap();
        assert_relative_eq!(p.r, 0.5, max_relative = 1e-14);
        assert_relative_eq!(p.w, 0.5, max_relative = 1e-14);
        let p = factor_prices(25.0, 1.0, 0.5).unwrap();
        assert_relative_eq!(p.r, 0.1, max_relative = 1e-14);
        assert_relative_eq!(p.w, 2.5, max_relative = 1e-14);
        assert!(matches!(factor_prices(0.0, 1.0, 0.5), Err(Error::DegenerateEconomy)));
    }

    #[test]
    fn income_and_consumption_examples() {
        let prices = FactorPrices { r: 0.05, w: 5.0 };
        let h = Household::new(1.0, 0.5, 0.01);
        let income = household_income(&h, prices);
        assert_relative_eq!(income, 0.1, max_relative = 1e-14);
        assert_relative_eq!(consumption(&h, income), 0.05, max_relative = 1e-14);

        let wage_only = Household::new(0.0, 0.5, 0.01);
        for r in [0.0, 0.3, 7.0] {
            let i = household_income(&wage_only, FactorPrices { r, w: 5.0 });
            assert_relative_eq!(i, 0.05, max_relative = 1e-14);
        }

        assert_eq!(consumption(&Household::new(1.0, 1.0, 0.01), 3.7), 0.0);
        assert_eq!(consumption(&Household::new(1.0, 0.0, 0.01), 0.1), 0.1);
    }

    #[test]
    fn identical_households_split_output_evenly() {
        let n = 7;
        let state = EconomyState {
            t: 0.0,
            households: vec![Household::new(3.0, 0.4, 1.0 / n as f64); n],
        };
        let prices = state.prices(0.5).unwrap();
        let y = production(state.total_capital(), 1.0, 0.5).unwrap();
        for i in state.incomes(prices) {
            assert_relative_eq!(i, y / n as f64, max_relative = 1e-13);
        }
    }

    #[test]
    fn capital_step_examples() {
        let prices = FactorPrices { r: 0.05, w: 5.0 };
        let h = Household::new(1.0, 0.0, 0.01);
        assert_relative_eq!(capital_step(&h, prices, 0.05, 1.0).unwrap(), 0.95, max_relative = 1e-14);

        // s I = delta K  =>  fixed point
        let h = Household::new(2.0, 0.5, 0.01);
        let income = household_income(&h, prices);
        let delta = h.savings_rate * income / h.capital;
        assert_relative_eq!(capital_step(&h, prices, delta, 1.0).unwrap(), 2.0, max_relative = 1e-14);

        let h = Household::new(1.0, 0.0, 0.0);
        assert_eq!(capital_step(&h, prices, 0.05, 30.0).unwrap(), 0.0);

        let h = Household::new(f64::INFINITY, 0.5, 0.01);
        assert!(capital_step(&h, prices, 0.05, 1.0).is_err());
    }

    fn arb_state() -> impl Strategy<Value = (Vec<(f64, f64)>, f64)> {
        (
            prop::collection::vec((1e-3f64..1e3, 0.0f64..=1.0), 2..60),
            0.05f64..0.95,
        )
    }

    proptest! {
        #[test]
        fn income_exhausts_output((hs, alpha) in arb_state()) {
            let n = hs.len();
            let state = EconomyState {
                t: 0.0,
                households: hs.iter().map(|&(k, s)| Household::new(k, s, 1.0 / n as f64)).collect(),
            };
            let agg = state.aggregates(alpha).unwrap();
            let total: f64 = state.incomes(state.prices(alpha).unwrap()).iter().sum();
            prop_assert!((total - agg.output).abs() <= 1e-9 * agg.output);
            prop_assert!((agg.r * agg.capital + agg.w * 1.0 - agg.output).abs() <= 1e-9 * agg.output);
            prop_assert!((agg.output - agg.consumption - agg.investment()).abs() <= 1e-12 * agg.output);
        }

        #[test]
        fn s_tilde_is_convex_combination((hs, alpha) in arb_state()) {
            let n = hs.len();
            let state = EconomyState {
                t: 0.0,
                households: hs.iter().map(|&(k, s)| Household::new(k, s, 1.0 / n as f64)).collect(),
            };
            let agg = state.aggregates(alpha).unwrap();
            let lo = hs.iter().map(|h| h.1).fold(f64::INFINITY, f64::min);
            let hi = hs.iter().map(|h| h.1).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(agg.s_tilde >= lo - 1e-12 && agg.s_tilde <= hi + 1e-12);
        }

        #[test]
        fn aggregate_step_consistency((hs, alpha) in arb_state(), delta in 0.01f64..0.3) {
            let n = hs.len();
            let households: Vec<_> = hs.iter().map(|&(k, s)| Household::new(k, s, 1.0 / n as f64)).collect();
            let state = EconomyState { t: 0.0, households };
            let prices = state.prices(alpha).unwrap();
            let big_k = state.total_capital();
            let dt = 1.0;
            let moved: f64 = state
                .households
                .iter()
                .map(|h| capital_step(h, prices, delta, dt).unwrap() - h.capital)
                .sum();
            let invest: f64 = state.households.iter().map(|h| h.savings_rate * household_income(h, prices)).sum();
            prop_assert!((moved - dt * (invest - delta * big_k)).abs() <= 1e-9 * big_k);
        }

        #[test]
        fn prices_are_scale_invariant(k in 1e-3f64..1e4, l in 1e-2f64..1e2, c in 1e-3f64..1e3, alpha in 0.05f64..0.95) {
            let a = factor_prices(k, l, alpha).unwrap();
            let b = factor_prices(c * k, c * l, alpha).unwrap();
            prop_assert!((a.r - b.r).abs() <= 1e-12 * a.r.abs().max(1e-300));
            prop_assert!((a.w - b.w).abs() <= 1e-12 * a.w);
        }
    }
}
