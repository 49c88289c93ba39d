//! The imitate-the-best savings rule.

use rand::Rng;

use crate::network::SocialGraph;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Imitation {
    pub new_rate: f64,
    /// Neighbour whose rate was copied; `None` when `i` kept its own rate.
    pub copied_from: Option<usize>,
}

/// Household `i` looks at its neighbours' current consumption. If the best of
/// them strictly out-consumes `i`, it copies that neighbour's rate plus uniform
/// noise of half-width `eps_width`, clamped to `[0, 1]`. Ties among the best
/// neighbours are broken uniformly at random.
pub fn imitate_best<R: Rng + ?Sized>(
    i: usize,
    savings: &[f64],
    consumptions: &[f64],
    graph: &SocialGraph,
    rng: &mut R,
    eps_width: f64,
) -> Imitation {
    let keep = Imitation {
        new_rate: savings[i],
        copied_from: None,
    };
    let mut best: Option<usize> = None;
    let mut best_c = f64::NEG_INFINITY;
    let mut ties = 0u32;
    for &j in graph.neighbors(i) {
        let c = consumptions[j];
        if c > best_c {
            best_c = c;
            best = Some(j);
            ties = 1;
        } else if c == best_c {
            ties += 1;
            if rng.random_range(0..ties) == 0 {
                best = Some(j);
            }
        }
    }
    match best {
        Some(j) if best_c > consumptions[i] => {
            let eps = if eps_width > 0.0 {
                rng.random_range(-eps_width..=eps_width)
            } else {
                0.0
            };
            Imitation {
                new_rate: (savings[j] + eps).clamp(0.0, 1.0),
                copied_from: Some(j),
            }
        }
        _ => keep,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::econ::{consumption, household_income, factor_prices, Household};
    use crate::network::complete_graph;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn keeps_rate_when_no_neighbour_consumes_more() {
        let g = complete_graph(4).unwrap();
        let s = [0.3, 0.1, 0.2, 0.4];
        let c = [5.0, 1.0, 2.0, 5.0];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = imitate_best(0, &s, &c, &g, &mut rng, 0.01);
        assert_eq!(out, Imitation { new_rate: 0.3, copied_from: None });
    }

    #[test]
    fn noiseless_copy_is_exact() {
        let g = complete_graph(3).unwrap();
        let s = [0.3, 0.77, 0.2];
        let c = [1.0, 2.0, 0.5];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = imitate_best(0, &s, &c, &g, &mut rng, 0.0);
        assert_eq!(out, Imitation { new_rate: 0.77, copied_from: Some(1) });
    }

    #[test]
    fn copy_noise_stays_in_band_and_clamps() {
        let g = complete_graph(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let out = imitate_best(0, &[0.5, 0.4], &[1.0, 2.0], &g, &mut rng, 0.01);
            assert!((out.new_rate - 0.4).abs() <= 0.01);
            let out = imitate_best(0, &[0.5, 0.995], &[1.0, 2.0], &g, &mut rng, 0.01);
            assert!(out.new_rate <= 1.0);
            let out = imitate_best(0, &[0.5, 0.0], &[1.0, 2.0], &g, &mut rng, 0.01);
            assert!(out.new_rate >= 0.0);
        }
    }

    #[test]
    fn two_households_lower_consumer_copies() {
        // Equal capital and labour: income is equal, so the lower savings rate
        // consumes more. C = (1 - s) I.
        let prices = factor_prices(2.0, 1.0, 0.5).unwrap();
        let hs = [Household::new(1.0, 0.2, 0.5), Household::new(1.0, 0.4, 0.5)];
        let c: Vec<f64> = hs.iter().map(|h| consumption(h, household_income(h, prices))).collect();
        let income = prices.r + prices.w * 0.5;
        assert!((c[0] - 0.8 * income).abs() < 1e-15);
        assert!((c[1] - 0.6 * income).abs() < 1e-15);

        let s = [0.2, 0.4];
        let g = complete_graph(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(imitate_best(0, &s, &c, &g, &mut rng, 0.0).copied_from, None);
        let out = imitate_best(1, &s, &c, &g, &mut rng, 0.0);
        assert_eq!(out, Imitation { new_rate: 0.2, copied_from: Some(0) });
    }

    #[test]
    fn ties_with_own_consumption_do_not_copy() {
        let g = complete_graph(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = imitate_best(0, &[0.1, 0.9], &[1.0, 1.0], &g, &mut rng, 0.01);
        assert_eq!(out.copied_from, None);
    }

    #[test]
    fn ties_among_neighbours_are_uniform() {
        let g = complete_graph(4).unwrap();
        let s = [0.0, 0.1, 0.2, 0.3];
        let c = [0.0, 1.0, 1.0, 1.0];
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut counts = [0usize; 4];
        let trials = 30_000;
        for _ in 0..trials {
            counts[imitate_best(0, &s, &c, &g, &mut rng, 0.0).copied_from.unwrap()] += 1;
        }
        assert_eq!(counts[0], 0);
        for &k in &counts[1..] {
            let f = k as f64 / trials as f64;
            assert!((f - 1.0 / 3.0).abs() < 0.015, "{counts:?}");
        }
    }
}
