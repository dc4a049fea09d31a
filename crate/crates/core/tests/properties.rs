//! Structural invariants over random instances.

use proptest::prelude::*;
use strategic_testing::presets::{preset, preset_names};
use strategic_testing::*;

fn instance() -> impl Strategy<Value = EconomicInstance> {
    (
        0.1f64..100.0,
        0.0f64..0.5,
        1e-5f64..0.01,
        0.2f64..0.8,
        1u64..20,
        50u64..3000,
    )
        .prop_map(|(r, c0, c, mu_b, n_min, n_max)| {
            EconomicInstance::new(r, c0 * r, c * r, mu_b)
                .unwrap()
                .with_sample_bounds(n_min, n_max)
                .unwrap()
        })
}

fn belief(mu: f64) -> AgentBelief {
    AgentBelief::new(mu).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn best_response_matches_exhaustive_search(
        inst in instance(), alpha in 1e-3f64..0.9, mu0 in 0.01f64..0.99,
    ) {
        let fast = best_response(alpha, belief(mu0), &inst).unwrap();
        let slow = best_response_bruteforce(alpha, belief(mu0), &inst).unwrap();
        prop_assert_eq!(fast.participates, slow.participates);
        prop_assert_eq!(fast.n_star, slow.n_star);
        prop_assert!((fast.utility - slow.utility).abs() <= 1e-12 * inst.revenue().max(1.0));
    }

    #[test]
    fn utility_and_participation_monotone_in_belief(
        inst in instance(), alpha in 1e-3f64..0.5, a in 0.01f64..0.99, b in 0.01f64..0.99,
    ) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let l = best_response(alpha, belief(lo), &inst).unwrap();
        let h = best_response(alpha, belief(hi), &inst).unwrap();
        prop_assert!(h.utility >= l.utility - 1e-12 * inst.revenue());
        prop_assert!(h.participates || !l.participates);
    }

    #[test]
    fn pass_moves_with_sample_size_by_side_of_baseline(
        alpha in 1e-3f64..0.5, mu0 in 0.02f64..0.98, mu_b in 0.2f64..0.8, n in 1u64..5000,
    ) {
        let p = |n| pass_probability(alpha, belief(mu0), n, mu_b).unwrap();
        let (now, next) = (p(n), p(n + 1));
        if mu0 > mu_b {
            prop_assert!(next >= now);
        } else if mu0 < mu_b {
            prop_assert!(next <= now);
        }
        prop_assert!((pass_probability(alpha, belief(mu_b), n, mu_b).unwrap() - alpha).abs() < 1e-12);
    }

    #[test]
    fn participation_threshold_non_increasing_in_alpha(
        inst in instance(), a in 1e-3f64..0.5, b in 1e-3f64..0.5,
    ) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let t_lo = participation_threshold(lo, &inst, 1e-6).unwrap();
        let t_hi = participation_threshold(hi, &inst, 1e-6).unwrap();
        prop_assert!(t_hi.mu_tau <= t_lo.mu_tau + 2e-6, "{:?} {:?}", t_lo, t_hi);
    }

    #[test]
    fn critical_alpha_agrees_with_closed_form(
        r in 1.0f64..1e5, share in 1e-3f64..0.9, c in 0.0f64..1.0, mu_b in 0.1f64..0.9,
    ) {
        let c = c * share * r * 1e-3;
        let inst = EconomicInstance::new(r, share * r - c, c, mu_b).unwrap();
        let closed = closed_form(&inst);
        // Beliefs just below the baseline have a larger variance once it is
        // away from 1/2, and with d·|σb'| > 1 the normal approximation lets
        // them pass a one-sample trial with probability above α. They then
        // break even before the closed form does.
        let d = std_normal_quantile(1.0 - closed).unwrap();
        let sigma_b = (mu_b * (1.0 - mu_b)).sqrt();
        prop_assume!(d * (1.0 - 2.0 * mu_b).abs() / (2.0 * sigma_b) < 1.0);
        let a = critical_alpha(&inst, 1e-6).unwrap();
        prop_assert!(a.clamp.is_none());
        prop_assert!((a.alpha_hat - closed).abs() <= 2e-6, "{:?}", a);
    }

    #[test]
    fn binomial_tail_monotone(n in 1u64..400, k in 0u64..400, p in 0.0f64..1.0, q in 0.0f64..1.0) {
        let k = k.min(n);
        let t = |k, p| binomial_tail(n, k, p).unwrap().get();
        prop_assert!(t(k + 1, p) <= t(k, p) + 1e-14);
        let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
        prop_assert!(t(k, hi) >= t(k, lo) - 1e-14);
    }

    #[test]
    fn quantile_inverts_cdf(p in 1e-12f64..(1.0 - 1e-12)) {
        let z = std_normal_quantile(p).unwrap();
        let back = std_normal_cdf(z).unwrap().get();
        prop_assert!((back - p).abs() <= 1e-9 * p.min(1.0 - p).max(1e-3));
    }
}

fn closed_form(inst: &EconomicInstance) -> f64 {
    strategic_testing::threshold::CriticalAlpha::closed_form(inst)
}

#[test]
fn loss_components_converge_under_panel_doubling() {
    for name in preset_names() {
        let c = preset(name).unwrap().unwrap();
        let (inst, prior) = (c.instance.unwrap(), c.prior.unwrap());
        for alpha in [0.001, 0.02, 0.05, 0.1, 0.3] {
            let at = |panels| {
                loss_components(alpha, &inst, &prior, &QuadratureSpec::new(panels).unwrap())
                    .unwrap()
            };
            let (a, b) = (at(2000), at(4000));
            for (x, y) in [
                (a.fp_particip, b.fp_particip),
                (a.fn_particip, b.fn_particip),
                (a.fn_abstain, b.fn_abstain),
            ] {
                assert!((x - y).abs() < 1e-6, "{name} alpha={alpha}: {a:?} vs {b:?}");
            }
        }
    }
}
