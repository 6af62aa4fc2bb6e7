//! Property-based invariants of the model and the projection machinery.

mod common;

use proptest::prelude::*;
use tiercache_core::model::{
    cached_offload_prob, d2d_offload_prob, helper_offload_prob, noncached_offload_prob,
    offload_per_content, total_offload,
};
use tiercache_core::projection::CappedSimplex;
use tiercache_core::{Placement, Popularity, ScenarioConfig};

fn single_content_cfg(alpha: f64, lambda_ue: f64, lambda_h: f64) -> ScenarioConfig {
    ScenarioConfig {
        n_contents: 1,
        gamma: 0.0,
        lambda_ue,
        lambda_h,
        r_ue: 15.0,
        r_h: 100.0,
        alpha,
        m_ue: 1,
        m_h: 1,
    }
}

fn offload_at(cfg: &ScenarioConfig, u: f64, h: f64) -> f64 {
    let pl = Placement::new(vec![u], vec![h], cfg).unwrap();
    offload_per_content(cfg, &pl, 0).unwrap()
}

fn projection_instance() -> impl Strategy<Value = (usize, f64, Vec<f64>, Vec<f64>)> {
    (1usize..8)
        .prop_flat_map(|dim| {
            (
                Just(dim),
                0.0..=1.0f64,
                prop::collection::vec(-2.0..3.0f64, dim),
                prop::collection::vec(-2.0..3.0f64, dim),
            )
        })
        .prop_map(|(dim, frac, a, b)| (dim, frac * dim as f64, a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn projection_is_feasible_idempotent_nonexpansive(
        (dim, budget, v, w) in projection_instance()
    ) {
        let set = CappedSimplex::new(dim, budget).unwrap();
        let pv = set.project(&v).unwrap();
        let pw = set.project(&w).unwrap();
        prop_assert!(set.contains(&pv, 1e-9), "projection infeasible: {pv:?}");

        let again = set.project(&pv).unwrap();
        for (a, b) in pv.iter().zip(&again) {
            prop_assert!((a - b).abs() <= 1e-9, "not idempotent: {pv:?} vs {again:?}");
        }

        let dist = |a: &[f64], b: &[f64]| -> f64 {
            a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
        };
        prop_assert!(
            dist(&pv, &pw) <= dist(&v, &w) + 1e-9,
            "expansive: |Pv-Pw| {} > |v-w| {}",
            dist(&pv, &pw),
            dist(&v, &w)
        );
    }

    #[test]
    fn offload_probability_bounded_and_monotone(
        alpha in 0.0..=1.0f64,
        lambda_ue in 0.0..0.05f64,
        lambda_h in 0.0..5e-4f64,
        u in 0.0..=1.0f64,
        h in 0.0..=1.0f64,
        du in 0.0..=0.3f64,
        dh in 0.0..=0.3f64,
    ) {
        let cfg = single_content_cfg(alpha, lambda_ue, lambda_h);
        let p = offload_at(&cfg, u, h);
        prop_assert!((0.0..=1.0).contains(&p), "out of range: {p}");
        let up_u = offload_at(&cfg, (u + du).min(1.0), h);
        let up_h = offload_at(&cfg, u, (h + dh).min(1.0));
        prop_assert!(up_u >= p - 1e-12, "not monotone in p_ue: {p} -> {up_u}");
        prop_assert!(up_h >= p - 1e-12, "not monotone in p_h: {p} -> {up_h}");
    }

    #[test]
    fn offload_stage_identities(
        alpha in 0.0..=1.0f64,
        lambda_ue in 0.0..0.05f64,
        lambda_h in 0.0..5e-4f64,
        u in 0.0..=1.0f64,
        h in 0.0..=1.0f64,
    ) {
        let cfg = single_content_cfg(alpha, lambda_ue, lambda_h);
        let pl = Placement::new(vec![u], vec![h], &cfg).unwrap();
        let d2d = d2d_offload_prob(&cfg, &pl, 0).unwrap();
        let helper = helper_offload_prob(&cfg, &pl, 0).unwrap();
        let nc = noncached_offload_prob(&cfg, &pl, 0).unwrap();
        let cached = cached_offload_prob(&cfg, &pl, 0).unwrap();
        let off = offload_per_content(&cfg, &pl, 0).unwrap();
        prop_assert!((nc - (1.0 - (1.0 - d2d) * (1.0 - helper))).abs() <= 1e-15);
        prop_assert!((off - (alpha * cached + (1.0 - alpha) * nc)).abs() <= 1e-15);
    }

    #[test]
    fn zipf_is_normalized_positive_nonincreasing(
        n in 1usize..400,
        gamma in 0.0..3.0f64,
    ) {
        let q = Popularity::zipf(n, gamma).unwrap();
        let sum: f64 = q.as_slice().iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12, "sum off by {:.3e}", sum - 1.0);
        prop_assert!(q.as_slice().iter().all(|&x| x > 0.0));
        prop_assert!(q.as_slice().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn total_offload_stays_in_unit_interval(seed in any::<u64>()) {
        let cfg = ScenarioConfig::default();
        let q = Popularity::zipf(cfg.n_contents, cfg.gamma).unwrap();
        let mut rng = common::rng(seed);
        let pl = common::random_feasible_placement(&cfg, &mut rng);
        let rep = total_offload(&cfg, &q, &pl).unwrap();
        prop_assert!((0.0..=1.0).contains(&rep.total));
        let recombined: f64 = q
            .as_slice()
            .iter()
            .zip(&rep.per_content)
            .map(|(a, b)| a * b)
            .sum();
        prop_assert!((rep.total - recombined).abs() <= 1e-12);
    }
}
