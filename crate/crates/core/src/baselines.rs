//! The three comparison placements: popular cache, even cache, and the
//! non-joint combination of the two one-tier optima.

use crate::error::Result;
use crate::extreme_solvers::{usertier_solve, waterfill};
use crate::model::{Placement, Popularity, ScenarioConfig};

/// Cache the most popular contents deterministically: `p = 1` on the first
/// `m` ranks of each tier, 0 elsewhere.
pub fn popular_cache(cfg: &ScenarioConfig) -> Result<Placement> {
    cfg.validate()?;
    let n = cfg.n_contents;
    let head = |m: usize| -> Vec<f64> { (0..n).map(|i| if i < m { 1.0 } else { 0.0 }).collect() };
    Placement::new(head(cfg.m_ue), head(cfg.m_h), cfg)
}

/// Spread each tier's budget uniformly: `p_ue = m_ue/n`, `p_h = m_h/n`.
pub fn even_cache(cfg: &ScenarioConfig) -> Result<Placement> {
    cfg.validate()?;
    Ok(Placement::even(cfg))
}

/// Non-joint baseline with degeneracy flags for the sweep endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct NonJointSolution {
    pub placement: Placement,
    /// User tier fell back to the flagged even placement.
    pub user_degenerate: bool,
    /// Helper tier fell back to the even placement (no helper density,
    /// range, or budget); it cannot affect the objective there.
    pub helper_degenerate: bool,
}

/// Combines the stand-alone optima of the two tiers: water-filling for the
/// helpers, the separable convex solution for the users. The combination is
/// a baseline, not a joint optimum.
pub fn non_joint(cfg: &ScenarioConfig, q: &Popularity) -> Result<NonJointSolution> {
    cfg.validate()?;
    let user = usertier_solve(cfg, q)?;

    let helper_degenerate = cfg.lambda_h == 0.0 || cfg.r_h == 0.0 || cfg.m_h == 0;
    let p_h = if helper_degenerate {
        let n = cfg.n_contents;
        vec![cfg.m_h as f64 / n as f64; n]
    } else {
        waterfill(cfg, q)?.p_h
    };

    Ok(NonJointSolution {
        placement: Placement::new(user.placement.p_ue().to_vec(), p_h, cfg)?,
        user_degenerate: user.degenerate,
        helper_degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::total_offload;

    #[test]
    fn popular_pattern_matches_budgets() {
        let cfg = ScenarioConfig::default();
        let pl = popular_cache(&cfg).unwrap();
        assert_eq!(&pl.p_ue()[..3], &[1.0, 1.0, 0.0]);
        assert_eq!(pl.p_h().iter().filter(|&&p| p == 1.0).count(), 8);
        assert_eq!(pl.p_h()[8], 0.0);
        let sum_ue: f64 = pl.p_ue().iter().sum();
        assert_eq!(sum_ue, cfg.m_ue as f64);
    }

    #[test]
    fn popular_empty_and_full_budgets() {
        let mut cfg = ScenarioConfig {
            m_ue: 0,
            ..ScenarioConfig::default()
        };
        let pl = popular_cache(&cfg).unwrap();
        assert!(pl.p_ue().iter().all(|&p| p == 0.0));
        cfg.m_h = cfg.n_contents;
        let pl = popular_cache(&cfg).unwrap();
        assert!(pl.p_h().iter().all(|&p| p == 1.0));
    }

    #[test]
    fn even_values() {
        let cfg = ScenarioConfig::default();
        let pl = even_cache(&cfg).unwrap();
        assert!(pl.p_ue().iter().all(|&p| (p - 1.0 / 15.0).abs() < 1e-15));
        assert!(pl.p_h().iter().all(|&p| (p - 4.0 / 15.0).abs() < 1e-15));

        let small = ScenarioConfig {
            n_contents: 5,
            m_ue: 1,
            m_h: 3,
            ..ScenarioConfig::default()
        };
        let pl = even_cache(&small).unwrap();
        assert!(pl.p_h().iter().all(|&p| (p - 0.6).abs() < 1e-15));
    }

    #[test]
    fn non_joint_equals_even_for_uniform_popularity() {
        let cfg = ScenarioConfig {
            gamma: 0.0,
            ..ScenarioConfig::default()
        };
        let q = Popularity::zipf(cfg.n_contents, 0.0).unwrap();
        let nj = non_joint(&cfg, &q).unwrap();
        let even = even_cache(&cfg).unwrap();
        for i in 0..cfg.n_contents {
            assert!((nj.placement.p_ue()[i] - even.p_ue()[i]).abs() < 1e-8);
            assert!((nj.placement.p_h()[i] - even.p_h()[i]).abs() < 1e-8);
        }
        assert!(!nj.user_degenerate);
    }

    #[test]
    fn non_joint_survives_missing_helper_tier() {
        let cfg = ScenarioConfig {
            lambda_h: 0.0,
            ..ScenarioConfig::default()
        };
        let q = Popularity::zipf(cfg.n_contents, cfg.gamma).unwrap();
        let nj = non_joint(&cfg, &q).unwrap();
        assert!(nj.helper_degenerate);
        // The helper tier cannot offload anything here, so only the user
        // part of the total matters; it must match the stand-alone solver.
        let user = usertier_solve(&cfg, &q).unwrap();
        let a = total_offload(&cfg, &q, &nj.placement).unwrap().total;
        let b = total_offload(&cfg, &q, &user.placement).unwrap().total;
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn non_joint_budgets_feasible_under_defaults() {
        let cfg = ScenarioConfig::default();
        let q = Popularity::zipf(cfg.n_contents, cfg.gamma).unwrap();
        let nj = non_joint(&cfg, &q).unwrap();
        let sum_h: f64 = nj.placement.p_h().iter().sum();
        assert!((sum_h - cfg.m_h as f64).abs() < 1e-8);
        let sum_ue: f64 = nj.placement.p_ue().iter().sum();
        assert!(sum_ue <= cfg.m_ue as f64 + 1e-9);
    }
}
