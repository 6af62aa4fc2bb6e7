//! Solvers for the two one-tier extreme cases.
//!
//! With no cache-enabled users (`alpha = 0`) the placement problem reduces to
//! the helper tier alone and is convex; its optimum is a water-filling
//! allocation with a common water level `beta`:
//!
//! ```text
//! p_h[i] = min(max(beta + ln(q_i) / c, 0), 1),    c = pi * lambda_h * r_h^2
//! ```
//!
//! with `beta` chosen by bisection so the budget holds with equality.
//!
//! With no caching helpers (`lambda_h * m_h = 0`) the user-tier problem is
//! also convex and separable. Its KKT conditions equate the marginal gain
//! `psi_i(p) = q_i * exp(-b p) * (alpha + b (1 - alpha p))`,
//! `b = pi * alpha * lambda_ue * r_ue^2`, across all interior coordinates, so
//! the optimum is found by an outer bisection on the multiplier and an inner
//! bisection per coordinate (each `psi_i` is strictly decreasing).

use crate::error::{Error, Result};
use crate::model::{Placement, Popularity, ScenarioConfig};
use crate::projection::bisect;

/// Water-filling solution for the helper tier.
#[derive(Debug, Clone, PartialEq)]
pub struct WaterfillSolution {
    pub p_h: Vec<f64>,
    /// Common water level.
    pub beta: f64,
    /// Indices with `p_h = 1` (a prefix, since popularity is nonincreasing).
    pub saturated: Vec<usize>,
    /// Indices with `p_h = 0` (a suffix).
    pub dry: Vec<usize>,
}

/// Optimal helper-tier placement when users have no caching ability.
///
/// Requires `lambda_h > 0`, `r_h > 0`, and `1 <= m_h <= n`. The returned
/// vector satisfies the water-filling formula exactly for the returned
/// `beta`, and sums to `m_h` with equality.
pub fn waterfill(cfg: &ScenarioConfig, q: &Popularity) -> Result<WaterfillSolution> {
    cfg.validate()?;
    if q.len() != cfg.n_contents {
        return Err(Error::DimensionMismatch {
            expected: cfg.n_contents,
            got: q.len(),
        });
    }
    if cfg.lambda_h == 0.0 || cfg.r_h == 0.0 {
        return Err(Error::DegenerateHelperTier(
            "lambda_h and r_h must be positive; no helper can serve anyone".into(),
        ));
    }
    if cfg.m_h == 0 {
        return Err(Error::DegenerateHelperTier(
            "m_h = 0 leaves nothing to allocate".into(),
        ));
    }
    let n = cfg.n_contents;
    let m = cfg.m_h as f64;
    let c = cfg.coeffs().helper;
    let qs = q.as_slice();
    let level = |beta: f64, qi: f64| (beta + qi.ln() / c).clamp(0.0, 1.0);
    let fill = |beta: f64| -> f64 { qs.iter().map(|&qi| level(beta, qi)).sum::<f64>() - m };

    // Everything dry at -ln(q_1)/c, everything saturated at 1 - ln(q_n)/c:
    // an exact bracket since 1 <= m_h <= n.
    let lo = -qs[0].ln() / c;
    let hi = 1.0 - qs[n - 1].ln() / c;
    let mut beta = bisect(fill, lo, hi, 1e-12)?.root;

    // Polish: with the sets fixed the budget equation is linear in beta, so
    // one exact solve per classification round pins sum(p) = m_h to machine
    // precision. Reclassify until stable.
    for _ in 0..8 {
        let mut saturated = 0usize;
        let mut interior_logs = 0.0;
        let mut interior = 0usize;
        for &qi in qs {
            let raw = beta + qi.ln() / c;
            if raw >= 1.0 {
                saturated += 1;
            } else if raw > 0.0 {
                interior += 1;
                interior_logs += qi.ln() / c;
            }
        }
        if interior == 0 {
            break;
        }
        let next = (m - saturated as f64 - interior_logs) / interior as f64;
        if (next - beta).abs() <= f64::EPSILON * beta.abs().max(1.0) {
            beta = next;
            break;
        }
        beta = next;
    }

    let p_h: Vec<f64> = qs.iter().map(|&qi| level(beta, qi)).collect();
    let saturated = (0..n).filter(|&i| p_h[i] >= 1.0).collect();
    let dry = (0..n).filter(|&i| p_h[i] <= 0.0).collect();
    Ok(WaterfillSolution {
        p_h,
        beta,
        saturated,
        dry,
    })
}

/// User-tier placement with the multiplier that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct UserTierSolution {
    /// `p_h` is identically zero.
    pub placement: Placement,
    /// Dual multiplier of the cache budget (0 when the budget is slack).
    pub mu: f64,
    /// Set when the objective cannot rank placements (`alpha = 0` or no user
    /// density/range): an even placement is returned instead of an optimum.
    pub degenerate: bool,
}

/// Marginal offload gain of raising `p` for one content at weight `q`.
fn marginal_gain(q: f64, alpha: f64, b: f64, p: f64) -> f64 {
    q * (-b * p).exp() * (alpha + b * (1.0 - alpha * p))
}

/// Optimal user-tier placement when no caching helper participates.
///
/// Degenerate inputs (`alpha = 0`, `lambda_ue = 0`, `r_ue = 0`, or
/// `m_ue = 0`) return an even placement flagged `degenerate` instead of an
/// error so parameter sweeps can cross the endpoints.
pub fn usertier_solve(cfg: &ScenarioConfig, q: &Popularity) -> Result<UserTierSolution> {
    cfg.validate()?;
    if q.len() != cfg.n_contents {
        return Err(Error::DimensionMismatch {
            expected: cfg.n_contents,
            got: q.len(),
        });
    }
    let n = cfg.n_contents;
    let zeros = vec![0.0; n];
    let b = cfg.coeffs().user;
    if cfg.alpha == 0.0 || b == 0.0 || cfg.m_ue == 0 {
        let even = vec![cfg.m_ue as f64 / n as f64; n];
        return Ok(UserTierSolution {
            placement: Placement::new(even, zeros, cfg)?,
            mu: 0.0,
            degenerate: true,
        });
    }

    let alpha = cfg.alpha;
    let qs = q.as_slice();
    let m = cfg.m_ue as f64;

    // The objective improves with every coordinate, so the unconstrained
    // box solution is all ones; it fits the budget only when m_ue = n.
    if cfg.m_ue == n {
        return Ok(UserTierSolution {
            placement: Placement::new(vec![1.0; n], zeros, cfg)?,
            mu: 0.0,
            degenerate: false,
        });
    }

    let coordinate = |mu: f64, qi: f64| -> f64 {
        if mu >= marginal_gain(qi, alpha, b, 0.0) {
            0.0
        } else if mu <= marginal_gain(qi, alpha, b, 1.0) {
            1.0
        } else {
            // psi is strictly decreasing on [0, 1]; tolerance well below the
            // 1e-7 stationarity band checked downstream.
            bisect(|p| marginal_gain(qi, alpha, b, p) - mu, 0.0, 1.0, 1e-13)
                .map(|r| r.root)
                .unwrap_or(0.0)
        }
    };
    let spend = |mu: f64| -> f64 { qs.iter().map(|&qi| coordinate(mu, qi)).sum::<f64>() - m };

    // spend is nonincreasing in mu; at mu = 0 it is n - m > 0 and at the
    // largest zero-gain threshold it is -m < 0.
    let mu_hi = marginal_gain(qs[0], alpha, b, 0.0);
    let mu = bisect(spend, 0.0, mu_hi, 1e-13)?.root;
    let p_ue: Vec<f64> = qs.iter().map(|&qi| coordinate(mu, qi)).collect();
    Ok(UserTierSolution {
        placement: Placement::new(p_ue, zeros, cfg)?,
        mu,
        degenerate: false,
    })
}
