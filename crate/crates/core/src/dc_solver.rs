//! Joint two-tier placement optimization by difference-of-convex programming.
//!
//! The objective `F(P) = -sum_i q_i * P_off(i)` is non-convex, but adding the
//! separable quadratic
//!
//! ```text
//! H(P) = sum_i q_i * alpha * pi * lambda_h * r_h^2 * (p_ue[i]^2 + p_h[i]^2)
//! ```
//!
//! makes `G = F + H` convex, so `F = G - H` splits into a difference of
//! convex functions. Each outer iteration linearizes `H` at the current
//! iterate and minimizes the convex surrogate
//! `G(P) - <grad H(P_k), P>` over the product of the two capped simplices,
//! here by projected gradient descent with an Armijo backtracking line
//! search. Because the surrogate majorizes `F` up to constants, the true
//! objective never increases along the outer iterates; an increase beyond
//! floating-point slack means the surrogate failed to majorize, in which
//! case the quadratic coefficient is doubled (up to 16x) and the run is
//! restarted rather than silently continuing.

use crate::error::{Error, Result};
use crate::model::{self, Placement, PlacementGrad, Popularity, ScenarioConfig};
use crate::projection::CappedSimplex;

/// Slack allowed on the outer-loop descent check before declaring the
/// surrogate broken.
const MONOTONE_SLACK: f64 = 1e-9;
/// Armijo sufficient-decrease constant.
const ARMIJO_SIGMA: f64 = 1e-4;
/// Hard ceiling for the convexifier scale escalation.
const MAX_CONVEXIFIER_SCALE: f64 = 16.0;

/// Tolerances and iteration caps for one optimization run.
#[derive(Debug, Clone, PartialEq)]
pub struct DcSettings {
    /// Outer stopping tolerance on both the objective delta and the iterate
    /// delta (either one suffices).
    pub epsilon: f64,
    pub max_outer_iters: usize,
    /// Stopping tolerance on the projected-gradient norm of the inner convex
    /// subproblem.
    pub inner_tol: f64,
    pub inner_max_iters: usize,
    /// Multiplier (>= 1) on the quadratic convexifier coefficient.
    pub convexifier_scale: f64,
}

impl Default for DcSettings {
    fn default() -> Self {
        DcSettings {
            epsilon: 1e-6,
            max_outer_iters: 500,
            inner_tol: 1e-8,
            inner_max_iters: 20_000,
            convexifier_scale: 1.0,
        }
    }
}

impl DcSettings {
    pub fn validate(&self) -> Result<()> {
        if self.epsilon <= 0.0 || self.epsilon.is_nan() {
            return Err(Error::InvalidSettings(format!(
                "epsilon must be > 0, got {}",
                self.epsilon
            )));
        }
        if self.inner_tol <= 0.0 || self.inner_tol.is_nan() {
            return Err(Error::InvalidSettings(format!(
                "inner_tol must be > 0, got {}",
                self.inner_tol
            )));
        }
        if self.convexifier_scale < 1.0 || !self.convexifier_scale.is_finite() {
            return Err(Error::InvalidSettings(format!(
                "convexifier_scale must be >= 1, got {}",
                self.convexifier_scale
            )));
        }
        if self.max_outer_iters == 0 || self.inner_max_iters == 0 {
            return Err(Error::InvalidSettings("iteration caps must be >= 1".into()));
        }
        Ok(())
    }
}

/// Why the outer loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    ObjectiveDelta,
    IterateDelta,
    MaxIters,
}

/// Full record of one optimization run. Objective values are nonincreasing
/// along `iterates` (within 1e-9).
#[derive(Debug, Clone)]
pub struct DcTrace {
    pub iterates: Vec<(Placement, f64)>,
    pub converged: bool,
    pub reason: StopReason,
    /// Convexifier scale the successful run used.
    pub effective_scale: f64,
    /// Number of scale-escalation restarts that preceded it.
    pub restarts: u32,
}

impl DcTrace {
    pub fn outer_iterations(&self) -> usize {
        self.iterates.len().saturating_sub(1)
    }

    pub fn final_objective(&self) -> f64 {
        self.iterates.last().map(|(_, f)| *f).unwrap_or(f64::NAN)
    }
}

/// The quadratic convexifier `H` and its gradient at `pl`, scaled by
/// `scale` times the base coefficient `alpha * pi * lambda_h * r_h^2`.
pub fn convexifier(
    cfg: &ScenarioConfig,
    q: &Popularity,
    pl: &Placement,
    scale: f64,
) -> Result<(f64, PlacementGrad)> {
    if q.len() != cfg.n_contents || pl.dim() != cfg.n_contents {
        return Err(Error::DimensionMismatch {
            expected: cfg.n_contents,
            got: q.len().min(pl.dim()),
        });
    }
    let coeff = scale * cfg.alpha * cfg.coeffs().helper;
    let n = cfg.n_contents;
    let mut d_ue = vec![0.0; n];
    let mut d_h = vec![0.0; n];
    let mut value = 0.0;
    for i in 0..n {
        let qi = q.as_slice()[i];
        let u = pl.p_ue()[i];
        let h = pl.p_h()[i];
        value += qi * coeff * (u * u + h * h);
        d_ue[i] = 2.0 * qi * coeff * u;
        d_h[i] = 2.0 * qi * coeff * h;
    }
    Ok((value, PlacementGrad { d_ue, d_h }))
}

/// Norm of the unit-step projected-gradient mapping of `F` itself at `pl`:
/// zero exactly at constrained stationary points.
pub fn projected_gradient_norm(
    cfg: &ScenarioConfig,
    q: &Popularity,
    pl: &Placement,
) -> Result<f64> {
    let (_, grad) = model::objective_and_gradient(cfg, q, pl)?;
    let ue_set = CappedSimplex::new(cfg.n_contents, cfg.m_ue as f64)?;
    let h_set = CappedSimplex::new(cfg.n_contents, cfg.m_h as f64)?;
    let shift =
        |x: &[f64], g: &[f64]| -> Vec<f64> { x.iter().zip(g).map(|(xi, gi)| xi - gi).collect() };
    let moved_u = ue_set.project(&shift(pl.p_ue(), &grad.d_ue))?;
    let moved_h = h_set.project(&shift(pl.p_h(), &grad.d_h))?;
    Ok((dist2(pl.p_ue(), &moved_u) + dist2(pl.p_h(), &moved_h)).sqrt())
}

/// Minimizes `F` over the feasible placements by DC programming.
///
/// Starts from `init` when given (must be feasible for `cfg`), otherwise
/// from the uniform placement `p_ue = m_ue/n`, `p_h = m_h/n`. Stops when the
/// objective delta or the iterate delta between consecutive outer iterates
/// drops to `epsilon`; hitting the outer iteration cap is reported through
/// the trace (`converged = false`), never silently.
pub fn dc_optimize(
    cfg: &ScenarioConfig,
    q: &Popularity,
    settings: &DcSettings,
    init: Option<&Placement>,
) -> Result<(Placement, DcTrace)> {
    cfg.validate()?;
    settings.validate()?;
    if q.len() != cfg.n_contents {
        return Err(Error::DimensionMismatch {
            expected: cfg.n_contents,
            got: q.len(),
        });
    }
    let start = match init {
        // Revalidate against this scenario's budgets.
        Some(p) => Placement::new(p.p_ue().to_vec(), p.p_h().to_vec(), cfg)?,
        None => Placement::even(cfg),
    };

    let mut scale = settings.convexifier_scale;
    let mut restarts = 0;
    loop {
        match run_outer(cfg, q, settings, &start, scale) {
            Ok((placement, mut trace)) => {
                trace.effective_scale = scale;
                trace.restarts = restarts;
                return Ok((placement, trace));
            }
            Err(Error::NonMonotoneDescent { .. }) if scale * 2.0 <= MAX_CONVEXIFIER_SCALE => {
                scale *= 2.0;
                restarts += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

fn run_outer(
    cfg: &ScenarioConfig,
    q: &Popularity,
    settings: &DcSettings,
    start: &Placement,
    scale: f64,
) -> Result<(Placement, DcTrace)> {
    let ue_set = CappedSimplex::new(cfg.n_contents, cfg.m_ue as f64)?;
    let h_set = CappedSimplex::new(cfg.n_contents, cfg.m_h as f64)?;
    let mut current = start.clone();
    let mut f_current = model::objective_value(cfg, q, &current)?;
    let mut iterates = vec![(current.clone(), f_current)];

    // First stopping criterion to fire (objective delta or iterate delta).
    // The objective delta shrinks quadratically in the step near the fixed
    // point, so on its own it can fire while the iterate is still O(sqrt(eps))
    // away; iterations continue until the step itself drops to epsilon, which
    // pins the final projected gradient to O(eps).
    let mut fired: Option<StopReason> = None;

    for k in 0..settings.max_outer_iters {
        let (_, lin) = convexifier(cfg, q, &current, scale)?;
        let next = solve_surrogate(cfg, q, &current, &lin, scale, settings, &ue_set, &h_set)?;
        let f_next = model::objective_value(cfg, q, &next)?;
        if f_next > f_current + MONOTONE_SLACK {
            return Err(Error::NonMonotoneDescent {
                iteration: k,
                increase: f_next - f_current,
                scale,
            });
        }
        let obj_delta = (f_current - f_next).abs();
        let iter_delta =
            (dist2(current.p_ue(), next.p_ue()) + dist2(current.p_h(), next.p_h())).sqrt();
        iterates.push((next.clone(), f_next));
        if fired.is_none() {
            if obj_delta <= settings.epsilon {
                fired = Some(StopReason::ObjectiveDelta);
            } else if iter_delta <= settings.epsilon {
                fired = Some(StopReason::IterateDelta);
            }
        }
        if let Some(reason) = fired {
            if iter_delta <= settings.epsilon {
                let trace = DcTrace {
                    iterates,
                    converged: true,
                    reason,
                    effective_scale: scale,
                    restarts: 0,
                };
                return Ok((next, trace));
            }
        }
        current = next;
        f_current = f_next;
    }
    let converged = fired.is_some();
    let trace = DcTrace {
        iterates,
        converged,
        reason: fired.unwrap_or(StopReason::MaxIters),
        effective_scale: scale,
        restarts: 0,
    };
    Ok((current, trace))
}

/// Surrogate value `G(P) - <lin, P>` (constants dropped) at raw coordinates.
fn surrogate_value_raw(
    co: crate::model::ExponentCoeffs,
    alpha: f64,
    hcoeff: f64,
    q: &[f64],
    u: &[f64],
    h: &[f64],
    lin: &PlacementGrad,
) -> f64 {
    let f = model::objective_value_raw(co, alpha, q, u, h);
    let mut extra = 0.0;
    for i in 0..q.len() {
        extra +=
            hcoeff * q[i] * (u[i] * u[i] + h[i] * h[i]) - lin.d_ue[i] * u[i] - lin.d_h[i] * h[i];
    }
    f + extra
}

#[allow(clippy::too_many_arguments)]
fn surrogate_grad_raw(
    co: crate::model::ExponentCoeffs,
    alpha: f64,
    hcoeff: f64,
    q: &[f64],
    u: &[f64],
    h: &[f64],
    lin: &PlacementGrad,
    gu: &mut [f64],
    gh: &mut [f64],
) {
    model::objective_grad_raw(co, alpha, q, u, h, gu, gh);
    for i in 0..q.len() {
        gu[i] += 2.0 * hcoeff * q[i] * u[i] - lin.d_ue[i];
        gh[i] += 2.0 * hcoeff * q[i] * h[i] - lin.d_h[i];
    }
}

/// Projected gradient descent with Armijo backtracking (halving from step
/// 1.0) on the linearized convex subproblem, warm-started at the current
/// outer iterate. Terminates on the projected-gradient norm.
#[allow(clippy::too_many_arguments)]
fn solve_surrogate(
    cfg: &ScenarioConfig,
    q: &Popularity,
    start: &Placement,
    lin: &PlacementGrad,
    scale: f64,
    settings: &DcSettings,
    ue_set: &CappedSimplex,
    h_set: &CappedSimplex,
) -> Result<Placement> {
    let n = cfg.n_contents;
    let co = cfg.coeffs();
    let alpha = cfg.alpha;
    let hcoeff = scale * alpha * co.helper;
    let qs = q.as_slice();

    let mut u = start.p_ue().to_vec();
    let mut h = start.p_h().to_vec();
    let mut gu = vec![0.0; n];
    let mut gh = vec![0.0; n];
    let mut shift_u = vec![0.0; n];
    let mut shift_h = vec![0.0; n];
    let mut unit_u = vec![0.0; n];
    let mut unit_h = vec![0.0; n];
    let mut trial_u = vec![0.0; n];
    let mut trial_h = vec![0.0; n];

    let mut value = surrogate_value_raw(co, alpha, hcoeff, qs, &u, &h, lin);
    surrogate_grad_raw(co, alpha, hcoeff, qs, &u, &h, lin, &mut gu, &mut gh);

    for _ in 0..settings.inner_max_iters {
        for i in 0..n {
            shift_u[i] = u[i] - gu[i];
            shift_h[i] = h[i] - gh[i];
        }
        ue_set.project_into(&shift_u, &mut unit_u)?;
        h_set.project_into(&shift_h, &mut unit_h)?;
        let pg = (dist2(&u, &unit_u) + dist2(&h, &unit_h)).sqrt();
        if pg <= settings.inner_tol {
            break;
        }

        let mut t = 1.0;
        loop {
            let (tu, th): (&[f64], &[f64]) = if t == 1.0 {
                (&unit_u, &unit_h)
            } else {
                for i in 0..n {
                    shift_u[i] = u[i] - t * gu[i];
                    shift_h[i] = h[i] - t * gh[i];
                }
                ue_set.project_into(&shift_u, &mut trial_u)?;
                h_set.project_into(&shift_h, &mut trial_h)?;
                (&trial_u, &trial_h)
            };
            let trial_value = surrogate_value_raw(co, alpha, hcoeff, qs, tu, th, lin);
            let decrease = dot_diff(&gu, tu, &u) + dot_diff(&gh, th, &h);
            if trial_value <= value + ARMIJO_SIGMA * decrease {
                u.copy_from_slice(tu);
                h.copy_from_slice(th);
                value = trial_value;
                surrogate_grad_raw(co, alpha, hcoeff, qs, &u, &h, lin, &mut gu, &mut gh);
                break;
            }
            t *= 0.5;
            if t < 1e-18 {
                // No acceptable step exists at floating precision.
                return Ok(Placement::new(u, h, cfg).expect("iterate stays feasible"));
            }
        }
    }
    Ok(Placement::new(u, h, cfg).expect("iterate stays feasible"))
}

/// `<g, a - b>` without materializing the difference.
fn dot_diff(g: &[f64], a: &[f64], b: &[f64]) -> f64 {
    g.iter()
        .zip(a.iter().zip(b))
        .map(|(gi, (ai, bi))| gi * (ai - bi))
        .sum()
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zipf_for(cfg: &ScenarioConfig) -> Popularity {
        Popularity::zipf(cfg.n_contents, cfg.gamma).unwrap()
    }

    #[test]
    fn convexifier_zero_placement() {
        let cfg = ScenarioConfig::default();
        let q = zipf_for(&cfg);
        let zero =
            Placement::new(vec![0.0; cfg.n_contents], vec![0.0; cfg.n_contents], &cfg).unwrap();
        let (v, g) = convexifier(&cfg, &q, &zero, 1.0).unwrap();
        assert_eq!(v, 0.0);
        assert!(g.d_ue.iter().chain(g.d_h.iter()).all(|&x| x == 0.0));
    }

    #[test]
    fn convexifier_vanishes_without_cache_enabled_users() {
        let cfg = ScenarioConfig {
            alpha: 0.0,
            ..ScenarioConfig::default()
        };
        let q = zipf_for(&cfg);
        let pl = Placement::even(&cfg);
        let (v, g) = convexifier(&cfg, &q, &pl, 1.0).unwrap();
        assert_eq!(v, 0.0);
        assert!(g.d_ue.iter().chain(g.d_h.iter()).all(|&x| x == 0.0));
    }

    #[test]
    fn convexifier_single_content_reference_value() {
        // Default densities give a helper coefficient of 2, so one fully
        // cached content contributes q_1 * 0.5 * 2 * (1 + 1) = 2 q_1.
        let cfg = ScenarioConfig::default();
        let q = zipf_for(&cfg);
        let mut p_ue = vec![0.0; cfg.n_contents];
        let mut p_h = vec![0.0; cfg.n_contents];
        p_ue[0] = 1.0;
        p_h[0] = 1.0;
        let pl = Placement::new(p_ue, p_h, &cfg).unwrap();
        let (v, _) = convexifier(&cfg, &q, &pl, 1.0).unwrap();
        let expect = 2.0 * q.as_slice()[0];
        assert!((v - expect).abs() < 1e-12, "H = {v}, expected {expect}");
    }

    #[test]
    fn convexifier_gradient_matches_finite_differences() {
        let cfg = ScenarioConfig::default();
        let q = zipf_for(&cfg);
        let n = cfg.n_contents;
        let p_ue: Vec<f64> = (0..n).map(|i| 0.05 * ((i % 2) as f64 + 0.5)).collect();
        let p_h: Vec<f64> = (0..n).map(|i| 0.2 * ((i % 3) as f64 / 3.0 + 0.1)).collect();
        let pl = Placement::new(p_ue.clone(), p_h.clone(), &cfg).unwrap();
        let (_, g) = convexifier(&cfg, &q, &pl, 1.5).unwrap();
        let stepw = 1e-6;
        for i in [0usize, 13, 29] {
            let mut up = p_h.clone();
            let mut dn = p_h.clone();
            up[i] += stepw;
            dn[i] -= stepw;
            let f = |v: Vec<f64>| {
                let p = Placement::new(p_ue.clone(), v, &cfg).unwrap();
                convexifier(&cfg, &q, &p, 1.5).unwrap().0
            };
            let fd = (f(up) - f(dn)) / (2.0 * stepw);
            assert!(
                (fd - g.d_h[i]).abs() < 1e-6 * g.d_h[i].abs().max(1.0),
                "d_h[{i}]: {fd} vs {}",
                g.d_h[i]
            );
        }
    }

    #[test]
    fn slack_budgets_cache_everything() {
        let cfg = ScenarioConfig {
            alpha: 1.0,
            m_ue: 30,
            m_h: 30,
            ..ScenarioConfig::default()
        };
        let q = zipf_for(&cfg);
        let (pl, trace) = dc_optimize(&cfg, &q, &DcSettings::default(), None).unwrap();
        assert!(trace.converged);
        assert!(
            pl.p_ue().iter().all(|&p| (p - 1.0).abs() < 1e-9),
            "{:?}",
            pl.p_ue()
        );
        assert!(pl.p_h().iter().all(|&p| (p - 1.0).abs() < 1e-9));
    }

    #[test]
    fn trace_is_monotone_and_feasible() {
        let cfg = ScenarioConfig::default();
        let q = zipf_for(&cfg);
        let (_, trace) = dc_optimize(&cfg, &q, &DcSettings::default(), None).unwrap();
        assert!(trace.converged, "default run should converge");
        assert!(trace.outer_iterations() >= 1);
        for pair in trace.iterates.windows(2) {
            assert!(
                pair[1].1 <= pair[0].1 + 1e-9,
                "objective rose: {} -> {}",
                pair[0].1,
                pair[1].1
            );
        }
        for (pl, _) in &trace.iterates {
            // Reconstruction re-runs the feasibility checks.
            assert!(Placement::new(pl.p_ue().to_vec(), pl.p_h().to_vec(), &cfg).is_ok());
        }
    }

    #[test]
    fn solution_is_stationary() {
        let cfg = ScenarioConfig::default();
        let q = zipf_for(&cfg);
        let settings = DcSettings::default();
        let (pl, trace) = dc_optimize(&cfg, &q, &settings, None).unwrap();
        assert!(trace.converged);
        let pg = projected_gradient_norm(&cfg, &q, &pl).unwrap();
        assert!(
            pg <= 10.0 * settings.epsilon,
            "projected gradient {pg} above 10 * epsilon"
        );
    }

    #[test]
    fn improves_on_the_uniform_start() {
        let cfg = ScenarioConfig::default();
        let q = zipf_for(&cfg);
        let (pl, trace) = dc_optimize(&cfg, &q, &DcSettings::default(), None).unwrap();
        let even = model::total_offload(&cfg, &q, &Placement::even(&cfg))
            .unwrap()
            .total;
        let got = model::total_offload(&cfg, &q, &pl).unwrap().total;
        assert!(got >= even - 1e-9, "dc {got} below even start {even}");
        assert_eq!(trace.restarts, 0, "surrogate should majorize at scale 1");
    }

    #[test]
    fn rejects_bad_settings_and_foreign_init() {
        let cfg = ScenarioConfig::default();
        let q = zipf_for(&cfg);
        let bad = DcSettings {
            epsilon: 0.0,
            ..DcSettings::default()
        };
        assert!(dc_optimize(&cfg, &q, &bad, None).is_err());

        let roomy = ScenarioConfig {
            m_ue: 30,
            ..ScenarioConfig::default()
        };
        let wide = Placement::new(vec![1.0; 30], vec![0.0; 30], &roomy).unwrap();
        assert!(matches!(
            dc_optimize(&cfg, &q, &DcSettings::default(), Some(&wide)),
            Err(Error::InfeasiblePlacement(_))
        ));
    }
}
