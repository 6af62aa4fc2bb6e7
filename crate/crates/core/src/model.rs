//! Domain types and the analytical offloading-probability model.
//!
//! A request for content `i` is offloaded when it is served without the
//! cellular network: from the requester's own cache, from another
//! cache-enabled user within the D2D radius, or from a helper within the
//! helper radius. With helpers and users placed as independent homogeneous
//! Poisson point processes, per-content thinning gives closed forms for every
//! stage. Writing `a = pi * alpha * lambda_ue * r_ue^2` and
//! `c = pi * lambda_h * r_h^2`, the probability that a request for content
//! `i` is offloaded is
//!
//! ```text
//! P_off(i) = 1 - (1 - alpha * p_ue[i]) * exp(-(a * p_ue[i] + c * p_h[i]))
//! ```
//!
//! and the total offloading probability is the popularity-weighted sum over
//! contents. `a` and `c` are the only routes by which the network parameters
//! enter any formula; [`ScenarioConfig::coeffs`] computes them once per run.

use crate::error::{Error, Result};

/// Network, content-library, and cache parameters for one scenario.
///
/// Densities are in nodes per square meter, radii in meters. `alpha` is the
/// fraction of users that are cache-enabled; `m_ue` and `m_h` are the number
/// of whole-content cache slots per user and per helper.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub n_contents: usize,
    pub gamma: f64,
    pub lambda_ue: f64,
    pub lambda_h: f64,
    pub r_ue: f64,
    pub r_h: f64,
    pub alpha: f64,
    pub m_ue: usize,
    pub m_h: usize,
}

impl Default for ScenarioConfig {
    /// The default parameter set used throughout the experiment suite:
    /// 5000 users and 50 helpers in a 500 m disk, D2D radius 15 m, helper
    /// radius 100 m, half the users cache-enabled, 2 user slots, 8 helper
    /// slots, 30 contents with Zipf skewness 1.
    fn default() -> Self {
        let disk = std::f64::consts::PI * 500.0 * 500.0;
        ScenarioConfig {
            n_contents: 30,
            gamma: 1.0,
            lambda_ue: 5000.0 / disk,
            lambda_h: 50.0 / disk,
            r_ue: 15.0,
            r_h: 100.0,
            alpha: 0.5,
            m_ue: 2,
            m_h: 8,
        }
    }
}

/// Precomputed exponent coefficients: `user = pi * alpha * lambda_ue * r_ue^2`
/// and `helper = pi * lambda_h * r_h^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentCoeffs {
    pub user: f64,
    pub helper: f64,
}

impl ScenarioConfig {
    /// Checks the hard invariants. Soft checks live in [`Self::warnings`].
    pub fn validate(&self) -> Result<()> {
        if self.n_contents == 0 {
            return Err(Error::InvalidScenario("n_contents must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.alpha) || !self.alpha.is_finite() {
            return Err(Error::InvalidScenario(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        if self.gamma < 0.0 || !self.gamma.is_finite() {
            return Err(Error::InvalidScenario(format!(
                "gamma must be >= 0, got {}",
                self.gamma
            )));
        }
        for (name, v) in [
            ("lambda_ue", self.lambda_ue),
            ("lambda_h", self.lambda_h),
            ("r_ue", self.r_ue),
            ("r_h", self.r_h),
        ] {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::InvalidScenario(format!(
                    "{name} must be >= 0 and finite, got {v}"
                )));
            }
        }
        if self.m_ue > self.n_contents {
            return Err(Error::BudgetExceedsLibrary {
                budget: self.m_ue,
                n: self.n_contents,
            });
        }
        if self.m_h > self.n_contents {
            return Err(Error::BudgetExceedsLibrary {
                budget: self.m_h,
                n: self.n_contents,
            });
        }
        Ok(())
    }

    /// Non-fatal oddities worth surfacing to a user: currently only the
    /// radius ordering `r_ue < r_h`, which the network design assumes but no
    /// formula requires.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.r_ue >= self.r_h && self.r_h > 0.0 {
            out.push(format!(
                "r_ue = {} is not smaller than r_h = {}; D2D range usually sits below the helper range",
                self.r_ue, self.r_h
            ));
        }
        out
    }

    /// The two exponent coefficients; compute once per run and reuse.
    pub fn coeffs(&self) -> ExponentCoeffs {
        let pi = std::f64::consts::PI;
        ExponentCoeffs {
            user: pi * self.alpha * self.lambda_ue * self.r_ue * self.r_ue,
            helper: pi * self.lambda_h * self.r_h * self.r_h,
        }
    }
}

/// Normalized, nonincreasing content popularity vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Popularity {
    q: Vec<f64>,
}

/// Compensated (Kahan) summation; harmonic-like sums over up to 10^6 terms
/// must not lose the normalization tolerance.
pub(crate) fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

impl Popularity {
    /// Builds a Zipf popularity vector: `q_i` proportional to `1 / i^gamma`
    /// over `n_contents` ranked contents. `gamma = 0` is uniform.
    pub fn zipf(n_contents: usize, gamma: f64) -> Result<Self> {
        if n_contents == 0 {
            return Err(Error::InvalidPopularity("n_contents must be >= 1".into()));
        }
        if gamma < 0.0 || !gamma.is_finite() {
            return Err(Error::InvalidPopularity(format!(
                "gamma must be >= 0, got {gamma}"
            )));
        }
        let weights: Vec<f64> = (1..=n_contents)
            .map(|i| (-gamma * (i as f64).ln()).exp())
            .collect();
        let norm = kahan_sum(weights.iter().copied());
        let q = weights.into_iter().map(|w| w / norm).collect();
        Ok(Popularity { q })
    }

    /// Validates an explicit popularity vector: strictly positive entries,
    /// nonincreasing, summing to one within 1e-12.
    pub fn new(q: Vec<f64>) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::InvalidPopularity("empty vector".into()));
        }
        for (i, &v) in q.iter().enumerate() {
            if v <= 0.0 || !v.is_finite() {
                return Err(Error::InvalidPopularity(format!(
                    "q[{i}] = {v} is not strictly positive"
                )));
            }
            if i > 0 && v > q[i - 1] {
                return Err(Error::InvalidPopularity(format!(
                    "not nonincreasing at index {i}: {} < {v}",
                    q[i - 1]
                )));
            }
        }
        let sum = kahan_sum(q.iter().copied());
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidPopularity(format!(
                "sum is {sum}, off from 1 by {:.3e}",
                (sum - 1.0).abs()
            )));
        }
        Ok(Popularity { q })
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.q
    }
}

const FEAS_TOL: f64 = 1e-9;

/// Paired caching-probability vectors: `p_h[i]` is the proportion of helpers
/// caching content `i`, `p_ue[i]` the proportion of cache-enabled users.
/// Feasibility (box within 1e-9, per-tier budget within 1e-9) is checked at
/// construction; values are stored unclamped so gradients stay consistent.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    p_ue: Vec<f64>,
    p_h: Vec<f64>,
}

impl Placement {
    pub fn new(p_ue: Vec<f64>, p_h: Vec<f64>, cfg: &ScenarioConfig) -> Result<Self> {
        let n = cfg.n_contents;
        if p_ue.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: p_ue.len(),
            });
        }
        if p_h.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: p_h.len(),
            });
        }
        for (tier, v) in [("p_ue", &p_ue), ("p_h", &p_h)] {
            for (i, &x) in v.iter().enumerate() {
                if !x.is_finite() || !(-FEAS_TOL..=1.0 + FEAS_TOL).contains(&x) {
                    return Err(Error::InfeasiblePlacement(format!(
                        "{tier}[{i}] = {x} outside [0, 1]"
                    )));
                }
            }
        }
        let sum_ue = kahan_sum(p_ue.iter().copied());
        if sum_ue > cfg.m_ue as f64 + FEAS_TOL {
            return Err(Error::InfeasiblePlacement(format!(
                "sum(p_ue) = {sum_ue} exceeds user budget {}",
                cfg.m_ue
            )));
        }
        let sum_h = kahan_sum(p_h.iter().copied());
        if sum_h > cfg.m_h as f64 + FEAS_TOL {
            return Err(Error::InfeasiblePlacement(format!(
                "sum(p_h) = {sum_h} exceeds helper budget {}",
                cfg.m_h
            )));
        }
        Ok(Placement { p_ue, p_h })
    }

    /// Uniform placement `p_ue = m_ue / n`, `p_h = m_h / n`.
    pub fn even(cfg: &ScenarioConfig) -> Self {
        let n = cfg.n_contents;
        Placement {
            p_ue: vec![cfg.m_ue as f64 / n as f64; n],
            p_h: vec![cfg.m_h as f64 / n as f64; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.p_ue.len()
    }

    pub fn p_ue(&self) -> &[f64] {
        &self.p_ue
    }

    pub fn p_h(&self) -> &[f64] {
        &self.p_h
    }
}

/// Whether an offload report comes from the closed-form model or from
/// Monte Carlo trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportKind {
    Analytic,
    Empirical,
}

/// Per-content and total offloading probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct OffloadReport {
    pub per_content: Vec<f64>,
    pub total: f64,
    pub kind: ReportKind,
    /// 95% confidence half-width of `total` (empirical reports only).
    pub ci_halfwidth: Option<f64>,
    pub n_trials: Option<u64>,
}

/// Partial derivatives of a scalar function of a placement, one entry per
/// content and tier.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacementGrad {
    pub d_ue: Vec<f64>,
    pub d_h: Vec<f64>,
}

fn check_index(cfg: &ScenarioConfig, pl: &Placement, i: usize) -> Result<()> {
    if pl.dim() != cfg.n_contents {
        return Err(Error::DimensionMismatch {
            expected: cfg.n_contents,
            got: pl.dim(),
        });
    }
    if i >= cfg.n_contents {
        return Err(Error::IndexOutOfRange {
            index: i,
            n: cfg.n_contents,
        });
    }
    Ok(())
}

/// Probability that at least one other cache-enabled user within the D2D
/// radius holds content `i` (index 0-based).
pub fn d2d_offload_prob(cfg: &ScenarioConfig, pl: &Placement, i: usize) -> Result<f64> {
    check_index(cfg, pl, i)?;
    let a = cfg.coeffs().user;
    Ok(1.0 - (-a * pl.p_ue[i]).exp())
}

/// Probability that at least one helper within the helper radius holds
/// content `i`.
pub fn helper_offload_prob(cfg: &ScenarioConfig, pl: &Placement, i: usize) -> Result<f64> {
    check_index(cfg, pl, i)?;
    let c = cfg.coeffs().helper;
    Ok(1.0 - (-c * pl.p_h[i]).exp())
}

/// Offloading probability for content `i` seen by a user without caching
/// ability: at least one nearby user or helper holds the content.
pub fn noncached_offload_prob(cfg: &ScenarioConfig, pl: &Placement, i: usize) -> Result<f64> {
    check_index(cfg, pl, i)?;
    let co = cfg.coeffs();
    Ok(1.0 - (-(co.user * pl.p_ue[i] + co.helper * pl.p_h[i])).exp())
}

/// Offloading probability for content `i` seen by a cache-enabled user:
/// its own cache first, then the network tiers.
pub fn cached_offload_prob(cfg: &ScenarioConfig, pl: &Placement, i: usize) -> Result<f64> {
    let p_nc = noncached_offload_prob(cfg, pl, i)?;
    let u = pl.p_ue[i];
    Ok(u + (1.0 - u) * p_nc)
}

/// Offloading probability for content `i` averaged over the cache-enabled
/// fraction `alpha`.
pub fn offload_per_content(cfg: &ScenarioConfig, pl: &Placement, i: usize) -> Result<f64> {
    check_index(cfg, pl, i)?;
    let co = cfg.coeffs();
    let u = pl.p_ue[i];
    let h = pl.p_h[i];
    Ok(1.0 - (1.0 - cfg.alpha * u) * (-(co.user * u + co.helper * h)).exp())
}

/// Total offloading probability: the popularity-weighted sum of the
/// per-content probabilities. Per-content values are clamped to [0, 1] here
/// (reporting only; the optimizer path never clamps).
pub fn total_offload(
    cfg: &ScenarioConfig,
    q: &Popularity,
    pl: &Placement,
) -> Result<OffloadReport> {
    if q.len() != cfg.n_contents {
        return Err(Error::DimensionMismatch {
            expected: cfg.n_contents,
            got: q.len(),
        });
    }
    let mut per_content = Vec::with_capacity(cfg.n_contents);
    for i in 0..cfg.n_contents {
        per_content.push(offload_per_content(cfg, pl, i)?.clamp(0.0, 1.0));
    }
    let total = kahan_sum(
        q.as_slice()
            .iter()
            .zip(per_content.iter())
            .map(|(qi, pi)| qi * pi),
    );
    Ok(OffloadReport {
        per_content,
        total,
        kind: ReportKind::Analytic,
        ci_halfwidth: None,
        n_trials: None,
    })
}

/// The minimization objective `F(P) = -sum_i q_i * P_off(i)` without the
/// gradient; cheaper when only the value is needed (line searches).
pub fn objective_value(cfg: &ScenarioConfig, q: &Popularity, pl: &Placement) -> Result<f64> {
    if q.len() != cfg.n_contents || pl.dim() != cfg.n_contents {
        return Err(Error::DimensionMismatch {
            expected: cfg.n_contents,
            got: q.len().min(pl.dim()),
        });
    }
    Ok(objective_value_raw(
        cfg.coeffs(),
        cfg.alpha,
        q.as_slice(),
        &pl.p_ue,
        &pl.p_h,
    ))
}

/// Allocation-free objective kernel shared with the solvers.
pub(crate) fn objective_value_raw(
    co: ExponentCoeffs,
    alpha: f64,
    q: &[f64],
    u: &[f64],
    h: &[f64],
) -> f64 {
    kahan_sum((0..q.len()).map(|i| {
        let e = (-(co.user * u[i] + co.helper * h[i])).exp();
        -q[i] * (1.0 - (1.0 - alpha * u[i]) * e)
    }))
}

/// Allocation-free gradient kernel shared with the solvers; writes the
/// partials into the provided buffers.
pub(crate) fn objective_grad_raw(
    co: ExponentCoeffs,
    alpha: f64,
    q: &[f64],
    u: &[f64],
    h: &[f64],
    d_ue: &mut [f64],
    d_h: &mut [f64],
) {
    for i in 0..q.len() {
        let e = (-(co.user * u[i] + co.helper * h[i])).exp();
        d_ue[i] = -q[i] * e * (alpha + co.user * (1.0 - alpha * u[i]));
        d_h[i] = -q[i] * co.helper * (1.0 - alpha * u[i]) * e;
    }
}

/// The minimization objective `F(P) = -sum_i q_i * P_off(i)` and its exact
/// gradient. Each term depends only on the i-th pair, so the gradient is
/// content-separable:
///
/// ```text
/// dF/dp_ue[i] = -q_i * E_i * (alpha + a * (1 - alpha * p_ue[i]))
/// dF/dp_h[i]  = -q_i * c * (1 - alpha * p_ue[i]) * E_i
/// E_i = exp(-(a * p_ue[i] + c * p_h[i]))
/// ```
pub fn objective_and_gradient(
    cfg: &ScenarioConfig,
    q: &Popularity,
    pl: &Placement,
) -> Result<(f64, PlacementGrad)> {
    if q.len() != cfg.n_contents {
        return Err(Error::DimensionMismatch {
            expected: cfg.n_contents,
            got: q.len(),
        });
    }
    if pl.dim() != cfg.n_contents {
        return Err(Error::DimensionMismatch {
            expected: cfg.n_contents,
            got: pl.dim(),
        });
    }
    let co = cfg.coeffs();
    let n = cfg.n_contents;
    let mut d_ue = vec![0.0; n];
    let mut d_h = vec![0.0; n];
    objective_grad_raw(
        co,
        cfg.alpha,
        q.as_slice(),
        &pl.p_ue,
        &pl.p_h,
        &mut d_ue,
        &mut d_h,
    );
    let value = objective_value_raw(co, cfg.alpha, q.as_slice(), &pl.p_ue, &pl.p_h);
    Ok((value, PlacementGrad { d_ue, d_h }))
}
