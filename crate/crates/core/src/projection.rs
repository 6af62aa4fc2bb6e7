//! Constraint-set machinery shared by the solvers: Euclidean projection onto
//! a capped simplex `{p : 0 <= p_i <= 1, sum p_i <= budget}` and a monotone
//! scalar bisection root finder.

use crate::error::{Error, Result};

/// Maximum bisection iterations before returning the midpoint unconverged.
const MAX_BISECT_ITERS: u32 = 200;
/// Maximum symmetric bracket doublings before giving up on a sign change.
const MAX_BRACKET_EXPANSIONS: u32 = 60;

/// Result of a bisection search. `converged` is false only when the
/// iteration cap was hit before either stopping rule fired.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bisection {
    pub root: f64,
    pub iterations: u32,
    pub converged: bool,
}

/// Finds a root of a monotone function on `[lo, hi]` by bisection.
///
/// Stops when `|f(x)| <= tol` or the interval width drops to `tol`. If the
/// endpoints do not bracket a sign change the interval is expanded
/// symmetrically (doubling its width, at most 60 times) before failing with
/// [`Error::NoBracket`]. An endpoint that is already an exact root is
/// returned directly, the lower one first.
pub fn bisect(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<Bisection> {
    let (orig_lo, orig_hi) = (lo, hi);
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return Ok(Bisection {
            root: lo,
            iterations: 0,
            converged: true,
        });
    }
    let mut f_hi = f(hi);
    if f_hi == 0.0 {
        return Ok(Bisection {
            root: hi,
            iterations: 0,
            converged: true,
        });
    }

    let mut expansions = 0;
    while f_lo.signum() == f_hi.signum() {
        if expansions >= MAX_BRACKET_EXPANSIONS {
            return Err(Error::NoBracket {
                lo: orig_lo,
                hi: orig_hi,
                expansions,
            });
        }
        let width = (hi - lo).max(f64::MIN_POSITIVE);
        lo -= width;
        hi += width;
        f_lo = f(lo);
        if f_lo == 0.0 {
            return Ok(Bisection {
                root: lo,
                iterations: 0,
                converged: true,
            });
        }
        f_hi = f(hi);
        if f_hi == 0.0 {
            return Ok(Bisection {
                root: hi,
                iterations: 0,
                converged: true,
            });
        }
        expansions += 1;
    }

    let mut iterations = 0;
    let mut mid = 0.5 * (lo + hi);
    while iterations < MAX_BISECT_ITERS {
        mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        iterations += 1;
        if f_mid.abs() <= tol || (hi - lo) <= tol {
            return Ok(Bisection {
                root: mid,
                iterations,
                converged: true,
            });
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(Bisection {
        root: mid,
        iterations,
        converged: false,
    })
}

/// The feasible region of one caching tier: the box `[0, 1]^dim` intersected
/// with the half-space `sum p_i <= budget`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CappedSimplex {
    dim: usize,
    budget: f64,
}

impl CappedSimplex {
    pub fn new(dim: usize, budget: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSettings(
                "capped simplex needs dim >= 1".into(),
            ));
        }
        if !budget.is_finite() || budget < 0.0 || budget > dim as f64 {
            return Err(Error::InvalidSettings(format!(
                "budget must lie in [0, dim]; got {budget} for dim {dim}"
            )));
        }
        Ok(CappedSimplex { dim, budget })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    /// Membership within an absolute tolerance on both box and budget.
    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        v.len() == self.dim
            && v.iter().all(|&x| x >= -tol && x <= 1.0 + tol)
            && v.iter().sum::<f64>() <= self.budget + tol
    }

    /// Euclidean projection onto the set.
    ///
    /// The minimizer has the form `p_i = clamp(v_i - tau, 0, 1)` with
    /// `tau = 0` when the box-clamped point already meets the budget, and
    /// otherwise `tau > 0` solving `sum_i clamp(v_i - tau, 0, 1) = budget`.
    /// `tau` is located by bisection and then polished exactly on the
    /// identified free set so the budget holds to machine precision.
    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; v.len()];
        self.project_into(v, &mut out)?;
        Ok(out)
    }

    /// [`Self::project`] writing into a caller-provided buffer.
    pub fn project_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        if v.len() != self.dim || out.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len().min(out.len()),
            });
        }
        let mut boxed_sum = 0.0;
        for (o, &x) in out.iter_mut().zip(v) {
            *o = x.clamp(0.0, 1.0);
            boxed_sum += *o;
        }
        if boxed_sum <= self.budget {
            return Ok(());
        }

        let shifted_sum = |tau: f64| -> f64 {
            v.iter().map(|&x| (x - tau).clamp(0.0, 1.0)).sum::<f64>() - self.budget
        };
        // tau = 0 oversubscribes (checked above); at max(v) everything is dry.
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut tau = bisect(shifted_sum, 0.0, hi, 1e-10)?.root;

        // Exact polish: with the active sets fixed, the budget equation is
        // linear in tau. Reclassify until stable (at most a few rounds; the
        // classification is monotone in tau).
        for _ in 0..8 {
            let mut free = 0usize;
            let mut free_sum = 0.0;
            let mut saturated = 0usize;
            for &x in v {
                let moved = x - tau;
                if moved >= 1.0 {
                    saturated += 1;
                } else if moved > 0.0 {
                    free += 1;
                    free_sum += x;
                }
            }
            if free == 0 {
                break;
            }
            let next = (free_sum + saturated as f64 - self.budget) / free as f64;
            if (next - tau).abs() <= f64::EPSILON * tau.abs().max(1.0) {
                tau = next;
                break;
            }
            tau = next;
        }
        if tau < 0.0 {
            tau = 0.0;
        }
        for (o, &x) in out.iter_mut().zip(v) {
            *o = (x - tau).clamp(0.0, 1.0);
        }
        Ok(())
    }
}
