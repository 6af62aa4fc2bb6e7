//! Monte Carlo validation of the analytical offloading model.
//!
//! Helpers and users are drawn as independent homogeneous Poisson point
//! processes in a disk around a reference user at the origin, caches are
//! realized from a placement, and the content access protocol is executed:
//! own cache first, then any cache-enabled user within the D2D radius, then
//! any helper within the helper radius, else the cellular network.
//!
//! Only nodes inside the origin's D2D and helper disks can influence the
//! outcome, so the point processes are sampled restricted to those disks
//! (a Poisson process restricted to a subregion is again Poisson). The
//! configured region must still cover the full helper disk so neither disk
//! is clipped.
//!
//! Each trial consumes its own deterministic RNG substream derived from
//! `(rng_seed, trial index)`, so reports are reproducible bit for bit and
//! trials could be sharded freely.

use crate::error::{Error, Result};
use crate::model::{OffloadReport, Placement, Popularity, ReportKind, ScenarioConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

/// How fractional caching probabilities are realized in actual nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheMode {
    /// Every node caches content `i` independently with probability `p_i`.
    /// Per-content caches then form exact Poisson thinnings — the assumption
    /// behind the closed forms — at the cost of a random per-node cache size.
    Independent,
    /// Systematic (Madow) sampling with inclusion probabilities `p_i`,
    /// padded by a slack pseudo-content up to the next integer: marginals
    /// stay exact and no node ever exceeds its slot count.
    CapacityExact,
}

/// Geometry, trial count, seed, and cache realization mode.
#[derive(Debug, Clone, PartialEq)]
pub struct SimSettings {
    pub region_radius: f64,
    pub n_trials: u64,
    pub rng_seed: u64,
    pub cache_mode: CacheMode,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings {
            region_radius: 500.0,
            n_trials: 100_000,
            rng_seed: 42,
            cache_mode: CacheMode::Independent,
        }
    }
}

impl SimSettings {
    pub fn validate(&self, cfg: &ScenarioConfig) -> Result<()> {
        if self.region_radius < cfg.r_h {
            return Err(Error::InvalidSimSettings(format!(
                "region_radius {} clips the helper disk of radius {}",
                self.region_radius, cfg.r_h
            )));
        }
        if self.n_trials == 0 {
            return Err(Error::InvalidSimSettings("n_trials must be >= 1".into()));
        }
        Ok(())
    }
}

/// How a single request was resolved, in protocol precedence order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolution {
    SelfCache,
    D2d,
    Helper,
    Cellular,
}

/// One simulated request: the content drawn and how it was served.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub content: usize,
    pub resolution: Resolution,
}

/// Raw hit flags of one trial; the public outcome applies the precedence.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TrialRecord {
    pub content: usize,
    pub self_hit: bool,
    pub d2d_hit: bool,
    pub helper_hit: bool,
}

impl TrialRecord {
    pub(crate) fn resolution(&self) -> Resolution {
        if self.self_hit {
            Resolution::SelfCache
        } else if self.d2d_hit {
            Resolution::D2d
        } else if self.helper_hit {
            Resolution::Helper
        } else {
            Resolution::Cellular
        }
    }
}

/// Samples a homogeneous Poisson point process on a disk centered at the
/// origin: the count is Poisson with mean `density * pi * radius^2`, and
/// positions are independent and uniform over the disk.
pub fn sample_ppp(density: f64, radius: f64, rng: &mut impl Rng) -> Vec<[f64; 2]> {
    let mean = density * std::f64::consts::PI * radius * radius;
    if mean <= 0.0 {
        return Vec::new();
    }
    let count = Poisson::new(mean).expect("mean is positive").sample(rng) as usize;
    (0..count)
        .map(|_| {
            let r = radius * rng.gen::<f64>().sqrt();
            let theta = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
            [r * theta.cos(), r * theta.sin()]
        })
        .collect()
}

/// Realizes per-node content sets from a caching-probability vector.
///
/// Returns one ascending index list per node. `slots` is only binding in
/// [`CacheMode::CapacityExact`], which also rejects `sum(p) > slots`.
pub fn assign_caches(
    nodes: usize,
    placement: &[f64],
    slots: usize,
    mode: CacheMode,
    rng: &mut impl Rng,
) -> Result<Vec<Vec<u32>>> {
    let n = placement.len();
    match mode {
        CacheMode::Independent => Ok((0..nodes)
            .map(|_| {
                (0..n)
                    .filter_map(|i| {
                        if rng.gen::<f64>() < placement[i] {
                            Some(i as u32)
                        } else {
                            None
                        }
                    })
                    .collect()
            })
            .collect()),
        CacheMode::CapacityExact => {
            let sum: f64 = placement.iter().sum();
            if sum > slots as f64 + 1e-9 {
                return Err(Error::CapacityExceeded { sum, slots });
            }
            // Tiny floating overshoot of the budget would let a point slip
            // past the slot count; rescale it away instead.
            let scale = if sum > slots as f64 {
                slots as f64 / sum
            } else {
                1.0
            };
            let mut cum = Vec::with_capacity(n + 1);
            cum.push(0.0);
            let mut acc = 0.0;
            for &p in placement {
                acc += p * scale;
                cum.push(acc);
            }
            Ok((0..nodes)
                .map(|_| {
                    let offset: f64 = rng.gen();
                    let mut set = Vec::new();
                    for i in 0..n {
                        // Select content i when a sample point `offset + k`
                        // lands in its cumulative interval; intervals are at
                        // most 1 long, so at most one point can.
                        let k = (cum[i] - offset).ceil();
                        if offset + k < cum[i + 1] {
                            set.push(i as u32);
                        }
                    }
                    set
                })
                .collect())
        }
    }
}

fn draw_content(prefix: &[f64], u: f64) -> usize {
    let idx = prefix.partition_point(|&c| c <= u);
    idx.min(prefix.len() - 1)
}

fn run_trial(
    cfg: &ScenarioConfig,
    prefix: &[f64],
    pl: &Placement,
    settings: &SimSettings,
    trial_index: u64,
) -> Result<TrialRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(settings.rng_seed);
    rng.set_stream(trial_index);

    let content = draw_content(prefix, rng.gen::<f64>());
    let target = content as u32;

    let ref_enabled = rng.gen::<f64>() < cfg.alpha;
    let self_hit = if ref_enabled {
        let cache = assign_caches(1, pl.p_ue(), cfg.m_ue, settings.cache_mode, &mut rng)?;
        cache[0].binary_search(&target).is_ok()
    } else {
        false
    };

    // The reference user is excluded from its own D2D candidate set; other
    // users are a fresh process.
    let mut d2d_hit = false;
    let d2d_radius = cfg.r_ue.min(settings.region_radius);
    for point in sample_ppp(cfg.lambda_ue, d2d_radius, &mut rng) {
        let enabled = rng.gen::<f64>() < cfg.alpha;
        if !enabled {
            continue;
        }
        let cache = assign_caches(1, pl.p_ue(), cfg.m_ue, settings.cache_mode, &mut rng)?;
        let dist = (point[0] * point[0] + point[1] * point[1]).sqrt();
        if dist <= cfg.r_ue && cache[0].binary_search(&target).is_ok() {
            d2d_hit = true;
        }
    }

    let mut helper_hit = false;
    let helper_radius = cfg.r_h.min(settings.region_radius);
    for point in sample_ppp(cfg.lambda_h, helper_radius, &mut rng) {
        let cache = assign_caches(1, pl.p_h(), cfg.m_h, settings.cache_mode, &mut rng)?;
        let dist = (point[0] * point[0] + point[1] * point[1]).sqrt();
        if dist <= cfg.r_h && cache[0].binary_search(&target).is_ok() {
            helper_hit = true;
        }
    }

    Ok(TrialRecord {
        content,
        self_hit,
        d2d_hit,
        helper_hit,
    })
}

fn popularity_prefix(q: &Popularity) -> Vec<f64> {
    let mut acc = 0.0;
    q.as_slice()
        .iter()
        .map(|&p| {
            acc += p;
            acc
        })
        .collect()
}

/// Replays a single trial deterministically.
pub fn trial_outcome(
    cfg: &ScenarioConfig,
    q: &Popularity,
    pl: &Placement,
    settings: &SimSettings,
    trial_index: u64,
) -> Result<TrialOutcome> {
    cfg.validate()?;
    settings.validate(cfg)?;
    let prefix = popularity_prefix(q);
    let record = run_trial(cfg, &prefix, pl, settings, trial_index)?;
    Ok(TrialOutcome {
        content: record.content,
        resolution: record.resolution(),
    })
}

/// Estimates per-content and total offloading probabilities empirically.
///
/// `per_content[i]` is the offloaded fraction among trials that requested
/// content `i` (zero when it was never requested); `total` is the offloaded
/// fraction over all trials. The 95% half-width uses the normal
/// approximation with a half-count continuity floor.
pub fn simulate_offloading(
    cfg: &ScenarioConfig,
    q: &Popularity,
    pl: &Placement,
    settings: &SimSettings,
) -> Result<OffloadReport> {
    cfg.validate()?;
    settings.validate(cfg)?;
    if q.len() != cfg.n_contents || pl.dim() != cfg.n_contents {
        return Err(Error::DimensionMismatch {
            expected: cfg.n_contents,
            got: q.len().min(pl.dim()),
        });
    }
    let prefix = popularity_prefix(q);
    let n = cfg.n_contents;
    let mut requests = vec![0u64; n];
    let mut offloads = vec![0u64; n];
    let mut offloaded_total = 0u64;
    for t in 0..settings.n_trials {
        let record = run_trial(cfg, &prefix, pl, settings, t)?;
        requests[record.content] += 1;
        if record.resolution() != Resolution::Cellular {
            offloads[record.content] += 1;
            offloaded_total += 1;
        }
    }
    let per_content = (0..n)
        .map(|i| {
            if requests[i] == 0 {
                0.0
            } else {
                offloads[i] as f64 / requests[i] as f64
            }
        })
        .collect();
    let trials = settings.n_trials as f64;
    let total = offloaded_total as f64 / trials;
    let half = (1.96 * (total * (1.0 - total) / trials).sqrt()).max(1.96 * 0.5 / trials);
    Ok(OffloadReport {
        per_content,
        total,
        kind: ReportKind::Empirical,
        ci_halfwidth: Some(half),
        n_trials: Some(settings.n_trials),
    })
}
