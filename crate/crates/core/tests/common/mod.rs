//! Shared helpers for the integration and acceptance suites: seeded RNG,
//! random feasible placements, and two independent projection oracles.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tiercache_core::projection::CappedSimplex;
use tiercache_core::{Placement, ScenarioConfig};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform box draws projected onto each tier's budget set; typically lands
/// on the budget boundary.
pub fn random_feasible_placement(cfg: &ScenarioConfig, rng: &mut ChaCha8Rng) -> Placement {
    let n = cfg.n_contents;
    let raw_u: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let raw_h: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let p_ue = CappedSimplex::new(n, cfg.m_ue as f64)
        .unwrap()
        .project(&raw_u)
        .unwrap();
    let p_h = CappedSimplex::new(n, cfg.m_h as f64)
        .unwrap()
        .project(&raw_h)
        .unwrap();
    Placement::new(p_ue, p_h, cfg).unwrap()
}

/// Strictly interior feasible placements with enough slack (box and budget)
/// for central-difference probes of step 1e-6.
pub fn random_interior_placement(cfg: &ScenarioConfig, rng: &mut ChaCha8Rng) -> Placement {
    let n = cfg.n_contents;
    let mut draw = |budget: f64| -> Vec<f64> {
        let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..0.95)).collect();
        let sum: f64 = raw.iter().sum();
        let scale = (budget * 0.98 / sum).min(0.98);
        raw.into_iter().map(|x| x * scale).collect()
    };
    let p_ue = draw(cfg.m_ue as f64);
    let p_h = draw(cfg.m_h as f64);
    Placement::new(p_ue, p_h, cfg).unwrap()
}

/// Exact minimizer of `||p - v||^2` over `{0 <= p <= 1, sum p <= budget}` by
/// enumerating every dry/saturated/free pattern and solving the (at most
/// linear) optimality equation on each face. Exponential in the dimension
/// but exact, and independent of the production bisection path.
pub fn face_enumeration_projection(v: &[f64], budget: f64) -> Vec<f64> {
    let d = v.len();
    assert!(d <= 12, "face enumeration is exponential in the dimension");
    let mut best: Option<(f64, Vec<f64>)> = None;
    for code in 0..3usize.pow(d as u32) {
        let mut kind = Vec::with_capacity(d);
        let mut c = code;
        for _ in 0..d {
            kind.push(c % 3); // 0 dry, 1 saturated, 2 free
            c /= 3;
        }
        let free: Vec<usize> = (0..d).filter(|&i| kind[i] == 2).collect();
        let saturated = kind.iter().filter(|&&k| k == 1).count() as f64;
        for tight in [false, true] {
            let mut p = vec![0.0; d];
            for i in 0..d {
                if kind[i] == 1 {
                    p[i] = 1.0;
                }
            }
            if tight {
                if free.is_empty() {
                    continue;
                }
                let free_sum: f64 = free.iter().map(|&i| v[i]).sum();
                let tau = (free_sum + saturated - budget) / free.len() as f64;
                for &i in &free {
                    p[i] = v[i] - tau;
                }
            } else {
                for &i in &free {
                    p[i] = v[i];
                }
            }
            if p.iter().any(|&x| !(-1e-12..=1.0 + 1e-12).contains(&x)) {
                continue;
            }
            let sum: f64 = p.iter().sum();
            if sum > budget + 1e-9 {
                continue;
            }
            let dist: f64 = p.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
            if best.as_ref().is_none_or(|(b0, _)| dist < *b0) {
                best = Some((dist, p));
            }
        }
    }
    best.expect("the origin is always feasible").1
}

/// Brute-force grid scan of the same quadratic (dimensions 1 and 2 only).
pub fn grid_projection(v: &[f64], budget: f64, step: f64) -> Vec<f64> {
    let cells = (1.0 / step).round() as usize;
    let dist = |p: &[f64]| -> f64 { p.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum() };
    match v.len() {
        1 => {
            let mut best = (f64::INFINITY, vec![0.0]);
            for i in 0..=cells {
                let p = [i as f64 * step];
                if p[0] <= budget + 1e-12 {
                    let d = dist(&p);
                    if d < best.0 {
                        best = (d, p.to_vec());
                    }
                }
            }
            best.1
        }
        2 => {
            let mut best = (f64::INFINITY, vec![0.0, 0.0]);
            for i in 0..=cells {
                let x = i as f64 * step;
                if x > budget + 1e-12 {
                    break;
                }
                for j in 0..=cells {
                    let y = j as f64 * step;
                    if x + y > budget + 1e-12 {
                        break;
                    }
                    let p = [x, y];
                    let d = dist(&p);
                    if d < best.0 {
                        best = (d, p.to_vec());
                    }
                }
            }
            best.1
        }
        _ => panic!("grid scan supports dimensions 1 and 2"),
    }
}
