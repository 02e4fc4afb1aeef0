//! Global minimisation of the ratio over point pairs.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ratio_at, RatioSample};
use crate::error::{domain, Result};
use crate::manifolds::{ManifoldSpec, Point, SpectralCutoff, SPHERE_RADIUS};
use crate::specfun::{golden_section, near_diagonal_limit};

/// Where the global infimum was attained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// The analytic `d_g -> 0` limit candidate.
    NearDiagonal,
    /// A grid pair with `d_g` inside the bulk window.
    Bulk,
    /// A grid pair beyond the bulk window.
    FarField,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::NearDiagonal => "near_diagonal",
            Self::Bulk => "bulk",
            Self::FarField => "far_field",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Grid spacing in geodesic units; `None` picks `min(0.5 / lambda, 1e-3)`.
    pub grid_spacing: Option<f64>,
    /// Number of best grid cells refined by golden-section search.
    pub refine_cells: usize,
    /// Refinement tolerance in coordinate units.
    pub refine_tol: f64,
    /// Pairs with `lambda d_g` below this are left to the analytic near-diagonal candidate.
    pub near_cut: f64,
    /// Largest `d_g` still reported as [`Regime::Bulk`].
    pub bulk_window: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { grid_spacing: None, refine_cells: 10, refine_tol: 1e-8, near_cut: 0.5, bulk_window: 0.2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalRadiusEstimate {
    pub lambda: f64,
    pub r_lambda: f64,
    /// Minimising pair; `None` when the analytic near-diagonal candidate wins.
    pub argmin: Option<RatioSample>,
    pub regime: Regime,
    pub search_evals: usize,
}

impl CriticalRadiusEstimate {
    /// Geodesic distance of the minimising pair (0 for the near-diagonal candidate).
    pub fn argmin_dg(&self) -> f64 {
        self.argmin.map_or(0.0, |s| s.geodesic)
    }
}

/// Search parameters: torus separation vector with `y = 0`, or the sphere angle with `y` at the pole.
fn pair(spec: ManifoldSpec, params: &[f64]) -> (Point, Point) {
    match spec {
        ManifoldSpec::FlatTorus { dim } => {
            let x = Point::torus_wrapped(&params[..dim]).expect("finite parameters");
            let y = Point::new(&vec![0.0; dim]).expect("origin");
            (x, y)
        }
        ManifoldSpec::Sphere2 => {
            let (s, c) = params[0].sin_cos();
            let x = Point::on_sphere([s, 0.0, c]).expect("unit vector");
            (x, Point::new(&[0.0, 0.0, 1.0]).expect("pole"))
        }
    }
}

/// Torus separations `0 <= t_1 <= ... <= t_d <= 1/2`; the cubic lattice ball is invariant
/// under coordinate sign changes and permutations, so this wedge covers every pair.
fn torus_grid(dim: usize, m: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    match dim {
        1 => out.extend((0..=m).map(|i| [i, 0, 0])),
        2 => {
            for i in 0..=m {
                out.extend((i..=m).map(|j| [i, j, 0]));
            }
        }
        _ => {
            for i in 0..=m {
                for j in i..=m {
                    out.extend((j..=m).map(|l| [i, j, l]));
                }
            }
        }
    }
    out
}

struct Candidate {
    ratio: f64,
    dg: f64,
    params: [f64; 3],
}

/// Infimum of the ratio over all pairs: grid scan, golden-section refinement of the best
/// cells, and the analytic near-diagonal limit as an extra candidate.
pub fn critical_radius(
    spec: ManifoldSpec,
    cutoff: &SpectralCutoff,
    cfg: &SearchConfig,
) -> Result<CriticalRadiusEstimate> {
    if cutoff.spec() != spec {
        return domain(format!("cutoff built for {:?}, used with {:?}", cutoff.spec(), spec));
    }
    let d = spec.dim();
    if cutoff.k_lambda() < 2 * d + 3 {
        return domain(format!("k_lambda = {} is below 2d + 3 = {}", cutoff.k_lambda(), 2 * d + 3));
    }
    if cfg.refine_tol <= 0.0 || cfg.near_cut < 0.0 {
        return domain("refine_tol must be positive and near_cut non-negative");
    }
    let lambda = cutoff.lambda();
    let h = match cfg.grid_spacing {
        Some(h) if h > 0.0 && h.is_finite() => h,
        Some(h) => return domain(format!("grid spacing must be positive, got {h}")),
        None => (0.5 / lambda).min(1e-3),
    };
    let near = cfg.near_cut / lambda;
    let evals = AtomicUsize::new(0);

    let eval = |params: &[f64; 3]| -> Option<(f64, f64)> {
        let (x, y) = pair(spec, params);
        evals.fetch_add(1, Ordering::Relaxed);
        match ratio_at(spec, cutoff, &x, &y) {
            Ok(s) if s.geodesic >= near => Some((s.ratio, s.geodesic)),
            _ => None,
        }
    };

    let (points, step): (Vec<[f64; 3]>, f64) = if spec.is_torus() {
        let m = (0.5 / h).ceil() as usize;
        let v = |i: usize| 0.5 * i as f64 / m as f64;
        let pts = torus_grid(d, m).into_iter().map(|ix| [v(ix[0]), v(ix[1]), v(ix[2])]).collect();
        (pts, 0.5 / m as f64)
    } else {
        let span = std::f64::consts::PI;
        let m = (span * SPHERE_RADIUS / h).ceil() as usize;
        ((1..=m).map(|i| [span * i as f64 / m as f64, 0.0, 0.0]).collect(), span / m as f64)
    };

    let scanned: Vec<Option<(f64, f64)>> = points.par_iter().map(&eval).collect();
    let mut order: Vec<usize> = (0..points.len()).filter(|&i| scanned[i].is_some()).collect();
    order.sort_by(|&a, &b| {
        let (ra, da) = scanned[a].unwrap();
        let (rb, db) = scanned[b].unwrap();
        ra.total_cmp(&rb).then(da.total_cmp(&db)).then(a.cmp(&b))
    });
    let n_params = if spec.is_torus() { d } else { 1 };
    let tol = cfg.refine_tol * if spec.is_torus() { 1.0 } else { 1.0 / SPHERE_RADIUS };
    let objective = |p: &[f64; 3]| eval(p).map_or(f64::INFINITY, |r| r.0);

    let refined: Vec<Candidate> = order
        .iter()
        .take(cfg.refine_cells)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&&i| {
            let start = points[i];
            let mut p = start;
            let mut best = scanned[i].unwrap().0;
            for _ in 0..40 {
                let before = p;
                for c in 0..n_params {
                    let (lo, hi) = (p[c] - step, p[c] + step);
                    let (arg, val) = golden_section(lo, hi, tol, |v| {
                        let mut q = p;
                        q[c] = v;
                        objective(&q)
                    });
                    if val < best {
                        best = val;
                        p[c] = arg;
                    }
                }
                let moved = (0..n_params).map(|c| (p[c] - before[c]).abs()).fold(0.0, f64::max);
                if n_params == 1 || moved < tol {
                    break;
                }
            }
            let (_, dg) = eval(&p).unwrap_or((best, 0.0));
            Candidate { ratio: best, dg, params: p }
        })
        .collect();

    let mut cands: Vec<Candidate> = refined;
    if let Some(&i) = order.first() {
        let (ratio, dg) = scanned[i].unwrap();
        cands.push(Candidate { ratio, dg, params: points[i] });
    }
    // Ties within 1e-9 go to the smallest d_g; the analytic candidate sits at d_g = 0.
    let analytic = near_diagonal_limit(d);
    let min = cands.iter().map(|c| c.ratio).fold(analytic, f64::min);
    let winner = cands
        .iter()
        .filter(|c| c.ratio <= min + 1e-9)
        .min_by(|a, b| a.dg.total_cmp(&b.dg).then(a.ratio.total_cmp(&b.ratio)));
    let (r_lambda, argmin, regime) = match winner {
        Some(c) if analytic > min + 1e-9 => {
            let (x, y) = pair(spec, &c.params);
            let sample = ratio_at(spec, cutoff, &x, &y)?;
            let regime = if sample.geodesic <= cfg.bulk_window { Regime::Bulk } else { Regime::FarField };
            (sample.ratio, Some(sample), regime)
        }
        _ => (analytic, None, Regime::NearDiagonal),
    };
    Ok(CriticalRadiusEstimate {
        lambda,
        r_lambda,
        argmin,
        regime,
        search_evals: evals.into_inner(),
    })
}
