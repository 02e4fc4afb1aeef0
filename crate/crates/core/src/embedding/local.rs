//! Infimum of the ratio over pairs at separations below `(lambda log lambda)^(-1)`.

use std::f64::consts::{FRAC_PI_2, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ratio_at, MIN_SCALED_SEPARATION};
use crate::error::{domain, Error, Result};
use crate::manifolds::{ManifoldSpec, Point, SpectralCutoff, SPHERE_RADIUS};
use crate::specfun::golden_section;

/// Number of log-spaced separation scales scanned.
pub const LOCAL_SCALES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalRatioInf {
    pub lambda: f64,
    pub value: f64,
    pub argmin_dg: f64,
    /// Upper end `(lambda log lambda)^(-1)` of the separation window.
    pub max_dg: f64,
    /// Scales skipped because every pair there was degenerate.
    pub degenerate_scales: usize,
}

/// Unit direction from angles: none on `T^1`, one angle on `T^2`, two on `T^3`.
fn direction(dim: usize, angles: &[f64; 2]) -> [f64; 3] {
    match dim {
        1 => [1.0, 0.0, 0.0],
        2 => [angles[0].cos(), angles[0].sin(), 0.0],
        _ => {
            let (st, ct) = angles[0].sin_cos();
            let (sp, cp) = angles[1].sin_cos();
            [st * cp, st * sp, ct]
        }
    }
}

fn ratio_along(spec: ManifoldSpec, cutoff: &SpectralCutoff, dist: f64, angles: &[f64; 2]) -> Result<f64> {
    let (x, y) = match spec {
        ManifoldSpec::FlatTorus { dim } => {
            let e = direction(dim, angles);
            let c: Vec<f64> = (0..dim).map(|i| dist * e[i]).collect();
            (Point::torus_wrapped(&c)?, Point::new(&vec![0.0; dim])?)
        }
        ManifoldSpec::Sphere2 => {
            let (s, c) = (dist / SPHERE_RADIUS).sin_cos();
            (Point::on_sphere([s, 0.0, c])?, Point::new(&[0.0, 0.0, 1.0])?)
        }
    };
    ratio_at(spec, cutoff, &x, &y).map(|s| s.ratio)
}

fn or_inf(r: Result<f64>) -> f64 {
    r.unwrap_or(f64::INFINITY)
}

/// Minimises over directions at fixed separation. The lattice is invariant under
/// coordinate reflections, so angles in `[0, pi/2]` suffice.
fn best_direction(spec: ManifoldSpec, cutoff: &SpectralCutoff, dist: f64) -> ([f64; 2], f64) {
    let dim = if spec.is_torus() { spec.dim() } else { 1 };
    let f = |a: &[f64; 2]| or_inf(ratio_along(spec, cutoff, dist, a));
    match dim {
        1 => ([0.0; 2], f(&[0.0; 2])),
        2 => {
            let n = 24;
            let step = FRAC_PI_2 / n as f64;
            let (i, v) = (0..=n)
                .map(|i| (i, f(&[i as f64 * step, 0.0])))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("non-empty scan");
            let c = i as f64 * step;
            let (arg, val) = golden_section(c - step, c + step, 1e-7, |t| f(&[t, 0.0]));
            if val < v {
                ([arg, 0.0], val)
            } else {
                ([c, 0.0], v)
            }
        }
        _ => {
            let n = 8;
            let step = FRAC_PI_2 / n as f64;
            let mut best = ([0.0; 2], f64::INFINITY);
            for i in 0..=n {
                for j in 0..=n {
                    let a = [i as f64 * step, j as f64 * step];
                    let v = f(&a);
                    if v < best.1 {
                        best = (a, v);
                    }
                }
            }
            for _ in 0..3 {
                for c in 0..2 {
                    let a = best.0;
                    let (arg, val) = golden_section(a[c] - step, a[c] + step, 1e-7, |t| {
                        let mut q = a;
                        q[c] = t;
                        f(&q)
                    });
                    if val < best.1 {
                        best.0[c] = arg;
                        best.1 = val;
                    }
                }
            }
            best
        }
    }
}

/// Infimum of the exact ratio over `1e-9 / lambda <= d_g <= (lambda log lambda)^(-1)`:
/// a log-spaced scan in separation, a direction minimisation at each scale, and a final
/// golden-section refinement in log-separation around the best scale.
pub fn local_ratio_inf(spec: ManifoldSpec, cutoff: &SpectralCutoff) -> Result<LocalRatioInf> {
    if cutoff.spec() != spec {
        return domain(format!("cutoff built for {:?}, used with {:?}", cutoff.spec(), spec));
    }
    let lambda = cutoff.lambda();
    if lambda < TAU * 10.0 * (1.0 - 1e-12) {
        return domain(format!("local_ratio_inf needs lambda >= 20 pi, got {lambda}"));
    }
    let lo = (MIN_SCALED_SEPARATION / lambda).ln();
    let hi = (1.0 / (lambda * lambda.ln())).ln();
    let scale = |i: usize| (lo + (hi - lo) * i as f64 / (LOCAL_SCALES - 1) as f64).exp();

    let scanned: Vec<([f64; 2], f64)> =
        (0..LOCAL_SCALES).into_par_iter().map(|i| best_direction(spec, cutoff, scale(i))).collect();
    let degenerate = scanned.iter().filter(|s| !s.1.is_finite()).count();
    let (i, &(angles, val)) = scanned
        .iter()
        .enumerate()
        .filter(|(_, s)| s.1.is_finite())
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1).then(a.0.cmp(&b.0)))
        .ok_or_else(|| Error::Degenerate("every pair in the local window is degenerate".into()))?;

    let step = (hi - lo) / (LOCAL_SCALES - 1) as f64;
    let a = (scale(i).ln() - step).max(lo);
    let b = (scale(i).ln() + step).min(hi);
    let (arg, refined) = golden_section(a, b, 1e-6, |s| or_inf(ratio_along(spec, cutoff, s.exp(), &angles)));
    let (value, dist) = if refined < val { (refined, arg.exp()) } else { (val, scale(i)) };
    Ok(LocalRatioInf {
        lambda,
        value,
        argmin_dg: dist,
        max_dg: hi.exp(),
        degenerate_scales: degenerate,
    })
}
