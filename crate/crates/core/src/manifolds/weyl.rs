//! Finite-lambda diagnostics of the local Weyl law.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{
    enumerate_basis, geodesic_unchecked, kernel_jet_unchecked, ManifoldSpec, Point, SpectralCutoff,
    SPHERE_RADIUS,
};
use crate::error::{domain, Result};
use crate::specfun::{b_unchecked, unit_ball_volume};

/// Near-diagonal window for the off-diagonal profile comparison.
pub const NEAR_WINDOW: f64 = 0.2;
/// Lower bound on `d_g` for the far-pair decay check.
pub const FAR_THRESHOLD: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeylReport {
    pub lambda: f64,
    pub k_lambda: usize,
    /// `k_lambda (2 pi)^d / (omega_d lambda^d)`.
    pub k_ratio: f64,
    /// `K(x,x) (2 pi)^d / (omega_d lambda^d)` at a sampled point.
    pub diag_ratio: f64,
    /// Max-entry norm of `gram (d+2) / lambda^2 - I`.
    pub gram_dev: f64,
    /// `sup |P(x,y) - B_d(lambda d_g)|` over sampled pairs with `d_g <= 0.2`.
    pub offdiag_sup_err: f64,
    /// `sup |K(x,y)| / lambda^(d-1)` over sampled pairs with `d_g > 0.25`.
    pub far_pair_ratio: f64,
}

/// Point drawn from the normalised volume measure.
pub fn random_point<R: Rng + ?Sized>(spec: ManifoldSpec, rng: &mut R) -> Point {
    match spec {
        ManifoldSpec::FlatTorus { dim } => {
            let c: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
            Point::new(&c).expect("uniform draws lie in [0, 1)")
        }
        ManifoldSpec::Sphere2 => loop {
            let v: [f64; 3] = std::array::from_fn(|_| rng.sample::<f64, _>(StandardNormal));
            if let Ok(p) = Point::on_sphere(v) {
                return p;
            }
        },
    }
}

/// Point at geodesic distance `dist` from `y` in a uniformly random direction.
pub fn point_at_distance<R: Rng + ?Sized>(spec: ManifoldSpec, y: &Point, dist: f64, rng: &mut R) -> Point {
    match spec {
        ManifoldSpec::FlatTorus { dim } => {
            let dir: Vec<f64> = loop {
                let v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                if n > 1e-300 {
                    break v.into_iter().map(|a| a / n).collect();
                }
            };
            let c: Vec<f64> = (0..dim).map(|i| y.coords()[i] + dist * dir[i]).collect();
            Point::torus_wrapped(&c).expect("finite coordinates")
        }
        ManifoldSpec::Sphere2 => {
            let phi = 2.0 * PI * rng.random::<f64>();
            let frame = super::tangent_frame(spec, y);
            let (sp, cp) = phi.sin_cos();
            let e: [f64; 3] = std::array::from_fn(|i| cp * frame[0][i] + sp * frame[1][i]);
            let (sa, ca) = (dist / SPHERE_RADIUS).sin_cos();
            let v = y.raw();
            Point::on_sphere(std::array::from_fn(|i| ca * v[i] + sa * e[i])).expect("unit vector")
        }
    }
}

fn max_distance(spec: ManifoldSpec) -> f64 {
    match spec {
        ManifoldSpec::FlatTorus { .. } => 0.5,
        ManifoldSpec::Sphere2 => PI * SPHERE_RADIUS,
    }
}

pub(crate) fn gram_deviation(gram: &crate::linalg::Mat3, dim: usize, lambda: f64) -> f64 {
    let scale = (dim as f64 + 2.0) / (lambda * lambda);
    let mut dev: f64 = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((gram[i][j] * scale - target).abs());
        }
    }
    dev
}

/// Compares the cutoff at `lambda` against the leading terms of the local Weyl law,
/// using `n_pairs` seeded random pairs for each off-diagonal statistic.
pub fn weyl_diagnostics(spec: ManifoldSpec, lambda: f64, n_pairs: usize, seed: u64) -> Result<WeylReport> {
    if n_pairs == 0 {
        return domain("n_pairs must be at least 1");
    }
    let cutoff = enumerate_basis(spec, lambda)?;
    Ok(diagnostics_for(&cutoff, n_pairs, seed))
}

pub(crate) fn diagnostics_for(cutoff: &SpectralCutoff, n_pairs: usize, seed: u64) -> WeylReport {
    let spec = cutoff.spec();
    let d = spec.dim();
    let lambda = cutoff.lambda();
    let k = cutoff.k_lambda() as f64;
    let weyl = unit_ball_volume(d) * (lambda / (2.0 * PI)).powi(d as i32);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let x0 = random_point(spec, &mut rng);
    let diag = kernel_jet_unchecked(cutoff, &x0, &x0);
    let diag_k = diag.p * k;
    let gram_dev = gram_deviation(&diag.gram, d, lambda);

    let mut offdiag: f64 = 0.0;
    for _ in 0..n_pairs {
        let y = random_point(spec, &mut rng);
        let dist = NEAR_WINDOW * (1.0 - rng.random::<f64>());
        let x = point_at_distance(spec, &y, dist, &mut rng);
        let jet = kernel_jet_unchecked(cutoff, &x, &y);
        let dg = geodesic_unchecked(spec, &x, &y);
        offdiag = offdiag.max((jet.p - b_unchecked(d, lambda * dg)).abs());
    }

    let mut far: f64 = 0.0;
    let span = max_distance(spec) - FAR_THRESHOLD;
    for _ in 0..n_pairs {
        let y = random_point(spec, &mut rng);
        let dist = max_distance(spec) - span * rng.random::<f64>();
        let x = point_at_distance(spec, &y, dist, &mut rng);
        let jet = kernel_jet_unchecked(cutoff, &x, &y);
        far = far.max((jet.p * k).abs() / lambda.powi(d as i32 - 1));
    }

    WeylReport {
        lambda,
        k_lambda: cutoff.k_lambda(),
        k_ratio: k / weyl,
        diag_ratio: diag_k / weyl,
        gram_dev,
        offdiag_sup_err: offdiag,
        far_pair_ratio: far,
    }
}
