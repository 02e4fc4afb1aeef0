//! Model manifolds with explicit eigenbases: flat tori `T^d` (`d <= 3`) on the unit
//! cube and the round sphere `S^2` scaled to unit area.
//!
//! Every kernel quantity here is computed by summing the exact eigenfunction
//! expansion; nothing is asymptotic.

mod sphere;
mod torus;
mod weyl;

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg::{self, Mat3};

pub(crate) use weyl::gram_deviation;
pub use weyl::{point_at_distance, random_point, weyl_diagnostics, WeylReport, FAR_THRESHOLD, NEAR_WINDOW};

/// Largest `k_lambda` that [`enumerate_basis`] will materialise.
pub const MAX_MODES: usize = 10_000_000;

/// Radius of the round sphere of unit area, `(4 pi)^(-1/2)`.
pub const SPHERE_RADIUS: f64 = 0.282_094_791_773_878_14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ManifoldSpec {
    /// `[0,1)^dim` with the flat metric.
    FlatTorus { dim: usize },
    /// Round 2-sphere of radius [`SPHERE_RADIUS`]; points are unit vectors in `R^3`.
    Sphere2,
}

impl ManifoldSpec {
    pub fn flat_torus(dim: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return domain(format!("flat torus dimension must be 1, 2 or 3, got {dim}"));
        }
        Ok(Self::FlatTorus { dim })
    }

    pub fn circle() -> Self {
        Self::FlatTorus { dim: 1 }
    }

    pub fn dim(&self) -> usize {
        match *self {
            Self::FlatTorus { dim } => dim,
            Self::Sphere2 => 2,
        }
    }

    /// Always 1.
    pub fn volume(&self) -> f64 {
        match self {
            Self::FlatTorus { .. } => 1.0,
            Self::Sphere2 => 4.0 * PI * SPHERE_RADIUS * SPHERE_RADIUS,
        }
    }

    pub fn is_torus(&self) -> bool {
        matches!(self, Self::FlatTorus { .. })
    }

    /// Number of coordinates a [`Point`] on this manifold carries.
    pub fn coordinate_len(&self) -> usize {
        match *self {
            Self::FlatTorus { dim } => dim,
            Self::Sphere2 => 3,
        }
    }

    pub fn validate_point(&self, p: &Point) -> Result<()> {
        if p.len() != self.coordinate_len() {
            return domain(format!(
                "point has {} coordinates, {:?} needs {}",
                p.len(),
                self,
                self.coordinate_len()
            ));
        }
        match self {
            Self::FlatTorus { .. } => {
                if let Some(c) = p.coords().iter().find(|c| !(0.0..1.0).contains(*c)) {
                    return domain(format!("torus coordinate {c} outside [0, 1)"));
                }
            }
            Self::Sphere2 => {
                let n2: f64 = p.coords().iter().map(|c| c * c).sum();
                if !((n2 - 1.0).abs() <= 1e-9) {
                    return domain(format!("sphere point must be a unit vector, |x|^2 = {n2}"));
                }
            }
        }
        Ok(())
    }
}

/// A point on a model manifold: torus coordinates in `[0,1)^d` or a unit vector in `R^3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    coords: [f64; 3],
    len: usize,
}

impl Point {
    pub fn new(coords: &[f64]) -> Result<Self> {
        if coords.is_empty() || coords.len() > 3 {
            return domain(format!("points carry 1 to 3 coordinates, got {}", coords.len()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return domain("point coordinates must be finite");
        }
        let mut c = [0.0; 3];
        c[..coords.len()].copy_from_slice(coords);
        Ok(Self { coords: c, len: coords.len() })
    }

    /// Torus point from arbitrary reals, reduced modulo 1.
    pub fn torus_wrapped(coords: &[f64]) -> Result<Self> {
        let wrapped: Vec<f64> = coords.iter().map(|c| c.rem_euclid(1.0) % 1.0).collect();
        Self::new(&wrapped)
    }

    /// Sphere point from any non-zero vector, normalised.
    pub fn on_sphere(v: [f64; 3]) -> Result<Self> {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return domain("cannot normalise a zero or non-finite vector");
        }
        Self::new(&[v[0] / n, v[1] / n, v[2] / n])
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.len]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub(crate) fn raw(&self) -> &[f64; 3] {
        &self.coords
    }
}

/// One orthonormal eigenfunction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// The constant function on a torus.
    Constant,
    /// `sqrt(2) cos(2 pi n.x)` for `n` in the positive half-lattice.
    Cos([i32; 3]),
    /// `sqrt(2) sin(2 pi n.x)` for `n` in the positive half-lattice.
    Sin([i32; 3]),
    /// Real spherical harmonic of the given degree; `order >= 0` is the cosine
    /// type, `order < 0` the sine type of order `|order|`.
    Harmonic { degree: u32, order: i32 },
}

/// The eigenbasis below a frequency `lambda` (closed inequality `lambda_n <= lambda`).
#[derive(Debug, Clone)]
pub struct SpectralCutoff {
    spec: ManifoldSpec,
    lambda: f64,
    k_lambda: usize,
    modes: Vec<Mode>,
    eigenvalues: Vec<f64>,
    /// Torus: integer bound on `|n|^2`. Sphere: unused.
    radius_sq: u64,
    /// Sphere: top degree. Torus: unused.
    l_max: usize,
    /// Torus: `2 pi n` for the positive half-lattice, in mode order.
    half_freqs: Vec<[f64; 3]>,
    /// Torus: `sum n_i n_j` over the full lattice ball.
    second_moment: Mat3,
}

/// Torus eigenvalue of a lattice vector with squared norm `norm_sq`.
pub fn torus_eigenvalue(norm_sq: u64) -> f64 {
    TAU * (norm_sq as f64).sqrt()
}

/// Sphere eigenvalue (square root of the Laplace eigenvalue) for degree `l` at unit area.
pub fn sphere_eigenvalue(l: u64) -> f64 {
    (4.0 * PI * (l * (l + 1)) as f64).sqrt()
}

/// All eigenfunctions with eigenvalue at most `lambda`.
pub fn enumerate_basis(spec: ManifoldSpec, lambda: f64) -> Result<SpectralCutoff> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return domain(format!("lambda must be positive and finite, got {lambda}"));
    }
    match spec {
        ManifoldSpec::FlatTorus { dim } => {
            let mut m = ((lambda / TAU).powi(2)).floor() as u64;
            while torus_eigenvalue(m + 1) <= lambda {
                m += 1;
            }
            while m > 0 && torus_eigenvalue(m) > lambda {
                m -= 1;
            }
            torus::build(dim, m, lambda)
        }
        ManifoldSpec::Sphere2 => {
            let mut l = (lambda * SPHERE_RADIUS).floor() as u64;
            while sphere_eigenvalue(l + 1) <= lambda {
                l += 1;
            }
            while l > 0 && sphere_eigenvalue(l) > lambda {
                l -= 1;
            }
            sphere::build(l as usize, lambda)
        }
    }
}

impl SpectralCutoff {
    /// Cutoff by integer frequency: `|n| <= cap` on tori (`lambda = 2 pi cap`) or
    /// degree `<= cap` on the sphere.
    pub fn with_frequency_cap(spec: ManifoldSpec, cap: u32) -> Result<Self> {
        match spec {
            ManifoldSpec::FlatTorus { dim } => {
                let c = u64::from(cap);
                torus::build(dim, c * c, TAU * f64::from(cap))
            }
            ManifoldSpec::Sphere2 => sphere::build(cap as usize, sphere_eigenvalue(u64::from(cap))),
        }
    }

    pub fn spec(&self) -> ManifoldSpec {
        self.spec
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn k_lambda(&self) -> usize {
        self.k_lambda
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Largest spherical-harmonic degree (sphere only; 0 on tori).
    pub fn l_max(&self) -> usize {
        self.l_max
    }

    /// Integer bound on `|n|^2` (tori only; 0 on the sphere).
    pub fn radius_sq(&self) -> u64 {
        self.radius_sq
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    fn check(&self, spec: ManifoldSpec) -> Result<()> {
        if spec != self.spec {
            return domain(format!("cutoff built for {:?}, used with {:?}", self.spec, spec));
        }
        Ok(())
    }
}

/// Geodesic distance in the unit-volume metric.
pub fn geodesic_distance(spec: ManifoldSpec, x: &Point, y: &Point) -> Result<f64> {
    spec.validate_point(x)?;
    spec.validate_point(y)?;
    Ok(geodesic_unchecked(spec, x, y))
}

pub(crate) fn geodesic_unchecked(spec: ManifoldSpec, x: &Point, y: &Point) -> f64 {
    match spec {
        ManifoldSpec::FlatTorus { dim } => {
            let t = torus::separation(x, y, dim);
            linalg::dot(&t, &t, dim).sqrt()
        }
        ManifoldSpec::Sphere2 => SPHERE_RADIUS * sphere::angle(x.raw(), y.raw()),
    }
}

/// `P_lambda(x, y)` with its first `y`-derivatives and the diagonal Gram matrix at `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelJet {
    pub p: f64,
    /// `1 - p`, summed without cancellation.
    pub one_minus_p: f64,
    /// `d_{y_i} P_lambda(x, y)` in geodesic normal coordinates at `y`; first `dim` entries used.
    pub grad_y: [f64; 3],
    /// `d_{x_i} d_{y_j} P_lambda` on the diagonal at `y`; leading `dim x dim` block used.
    pub gram: Mat3,
    pub geodesic: f64,
    pub dim: usize,
}

impl KernelJet {
    pub fn grad(&self) -> &[f64] {
        &self.grad_y[..self.dim]
    }
}

pub fn kernel_jet(spec: ManifoldSpec, cutoff: &SpectralCutoff, x: &Point, y: &Point) -> Result<KernelJet> {
    cutoff.check(spec)?;
    spec.validate_point(x)?;
    spec.validate_point(y)?;
    Ok(kernel_jet_unchecked(cutoff, x, y))
}

pub(crate) fn kernel_jet_unchecked(cutoff: &SpectralCutoff, x: &Point, y: &Point) -> KernelJet {
    match cutoff.spec {
        ManifoldSpec::FlatTorus { dim } => {
            let t = torus::separation(x, y, dim);
            torus::jet(cutoff, &t)
        }
        ManifoldSpec::Sphere2 => sphere::jet(cutoff, x.raw(), y.raw()),
    }
}

/// Unnormalised spectral projection kernel `K_lambda(x, y)`.
pub fn kernel_value(spec: ManifoldSpec, cutoff: &SpectralCutoff, x: &Point, y: &Point) -> Result<f64> {
    cutoff.check(spec)?;
    spec.validate_point(x)?;
    spec.validate_point(y)?;
    Ok(kernel_jet_unchecked(cutoff, x, y).p * cutoff.k_lambda as f64)
}

/// The embedding `i_lambda(x)`: all eigenfunctions at `x` divided by `sqrt(K(x,x))`,
/// in [`SpectralCutoff::modes`] order.
pub fn embedding_vector(spec: ManifoldSpec, cutoff: &SpectralCutoff, x: &Point) -> Result<Vec<f64>> {
    cutoff.check(spec)?;
    spec.validate_point(x)?;
    let mut out = vec![0.0; cutoff.k_lambda];
    embedding_into(cutoff, x, &mut out);
    Ok(out)
}

/// [`embedding_vector`] into a caller-provided buffer of length `k_lambda`, without validation.
pub(crate) fn embedding_into(cutoff: &SpectralCutoff, x: &Point, out: &mut [f64]) {
    match cutoff.spec {
        ManifoldSpec::FlatTorus { .. } => torus::embedding_into(cutoff, x.raw(), out),
        ManifoldSpec::Sphere2 => sphere::embedding_into(cutoff, x.raw(), out),
    }
}

/// Split of `v = i(x) - i(y)` into its tangent part at `i(y)` and the normal remainder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionSplit {
    pub jet: KernelJet,
    /// `w^T G^{-1} w = |P_y v|^2`.
    pub tangential_sq: f64,
    /// `|P_y^perp v|^2`, accumulated component by component.
    pub normal_sq: f64,
}

/// Exact projection split. The normal part is summed over eigenfunction components,
/// so it keeps full relative accuracy even when it is `O(d_g^4)` against an
/// `O(d_g^2)` total.
pub fn projection_split(
    spec: ManifoldSpec,
    cutoff: &SpectralCutoff,
    x: &Point,
    y: &Point,
) -> Result<ProjectionSplit> {
    let jet = kernel_jet(spec, cutoff, x, y)?;
    let n = spec.dim();
    let coeffs = linalg::spd_solve(&jet.gram, n, &jet.grad_y)?;
    let tangential_sq = linalg::dot(&jet.grad_y, &coeffs, n);
    let normal_sq = match spec {
        ManifoldSpec::FlatTorus { dim } => {
            let t = torus::separation(x, y, dim);
            torus::normal_sq(cutoff, &t, &coeffs)
        }
        ManifoldSpec::Sphere2 => sphere::normal_sq(cutoff, x.raw(), y.raw(), &coeffs),
    };
    if !normal_sq.is_finite() {
        return Err(Error::Numerical("non-finite normal residual".into()));
    }
    Ok(ProjectionSplit { jet, tangential_sq, normal_sq })
}

/// Orthonormal tangent frame of normal coordinates at `y` (tori: coordinate axes).
pub fn tangent_frame(spec: ManifoldSpec, y: &Point) -> [[f64; 3]; 3] {
    match spec {
        ManifoldSpec::FlatTorus { .. } => [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        ManifoldSpec::Sphere2 => {
            let (e1, e2) = sphere::frame(y.raw());
            [e1, e2, [0.0; 3]]
        }
    }
}

/// Moves `y` by `step` along normal coordinate `axis` (arc length in the unit-area metric).
pub fn move_along(spec: ManifoldSpec, y: &Point, axis: usize, step: f64) -> Point {
    match spec {
        ManifoldSpec::FlatTorus { .. } => {
            let mut c = *y.raw();
            c[axis] += step;
            Point::torus_wrapped(&c[..y.len()]).expect("finite coordinates")
        }
        ManifoldSpec::Sphere2 => {
            let frame = tangent_frame(spec, y);
            let e = frame[axis];
            let a = step / SPHERE_RADIUS;
            let (s, c) = a.sin_cos();
            let v = y.raw();
            Point::on_sphere([c * v[0] + s * e[0], c * v[1] + s * e[1], c * v[2] + s * e[2]])
                .expect("unit vector")
        }
    }
}
