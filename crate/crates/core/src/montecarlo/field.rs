//! Normalised random wave `<a, i(x)>` on an evaluation grid, with local refinement.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::manifolds::{embedding_into, move_along, ManifoldSpec, Point, SpectralCutoff, SPHERE_RADIUS};
use crate::specfun::golden_section;

/// Largest basis table (grid points times `k_lambda`) a [`WaveField`] will hold.
pub const MAX_TABLE: usize = 1 << 24;

const REFINE_TOL: f64 = 1e-10;
const MAX_UNSTRUCTURED_CANDIDATES: usize = 32;

/// Reusable per-thread buffers.
#[derive(Default)]
pub(crate) struct Scratch {
    values: Vec<f64>,
    basis: Vec<f64>,
    refined: Vec<f64>,
    touched: Vec<usize>,
}

/// The field `x -> <a, i(x)>` for arbitrary unit coefficient vectors `a`, evaluated by a
/// precomputed basis table on a fixed grid.
pub struct WaveField<'a> {
    spec: ManifoldSpec,
    cutoff: &'a SpectralCutoff,
    grid: Vec<Point>,
    table: Vec<f64>,
    /// Axis neighbours on torus grids (`2d` per point); empty on the sphere.
    neighbors: Vec<usize>,
    spacing: f64,
    margin: f64,
    refine: bool,
}

impl<'a> WaveField<'a> {
    /// Tori use `grid_points` per axis; the sphere uses `grid_points` latitude steps with
    /// azimuthal rings of matching arc spacing.
    pub fn new(spec: ManifoldSpec, cutoff: &'a SpectralCutoff, grid_points: usize, refine: bool) -> Result<Self> {
        if cutoff.spec() != spec {
            return domain(format!("cutoff built for {:?}, used with {:?}", cutoff.spec(), spec));
        }
        if grid_points < 64 {
            return domain(format!("grid_points must be at least 64, got {grid_points}"));
        }
        let k = cutoff.k_lambda();
        let (grid, neighbors, spacing) = match spec {
            ManifoldSpec::FlatTorus { dim } => torus_grid(dim, grid_points, k)?,
            ManifoldSpec::Sphere2 => sphere_grid(grid_points),
        };
        if grid.len().saturating_mul(k) > MAX_TABLE {
            return Err(Error::Resource { k_lambda: k, limit: MAX_TABLE / grid.len().max(1) });
        }
        let mut table = vec![0.0; grid.len() * k];
        for (p, row) in grid.iter().zip(table.chunks_exact_mut(k)) {
            embedding_into(cutoff, p, row);
        }
        // Second derivatives of <a, i(x)> along unit directions are bounded by
        // sqrt(sum lambda_n^4 / k); a grid maximum then trails the true one by at most
        // M2 * d * h^2 / 8.
        let m2 = (cutoff.eigenvalues().iter().map(|e| e.powi(4)).sum::<f64>() / k as f64).sqrt();
        let d = spec.dim() as f64;
        let margin = 0.5 * m2 * d * spacing * spacing / 4.0;
        Ok(Self { spec, cutoff, grid, table, neighbors, spacing, margin, refine })
    }

    pub fn grid_len(&self) -> usize {
        self.grid.len()
    }

    pub fn grid(&self) -> &[Point] {
        &self.grid
    }

    /// Geodesic grid spacing `h`.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Upper bound on how far a grid maximum can trail the true local maximum.
    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn k_lambda(&self) -> usize {
        self.cutoff.k_lambda()
    }

    pub(crate) fn fill_grid(&self, a: &[f64], out: &mut Vec<f64>) {
        let k = a.len();
        out.clear();
        out.extend(self.table.chunks_exact(k).map(|row| row.iter().zip(a).map(|(r, c)| r * c).sum::<f64>()));
    }

    pub(crate) fn eval(&self, a: &[f64], x: &Point, basis: &mut Vec<f64>) -> f64 {
        basis.resize(a.len(), 0.0);
        embedding_into(self.cutoff, x, basis);
        basis.iter().zip(a).map(|(b, c)| b * c).sum()
    }

    fn is_extremum(&self, values: &[f64], i: usize, max: bool) -> bool {
        let nd = 2 * self.spec.dim();
        if self.neighbors.is_empty() {
            return true;
        }
        self.neighbors[i * nd..(i + 1) * nd]
            .iter()
            .all(|&j| if max { values[i] >= values[j] } else { values[i] <= values[j] })
    }

    /// Coordinate golden-section search from grid point `i`; `sign = 1` maximises, `-1` minimises.
    /// Returns `sign * best`, never worse than the grid value.
    fn polish(&self, a: &[f64], i: usize, sign: f64, grid_value: f64, basis: &mut Vec<f64>) -> f64 {
        let d = self.spec.dim();
        let span = self.spacing * (d as f64).sqrt();
        let mut at = self.grid[i];
        let mut best = sign * grid_value;
        for _ in 0..if d == 1 { 1 } else { 3 } {
            for axis in 0..d {
                let (s, v) = golden_section(-span, span, REFINE_TOL, |s| {
                    -sign * self.eval(a, &move_along(self.spec, &at, axis, s), basis)
                });
                if -v > best {
                    best = -v;
                    at = move_along(self.spec, &at, axis, s);
                }
            }
        }
        best
    }

    /// Refined maximum near grid point `i`, memoised per sample.
    fn refined_max(&self, a: &[f64], i: usize, sc: &mut Scratch) -> f64 {
        if sc.refined[i].is_nan() {
            let v = self.polish(a, i, 1.0, sc.values[i], &mut sc.basis);
            sc.refined[i] = v;
            sc.touched.push(i);
        }
        sc.refined[i]
    }

    fn begin_sample(&self, a: &[f64], sc: &mut Scratch) {
        let mut values = std::mem::take(&mut sc.values);
        self.fill_grid(a, &mut values);
        sc.values = values;
        if sc.refined.len() != self.grid.len() {
            sc.refined = vec![f64::NAN; self.grid.len()];
            sc.touched.clear();
        }
        for &i in &sc.touched {
            sc.refined[i] = f64::NAN;
        }
        sc.touched.clear();
    }

    /// Supremum of the field for the coefficients already loaded by `begin_sample`.
    fn sup_loaded(&self, a: &[f64], sc: &mut Scratch) -> f64 {
        let (imax, gmax) = sc
            .values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        if !self.refine {
            return gmax;
        }
        let floor = gmax - self.margin;
        let mut cands: Vec<usize> = (0..sc.values.len())
            .filter(|&i| sc.values[i] >= floor && self.is_extremum(&sc.values, i, true))
            .collect();
        if self.neighbors.is_empty() && cands.len() > MAX_UNSTRUCTURED_CANDIDATES {
            cands.sort_by(|&x, &y| sc.values[y].total_cmp(&sc.values[x]).then(x.cmp(&y)));
            cands.truncate(MAX_UNSTRUCTURED_CANDIDATES);
        }
        if cands.is_empty() {
            cands.push(imax);
        }
        let mut sup = gmax;
        for i in cands {
            sup = sup.max(self.refined_max(a, i, sc));
        }
        sup.min(1.0)
    }

    pub(crate) fn sup_with(&self, a: &[f64], sc: &mut Scratch) -> f64 {
        self.begin_sample(a, sc);
        self.sup_loaded(a, sc)
    }

    /// Supremum and, on the circle, the number of maximal arcs of `{field > c}`.
    pub(crate) fn sup_and_arcs(&self, a: &[f64], c: f64, sc: &mut Scratch) -> (f64, ArcCount) {
        self.begin_sample(a, sc);
        let sup = self.sup_loaded(a, sc);
        let m = sc.values.len();
        let above = |v: f64| v > c;
        let mut up = 0u32;
        let mut all_above = true;
        for j in 0..m {
            let prev = sc.values[(j + m - 1) % m];
            if !above(prev) && above(sc.values[j]) {
                up += 1;
            }
            all_above &= above(sc.values[j]);
        }
        let (mut peaks, mut dips) = (0u32, 0u32);
        if self.refine {
            for j in 0..m {
                let v = sc.values[j];
                if !above(v) && v >= c - self.margin && self.is_extremum(&sc.values, j, true) {
                    if above(self.refined_max(a, j, sc)) {
                        peaks += 1;
                    }
                } else if above(v) && v <= c + self.margin && self.is_extremum(&sc.values, j, false) {
                    let low = -self.polish(a, j, -1.0, v, &mut sc.basis);
                    if !above(low) {
                        dips += 1;
                    }
                }
            }
        }
        let count = if all_above && dips == 0 {
            ArcCount::WholeCircle
        } else {
            ArcCount::Arcs(up + peaks + dips)
        };
        (sup, count)
    }
}

/// Arc count of one excursion set on the circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ArcCount {
    Arcs(u32),
    WholeCircle,
}

type Grid = (Vec<Point>, Vec<usize>, f64);

fn torus_grid(dim: usize, n: usize, k: usize) -> Result<Grid> {
    let total = n.checked_pow(dim as u32).filter(|t| t.saturating_mul(k) <= MAX_TABLE);
    let Some(total) = total else {
        return Err(Error::Resource { k_lambda: k, limit: MAX_TABLE });
    };
    let h = 1.0 / n as f64;
    let mut grid = Vec::with_capacity(total);
    let mut nb = Vec::with_capacity(total * 2 * dim);
    let stride: Vec<usize> = (0..dim).map(|a| n.pow(a as u32)).collect();
    for idx in 0..total {
        let mut c = [0.0; 3];
        for a in 0..dim {
            let i = (idx / stride[a]) % n;
            c[a] = i as f64 * h;
            let down = idx - i * stride[a] + ((i + n - 1) % n) * stride[a];
            let up = idx - i * stride[a] + ((i + 1) % n) * stride[a];
            nb.push(down);
            nb.push(up);
        }
        grid.push(Point::new(&c[..dim])?);
    }
    Ok((grid, nb, h))
}

fn sphere_grid(n: usize) -> Grid {
    let mut grid = Vec::new();
    for j in 0..=n {
        let polar = PI * j as f64 / n as f64;
        let (s, c) = polar.sin_cos();
        let ring = ((2.0 * n as f64 * s).round() as usize).max(1);
        for i in 0..ring {
            let phi = 2.0 * PI * i as f64 / ring as f64;
            let p = Point::on_sphere([s * phi.cos(), s * phi.sin(), c]).expect("unit vector");
            grid.push(p);
        }
    }
    (grid, Vec::new(), PI * SPHERE_RADIUS / n as f64)
}
