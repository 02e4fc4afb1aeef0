//! Monte Carlo for the spherical ensemble: coefficient vectors uniform on `S^(k-1)`,
//! suprema of the normalised wave, excursion probabilities and, on the circle, the
//! expected number of excursion arcs.
//!
//! Sample `i` draws from its own ChaCha8 stream keyed by `(seed, i)` and every reduction
//! is over integers, so results do not depend on the thread count.

mod field;

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::manifolds::{ManifoldSpec, SpectralCutoff};

pub use field::{WaveField, MAX_TABLE};
use field::{ArcCount, Scratch};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCConfig {
    pub seed: u64,
    pub n_samples: usize,
    /// Grid points per axis (tori) or latitude steps (sphere); at least 64.
    pub grid_points: usize,
    /// Golden-section polishing of grid maxima (and, for arc counts, of near-threshold extrema).
    pub refine: bool,
    /// The excursion threshold is `cos(theta)`.
    pub theta: f64,
}

impl Default for MCConfig {
    fn default() -> Self {
        Self { seed: 0, n_samples: 10_000, grid_points: 2048, refine: true, theta: 0.7 }
    }
}

impl MCConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return domain("n_samples must be at least 1");
        }
        if self.grid_points < 64 {
            return domain(format!("grid_points must be at least 64, got {}", self.grid_points));
        }
        if !(self.theta > 0.0 && self.theta <= FRAC_PI_2) {
            return domain(format!("theta must lie in (0, pi/2], got {}", self.theta));
        }
        Ok(())
    }

    fn check_spacing(&self, field: &WaveField<'_>, lambda: f64) -> Result<()> {
        if !self.refine && field.spacing() * lambda > 0.5 {
            return domain(format!(
                "grid spacing h = {:e} gives h * lambda = {:.3} > 0.5 without refinement",
                field.spacing(),
                field.spacing() * lambda
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub hits: u64,
    pub n: u64,
    pub p_hat: f64,
    /// `sqrt(p_hat (1 - p_hat) / n)`.
    pub stderr: f64,
    /// Half-width of the 1-sigma Wilson score interval.
    pub wilson_half_width: f64,
    pub seed: u64,
}

impl MCEstimate {
    pub fn from_counts(hits: u64, n: u64, seed: u64) -> Self {
        let nf = n as f64;
        let p = hits as f64 / nf;
        let stderr = (p * (1.0 - p) / nf).sqrt();
        let wilson = (p * (1.0 - p) / nf + 0.25 / (nf * nf)).sqrt() / (1.0 + 1.0 / nf);
        Self { hits, n, p_hat: p, stderr, wilson_half_width: wilson, seed }
    }

    /// `(p_hat - p) / stderr`; infinite when the estimate has zero spread but differs.
    pub fn z_score(&self, p: f64) -> f64 {
        let diff = self.p_hat - p;
        if self.stderr > 0.0 {
            diff / self.stderr
        } else if diff == 0.0 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        }
    }
}

/// Mean number of maximal excursion arcs on the circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerEstimate {
    pub n: u64,
    /// Total arcs over all samples.
    pub arc_total: u64,
    pub mean: f64,
    /// Sample standard deviation of the arc count over `sqrt(n)`.
    pub stderr: f64,
    /// Samples with at least one arc.
    pub hits: u64,
    /// Samples whose excursion set was the whole circle (counted as 0).
    pub whole_circle: u64,
    pub seed: u64,
}

/// RNG stream for sample `index`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `k` independent standard normals, normalised to a unit vector.
pub fn sample_coeffs<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<Vec<f64>> {
    if k < 2 {
        return domain(format!("coefficient dimension must be at least 2, got {k}"));
    }
    loop {
        let v: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n >= 1e-300 {
            return Ok(v.into_iter().map(|x| x / n).collect());
        }
    }
}

fn check_coeffs(a: &[f64], k: usize) -> Result<()> {
    if a.len() != k {
        return domain(format!("coefficient vector has length {}, cutoff has k_lambda = {k}", a.len()));
    }
    let n2: f64 = a.iter().map(|x| x * x).sum();
    if !((n2 - 1.0).abs() <= 1e-9) {
        return domain(format!("coefficient vector must be a unit vector, |a|^2 = {n2}"));
    }
    Ok(())
}

/// `max_x <a, i(x)>` over the grid, polished near the top when `cfg.refine` is set.
pub fn sup_normalized_field(spec: ManifoldSpec, cutoff: &SpectralCutoff, a: &[f64], cfg: &MCConfig) -> Result<f64> {
    cfg.validate()?;
    check_coeffs(a, cutoff.k_lambda())?;
    let field = WaveField::new(spec, cutoff, cfg.grid_points, cfg.refine)?;
    cfg.check_spacing(&field, cutoff.lambda())?;
    Ok(field.sup_with(a, &mut Scratch::default()))
}

const CHUNK: usize = 1024;

fn for_each_sample<T: Send>(
    cfg: &MCConfig,
    k: usize,
    f: impl Fn(&[f64], &mut Scratch) -> T + Sync,
) -> Vec<T> {
    let n = cfg.n_samples;
    let chunks: Vec<Vec<T>> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut sc = Scratch::default();
            (c * CHUNK..((c + 1) * CHUNK).min(n))
                .map(|i| {
                    let mut rng = sample_rng(cfg.seed, i as u64);
                    let a = sample_coeffs(k, &mut rng).expect("k >= 2");
                    f(&a, &mut sc)
                })
                .collect()
        })
        .collect();
    chunks.into_iter().flatten().collect()
}

/// Per-sample suprema in sample order.
pub fn sample_sups(spec: ManifoldSpec, cutoff: &SpectralCutoff, cfg: &MCConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let field = WaveField::new(spec, cutoff, cfg.grid_points, cfg.refine)?;
    cfg.check_spacing(&field, cutoff.lambda())?;
    Ok(for_each_sample(cfg, cutoff.k_lambda(), |a, sc| field.sup_with(a, sc)))
}

/// Fraction of samples whose supremum exceeds `cos(theta)`.
pub fn estimate_excursion(spec: ManifoldSpec, cutoff: &SpectralCutoff, cfg: &MCConfig) -> Result<MCEstimate> {
    let c = cfg.theta.cos();
    let sups = sample_sups(spec, cutoff, cfg)?;
    let hits = sups.iter().filter(|&&s| s > c).count() as u64;
    Ok(MCEstimate::from_counts(hits, sups.len() as u64, cfg.seed))
}

/// Per-sample `(sup, arcs, whole_circle)` on the circle.
pub fn sample_arcs(spec: ManifoldSpec, cutoff: &SpectralCutoff, cfg: &MCConfig) -> Result<Vec<(f64, u32, bool)>> {
    if spec != ManifoldSpec::circle() {
        return domain("arc counting is only defined on the circle");
    }
    cfg.validate()?;
    let field = WaveField::new(spec, cutoff, cfg.grid_points, cfg.refine)?;
    cfg.check_spacing(&field, cutoff.lambda())?;
    let c = cfg.theta.cos();
    Ok(for_each_sample(cfg, cutoff.k_lambda(), |a, sc| match field.sup_and_arcs(a, c, sc) {
        (s, ArcCount::Arcs(n)) => (s, n, false),
        (s, ArcCount::WholeCircle) => (s, 0, true),
    }))
}

/// Mean Euler characteristic of `{x : <a, i(x)> > cos(theta)}` on the circle, i.e. the mean
/// number of maximal arcs; a whole-circle excursion has characteristic 0 and is counted apart.
pub fn euler_char_circle(spec: ManifoldSpec, cutoff: &SpectralCutoff, cfg: &MCConfig) -> Result<EulerEstimate> {
    let per = sample_arcs(spec, cutoff, cfg)?;
    let n = per.len() as u64;
    let total: u64 = per.iter().map(|p| u64::from(p.1)).sum();
    let total_sq: u64 = per.iter().map(|p| u64::from(p.1).pow(2)).sum();
    let hits = per.iter().filter(|p| p.1 > 0).count() as u64;
    let whole = per.iter().filter(|p| p.2).count() as u64;
    let nf = n as f64;
    let mean = total as f64 / nf;
    let var = if n > 1 { (total_sq as f64 - nf * mean * mean) / (nf - 1.0) } else { 0.0 };
    Ok(EulerEstimate {
        n,
        arc_total: total,
        mean,
        stderr: (var.max(0.0) / nf).sqrt(),
        hits,
        whole_circle: whole,
        seed: cfg.seed,
    })
}
