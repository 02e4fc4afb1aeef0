//! The critical-radius ratio `|i(x) - i(y)|^2 / (2 |P_y^perp (i(x) - i(y))|)` of the
//! spectral embedding, evaluated exactly at finite `lambda`, and searches over pairs.

mod local;
mod search;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::manifolds::{self, geodesic_distance, ManifoldSpec, Point, SpectralCutoff};

pub use local::{local_ratio_inf, LocalRatioInf, LOCAL_SCALES};
pub use search::{critical_radius, CriticalRadiusEstimate, Regime, SearchConfig};

/// Pairs closer than this multiple of `1/lambda` are rejected by [`ratio_at`].
pub const MIN_SCALED_SEPARATION: f64 = 1e-9;
/// Normal residuals `|P^perp v|^2` at or below this are treated as degenerate.
pub const MIN_NORMAL_SQ: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioSample {
    pub x: Point,
    pub y: Point,
    pub geodesic: f64,
    /// `|i(x) - i(y)|^2 = 2 (1 - P(x, y))`.
    pub numerator: f64,
    /// `2 |P_y^perp (i(x) - i(y))|`.
    pub denominator: f64,
    pub ratio: f64,
    /// `w^T G^{-1} w`, the squared tangential part.
    pub tangential_sq: f64,
}

impl RatioSample {
    /// `lambda * d_g`.
    pub fn scaled_separation(&self, lambda: f64) -> f64 {
        lambda * self.geodesic
    }
}

pub fn ratio_at(spec: ManifoldSpec, cutoff: &SpectralCutoff, x: &Point, y: &Point) -> Result<RatioSample> {
    let geodesic = geodesic_distance(spec, x, y)?;
    if geodesic < MIN_SCALED_SEPARATION / cutoff.lambda() {
        return Err(Error::Degenerate(format!("d_g = {geodesic:e} is below the separation guard")));
    }
    let split = manifolds::projection_split(spec, cutoff, x, y)?;
    if split.normal_sq <= MIN_NORMAL_SQ {
        return Err(Error::Degenerate(format!(
            "normal residual {:e} at d_g = {geodesic:e}",
            split.normal_sq
        )));
    }
    let numerator = 2.0 * split.jet.one_minus_p;
    let denominator = 2.0 * split.normal_sq.sqrt();
    Ok(RatioSample {
        x: *x,
        y: *y,
        geodesic,
        numerator,
        denominator,
        ratio: numerator / denominator,
        tangential_sq: split.tangential_sq,
    })
}

/// `max |gram (d+2) / lambda^2 - I|` (entrywise) over the base points.
pub fn pullback_check(spec: ManifoldSpec, cutoff: &SpectralCutoff, points: &[Point]) -> Result<f64> {
    if points.is_empty() {
        return domain("pullback_check needs at least one base point");
    }
    let mut dev: f64 = 0.0;
    for p in points {
        let jet = manifolds::kernel_jet(spec, cutoff, p, p)?;
        dev = dev.max(manifolds::gram_deviation(&jet.gram, spec.dim(), cutoff.lambda()));
    }
    Ok(dev)
}
