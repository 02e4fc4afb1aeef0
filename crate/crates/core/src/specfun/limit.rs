use serde::{Deserialize, Serialize};

use super::check_dimension;
use super::profile::{deltas, near_diagonal_limit, FAR_FIELD_LIMIT};
use crate::error::{domain, Error, Result};

/// Result of minimising `Delta_1 / sqrt(Delta_2)` over `u`.
///
/// `argmin_u` is `0.0` when the `u -> 0` limit is the infimum and
/// `f64::INFINITY` when the far-field limit `1/sqrt(2)` is.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CritLimit {
    pub value: f64,
    pub argmin_u: f64,
}

pub const DEFAULT_U_MAX: f64 = 300.0;
pub const DEFAULT_COARSE_STEP: f64 = 1e-3;
const GOLDEN_TOL: f64 = 1e-9;

/// Universal limit of the critical radius in dimension `d` with default search settings.
pub fn universal_limit(d: usize) -> Result<CritLimit> {
    crit_limit(d, DEFAULT_U_MAX, DEFAULT_COARSE_STEP)
}

/// Infimum over `(0, u_max]` of the profile ratio, together with the two analytic
/// endpoint limits. Coarse scan, then golden-section refinement of the best cell.
pub fn crit_limit(d: usize, u_max: f64, coarse_step: f64) -> Result<CritLimit> {
    check_dimension(d)?;
    if !(u_max >= 100.0) || !u_max.is_finite() {
        return domain(format!("u_max must be >= 100, got {u_max}"));
    }
    if !(coarse_step > 0.0 && coarse_step <= 0.01) {
        return domain(format!("coarse_step must lie in (0, 0.01], got {coarse_step}"));
    }

    let ratio = |u: f64| -> Result<f64> {
        let (d1, d2) = deltas(d, u);
        if !(d2 > 0.0) {
            return Err(Error::Numerical(format!(
                "Delta_2({u}) = {d2:e} <= 0 in dimension {d}"
            )));
        }
        Ok(d1 / d2.sqrt())
    };

    let steps = (u_max / coarse_step).floor() as usize;
    let mut best_i = 1;
    let mut best = f64::INFINITY;
    for i in 1..=steps {
        let r = ratio(i as f64 * coarse_step)?;
        if r < best {
            best = r;
            best_i = i;
        }
    }

    let lo = (best_i as f64 - 1.0) * coarse_step;
    let hi = ((best_i + 1) as f64 * coarse_step).min(u_max);
    let (u_star, interior) = golden_section(lo.max(coarse_step * 1e-3), hi, GOLDEN_TOL, |u| {
        ratio(u).unwrap_or(f64::INFINITY)
    });
    let interior = interior.min(best);
    let u_star = if interior < best { u_star } else { best_i as f64 * coarse_step };

    let near = near_diagonal_limit(d);
    let mut out = CritLimit { value: interior, argmin_u: u_star };
    if near <= out.value {
        out = CritLimit { value: near, argmin_u: 0.0 };
    }
    if FAR_FIELD_LIMIT < out.value {
        out = CritLimit { value: FAR_FIELD_LIMIT, argmin_u: f64::INFINITY };
    }
    Ok(out)
}

/// Golden-section minimisation on `[a, b]`; returns `(argmin, min)`.
pub(crate) fn golden_section(mut a: f64, mut b: f64, tol: f64, mut f: impl FnMut(f64) -> f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Large-deviation rate `log sin(theta) / ((4 pi)^(d/2) Gamma(d/2 + 1))`.
pub fn excursion_rate(d: usize, theta: f64) -> Result<f64> {
    if d == 0 {
        return domain("dimension must be >= 1");
    }
    if !(theta > 0.0 && theta <= std::f64::consts::FRAC_PI_2) {
        return domain(format!("theta must lie in (0, pi/2], got {theta}"));
    }
    let half = d as f64 / 2.0;
    let log_denominator = half * (4.0 * std::f64::consts::PI).ln() + libm::lgamma(half + 1.0);
    Ok(theta.sin().ln() / log_denominator.exp())
}

/// `log s_{b-1} = log(2 pi^(b/2) / Gamma(b/2))`, the log surface area of `S^{b-1}`.
pub fn log_sphere_area(b: u64) -> Result<f64> {
    if b < 1 {
        return domain("log_sphere_area needs b >= 1");
    }
    Ok(log_sphere_area_unchecked(b as f64))
}

pub(crate) fn log_sphere_area_unchecked(b: f64) -> f64 {
    std::f64::consts::LN_2 + 0.5 * b * std::f64::consts::PI.ln() - libm::lgamma(0.5 * b)
}
