//! The normalised kernel profile `B_d` and the two functions whose ratio
//! governs the critical radius away from the diagonal.

use serde::{Deserialize, Serialize};

use super::bessel::{bessel_j_unchecked, BesselOrder, SERIES_SWITCH};
use super::check_dimension;
use crate::error::{domain, Error, Result};

/// Below this `u`, `Delta_1` and `Delta_2` come from their own power series.
const DELTA_SERIES_SWITCH: f64 = 4.0;
const DELTA_SERIES_TERMS: usize = 40;

/// One evaluation of the critical-radius profile at scaled distance `u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioProfilePoint {
    pub u: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub ratio: f64,
}

/// `B_d(u) = Gamma(d/2+1) (2/u)^(d/2) J_{d/2}(u)`, with `B_d(0) = 1`.
pub fn b_profile(d: usize, u: f64) -> Result<f64> {
    check_dimension(d)?;
    check_argument(u)?;
    Ok(b_unchecked(d, u))
}

/// `B_d'(u)`, via `B_d'(u) = -u B_{d+2}(u) / (d+2)`.
pub fn b_profile_deriv(d: usize, u: f64) -> Result<f64> {
    check_dimension(d)?;
    check_argument(u)?;
    Ok(b_deriv_unchecked(d, u))
}

/// `Delta_1`, `Delta_2` and `Delta_1 / sqrt(Delta_2)` at `u > 0`.
pub fn ratio_profile(d: usize, u: f64) -> Result<RatioProfilePoint> {
    check_dimension(d)?;
    check_argument(u)?;
    if u == 0.0 {
        return domain("ratio_profile is 0/0 at u = 0; use near_diagonal_limit(d)");
    }
    let (delta1, delta2) = deltas(d, u);
    if !(delta2 > 0.0) {
        return Err(Error::Numerical(format!("Delta_2({u}) = {delta2:e} <= 0 for d = {d}")));
    }
    Ok(RatioProfilePoint { u, delta1, delta2, ratio: delta1 / delta2.sqrt() })
}

/// `sqrt((d+4) / (3(d+2)))`, the `u -> 0` limit of the ratio.
pub fn near_diagonal_limit(d: usize) -> f64 {
    let d = d as f64;
    ((d + 4.0) / (3.0 * (d + 2.0))).sqrt()
}

/// `1/sqrt(2)`, the `u -> infinity` limit of the ratio.
pub const FAR_FIELD_LIMIT: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn check_argument(u: f64) -> Result<()> {
    if !(u >= 0.0) || !u.is_finite() {
        return domain(format!("profile argument must be finite and >= 0, got {u}"));
    }
    Ok(())
}

/// Taylor coefficients of `B_d(u) = sum_j c_j u^(2j)`.
fn b_coefficients(d: usize, n: usize) -> Vec<f64> {
    let half = d as f64 / 2.0;
    let mut c = Vec::with_capacity(n);
    c.push(1.0);
    for j in 1..n {
        let jf = j as f64;
        let prev = c[j - 1];
        c.push(-prev / (4.0 * jf * (jf + half)));
    }
    c
}

pub(crate) fn b_unchecked(d: usize, u: f64) -> f64 {
    let half = d as f64 / 2.0;
    if u <= SERIES_SWITCH {
        // Same series as J_{d/2}, with the (u/2)^(d/2)/Gamma(d/2+1) prefactor cancelled.
        super::bessel::reduced_series(half, u)
    } else {
        let order = BesselOrder::new(d as u32).expect("dimension checked by caller");
        let j = bessel_j_unchecked(order, u);
        let log_pref = libm::lgamma(half + 1.0) + half * (2.0 / u).ln();
        log_pref.exp() * j
    }
}

pub(crate) fn b_deriv_unchecked(d: usize, u: f64) -> f64 {
    -u * b_unchecked(d + 2, u) / (d as f64 + 2.0)
}

/// `(Delta_1(u), Delta_2(u))` for `u > 0`.
pub(crate) fn deltas(d: usize, u: f64) -> (f64, f64) {
    if u <= DELTA_SERIES_SWITCH {
        return deltas_series(d, u);
    }
    let b = b_unchecked(d, u);
    let bp = b_deriv_unchecked(d, u);
    let dp2 = d as f64 + 2.0;
    (1.0 - b, 2.0 - 2.0 * b - dp2 * bp * bp)
}

/// Power series of both functions; the `u^2` terms of `Delta_2` cancel exactly and
/// are never formed.
fn deltas_series(d: usize, u: f64) -> (f64, f64) {
    let n = DELTA_SERIES_TERMS;
    let c = b_coefficients(d, n + 1);
    let dp2 = d as f64 + 2.0;
    let u2 = u * u;

    let mut delta1 = 0.0;
    let mut pow = 1.0;
    for cj in c.iter().take(n).skip(1) {
        pow *= u2;
        delta1 -= cj * pow;
    }

    // (B')^2 = sum_{m>=2} u^(2m-2) e_m,  e_m = sum_{i+j=m, i,j>=1} 4 i j c_i c_j.
    // Coefficient of u^(2p) in Delta_2 is -2 c_p - (d+2) e_{p+1}, zero for p = 1.
    let mut delta2 = 0.0;
    let mut pow = u2;
    for p in 2..n {
        pow *= u2;
        let m = p + 1;
        let mut e = 0.0;
        for i in 1..m {
            let j = m - i;
            e += 4.0 * (i * j) as f64 * c[i] * c[j];
        }
        let coef = -2.0 * c[p] - dp2 * e;
        delta2 += coef * pow;
        if (coef * pow).abs() < 1e-18 * delta2.abs() && p > 4 {
            break;
        }
    }
    (delta1, delta2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn profile_examples() {
        for d in 1..=25 {
            assert_eq!(b_profile(d, 0.0).unwrap(), 1.0);
            assert_eq!(b_profile_deriv(d, 0.0).unwrap(), 0.0);
        }
        assert!(b_profile(1, PI).unwrap().abs() < 1e-15);
        let b3 = b_profile(3, 1.0).unwrap();
        let closed = 3.0 * (1f64.sin() - 1f64.cos());
        assert!((b3 - closed).abs() < 1e-14);
        assert!((b3 - 0.903506).abs() < 1e-6);
    }

    #[test]
    fn derivative_examples() {
        let u = PI / 2.0;
        let got = b_profile_deriv(1, u).unwrap();
        let closed = (u * u.cos() - u.sin()) / (u * u);
        assert!((got - closed).abs() < 1e-14);
        assert!((got + 4.0 / (PI * PI)).abs() < 1e-14);

        let h = 1e-5;
        let fd = (b_profile(2, 0.5 + h).unwrap() - b_profile(2, 0.5 - h).unwrap()) / (2.0 * h);
        assert!((fd - b_profile_deriv(2, 0.5).unwrap()).abs() <= 1e-7);
    }

    #[test]
    fn closed_forms_across_the_series_switch() {
        // B_1 = sin u / u, B_3 = 3 (sin u - u cos u) / u^3
        for &u in &[0.3f64, 5.0, 11.99, 12.01, 30.0, 250.0] {
            let b1 = u.sin() / u;
            let b3 = 3.0 * (u.sin() - u * u.cos()) / (u * u * u);
            assert!((b_profile(1, u).unwrap() - b1).abs() < 1e-12, "u={u}");
            assert!((b_profile(3, u).unwrap() - b3).abs() < 1e-12, "u={u}");
        }
    }

    #[test]
    fn delta_series_matches_direct_formula_where_both_are_accurate() {
        for d in [1usize, 2, 5, 12, 25] {
            for &u in &[2.5, 3.0, 3.9] {
                let (s1, s2) = deltas_series(d, u);
                let b = b_unchecked(d, u);
                let bp = b_deriv_unchecked(d, u);
                let direct2 = 2.0 - 2.0 * b - (d as f64 + 2.0) * bp * bp;
                assert!((s1 - (1.0 - b)).abs() < 1e-13, "d={d} u={u}");
                assert!((s2 - direct2).abs() < 1e-12 * direct2.abs().max(1e-3), "d={d} u={u}: {s2} vs {direct2}");
            }
        }
    }

    #[test]
    fn ratio_limits() {
        let p = ratio_profile(1, 1e-4).unwrap();
        assert!((p.ratio - (5.0f64 / 9.0).sqrt()).abs() < 1e-4);
        assert!((p.ratio - 0.745356).abs() < 1e-4);
        let far = ratio_profile(2, 200.0).unwrap();
        assert!((far.ratio - FAR_FIELD_LIMIT).abs() < 0.02);
        for d in 1..=10 {
            let r = ratio_profile(d, 1e-3).unwrap().ratio;
            assert!((r - near_diagonal_limit(d)).abs() < 1e-3, "d={d}");
        }
        assert!(ratio_profile(1, 0.0).is_err());
    }

    #[test]
    fn deltas_against_finite_differences_at_u5_d3() {
        let (d, u, h) = (3usize, 5.0, 1e-5);
        let p = ratio_profile(d, u).unwrap();
        let b = |x: f64| 3.0 * (x.sin() - x * x.cos()) / (x * x * x);
        let fd = (b(u + h) - b(u - h)) / (2.0 * h);
        let d1 = 1.0 - b(u);
        let d2 = 2.0 - 2.0 * b(u) - 5.0 * fd * fd;
        assert!((p.delta1 - d1).abs() <= 1e-6);
        assert!((p.delta2 - d2).abs() <= 1e-6);
    }

    #[test]
    fn delta2_coefficient_forms_agree() {
        for d in 1..=25 {
            let half = d as f64 / 2.0;
            let a = (d as f64 + 2.0) * libm::tgamma(half + 1.0).powi(2);
            let b = 2.0 * libm::tgamma(half + 2.0) * libm::tgamma(half + 1.0);
            assert!((a - b).abs() <= 1e-12 * a, "d={d}");
        }
    }
}
