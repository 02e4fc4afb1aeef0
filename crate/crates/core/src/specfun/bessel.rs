//! Bessel functions of the first kind for the orders `nu = d/2` used by the
//! kernel profiles (`1 <= d <= 25`) plus the shifted order `nu + 1`.

use std::f64::consts::{FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Power series is used at or below this argument for every order.
pub const SERIES_SWITCH: f64 = 12.0;
/// Integer orders: Miller recurrence on `(12, 40]`, Hankel expansion above.
const HANKEL_SWITCH: f64 = 40.0;

/// Order `nu = two_nu / 2` of a Bessel function, stored exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BesselOrder {
    two_nu: u32,
}

impl BesselOrder {
    /// Largest supported `2 nu`: dimension 25 needs `nu + 1 = 13.5`.
    pub const MAX_TWO_NU: u32 = 27;

    pub fn new(two_nu: u32) -> Result<Self> {
        if two_nu > Self::MAX_TWO_NU {
            return domain(format!(
                "Bessel order {}/2 exceeds the supported maximum {}/2",
                two_nu,
                Self::MAX_TWO_NU
            ));
        }
        Ok(Self { two_nu })
    }

    /// The order `d/2` attached to dimension `d`.
    pub fn for_dimension(d: usize) -> Result<Self> {
        if d == 0 || d > super::MAX_DIMENSION {
            return domain(format!("dimension {d} outside 1..={}", super::MAX_DIMENSION));
        }
        Self::new(d as u32)
    }

    pub fn two_nu(self) -> u32 {
        self.two_nu
    }

    pub fn nu(self) -> f64 {
        f64::from(self.two_nu) / 2.0
    }

    pub fn is_half_integer(self) -> bool {
        self.two_nu % 2 == 1
    }
}

/// `J_nu(u)` for `u >= 0`.
pub fn bessel_j(order: BesselOrder, u: f64) -> Result<f64> {
    if !(u >= 0.0) || !u.is_finite() {
        return domain(format!("Bessel argument must be finite and >= 0, got {u}"));
    }
    Ok(bessel_j_unchecked(order, u))
}

pub(crate) fn bessel_j_unchecked(order: BesselOrder, u: f64) -> f64 {
    if u <= SERIES_SWITCH {
        series(order.nu(), u)
    } else if order.is_half_integer() {
        half_integer_closed_form(order.two_nu / 2, u)
    } else if u <= HANKEL_SWITCH {
        miller(order.two_nu / 2, u)
    } else {
        hankel_asymptotic(order.nu(), u)
    }
}

/// Ascending series `sum_j (-1)^j (u/2)^(2j+nu) / (j! Gamma(j+nu+1))`.
pub(crate) fn series(nu: f64, u: f64) -> f64 {
    if u == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    let lead = (nu * (0.5 * u).ln() - libm::lgamma(nu + 1.0)).exp();
    lead * reduced_series(nu, u)
}

/// `sum_j (-u^2/4)^j / (j! (nu+1)_j)`, i.e. the series with its leading power removed.
pub(crate) fn reduced_series(nu: f64, u: f64) -> f64 {
    let q = -0.25 * u * u;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut j = 0.0;
    loop {
        j += 1.0;
        term *= q / (j * (j + nu));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs().max(1e-300) && j > 0.5 * u {
            break;
        }
        if j > 500.0 {
            break;
        }
    }
    sum
}

/// Finite Hankel sum for `J_{n+1/2}`; exact, accurate once `u` exceeds the order.
fn half_integer_closed_form(n: u32, u: f64) -> f64 {
    let (s, c) = u.sin_cos();
    // sin(u - n pi/2), cos(u - n pi/2)
    let (sn, cn) = match n % 4 {
        0 => (s, c),
        1 => (-c, s),
        2 => (-s, -c),
        _ => (c, -s),
    };
    let nf = f64::from(n);
    let mut a = 1.0;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut upow = 1.0;
    for k in 1..=n {
        let kf = f64::from(k);
        a *= (nf + kf) * (nf - kf + 1.0) / (2.0 * kf);
        upow *= u;
        let t = a / upow;
        match k % 4 {
            0 => p += t,
            1 => q += t,
            2 => p -= t,
            _ => q -= t,
        }
    }
    (2.0 / (PI * u)).sqrt() * (p * sn + q * cn)
}

/// Miller's backward recurrence normalised by `J_0 + 2 sum_k J_2k = 1`.
fn miller(n: u32, u: f64) -> f64 {
    let top = (n as f64).max(u);
    let mut m = (top + 16.0 + (40.0 * top).sqrt()) as u32;
    m += m % 2;
    let mut next = 0.0; // j_{m+1}
    let mut cur = 1e-30; // j_m
    let mut norm = 0.0;
    let mut wanted = if n == m { cur } else { 0.0 };
    for k in (1..=m).rev() {
        let prev = 2.0 * f64::from(k) / u * cur - next;
        next = cur;
        cur = prev;
        // cur now holds j_{k-1}
        if (k - 1) % 2 == 0 && k > 1 {
            norm += 2.0 * cur;
        }
        if k - 1 == n {
            wanted = cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            wanted *= 1e-250;
        }
    }
    norm += cur;
    wanted / norm
}

/// Hankel asymptotic expansion, truncated at the smallest term.
fn hankel_asymptotic(nu: f64, u: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut last = f64::INFINITY;
    for k in 1..200u32 {
        let kf = f64::from(k);
        let odd = 2.0 * kf - 1.0;
        term *= (mu - odd * odd) / (kf * 8.0 * u);
        let mag = term.abs();
        // Terms may grow until (2k-1)^2 passes 4 nu^2; only then is growth divergence.
        if mag < 1e-18 || (odd * odd > mu && mag >= last) {
            break;
        }
        last = mag;
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
    }
    // chi = u - (nu/2 + 1/4) pi, combined via angle-sum to avoid subtracting a large phase.
    let phase = (0.5 * nu) * PI + FRAC_PI_4;
    let (su, cu) = u.sin_cos();
    let (sp, cp) = phase.sin_cos();
    let cos_chi = cu * cp + su * sp;
    let sin_chi = su * cp - cu * sp;
    (2.0 / (PI * u)).sqrt() * (p * cos_chi - q * sin_chi)
}
