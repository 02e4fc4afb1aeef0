//! Weyl's tube formula on spheres and exact excursion probabilities of the spherical
//! ensemble on flat tori, all in signed natural-log arithmetic.

mod quad;

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::linalg;
use crate::manifolds::{enumerate_basis, kernel_jet, ManifoldSpec, Point, SpectralCutoff};
use crate::specfun::{excursion_rate, log_sphere_area};

/// A real number stored as `sign * exp(ln_abs)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogValue {
    pub ln_abs: f64,
    /// -1, 0 or 1.
    pub sign: i8,
}

impl LogValue {
    pub const ZERO: Self = Self { ln_abs: f64::NEG_INFINITY, sign: 0 };

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self { ln_abs: x.abs().ln(), sign: if x > 0.0 { 1 } else { -1 } }
        }
    }

    pub fn value(self) -> f64 {
        f64::from(self.sign) * self.ln_abs.exp()
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    /// `self * exp(ln_c) * sign_c`.
    pub fn scale(self, ln_c: f64, sign_c: i8) -> Self {
        if self.is_zero() || sign_c == 0 {
            return Self::ZERO;
        }
        Self { ln_abs: self.ln_abs + ln_c, sign: self.sign * sign_c }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: Self) -> Self {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let (big, small) = if self.ln_abs >= other.ln_abs { (self, other) } else { (other, self) };
        let r = (small.ln_abs - big.ln_abs).exp();
        if big.sign == small.sign {
            Self { ln_abs: big.ln_abs + r.ln_1p(), sign: big.sign }
        } else if r == 1.0 {
            Self::ZERO
        } else {
            Self { ln_abs: big.ln_abs + (-r).ln_1p(), sign: big.sign }
        }
    }
}

fn check_theta_closed(theta: f64) -> Result<()> {
    if !(0.0..=FRAC_PI_2).contains(&theta) {
        return domain(format!("theta must lie in [0, pi/2], got {theta}"));
    }
    Ok(())
}

/// `G_{q,b}(theta) = s_{b-1} * int_0^theta cos^q(r) sin^(b-1)(r) dr`, where `s_{b-1}` is
/// the area of the unit sphere in `R^b`.
pub fn g_integral(q: u64, b: u64, theta: f64) -> Result<LogValue> {
    check_theta_closed(theta)?;
    if b < 1 {
        return domain("b must be at least 1");
    }
    if theta == 0.0 {
        return Ok(LogValue::ZERO);
    }
    let (qf, bm1) = (q as f64, (b - 1) as f64);
    let log_f = |r: f64| {
        let a = if q == 0 { 0.0 } else { qf * r.cos().ln() };
        let s = if b == 1 { 0.0 } else { bm1 * r.sin().ln() };
        a + s
    };
    // Peak of the integrand on [0, theta]: the interior maximiser of cos^q sin^(b-1) if it
    // lies inside, otherwise an end point.
    let peak = if b == 1 {
        0.0
    } else if q == 0 {
        theta
    } else {
        (bm1 / qf).sqrt().atan().min(theta)
    };
    let m = if peak == 0.0 { 0.0 } else { log_f(peak) };
    let mut breaks = vec![0.0];
    if peak > 0.0 && peak < theta {
        // Laplace width of the peak; extra break points keep the first pass on it.
        let width = 1.0 / (qf + bm1).sqrt();
        for off in [-16.0, -8.0, -4.0, -1.0, 0.0, 1.0, 4.0, 8.0, 16.0] {
            let p = peak + off * width;
            if p > 0.0 && p < theta {
                breaks.push(p);
            }
        }
    } else if peak == theta && b > 1 {
        let width = 1.0 / (1.0 + bm1 / theta.tan() + qf * theta.tan());
        for off in [64.0, 16.0, 4.0, 1.0] {
            let p = theta - off * width;
            if p > 0.0 {
                breaks.push(p);
            }
        }
    }
    breaks.push(theta);
    breaks.dedup();
    let integral = quad::integrate(|r| (log_f(r) - m).exp(), &breaks, 1e-11, 1e-300);
    if !(integral > 0.0) {
        return Ok(LogValue::ZERO);
    }
    Ok(LogValue { ln_abs: log_sphere_area(b)? + m + integral.ln(), sign: 1 })
}

fn ln_factorial(n: u64) -> f64 {
    libm::lgamma(n as f64 + 1.0)
}

/// `F_{N,j}(theta) = sum_k (-4 pi)^(-k) / k! * j! / (j - 2k)! * G_{j-2k, N-1+2k-j}(theta)`.
pub fn f_coeff(n: u64, j: u64, theta: f64) -> Result<LogValue> {
    check_theta_closed(theta)?;
    if n < 2 || j > n - 2 {
        return domain(format!("f_coeff needs 0 <= j <= N - 2, got N = {n}, j = {j}"));
    }
    let mut acc = LogValue::ZERO;
    for k in 0..=j / 2 {
        let g = g_integral(j - 2 * k, n - 1 + 2 * k - j, theta)?;
        let ln_c = -(k as f64) * (4.0 * PI).ln() - ln_factorial(k) + ln_factorial(j) - ln_factorial(j - 2 * k);
        let sign = if k % 2 == 0 { 1 } else { -1 };
        acc = acc.add(g.scale(ln_c, sign));
    }
    Ok(acc)
}

/// Inputs of the tube formula for a `d`-dimensional submanifold of `S^(N-1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeQuery {
    /// `N - 1`, the dimension of the ambient sphere.
    pub ambient_dim_minus1: u64,
    pub intrinsic_dim: usize,
    pub theta: f64,
    /// Lipschitz-Killing curvatures `L_0 .. L_d`.
    pub lk: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogTerm {
    pub j: usize,
    /// `F_{N,j}(theta) L_j / s_{N-1}`.
    pub value: LogValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogProbability {
    pub log_p: f64,
    pub terms: Vec<LogTerm>,
}

impl LogProbability {
    pub fn probability(&self) -> f64 {
        self.log_p.exp()
    }
}

/// Normalised tube volume `sum_j F_{N,j}(theta) L_j / s_{N-1}`; terms with `L_j = 0` are skipped.
pub fn tube_log_probability(query: &TubeQuery) -> Result<LogProbability> {
    let d = query.intrinsic_dim;
    let n = query.ambient_dim_minus1 + 1;
    if !(query.theta > 0.0 && query.theta < FRAC_PI_2) {
        return domain(format!("theta must lie in (0, pi/2), got {}", query.theta));
    }
    if query.lk.len() != d + 1 {
        return domain(format!("expected {} Lipschitz-Killing values, got {}", d + 1, query.lk.len()));
    }
    if !(query.lk[d] > 0.0) {
        return domain("L_d must be positive");
    }
    if (d as u64) + 2 > n {
        return domain(format!("ambient dimension N = {n} too small for d = {d}"));
    }
    let ln_area = log_sphere_area(n)?;
    let mut total = LogValue::ZERO;
    let mut terms = Vec::new();
    for (j, &l) in query.lk.iter().enumerate() {
        if l == 0.0 {
            continue;
        }
        let lv = LogValue::from_f64(l);
        let t = f_coeff(n, j as u64, query.theta)?.scale(lv.ln_abs - ln_area, lv.sign);
        terms.push(LogTerm { j, value: t });
        total = total.add(t);
    }
    if total.sign <= 0 {
        return Err(crate::Error::Numerical("tube volume is not positive".into()));
    }
    Ok(LogProbability { log_p: total.ln_abs, terms })
}

fn require_torus(spec: ManifoldSpec, cutoff: &SpectralCutoff) -> Result<usize> {
    match spec {
        ManifoldSpec::FlatTorus { dim } if cutoff.spec() == spec => Ok(dim),
        ManifoldSpec::FlatTorus { .. } => domain("cutoff built for a different manifold"),
        ManifoldSpec::Sphere2 => domain("exact tube quantities are only available on flat tori"),
    }
}

/// `L_0 .. L_d` of the embedded torus: the induced metric is flat, so only
/// `L_d = sqrt(det gram)` survives.
pub fn torus_lk(spec: ManifoldSpec, cutoff: &SpectralCutoff) -> Result<Vec<f64>> {
    let d = require_torus(spec, cutoff)?;
    let origin = Point::new(&vec![0.0; d])?;
    let gram = kernel_jet(spec, cutoff, &origin, &origin)?.gram;
    let mut lk = vec![0.0; d + 1];
    lk[d] = linalg::determinant(&gram, d).sqrt();
    Ok(lk)
}

/// Probability that the normalised spherical-ensemble wave exceeds `cos(theta)` somewhere
/// on the torus, from the tube formula. Valid only while `theta` is below the tube radius
/// of the embedded torus in `S^(k-1)`; checking that is left to the caller.
pub fn excursion_prob_exact(spec: ManifoldSpec, cutoff: &SpectralCutoff, theta: f64) -> Result<LogProbability> {
    let d = require_torus(spec, cutoff)?;
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        return domain(format!("theta must lie in (0, pi/2), got {theta}"));
    }
    let k = cutoff.k_lambda();
    if k < d + 3 {
        return domain(format!("k_lambda = {k} is below d + 3"));
    }
    let query = TubeQuery {
        ambient_dim_minus1: k as u64 - 1,
        intrinsic_dim: d,
        theta,
        lk: torus_lk(spec, cutoff)?,
    };
    tube_log_probability(&query)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdpPoint {
    pub lambda: f64,
    pub k_lambda: usize,
    pub log_p: f64,
    /// `lambda^(-d) log P`.
    pub scaled_log_p: f64,
    pub rate: f64,
    pub abs_gap: f64,
}

/// `lambda^(-d) log P_exact(lambda, theta)` for each `lambda`, beside the limiting rate.
pub fn ldp_curve(spec: ManifoldSpec, theta: f64, lambdas: &[f64]) -> Result<Vec<LdpPoint>> {
    if !spec.is_torus() {
        return domain("ldp_curve needs a flat torus");
    }
    let d = spec.dim();
    let rate = excursion_rate(d, theta)?;
    lambdas
        .par_iter()
        .map(|&lambda| {
            let cutoff = enumerate_basis(spec, lambda)?;
            let log_p = excursion_prob_exact(spec, &cutoff, theta)?.log_p;
            let scaled = log_p / lambda.powi(d as i32);
            Ok(LdpPoint {
                lambda,
                k_lambda: cutoff.k_lambda(),
                log_p,
                scaled_log_p: scaled,
                rate,
                abs_gap: (scaled - rate).abs(),
            })
        })
        .collect()
}
