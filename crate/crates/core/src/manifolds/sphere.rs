//! Round sphere of unit area: Legendre sums and fully normalised associated Legendre functions.

use super::{sphere_eigenvalue, KernelJet, ManifoldSpec, Mode, SpectralCutoff, MAX_MODES, SPHERE_RADIUS};
use crate::error::{Error, Result};

pub(super) fn build(l_max: usize, lambda: f64) -> Result<SpectralCutoff> {
    let k = (l_max as u64 + 1).pow(2);
    if k > MAX_MODES as u64 {
        return Err(Error::Resource { k_lambda: k as usize, limit: MAX_MODES });
    }
    let mut modes = Vec::with_capacity(k as usize);
    let mut eigenvalues = Vec::with_capacity(k as usize);
    for l in 0..=l_max as u32 {
        let ev = sphere_eigenvalue(u64::from(l));
        modes.push(Mode::Harmonic { degree: l, order: 0 });
        for m in 1..=l as i32 {
            modes.push(Mode::Harmonic { degree: l, order: m });
            modes.push(Mode::Harmonic { degree: l, order: -m });
        }
        eigenvalues.extend(std::iter::repeat(ev).take(2 * l as usize + 1));
    }
    Ok(SpectralCutoff {
        spec: ManifoldSpec::Sphere2,
        lambda,
        k_lambda: k as usize,
        modes,
        eigenvalues,
        radius_sq: 0,
        l_max,
        half_freqs: Vec::new(),
        second_moment: [[0.0; 3]; 3],
    })
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: &[f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// Angle between unit vectors, accurate at both ends.
pub(super) fn angle(x: &[f64; 3], y: &[f64; 3]) -> f64 {
    norm(&cross(x, y)).atan2(dot(x, y))
}

/// Deterministic orthonormal tangent frame at `y`, with `e1 x e2 = y`.
pub(super) fn frame(y: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    let mut axis = 0;
    for i in 1..3 {
        if y[i].abs() < y[axis].abs() {
            axis = i;
        }
    }
    let mut a = [0.0; 3];
    a[axis] = 1.0;
    let ay = dot(&a, y);
    let mut e1 = [a[0] - ay * y[0], a[1] - ay * y[1], a[2] - ay * y[2]];
    let n = norm(&e1);
    e1 = e1.map(|v| v / n);
    let e2 = cross(y, &e1);
    (e1, e2)
}

/// Legendre data at `z = cos(g)`: `P_l`, `Q_l = 1 - P_l` (from `h = 1 - z`) and `P_l'`.
struct Legendre {
    p: Vec<f64>,
    q: Vec<f64>,
    dp: Vec<f64>,
}

fn legendre(g: f64, l_max: usize) -> Legendre {
    let z = g.cos();
    let sh = (0.5 * g).sin();
    let h = 2.0 * sh * sh;
    let mut p = vec![0.0; l_max + 1];
    let mut q = vec![0.0; l_max + 1];
    let mut dp = vec![0.0; l_max + 1];
    p[0] = 1.0;
    if l_max >= 1 {
        p[1] = z;
        q[1] = h;
        dp[1] = 1.0;
    }
    for l in 1..l_max {
        let lf = l as f64;
        p[l + 1] = ((2.0 * lf + 1.0) * z * p[l] - lf * p[l - 1]) / (lf + 1.0);
        q[l + 1] = ((2.0 * lf + 1.0) * (h + q[l] - h * q[l]) - lf * q[l - 1]) / (lf + 1.0);
        dp[l + 1] = dp[l - 1] + (2.0 * lf + 1.0) * p[l];
    }
    Legendre { p, q, dp }
}

#[inline]
fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// `sqrt((2l+1)(l-m)!/(l+m)!) P_l^m(z)` for all `m <= l <= l_max`, with `s = sqrt(1 - z^2)`
/// passed separately so the sectoral seeds keep full relative accuracy.
fn normalized_assoc(z: f64, s: f64, l_max: usize) -> Vec<f64> {
    let mut out = vec![0.0; tri(l_max, l_max) + 1];
    let mut sectoral = 1.0;
    for m in 0..=l_max {
        let mf = m as f64;
        if m > 0 {
            sectoral *= s * ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt();
        }
        out[tri(m, m)] = sectoral;
        if m == l_max {
            break;
        }
        out[tri(m + 1, m)] = (2.0 * mf + 3.0).sqrt() * z * sectoral;
        for l in m + 2..=l_max {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            out[tri(l, m)] = a * (z * out[tri(l - 1, m)] - b * out[tri(l - 2, m)]);
        }
    }
    out
}

pub(super) fn jet(c: &SpectralCutoff, x: &[f64; 3], y: &[f64; 3]) -> KernelJet {
    let k = c.k_lambda as f64;
    let g = angle(x, y);
    let leg = legendre(g, c.l_max);
    let mut p = 0.0;
    let mut q = 0.0;
    let mut dp = 0.0;
    let mut lap = 0.0;
    for l in 0..=c.l_max {
        let w = 2.0 * l as f64 + 1.0;
        p += w * leg.p[l];
        q += w * leg.q[l];
        dp += w * leg.dp[l];
        lap += w * (l * (l + 1)) as f64;
    }
    let (e1, e2) = frame(y);
    let (a1, a2) = (dot(x, &e1), dot(x, &e2));
    let sa = a1.hypot(a2);
    // Direction from the frame, magnitude from the same angle that feeds the Legendre sums.
    let (u1, u2) = if sa > 1e-300 { (a1 / sa, a2 / sa) } else { (0.0, 0.0) };
    let inv_r = 1.0 / SPHERE_RADIUS;
    let slope = dp * g.sin() * inv_r / k;
    let g_diag = lap * 0.5 * inv_r * inv_r / k;
    let mut gram = [[0.0; 3]; 3];
    gram[0][0] = g_diag;
    gram[1][1] = g_diag;
    KernelJet {
        p: p / k,
        one_minus_p: q / k,
        grad_y: [slope * u1, slope * u2, 0.0],
        gram,
        geodesic: SPHERE_RADIUS * g,
        dim: 2,
    }
}

/// Normal residual in the rotated frame where `y` is the pole and `x` lies at azimuth 0:
/// order 0 contributes `Q_l`, order 1 the cosine part minus the tangent column, the sine
/// part of order 1 only the tangent component orthogonal to the `y -> x` direction, and
/// orders `>= 2` their full value.
pub(super) fn normal_sq(c: &SpectralCutoff, x: &[f64; 3], y: &[f64; 3], coeffs: &[f64; 3]) -> f64 {
    let g = angle(x, y);
    let (s, z) = g.sin_cos();
    let (e1, e2) = frame(y);
    let (a1, a2) = (dot(x, &e1), dot(x, &e2));
    let sa = (a1 * a1 + a2 * a2).sqrt();
    let (c_par, c_perp) = if sa > 1e-300 {
        ((coeffs[0] * a1 + coeffs[1] * a2) / sa, (coeffs[1] * a1 - coeffs[0] * a2) / sa)
    } else {
        (coeffs[0].hypot(coeffs[1]), 0.0)
    };
    let leg = legendre(g, c.l_max);
    let pbar = normalized_assoc(z, s, c.l_max);
    let inv_r = 1.0 / SPHERE_RADIUS;
    let mut acc = 0.0;
    for l in 0..=c.l_max {
        let lf = l as f64;
        acc += (2.0 * lf + 1.0) * leg.q[l] * leg.q[l];
        if l == 0 {
            continue;
        }
        let tau = ((2.0 * lf + 1.0) * lf * (lf + 1.0) * 0.5).sqrt() * inv_r;
        let r1 = std::f64::consts::SQRT_2 * pbar[tri(l, 1)] - c_par * tau;
        acc += r1 * r1 + c_perp * c_perp * tau * tau;
        for m in 2..=l {
            let v = pbar[tri(l, m)];
            acc += 2.0 * v * v;
        }
    }
    acc / c.k_lambda as f64
}

pub(super) fn embedding_into(c: &SpectralCutoff, x: &[f64; 3], out: &mut [f64]) {
    let inv = 1.0 / (c.k_lambda as f64).sqrt();
    let z = x[2];
    let s = x[0].hypot(x[1]);
    let phi = x[1].atan2(x[0]);
    let pbar = normalized_assoc(z, s, c.l_max);
    let mut idx = 0;
    for l in 0..=c.l_max {
        out[idx] = pbar[tri(l, 0)] * inv;
        idx += 1;
        for m in 1..=l {
            let (sm, cm) = (m as f64 * phi).sin_cos();
            let v = std::f64::consts::SQRT_2 * pbar[tri(l, m)] * inv;
            out[idx] = v * cm;
            out[idx + 1] = v * sm;
            idx += 2;
        }
    }
}
