//! Flat tori: lattice enumeration and trigonometric kernel sums.

use std::f64::consts::PI;

use super::{torus_eigenvalue, KernelJet, ManifoldSpec, Mode, Point, SpectralCutoff, MAX_MODES};
use crate::error::{Error, Result};

fn isqrt(m: u64) -> u64 {
    let mut r = (m as f64).sqrt() as u64;
    while r * r > m {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= m {
        r += 1;
    }
    r
}

/// Number of lattice points with `|n|^2 <= m` in dimension `dim`.
fn lattice_count(dim: usize, m: u64) -> u64 {
    let r = isqrt(m) as i64;
    match dim {
        1 => 2 * r as u64 + 1,
        2 => (-r..=r).map(|a| 2 * isqrt(m - (a * a) as u64) + 1).sum(),
        _ => (-r..=r)
            .map(|a| {
                let m1 = m - (a * a) as u64;
                let r1 = isqrt(m1) as i64;
                (-r1..=r1).map(|b| 2 * isqrt(m1 - (b * b) as u64) + 1).sum::<u64>()
            })
            .sum(),
    }
}

fn positive_half(n: &[i32; 3]) -> bool {
    n.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)
}

pub(super) fn build(dim: usize, radius_sq: u64, lambda: f64) -> Result<SpectralCutoff> {
    let spec = ManifoldSpec::flat_torus(dim)?;
    let count = lattice_count(dim, radius_sq);
    if count > MAX_MODES as u64 {
        return Err(Error::Resource { k_lambda: count as usize, limit: MAX_MODES });
    }
    let r = isqrt(radius_sq) as i32;
    let span = |active: bool| if active { -r..=r } else { 0..=0 };
    let mut modes = Vec::with_capacity(count as usize);
    let mut eigenvalues = Vec::with_capacity(count as usize);
    let mut half_freqs = Vec::with_capacity(count as usize / 2);
    let mut moment = [[0.0; 3]; 3];
    for a in span(true) {
        for b in span(dim >= 2) {
            for c in span(dim >= 3) {
                let n = [a, b, c];
                let norm_sq = n.iter().map(|&v| (v as i64 * v as i64) as u64).sum::<u64>();
                if norm_sq > radius_sq {
                    continue;
                }
                for i in 0..3 {
                    for j in 0..3 {
                        moment[i][j] += f64::from(n[i]) * f64::from(n[j]);
                    }
                }
                let ev = torus_eigenvalue(norm_sq);
                if norm_sq == 0 {
                    modes.push(Mode::Constant);
                    eigenvalues.push(0.0);
                } else if positive_half(&n) {
                    modes.push(Mode::Cos(n));
                    modes.push(Mode::Sin(n));
                    eigenvalues.push(ev);
                    eigenvalues.push(ev);
                    half_freqs.push(n.map(|v| 2.0 * PI * f64::from(v)));
                }
            }
        }
    }
    debug_assert_eq!(modes.len() as u64, count);
    Ok(SpectralCutoff {
        spec,
        lambda,
        k_lambda: modes.len(),
        modes,
        eigenvalues,
        radius_sq,
        l_max: 0,
        half_freqs,
        second_moment: moment,
    })
}

/// Minimal-image separation `x - y`, each component in `[-1/2, 1/2]`.
pub(super) fn separation(x: &Point, y: &Point, dim: usize) -> [f64; 3] {
    let mut t = [0.0; 3];
    for i in 0..dim {
        let v = x.raw()[i] - y.raw()[i];
        t[i] = v - v.round();
    }
    t
}

#[inline]
fn phase(f: &[f64; 3], t: &[f64; 3]) -> f64 {
    f[0] * t[0] + f[1] * t[1] + f[2] * t[2]
}

pub(super) fn jet(c: &SpectralCutoff, t: &[f64; 3]) -> KernelJet {
    let k = c.k_lambda as f64;
    let mut cos_sum = 0.0;
    let mut half_sin_sq = 0.0;
    let mut grad = [0.0; 3];
    for f in &c.half_freqs {
        let th = phase(f, t);
        let (s, co) = th.sin_cos();
        let sh = (0.5 * th).sin();
        cos_sum += co;
        half_sin_sq += sh * sh;
        for i in 0..3 {
            grad[i] += f[i] * s;
        }
    }
    let scale = 4.0 * PI * PI / k;
    let mut gram = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            gram[i][j] = scale * c.second_moment[i][j];
        }
    }
    let dim = c.dim();
    let dist = t[..dim].iter().map(|v| v * v).sum::<f64>().sqrt();
    KernelJet {
        p: (1.0 + 2.0 * cos_sum) / k,
        one_minus_p: 4.0 * half_sin_sq / k,
        grad_y: grad.map(|g| 2.0 * g / k),
        gram,
        geodesic: dist,
        dim,
    }
}

/// `|P_y^perp (i(x) - i(y))|^2` for tangent coefficients `coeffs`, evaluated in the
/// frame `y = 0` where cosine components carry `cos(th) - 1` and sine components `sin(th)`.
pub(super) fn normal_sq(c: &SpectralCutoff, t: &[f64; 3], coeffs: &[f64; 3]) -> f64 {
    let mut acc = 0.0;
    for f in &c.half_freqs {
        let th = phase(f, t);
        let sh = (0.5 * th).sin();
        let sh2 = sh * sh;
        let r = th.sin() - phase(f, coeffs);
        acc += 4.0 * sh2 * sh2 + r * r;
    }
    2.0 * acc / c.k_lambda as f64
}

pub(super) fn embedding_into(c: &SpectralCutoff, x: &[f64; 3], out: &mut [f64]) {
    let k = c.k_lambda as f64;
    let a = (2.0 / k).sqrt();
    let mut idx = 0;
    let mut h = 0;
    for mode in &c.modes {
        match mode {
            Mode::Constant => {
                out[idx] = 1.0 / k.sqrt();
                idx += 1;
            }
            Mode::Cos(_) => {
                let (s, co) = phase(&c.half_freqs[h], x).sin_cos();
                out[idx] = a * co;
                out[idx + 1] = a * s;
                idx += 2;
                h += 1;
            }
            Mode::Sin(_) => {}
            Mode::Harmonic { .. } => unreachable!("torus cutoff holds no harmonics"),
        }
    }
}
