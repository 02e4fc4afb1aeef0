//! Acceptance suite. Each test checks one criterion at its stated tolerance and writes a
//! single PASS/FAIL line to stderr (uncaptured, so it shows without `--nocapture`).
//!
//! Run with `cargo test --release -p wavecrit-core --test acceptance`.

use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wavecrit_core::embedding::{critical_radius, local_ratio_inf, ratio_at, SearchConfig};
use wavecrit_core::manifolds::{
    kernel_jet, move_along, point_at_distance, random_point, weyl_diagnostics, ManifoldSpec, Point, SpectralCutoff,
};
use wavecrit_core::montecarlo::{estimate_excursion, euler_char_circle, sample_arcs, sample_sups, MCConfig};
use wavecrit_core::specfun::{
    bessel_j, b_profile_deriv, BesselOrder, crit_limit, excursion_rate, near_diagonal_limit, ratio_profile, DEFAULT_U_MAX,
};
use wavecrit_core::tube::{excursion_prob_exact, ldp_curve, torus_lk};

fn report(id: u32, name: &str, ok: bool, started: Instant, detail: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    let line = format!("criterion {id} {verdict} ({:.1}s) {name}: {detail}\n", started.elapsed().as_secs_f64());
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(ok, "criterion {id} ({name}) failed: {detail}");
}

fn circle(n: u32) -> (ManifoldSpec, SpectralCutoff) {
    let spec = ManifoldSpec::circle();
    (spec, SpectralCutoff::with_frequency_cap(spec, n).unwrap())
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// Independent evaluation of the kernel profile ratio: Bessel series below u = 20, the
/// Hankel expansion above, and the series of Delta_1, Delta_2 themselves below u = 3.
mod oracle {
    fn gamma(x: f64) -> f64 {
        libm::tgamma(x)
    }

    fn j_series(nu: f64, u: f64) -> f64 {
        let x = 0.25 * u * u;
        let mut term = (0.5 * u).powf(nu) / gamma(nu + 1.0);
        let mut sum = term;
        for j in 1..200 {
            term *= -x / (j as f64 * (j as f64 + nu));
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    }

    fn j_hankel(nu: f64, u: f64) -> f64 {
        let mu = 4.0 * nu * nu;
        let (mut p, mut q) = (0.0, 0.0);
        let mut a = 1.0;
        let mut last = f64::INFINITY;
        for k in 0..60 {
            let t = a / u.powi(k);
            if t.abs() > last || t.abs() < 1e-18 {
                break;
            }
            last = t.abs();
            let sgn = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            if k % 2 == 0 {
                p += sgn * t;
            } else {
                q += sgn * t;
            }
            let odd = (2 * k + 1) as f64;
            a *= (mu - odd * odd) / ((k + 1) as f64 * 8.0);
        }
        let chi = u - (0.5 * nu + 0.25) * std::f64::consts::PI;
        (2.0 / (std::f64::consts::PI * u)).sqrt() * (p * chi.cos() - q * chi.sin())
    }

    fn b(d: usize, u: f64) -> f64 {
        let nu = d as f64 / 2.0;
        let j = if u <= 20.0 { j_series(nu, u) } else { j_hankel(nu, u) };
        gamma(nu + 1.0) * (2.0 / u).powf(nu) * j
    }

    pub struct Series {
        d1: Vec<f64>,
        d2: Vec<f64>,
    }

    pub fn series(d: usize) -> Series {
        let nu = d as f64 / 2.0;
        let n = 40;
        let mut c = vec![1.0; n + 2];
        for j in 1..n + 2 {
            c[j] = c[j - 1] * -0.25 / (j as f64 * (j as f64 + nu));
        }
        // B' = sum_i 2 i c_i u^(2i - 1); (B')^2 coefficient of u^(2m) pairs i + l = m + 1.
        let mut d2 = vec![0.0; n + 1];
        for m in 1..=n {
            let mut e = 0.0;
            for i in 1..=m {
                let l = m + 1 - i;
                e += 4.0 * (i * l) as f64 * c[i] * c[l];
            }
            d2[m] = -2.0 * c[m] - (d as f64 + 2.0) * e;
        }
        let d1 = (0..=n).map(|m| if m == 0 { 0.0 } else { -c[m] }).collect();
        Series { d1, d2 }
    }

    pub fn ratio(d: usize, s: &Series, u: f64) -> f64 {
        if u < 3.0 {
            let x = u * u;
            let (mut a, mut b) = (0.0, 0.0);
            let mut p = 1.0;
            for m in 0..s.d1.len() {
                a += s.d1[m] * p;
                b += s.d2[m] * p;
                p *= x;
            }
            return a / b.sqrt();
        }
        let bd = b(d, u);
        let db = -u * b(d + 2, u) / (d as f64 + 2.0);
        (1.0 - bd) / (2.0 - 2.0 * bd - (d as f64 + 2.0) * db * db).sqrt()
    }
}

#[test]
fn criterion_1_universal_limit() {
    let t0 = Instant::now();
    let mut ok = true;
    let mut detail = String::new();
    for d in 1..=5usize {
        let lim = crit_limit(d, DEFAULT_U_MAX, 1e-4).unwrap();
        let s = oracle::series(d);
        let step = 1e-5;
        let n = (DEFAULT_U_MAX / step).round() as usize;
        let dense = (1..=n).map(|i| oracle::ratio(d, &s, i as f64 * step)).fold(f64::INFINITY, f64::min);
        let r0 = ((d as f64 + 4.0) / (3.0 * (d as f64 + 2.0))).sqrt();
        let err = (lim.value - dense).abs();
        let r0_err = (near_diagonal_limit(d) - r0).abs();
        ok &= err <= 1e-6 && r0_err <= 1e-12;
        detail += &format!("d={d}: {:.9} vs grid {:.9} (u*={:.4}); ", lim.value, dense, lim.argmin_u);
    }
    report(1, "universal limit vs dense-grid oracle", ok, t0, &detail);
}

#[test]
fn criterion_2_near_diagonal_ratio() {
    let t0 = Instant::now();
    let mut ok = true;
    let mut detail = String::new();
    let cases = [(ManifoldSpec::circle(), [100u32, 200], 0.02), (ManifoldSpec::flat_torus(2).unwrap(), [30, 60], 0.05)];
    for (spec, caps, tol) in cases {
        let lim = near_diagonal_limit(spec.dim());
        let devs: Vec<f64> = caps
            .iter()
            .map(|&n| {
                let c = SpectralCutoff::with_frequency_cap(spec, n).unwrap();
                let r = local_ratio_inf(spec, &c).unwrap();
                ((r.value - lim) / lim).abs()
            })
            .collect();
        ok &= devs[1] <= tol && devs[1] < devs[0];
        detail += &format!("T^{} N={:?} rel dev {:.2e} -> {:.2e} (tol {tol}); ", spec.dim(), caps, devs[0], devs[1]);
    }
    report(2, "local ratio infimum near the diagonal", ok, t0, &detail);
}

#[test]
fn criterion_3_critical_radius_convergence() {
    let t0 = Instant::now();
    let lim = crit_limit(1, DEFAULT_U_MAX, 1e-4).unwrap().value;
    let errs: Vec<f64> = [25u32, 50, 100, 200]
        .iter()
        .map(|&n| {
            let (spec, c) = circle(n);
            let est = critical_radius(spec, &c, &SearchConfig::default()).unwrap();
            ((est.r_lambda - lim) / lim).abs()
        })
        .collect();
    let ok = errs[3] <= 0.03 && strictly_decreasing(&errs);
    report(3, "critical radius approaches the universal limit", ok, t0, &format!("rel errors {}", sci(&errs)));
}

#[test]
fn criterion_4_local_weyl_law() {
    let t0 = Instant::now();
    let mut ok = true;
    let mut detail = String::new();
    for spec in [ManifoldSpec::circle(), ManifoldSpec::flat_torus(2).unwrap()] {
        let reps: Vec<_> = [25.0, 50.0, 100.0]
            .iter()
            .map(|n| weyl_diagnostics(spec, TAU * n, 1000, 2024).unwrap())
            .collect();
        let kerr: Vec<f64> = reps.iter().map(|r| (r.k_ratio - 1.0).abs()).collect();
        let off: Vec<f64> = reps.iter().map(|r| r.offdiag_sup_err).collect();
        for (name, v) in [("|k_ratio-1|", &kerr), ("offdiag", &off)] {
            let ratios: Vec<f64> = v.windows(2).map(|w| w[1] / w[0]).collect();
            let good = ratios.iter().all(|r| *r > 0.3 && *r < 0.8);
            ok &= good;
            detail += &format!("T^{} {name} {} ratios {ratios:.3?}{}; ", spec.dim(), sci(v), if good { "" } else { " OUT" });
        }
    }
    for n in [25u32, 50, 100] {
        let r = weyl_diagnostics(ManifoldSpec::circle(), TAU * f64::from(n), 10, 1).unwrap();
        let nf = f64::from(n);
        let lambda = TAU * nf;
        let closed = ((4.0 * PI * PI * nf * (nf + 1.0) * (2.0 * nf + 1.0) / 3.0) / ((2.0 * nf + 1.0) * lambda * lambda / 3.0)
            - 1.0)
            .abs();
        let good = (r.gram_dev - closed).abs() <= 1e-12;
        ok &= good;
        if !good {
            detail += &format!("gram_dev {} vs {closed} at N={n}; ", r.gram_dev);
        }
    }
    report(4, "local Weyl law two-scale decay", ok, t0, &detail);
}

#[test]
fn criterion_5_tube_formula_vs_monte_carlo() {
    let t0 = Instant::now();
    let (spec, c) = circle(8);
    let lp = excursion_prob_exact(spec, &c, 0.7).unwrap();
    let p = lp.probability();
    let l1 = torus_lk(spec, &c).unwrap()[1];
    let cfg = MCConfig { seed: 42, n_samples: 1_000_000, grid_points: 2048, refine: true, theta: 0.7 };
    let est = estimate_excursion(spec, &c, &cfg).unwrap();
    let ok = c.k_lambda() == 17 && (est.p_hat - p).abs() <= 3.0 * est.stderr;
    let detail = format!(
        "p_exact {p:.6e} (L_1 {l1:.4}), p_hat {:.6e} +- {:.2e}, z {:.2}",
        est.p_hat,
        est.stderr,
        est.z_score(p)
    );
    report(5, "tube formula vs Monte Carlo", ok, t0, &detail);
}

#[test]
fn criterion_6_large_deviation_rate() {
    let t0 = Instant::now();
    let theta = 0.5;
    let lambdas: Vec<f64> = [25.0, 50.0, 100.0, 200.0].iter().map(|n| TAU * n).collect();
    let pts = ldp_curve(ManifoldSpec::circle(), theta, &lambdas).unwrap();
    let rate = excursion_rate(1, theta).unwrap();
    let scaled: Vec<f64> = pts.iter().map(|p| p.scaled_log_p).collect();
    let diffs: Vec<f64> = scaled.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let gap = (scaled[3] - rate).abs();
    let ok = gap <= 0.1 * rate.abs() && strictly_decreasing(&diffs) && pts.iter().all(|p| p.scaled_log_p < 0.0);
    let detail = format!("scaled {scaled:.5?} rate {rate:.5} final gap {gap:.2e}, successive diffs {}", sci(&diffs));
    report(6, "large-deviation rate", ok, t0, &detail);
}

#[test]
fn criterion_7_euler_characteristic() {
    let t0 = Instant::now();
    let (spec, c) = circle(8);
    let p = excursion_prob_exact(spec, &c, 0.7).unwrap().probability();
    let cfg = MCConfig { seed: 7, n_samples: 100_000, grid_points: 2048, refine: true, theta: 0.7 };
    let e = euler_char_circle(spec, &c, &cfg).unwrap();
    let ok = (e.mean - p).abs() <= 3.0 * e.stderr;
    let detail = format!(
        "mean arcs {:.5e} +- {:.2e} vs p_exact {p:.5e} (whole-circle samples {})",
        e.mean, e.stderr, e.whole_circle
    );
    report(7, "expected Euler characteristic on the circle", ok, t0, &detail);
}

/// `B_e(u)` from `bessel_j` directly, so `e = d + 2` may exceed the largest profile dimension.
fn shifted_profile(e: usize, u: f64) -> f64 {
    let nu = e as f64 / 2.0;
    libm::tgamma(nu + 1.0) * (2.0 / u).powf(nu) * bessel_j(BesselOrder::new(e as u32).unwrap(), u).unwrap()
}

fn jet_fd_error(spec: ManifoldSpec, c: &SpectralCutoff, x: &Point, y: &Point) -> f64 {
    let h = if spec.is_torus() { 1e-5 } else { 1e-5 * wavecrit_core::manifolds::SPHERE_RADIUS };
    let d = spec.dim();
    let jet = kernel_jet(spec, c, x, y).unwrap();
    let p = |x: &Point, y: &Point| kernel_jet(spec, c, x, y).unwrap();
    let gnorm = jet.grad().iter().fold(0.0f64, |m, g| m.max(g.abs()));
    let mut err: f64 = 0.0;
    for i in 0..d {
        let fd = (p(x, &move_along(spec, y, i, h)).p - p(x, &move_along(spec, y, i, -h)).p) / (2.0 * h);
        err = err.max((fd - jet.grad_y[i]).abs() / gnorm);
    }
    let diag = p(y, y).gram;
    let gmax = (0..d).fold(0.0f64, |m, i| m.max(diag[i][i]));
    for i in 0..d {
        let up = p(&move_along(spec, y, i, h), y).grad_y;
        let dn = p(&move_along(spec, y, i, -h), y).grad_y;
        for j in 0..d {
            err = err.max(((up[j] - dn[j]) / (2.0 * h) - diag[i][j]).abs() / gmax);
        }
    }
    err
}

#[test]
fn criterion_8_invariant_suites() {
    let t0 = Instant::now();
    let mut detail = String::new();

    // Bessel derivative identity.
    let mut bessel: f64 = 0.0;
    for d in 1..=25usize {
        for i in 0..1000 {
            let u = 0.1 + 49.9 * i as f64 / 999.0;
            let lhs = b_profile_deriv(d, u).unwrap() + u * shifted_profile(d + 2, u) / (d as f64 + 2.0);
            bessel = bessel.max(lhs.abs());
        }
    }
    let ok_bessel = bessel <= 1e-8;
    detail += &format!("bessel identity {bessel:.1e}; ");

    // Kernel-jet finite differences and the projection identity, 100 pairs per manifold.
    let specs = [
        (ManifoldSpec::circle(), 10u32),
        (ManifoldSpec::flat_torus(2).unwrap(), 6),
        (ManifoldSpec::flat_torus(3).unwrap(), 3),
        (ManifoldSpec::Sphere2, 8),
    ];
    let (mut fd_worst, mut pyth_worst): (f64, f64) = (0.0, 0.0);
    for (spec, cap) in specs {
        let c = SpectralCutoff::with_frequency_cap(spec, cap).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(100 + cap as u64);
        for i in 0..100 {
            let y = random_point(spec, &mut rng);
            let x = if i % 4 == 0 {
                let u = [1e-2, 1e-1, 1.0, 10.0][(i / 4) % 4];
                point_at_distance(spec, &y, u / c.lambda(), &mut rng)
            } else {
                random_point(spec, &mut rng)
            };
            fd_worst = fd_worst.max(jet_fd_error(spec, &c, &x, &y));
            let s = ratio_at(spec, &c, &x, &y).unwrap();
            let four_n = 4.0 * s.numerator;
            pyth_worst = pyth_worst.max((s.denominator.powi(2) + 4.0 * s.tangential_sq - four_n).abs() / four_n);
        }
    }
    let ok_fd = fd_worst <= 1e-5;
    let ok_pyth = pyth_worst <= 1e-10;
    detail += &format!("jet fd rel {fd_worst:.1e}; pythagoras rel {pyth_worst:.1e}; ");

    // Monte Carlo determinism across thread counts.
    let (spec, c) = circle(8);
    let cfg = MCConfig { seed: 99, n_samples: 20_000, grid_points: 2048, refine: true, theta: 0.8 };
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let sups: Vec<u64> = sample_sups(spec, &c, &cfg).unwrap().iter().map(|s| s.to_bits()).collect();
            let arcs: Vec<(u32, bool)> = sample_arcs(spec, &c, &cfg).unwrap().iter().map(|a| (a.1, a.2)).collect();
            (sups, arcs, estimate_excursion(spec, &c, &cfg).unwrap())
        })
    };
    let (one, four) = (run(1), run(4));
    let ok_det = one == four;
    detail += &format!("mc determinism 1 vs 4 threads {}; ", if ok_det { "identical" } else { "DIFFERENT" });

    // Exact ratio against the kernel profile.
    let (spec, c) = circle(100);
    let mut prof: f64 = 0.0;
    for i in 0..50 {
        let u = 0.5 + 39.5 * i as f64 / 49.0;
        let x = Point::new(&[u / c.lambda()]).unwrap();
        let r = ratio_at(spec, &c, &x, &Point::new(&[0.0]).unwrap()).unwrap().ratio;
        prof = prof.max((r - ratio_profile(1, u).unwrap().ratio).abs());
    }
    let ok_prof = prof <= 0.02;
    detail += &format!("exact vs profile {prof:.2e}");

    let ok = ok_bessel && ok_fd && ok_pyth && ok_det && ok_prof;
    report(8, "invariant suites", ok, t0, &detail);
}
