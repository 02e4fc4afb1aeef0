//! One function per subcommand: run the core computation and fill a [`Table`].

use serde_json::{json, Value};
use wavecrit_core::embedding::{critical_radius, local_ratio_inf, SearchConfig};
use wavecrit_core::montecarlo::{estimate_excursion, euler_char_circle, MCConfig};
use wavecrit_core::specfun::{crit_limit, excursion_rate, near_diagonal_limit};
use wavecrit_core::tube::excursion_prob_exact;
use wavecrit_core::{enumerate_basis, weyl_diagnostics, ManifoldSpec, SpectralCutoff};

use crate::config::{Command, CutoffSel, RunConfig};
use crate::output::Table;
use crate::CliError;

pub struct Outcome {
    pub table: Table,
    /// Extra manifest entries, such as the full Monte Carlo configurations.
    pub details: Option<Value>,
}

pub fn dispatch(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let table = match cfg.command {
        Command::CritLimit => return crit_limit_table(cfg).map(plain),
        Command::CritRadius => crit_radius_table(cfg)?,
        Command::LocalRatio => local_ratio_table(cfg)?,
        Command::WeylCheck => weyl_table(cfg)?,
        Command::TubeProb | Command::Ldp => tube_table(cfg)?,
        Command::Mc => return mc_table(cfg),
        Command::Euler => return euler_table(cfg),
    };
    Ok(plain(table))
}

fn plain(table: Table) -> Outcome {
    Outcome { table, details: None }
}

fn spec(cfg: &RunConfig) -> ManifoldSpec {
    cfg.spec.expect("resolve requires a manifold for this command")
}

fn cutoff(spec: ManifoldSpec, sel: CutoffSel) -> Result<SpectralCutoff, CliError> {
    Ok(match sel {
        CutoffSel::BigN(n) => SpectralCutoff::with_frequency_cap(spec, n)?,
        CutoffSel::Lambda(l) => enumerate_basis(spec, l)?,
    })
}

fn cutoffs(cfg: &RunConfig) -> Result<Vec<SpectralCutoff>, CliError> {
    cfg.cutoffs.iter().map(|&s| cutoff(spec(cfg), s)).collect()
}

/// `log P` from the tube formula when it is defined for this manifold and cutoff.
fn exact_log_p(spec: ManifoldSpec, c: &SpectralCutoff, theta: f64) -> Option<f64> {
    if !spec.is_torus() {
        return None;
    }
    excursion_prob_exact(spec, c, theta).ok().map(|lp| lp.log_p)
}

fn crit_limit_table(cfg: &RunConfig) -> Result<Table, CliError> {
    let mut t = Table::new(&["d", "value", "argmin_u"]);
    for &d in &cfg.dims {
        let lim = crit_limit(d, cfg.u_max, cfg.step)?;
        t.push(vec![d.into(), lim.value.into(), lim.argmin_u.into()]);
    }
    Ok(t)
}

fn crit_radius_table(cfg: &RunConfig) -> Result<Table, CliError> {
    let spec = spec(cfg);
    let lim = crit_limit(spec.dim(), cfg.u_max, cfg.step)?.value;
    let mut t = Table::new(&["lambda", "r_lambda", "regime", "argmin_dg", "limit_d", "rel_err"]);
    for c in cutoffs(cfg)? {
        let est = critical_radius(spec, &c, &SearchConfig::default())?;
        t.push(vec![
            est.lambda.into(),
            est.r_lambda.into(),
            est.regime.as_str().into(),
            est.argmin_dg().into(),
            lim.into(),
            ((est.r_lambda - lim) / lim).into(),
        ]);
    }
    Ok(t)
}

fn local_ratio_table(cfg: &RunConfig) -> Result<Table, CliError> {
    let spec = spec(cfg);
    let lim = near_diagonal_limit(spec.dim());
    let mut t =
        Table::new(&["lambda", "k_lambda", "value", "argmin_dg", "limit_d", "rel_err", "degenerate_scales"]);
    for c in cutoffs(cfg)? {
        let r = local_ratio_inf(spec, &c)?;
        t.push(vec![
            r.lambda.into(),
            c.k_lambda().into(),
            r.value.into(),
            r.argmin_dg.into(),
            lim.into(),
            ((r.value - lim) / lim).into(),
            r.degenerate_scales.into(),
        ]);
    }
    Ok(t)
}

fn weyl_table(cfg: &RunConfig) -> Result<Table, CliError> {
    let spec = spec(cfg);
    let mut t = Table::new(&[
        "lambda",
        "k_lambda",
        "k_ratio",
        "diag_ratio",
        "gram_dev",
        "offdiag_sup_err",
        "far_pair_ratio",
    ]);
    for c in cutoffs(cfg)? {
        let r = weyl_diagnostics(spec, c.lambda(), cfg.pairs, cfg.seed)?;
        t.push(vec![
            r.lambda.into(),
            r.k_lambda.into(),
            r.k_ratio.into(),
            r.diag_ratio.into(),
            r.gram_dev.into(),
            r.offdiag_sup_err.into(),
            r.far_pair_ratio.into(),
        ]);
    }
    Ok(t)
}

fn tube_table(cfg: &RunConfig) -> Result<Table, CliError> {
    let spec = spec(cfg);
    let d = spec.dim();
    let mut t =
        Table::new(&["theta", "lambda", "k_lambda", "log_p_exact", "scaled_log_p", "ldp_rate", "abs_gap"]);
    for c in cutoffs(cfg)? {
        for &theta in &cfg.thetas {
            let log_p = excursion_prob_exact(spec, &c, theta)?.log_p;
            let scaled = log_p / c.lambda().powi(d as i32);
            let rate = excursion_rate(d, theta)?;
            t.push(vec![
                theta.into(),
                c.lambda().into(),
                c.k_lambda().into(),
                log_p.into(),
                scaled.into(),
                rate.into(),
                (scaled - rate).abs().into(),
            ]);
        }
    }
    Ok(t)
}

fn mc_config(cfg: &RunConfig, theta: f64) -> MCConfig {
    MCConfig { seed: cfg.seed, n_samples: cfg.samples, grid_points: cfg.grid_points, refine: cfg.refine, theta }
}

fn mc_table(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = spec(cfg);
    let mut t = Table::new(&["seed", "n", "k_lambda", "theta", "p_hat", "stderr", "log_p_exact", "z_score"]);
    let mut runs = Vec::new();
    for c in cutoffs(cfg)? {
        for &theta in &cfg.thetas {
            let mc = mc_config(cfg, theta);
            let est = estimate_excursion(spec, &c, &mc)?;
            let log_p = exact_log_p(spec, &c, theta);
            t.push(vec![
                est.seed.into(),
                est.n.into(),
                c.k_lambda().into(),
                theta.into(),
                est.p_hat.into(),
                est.stderr.into(),
                log_p.into(),
                log_p.map(|lp| est.z_score(lp.exp())).into(),
            ]);
            runs.push(json!({ "lambda": c.lambda(), "config": mc, "hits": est.hits }));
        }
    }
    Ok(Outcome { table: t, details: Some(json!({ "runs": runs })) })
}

fn euler_table(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = spec(cfg);
    let mut t = Table::new(&[
        "seed",
        "n",
        "k_lambda",
        "theta",
        "mean_arcs",
        "stderr",
        "whole_circle",
        "log_p_exact",
        "z_score",
    ]);
    let mut runs = Vec::new();
    for c in cutoffs(cfg)? {
        for &theta in &cfg.thetas {
            let mc = mc_config(cfg, theta);
            let e = euler_char_circle(spec, &c, &mc)?;
            let log_p = exact_log_p(spec, &c, theta);
            let z = log_p.filter(|_| e.stderr > 0.0).map(|lp| (e.mean - lp.exp()) / e.stderr);
            t.push(vec![
                e.seed.into(),
                e.n.into(),
                c.k_lambda().into(),
                theta.into(),
                e.mean.into(),
                e.stderr.into(),
                e.whole_circle.into(),
                log_p.into(),
                z.into(),
            ]);
            runs.push(json!({ "lambda": c.lambda(), "config": mc, "arc_total": e.arc_total }));
        }
    }
    Ok(Outcome { table: t, details: Some(json!({ "runs": runs })) })
}
