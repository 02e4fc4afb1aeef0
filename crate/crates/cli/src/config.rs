//! Flag parsing, the flat `key=value` config file, and validation into a [`RunConfig`].

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::Serialize;
use wavecrit_core::specfun::{DEFAULT_COARSE_STEP, DEFAULT_U_MAX, MAX_DIMENSION};
use wavecrit_core::ManifoldSpec;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    CritLimit,
    CritRadius,
    LocalRatio,
    WeylCheck,
    TubeProb,
    Ldp,
    Mc,
    Euler,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// How the spectral cutoff is chosen: integer frequency cap or raw lambda.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffSel {
    BigN(u32),
    Lambda(f64),
}

/// Spectral cutoffs, thresholds and kernel-profile limits for random waves on tori and S^2.
#[derive(Debug, Parser)]
#[command(name = "wavecrit", version)]
pub struct Flags {
    /// Computation to run.
    #[arg(value_enum)]
    pub command: Command,
    /// Flat key=value file; flags given on the command line override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dimension(s) for crit-limit, comma separated.
    #[arg(long)]
    pub dim: Option<String>,
    /// torus1, torus2, torus3 or sphere2.
    #[arg(long)]
    pub manifold: Option<String>,
    /// Integer frequency cap(s): lambda = 2 pi N on tori, degree cap on the sphere.
    #[arg(long = "bigN")]
    pub big_n: Option<String>,
    /// Spectral cutoff(s) lambda, comma separated.
    #[arg(long)]
    pub lambda: Option<String>,
    /// Excursion angle(s) in (0, pi/2); the threshold is cos(theta).
    #[arg(long)]
    pub theta: Option<String>,
    /// Base seed of the random streams.
    #[arg(long)]
    pub seed: Option<String>,
    /// Monte Carlo sample count.
    #[arg(long)]
    pub samples: Option<String>,
    /// Monte Carlo grid points per axis.
    #[arg(long = "grid-points")]
    pub grid_points: Option<String>,
    /// Polish grid maxima (true or false).
    #[arg(long)]
    pub refine: Option<String>,
    /// Random point pairs for weyl-check.
    #[arg(long)]
    pub pairs: Option<String>,
    /// Upper end of the profile scan for crit-limit.
    #[arg(long = "u-max")]
    pub u_max: Option<String>,
    /// Coarse step of the profile scan for crit-limit.
    #[arg(long)]
    pub step: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub output: Option<String>,
    /// csv or json.
    #[arg(long)]
    pub format: Option<String>,
    /// Worker threads; falls back to WAVECRIT_THREADS.
    #[arg(long)]
    pub threads: Option<String>,
}

const KEYS: &[&str] = &[
    "dim", "manifold", "bigN", "lambda", "theta", "seed", "samples", "grid-points", "refine", "pairs", "u-max",
    "step", "output", "format", "threads",
];

/// Effective parameters of one run, after merging file, flags and defaults.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub manifold: Option<String>,
    #[serde(skip)]
    pub spec: Option<ManifoldSpec>,
    pub dims: Vec<usize>,
    pub cutoffs: Vec<CutoffSel>,
    pub thetas: Vec<f64>,
    pub seed: u64,
    pub samples: usize,
    pub grid_points: usize,
    pub refine: bool,
    pub pairs: usize,
    pub u_max: f64,
    pub step: f64,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub threads: Option<usize>,
}

/// Reads a flat `key=value` file. Blank lines and lines starting with `#` are skipped.
pub fn parse_file(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Usage(format!("config line {}: expected key=value, got {line:?}", no + 1)));
        };
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(CliError::Usage(format!("config line {}: unknown key {k:?}", no + 1)));
        }
        map.insert(k.to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn flag_map(f: &Flags) -> BTreeMap<String, String> {
    let pairs = [
        ("dim", &f.dim),
        ("manifold", &f.manifold),
        ("bigN", &f.big_n),
        ("lambda", &f.lambda),
        ("theta", &f.theta),
        ("seed", &f.seed),
        ("samples", &f.samples),
        ("grid-points", &f.grid_points),
        ("refine", &f.refine),
        ("pairs", &f.pairs),
        ("u-max", &f.u_max),
        ("step", &f.step),
        ("output", &f.output),
        ("format", &f.format),
        ("threads", &f.threads),
    ];
    pairs.iter().filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone()))).collect()
}

struct Values(BTreeMap<String, String>);

impl Values {
    fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn one<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        match self.raw(key) {
            None => Ok(default),
            Some(s) => s.parse().map_err(|_| CliError::Usage(format!("--{key}: cannot parse {s:?}"))),
        }
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Vec<T>, CliError> {
        let Some(s) = self.raw(key) else { return Ok(Vec::new()) };
        s.split(',')
            .map(|p| p.trim().parse().map_err(|_| CliError::Usage(format!("--{key}: cannot parse {p:?}"))))
            .collect()
    }
}

fn invalid(msg: String) -> CliError {
    CliError::Validation(msg)
}

fn parse_manifold(name: &str) -> Result<ManifoldSpec, CliError> {
    let spec = match name {
        "torus1" => ManifoldSpec::circle(),
        "torus2" => ManifoldSpec::flat_torus(2).expect("dimension 2 is valid"),
        "torus3" => ManifoldSpec::flat_torus(3).expect("dimension 3 is valid"),
        "sphere2" => ManifoldSpec::Sphere2,
        other => {
            return Err(CliError::Usage(format!(
                "--manifold: unknown manifold {other:?} (torus1, torus2, torus3, sphere2)"
            )))
        }
    };
    Ok(spec)
}

fn parse_bool(key: &str, s: &str) -> Result<bool, CliError> {
    match s {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(CliError::Usage(format!("--{key}: expected true or false, got {s:?}"))),
    }
}

/// Merges `file` (if any) under the flags and validates the result.
pub fn resolve(flags: &Flags, env_threads: Option<String>) -> Result<RunConfig, CliError> {
    let mut map = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("--config {}: {e}", path.display())))?;
            parse_file(&text)?
        }
        None => BTreeMap::new(),
    };
    map.extend(flag_map(flags));
    if !map.contains_key("threads") {
        if let Some(t) = env_threads.filter(|t| !t.trim().is_empty()) {
            map.insert("threads".into(), t);
        }
    }
    let v = Values(map);
    let command = flags.command;

    let manifold = v.raw("manifold").map(str::to_string);
    let spec = manifold.as_deref().map(parse_manifold).transpose()?;
    let mut dims: Vec<usize> = v.list("dim")?;
    let big_n: Vec<u32> = v.list("bigN")?;
    let lambdas: Vec<f64> = v.list("lambda")?;
    let mut thetas: Vec<f64> = v.list("theta")?;
    let format = match v.raw("format").unwrap_or("csv") {
        "csv" => Format::Csv,
        "json" => Format::Json,
        other => return Err(CliError::Usage(format!("--format: expected csv or json, got {other:?}"))),
    };
    let refine = v.raw("refine").map(|s| parse_bool("refine", s)).transpose()?.unwrap_or(true);
    let threads = v.raw("threads").map(|_| v.one::<usize>("threads", 0)).transpose()?;

    if !big_n.is_empty() && !lambdas.is_empty() {
        return Err(CliError::Usage("--bigN and --lambda are mutually exclusive".into()));
    }
    let cutoffs: Vec<CutoffSel> = if lambdas.is_empty() {
        big_n.iter().map(|&n| CutoffSel::BigN(n)).collect()
    } else {
        lambdas.iter().map(|&l| CutoffSel::Lambda(l)).collect()
    };
    if thetas.is_empty() {
        thetas.push(0.7);
    }

    let cfg = RunConfig {
        command,
        manifold,
        spec,
        dims: Vec::new(),
        cutoffs,
        thetas,
        seed: v.one("seed", 0u64)?,
        samples: v.one("samples", 10_000usize)?,
        grid_points: v.one("grid-points", 2048usize)?,
        refine,
        pairs: v.one("pairs", 200usize)?,
        u_max: v.one("u-max", DEFAULT_U_MAX)?,
        step: v.one("step", DEFAULT_COARSE_STEP)?,
        output: v.raw("output").map(PathBuf::from),
        format,
        threads,
    };

    if command == Command::CritLimit {
        if dims.is_empty() {
            match cfg.spec {
                Some(s) => dims.push(s.dim()),
                None => return Err(CliError::Usage("crit-limit needs --dim".into())),
            }
        }
    } else {
        if cfg.spec.is_none() {
            return Err(CliError::Usage(format!("{} needs --manifold", command_name(command))));
        }
        if cfg.cutoffs.is_empty() {
            return Err(CliError::Usage(format!("{} needs --bigN or --lambda", command_name(command))));
        }
    }
    let cfg = RunConfig { dims, ..cfg };
    validate(&cfg)?;
    Ok(cfg)
}

pub fn command_name(c: Command) -> String {
    c.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
}

fn validate(c: &RunConfig) -> Result<(), CliError> {
    if let Some(d) = c.dims.iter().find(|&&d| d == 0 || d > MAX_DIMENSION) {
        return Err(invalid(format!("--dim: {d} outside 1..={MAX_DIMENSION}")));
    }
    if let Some(t) = c.thetas.iter().find(|&&t| !(t > 0.0 && t < FRAC_PI_2)) {
        return Err(invalid(format!("--theta: {t} outside (0, pi/2)")));
    }
    for sel in &c.cutoffs {
        match *sel {
            CutoffSel::BigN(0) => return Err(invalid("--bigN: must be at least 1".into())),
            CutoffSel::Lambda(l) if !(l > 0.0 && l.is_finite()) => {
                return Err(invalid(format!("--lambda: {l} is not positive and finite")))
            }
            _ => {}
        }
    }
    if c.samples == 0 {
        return Err(invalid("--samples: must be at least 1".into()));
    }
    if c.grid_points < 64 {
        return Err(invalid(format!("--grid-points: {} is below 64", c.grid_points)));
    }
    if c.pairs == 0 {
        return Err(invalid("--pairs: must be at least 1".into()));
    }
    if !(c.u_max >= 100.0 && c.u_max.is_finite()) {
        return Err(invalid(format!("--u-max: {} is below 100", c.u_max)));
    }
    if !(c.step > 0.0 && c.step <= 0.1) {
        return Err(invalid(format!("--step: {} outside (0, 0.1]", c.step)));
    }
    if c.threads == Some(0) {
        return Err(invalid("--threads: must be at least 1".into()));
    }
    Ok(())
}
