use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn wavecrit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavecrit")).args(args).env_remove("WAVECRIT_THREADS").output().unwrap()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

fn manifest(p: &Path) -> Value {
    let mut s = p.as_os_str().to_os_string();
    s.push(".manifest.json");
    serde_json::from_str(&std::fs::read_to_string(s).unwrap()).unwrap()
}

#[test]
fn empty_args_print_usage() {
    let out = wavecrit(&[]);
    assert_eq!(out.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn unknown_subcommand_or_flag_is_usage_error() {
    assert_eq!(wavecrit(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(wavecrit(&["crit-limit", "--dim", "1", "--colour", "red"]).status.code(), Some(64));
    assert_eq!(wavecrit(&["--help"]).status.code(), Some(0));
}

#[test]
fn crit_limit_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lim.csv");
    let r = wavecrit(&["crit-limit", "--dim", "2", "--output", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let csv = read(&out);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("d,value,argmin_u"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "2");
    let v: f64 = row[1].parse().unwrap();
    assert!((v - 0.683929).abs() < 1e-5);
    let m = manifest(&out);
    assert_eq!(m["command"], "crit-limit");
    assert_eq!(m["parameters"]["dims"][0], 2);
    assert!(m["version"].is_string());
}

#[test]
fn crit_radius_reports_relative_error() {
    let r = wavecrit(&["crit-radius", "--manifold", "torus1", "--bigN", "100"]);
    assert_eq!(r.status.code(), Some(0));
    let stdout = String::from_utf8(r.stdout).unwrap();
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some("lambda,r_lambda,regime,argmin_dg,limit_d,rel_err"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let rel: f64 = row[5].parse().unwrap();
    assert!(rel.abs() < 0.03);
    // Manifest goes to stderr when results go to stdout.
    let m: Value = serde_json::from_slice(&r.stderr).unwrap();
    assert_eq!(m["rows"], 1);
}

#[test]
fn mc_runs_are_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let base = ["mc", "--manifold", "torus1", "--bigN", "8", "--theta", "0.7", "--samples", "1000000", "--seed", "42"];
    let run = |p: &Path, threads: &str| {
        let mut args = base.to_vec();
        args.extend(["--threads", threads, "--output", p.to_str().unwrap()]);
        assert_eq!(wavecrit(&args).status.code(), Some(0));
    };
    run(&a, "1");
    run(&b, "4");
    let (ca, cb) = (read(&a), read(&b));
    assert_eq!(ca, cb);
    assert!(ca.starts_with("seed,n,k_lambda,theta,p_hat,stderr,log_p_exact,z_score\n42,1000000,17,0.7,"));
    let z: f64 = ca.lines().nth(1).unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!(z.abs() <= 3.0);
    assert_eq!(manifest(&a)["details"]["runs"][0]["config"]["n_samples"], 1_000_000);
}

#[test]
fn theta_at_or_above_right_angle_fails_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let r = wavecrit(&["tube-prob", "--manifold", "torus1", "--bigN", "8", "--theta", "1.6", "--output", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn resource_errors_exit_3_without_partial_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w.csv");
    let r = wavecrit(&["weyl-check", "--manifold", "torus3", "--bigN", "300", "--output", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(3));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "manifold=torus1\nbigN=8\nseed=1\nsamples=200\n").unwrap();
    let out = dir.path().join("mc.csv");
    let r = wavecrit(&["mc", "--config", conf.to_str().unwrap(), "--seed", "2", "--output", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(read(&out).lines().nth(1).unwrap().starts_with("2,200,17,"));
    assert_eq!(manifest(&out)["parameters"]["seed"], 2);

    std::fs::write(&conf, "manifold=torus1\nsamples=many\n").unwrap();
    let r = wavecrit(&["mc", "--config", conf.to_str().unwrap(), "--bigN", "8"]);
    assert_eq!(r.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&r.stderr).contains("samples"));
}

#[test]
fn threads_env_fallback_is_validated() {
    let r = Command::new(env!("CARGO_BIN_EXE_wavecrit"))
        .args(["crit-limit", "--dim", "1"])
        .env("WAVECRIT_THREADS", "several")
        .output()
        .unwrap();
    assert_eq!(r.status.code(), Some(64));
}

#[test]
fn ldp_and_weyl_json_rows() {
    let r = wavecrit(&["ldp", "--manifold", "torus1", "--bigN", "25,50", "--theta", "0.5", "--format", "json"]);
    assert_eq!(r.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&r.stdout).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    let g0 = rows[0]["abs_gap"].as_f64().unwrap();
    let g1 = rows[1]["abs_gap"].as_f64().unwrap();
    assert!(g1 < g0);
    assert!((rows[0]["ldp_rate"].as_f64().unwrap() - 0.5f64.sin().ln() / std::f64::consts::PI).abs() < 1e-12);

    let r = wavecrit(&["weyl-check", "--manifold", "torus1", "--bigN", "50", "--pairs", "50", "--seed", "3"]);
    assert_eq!(r.status.code(), Some(0));
    let s = String::from_utf8(r.stdout).unwrap();
    assert!(s.starts_with("lambda,k_lambda,k_ratio,diag_ratio,gram_dev,offdiag_sup_err,far_pair_ratio\n"));
}

#[test]
fn euler_and_sphere_runs() {
    let r = wavecrit(&["euler", "--manifold", "torus1", "--bigN", "8", "--samples", "2000", "--seed", "5"]);
    assert_eq!(r.status.code(), Some(0));
    let s = String::from_utf8(r.stdout).unwrap();
    assert!(s.starts_with("seed,n,k_lambda,theta,mean_arcs,stderr,whole_circle,log_p_exact,z_score\n5,2000,17,"));

    // No tube formula on the sphere: the exact column stays empty.
    let r = wavecrit(&["mc", "--manifold", "sphere2", "--bigN", "3", "--samples", "100", "--grid-points", "64"]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let s = String::from_utf8(r.stdout).unwrap();
    assert!(s.lines().nth(1).unwrap().ends_with(",,"));

    let r = wavecrit(&["euler", "--manifold", "torus2", "--bigN", "3", "--samples", "10"]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn local_ratio_row() {
    let r = wavecrit(&["local-ratio", "--manifold", "torus1", "--bigN", "50"]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let s = String::from_utf8(r.stdout).unwrap();
    let row: Vec<&str> = s.lines().nth(1).unwrap().split(',').collect();
    let rel: f64 = row[5].parse().unwrap();
    assert!(rel.abs() < 0.02);
}
