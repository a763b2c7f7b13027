//! End-to-end runs of the `alicki` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn alicki(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_alicki"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn bundled(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
        .display()
        .to_string()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

/// Value of a `quantity,value,...` CSV row.
fn csv_value(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key},")))
        .and_then(|rest| rest.split(',').next())
        .unwrap_or_else(|| panic!("no {key} in\n{text}"))
        .parse()
        .unwrap()
}

#[test]
fn predict_reference_point_is_nonclassical() {
    let o = alicki(&["predict", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!((csv_value(&out, "<B> - <A>") - 0.0685).abs() < 5e-4);
    assert!((csv_value(&out, "<B^2> - <A^2>") + 0.0449).abs() < 5e-4);
    assert!((csv_value(&out, "d_minus") - 0.0189).abs() < 1e-4);
    assert!(out.contains("verdict,NONCLASSICAL"), "{out}");
    assert!(out.contains("a/b window,(0.482009, 0.592183)"), "{out}");
}

#[test]
fn predict_flags_in_degrees() {
    let o = alicki(&[
        "predict", "--a", "0.74", "--b", "1.2987", "--r", "0.6", "--beta-deg", "40", "--psi-deg",
        "-55",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("NONCLASSICAL"));
}

#[test]
fn predict_without_beam_splitter_mixing_is_classical() {
    let o = alicki(&["predict", "--r", "0"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("empty"), "{out}");
    assert!(!out.contains("NONCLASSICAL"), "{out}");
}

#[test]
fn simulate_is_deterministic_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let (t1, t2) = (dir.path().join("t1.csv"), dir.path().join("t2.csv"));
    let cfg = bundled("reference.toml");
    let first = alicki(&["--config", &cfg, "--out", t1.to_str().unwrap(), "simulate"]);
    let second = alicki(&["--config", &cfg, "--out", t2.to_str().unwrap(), "simulate"]);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    assert_eq!(second.status.code(), Some(0));
    let bytes = std::fs::read(&t1).unwrap();
    assert_eq!(bytes, std::fs::read(&t2).unwrap());
    assert!(String::from_utf8_lossy(&bytes).starts_with("setting_rad,total,transmitted,accidentals\n"));
    assert_eq!(stdout(&first), stdout(&second));

    let sim = alicki(&["--config", &cfg, "--format", "csv", "simulate", "--out"]);
    assert_eq!(sim.status.code(), Some(2), "--out needs a value");

    let report = alicki(&["--config", &cfg, "--format", "csv", "--out", t1.to_str().unwrap(), "simulate"]);
    let analyzed = alicki(&["--config", &cfg, "--format", "csv", "analyze", "--tallies", t1.to_str().unwrap()]);
    assert_eq!(analyzed.status.code(), Some(0), "{}", stderr(&analyzed));
    assert_eq!(stdout(&report), stdout(&analyzed));
    let sig = csv_value(&stdout(&analyzed), "significance");
    assert!(sig > 30.0, "significance {sig}");
}

#[test]
fn simulate_seed_flag_changes_tallies() {
    let cfg = bundled("reference.toml");
    let a = alicki(&["--config", &cfg, "--format", "csv", "simulate"]);
    let b = alicki(&["--config", &cfg, "--format", "csv", "--seed", "43", "simulate"]);
    assert_eq!(a.status.code(), Some(0));
    assert_ne!(stdout(&a), stdout(&b));
}

#[test]
fn tiny_run_reports_low_significance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "tiny.toml", "run.n_heralds = 10\nrun.seed = 3\n");
    let o = alicki(&["--config", cfg.to_str().unwrap(), "--format", "csv", "--out",
        dir.path().join("t.csv").to_str().unwrap(), "simulate"]);
    assert!(matches!(o.status.code(), Some(0 | 1)), "{}", stderr(&o));
    let out = stdout(&o);
    let sig = csv_value(&out, "significance");
    assert!(sig < 10.0, "significance {sig}");
    let u: f64 = out
        .lines()
        .find(|l| l.starts_with("square_diff,"))
        .and_then(|l| l.split(',').nth(2))
        .unwrap()
        .parse()
        .unwrap();
    assert!(u > 0.05, "uncertainty {u}");
}

#[test]
fn purity_poisson_matches_quarter() {
    let o = alicki(&["--config", &bundled("poisson_purity.toml"), "--format", "csv", "purity"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let row: Vec<&str> = out.lines().find(|l| l.starts_with("gamma2/gamma1,")).unwrap().split(',').collect();
    assert_eq!(row[1], "0.250000");
    let (value, u): (f64, f64) = (row[3].parse().unwrap(), row[4].parse().unwrap());
    assert!((value - 0.25).abs() <= 3.0 * u, "{value} +/- {u}");
}

#[test]
fn purity_ideal_source_has_no_two_click_events() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "ideal.toml", "detection.tau_a = 0.5\nrun.n_gates = 200000\n");
    let o = alicki(&["--config", cfg.to_str().unwrap(), "--format", "csv", "purity"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let row: Vec<&str> = out.lines().find(|l| l.starts_with("gamma2,")).unwrap().split(',').collect();
    assert_eq!(row[2], "0.000000", "ideal theory gamma2: {out}");
    assert_eq!(row[3].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn purity_imported_counts() {
    let dir = tempfile::tempdir().unwrap();
    let counts = write(dir.path(), "counts.csv", "zero,one,two\n10000000,578000,751\n");
    let o = alicki(&["purity", "--counts", counts.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("0.057800(78)"), "{out}");
    assert!(out.contains("0.001299(47)"), "{out}");
    assert!(out.contains("single-photon dominated"), "{out}");

    let bad = write(dir.path(), "bad.csv", "zero,one\n1,2\n");
    let o = alicki(&["purity", "--counts", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn optimize_default_bounds_beats_reference_point() {
    let o = alicki(&["--config", &bundled("bounds.toml"), "--format", "csv", "optimize"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let sq = csv_value(&stdout(&o), "<B^2> - <A^2>");
    assert!(sq <= -0.0449, "{sq}");
}

#[test]
fn optimize_without_mixing_is_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "r0.toml", "[bounds]\nr_min = 0\nr_max = 0\n");
    let o = alicki(&["--config", cfg.to_str().unwrap(), "optimize"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no parameter point"), "{}", stderr(&o));
}

#[test]
fn config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    for (text, field, range) in [
        ("params.r = 1.5\n", "params.r", "[0, 1]"),
        ("[detection]\ntau_b = 2\n", "detection.tau_b", "[0, 1]"),
        ("run.n_heralds_a = 0\n", "run.n_heralds_a", "[1, inf)"),
        ("source.kind = \"poisson\"\nsource.mu = -1\n", "source.mu", "[0, 1e6]"),
    ] {
        let cfg = write(dir.path(), "bad.toml", text);
        let o = alicki(&["--config", cfg.to_str().unwrap(), "predict"]);
        assert_eq!(o.status.code(), Some(2), "{text}");
        let err = stderr(&o);
        assert!(err.contains(field) && err.contains(range), "{err}");
    }
    let o = alicki(&["predict", "--r", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("params.r"));
    let o = alicki(&["--config", "/nonexistent.toml", "predict"]);
    assert_eq!(o.status.code(), Some(2));
    let o = alicki(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn analyze_rejects_bad_tallies() {
    let dir = tempfile::tempdir().unwrap();
    let t = write(dir.path(), "t.csv", "setting_rad,total,transmitted,accidentals\n0,100,10,200\n0.3490658503988659,100,5,0\n");
    let o = alicki(&["analyze", "--tallies", t.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let t = write(dir.path(), "h.csv", "angle,n\n");
    let o = alicki(&["analyze", "--tallies", t.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
