use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const DEFAULT: &str = include_str!("../config/default.toml");

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_degensemi"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env_remove("DEGENSEMI_OUT")
        .output()
        .unwrap()
}

fn with_config(text: &str, args: &[&str], dir: &Path) -> Output {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    let mut all = args.to_vec();
    let p = path.to_str().unwrap();
    all.extend(["--config", p]);
    run(&all, dir)
}

/// Data rows of a CSV, header line first, `#` lines dropped.
fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn column(rows: &[Vec<String>], name: &str) -> usize {
    rows[0].iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn find<'a>(rows: &'a [Vec<String>], want: &[(&str, f64)], label: &str) -> &'a Vec<String> {
    let lc = column(rows, "label");
    rows[1..]
        .iter()
        .find(|r| {
            r[lc] == label
                && want
                    .iter()
                    .all(|(k, v)| (r[column(rows, k)].parse::<f64>().unwrap() - v).abs() < 1e-9 * v.abs().max(1.0))
        })
        .unwrap_or_else(|| panic!("no {label} row at {want:?}"))
}

fn value(rows: &[Vec<String>], row: &[String], name: &str) -> f64 {
    row[column(rows, name)].parse().unwrap()
}

#[test]
fn oracle_defaults_reproduce_the_example_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["oracle"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let sweep = rows(&dir.path().join("oracle_sweep.csv"));
    assert_eq!(sweep[0], ["theta", "mag", "bound", "measured", "ratio", "pass"]);

    let detail = rows(&dir.path().join("oracle_detail.csv"));
    let at_i = find(&detail, &[("theta", FRAC_PI_2), ("mag", 1.0), ("gamma", 1.0)], "resolvent");
    assert!((value(&detail, at_i, "bound") - 2.1213).abs() < 1e-4);
    assert!(value(&detail, at_i, "measured") <= value(&detail, at_i, "bound"));
    let hundred = find(&detail, &[("theta", 0.0), ("mag", 100.0), ("gamma", 1.0)], "resolvent");
    assert!((value(&detail, hundred, "measured") - 0.01).abs() < 1e-12);

    let contraction = rows(&dir.path().join("oracle_contraction.csv"));
    let q = find(&contraction, &[("theta", 0.0), ("mag", 16.0), ("b", 1.0), ("gamma", 1.0)], "contraction");
    assert!(value(&contraction, q, "measured") <= 0.25 + 1e-15);

    let verdicts = fs::read_to_string(dir.path().join("verdicts.txt")).unwrap();
    assert!(verdicts.lines().last().unwrap().starts_with("PASS"));
}

#[test]
fn csv_headers_carry_hash_seed_and_version() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["oracle", "--seed", "0x2A"], dir.path()).status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("oracle_sweep.csv")).unwrap();
    let head: Vec<&str> = text.lines().take(3).collect();
    assert!(head[0].starts_with("# degensemi "));
    assert!(head[1].starts_with("# config_sha256 = ") && head[1].len() == "# config_sha256 = ".len() + 64);
    assert_eq!(head[2], "# seed = 0x2a");
}

#[test]
fn empty_sweep_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let text = DEFAULT.replace("thetas_deg = [0.0, 45.0, 90.0, 135.0]", "thetas_deg = []");
    let out = with_config(&text, &["oracle"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let sweep = rows(&dir.path().join("oracle_sweep.csv"));
    assert_eq!(sweep.len(), 1);
}

#[test]
fn malformed_config_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = with_config("[problem]\nd = \"two\"\n", &["oracle"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");

    let typo = DEFAULT.replace("nprobe = 16", "nprobes = 16");
    let out = with_config(&typo, &["oracle"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nprobes"));

    let zero = DEFAULT.replace("probes = 12", "probes = 0");
    let out = with_config(&zero, &["verify", "oned"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sweep.probes"));
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["verify", "nonsense"], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["oracle", "--seed", "0xFV01"], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["oracle", "--jobs", "0"], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn tensor_suite_needs_two_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let text = DEFAULT.replace("[problem]\nd = 2", "[problem]\nd = 1");
    for suite in ["tensor", "all"] {
        let out = with_config(&text, &["verify", suite], dir.path());
        assert_eq!(out.status.code(), Some(1));
        assert!(String::from_utf8_lossy(&out.stderr).contains("d >= 2"));
    }
}

#[test]
fn inadmissible_series_is_a_failed_estimate() {
    // The separated drift is not a contraction at λ = 0.01: a failing point
    // and exit 2, not a crash.
    let dir = tempfile::tempdir().unwrap();
    let text = DEFAULT.replace("lambda_perturb = 64.0", "lambda_perturb = 0.01");
    let out = with_config(&text, &["verify", "perturb"], dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let verdicts = fs::read_to_string(dir.path().join("verdicts.txt")).unwrap();
    assert!(verdicts.contains("FAIL perturb_separated "), "{verdicts}");
    let rows = rows(&dir.path().join("perturb_separated.csv"));
    let q = find(&rows, &[], "contraction");
    assert!(value(&rows, q, "measured") >= 0.5);
}

#[test]
fn suites_are_byte_identical_on_rerun() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        assert_eq!(run(&["verify", "oned", "--seed", "0x1234"], dir.path()).status.code(), Some(0));
    }
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 9);
    for name in names {
        assert_eq!(fs::read(a.path().join(&name)).unwrap(), fs::read(b.path().join(&name)).unwrap(), "{name:?}");
    }
}

#[test]
fn environment_overrides_out() {
    let flag = tempfile::tempdir().unwrap();
    let env = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_degensemi"))
        .args(["oracle", "--out"])
        .arg(flag.path())
        .env("DEGENSEMI_OUT", env.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(env.path().join("oracle_sweep.csv").exists());
    assert!(!flag.path().join("oracle_sweep.csv").exists());
}

fn snapshot(dir: &Path, k: usize) -> Vec<f64> {
    let rows = rows(&dir.join(format!("snapshot_{k:03}.csv")));
    let uc = column(&rows, "u");
    rows[1..].iter().map(|r| r[uc].parse().unwrap()).collect()
}

fn one_dimensional(drift: f64, datum: &str) -> String {
    DEFAULT
        .replace("[problem]\nd = 2", "[problem]\nd = 1")
        .replace("drift = 0.5\n", &format!("drift = {drift}\n"))
        .replace("datum = { kind = \"bump\", center = 0.5, width = 0.15 }", datum)
}

#[test]
fn evolve_constants_and_initial_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let text = DEFAULT.replace(
        "datum = { kind = \"bump\", center = 0.5, width = 0.15 }",
        "datum = { kind = \"constant\", value = 1.0 }",
    );
    let out = with_config(&text, &["evolve", "--times", "0,0.1,1,5"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for k in 0..4 {
        assert!(snapshot(dir.path(), k).iter().all(|u| (u - 1.0).abs() < 1e-12));
    }

    let dir = tempfile::tempdir().unwrap();
    let text = one_dimensional(0.5, "datum = { kind = \"cosine\", freq = 2.0 }");
    assert_eq!(with_config(&text, &["evolve", "--plot"], dir.path()).status.code(), Some(0));
    let rows = rows(&dir.path().join("snapshot_000.csv"));
    for r in &rows[1..] {
        let (x, u): (f64, f64) = (r[0].parse().unwrap(), r[1].parse().unwrap());
        assert_eq!(u, (2.0 * std::f64::consts::PI * x).cos());
    }
    assert!(dir.path().join("snapshot_000.svg").exists());
}

#[test]
fn evolve_profile_moves_against_the_drift() {
    // The semigroup acts on observables, u(t, x) = E u₀(X_t^x): with b > 0 the
    // paths move right, so the profile of u is carried towards x = 0 and its
    // centre trails the driftless run.
    let centers = |b: f64| {
        let dir = tempfile::tempdir().unwrap();
        let text = one_dimensional(b, "datum = { kind = \"bump\", center = 0.5, width = 0.1 }");
        assert_eq!(with_config(&text, &["evolve", "--times", "0,0.02,0.05"], dir.path()).status.code(), Some(0));
        let summary = rows(&dir.path().join("evolve_summary.csv"));
        let cc = column(&summary, "center1");
        summary[1..].iter().map(|r| r[cc].parse::<f64>().unwrap()).collect::<Vec<f64>>()
    };
    let (still, pushed) = (centers(0.0), centers(1.0));
    assert_eq!(still[0], pushed[0]);
    for k in 1..still.len() {
        assert!(pushed[k] < still[k], "t index {k}: {} vs {}", pushed[k], still[k]);
    }
}
