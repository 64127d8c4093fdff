//! End-to-end tests of the `bellstat` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bellstat() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_bellstat"));
    c.env_remove("BELLSTAT_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bellstat().args(args).output().expect("binary runs")
}

fn ok_stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&ok_stdout(args)).unwrap()
}

/// Parse CSV into a header and rows of cells (no quoted fields expected).
fn csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn f(cell: &str) -> f64 {
    cell.parse().unwrap_or_else(|_| panic!("not a number: {cell:?}"))
}

#[test]
fn bound_example() {
    let v = json(&["--quiet", "bound", "--n", "3", "--m", "3", "--brute-force"]);
    assert_eq!(v["beta_c"], 13);
    assert_eq!(v["brute_force_min"], 13);
    assert_eq!(v["match"], true);
}

#[test]
fn curve_example() {
    let text = ok_stdout(&["--quiet", "curve", "--m", "inf", "--cb-min", "0", "--cb-max", "0.99", "--points", "3"]);
    let (header, rows) = csv(&text);
    assert_eq!(header, ["cb", "zeta2_critical"]);
    assert_eq!(rows.len(), 3);
    assert_eq!(f(&rows[0][1]), 0.0);
    assert!(f(&rows[1][1]) < f(&rows[2][1]));
}

fn assert_same_values(csv_cell: &str, json_value: &Value) {
    match json_value {
        Value::Number(n) => {
            let (a, b) = (f(csv_cell), n.as_f64().unwrap());
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{a} vs {b}");
        }
        Value::Bool(b) => assert_eq!(csv_cell, b.to_string()),
        Value::String(s) => assert_eq!(csv_cell, s),
        Value::Null => assert_eq!(csv_cell, ""),
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn csv_and_json_encode_the_same_record() {
    let args = ["--quiet", "witness", "--m", "4", "--cb", "0.98", "--zeta2", "0.272"];
    let j = json(&[&args[..], &["--format", "json"]].concat());
    let (header, rows) = csv(&ok_stdout(&[&args[..], &["--format", "csv"]].concat()));
    assert_eq!(rows.len(), 1);
    for (key, cell) in header.iter().zip(&rows[0]) {
        let value = match key.rsplit_once('_') {
            Some(("angles", i)) => &j["angles"][i.parse::<usize>().unwrap()],
            _ => &j[key],
        };
        assert_same_values(cell, value);
    }
    assert_eq!(j["violated"], true);
}

#[test]
fn csv_and_json_encode_the_same_table() {
    let args = ["--quiet", "figure", "fig3", "--points", "4", "--n", "1000"];
    let j = json(&[&args[..], &["--format", "json"]].concat());
    let (header, rows) = csv(&ok_stdout(&args));
    let objs = j.as_array().unwrap();
    assert_eq!(objs.len(), rows.len());
    for (obj, row) in objs.iter().zip(&rows) {
        for (key, cell) in header.iter().zip(row) {
            assert_same_values(cell, &obj[key]);
        }
    }
}

#[test]
fn fig1_curves_are_ordered_and_contain_the_reference_point() {
    let (header, rows) = csv(&ok_stdout(&["--quiet", "figure", "fig1", "--points", "40"]));
    assert_eq!(header, ["series", "cb", "zeta2"]);
    let series = |name: &str| -> Vec<(f64, f64)> {
        rows.iter().filter(|r| r[0] == name).map(|r| (f(&r[1]), f(&r[2]))).collect()
    };
    let (z2, z4, zinf) = (series("z2"), series("z4"), series("zinf"));
    assert_eq!(z2.len(), 40);
    for ((a, b), c) in z2.iter().zip(&z4).zip(&zinf) {
        assert!(a.0 == b.0 && b.0 == c.0);
        assert!(a.1 <= b.1 + 1e-12 && b.1 <= c.1 + 1e-12, "cb={}: {} {} {}", a.0, a.1, b.1, c.1);
    }
    assert_eq!(series("reference"), vec![(0.98, 0.272)]);
}

#[test]
fn fig2_threshold_grows_with_n_and_matches_its_asymptote() {
    let (header, rows) = csv(&ok_stdout(&["--quiet", "figure", "fig2", "--points", "12"]));
    let (zs, za) = (column(&header, "zeta2_star"), column(&header, "zeta2_star_asymptotic"));
    for w in rows.windows(2) {
        assert!(f(&w[1][zs]) > f(&w[0][zs]));
    }
    let last = rows.last().unwrap();
    assert_eq!(last[0], "1000000");
    assert!((f(&last[zs]) - f(&last[za])).abs() < 0.01);
}

#[test]
fn fig3_reference_point_needs_about_17_scaled_runs_per_spin() {
    let text = ok_stdout(&[
        "--quiet", "figure", "fig3", "--points", "2", "--cb-min", "0.98", "--cb-max", "0.99",
        "--zeta2-min", "0.272", "--zeta2-max", "0.3",
    ]);
    let (header, rows) = csv(&text);
    assert_eq!((f(&rows[0][0]), f(&rows[0][1])), (0.98, 0.272));
    let scaled = f(&rows[0][column(&header, "scaled_runs")]);
    assert!((scaled - 17.0).abs() <= 1.7, "scaled runs {scaled}");
}

#[test]
fn fig3_default_region_spans_tens_to_hundreds_of_runs_per_spin() {
    let (header, rows) = csv(&ok_stdout(&["--quiet", "figure", "fig3"]));
    assert_eq!(rows.len(), 100 * 100);
    let c = column(&header, "runs_per_spin");
    let values: Vec<f64> = rows.iter().filter(|r| !r[c].is_empty()).map(|r| f(&r[c])).collect();
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(0.0, f64::max);
    // same order of magnitude as "between 20 and ~500"
    assert!((min / 20.0).log10().abs() < 1.0, "min {min}");
    assert!((max / 500.0).log10().abs() < 1.0, "max {max}");
}

#[test]
fn fig4_optimised_nu_saves_about_a_third() {
    let (header, rows) = csv(&ok_stdout(&["--quiet", "figure", "fig4", "--n-min", "10000", "--points", "5"]));
    let (r, opt, fixed) = (column(&header, "ratio"), column(&header, "runs_optimized"), column(&header, "runs_violation_nu"));
    for row in &rows {
        assert!(f(&row[opt]) <= f(&row[fixed]));
    }
    let ratio = f(&rows.last().unwrap()[r]);
    assert!((0.57..=0.77).contains(&ratio), "ratio {ratio}");
    assert!((ratio - 2.0 / 3.0).abs() < 0.01);
}

#[test]
fn fig5_more_runs_allow_less_squeezing() {
    let (header, rows) = csv(&ok_stdout(&["--quiet", "figure", "fig5", "--n-min", "100", "--n-max", "1000", "--points", "3"]));
    assert_eq!(header, ["n", "budget", "zeta2_max"]);
    assert_eq!(rows.len(), 9);
    let at = |n: &str, budget: &str| -> Option<f64> {
        let row = rows.iter().find(|r| r[0] == n && r[1] == budget).unwrap();
        (!row[2].is_empty()).then(|| f(&row[2]))
    };
    // infeasible cells are left empty
    assert_eq!(at("1000", "10000"), None);
    let z = at("1000", "1000000").unwrap();
    assert!((0.45..=0.55).contains(&z), "{z}");
    for n in ["100", "316", "1000"] {
        let (a, b) = (at(n, "100000").unwrap(), at(n, "1000000").unwrap());
        assert!(b > a);
        if let Some(c) = at(n, "10000") {
            assert!(a > c);
        }
    }
}

#[test]
fn unknown_subcommand_and_bad_flags_are_usage_errors() {
    for args in [&["frobnicate"][..], &["bound", "--n", "three", "--m", "2"], &["curve"], &["figure", "fig9"]] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty());
    }
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn domain_errors_exit_1_with_a_structured_object() {
    let cases = [
        (&["witness", "--m", "3", "--cb", "0.5", "--zeta2", "0.1"][..], "unsupported_setting_count"),
        (&["runs", "--cb", "0.5", "--zeta2", "0.9", "--n", "100"], "no_violation"),
        (&["curve", "--m", "2", "--cb-max", "1.5", "--points", "3"], "domain"),
        (&["squeeze", "--n", "1000", "--runs-budget", "10000", "--epsilon", "0.1"], "infeasible"),
        (&["crossover", "--ratio", "-3"], "no_crossover"),
        (&["bound", "--n", "40", "--m", "8", "--brute-force"], "enumeration_too_large"),
    ];
    for (args, code) in cases {
        let out = run(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?} wrote partial output");
        let err: Value = serde_json::from_slice(&out.stderr).unwrap();
        assert_eq!(err["error"], code, "{args:?}");
        assert!(err["detail"].as_str().is_some_and(|d| !d.is_empty()));
    }
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn out_writes_result_and_manifest_and_survives_failures() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.csv");
    let p = path.to_str().unwrap();
    let out = run(&["--out", p, "curve", "--m", "2", "--points", "5"]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty() && out.stderr.is_empty());
    let first = read(&path);
    assert_eq!(first.lines().count(), 6);

    let manifest: Value = serde_json::from_str(&read(&dir.path().join("curve.csv.manifest.json"))).unwrap();
    assert_eq!(manifest["subcommand"], "curve");
    assert_eq!(manifest["parameters"]["m"], "2");
    assert_eq!(manifest["parameters"]["points"], 5);
    assert_eq!(manifest["seed"], Value::Null);
    assert_eq!(manifest["tool_version"], env!("CARGO_PKG_VERSION"));
    assert!(chrono::DateTime::parse_from_rfc3339(manifest["timestamp"].as_str().unwrap()).is_ok());

    // a failing run leaves the previous file untouched and no temp files
    let out = run(&["--out", p, "curve", "--m", "2", "--cb-max", "2", "--points", "5"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(read(&path), first);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 2);
}

const SIM: [&str; 12] = [
    "simulate", "--model", "three-peak", "--n", "50", "--runs", "200", "--trials", "300", "--t0", "-0.01", "--quiet",
];

#[test]
fn seeded_output_is_identical_across_thread_counts() {
    let one = ok_stdout(&[&["--seed", "7", "--threads", "1"][..], &SIM].concat());
    let four = ok_stdout(&[&["--seed", "7", "--threads", "4"][..], &SIM].concat());
    assert_eq!(one, four);
    let env = bellstat()
        .env("BELLSTAT_THREADS", "3")
        .args([&["--seed", "7"][..], &SIM].concat())
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(env.stdout).unwrap(), one);
    let other = ok_stdout(&[&["--seed", "8"][..], &SIM].concat());
    assert_ne!(one, other);
    let v: Value = serde_json::from_str(&one).unwrap();
    assert_eq!(v["seed"], 7);
}

/// Turn a manifest back into an argument vector.
fn argv_from_manifest(m: &Value) -> Vec<String> {
    let mut argv = vec![m["subcommand"].as_str().unwrap().to_string()];
    for (key, value) in m["parameters"].as_object().unwrap() {
        match value {
            Value::Null | Value::Bool(false) => {}
            Value::Bool(true) => argv.push(format!("--{key}")),
            Value::String(s) => argv.extend([format!("--{key}"), s.clone()]),
            other => argv.extend([format!("--{key}"), other.to_string()]),
        }
    }
    if let Some(seed) = m["seed"].as_u64() {
        argv.extend(["--seed".into(), seed.to_string()]);
    }
    argv
}

#[test]
fn rerunning_from_a_manifest_reproduces_the_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sim.json");
    let args = [&["--seed", "11", "--out", path.to_str().unwrap()][..], &SIM[..SIM.len() - 1]].concat();
    assert!(run(&args).status.success());
    let manifest: Value = serde_json::from_str(&read(&dir.path().join("sim.json.manifest.json"))).unwrap();
    assert_eq!(manifest["seed"], 11);
    let replay = argv_from_manifest(&manifest);
    let replay: Vec<&str> = replay.iter().map(String::as_str).collect();
    assert_eq!(ok_stdout(&[&["--quiet"][..], &replay].concat()), read(&path));
}

#[test]
fn mixture_defaults_reproduce_the_statistics_loophole() {
    let v = json(&["--quiet", "simulate", "--model", "mixture", "--n", "10", "--runs", "2000", "--trials", "2000", "--t0", "0"]);
    assert!(v["mean_t"].as_f64().unwrap() >= 0.0);
    let p = v["empirical_p"].as_f64().unwrap();
    assert!((p - 0.5).abs() < 0.05, "false violation rate {p}");
    // no bound applies to a non-negative threshold
    assert_eq!(v["analytic_bernstein_p"], Value::Null);
}

#[test]
fn bernstein_bound_covers_the_worst_case_source() {
    let r = json(&["--quiet", "runs", "--cb", "0.98", "--zeta2", "0.272", "--n", "100", "--epsilon", "0.05"]);
    let (nu, t0, runs) = (r["nu"].as_f64().unwrap(), r["t0"].as_f64().unwrap(), r["runs"].as_u64().unwrap());
    let v = json(&[
        "--quiet", "--seed", "3", "simulate", "--model", "binomial", "--n", "100", "--nu", &nu.to_string(),
        "--runs", &runs.to_string(), "--trials", "2000", "--t0", &t0.to_string(),
    ]);
    let analytic = v["analytic_bernstein_p"].as_f64().unwrap();
    assert!(analytic <= 0.05 + 1e-12);
    let p = v["empirical_p"].as_f64().unwrap();
    let se = (0.05f64 * 0.95 / 2000.0).sqrt();
    assert!(p <= analytic + 3.0 * se, "{p} > {analytic}");
}

#[test]
fn runs_with_a_fixed_nu_is_never_better_than_the_optimum() {
    let base = ["--quiet", "runs", "--cb", "0.98", "--zeta2", "0.272", "--n", "100000"];
    let best = json(&base);
    assert!((best["runs_per_spin"].as_f64().unwrap() / (17.0 * 100f64.ln()) - 1.0).abs() < 0.1);
    for nu in ["1", "1.7911892574383628", "10"] {
        let fixed = json(&[&base[..], &["--nu", nu]].concat());
        assert!(fixed["runs"].as_u64() >= best["runs"].as_u64());
    }
    let chernoff = json(&[&base[..], &["--bound", "chernoff"]].concat());
    assert!(chernoff["runs"].as_u64() > best["runs"].as_u64());
}

#[test]
fn squeeze_sweep_and_crossover_from_support() {
    let (header, rows) = csv(&ok_stdout(&["--quiet", "squeeze", "--n-min", "10", "--n-max", "1000", "--points", "3"]));
    assert_eq!(header, ["n", "cb_star", "zeta2_star", "zeta2_star_asymptotic"]);
    assert_eq!(rows.iter().map(|r| r[0].as_str()).collect::<Vec<_>>(), ["10", "100", "1000"]);

    // symmetric support with t0 at the lower edge gives the extremal ratio 2
    let v = json(&["--quiet", "crossover", "--t-l", "-1", "--t-u", "1", "--t0", "-1"]);
    assert!((v["ratio"].as_f64().unwrap() - 2.0).abs() < 1e-15);
    assert!((v["epsilon_star"].as_f64().unwrap() - 0.127).abs() < 0.001);
}
