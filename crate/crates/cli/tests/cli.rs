//! End-to-end tests of the binary: output contracts, exit codes,
//! determinism.

use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tailbounds"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn bound_zero_deviation_is_one() {
    let out = run(&[
        "bound", "--dist", "binomial", "--n", "2", "--p", "0.4", "--side", "upper", "--a", "0",
        "--bound", "1.4a",
    ]);
    let v = json(&out);
    assert_eq!(v["value"], 1.0);
    assert_eq!(v["log_value"], 0.0);
    assert_eq!(v["in_validity_domain"], true);
    assert_eq!(v["spec"], "binomial(n=2, p=2/5)");
}

#[test]
fn bound_variance_kernel_value() {
    let out = run(&[
        "bound", "--dist", "moments", "--lambda", "4", "--sigma2", "2", "--side", "upper",
        "--a", "2", "--bound", "1.13",
    ]);
    let v = json(&out);
    let value = v["value"].as_f64().unwrap();
    assert!((value - 0.46181600618316564).abs() < 1e-12);
}

#[test]
fn bound_beyond_domain_reports_invalid() {
    let out = run(&[
        "bound", "--dist", "binomial", "--n", "10", "--p", "0.3", "--side", "upper", "--a", "8",
        "--bound", "1.2",
    ]);
    let v = json(&out);
    assert_eq!(v["value"], 0.0);
    assert_eq!(v["in_validity_domain"], false);
}

#[test]
fn bound_clamp_is_opt_in() {
    // 1.4c turns vacuous (above 1) once a > 3npq; without --clamp the raw
    // value is reported.
    let args = [
        "bound", "--dist", "binomial", "--n", "20", "--p", "0.05", "--side", "upper", "--a", "9",
        "--bound", "1.4c",
    ];
    let v = json(&run(&args));
    assert!(v["value"].as_f64().unwrap() > 1.0);
    let mut clamped = args.to_vec();
    clamped.push("--clamp");
    let v = json(&run(&clamped));
    assert_eq!(v["value"], 1.0);
}

#[test]
fn compare_grid_has_no_violations() {
    let out = run(&[
        "compare", "--dist", "binomial", "--n", "20", "--p", "0.1", "--side", "upper",
        "--a-min", "1", "--a-max", "18",
    ]);
    let v = json(&out);
    assert_eq!(v["rows"].as_array().unwrap().len(), 18);
    assert_eq!(v["violations"], 0);
}

#[test]
fn compare_reports_exact_fraction() {
    let out = run(&[
        "compare", "--dist", "heterogeneous", "--ps", "1/5,3/5", "--side", "upper",
    ]);
    let v = json(&out);
    let fractions: Vec<&str> = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .filter_map(|r| r["exact_fraction"].as_str())
        .collect();
    assert!(fractions.contains(&"17/25"), "fractions: {fractions:?}");
}

#[test]
fn compare_csv_shape() {
    let out = run(&[
        "compare", "--dist", "binomial", "--n", "6", "--p", "0.5", "--side", "lower", "--csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("spec,side,a,exact_log_tail,exact_fraction"));
    assert!(header.contains("1.7a_log"));
    assert!(header.ends_with("tightest_bound_id,violation"));
    assert_eq!(lines.count(), 4); // thresholds 0..=3 for EX = 3
}

#[test]
fn compare_occupancy_uses_exact_moments() {
    let out = run(&[
        "oracle", "--model", "occupancy", "--n", "3", "--m", "2",
    ]);
    let v = json(&out);
    assert_eq!(v["lambda"]["fraction"], "4/3");
    assert_eq!(v["sigma2"]["fraction"], "2/9");

    let out = run(&[
        "compare", "--model", "occupancy", "--n", "3", "--m", "2", "--exact-moments",
        "--side", "lower",
    ]);
    let v = json(&out);
    assert_eq!(v["violations"], 0);
    let row = &v["rows"][0];
    assert!(row["bounds"].get("1.13").is_some());
    assert!(row["bounds"].get("3.8").is_some());
}

#[test]
fn compare_flags_violation_when_variance_bound_is_forced() {
    // The conditioned binomial near its threshold has a heavier tail than
    // any variance-based profile: forcing 1.13 onto it must trip the
    // built-in falsification check and exit 1.
    let out = run(&[
        "compare", "--model", "conditioned-binomial", "--n", "512", "--p", "0.5", "--k", "282",
        "--bounds", "1.13", "--side", "upper",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["violations"].as_u64().unwrap() > 0);
}

#[test]
fn oracle_binomial_exact_tail() {
    let out = run(&[
        "oracle", "--dist", "binomial", "--n", "10", "--p", "0.3", "--side", "upper", "--a", "3",
    ]);
    let v = json(&out);
    assert_eq!(v["tail"]["probability"]["fraction"], "236744937/5000000000");
    assert_eq!(v["exact"], true);
}

#[test]
fn decompose_barbour_is_not_real_rooted() {
    let v = json(&run(&["decompose", "--model", "barbour"]));
    assert_eq!(v["real_rooted"], false);
    assert_eq!(v["conjugate_pairs"], 1);
    assert!(v.get("decomposition").is_none() || v["decomposition"].is_null());
}

#[test]
fn decompose_occupancy_reconciles_moments() {
    let v = json(&run(&["decompose", "--model", "occupancy", "--n", "3", "--m", "2"]));
    assert_eq!(v["real_rooted"], true);
    let d = &v["decomposition"];
    assert!((d["sum_p"].as_f64().unwrap() - 4.0 / 3.0).abs() < 1e-12);
    assert!((d["sum_pq"].as_f64().unwrap() - 2.0 / 9.0).abs() < 1e-12);
    assert!(d["residual"].as_f64().unwrap() < 1e-20);
}

#[test]
fn decompose_binomial_recovers_p() {
    let v = json(&run(&["decompose", "--dist", "binomial", "--n", "2", "--p", "0.5"]));
    let ps = v["decomposition"]["ps"].as_array().unwrap();
    assert_eq!(ps.len(), 2);
    for p in ps {
        assert!((p.as_f64().unwrap() - 0.5).abs() < 1e-12);
    }
}

#[test]
fn simulate_is_deterministic_and_clean() {
    let args = [
        "simulate", "--model", "hypergeometric", "--N", "50", "--m", "20", "--n", "10",
        "--j", "1", "--seed", "42", "--trials", "30000",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout, "identical flags + seed must be byte-identical");
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["violations"], 0);
}

#[test]
fn simulate_occupancy_mean_within_three_standard_errors() {
    let out = run(&[
        "simulate", "--model", "occupancy", "--n", "20", "--m", "30", "--j", "7", "--seed", "7",
        "--trials", "100000",
    ]);
    let v = json(&out);
    assert_eq!(v["violations"], 0);
    let mean = v["x_mean"].as_f64().unwrap();
    let se = v["x_standard_error"].as_f64().unwrap();
    let exact = v["exact_mean"]["value"].as_f64().unwrap();
    assert!((mean - exact).abs() <= 3.0 * se, "{mean} vs {exact} (se {se})");
    // EX = n (1 - 1/n)^m.
    assert!((exact - 20.0 * (19.0f64 / 20.0).powi(30)).abs() < 1e-12);
}

#[test]
fn simulate_manifest_runs_all_entries() {
    let manifest = r#"[
        {"model": {"kind": "hypergeometric", "N": 8, "m": 3, "n": 4}, "j": 0, "seed": 5, "trials": 2000},
        {"model": {"kind": "occupancy", "n": 5, "m": 6}, "j": 2, "seed": 9, "trials": 2000}
    ]"#;
    let dir = std::env::temp_dir().join("tailbounds-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("manifest.json");
    std::fs::write(&path, manifest).unwrap();
    let out = run(&["simulate", "--manifest", path.to_str().unwrap()]);
    let v = json(&out);
    let entries = v.as_array().unwrap();
    assert_eq!(entries.len(), 2);
    for e in entries {
        assert_eq!(e["violations"], 0);
    }
}

#[test]
fn simulate_witness_reports_certificate() {
    let out = run(&["simulate", "--model", "conditioned-binomial", "--alpha", "4"]);
    let v = json(&out);
    assert_eq!(v["exceeds_target"], true);
    assert!(v["variance"]["value"].as_f64().unwrap() > 10.0);
    let tail = v["exact_tail"]["value"].as_f64().unwrap();
    assert!(tail > v["target"].as_f64().unwrap());
    assert!(v["exact_tail"]["fraction"].as_str().unwrap().contains('/'));
}

#[test]
fn usage_errors_exit_two() {
    let out = run(&["bound", "--dist", "binomial", "--n", "10"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["bound", "--dist", "binomial", "--n", "10", "--p", "2", "--side", "upper",
        "--a", "1", "--bound", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["bound", "--dist", "binomial", "--n", "10", "--p", "0.7", "--side",
        "lower", "--a", "1", "--bound", "1.10"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn poisson_bounds_and_oracle() {
    let out = run(&[
        "bound", "--dist", "poisson", "--lambda", "4", "--side", "upper", "--a", "4",
        "--bound", "chernoff",
    ]);
    let v = json(&out);
    // Exponent -4 h(1) = -4 (2 ln 2 - 1).
    let expect = -4.0 * (2.0 * 2f64.ln() - 1.0);
    assert!((v["log_value"].as_f64().unwrap() - expect).abs() < 1e-8);

    let out = run(&[
        "oracle", "--dist", "poisson", "--lambda", "1", "--side", "upper", "--a", "1",
    ]);
    let v = json(&out);
    // P(Po(1) >= 2) = 1 - 2/e.
    let tail = v["tail"]["probability"]["value"].as_f64().unwrap();
    assert!((tail - (1.0 - 2.0 / std::f64::consts::E)).abs() < 1e-14);

    let out = run(&["compare", "--dist", "poisson", "--lambda", "4", "--side", "upper",
        "--a-min", "1", "--a-max", "8"]);
    let v = json(&out);
    assert_eq!(v["violations"], 0);
}
