use std::process::{Command, Output};

use serde_json::Value;

fn pot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pot")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn field(text: &str, label: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(label).filter(|rest| rest.starts_with(' ')))
        .unwrap_or_else(|| panic!("no {label} line in {text}"))
        .trim()
        .to_string()
}

#[test]
fn pot_examples() {
    let out = pot(&["pot", "--sigma2", "1", "--rho", "0", "--r", "1", "--levels", "2"]);
    assert!(out.status.success());
    assert_eq!(field(&stdout(&out), "PoT"), "1.484224");

    let out = pot(&["pot", "--sigma2", "1", "--rho", "0", "--r", "1", "--levels", "1"]);
    assert_eq!(field(&stdout(&out), "PoT"), "1.000000");
}

#[test]
fn invalid_model_exits_2() {
    let out = pot(&["equilibrium", "--sigma2", "1", "--rho", "0.3", "--r", "0.05"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("r > rho^2"), "{err}");

    let out = pot(&["pot", "--sigma2", "-1", "--rho", "0", "--r", "1", "--levels", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(pot(&["equilibrium", "--sigma2", "1", "--rho", "0"]).status.code(), Some(1));
    assert_eq!(
        pot(&["equilibrium", "--sigma2", "1", "--rho", "0", "--r", "1", "--nope"]).status.code(),
        Some(1)
    );
    assert_eq!(pot(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(pot(&["pot", "--sigma2", "1", "--rho", "0", "--r", "1", "--levels", "0"]).status.code(), Some(1));
    assert_eq!(pot(&["--help"]).status.code(), Some(0));
}

#[test]
fn non_convergence_exits_3() {
    let out = pot(&["quantizer", "--variance", "1", "--levels", "16", "--max-iter", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8(out.stderr).unwrap().contains("did not converge"));
}

#[test]
fn negative_rho_accepted() {
    let out = pot(&["equilibrium", "--sigma2", "1", "--rho", "-0.5", "--r", "0.5"]);
    assert!(out.status.success());
    assert_eq!(field(&stdout(&out), "alpha"), "1");
}

#[test]
fn equilibrium_json_round_trip() {
    let args = ["equilibrium", "--sigma2", "2.5", "--rho", "0.3", "--r", "0.7", "--json"];
    let first: Value = serde_json::from_slice(&pot(&args).stdout).unwrap();
    let eq = &first["equilibrium"];
    assert!((eq["alpha"].as_f64().unwrap() - 2.0 / (eq["A"].as_f64().unwrap() + 1.0)).abs() < 1e-15);

    let m = &first["model"];
    let again = pot(&[
        "equilibrium",
        "--sigma2",
        &m["sigma2"].to_string(),
        "--rho",
        &m["rho"].to_string(),
        "--r",
        &m["r"].to_string(),
        "--json",
    ]);
    let second: Value = serde_json::from_slice(&again.stdout).unwrap();
    assert_eq!(first, second);
}

#[test]
fn quantizer_json_round_trip() {
    let out = pot(&["quantizer", "--variance", "1", "--levels", "4", "--json"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["distortion"].as_f64().unwrap() - 0.117481847829329).abs() < 1e-12);
    let q: pot_core::Quantizer = serde_json::from_value(v["quantizer"].clone()).unwrap();
    assert_eq!(q.k(), 4);
    assert_eq!(pot_core::quantizer_distortion(&q, 1.0), v["distortion"].as_f64().unwrap());
}

#[test]
fn pot_json_matches_text() {
    let base = ["pot", "--sigma2", "3", "--rho", "0.2", "--r", "0.8", "--levels", "8"];
    let text = stdout(&pot(&base));
    let mut with_json = base.to_vec();
    with_json.push("--json");
    let v: Value = serde_json::from_slice(&pot(&with_json).stdout).unwrap();
    let pot_value = v["report"]["pot"].as_f64().unwrap();
    assert_eq!(field(&text, "PoT"), format!("{pot_value:.6}"));
}

#[test]
fn sweep_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let svg = dir.path().join("sweep.svg");
    let out = pot(&[
        "sweep",
        "--sigma2",
        "1",
        "--rho",
        "-0.2:0.2:0.2",
        "--r",
        "0.03:1.03:0.25",
        "--levels",
        "2,4",
        "--out",
        csv.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "sigma2,rho,r,k,alpha,kappa,D_R,D_S,est_variance,d_k,J_R_star,J_R_starstar,PoT,status"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3 * 5 * 2);
    assert_eq!(rows[0], "1,-0.2,0.03,2,,,,,,,,,,invalid_r_le_rho2");
    assert!(rows.iter().filter(|r| r.ends_with(",ok")).count() == 26);

    let chart = std::fs::read_to_string(&svg).unwrap();
    assert!(chart.starts_with("<svg"));
    assert_eq!(chart.matches("<polyline").count(), 2);
    assert!(chart.contains("PoT vs r"));
}

#[test]
fn sweep_bad_range_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("x.csv");
    let out = pot(&[
        "sweep", "--sigma2", "1", "--rho", "0:1", "--r", "1", "--levels", "2", "--out", csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulate_is_byte_identical() {
    let args = [
        "simulate", "--sigma2", "1", "--rho", "0", "--r", "1", "--levels", "2", "--samples", "50000", "--seed", "5",
    ];
    let a = pot(&args);
    let b = pot(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    for q in ["J_R", "J_S", "D_S", "cross1", "cross2", "PoT"] {
        assert!(text.lines().any(|l| l.starts_with(q)), "missing {q}");
    }
}

#[test]
fn bestresponse_reports_both_argmins() {
    let out = pot(&[
        "bestresponse",
        "--sigma2",
        "1",
        "--rho",
        "0",
        "--r",
        "1",
        "--levels",
        "4",
        "--alpha-min",
        "0",
        "--alpha-max",
        "1.5",
        "--alpha-step",
        "0.005",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(field(&text, "equilibrium"), "0.61803398875");
    assert!(field(&text, "argmin J_S").starts_with("0.62 "));
    assert!(field(&text, "argmin D_S+D_Q").starts_with("0.65 "));
    // header plus 301 rows
    assert_eq!(text.lines().take_while(|l| !l.is_empty()).count(), 302);
}
