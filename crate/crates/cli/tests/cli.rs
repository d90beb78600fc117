use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn gl2thermo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gl2thermo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}):\n{}\nstderr:\n{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

#[test]
fn validate_accepts_minimal_spec() {
    let out = gl2thermo(&["validate", &fixture("identity.json")]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["command"], "validate");
    assert_eq!(r["result"]["valid"], true);
    assert_eq!(r["result"]["spec"]["shift"]["theta"], 0.5);
    assert_eq!(r["spec_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn validate_reports_located_errors() {
    let out = gl2thermo(&["validate", &fixture("not_primitive.json")]);
    assert_eq!(out.status.code(), Some(1));
    let errors = &report(&out)["result"]["errors"];
    assert_eq!(errors[0]["kind"], "NotPrimitive");
    assert_eq!(errors[0]["path"], "/shift/adjacency");

    let out = gl2thermo(&["validate", &fixture("singular.json")]);
    assert_eq!(out.status.code(), Some(1));
    let errors = &report(&out)["result"]["errors"];
    assert_eq!(errors[0]["kind"], "SingularMatrix");
    assert_eq!(errors[0]["path"], "/cocycle/generators/1");
}

#[test]
fn other_commands_reject_invalid_specs() {
    let out = gl2thermo(&["pressure", &fixture("singular.json")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("SingularMatrix"));
}

#[test]
fn unknown_subcommand_prints_usage() {
    let out = gl2thermo(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn classify_two_state_fixture() {
    let out = gl2thermo(&["classify", &fixture("two_diagonal.json"), "--depth", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out)["result"].clone();
    assert_eq!(r["branch"], "ReducibleTwoErgodic");
    let states = r["equilibrium_states"].as_array().unwrap();
    assert_eq!(states.len(), 2);
    let mass = states[0]["cylinders"]["weights"]["1-1-2"].as_f64().unwrap();
    assert!((mass - 4.0 / 27.0).abs() < 1e-12);
    assert_eq!(r["certificates"]["cohomology"]["status"], "NotCohomologous");
}

#[test]
fn classify_undetermined_exits_two() {
    let out = gl2thermo(&["classify", &fixture("near_tie.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["result"]["branch"], "Undetermined");
}

#[test]
fn classify_typical_emits_gibbs_weights() {
    let out = gl2thermo(&["classify", &fixture("typical.json"), "--gibbs-depth", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out)["result"].clone();
    assert_eq!(r["branch"], "Typical");
    let weights = r["equilibrium_states"][0]["cylinders"]["weights"].as_object().unwrap();
    assert_eq!(weights.len(), 64);
    let total: f64 = weights.values().map(|v| v.as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn pressure_bracket_collapses_for_identity() {
    let out = gl2thermo(&["pressure", &fixture("identity.json"), "--n-max", "12"]);
    assert_eq!(out.status.code(), Some(0));
    let est = &report(&out)["result"]["estimate"];
    let (lo, hi) = (est["lower"].as_f64().unwrap(), est["upper"].as_f64().unwrap());
    assert!(lo <= std::f64::consts::LN_2 + 1e-12 && hi >= std::f64::consts::LN_2 - 1e-12);
    assert!(hi - lo < 1e-9);
    assert_eq!(est["p_n"].as_array().unwrap().len(), 12);
}

#[test]
fn additive_pressure_of_named_potential() {
    let out = gl2thermo(&["pressure-additive", &fixture("two_diagonal.json"), "--potential", "log_a"]);
    assert_eq!(out.status.code(), Some(0));
    let value = report(&out)["result"]["value"].as_f64().unwrap();
    assert!((value - 3f64.ln()).abs() < 1e-10);

    let out = gl2thermo(&["pressure-additive", &fixture("two_diagonal.json")]);
    assert_eq!(out.status.code(), Some(1));
    let golden = report(&gl2thermo(&["pressure-additive", &fixture("golden_windowed.json")]))["result"]["value"]
        .as_f64()
        .unwrap();
    assert!((golden - ((1.0 + 5f64.sqrt()) / 2.0).ln()).abs() < 1e-10);
}

#[test]
fn typical_and_witness_exit_codes() {
    let out = gl2thermo(&["typical", &fixture("typical.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["status"], "Certified");

    let out = gl2thermo(&["typical", &fixture("two_diagonal.json")]);
    assert_eq!(out.status.code(), Some(2));

    let out = gl2thermo(&["witness", &fixture("two_diagonal.json"), "--line", "[1, 0]"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["result"]["witness"]["status"], "NoWitness");

    let out = gl2thermo(&["witness", &fixture("typical.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["witness"]["status"], "Homoclinic");
}

#[test]
fn livsic_on_named_potentials() {
    let out = gl2thermo(&["livsic", &fixture("two_diagonal.json"), "--phi", "log_a", "--psi", "log_c"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out)["result"].clone();
    assert_eq!(r["status"], "NotCohomologous");
    assert!((r["discrepancy"].as_f64().unwrap().abs() - std::f64::consts::LN_2).abs() < 1e-12);

    let out = gl2thermo(&["livsic", &fixture("two_diagonal.json"), "--phi", "log_a", "--psi", "log_a"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn holonomy_between_stable_partners() {
    let x = r#"{"left_period": [1], "core": [2], "right_period": [1]}"#;
    let y = r#"{"left_period": [2], "right_period": [1]}"#;
    let out = gl2thermo(&["holonomy", &fixture("typical.json"), "--x", x, "--y", y]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out)["result"].clone();
    assert_eq!(r["kind"], "stable");
    assert_eq!(r["exact"], true);
    // The points agree from coordinate 1 on, so H = A(y)⁻¹A(x).
    assert_eq!(r["truncation_n"], 1);

    let out = gl2thermo(&["holonomy", &fixture("typical.json"), "--x", x, "--y", y, "--kind", "unstable"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn seeded_runs_reproduce_payloads() {
    let spec = fixture("typical.json");
    let runs: Vec<Value> = (0..2)
        .map(|_| {
            report(&gl2thermo(&["lyapunov", &spec, "--n", "500", "--trials", "8", "--seed", "11", "--jobs", "2"]))["result"].clone()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    let qm: Vec<String> = (0..2)
        .map(|_| {
            report(&gl2thermo(&["qm", &spec, "--n", "6", "--samples", "300", "--seed", "5"]))["result"].to_string()
        })
        .collect();
    assert_eq!(qm[0], qm[1]);
    let other = report(&gl2thermo(&["qm", &spec, "--n", "6", "--samples", "300", "--seed", "6"]))["result"].to_string();
    assert_ne!(qm[0], other);
}

#[test]
fn measure_override() {
    let spec = fixture("two_diagonal.json");
    let out = gl2thermo(&["lyapunov", &spec, "--n", "400", "--trials", "4", "--measure", r#"{"bernoulli": [1, 0]}"#]);
    assert_eq!(out.status.code(), Some(0));
    let mean = report(&out)["result"]["mean"].as_f64().unwrap();
    assert!((mean - std::f64::consts::LN_2).abs() < 1e-12);

    let out = gl2thermo(&["lyapunov", &spec, "--measure", r#"{"bernoulli": [0.7, 0.7]}"#]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/measure"));
}

#[test]
fn gibbs_and_qm_reports() {
    let spec = fixture("typical.json");
    let g = report(&gl2thermo(&["gibbs", &spec, "--n", "4"]))["result"].clone();
    assert_eq!(g["measure"]["weights"].as_object().unwrap().len(), 16);
    assert!(g["gibbs_constant"].as_f64().unwrap() >= 1.0);

    let q = report(&gl2thermo(&["qm", &spec, "--n", "4"]))["result"].clone();
    assert_eq!(q["exhaustive"], true);
    assert_eq!(q["k_max"], 5);
    let c = q["c_estimate"].as_f64().unwrap();
    assert!(c > 0.0 && c <= 1.0);
}

#[test]
fn table_output() {
    let out = gl2thermo(&["classify", &fixture("two_diagonal.json"), "--output", "table"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().any(|l| l.starts_with("result.branch") && l.contains("ReducibleTwoErgodic")));
}

#[test]
fn windowed_cocycle_on_golden_mean() {
    let spec = fixture("golden_windowed.json");
    let out = gl2thermo(&["pressure", &spec, "--n-max", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let est = &report(&out)["result"]["estimate"];
    assert!(est["lower"].as_f64().unwrap() <= est["upper"].as_f64().unwrap());
    let out = gl2thermo(&["validate", &spec]);
    assert_eq!(out.status.code(), Some(0));
}
