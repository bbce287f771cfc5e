use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qhitting")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited")
}

fn json(args: &[&str]) -> Value {
    let mut args = args.to_vec();
    args.push("--json");
    let out = run(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

#[test]
fn validate_accepts_the_qubit_channel() {
    let v = json(&["validate", &fixture("qubit.json")]);
    assert_eq!(v["valid"], true);
    assert_eq!(v["irreducibility"]["verdict"], "certified_irreducible");
    assert_eq!(v["positivity"]["verdict"], "completely_positive");
    let pi = &v["invariant_state"];
    assert!((num(&pi[0][0][0]) - 0.5).abs() < 1e-12);
    assert!((num(&pi[1][1][0]) - 0.5).abs() < 1e-12);
    assert!(num(&pi[0][1][0]).abs() < 1e-12);
}

#[test]
fn validate_rejects_invalid_maps() {
    let out = run(&["validate", &fixture("zero_map.json"), "--json"]);
    assert_eq!(code(&out), 2);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["trace_preserving"], false);
    assert_eq!(v["irreducibility"]["evaluated"], false);

    let out = run(&["validate", &fixture("reducible.json"), "--json"]);
    assert_eq!(code(&out), 2);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["irreducibility"]["verdict"], "not_irreducible");
    assert_eq!(v["irreducibility"]["fixed_space_dim"], 2);
}

#[test]
fn hit_refuses_an_invalid_map() {
    let out = run(&["hit", &fixture("reducible.json"), &fixture("two_state_query.json")]);
    assert_eq!(code(&out), 2);
    let out = run(&["hit", &fixture("zero_map.json"), &fixture("qubit_phi.json")]);
    assert_eq!(code(&out), 2);
}

#[test]
fn qubit_routes_agree() {
    let v = json(&["hit", &fixture("qubit.json"), &fixture("qubit_phi.json")]);
    assert_eq!(v["method"], "all");
    assert!((num(&v["tau"]) - 6.0).abs() < 1e-9);
    assert!((num(&v["routes"]["direct"]) - 6.0).abs() < 1e-9);
    assert!((num(&v["routes"]["mhtf"]["value"]) - 6.0).abs() < 1e-9);
    assert!((num(&v["routes"]["mhtf"]["return_term"]) - 4.0).abs() < 1e-9);
    assert!((num(&v["routes"]["mhtf"]["cross_term"]) + 2.0).abs() < 1e-9);
    assert!((num(&v["routes"]["series"]["value"]) - 6.0).abs() < 1e-8);
    assert!(num(&v["max_route_deviation"]) < 1e-8);
    assert!(num(&v["hitting_probability_residual"]) < 1e-10);
    assert!((num(&v["initial"]["input_scale"]) - 2f64.sqrt()).abs() < 1e-15);
    assert!(v["diagnostics"]["spectral_radius_qphi"].is_number());
    assert!(v["diagnostics"]["condition_estimate"].is_number());
}

#[test]
fn qubit_overlapping_start_uses_the_general_formula() {
    let v = json(&["hit", &fixture("qubit.json"), &fixture("qubit_chi.json")]);
    assert!((num(&v["tau"]) - 2.0).abs() < 1e-9);
    assert_eq!(v["routes"]["mhtf"]["formula"], "general");
    assert!((num(&v["routes"]["mhtf"]["survival_weight"]) - 1.0 / 6.0).abs() < 1e-12);
}

#[test]
fn four_level_mean_hitting_time() {
    let v = json(&["hit", &fixture("four_level.json"), &fixture("four_level_chi.json")]);
    assert!((num(&v["tau"]) - 3.53125).abs() < 1e-10);
    assert!(num(&v["max_route_deviation"]) < 1e-8);
}

#[test]
fn method_flag_overrides_the_query_file() {
    let v = json(&["hit", &fixture("qubit.json"), &fixture("qubit_phi.json"), "--method", "series"]);
    assert_eq!(v["method"], "series");
    assert!(v["routes"]["direct"].is_null());
    assert!(v.get("max_route_deviation").is_none());
    assert!((num(&v["tau"]) - 6.0).abs() < 1e-8);
}

#[test]
fn two_state_chain() {
    let v = json(&["hit", &fixture("two_state.json"), &fixture("two_state_query.json")]);
    assert!((num(&v["tau"]) - 2.0).abs() < 1e-9);
}

#[test]
fn forced_orthogonal_route_is_a_precondition_failure() {
    let out = run(&["hit", &fixture("qubit.json"), &fixture("qubit_chi.json"), "--method", "mhtf", "--orthogonal"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("support condition"));
}

#[test]
fn batch_keeps_input_order_and_reports_failures() {
    let out = run(&["hit", &fixture("qubit.json"), &fixture("qubit_batch.json"), "--json"]);
    assert_eq!(code(&out), 3);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let items = v.as_array().unwrap();
    assert_eq!(items.len(), 4);
    for (i, item) in items.iter().enumerate() {
        assert_eq!(item["query"], i + 1);
    }
    assert!((num(&items[0]["tau"]) - 6.0).abs() < 1e-9);
    assert_eq!(items[1]["method"], "mhtf");
    assert_eq!(items[2]["error"]["code"], 3);
    assert_eq!(items[3]["method"], "series");
    assert!((num(&items[3]["initial"]["input_scale"]) - 2.0).abs() < 1e-15);
}

#[test]
fn parse_errors_exit_one() {
    let dir = std::env::temp_dir().join(format!("qhitting-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{\n  \"dim\": 2,\n  \"kraus\": [[[1, 0], [0, \"x\"]]]\n}\n").unwrap();
    let out = run(&["validate", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("kraus") && err.contains("line 3"), "{err}");

    let out = run(&["validate", &fixture("missing.json")]);
    assert_eq!(code(&out), 1);
    let out = run(&["frobnicate"]);
    assert_eq!(code(&out), 1);
    let out = run(&["classical", &fixture("qubit.json"), "kac", "--state", "1"]);
    assert_eq!(code(&out), 1);
    let out = run(&["classical", &fixture("two_state.json"), "--row-stochastic", "kac", "--state", "1"]);
    assert_eq!(code(&out), 1, "explicit column orientation conflicts with the row flag");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
}

#[test]
fn classical_kac_and_mhtf() {
    let v = json(&["classical", &fixture("two_state.json"), "kac", "--state", "1"]);
    assert!((num(&v["tau"]) - 2.0).abs() < 1e-12);
    assert!(num(&v["embedded_deviation"]) < 1e-8);
    let v = json(&["classical", &fixture("three_cycle.json"), "mhtf", "--from", "1", "--to", "3"]);
    assert!((num(&v["tau"]) - 2.0).abs() < 1e-9);
    let out = run(&["classical", &fixture("three_cycle.json"), "mhtf", "--from", "2", "--to", "2"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn classical_distribution_with_monte_carlo() {
    let args = [
        "classical",
        &fixture("two_state.json"),
        "dist",
        "--distribution",
        "1,1",
        "--to",
        "2",
        "--trials",
        "20000",
        "--seed",
        "11",
    ];
    let v = json(&args);
    assert!((num(&v["tau"]) - 2.0).abs() < 1e-9);
    assert!((num(&v["distribution_input_sum"]) - 2.0).abs() < 1e-15);
    let mc = &v["monte_carlo"];
    assert_eq!(mc["rng"], "ChaCha8");
    assert_eq!(mc["seed"], 11);
    assert!(num(&mc["z_score"]).abs() < 4.0);
}

#[test]
fn classical_subset_on_the_cycle() {
    let v = json(&["classical", &fixture("three_cycle.json"), "subset", "--from", "1", "--set", "2,3"]);
    assert!((num(&v["tau"]) - 1.0).abs() < 1e-9);
    let rt = v["return_times"].as_array().unwrap();
    assert_eq!(rt.len(), 2);
    assert!((num(&rt[0]["tau"]) - 1.0).abs() < 1e-9);
    assert!((num(&rt[1]["tau"]) - 2.0).abs() < 1e-9);
    assert!(num(&v["j_spread"]) <= 1e-9);
}

#[test]
fn output_is_byte_stable() {
    for args in [
        vec!["hit", &fixture("qubit.json"), &fixture("qubit_batch.json"), "--json"],
        vec!["hit", &fixture("four_level.json"), &fixture("four_level_chi.json")],
        vec![
            "classical",
            &fixture("two_state.json"),
            "dist",
            "--distribution",
            "0.3,0.7",
            "--to",
            "1",
            "--trials",
            "5000",
            "--seed",
            "9",
        ],
        vec!["validate", &fixture("qubit.json"), "--seed", "4", "--json"],
    ]
    .iter()
    {
        let a = run(args);
        let b = run(args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert!(!a.stdout.is_empty());
    }
}

#[test]
fn digits_control_table_precision() {
    let out = run(&["hit", &fixture("qubit.json"), &fixture("qubit_phi.json"), "--digits", "3"]);
    let text = String::from_utf8_lossy(&out.stdout);
    let line = text.lines().find(|l| l.starts_with("condition of I-QPhi")).unwrap();
    assert!(line.ends_with(" 20.2"), "{line}");
}

#[test]
fn selftest_passes_and_detects_perturbation() {
    let out = run(&["selftest", "--json"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], true);

    let out = run(&["selftest", "--perturb"]);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("qubit Z"));
}
