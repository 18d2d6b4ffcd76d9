use std::path::Path;

use serde_json::Value;
use slope_chain_cli::{run, EXIT_ERROR, EXIT_OK};

const PLANAR: &str = r#"{
    "model": {"n": 2, "generators": [["1","0"],["0","1"]], "scales": ["3","2"]},
    "D": [1, 6],
    "epsilon": "1/2",
    "seed": 7,
    "limits": {"sample_count": 40}
}"#;

const WIDE: &str = r#"{
    "model": {"n": 2, "generators": [["1","0"],["0","1"]], "scales": ["100","10"]}
}"#;

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("cfg.json");
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv: Vec<&str> = std::iter::once("slope-chain").chain(args.iter().copied()).collect();
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn report(stdout: &str) -> Value {
    serde_json::from_str(stdout).unwrap()
}

#[test]
fn chain_build_wide_example() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), WIDE);
    let (code, out, _) = invoke(&["chain", "build", "-c", &cfg]);
    assert_eq!(code, EXIT_OK);
    let r = report(&out);
    assert_eq!(r["schema"], "slope-chain.report.v1");
    assert_eq!(r["status"], "ok");
    assert_eq!(r["result"]["dims"], serde_json::json!([0, 1, 2]));
    let radicands: Vec<&str> = r["result"]["steps"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["frak_s"]["radicand"].as_str().unwrap())
        .collect();
    assert_eq!(radicands, ["100", "10"]);
}

#[test]
fn chain_verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), WIDE);
    let (code, out, _) = invoke(&["chain", "verify", "-c", &cfg]);
    assert_eq!(code, EXIT_OK);
    let r = report(&out);
    assert_eq!(r["result"]["verified"], true);
    assert_eq!(r["result"]["telescoping"]["equal"], true);
}

#[test]
fn permutation_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &WIDE.replace(r#"["100","10"]"#, r#"["10","100"]"#));
    let (code, out, _) = invoke(&["chain", "build", "-c", &cfg]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(report(&out)["provenance"]["permutation"], serde_json::json!([1, 0]));
}

#[test]
fn locus_sweep_middle_regime_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), PLANAR);
    let csv_path = dir.path().join("sweep.csv");
    let (code, out, _) = invoke(&["locus", "sweep", "-c", &cfg, "--csv", csv_path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(report(&out)["result"]["monotone"], true);
    let mut rdr = csv::Reader::from_path(&csv_path).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let col = headers.iter().position(|h| h == "matched").unwrap();
    let matched: Vec<String> = rdr.records().map(|r| r.unwrap()[col].to_string()).collect();
    assert_eq!(matched, ["2", "2", "1", "1", "0", "0"]);
}

#[test]
fn polygon_export_csv_on_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), WIDE);
    let (code, out, _) = invoke(&["polygon", "export", "-c", &cfg]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "dim,phi_approx,e_1,e_2");
    assert_eq!(lines.len(), 4);
    assert!(lines[2].starts_with("1,") && lines[2].ends_with(",1,0"));
}

#[test]
fn out_flag_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), PLANAR);
    let out_path = dir.path().join("r.json");
    let (code, out, _) = invoke(&[
        "gamma",
        "check",
        "-c",
        &cfg,
        "--out",
        out_path.to_str().unwrap(),
        "--seed",
        "99",
        "--limit",
        "sample_count=5",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(out_path).unwrap()).unwrap();
    assert_eq!(r["provenance"]["seed"], 99);
    assert_eq!(r["config"]["limits"]["sample_count"], 5);
    assert_eq!(r["result"]["translation"]["samples"].as_array().unwrap().len(), 5);
    assert_eq!(r["result"]["translation"]["holds"], true);
    assert_eq!(r["result"]["distribution"]["lower_positive"], true);
}

#[test]
fn errors_exit_one_with_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = invoke(&["chain", "build"]);
    assert_eq!(code, EXIT_ERROR);
    assert_eq!(report(&out)["error"]["code"], "validation_error");

    let cfg = write_config(dir.path(), "{\"model\": }");
    let (code, out, err) = invoke(&["chain", "build", "-c", &cfg]);
    assert_eq!(code, EXIT_ERROR);
    assert_eq!(report(&out)["error"]["code"], "parse_error");
    assert!(err.contains("line 1"));

    let cfg = write_config(dir.path(), &PLANAR.replace("\"1/2\"", "\"1\""));
    let (code, out, _) = invoke(&["locus", "sweep", "-c", &cfg]);
    assert_eq!(code, EXIT_ERROR);
    assert_eq!(report(&out)["error"]["code"], "validation_error");

    let cfg = write_config(dir.path(), PLANAR);
    let (code, out, _) = invoke(&["locus", "rank", "-c", &cfg, "--limit", "matrix_max=10"]);
    assert_eq!(code, EXIT_ERROR);
    assert_eq!(report(&out)["error"]["code"], "matrix_too_large");

    let (code, _, _) = invoke(&["locus", "nope"]);
    assert_eq!(code, EXIT_ERROR);
}

#[test]
fn help_exits_zero() {
    let (code, out, _) = invoke(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("chain"));
}

#[test]
fn symbolic_model_needs_assignment_for_locus() {
    let text = r#"{
        "model": {"n": 2, "symbols": ["t1"],
                  "generators": [["1","0"], [{"const": "0", "coeffs": {"t1": "1"}}, "0"]],
                  "scales": ["4","4"]},
        "D": 2
    }"#;
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), text);
    let (code, out, _) = invoke(&["chain", "build", "-c", &cfg]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(report(&out)["result"]["dims"], serde_json::json!([0, 1, 2]));
    let (code, out, _) = invoke(&["locus", "rank", "-c", &cfg]);
    assert_eq!(code, EXIT_ERROR);
    assert_eq!(report(&out)["error"]["code"], "symbolic_model_not_specialized");
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), PLANAR);
    for cmd in [["locus", "sweep"], ["gamma", "check"], ["chain", "verify"]] {
        let a = invoke(&[cmd[0], cmd[1], "-c", &cfg]);
        let b = invoke(&[cmd[0], cmd[1], "-c", &cfg]);
        assert_eq!(a, b, "{cmd:?}");
    }
}
