use std::process::Command;

use serde_json::{json, Value};
use tstruct_core::cli_io::{self, EXIT_FAIL, EXIT_INTERNAL, EXIT_OK, EXIT_PARSE};

fn run(args: &[&str]) -> (Vec<Value>, String, i32) {
    run_env(args, None)
}

fn run_env(args: &[&str], seed: Option<&str>) -> (Vec<Value>, String, i32) {
    let mut full = vec!["tstruct"];
    full.extend_from_slice(args);
    let (out, err, code) = cli_io::run(full, seed.map(String::from));
    let lines = out.lines().map(|l| serde_json::from_str(l).expect("json line")).collect();
    (lines, err, code)
}

fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

const OCO: &str = r#"{"p": {"eta": 0, "x": 2}}"#;

#[test]
fn check_datum_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let oco = write(&dir, "oco.json", OCO);
    let (l, _, code) = run(&["check-datum", "--space", "SIER", "--datum", "S"]);
    assert_eq!(code, EXIT_OK, "{l:?}");
    assert_eq!(run(&["check-datum", "--space", "SIER", "--datum", "T"]).2, EXIT_OK);
    let (l, _, code) = run(&["check-datum", "--space", "SIER", "--datum", &oco]);
    assert_eq!(code, EXIT_FAIL);
    assert_eq!(l[0]["witness"]["generic"], "eta");
    assert_eq!(l[0]["witness"]["special"], "x");
}

#[test]
fn datum_operations() {
    let dir = tempfile::tempdir().unwrap();
    let (l, _, code) = run(&["dual", "--space", "CHAIN3", "--datum", "T"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(l[0], json!({"p": {"eta": 0, "y": 1, "x": 2}}));
    let (l, _, _) = run(&["convolve", "--space", "SIER", "--datum", "S", "--datum2", "S"]);
    assert_eq!(l[0], json!({"p": {"eta": 0, "x": 2}}));
    let oco = write(&dir, "oco.json", OCO);
    let (l, _, code) = run(&["residuate", "--space", "SIER", "--datum", &oco, "--datum2", "S"]);
    assert_eq!(code, EXIT_FAIL);
    assert_eq!(l[0], json!({"no_solution": {"generic": "eta", "special": "x"}}));
    let (l, _, code) = run(&["residuate", "--space", "SIER", "--datum", "S", "--datum2", &oco]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(l[0], json!({"p": {"eta": 0, "x": 1}}));
}

#[test]
fn levels_form_matches_function_form() {
    let dir = tempfile::tempdir().unwrap();
    let levels = write(&dir, "lv.json", r#"{"full_below": 0, "levels": [["x"], ["x"]]}"#);
    let (l, _, code) = run(&["convolve", "--space", "SIER", "--datum", &levels, "--datum2", "T"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(l[0], json!({"p": {"eta": 0, "x": 2}}));
}

#[test]
fn truncate_examples() {
    let dir = tempfile::tempdir().unwrap();
    let oco = write(&dir, "oco.json", OCO);
    let j = write(&dir, "j.json", cli_io::J_SHRIEK_JSON);
    let (l, _, code) = run(&["truncate", "--space", "SIER", "--datum", &oco, "--complex", &j]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(l[0]["m_lt"]["cohomology"], json!({"1": {"eta": 0, "x": 1}}));
    assert_eq!(l[0]["m_geq"]["cohomology"], json!({"0": {"eta": 1, "x": 1}}));
    assert_eq!(l[0]["certificates"]["lt"]["side"], "leq");

    let kx = write(&dir, "k.json", r#"{"lo": 0, "terms": [{"stalks": {"eta": 1, "x": 1}, "transitions": {"x->eta": [[1]]}}]}"#);
    let (l, _, _) = run(&["truncate", "--space", "SIER", "--datum", "S", "--complex", &kx]);
    assert_eq!(l[0]["m_lt"]["cohomology"], json!({}));
    assert_eq!(l[0]["m_geq"]["cohomology"], json!({"0": {"eta": 1, "x": 1}}));

    // standard truncation for the trivial datum
    let two = write(
        &dir,
        "two.json",
        r#"{"lo": -1, "terms": [{"stalks": {"x": 1}}, {"stalks": {"eta": 1, "x": 1}, "transitions": {"x->eta": [[1]]}}], "differentials": [{"x": [[0]]}]}"#,
    );
    let (l, _, _) = run(&["truncate", "--space", "SIER", "--datum", "T", "--complex", &two]);
    assert_eq!(l[0]["m_lt"]["cohomology"], json!({"-1": {"eta": 0, "x": 1}}));
    assert_eq!(l[0]["m_geq"]["cohomology"], json!({"0": {"eta": 1, "x": 1}}));
}

#[test]
fn heart_cohomology_command() {
    let dir = tempfile::tempdir().unwrap();
    let oco = write(&dir, "oco.json", OCO);
    let j = write(&dir, "j.json", cli_io::J_SHRIEK_JSON);
    let (l, _, code) = run(&["phi-cohomology", "--space", "SIER", "--datum", &oco, "--complex", &j, "--n", "-1"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(l[0]["heart"]["cohomology"], json!({"1": {"eta": 0, "x": 1}}));
    let (l, _, _) = run(&["phi-cohomology", "--space", "SIER", "--datum", &oco, "--complex", &j, "--n", "0"]);
    assert_eq!(l[0]["heart"]["cohomology"], json!({"0": {"eta": 1, "x": 1}}));
}

#[test]
fn rational_entries_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let c = write(
        &dir,
        "q.json",
        r#"{"lo": 0, "terms": [{"stalks": {"eta": 1, "x": 1}, "transitions": {"x->eta": [["1/2"]]}}]}"#,
    );
    let (l, err, code) = run(&["truncate", "--space", "SIER", "--datum", "T", "--complex", &c, "--field", "Q"]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert_eq!(l[0]["m_geq"]["cohomology"], json!({"0": {"eta": 1, "x": 1}}));
    // F2 cannot read a fraction
    let (_, _, code) = run(&["truncate", "--space", "SIER", "--datum", "T", "--complex", &c]);
    assert_eq!(code, EXIT_PARSE);
}

#[test]
fn parse_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad_json = write(&dir, "bad.json", "{");
    let decreasing = write(&dir, "dec.json", r#"{"p": {"eta": 1, "x": 0}}"#);
    let cycle = write(
        &dir,
        "cyc.json",
        r#"{"points": [{"id": "a", "codim": 0}, {"id": "b", "codim": 1}], "specializations": [["a", "b"], ["b", "a"]]}"#,
    );
    let d2 = write(
        &dir,
        "d2.json",
        r#"{"lo": 0, "terms": [{"stalks": {"x": 1}}, {"stalks": {"x": 1}}, {"stalks": {"x": 1}}], "differentials": [{"x": [[1]]}, {"x": [[1]]}]}"#,
    );
    for args in [
        vec!["check-datum", "--space", "SIER", "--datum", &bad_json],
        vec!["check-datum", "--space", "SIER", "--datum", &decreasing],
        vec!["check-datum", "--space", &cycle, "--datum", "T"],
        vec!["truncate", "--space", "SIER", "--datum", "T", "--complex", &d2],
        vec!["check-datum", "--space", "SIER"],
        vec!["dual", "--space", "/nonexistent/file.json", "--datum", "T"],
        vec!["verify", "--suite", "nonsense"],
        vec!["check-datum", "--space", "SIER", "--datum", "T", "--field", "Fp:4"],
    ] {
        let (_, err, code) = run(&args);
        assert_eq!(code, EXIT_PARSE, "{args:?}: {err}");
        assert!(!err.is_empty());
    }
}

#[test]
fn exit_code_constants_are_distinct() {
    let codes = [EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_INTERNAL];
    assert_eq!(codes, [0, 1, 2, 3]);
}

#[test]
fn verify_is_byte_deterministic_and_seedable() {
    let base = ["tstruct", "verify", "--suite", "axioms,exactness", "--samples", "3", "--field", "Fp:7"];
    let with = |extra: &[&str], env: Option<&str>| {
        let args: Vec<&str> = base.iter().chain(extra).copied().collect();
        cli_io::run(args, env.map(String::from))
    };
    let a = with(&[], None);
    assert_eq!(a, with(&[], None));
    assert_eq!(a.2, EXIT_OK);
    let with_flag = with(&["--seed", "9"], None);
    assert_eq!(with_flag, with(&["--seed", "1"], Some("9")));
    assert_ne!(a.0, with_flag.0);
}

#[test]
fn verify_single_point_degenerate_pass() {
    let (l, _, code) = run(&["verify", "--max-points", "1", "--suite", "criterion,algebra,residuation"]);
    assert_eq!(code, EXIT_OK);
    let summary = &l.last().unwrap()["summary"];
    assert_eq!(summary["failed"], 0);
    assert!(summary["checks"].as_u64().unwrap() > 0);
}

#[test]
fn mutations_fail_with_witness() {
    for m in ["drop-monotonicity", "break-d2", "sigma-convention"] {
        let (l, _, code) = run(&["verify", "--max-points", "2", "--mutate", m]);
        assert_eq!(code, EXIT_FAIL, "{m}");
        assert!(l.iter().any(|r| r["verdict"] == "fail" && !r["witness"].is_null()), "{m}");
    }
    assert_eq!(run(&["verify", "--mutate", "nothing"]).2, EXIT_PARSE);
}

#[test]
fn enumerate_lists_spaces() {
    let (l, _, code) = run(&["enumerate", "--max-points", "2"]);
    assert_eq!(code, EXIT_OK);
    let summary = &l.last().unwrap()["summary"];
    // one point, two-point antichain, two-point chain
    assert_eq!(summary["posets"], 3);
    assert_eq!(summary["spaces"].as_u64().unwrap() as usize, l.len() - 1);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_tstruct");
    let out = Command::new(bin).args(["check-datum", "--space", "SIER", "--datum", "SS"]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_FAIL));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["codim_jumps"], false);
    let out = Command::new(bin).args(["dual", "--space", "SIER", "--datum", "T"]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "{\"p\":{\"eta\":0,\"x\":1}}\n");
    let out = Command::new(bin).args(["dual"]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_PARSE));
    let out = Command::new(bin).arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));
}
