use std::path::PathBuf;
use std::process::{Command, Output};

use ncl_core::capacity::{capacity_iid, CapacityOptions};
use serde_json::Value;

fn instance(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../instances").join(format!("{name}.json"))
}

fn ncl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncl")).args(args).env_remove("NCL_REQUIRE_SEED").output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn rate_on_identity_bsc() {
    let v = json(&ncl(&["rate", "--instance", path(&instance("identity_bsc"))]));
    assert!((v["b"].as_f64().unwrap() - 0.368064).abs() < 1e-6);
    assert_eq!(v["units"], "nats");
    assert!(v.get("display").is_none());
}

#[test]
fn bits_add_a_display_block() {
    let v = json(&ncl(&["rate", "--instance", path(&instance("identity_bsc")), "--units", "bits"]));
    let b = v["b"].as_f64().unwrap();
    assert_eq!(v["display"]["units"], "bits");
    assert!((v["display"]["b"].as_f64().unwrap() - b / 2f64.ln()).abs() < 1e-15);
}

#[test]
fn capacity_matches_the_library() {
    let v = json(&ncl(&["capacity", "--instance", path(&instance("and_bsc")), "--units", "nats", "--seed", "3"]));
    let cfg = ncl_cli::parse_instance(&instance("and_bsc")).unwrap();
    let lib = capacity_iid(&cfg.instance.f, &cfg.instance.channel, &CapacityOptions { seed: 3, ..Default::default() })
        .unwrap();
    assert_eq!(v["value"].as_f64().unwrap(), lib.value);
    assert_eq!(v["label"], "i.i.d. lower bound");
    assert_eq!(v["restarts_used"], 32);
    let argmax = v["argmax"].as_object().unwrap();
    assert_eq!(argmax.len(), 4);
    for (label, p) in lib.argmax.alphabet().symbols().iter().zip(lib.argmax.probs()) {
        assert_eq!(argmax[label].as_f64().unwrap(), *p);
    }
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let out = ncl(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("Usage"));
    assert_eq!(ncl(&[]).status.code(), Some(2));
}

#[test]
fn malformed_instances_exit_2_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let base = std::fs::read_to_string(instance("identity_bsc")).unwrap();
    let cases = [
        (base.replacen("0.1\n", "0.11\n", 1), "VALIDATION_ERROR", "F.rows[0]"),
        (base.replace("\"output\": \"B\"", "\"output\": \"D\""), "SCHEMA_ERROR", "F.output"),
        (base.replace('{', "[").replacen('[', "{", 1), "PARSE_ERROR", "line"),
    ];
    for (i, (text, code, field)) in cases.iter().enumerate() {
        assert_ne!(text, &base);
        let p = dir.path().join(format!("bad{i}.json"));
        std::fs::write(&p, text).unwrap();
        let out = ncl(&["rate", "--instance", path(&p)]);
        assert_eq!(out.status.code(), Some(2));
        let err = stderr(&out);
        assert!(err.contains(code) && err.contains(field), "{err}");
    }
}

#[test]
fn code_round_trips_through_verify() {
    let dir = tempfile::tempdir().unwrap();
    let code = dir.path().join("code.txt");
    let inst = instance("identity_bsc");
    let v = json(&ncl(&["code", "--instance", path(&inst), "--n", "6", "--epsilon", "0.2", "--out", path(&code)]));
    assert!(v["max_error"].as_f64().unwrap() <= 0.2);
    assert_eq!(v["regions_disjoint"], true);
    let checked = json(&ncl(&["verify", "--instance", path(&inst), "--code", path(&code)]));
    assert_eq!(checked["valid"], true);
    assert_eq!(checked["size"], v["size"]);
    assert_eq!(checked["max_error"], v["max_error"]);

    let text = std::fs::read_to_string(&code).unwrap().replace("epsilon 0.2", "epsilon 0.001");
    std::fs::write(&code, text).unwrap();
    let out = ncl(&["verify", "--instance", path(&inst), "--code", path(&code)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("VERIFY_FAILED"));
}

#[test]
fn infeasible_requests_exit_3() {
    let out = ncl(&[
        "pipeline",
        "--instance",
        path(&instance("and_bsc05_parity12")),
        "--k",
        "1",
        "--n",
        "4",
        "--epsilon",
        "0.01",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("TOO_FEW_CODEWORDS"), "{}", stderr(&out));
    let out = ncl(&[
        "pipeline",
        "--instance",
        path(&instance("and_bsc05_parity12")),
        "--k",
        "2",
        "--n",
        "4",
        "--epsilon",
        "0.01",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("RATE_ABOVE_ENCODER_LIMIT"));
    let out = ncl(&["code", "--instance", path(&instance("and_bsc")), "--n", "4", "--epsilon", "0.2", "--rate", "0.5"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("RATE_TOO_HIGH"));
}

#[test]
fn pipeline_needs_an_outer_problem() {
    let out = ncl(&["pipeline", "--instance", path(&instance("and_bsc")), "--epsilon", "0.1", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("SCHEMA_ERROR"));
}

#[test]
fn pipeline_reports_estimate_and_diagnostics() {
    let v = json(&ncl(&[
        "pipeline",
        "--instance",
        path(&instance("and_bsc05_parity12")),
        "--k",
        "1",
        "--n",
        "4",
        "--epsilon",
        "0.06",
        "--trials",
        "5000",
        "--seed",
        "9",
    ]));
    let est = &v["estimate"];
    assert_eq!(est["exact"], true);
    assert!(est["max_message_error"].as_f64().unwrap() <= 0.06);
    assert_eq!(v["diagnostics"]["nu3"], 2);
    assert!(est["mi_message_decoded"].as_f64().unwrap() <= est["mi_codeword_output"].as_f64().unwrap() + 0.05);
}

#[test]
fn seed_can_be_made_mandatory() {
    let inst = instance("and_bsc");
    let run = |extra: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_ncl"))
            .args(["capacity", "--instance", path(&inst), "--restarts", "2"])
            .args(extra)
            .env("NCL_REQUIRE_SEED", "1")
            .output()
            .unwrap()
    };
    let out = run(&[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("MISSING_SEED"));
    assert!(run(&["--seed", "1"]).status.success());
    // deterministic commands are unaffected
    let out = Command::new(env!("CARGO_BIN_EXE_ncl"))
        .args(["rate", "--instance", path(&inst)])
        .env("NCL_REQUIRE_SEED", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
}

#[test]
fn sweep_csv_schema() {
    let out = ncl(&[
        "sweep",
        "--instance",
        path(&instance("and_bsc05_xor")),
        "--schedule",
        "1:2,9:1",
        "--epsilon",
        "0.3",
        "--trials",
        "500",
        "--seed",
        "4",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,n,R_nats,capacity_estimate,avg_error,max_error,converse_lower_bound,trials,seed");
    assert_eq!(lines.len(), 3);
    assert!(lines.iter().all(|l| l.split(',').count() == 9));
    let failed: Vec<&str> = lines[2].split(',').collect();
    assert_eq!((failed[0], failed[1]), ("9", "1"));
    assert_eq!((failed[4], failed[5]), ("", ""));
}

#[test]
fn sweep_json_mirror_and_execution_modes() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &str, seq: bool| {
        let mut a = vec![
            "sweep".to_string(),
            "--instance".into(),
            path(&instance("and_bsc05_parity12")).into(),
            "--ns".into(),
            "4,8".into(),
            "--trials".into(),
            "3000".into(),
            "--seed".into(),
            "11".into(),
            "--output".into(),
            "json".into(),
            "--out".into(),
            out.into(),
        ];
        if seq {
            a.push("--sequential".into());
        }
        a
    };
    let (a, b) = (dir.path().join("par.json"), dir.path().join("seq.json"));
    for (p, seq) in [(&a, false), (&b, true)] {
        let out = Command::new(env!("CARGO_BIN_EXE_ncl")).args(args(path(p), seq)).output().unwrap();
        assert!(out.status.success(), "{}", stderr(&out));
        assert!(out.stdout.is_empty());
    }
    let (pa, pb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(pa, pb);
    let v: Value = serde_json::from_slice(&pa).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["status"], "ok");
    assert_eq!(rows[1]["k"], 2);
}
