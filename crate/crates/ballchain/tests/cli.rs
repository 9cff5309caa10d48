//! End-to-end runs of the `ballchain` binary.

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};

use ballchain::formats::{operator_json, polymap_json, word_json};
use ballchain::report::strip_wall_time;
use ballchain_core::catalog;
use ballchain_core::polymap::PolyMap;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ballchain"));
    c.env_remove("BALLCHAIN_JOBS");
    c
}

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn run(args: &[&str]) -> (i32, String) {
    let out = bin().args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn read(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn operator_reports_ex3r() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "ex3r.json", &operator_json(&catalog::ex3r_operator()));
    let out = dir.path().join("report.json");
    let (code, stdout) = run(&["operator", "--in", s(&input), "--out", s(&out)]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("0.8090169944"));
    let r = read(&out);
    for key in ["version", "command", "config", "seed", "wall_time"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    assert!((r["result"]["m"].as_f64().unwrap() - 0.8090169944).abs() < 1e-9);
    assert!((r["result"]["kplus"].as_f64().unwrap() - 1.6180339887).abs() < 1e-9);
    assert_eq!(r["result"]["resonance"]["kind"], "nonresonant");
}

#[test]
fn exact_rational_operator_is_resonant() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "diag.json",
        &json!({"dim": 2, "entries": [[{"re": "1/2"}, {"re": "0"}], [{"re": "0"}, {"re": "1"}]]}),
    );
    let out = dir.path().join("report.json");
    let (code, _) = run(&["operator", "--in", s(&input), "--out", s(&out)]);
    assert_eq!(code, 0);
    let res = &read(&out)["result"]["resonance"];
    assert_eq!(res["mode"], "exact");
    assert_eq!(res["kind"], "resonant");
    assert_eq!(res["witness"]["index"], 1);
    assert_eq!(res["witness"]["multi_index"], json!([2, 0]));
}

#[test]
fn identity_is_convex_with_margin_one() {
    let dir = tempfile::tempdir().unwrap();
    let map = write(dir.path(), "identity.json", &polymap_json(&PolyMap::identity(2)));
    let out = dir.path().join("report.json");
    let (code, _) = run(&["map-test", "--map", s(&map), "--criterion", "convex", "--out", s(&out)]);
    assert_eq!(code, 0);
    let r = read(&out);
    assert_eq!(r["status"], "pass");
    assert_eq!(r["result"]["verdict"], "pass");
    assert_eq!(r["result"]["min_margin"].as_f64().unwrap(), 1.0);
}

#[test]
fn failing_criterion_exits_one_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let map = write(dir.path(), "shear.json", &polymap_json(&catalog::shear_map(0.9)));
    let out = dir.path().join("report.json");
    let (code, _) = run(&["map-test", "--map", s(&map), "--criterion", "convex", "--per-sphere", "50", "--out", s(&out)]);
    assert_eq!(code, 1);
    let r = read(&out);
    assert_eq!(r["result"]["verdict"], "fail");
    assert!(r["result"]["witness"]["z"].is_array());
}

#[test]
fn spirallike_needs_operator_and_accepts_one() {
    let dir = tempfile::tempdir().unwrap();
    let map = write(dir.path(), "shear.json", &word_json(&catalog::shear_word(0.1)));
    let (code, _) = run(&["map-test", "--map", s(&map), "--criterion", "spirallike"]);
    assert_eq!(code, 2);
    let op = write(dir.path(), "a.json", &operator_json(&catalog::diag_operator(2.0)));
    let (code, _) = run(&[
        "map-test", "--map", s(&map), "--criterion", "spirallike", "--operator", s(&op), "--radii", "0.1:0.99",
        "--per-sphere", "100", "--seed", "3",
    ]);
    assert_eq!(code, 0);
}

#[test]
fn usage_and_io_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["operator", "--in", s(&dir.path().join("missing.json"))]).0, 2);
    let map = write(dir.path(), "id.json", &polymap_json(&PolyMap::identity(2)));
    assert_eq!(run(&["map-test", "--map", s(&map), "--criterion", "nonsense"]).0, 2);
    assert_eq!(run(&["map-test", "--map", s(&map), "--criterion", "convex", "--radii", "0.5,1.5"]).0, 2);
    assert_eq!(run(&["no-such-command"]).0, 2);
    assert_eq!(run(&["suite", "--builtin", "other"]).0, 2);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{not json").unwrap();
    assert_eq!(run(&["operator", "--in", s(&bad)]).0, 2);
}

#[test]
fn reports_are_reproducible_across_runs_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let map = write(dir.path(), "mixed.json", &polymap_json(&catalog::mixed_map(0.2, 0.1)));
    let mut reports = Vec::new();
    for (i, jobs) in ["1", "2", "1"].iter().enumerate() {
        let out = dir.path().join(format!("r{i}.json"));
        let status = bin()
            .args(["map-test", "--map", s(&map), "--criterion", "qtilde", "--seed", "11", "--out", s(&out)])
            .env("BALLCHAIN_JOBS", jobs)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
        let mut v = read(&out);
        strip_wall_time(&mut v);
        reports.push(serde_json::to_string(&v).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    assert_eq!(reports[0], reports[2]);
}

fn shear_field(dir: &Path) -> PathBuf {
    write(
        dir,
        "field.json",
        &json!({
            "A": operator_json(&ballchain_core::operator::Operator::identity(2)),
            "pieces": [
                {"duration": 0.5, "kind": "spirallike", "map": word_json(&catalog::shear_word(0.3))},
                {"duration": 0.5, "kind": "linear"}
            ]
        }),
    )
}

#[test]
fn flow_and_reach_on_field_file() {
    let dir = tempfile::tempdir().unwrap();
    let field = shear_field(dir.path());
    let out = dir.path().join("flow.json");
    let (code, _) = run(&["flow", "--field", s(&field), "--out", s(&out)]);
    assert_eq!(code, 0);
    let r = read(&out);
    assert!(r["result"]["residuals"]["semigroup"].as_f64().unwrap() <= 1e-7);
    assert_eq!(r["result"]["points"].as_array().unwrap().len(), 44);

    let pts = write(dir.path(), "pts.json", &json!({"points": [[{"re": 0.3}, {"im": 0.4}]]}));
    let out = dir.path().join("reach.json");
    let (code, _) = run(&["reach", "--field", s(&field), "--points", s(&pts), "--out", s(&out)]);
    assert_eq!(code, 0);
    let p = &read(&out)["result"]["points"][0];
    assert!(p["norm"].as_f64().unwrap() <= p["bound"].as_f64().unwrap());
}

#[test]
fn non_spirallike_piece_is_a_criterion_failure() {
    let dir = tempfile::tempdir().unwrap();
    let field = write(
        dir.path(),
        "field.json",
        &json!({
            "A": operator_json(&ballchain_core::operator::Operator::identity(2)),
            "pieces": [{"duration": 1.0, "kind": "spirallike", "map": polymap_json(&catalog::shear_map(4.0))}]
        }),
    );
    let out = dir.path().join("flow.json");
    let (code, _) = run(&["flow", "--field", s(&field), "--out", s(&out)]);
    assert_eq!(code, 1);
    assert_eq!(read(&out)["result"]["rejection"]["verdict"], "fail");
}

#[test]
fn approximation_run_mirrors_steps() {
    let dir = tempfile::tempdir().unwrap();
    let target = write(dir.path(), "f.json", &polymap_json(&catalog::shear_map(0.4)));
    let cands = write(dir.path(), "words.json", &json!([word_json(&catalog::shear_word(0.4))]));
    let out = dir.path().join("run.json");
    let (code, _) = run(&[
        "approx", "--target", s(&target), "--candidates", s(&cands), "--criterion", "starlike", "--schedule",
        "geometric:4", "--test-radii", "0.5", "--out", s(&out),
    ]);
    assert_eq!(code, 0);
    let steps = read(&out)["result"]["steps"].as_array().unwrap().clone();
    assert_eq!(steps.len(), 4);
    for st in &steps {
        let r = st["r"].as_f64().unwrap();
        let d = st["distances"][0]["distance"].as_f64().unwrap();
        assert!((d - 0.4 * (1.0 - r) * 0.25).abs() < 1e-10);
    }
}

#[test]
fn suite_runs_every_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("suite.json");
    let (code, stdout) = run(&["suite", "--builtin", "paper-examples", "--out", s(&out)]);
    assert_eq!(code, 0, "{stdout}");
    let r = read(&out);
    assert_eq!(r["result"]["total"], 13);
    assert_eq!(r["result"]["passed"], 13);
}
