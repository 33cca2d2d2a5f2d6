use std::path::PathBuf;
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn scenario() -> String {
    root().join("scenarios/table1.json").display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_posauction")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn golden(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(path).unwrap()
}

fn assert_golden(args: &[&str], name: &str) {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out), golden(name), "{name}");
}

#[test]
fn verify_matches_golden() {
    assert_golden(&["verify", &scenario()], "verify.txt");
}

#[test]
fn mediate_matches_golden() {
    assert_golden(&["mediate", &scenario(), "--L", "5", "--alpha", "0.5"], "mediate.txt");
    assert_golden(&["mediate", &scenario(), "--L", "5", "--anchor", "2"], "mediate_anchor2.txt");
    assert_golden(&["mediate", &scenario(), "--L", "4", "--l", "1"], "mediate_middle.txt");
    assert_golden(&["mediate", &scenario(), "--L", "5", "--pricing", "laddered"], "mediate_laddered.txt");
}

#[test]
fn slide_matches_golden() {
    assert_golden(&["slide", &scenario(), "--L", "5", "--score", "12"], "slide.txt");
}

#[test]
fn oracle_agrees_on_every_command() {
    for args in [
        vec!["verify", "--verify-oracle"],
        vec!["mediate", "--L", "5", "--verify-oracle"],
        vec!["mediate", "--L", "5", "--anchor", "2", "--verify-oracle"],
        vec!["slide", "--L", "5", "--score", "12", "--verify-oracle"],
        vec!["mediate", "--L", "5", "--pricing", "laddered", "--verify-oracle"],
        vec!["report", "--verify-oracle"],
    ] {
        let mut full = vec![args[0]];
        let s = scenario();
        full.push(&s);
        full.extend(&args[1..]);
        let out = run(&full);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", stdout(&out));
        assert!(!stdout(&out).contains("DISAGREES"), "{args:?}");
    }
}

#[test]
fn report_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&["report", &scenario(), "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let printed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let written: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(printed, written);
    assert_eq!(written["outcome"]["auctioneer_revenue"], serde_json::json!(51.2));
    assert_eq!(written["mediators"][0]["plan"]["gain"].as_f64().map(|g| (g - 7.28).abs() < 1e-9), Some(true));
}

#[test]
fn mediate_out_mirrors_text() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plan.json");
    let out = run(&["mediate", &scenario(), "--L", "5", "--alpha", "0.5", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["plan"]["flatten_extent"], serde_json::json!(4));
    assert_eq!(v["settlement"]["mediator_take"].as_f64().map(|t| (t - 3.64).abs() < 1e-9), Some(true));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();

    let missing = run(&["verify", dir.path().join("nope.json").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));

    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{\n  \"name\": \"x\",\n  \"gamma\": [1,\n}").unwrap();
    let out = run(&["verify", broken.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));

    let invalid = dir.path().join("invalid.json");
    std::fs::write(&invalid, r#"{"name":"x","gamma":[1],"bidders":[]}"#).unwrap();
    let out = run(&["verify", invalid.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bidders"));

    // Bidder 2 overbids: not an equilibrium.
    let text = std::fs::read_to_string(scenario()).unwrap().replace(
        r#"{ "id": "2", "value_score": "22", "score": "20" }"#,
        r#"{ "id": "2", "value_score": "22", "score": "24" }"#,
    );
    let unstable = dir.path().join("unstable.json");
    std::fs::write(&unstable, text).unwrap();
    let out = run(&["verify", unstable.to_str().unwrap(), "--verify-oracle"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("full SNE: FAILS"));
    assert!(stdout(&out).contains("agrees"));
    let out = run(&["mediate", unstable.to_str().unwrap(), "--L", "5"]);
    assert_eq!(out.status.code(), Some(1));

    let out = run(&["mediate", &scenario(), "--L", "5", "--pricing", "vickrey"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["slide", &scenario(), "--L", "9", "--score", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("no improving plan"));
}

#[test]
fn repeated_runs_are_identical() {
    let first = run(&["report", &scenario()]);
    let second = run(&["report", &scenario()]);
    assert_eq!(first.stdout, second.stdout);
}
