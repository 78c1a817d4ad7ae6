use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cfrank(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfrank")).current_dir(dir).args(args).output().unwrap()
}

fn workspace(schedules: &[(&str, &str)]) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for (name, body) in schedules {
        std::fs::write(dir.path().join(name), body).unwrap();
    }
    dir
}

const BASIC: &str = r#"{"name":"basic","h0":"1","r":{"kind":"const","value":"3"},"z":{"kind":"const","value":"1"}}"#;
const GOLDEN: &str = r#"{"name":"golden","h0":1,"r":{"kind":"const","value":3},"z":{"kind":"list","values":[1,2]}}"#;

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn build_reports_heights() {
    let dir = workspace(&[("g.json", GOLDEN)]);
    let v = json(&cfrank(dir.path(), &["build", "--schedule", "g.json", "--depth", "2"]));
    assert_eq!(v["levels"]["h"], serde_json::json!(["1", "9", "36"]));
    assert_eq!(v["levels"]["C"][1], serde_json::json!(["0", "11", "23"]));
    assert_eq!(v["growth"]["verdict"], "INCONCLUSIVE");

    let v = json(&cfrank(dir.path(), &["build", "--schedule", "g.json", "--depth", "0"]));
    assert_eq!(v["levels"]["h"], serde_json::json!(["1"]));
}

#[test]
fn invalid_schedule_exits_3() {
    let bad = r#"{"name":"bad","h0":1,"r":{"kind":"list","values":[3,1]},"z":{"kind":"const","value":1}}"#;
    let dir = workspace(&[("bad.json", bad)]);
    let out = cfrank(dir.path(), &["build", "--schedule", "bad.json", "--depth", "3"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn config_errors_exit_2() {
    let dir = workspace(&[("s.json", BASIC), ("broken.json", "{")]);
    for args in [
        &["build", "--schedule", "broken.json"][..],
        &["build", "--schedule", "missing.json"],
        &["build", "--schedule", "s.json", "--depth", "5", "--max-depth", "2"],
        &["scan-mixing", "--schedule", "s.json", "--format", "xml"],
        &["scan-mixing"],
        &["concat", "--schedule", "s.json", "--format", "csv"],
    ] {
        assert_eq!(cfrank(dir.path(), args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn stage_zero_scan_csv() {
    let dir = workspace(&[("s.json", BASIC)]);
    let zero = r#"[[{"level":0,"intervals":[[0,1]]},{"level":0,"intervals":[[0,1]]}]]"#;
    let args = ["scan-mixing", "--schedule", "s.json", "--depth", "0", "--max-depth", "6", "--tests", zero];
    let out = cfrank(dir.path(), &[&args[..], &["--format", "csv"]].concat());
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "stage,m,numerator,denominator\n0,1,0,1\n0,2,1,3\n0,3,1,3\n");

    let v = json(&cfrank(dir.path(), &["scan-mixing", "--schedule", "s.json", "--depth", "2", "--tests", "[]"]));
    assert_eq!(v["report"]["records"], serde_json::json!([]));
}

#[test]
fn strict_mode_exits_4_on_spillover() {
    let dir = workspace(&[("s.json", BASIC)]);
    let base = ["weak-limits", "--schedule", "s.json", "--times", "8", "--target", "empty", "--tests", "singletons:0"];
    let shallow = [&base[..], &["--depth", "1", "--max-depth", "1"]].concat();
    assert_eq!(cfrank(dir.path(), &[&shallow[..], &["--strict"]].concat()).status.code(), Some(4));

    let v = json(&cfrank(dir.path(), &shallow));
    assert!(v["report"]["discrepancies"][0].get("upper").is_some());
    let v = json(&cfrank(dir.path(), &[&base[..], &["--depth", "1", "--max-depth", "3", "--strict"]].concat()));
    assert!(v["report"]["discrepancies"][0].get("num").is_some());
}

#[test]
fn thread_cap_must_be_positive() {
    let dir = workspace(&[("s.json", BASIC)]);
    let out = Command::new(env!("CARGO_BIN_EXE_cfrank"))
        .current_dir(dir.path())
        .args(["build", "--schedule", "s.json"])
        .env("CFRANK_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fragments_concatenate() {
    let frags = r#"{"name":"joined","fragments":[
        {"name":"a","h0":1,"r":{"kind":"const","value":3},"z":{"kind":"const","value":1},"stopping_time":2},
        {"name":"b","h0":1,"r":{"kind":"const","value":4},"z":{"kind":"const","value":0},"stopping_time":2}]}"#;
    let dir = workspace(&[("f.json", frags)]);
    let v = json(&cfrank(dir.path(), &["concat", "--schedule", "f.json", "--depth", "3"]));
    assert_eq!(v["fragment_starts"], serde_json::json!([0, 2]));
    let h: Vec<String> = serde_json::from_value(v["h"].clone()).unwrap();
    assert_eq!(&h[..3], ["1", "9", "33"]);
    assert_eq!(h[3], (4 * 33 + 6).to_string());
}

#[test]
fn decimal_and_poisson() {
    let dir = workspace(&[]);
    let v = json(&cfrank(dir.path(), &["poisson-mult", "--kind", "symmetric-square", "--n", "5"]));
    assert_eq!(v["values"], serde_json::json!(["1", "3", "15", "105", "945"]));
    let dir = workspace(&[("s.json", BASIC)]);
    let v = json(&cfrank(dir.path(), &["cesaro", "--schedule", "s.json", "--k", "1", "--l", "2", "--decimal"]));
    assert_eq!(v["squared_norm"]["num"], "1");
    assert_eq!(v["squared_norm"]["den"], "2");
    assert_eq!(v["squared_norm"]["decimal"], "5.00000000000000000000000000000e-1");
}

#[test]
fn in_process_run_matches_binary() {
    let dir = workspace(&[("s.json", BASIC)]);
    let path = dir.path().join("s.json");
    let path = path.to_str().unwrap();
    let args = ["cfrank", "spectrum", "--schedule", path, "--lag", "3"];
    let (mut out, mut err) = (Vec::new(), Vec::new());
    assert_eq!(cfrank::cli::run(args, &mut out, &mut err), 0);
    assert_eq!(out, cfrank(dir.path(), &args[1..]).stdout);
}
