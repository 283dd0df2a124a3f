use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn cscope(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cscope"))
        .arg("--data-dir")
        .arg(dir)
        .args(args)
        .output()
        .unwrap()
}

fn json(dir: &Path, args: &[&str]) -> (i32, Value) {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let out = cscope(dir, &full);
    let v =
        serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)));
    (out.status.code().unwrap(), v)
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn init_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    assert!(cscope(dir.path(), &["init"]).status.success());
    let conf = std::fs::read_to_string(dir.path().join("cscope.conf")).unwrap();
    assert!(cscope(dir.path(), &["init"]).status.success());
    assert_eq!(std::fs::read_to_string(dir.path().join("cscope.conf")).unwrap(), conf);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    cscope(dir.path(), &["init"]);
    assert_eq!(cscope(dir.path(), &["search"]).status.code(), Some(2));
    assert_eq!(cscope(dir.path(), &["purge"]).status.code(), Some(2));
    assert_eq!(cscope(dir.path(), &["frobnicate"]).status.code(), Some(2));
}

#[test]
fn client_errors_exit_three_with_envelope() {
    let dir = tempfile::tempdir().unwrap();
    cscope(dir.path(), &["init"]);
    let (code, v) = json(dir.path(), &["docs", "show", "7"]);
    assert_eq!(code, 3);
    assert_eq!(v["status"], "error");
    assert_eq!(v["error_code"], "UnknownDocument");
    let (code, v) = json(dir.path(), &["search", "--mode", "metadata"]);
    assert_eq!((code, v["error_code"].as_str()), (3, Some("NoFilter")));
}

#[test]
fn eval_compare_prints_table() {
    let dir = tempfile::tempdir().unwrap();
    let t3 = fixtures().join("comparison");
    let p = |f: &str| t3.join(f).display().to_string();
    let (a, b, j) = (p("runs_a.txt"), p("runs_b.txt"), p("judgments.txt"));
    let out = cscope(
        dir.path(),
        &[
            "eval",
            "compare",
            "--runs-a",
            &a,
            "--runs-b",
            &b,
            "--judgments",
            &j,
            "--g-values",
            "500,1000,2000",
            "--beta",
            "1",
        ],
    );
    assert!(out.status.success());
    let text = stdout(&out);
    for cell in [
        "0.724637681",
        "0.595238095",
        "0.531914894",
        "0.426136364",
        "0.347222222",
        "0.271739130",
    ] {
        assert!(text.contains(cell), "{cell} missing from\n{text}");
    }
}

#[test]
fn ingest_search_purge_round() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    cscope(d, &["init"]);
    let concepts = fixtures().join("concepts.txt").display().to_string();
    assert!(cscope(d, &["concept", "import", &concepts]).status.success());
    let files: Vec<String> = (1..=5)
        .map(|i| {
            fixtures()
                .join(format!("abstracts/abstract_{i:02}.txt"))
                .display()
                .to_string()
        })
        .collect();
    let mut args = vec!["ingest"];
    args.extend(files.iter().map(String::as_str));
    let (code, v) = json(d, &args);
    assert_eq!(code, 0, "{v}");

    // a second ingest of the same files changes nothing
    let (_, again) = json(d, &args);
    assert!(again["payload"]
        .as_array()
        .unwrap()
        .iter()
        .all(|o| o["status"] == "duplicate"));

    let (_, before) = json(d, &["search", "-q", "pulmonary"]);
    assert!(!before["payload"]["results"].as_array().unwrap().is_empty());
    assert_eq!(cscope(d, &["purge", "--all"]).status.code(), Some(0));
    let (_, after) = json(d, &["search", "-q", "pulmonary"]);
    assert_eq!(before["payload"], after["payload"]);
    let (code, v) = json(d, &["docs", "show", "1", "--text"]);
    assert_eq!((code, v["error_code"].as_str()), (3, Some("Purged")));
}
