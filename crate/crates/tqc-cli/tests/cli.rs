//! End-to-end runs of the `tqc` binary: exit codes, report envelopes,
//! reproducibility, and thread-count independence.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tqc"));
    // isolate from the caller's environment
    cmd.env_remove("TQC_THREADS");
    cmd
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary failed to launch")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn gen_circle(dir: &Path) {
    let out = run(dir, &["gen", "--shape", "circle", "--n", "256", "--out", "circle.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn envelope_carries_provenance() {
    let tmp = tempfile::tempdir().unwrap();
    gen_circle(tmp.path());
    let out = run(tmp.path(), &["turning", "--curve", "circle.json", "--t", "1.0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert!(v["tool_version"].is_string());
    assert!(v["command"].as_str().unwrap().starts_with("tqc turning"));
    assert_eq!(v["metric"], "chordal");
    assert!(v["seed"].is_u64());
    let hash = v["input_hashes"]["circle.json"].as_str().unwrap();
    assert!(hash.starts_with("sha256:") && hash.len() == 71, "bad hash format: {hash}");
    let c_star = v["report"]["C_star"].as_f64().unwrap();
    assert!((c_star - 1.0).abs() <= 1e-3, "C_star = {c_star}");
}

#[test]
fn reports_are_byte_identical_across_reruns() {
    let tmp = tempfile::tempdir().unwrap();
    gen_circle(tmp.path());
    let args = ["turning", "--curve", "circle.json", "--t", "0.5", "--seed", "9"];
    let first = run(tmp.path(), &args);
    let second = run(tmp.path(), &args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout, "reruns differ");
}

#[test]
fn thread_count_never_changes_results() {
    let tmp = tempfile::tempdir().unwrap();
    gen_circle(tmp.path());
    let one = run(
        tmp.path(),
        &["turning", "--curve", "circle.json", "--t", "1.0", "--threads", "1"],
    );
    let many = run(
        tmp.path(),
        &["turning", "--curve", "circle.json", "--t", "1.0", "--threads", "7"],
    );
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(many.status.code(), Some(0));
    // the recorded command line legitimately differs; the results must not
    assert_eq!(stdout_json(&one)["report"], stdout_json(&many)["report"]);

    let via_env = bin()
        .current_dir(tmp.path())
        .env("TQC_THREADS", "3")
        .args(["turning", "--curve", "circle.json", "--t", "1.0"])
        .output()
        .unwrap();
    let plain = run(tmp.path(), &["turning", "--curve", "circle.json", "--t", "1.0"]);
    assert_eq!(via_env.status.code(), Some(0));
    assert_eq!(via_env.stdout, plain.stdout, "TQC_THREADS changed the output");
}

#[test]
fn scenario_pipeline_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["verify", "--scenario", "cor35", "--out", "cor35.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["report"]["scenario"], "cor35");
    assert_eq!(v["report"]["pass"], true);
    let saved: Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("cor35.json")).unwrap())
            .unwrap();
    assert_eq!(saved, v, "file copy differs from stdout");
}

#[test]
fn usage_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();

    // unknown flag
    let out = run(tmp.path(), &["turning", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));

    // unknown scenario
    let out = run(tmp.path(), &["verify", "--scenario", "bogus"]);
    assert_eq!(out.status.code(), Some(1));

    // missing input file
    let out = run(tmp.path(), &["turning", "--curve", "absent.json", "--t", "1.0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.json"));

    // malformed JSON names the problem
    std::fs::write(tmp.path().join("broken.json"), "{\"vertices\": [[0.0, 1.0], [0.5]]}")
        .unwrap();
    let out = run(tmp.path(), &["turning", "--curve", "broken.json", "--t", "1.0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());

    // out-of-range parameter
    gen_circle(tmp.path());
    let out = run(tmp.path(), &["turning", "--curve", "circle.json", "--t", "1.5"]);
    assert_eq!(out.status.code(), Some(1));

    // grading flags only make sense together
    let out = run(
        tmp.path(),
        &["gen", "--shape", "cusp", "--grade-ratio", "0.99", "--out", "c.json"],
    );
    assert_eq!(out.status.code(), Some(1));

    // help is not an error
    let out = run(tmp.path(), &["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn failed_bounds_exit_two_with_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["gen", "--shape", "koch", "--level", "3", "--out", "koch.json"]);
    assert_eq!(out.status.code(), Some(0));

    // an impossible distortion threshold: the check must fail, but the
    // report is still written and the exit code distinguishes the outcome
    let out = run(
        tmp.path(),
        &["tree", "--curve", "koch.json", "--prop3", "1e-9", "--out", "tree.json"],
    );
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["report"]["check"]["prop3_pass"], false);
    assert!(tmp.path().join("tree.json").exists());
}
