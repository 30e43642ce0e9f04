use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn toy() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../transit/fixtures/toy")
}

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_transit"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn toy_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let toy = toy();
    ok(d, &["ingest", toy.to_str().unwrap(), "-o", "toy.ttbl"]);
    ok(d, &["preprocess", "toy.ttbl", "-o", "toy.ttrs"]);
    ok(d, &["partition", "toy.ttbl", "--partitions", "2", "-o", "layout.json"]);
    ok(d, &["fillin", "toy.ttbl", "--layout", "layout.json", "--transfers", "toy.ttrs", "-o", "fill.txt"]);
    let want = "(09:00:00, 0) (08:50:00, 2)";
    for engine in ["raptor", "tbtr", "ted"] {
        let out = ok(d, &["query", "toy.ttbl", "--engine", engine, "--from", "s0", "--to", "sd", "--at", "08:00"]);
        assert_eq!(out.trim(), want, "{engine}");
    }
    let hyp = ok(
        d,
        &[
            "query", "toy.ttbl", "--engine", "hyptbtr", "--from", "s0", "--to", "sd", "--at", "08:00", "--transfers",
            "toy.ttrs", "--layout", "layout.json", "--fillin", "fill.txt",
        ],
    );
    assert_eq!(hyp.trim(), want);
    let verify = ok(d, &["verify", "toy.ttbl", "--queries", "40"]);
    assert!(verify.contains("0 mismatches"), "{verify}");
}

#[test]
fn bad_input_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let toy = toy();
    let out = run(dir.path(), &["query", toy.to_str().unwrap(), "--from", "nope", "--to", "sd", "--at", "08:00"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown stop"));
    let out = run(dir.path(), &["ingest", "missing-dir", "-o", "x.ttbl"]);
    assert!(!out.status.success());
}

#[test]
fn synth_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for out in ["a", "b"] {
        ok(d, &["synth", "--stops", "40", "--routes", "10", "--trips-per-route", "6", "--seed", "5", "-o", out]);
    }
    for f in ["stops.txt", "stop_times.txt", "trips.txt", "transfers.txt"] {
        assert_eq!(std::fs::read(d.join("a").join(f)).unwrap(), std::fs::read(d.join("b").join(f)).unwrap(), "{f}");
    }
}
