//! End-to-end runs of the installed binary: exit codes, byte-identical
//! reports, CSV sidecars, and file input.

use std::path::Path;
use std::process::{Command, Output};

fn rnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rnet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

const TRIANGLE: &str = "\
# unit triangle
@origin a
a b 1
b c 1
c a 1
";

#[test]
fn identical_configs_give_byte_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for (path, tag) in [(&a, "first"), (&b, "second")] {
        let out = rnet(&[
            "mc",
            "--model",
            "geo-int",
            "--c",
            "2",
            "--seed",
            "7",
            "--n",
            "2000",
            "--radius",
            "2",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{tag} run failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    assert_eq!(read(&a), read(&b), "seeded Monte Carlo reports must not drift");

    let c = dir.path().join("c.json");
    let d = dir.path().join("d.json");
    for path in [&c, &d] {
        let out = rnet(&[
            "resistance",
            "--model",
            "geo-int",
            "--c",
            "2",
            "--x",
            "0",
            "--y",
            "1",
            "--kind",
            "wired",
            "--kmax",
            "25",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    assert_eq!(read(&c), read(&d));
}

#[test]
fn uncertified_limits_exit_two_but_still_write() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("r.json");
    // The wired resistance to infinity on the unit line grows like k/2;
    // eight levels cannot certify anything.
    let out = rnet(&[
        "resistance",
        "--model",
        "line",
        "--x",
        "0",
        "--y",
        "1",
        "--kind",
        "wired",
        "--kmax",
        "8",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "uncertified limit must exit 2");
    let report: serde_json::Value = serde_json::from_slice(&read(&out_path)).unwrap();
    assert_eq!(report["schema"], "rnet-report/1");
    assert_eq!(report["report"]["converged"], false);
}

#[test]
fn usage_and_input_errors_exit_one() {
    assert_eq!(rnet(&["resistance", "--model", "no-such"]).status.code(), Some(1));
    assert_eq!(
        rnet(&["mc", "--model", "geo-int", "--c", "2", "--n", "10"]).status.code(),
        Some(1),
        "Monte Carlo without a seed is a usage error"
    );
    let out = rnet(&["transience"]);
    assert_eq!(out.status.code(), Some(1), "transience needs an input source");
}

#[test]
fn boundary_commands_reject_network_files() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("tri.rnet");
    std::fs::write(&file, TRIANGLE).unwrap();
    let out = rnet(&[
        "boundary",
        "count",
        "--file",
        file.to_str().unwrap(),
        "--depth",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(
        msg.contains("generated model"),
        "rejection should explain itself, got: {msg}"
    );
}

#[test]
fn csv_output_carries_a_json_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("kernel.csv");
    let out = rnet(&[
        "kernel",
        "--model",
        "geo-int",
        "--c",
        "2",
        "--x",
        "1",
        "--kmax",
        "10",
        "--split",
        "--format",
        "csv",
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    // Ten levels cannot certify the kernel at the default tolerance, so
    // the run reports uncertified; both files are still written.
    assert_eq!(out.status.code(), Some(2));
    let csv = String::from_utf8(read(&csv_path)).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(header, "vertex,v,f,h");
    let sidecar: serde_json::Value =
        serde_json::from_slice(&read(&dir.path().join("kernel.csv.meta.json"))).unwrap();
    assert_eq!(sidecar["schema"], "rnet-report/1");
}

#[test]
fn finite_network_files_flow_through_exact_commands() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("tri.rnet");
    std::fs::write(&file, TRIANGLE).unwrap();

    let out = rnet(&[
        "resistance",
        "--file",
        file.to_str().unwrap(),
        "--x",
        "a",
        "--y",
        "b",
        "--kind",
        "exact",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let r = report["value"].as_f64().unwrap();
    assert!((r - 2.0 / 3.0).abs() <= 1e-12, "triangle R(a,b) = {r}");

    let out = rnet(&[
        "walk",
        "--file",
        file.to_str().unwrap(),
        "--start",
        "c",
        "--target",
        "a",
        "--absorb",
        "b",
        "--seed",
        "3",
        "--n",
        "5000",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let exact = report["exact"].as_f64().unwrap();
    assert!((exact - 0.5).abs() <= 1e-12, "triangle hitting probability {exact}");
}

#[test]
fn model_reports_parse_and_name_the_schema() {
    let out = rnet(&["model", "--model", "star", "--m", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["schema"], "rnet-report/1");
    assert!(report["growth"].is_array() || report["growth"].is_object());
}
