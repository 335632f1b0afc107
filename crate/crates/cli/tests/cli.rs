//! End-to-end tests of the binary: exit codes, file outputs, determinism.

use std::process::{Command, Output};
use tempfile::TempDir;

fn shapesig(dir: &TempDir, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shapesig"))
        .current_dir(dir.path())
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

const MINI_ASF: &str = "\
:version 1.10
:name mini
:units
  angle deg
:root
  order TX TY TZ RX RY RZ
  axis XYZ
  position 0 0 0
  orientation 0 0 0
:bonedata
  begin
    id 1
    name arm
    direction 0 1 0
    length 2
    axis 0 0 0 XYZ
    dof rx rz
  end
:hierarchy
  begin
    root arm
  end
";

const MINI_AMC: &str = "\
:FULLY-SPECIFIED
:DEGREES
1
root 0 0 0 0 0 0
arm 0 0
2
root 0 0 0 30 0 0
arm 45 10
3
root 0 0 0 60 5 0
arm 90 20
";

#[test]
fn synth_pipeline_end_to_end() {
    let dir = TempDir::new().unwrap();
    let ingest = shapesig(
        &dir,
        &[
            "ingest", "--synth", "--classes", "3", "--per-class", "4", "--synth-joints", "3",
            "--frames", "30", "--seed", "11", "--out", "clips.json",
        ],
    );
    assert_success(&ingest);
    assert!(String::from_utf8_lossy(&ingest.stdout).contains("wrote 12 clips"));

    let distmat = shapesig(
        &dir,
        &[
            "distmat", "--clips", "clips.json", "--method", "signature", "--level", "3",
            "--out", "sig.csv",
        ],
    );
    assert_success(&distmat);
    assert!(dir.path().join("sig.csv").exists());
    assert!(dir.path().join("sig.csv.meta.json").exists());
    let meta = std::fs::read_to_string(dir.path().join("sig.csv.meta.json")).unwrap();
    assert!(meta.contains("\"method\": \"signature\""));
    assert!(meta.contains("build_seconds"));

    let mds = shapesig(
        &dir,
        &[
            "mds", "--dist", "sig.csv", "--clips", "clips.json", "--out", "coords.csv",
            "--svg", "plot.svg",
        ],
    );
    assert_success(&mds);
    let coords = std::fs::read_to_string(dir.path().join("coords.csv")).unwrap();
    assert_eq!(coords.lines().count(), 13); // header + 12 points
    assert!(coords.starts_with("id,x0,x1,label\n"));
    let svg = std::fs::read_to_string(dir.path().join("plot.svg")).unwrap();
    assert!(svg.contains("<circle"));
    assert!(svg.contains("class2"));

    let classify = shapesig(
        &dir,
        &["classify", "--dist", "sig.csv", "--clips", "clips.json"],
    );
    assert_success(&classify);
    let report: serde_json::Value =
        serde_json::from_slice(&classify.stdout).expect("classify prints JSON");
    assert!(report["loo_knn_accuracy"].as_f64().unwrap() >= 0.9);
    assert_eq!(report["n"].as_u64().unwrap(), 12);
}

#[test]
fn distmat_outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    assert_success(&shapesig(
        &dir,
        &[
            "ingest", "--synth", "--classes", "2", "--per-class", "3", "--synth-joints", "2",
            "--frames", "20", "--out", "clips.json",
        ],
    ));
    // Parallel (default) runs must produce byte-identical primary outputs.
    assert_success(&shapesig(
        &dir,
        &["distmat", "--clips", "clips.json", "--out", "a.csv"],
    ));
    assert_success(&shapesig(
        &dir,
        &["distmat", "--clips", "clips.json", "--out", "b.csv"],
    ));
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);

    assert_success(&shapesig(
        &dir,
        &["mds", "--dist", "a.csv", "--out", "ca.csv", "--svg", "sa.svg"],
    ));
    assert_success(&shapesig(
        &dir,
        &["mds", "--dist", "b.csv", "--out", "cb.csv", "--svg", "sb.svg"],
    ));
    assert_eq!(
        std::fs::read(dir.path().join("ca.csv")).unwrap(),
        std::fs::read(dir.path().join("cb.csv")).unwrap()
    );
    assert_eq!(
        std::fs::read(dir.path().join("sa.svg")).unwrap(),
        std::fs::read(dir.path().join("sb.svg")).unwrap()
    );
}

#[test]
fn json_matrix_format_roundtrips_through_mds() {
    let dir = TempDir::new().unwrap();
    assert_success(&shapesig(
        &dir,
        &[
            "ingest", "--synth", "--classes", "2", "--per-class", "3", "--synth-joints", "2",
            "--frames", "15", "--out", "clips.json",
        ],
    ));
    assert_success(&shapesig(
        &dir,
        &[
            "distmat", "--clips", "clips.json", "--format", "json", "--out", "dist.json",
        ],
    ));
    let text = std::fs::read_to_string(dir.path().join("dist.json")).unwrap();
    assert!(text.trim_start().starts_with('{'));
    assert_success(&shapesig(
        &dir,
        &["mds", "--dist", "dist.json", "--out", "coords.csv"],
    ));
}

#[test]
fn asf_amc_ingest() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("mini.asf"), MINI_ASF).unwrap();
    std::fs::write(dir.path().join("take1.amc"), MINI_AMC).unwrap();
    let out = shapesig(
        &dir,
        &[
            "ingest", "--asf", "mini.asf", "--amc", "take1.amc", "--label", "wave",
            "--out", "clips.json",
        ],
    );
    assert_success(&out);
    let text = std::fs::read_to_string(dir.path().join("clips.json")).unwrap();
    let ds: serde_json::Value = serde_json::from_str(&text).unwrap();
    let clip = &ds["clips"][0];
    assert_eq!(clip["id"], "take1");
    assert_eq!(clip["label"], "wave");
    assert_eq!(clip["joints"], serde_json::json!(["root", "arm"]));
    assert_eq!(clip["frames"].as_array().unwrap().len(), 3);
}

#[test]
fn usage_errors_exit_1() {
    let dir = TempDir::new().unwrap();
    assert_success(&shapesig(
        &dir,
        &[
            "ingest", "--synth", "--classes", "2", "--per-class", "2", "--synth-joints", "1",
            "--frames", "10", "--out", "clips.json",
        ],
    ));
    let out = shapesig(
        &dir,
        &[
            "distmat", "--clips", "clips.json", "--method", "nonsense", "--out", "x.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nonsense"));

    let out = shapesig(&dir, &["distmat", "--clips", "clips.json"]);
    assert_eq!(out.status.code(), Some(1)); // missing required --out

    let out = shapesig(&dir, &["nonsense-subcommand"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn data_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let out = shapesig(
        &dir,
        &["distmat", "--clips", "missing.json", "--out", "x.csv"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.json"));

    std::fs::write(dir.path().join("bad.asf"), ":root\n  order RX\n  axis XYZ\n").unwrap();
    std::fs::write(dir.path().join("m.amc"), "1\nroot 0\n2\nroot 1\n").unwrap();
    let out = shapesig(
        &dir,
        &[
            "ingest", "--asf", "bad.asf", "--amc", "m.amc", "--out", "c.json",
        ],
    );
    assert_eq!(out.status.code(), Some(2)); // missing :hierarchy section
    assert!(String::from_utf8_lossy(&out.stderr).contains("hierarchy"));
}

#[test]
fn selftest_passes() {
    let dir = TempDir::new().unwrap();
    let out = shapesig(&dir, &["selftest"]);
    assert_success(&out);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("signature.chen_split: PASS"));
    assert!(text.contains("reparam.dp_vs_enumeration: PASS"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn bench_reports_dp_slower_than_signatures() {
    let dir = TempDir::new().unwrap();
    // Default synthetic dataset; small grid keeps the test quick.
    let out = shapesig(&dir, &["bench", "--grid", "16"]);
    assert_success(&out);
    let text = String::from_utf8_lossy(&out.stdout);
    let ratio_line = text
        .lines()
        .find(|l| l.starts_with("ratio"))
        .expect("bench prints a ratio line");
    let ratio: f64 = ratio_line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(ratio > 1.0, "expected DP slower than signatures, got {ratio}");
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = TempDir::new().unwrap();
    assert_success(&shapesig(
        &dir,
        &[
            "ingest", "--synth", "--classes", "2", "--per-class", "2", "--synth-joints", "2",
            "--frames", "12", "--out", "clips.json",
        ],
    ));
    std::fs::write(
        dir.path().join("cfg.json"),
        r#"{"method": "srvt", "format": "json"}"#,
    )
    .unwrap();
    // Config alone: srvt, json.
    assert_success(&shapesig(
        &dir,
        &[
            "distmat", "--config", "cfg.json", "--clips", "clips.json", "--out", "a.out",
        ],
    ));
    let meta = std::fs::read_to_string(dir.path().join("a.out.meta.json")).unwrap();
    assert!(meta.contains("\"method\": \"srvt\""));
    assert!(std::fs::read_to_string(dir.path().join("a.out"))
        .unwrap()
        .trim_start()
        .starts_with('{'));
    // Flag overrides the method.
    assert_success(&shapesig(
        &dir,
        &[
            "distmat", "--config", "cfg.json", "--clips", "clips.json", "--method",
            "signature", "--out", "b.out",
        ],
    ));
    let meta = std::fs::read_to_string(dir.path().join("b.out.meta.json")).unwrap();
    assert!(meta.contains("\"method\": \"signature\""));
}

#[test]
fn joint_subset_and_weights() {
    let dir = TempDir::new().unwrap();
    assert_success(&shapesig(
        &dir,
        &[
            "ingest", "--synth", "--classes", "2", "--per-class", "2", "--synth-joints", "3",
            "--frames", "12", "--out", "clips.json",
        ],
    ));
    assert_success(&shapesig(
        &dir,
        &[
            "distmat", "--clips", "clips.json", "--method", "srvt", "--joints", "j0,j2",
            "--weights", "1.0,2.5", "--out", "w.csv",
        ],
    ));
    // Weight count must match the selected joints.
    let out = shapesig(
        &dir,
        &[
            "distmat", "--clips", "clips.json", "--method", "srvt", "--joints", "j0,j2",
            "--weights", "1.0", "--out", "x.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    // Weights make no sense for the signature method.
    let out = shapesig(
        &dir,
        &[
            "distmat", "--clips", "clips.json", "--method", "signature", "--weights", "1,2",
            "--out", "y.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
}
