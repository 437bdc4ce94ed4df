//! End-to-end checks of the command-line surface: exit codes, file formats,
//! and the save/load round trip.

use lnn::sim::{gen_dataset, ModelKind};
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_lnn")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin()).current_dir(dir).args(args).output().unwrap()
}

fn write_training_csv(path: &Path, t: usize, d: usize, seed: u64, binary: bool) {
    let model = if binary { ModelKind::Bin } else { ModelKind::Reg };
    let data = gen_dataset(model, t, d, 3.0, seed).unwrap();
    let mut csv = String::from("y");
    for k in 1..=d {
        csv.push_str(&format!(",x{k}"));
    }
    csv.push('\n');
    for (row, y) in data.rows().zip(data.y()) {
        csv.push_str(&format!("{y}"));
        for v in row {
            csv.push_str(&format!(",{v}"));
        }
        csv.push('\n');
    }
    std::fs::write(path, csv).unwrap();
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = tempfile::tempdir().unwrap();
    // Usage error: unknown subcommand.
    let out = run_in(dir.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    // Usage error: missing required flags.
    let out = run_in(dir.path(), &["fit-reg"]);
    assert_eq!(out.status.code(), Some(1));
    // Data error: file does not exist.
    let out = run_in(
        dir.path(),
        &["fit-reg", "--data", "missing.csv", "--y-col", "y", "--x-cols", "x1"],
    );
    assert_eq!(out.status.code(), Some(2));
    // Data error: named column absent.
    write_training_csv(&dir.path().join("train.csv"), 50, 1, 1, false);
    let out = run_in(
        dir.path(),
        &["fit-reg", "--data", "train.csv", "--y-col", "nope", "--x-cols", "x1"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope"));
}

#[test]
fn fit_predict_round_trip_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    write_training_csv(&dir.path().join("train.csv"), 400, 1, 7, false);
    let out = run_in(
        dir.path(),
        &[
            "fit-reg", "--data", "train.csv", "--y-col", "y", "--x-cols", "x1", "--out",
            "model.json",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    // Predicting twice from the saved model must give identical bytes, and
    // every in-domain training row must get a finite estimate.
    for name in ["p1.csv", "p2.csv"] {
        let out = run_in(
            dir.path(),
            &["predict", "--model", "model.json", "--data", "train.csv", "--out", name],
        );
        assert!(out.status.success());
    }
    let p1 = std::fs::read(dir.path().join("p1.csv")).unwrap();
    let p2 = std::fs::read(dir.path().join("p2.csv")).unwrap();
    assert_eq!(p1, p2);

    let text = String::from_utf8(p1).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x1,ghat,lo,hi,flag");
    let mut rows = 0;
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 5);
        assert_eq!(fields[4], "ok");
        let ghat: f64 = fields[1].parse().unwrap();
        assert!(ghat.is_finite());
        rows += 1;
    }
    assert_eq!(rows, 400);
}

#[test]
fn binary_fit_emits_probability_column() {
    let dir = tempfile::tempdir().unwrap();
    write_training_csv(&dir.path().join("train.csv"), 600, 1, 9, true);
    let out = run_in(
        dir.path(),
        &[
            "fit-bin", "--data", "train.csv", "--y-col", "y", "--x-cols", "x1", "--out",
            "model.json",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run_in(
        dir.path(),
        &["predict", "--model", "model.json", "--data", "train.csv", "--out", "pred.csv"],
    );
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("pred.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x1,ghat,prob,lo,hi,flag");
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields[5] == "ok" {
            let prob: f64 = fields[2].parse().unwrap();
            assert!(prob > 0.0 && prob < 1.0);
        }
    }
}

#[test]
fn bootstrap_bands_bracket_the_estimate() {
    let dir = tempfile::tempdir().unwrap();
    write_training_csv(&dir.path().join("train.csv"), 500, 1, 11, false);
    std::fs::write(dir.path().join("cfg.json"), r#"{"R": 50, "L": 7, "q": 2}"#).unwrap();
    let out = run_in(
        dir.path(),
        &[
            "fit-reg", "--config", "cfg.json", "--data", "train.csv", "--y-col", "y",
            "--x-cols", "x1", "--out", "model.json",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run_in(
        dir.path(),
        &[
            "bootstrap", "--config", "cfg.json", "--seed", "5", "--model", "model.json",
            "--data", "train.csv", "--out", "bands.csv",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("bands.csv")).unwrap();
    let mut saw_ok = 0;
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields[4] == "ok" {
            let ghat: f64 = fields[1].parse().unwrap();
            let lo: f64 = fields[2].parse().unwrap();
            let hi: f64 = fields[3].parse().unwrap();
            assert!(lo <= hi);
            assert!(lo <= ghat && ghat <= hi);
            saw_ok += 1;
        }
    }
    assert!(saw_ok >= 5, "expected bands at most grid points, saw {saw_ok}");
}

#[test]
fn inspect_arch_reports_neuron_count() {
    let dir = tempfile::tempdir().unwrap();
    // d=2, q=3, M=2 -> 4 cubes x 10 basis terms x 4 neurons = 160.
    std::fs::write(
        dir.path().join("cfg.json"),
        r#"{"q": 3, "bandwidth": {"mode": "explicit", "value": 1.5}}"#,
    )
    .unwrap();
    let out = run_in(dir.path(), &["inspect-arch", "--config", "cfg.json", "--d", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("160"), "missing neuron count in: {text}");
    assert!(text.contains("M = 2"));
}

#[test]
fn fit_local_runs_from_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    write_training_csv(&dir.path().join("train.csv"), 400, 2, 13, false);
    let out = run_in(
        dir.path(),
        &[
            "fit-local", "--data", "train.csv", "--y-col", "y", "--x-cols", "x1,x2",
            "--point", "0.5,0.5", "--h", "1.0", "--out", "local.csv",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("local.csv")).unwrap();
    assert!(text.starts_with("x1,x2,ghat,count,flag"));
}

#[test]
fn simulate_is_reproducible_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("cfg.json"),
        r#"{"q": 2, "R": 30, "L": 5, "sim": {"model": "reg", "T": [200], "d": 1, "n": 3}}"#,
    )
    .unwrap();
    for name in ["r1.csv", "r2.csv"] {
        let out = run_in(
            dir.path(),
            &["simulate", "--config", "cfg.json", "--seed", "21", "--out", name],
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(
        std::fs::read(dir.path().join("r1.csv")).unwrap(),
        std::fs::read(dir.path().join("r2.csv")).unwrap()
    );
}
