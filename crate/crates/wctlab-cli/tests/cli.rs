//! End-to-end tests of the `wctlab` binary: exit codes, determinism, and
//! the generate → train → eval → infer pipeline on a miniature setup.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wctlab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Miniature grid: 2 RBs (input dimension 96), 3 SNR points, 10 slots.
const TINY_CONFIG: &str = r#"
seed = 7

[grid]
n_rb = 2
n_sym = 2
n_rx = 2
comb = 2
subcarrier_spacing_hz = 30000.0
slot_duration_s = 0.0005

[sweep]
snr_db = [0.0, 15.0, 30.0]
slots_per_snr = 10

[dataset]
alpha = 0.9
split = "stratified"
standardize = true
mode = "reim"
labels = "single"
convention = "standard"

[[wct]]
kind = "awgn"

[[wct]]
kind = "epa"
doppler_hz = 5.0
correlation = "low"

[[wct]]
kind = "epa"
doppler_hz = 5.0
correlation = "high"

[[wct]]
kind = "eva"
doppler_hz = 5.0
correlation = "low"

[[wct]]
kind = "eva"
doppler_hz = 5.0
correlation = "high"
"#;

struct Workspace {
    _dir: tempfile::TempDir,
    config: PathBuf,
    root: PathBuf,
}

fn workspace() -> Workspace {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("tiny.toml");
    std::fs::write(&config, TINY_CONFIG).unwrap();
    Workspace {
        root: dir.path().to_path_buf(),
        config,
        _dir: dir,
    }
}

fn generate(ws: &Workspace, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "generate",
        "--config",
        ws.config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn missing_config_exits_2() {
    let out = run(&[
        "generate",
        "--config",
        "/nonexistent/cfg.toml",
        "--out",
        "/tmp/x.wct",
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("cannot read config"));
}

#[test]
fn bad_usage_exits_2() {
    let out = run(&["generate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn generate_prints_dims_and_is_deterministic() {
    let ws = workspace();
    let a = ws.root.join("a.wct");
    let b = ws.root.join("b.wct");
    let out = generate(&ws, &a, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(
        stdout(&out).contains("samples 96x150, train 135, infer 15"),
        "unexpected summary: {}",
        stdout(&out)
    );
    let out = generate(&ws, &b, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    // A different seed changes the payload.
    let c = ws.root.join("c.wct");
    let out = generate(&ws, &c, &["--seed", "8"]);
    assert_eq!(out.status.code(), Some(0));
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());

    // Thread cap does not change the bytes.
    let d = ws.root.join("d.wct");
    let out = generate(&ws, &d, &["--threads", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&d).unwrap());
}

#[test]
fn scheme_mismatch_is_rejected_before_training() {
    let ws = workspace();
    let ds = ws.root.join("ds.wct");
    assert_eq!(generate(&ws, &ds, &[]).status.code(), Some(0));
    let model = ws.root.join("m.wctmlp");
    let out = run(&[
        "train",
        "--dataset",
        ds.to_str().unwrap(),
        "--scheme",
        "multi",
        "--out",
        model.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("labeled single"));
    assert!(!model.exists());
}

#[test]
fn corrupt_dataset_exits_3() {
    let ws = workspace();
    let ds = ws.root.join("ds.wct");
    std::fs::write(&ds, b"not a dataset").unwrap();
    let out = run(&[
        "train",
        "--dataset",
        ds.to_str().unwrap(),
        "--scheme",
        "single",
        "--out",
        ws.root.join("m.wctmlp").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn divergent_training_exits_4() {
    let ws = workspace();
    let ds = ws.root.join("ds.wct");
    assert_eq!(generate(&ws, &ds, &[]).status.code(), Some(0));
    let out = run(&[
        "train",
        "--dataset",
        ds.to_str().unwrap(),
        "--scheme",
        "single",
        "--out",
        ws.root.join("m.wctmlp").to_str().unwrap(),
        "--epochs",
        "5",
        "--lr",
        "1e30",
        "--hidden",
        "16,12,8",
    ]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
    assert!(stderr(&out).contains("diverged"));
}

#[test]
fn full_pipeline_train_eval_infer() {
    let ws = workspace();
    let ds = ws.root.join("ds.wct");
    assert_eq!(generate(&ws, &ds, &[]).status.code(), Some(0));

    let model = ws.root.join("m.wctmlp");
    let history = ws.root.join("hist.csv");
    let out = run(&[
        "train",
        "--dataset",
        ds.to_str().unwrap(),
        "--scheme",
        "single",
        "--out",
        model.to_str().unwrap(),
        "--epochs",
        "5",
        "--hidden",
        "32,24,16",
        "--history",
        history.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(model.exists());
    let hist = std::fs::read_to_string(&history).unwrap();
    assert!(hist.starts_with("epoch,train_loss,train_accuracy,infer_loss,infer_accuracy"));
    assert_eq!(hist.lines().count(), 6); // header + 5 epochs

    let csv = ws.root.join("report.csv");
    let out = run(&[
        "eval",
        "--model",
        model.to_str().unwrap(),
        "--dataset",
        ds.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("overall accuracy"));
    let report = std::fs::read_to_string(&csv).unwrap();
    assert!(report.starts_with("section,task,key,count,correct,accuracy"));
    assert!(report.contains("snr,,15,"));

    // A noiseless flat-channel slot: 48 descrambled samples, re im pairs.
    let slot_line = vec!["1.0 0.0"; 48].join(" ");
    let slots = ws.root.join("slots.txt");
    std::fs::write(&slots, format!("{slot_line}\n")).unwrap();
    let out = run(&[
        "infer",
        "--model",
        model.to_str().unwrap(),
        "--input",
        slots.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(
        stdout(&out).contains("slot 0: AWGN"),
        "unexpected inference: {}",
        stdout(&out)
    );
}

#[test]
fn malformed_slot_length_names_expected_count() {
    let ws = workspace();
    let ds = ws.root.join("ds.wct");
    assert_eq!(generate(&ws, &ds, &[]).status.code(), Some(0));
    let model = ws.root.join("m.wctmlp");
    let out = run(&[
        "train",
        "--dataset",
        ds.to_str().unwrap(),
        "--scheme",
        "single",
        "--out",
        model.to_str().unwrap(),
        "--epochs",
        "2",
        "--hidden",
        "16,12,8",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let slots = ws.root.join("short.txt");
    std::fs::write(&slots, "1.0 0.0 1.0\n").unwrap();
    let out = run(&[
        "infer",
        "--model",
        model.to_str().unwrap(),
        "--input",
        slots.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(
        stderr(&out).contains("expected 96"),
        "error does not name the expected length: {}",
        stderr(&out)
    );
}

#[test]
fn multi_scheme_pipeline_reports_feature_tuple() {
    let ws = workspace();
    let config = ws.root.join("multi.toml");
    std::fs::write(
        &config,
        TINY_CONFIG.replace("labels = \"single\"", "labels = \"multi\""),
    )
    .unwrap();
    let ds = ws.root.join("ds.wct");
    let out = run(&[
        "generate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        ds.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("labels 8 (multi)"));

    let model = ws.root.join("m.wctmlp");
    let out = run(&[
        "train",
        "--dataset",
        ds.to_str().unwrap(),
        "--scheme",
        "multi",
        "--out",
        model.to_str().unwrap(),
        "--epochs",
        "6",
        "--hidden",
        "32,24,16",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let slot_line = vec!["1.0 0.0"; 48].join(" ");
    let slots = ws.root.join("slots.txt");
    std::fs::write(&slots, format!("{slot_line}\n")).unwrap();
    let out = run(&[
        "infer",
        "--model",
        model.to_str().unwrap(),
        "--input",
        slots.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(
        text.contains("delay_spread=") && text.contains("->"),
        "unexpected inference output: {text}"
    );
}
