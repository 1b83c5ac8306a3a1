use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn framepick(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_framepick"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = framepick(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn corpus(dir: &Path) {
    ok(
        dir,
        &[
            "simulate", "spectra", "--count", "3", "--length", "2000", "--peaks", "6", "--seed",
            "7", "--out", "c.fpds", "--truth", "t.json",
        ],
    );
}

#[test]
fn simulate_pick_eval() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    corpus(d);
    ok(
        d,
        &[
            "pick",
            "c.fpds",
            "--out",
            "p.json",
            "--target",
            "6",
            "--frame",
            "filterbank",
        ],
    );
    let picks = json(&d.join("p.json"));
    assert_eq!(picks["config"]["lambda"]["mode"], "target_count");
    assert_eq!(picks["spots"].as_array().unwrap().len(), 3);

    let out = ok(
        d,
        &[
            "eval",
            "--detected",
            "p.json",
            "--truth",
            "t.json",
            "--json",
            "e.json",
        ],
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("sensitivity"));
    let report = json(&d.join("e.json"));
    assert_eq!(report["report"]["n_reference"], 18);
    assert_eq!(report["config"], picks["config"]);
}

#[test]
fn eval_of_truth_against_itself_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    corpus(d);
    ok(
        d,
        &[
            "eval",
            "--detected",
            "t.json",
            "--truth",
            "t.json",
            "--json",
            "e.json",
        ],
    );
    let r = &json(&d.join("e.json"))["report"];
    assert_eq!(r["f1"], 1.0);
    assert_eq!(r["fdr"], 0.0);
}

#[test]
fn rerun_from_embedded_config_is_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    corpus(d);
    ok(
        d,
        &[
            "pick",
            "c.fpds",
            "--out",
            "a.json",
            "--indicators",
            "a.fpds",
            "--baseline",
            "tophat:50",
            "--lambda",
            "2e-3",
            "--window-width",
            "16",
        ],
    );
    ok(
        d,
        &[
            "pick",
            "c.fpds",
            "--out",
            "b.json",
            "--indicators",
            "b.fpds",
            "--config",
            "a.json",
        ],
    );
    assert_eq!(
        std::fs::read(d.join("a.json")).unwrap(),
        std::fs::read(d.join("b.json")).unwrap()
    );
    assert_eq!(
        std::fs::read(d.join("a.fpds")).unwrap(),
        std::fs::read(d.join("b.fpds")).unwrap()
    );
    assert_eq!(json(&d.join("a.json"))["config"]["baseline"], 50);
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "simulate",
            "phantom",
            "--rows",
            "8",
            "--cols",
            "8",
            "--length",
            "200",
            "--bins",
            "30,70,110,150",
            "--out",
            "ph.fpds",
            "--truth",
            "pt.json",
        ],
    );
    for t in ["1", "3"] {
        ok(
            d,
            &[
                "denoise",
                "ph.fpds",
                "--out",
                &format!("z{t}.fpds"),
                "--spatial",
                "gaussian:0.5",
                "--lambda",
                "1",
                "--threads",
                t,
            ],
        );
    }
    assert_eq!(
        std::fs::read(d.join("z1.fpds")).unwrap(),
        std::fs::read(d.join("z3.fpds")).unwrap()
    );
}

#[test]
fn single_spectrum_with_spatial_warns_and_runs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "simulate", "spectra", "--length", "800", "--peaks", "4", "--out", "s.csv", "--truth",
            "t.json",
        ],
    );
    assert!(d.join("s.csv.json").exists());
    let out = ok(
        d,
        &["denoise", "s.csv", "--out", "z.csv", "--spatial", "median"],
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let z = std::fs::read_to_string(d.join("z.csv")).unwrap();
    assert_eq!(z.lines().count(), 800);
    let side = json(&d.join("z.csv.json"));
    assert_eq!(side["config"]["spatial"]["kernel"]["kind"], "median");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    corpus(d);
    let code = |args: &[&str]| framepick(d, args).status.code().unwrap();
    assert_eq!(
        code(&["pick", "c.fpds", "--out", "x.json", "--overlap", "1.0"]),
        1
    );
    assert_eq!(
        code(&[
            "pick",
            "c.fpds",
            "--out",
            "x.json",
            "--spatial",
            "average",
            "--kernel-size",
            "2"
        ]),
        1
    );
    assert_eq!(
        code(&["pick", "c.fpds", "--out", "x.json", "--spatial", "box"]),
        1
    );
    assert_eq!(
        code(&["pick", "c.fpds", "--out", "x.json", "--no-such-flag"]),
        1
    );
    assert_eq!(code(&["pick", "missing.fpds", "--out", "x.json"]), 2);
    assert_eq!(code(&["pick", "c.fpds", "--out", "no/such/dir/x.json"]), 2);
    assert_eq!(
        code(&["render", "c.fpds", "--bin", "5000", "--out", "x.png"]),
        1
    );
    // validation runs before any output is produced
    assert!(!d.join("x.json").exists());
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn render_and_tune() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    corpus(d);
    ok(
        d,
        &[
            "render",
            "c.fpds",
            "--bins",
            "100:300",
            "--hotspot",
            "0.01",
            "--out",
            "img.png",
        ],
    );
    assert!(std::fs::read(d.join("img.png"))
        .unwrap()
        .starts_with(b"\x89PNG"));
    assert_eq!(
        json(&d.join("img.png.json"))["bins"],
        serde_json::json!([100, 300])
    );
    ok(d, &["render", "c.fpds", "--mz", "3000", "--out", "img.pgm"]);
    assert!(std::fs::read(d.join("img.pgm"))
        .unwrap()
        .starts_with(b"P5\n3 1\n255\n"));

    ok(
        d,
        &[
            "tune-lambda",
            "c.fpds",
            "--target",
            "6",
            "--per-spot",
            "--out",
            "l.json",
        ],
    );
    let report = json(&d.join("l.json"));
    assert!(report["report"]["global"].as_f64().unwrap() > 0.0);
    assert_eq!(report["report"]["per_spot"].as_array().unwrap().len(), 3);
    assert_eq!(
        framepick(d, &["tune-lambda", "c.fpds"]).status.code(),
        Some(1)
    );
}

#[test]
fn denoise_help_states_intensity_caveat() {
    let out = framepick(Path::new("."), &["denoise", "--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("do not have any relation to peak intensities"));
}
