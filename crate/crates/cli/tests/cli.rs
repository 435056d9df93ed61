use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mintime(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mintime"))
        .args(args)
        .output()
        .unwrap()
}

fn run_ok(args: &[&str]) {
    let out = mintime(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn num(s: &str) -> f64 {
    if s == "inf" {
        f64::INFINITY
    } else {
        s.parse().unwrap()
    }
}

#[test]
fn counter_example_tube_is_made_of_segments_on_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    run_ok(&["reach", "--example", "ex-counter", "--out", out]);
    for row in csv_rows(&dir.path().join("tube.csv")) {
        let (y1, y2) = (num(&row[6]), num(&row[7]));
        assert!((y1 + y2).abs() < 1e-12, "{row:?}");
    }
    let s = summary(dir.path());
    assert_eq!(s["degenerate_sets"], 41);
    assert_eq!(s["expansion_violations"].as_array().unwrap().len(), 40);
}

#[test]
fn moving_sets_are_flagged_and_box_increments_are_uniform() {
    let dir = tempfile::tempdir().unwrap();
    let moving = dir.path().join("moving");
    run_ok(&[
        "reach",
        "--example",
        "exn4b-offset-target",
        "--out",
        moving.to_str().unwrap(),
    ]);
    assert_eq!(summary(&moving)["monotone_inclusion"], false);

    let boxed = dir.path().join("box");
    run_ok(&[
        "reach",
        "--example",
        "ex1-box-origin",
        "--out",
        boxed.to_str().unwrap(),
    ]);
    let s = summary(&boxed);
    assert_eq!(s["monotone_inclusion"], true);
    // Δt·max_k δ*(l^k, [-1,1]²) with Δt = 0.1.
    let inc: Vec<f64> = s["support_increments"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert!(inc
        .iter()
        .all(|v| (v - inc[0]).abs() < 1e-12 && *v > 0.14 && *v <= 0.1 * 2f64.sqrt()));
}

#[test]
fn box_field_is_the_max_norm_and_oscillator_values_are_bounded() {
    let dir = tempfile::tempdir().unwrap();
    let boxed = dir.path().join("box");
    run_ok(&[
        "mtf",
        "--example",
        "ex1-box-origin",
        "--dx",
        "0.05",
        "--out",
        boxed.to_str().unwrap(),
    ]);
    for row in csv_rows(&boxed.join("field.csv")) {
        let (x1, x2, t) = (num(&row[0]), num(&row[1]), num(&row[2]));
        assert!((t - x1.abs().max(x2.abs())).abs() <= 1e-9, "{row:?}");
    }

    let osc = dir.path().join("osc");
    run_ok(&[
        "mtf",
        "--example",
        "ex2b-oscillator",
        "--dx",
        "0.1",
        "--out",
        osc.to_str().unwrap(),
    ]);
    let rows = csv_rows(&osc.join("field.csv"));
    for row in &rows {
        let t = num(&row[2]);
        assert!(t >= 0.0 && (t.is_infinite() || t <= 6.0 + 1e-12));
        if num(&row[0]).abs() < 1e-12 && num(&row[1]).abs() < 1e-12 {
            assert_eq!(t, 0.0);
        }
    }

    let ball = dir.path().join("ball");
    run_ok(&[
        "mtf",
        "--example",
        "ex1-ball-ball",
        "--dx",
        "0.05",
        "--out",
        ball.to_str().unwrap(),
    ]);
    for row in csv_rows(&ball.join("field.csv")) {
        let r = num(&row[0]).hypot(num(&row[1]));
        if r < 0.2499 {
            assert_eq!(num(&row[2]), 0.0, "{row:?}");
        }
    }
}

#[test]
fn study_writes_rows_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let ladder = dir.path().join("ladder.json");
    std::fs::write(
        &ladder,
        r#"[{"h": 0.05, "n_r": 50}, {"h": 0.025, "n_r": 50}, {"h": 0.0125, "n_r": 50}]"#,
    )
    .unwrap();
    let out = dir.path().join("study");
    run_ok(&[
        "study",
        "--example",
        "ex3a",
        "--scheme",
        "euler-riemann",
        "--ladder",
        ladder.to_str().unwrap(),
        "--dx",
        "0.05",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(csv_rows(&out.join("study.csv")).len(), 3);
    let fit = csv_rows(&out.join("fit.csv"));
    assert_eq!(fit.len(), 1);
    assert!(num(&fit[0][1]) > 0.5);

    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, "[]").unwrap();
    let res = mintime(&[
        "study",
        "--example",
        "ex3a",
        "--ladder",
        empty.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn trajectories_and_their_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traj");
    let o = out.to_str().unwrap();
    run_ok(&[
        "traj",
        "--example",
        "ex2a-origin",
        "--tf",
        "3",
        "--k",
        "30",
        "--nr",
        "400",
        "--start",
        "0,1",
        "--out",
        o,
    ]);
    let s = summary(&out);
    assert_eq!(s["switch_times"].as_array().unwrap().len(), 1);
    let controls: Vec<f64> = csv_rows(&out.join("trajectory.csv"))
        .iter()
        .map(|r| num(&r[3]))
        .collect();
    let changes = controls.windows(2).filter(|w| w[0] != w[1]).count();
    assert_eq!(changes, 1);
    assert!(controls.iter().all(|u| u.abs() == 1.0));

    run_ok(&[
        "traj",
        "--example",
        "ex2a-origin",
        "--start",
        "0,0",
        "--out",
        o,
    ]);
    assert_eq!(csv_rows(&out.join("trajectory.csv")).len(), 1);
    assert_eq!(summary(&out)["duration"], 0.0);

    let far = mintime(&[
        "traj",
        "--example",
        "ex2a-origin",
        "--start",
        "5,5",
        "--out",
        o,
    ]);
    assert_eq!(far.status.code(), Some(4));
}

#[test]
fn config_and_domain_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().to_str().unwrap();
    let res = mintime(&["reach", "--example", "nope", "--out", o]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("example"));
    let res = mintime(&["reach", "--example", "ex3a", "--nr", "2", "--out", o]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("nr"));
    let res = mintime(&[
        "mtf",
        "--example",
        "ex3a",
        "--no-monotone",
        "--mode",
        "interpolated",
        "--out",
        o,
    ]);
    assert_eq!(res.status.code(), Some(2));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"example": "ex3a", "nr": 5}"#).unwrap();
    let res = mintime(&["reach", "--config", bad.to_str().unwrap(), "--out", o]);
    assert_eq!(res.status.code(), Some(2));

    let res = mintime(&[
        "reach",
        "--example",
        "ex4-bilinear",
        "--tf",
        "800",
        "--k",
        "800",
        "--nr",
        "20",
        "--out",
        o,
    ]);
    assert_eq!(res.status.code(), Some(3));
}

#[test]
fn diag_reports_rank_and_stopping() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().to_str().unwrap();
    run_ok(&[
        "diag",
        "--example",
        "exn2-longhorizon",
        "--threshold",
        "1e-3",
        "--out",
        o,
    ]);
    let s = summary(dir.path());
    assert_eq!(s["kalman_rank"], 2);
    assert!(s["stopping_time"].as_f64().unwrap() < 100.0);
    run_ok(&["diag", "--example", "ex-counter", "--out", o]);
    assert_eq!(summary(dir.path())["kalman_rank"], 1);
}

#[test]
fn resolved_config_reproduces_the_run_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    run_ok(&[
        "mtf",
        "--example",
        "ex3a",
        "--k",
        "5",
        "--dx",
        "0.1",
        "--out",
        first.to_str().unwrap(),
    ]);
    let config = dir.path().join("resolved.json");
    let mut cfg = summary(&first)["config"].clone();
    let second = dir.path().join("second");
    cfg["out"] = Value::String(second.to_str().unwrap().to_string());
    std::fs::write(&config, serde_json::to_string(&cfg).unwrap()).unwrap();
    run_ok(&["mtf", "--config", config.to_str().unwrap()]);
    assert_eq!(
        std::fs::read(first.join("field.csv")).unwrap(),
        std::fs::read(second.join("field.csv")).unwrap()
    );

    // Inline problems resolve the same way.
    let inline = dir.path().join("inline.json");
    std::fs::write(
        &inline,
        format!(
            r#"{{"problem": {{"A": [[0, 1], [0, 0]], "B": [[0], [1]],
                "control": {{"type": "interval", "lo": -1, "hi": 1}},
                "target": {{"type": "point", "p": [0, 0]}},
                "time": {{"t0": 0, "tf": 1, "K": 10, "N": 5}}}},
               "grid": {{"x1": [-0.5, 0.5], "x2": [-0.5, 0.5], "dx": 0.1}},
               "out": "{}"}}"#,
            dir.path().join("inline").display()
        ),
    )
    .unwrap();
    run_ok(&["mtf", "--config", inline.to_str().unwrap()]);
    let s = summary(&dir.path().join("inline"));
    assert!(s["config"]["problem"].is_object());
    assert!(s["reached"].as_u64().unwrap() > 0);
}
