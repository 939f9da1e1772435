use std::path::Path;
use std::process::{Command, Output};

use blindspot::frame::{save_depth_pgm, save_pgm, DepthFrame, Frame};

fn blindspot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blindspot")).args(args).output().expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(blindspot(&[]).status.code(), Some(1));
    assert_eq!(blindspot(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(blindspot(&["synth", "--out", "/tmp/x", "--preset", "nope"]).status.code(), Some(1));
    assert_eq!(blindspot(&["stereo"]).status.code(), Some(1));
    assert_eq!(blindspot(&["--help"]).status.code(), Some(0));
}

#[test]
fn data_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(blindspot(&["detect", path(dir.path())]).status.code(), Some(2));
    let junk = dir.path().join("junk.pgm");
    std::fs::write(&junk, b"P5\n2 2\n255\nx").unwrap();
    assert_eq!(blindspot(&["flow", path(&junk), path(&junk)]).status.code(), Some(2));
    let missing = dir.path().join("missing.toml");
    assert_eq!(blindspot(&["--config", path(&missing), "synth", "--list"]).status.code(), Some(2));
}

#[test]
fn invalid_settings_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "frame_skip = 0\n").unwrap();
    assert_eq!(blindspot(&["--config", path(&cfg), "synth", "--list"]).status.code(), Some(1));
}

#[test]
fn flow_reports_energy() {
    let dir = tempfile::tempdir().unwrap();
    let a = Frame::from_fn(32, 24, |x, y| ((x * 3 + y * 5) % 7) as f64 / 6.0);
    let (pa, pb, dump) = (dir.path().join("a.pgm"), dir.path().join("b.pgm"), dir.path().join("flow.bin"));
    std::fs::write(&pa, save_pgm(&a)).unwrap();
    std::fs::write(&pb, save_pgm(&a)).unwrap();
    let out = blindspot(&["flow", path(&pa), path(&pb), "--out", path(&dump)]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["energy"], 0.0);
    assert_eq!(v["zero_flow"], true);
    assert_eq!(std::fs::read(&dump).unwrap().len(), 8 + 2 * 32 * 24 * 4);
}

#[test]
fn stereo_reads_depth_maps() {
    let dir = tempfile::tempdir().unwrap();
    let near = DepthFrame::from_fn(40, 30, |x, y| if (5..20).contains(&x) && (5..20).contains(&y) { 0.2 } else { 1.0 });
    let p = dir.path().join("near.pgm");
    std::fs::write(&p, save_depth_pgm(&near)).unwrap();
    let out = blindspot(&["stereo", "--depth", path(&p)]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["level"], "red");
    assert_eq!(v["band_counts"], serde_json::json!([1, 0, 0]));
}

#[test]
fn synth_then_detect_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("scene");
    let out = blindspot(&["synth", "--preset", "approach", "--out", path(&scene)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["frame_000000.pgm", "depth_000059.pgm", "truth.jsonl", "scene.toml"] {
        assert!(scene.join(f).exists(), "{f}");
    }

    let (run, report) = (dir.path().join("run.jsonl"), dir.path().join("report.json"));
    let out = blindspot(&["detect", path(&scene), "--out", path(&run), "--report", path(&report), "--canonical"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let records: Vec<serde_json::Value> =
        std::fs::read_to_string(&run).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 12);
    assert!(records.iter().any(|r| r["alert"] == "red"));
    assert!(records.iter().all(|r| r.get("elapsed_ms").is_none()));
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(rep["frames_processed"], 12);

    let csv = dir.path().join("ttc.csv");
    let out = blindspot(&["ttc", path(&scene), "--frame", "40", "--out", path(&csv)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("column_index,ttc_frames\n"));
    assert_eq!(text.lines().count(), 1 + 20);
    assert_eq!(blindspot(&["ttc", path(&scene), "--frame", "60"]).status.code(), Some(1));
}

#[test]
fn detect_writes_overlays() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("scene");
    let out = blindspot(&["synth", "--preset", "zero_relative_hold", "--out", path(&scene), "--frames", "6", "--no-depth"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!scene.join("depth_000000.pgm").exists());
    let overlays = dir.path().join("ov");
    let out = blindspot(&["detect", path(&scene), "--frame-skip", "2", "--overlay-dir", path(&overlays)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let lines: Vec<serde_json::Value> = stdout(&out).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 3);
    assert!(lines.iter().all(|r| r["alert"] == "red" && r["circles"].as_array().unwrap().len() >= 2));
    let ppm = std::fs::read(overlays.join("overlay_000002.ppm")).unwrap();
    assert!(ppm.starts_with(b"P6\n320 240\n255\n"));
}

#[test]
fn synth_lists_presets() {
    let out = blindspot(&["synth", "--list"]);
    assert_eq!(out.status.code(), Some(0));
    let names: Vec<String> = stdout(&out).lines().map(String::from).collect();
    assert_eq!(names.len(), blindspot::synth::PRESET_NAMES.len());
    assert!(names.iter().any(|n| n == "wall_reveal"));
}
