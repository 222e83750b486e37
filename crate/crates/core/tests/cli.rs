use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use uavtrack::harness::csv::{parse_csv, REPORT_EXTRA_COLUMNS, TRACK_COLUMNS};
use uavtrack::harness::CONFIG_ENV;
use uavtrack::simulator::{presets, Renderer, Scenario};

fn uavtrack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uavtrack"))
        .args(args)
        .env_remove(CONFIG_ENV)
        .output()
        .expect("binary runs")
}

fn write_scenario(dir: &Path, name: &str, s: &Scenario) -> String {
    let p = dir.join(name);
    fs::write(&p, s.serialize()).unwrap();
    p.display().to_string()
}

fn short_benign() -> Scenario {
    Scenario {
        frames: 60,
        ..presets::benign()
    }
}

fn strip_timing(csv: &str) -> Vec<Vec<String>> {
    let (h, rows) = parse_csv(csv);
    let n = h.len() - 1;
    assert_eq!(h[n], "wall_ns");
    rows.into_iter().map(|mut r| {
        r.truncate(n);
        r
    }).collect()
}

#[test]
fn roi_outside_frame_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let seq = dir.path().join("seq");
    let sc = write_scenario(dir.path(), "s.txt", &Scenario { frames: 3, ..Scenario::default() });
    let o = uavtrack(&["simulate", &sc, "--export", seq.to_str().unwrap(), "--out", dir.path().join("r.csv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let out = dir.path().join("out");
    let log = out.join("track.csv");
    let dumps = out.join("dumps");
    let o = uavtrack(&[
        "track",
        seq.to_str().unwrap(),
        "--roi",
        "300,230,40,40",
        "--out",
        log.to_str().unwrap(),
        "--dump-frames",
        dumps.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("outside"), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out.exists());
}

#[test]
fn empty_sequence_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = uavtrack(&["track", dir.path().to_str().unwrap(), "--roi", "0,0,4,4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_scenario_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.txt");
    fs::write(&p, "width = 320\nheight = 240\nfps = thirty\n").unwrap();
    let o = uavtrack(&["simulate", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains(":3"), "{err}");
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.txt");
    fs::write(&cfg, "zmncc_threshold = 1.5\n").unwrap();
    let sc = write_scenario(dir.path(), "s.txt", &Scenario { frames: 2, ..Scenario::default() });
    let o = uavtrack(&["simulate", &sc, "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_is_repeatable_and_has_the_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write_scenario(dir.path(), "s.txt", &short_benign());
    let a = uavtrack(&["simulate", &sc]);
    let b = uavtrack(&["simulate", &sc]);
    assert_eq!(a.status.code(), Some(0));
    let (a, b) = (String::from_utf8(a.stdout).unwrap(), String::from_utf8(b.stdout).unwrap());
    let (h, rows) = parse_csv(&a);
    let expect: Vec<&str> = TRACK_COLUMNS.iter().chain(REPORT_EXTRA_COLUMNS.iter()).copied().collect();
    assert_eq!(h, expect);
    assert_eq!(rows.len(), 60);
    assert_eq!(strip_timing(&a), strip_timing(&b));
}

#[test]
fn exported_sequence_tracks_row_for_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("open_loop.txt");
    fs::write(&cfg, "# gimbal does not move the camera\ngimbal_feedback = false\n").unwrap();
    let s = short_benign();
    let sc = write_scenario(dir.path(), "s.txt", &s);
    let seq = dir.path().join("seq");
    let report = dir.path().join("report.csv");
    let o = uavtrack(&[
        "simulate",
        &sc,
        "--config",
        cfg.to_str().unwrap(),
        "--export",
        seq.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let roi = Renderer::new(&s).unwrap().initial_roi((0.0, 0.0));
    let roi = format!("{},{},{},{}", roi.x, roi.y, roi.width, roi.height);
    let log = dir.path().join("track.csv");
    let motors = dir.path().join("motors.csv");
    let dumps = dir.path().join("dumps");
    // The config comes from the environment here.
    let o = Command::new(env!("CARGO_BIN_EXE_uavtrack"))
        .args(["track", seq.to_str().unwrap(), "--roi", &roi, "--out", log.to_str().unwrap()])
        .args(["--motor-log", motors.to_str().unwrap(), "--dump-frames", dumps.to_str().unwrap()])
        .env(CONFIG_ENV, &cfg)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let (th, track_rows) = parse_csv(&fs::read_to_string(&log).unwrap());
    let (_, report_rows) = parse_csv(&fs::read_to_string(&report).unwrap());
    assert_eq!(th, TRACK_COLUMNS);
    assert_eq!(track_rows.len(), report_rows.len());
    for (t, r) in track_rows.iter().zip(&report_rows) {
        assert_eq!(t[..], r[..TRACK_COLUMNS.len()]);
    }
    assert!(track_rows.iter().filter(|r| r[2] == "1").count() >= 57);
    assert_eq!(parse_csv(&fs::read_to_string(&motors).unwrap()).1.len(), 60);
    assert_eq!(fs::read_dir(&dumps).unwrap().count(), 60);
}

#[test]
fn track_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let s = Scenario { frames: 20, ..presets::dropout() };
    let sc = write_scenario(dir.path(), "s.txt", &s);
    let seq = dir.path().join("seq");
    assert_eq!(uavtrack(&["simulate", &sc, "--export", seq.to_str().unwrap()]).status.code(), Some(0));
    let roi = Renderer::new(&s).unwrap().initial_roi((0.0, 0.0));
    let roi = format!("{},{},{},{}", roi.x, roi.y, roi.width, roi.height);
    let a = uavtrack(&["track", seq.to_str().unwrap(), "--roi", &roi]);
    let b = uavtrack(&["track", seq.to_str().unwrap(), "--roi", &roi]);
    assert_eq!(a.status.code(), Some(0));
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn long_miss_run_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.txt");
    fs::write(&cfg, "max_miss_run = 5\n").unwrap();
    let s = Scenario { frames: 140, ..presets::dropout() };
    let sc = write_scenario(dir.path(), "s.txt", &s);
    let o = uavtrack(&["simulate", &sc, "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn benchmark_single_size_gives_one_row() {
    let o = uavtrack(&["benchmark", "--sizes", "12x10", "--repeats", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    let cols: Vec<&str> = rows[0].split_whitespace().collect();
    assert_eq!(cols[0], "12x10");
    assert!(cols[2].parse::<usize>().unwrap() >= 500);
    assert!(cols[3].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn benchmark_rejects_tiny_patches() {
    let o = uavtrack(&["benchmark", "--sizes", "3x3"]);
    assert_eq!(o.status.code(), Some(2));
}
