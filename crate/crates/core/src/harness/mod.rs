//! Command implementations behind the `uavtrack` binary: sequence tracking,
//! closed-loop simulation and the patch-size throughput benchmark.
//!
//! Exit codes: `0` success, `1` tracking finished but some run of missed
//! frames exceeded `max_miss_run`, `2` input or configuration error.

pub mod config;
pub mod csv;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{TrackerConfig, CONFIG_ENV};

use crate::error::{Result, TrackError};
use crate::imaging::pgm::{write_frame, SequenceReader, SequenceWriter};
use crate::imaging::{Frame, Rect};
use crate::simulator::{longest_miss_run, presets, run_closed_loop_with, Renderer, Scenario, TrackReport};
use crate::tracker::{FrameRecord, Tracker};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISS_RUN: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Exit code for a finished run.
pub fn exit_code(longest_miss_run: usize, config: &TrackerConfig) -> i32 {
    if longest_miss_run > config.max_miss_run {
        EXIT_MISS_RUN
    } else {
        EXIT_OK
    }
}

/// Parse `x,y,w,h`.
pub fn parse_roi(s: &str) -> std::result::Result<Rect, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(format!("expected x,y,w,h, got {s:?}"));
    }
    let x = parts[0].parse::<i64>().map_err(|_| format!("bad x {:?}", parts[0]))?;
    let y = parts[1].parse::<i64>().map_err(|_| format!("bad y {:?}", parts[1]))?;
    let w = parts[2].parse::<usize>().map_err(|_| format!("bad width {:?}", parts[2]))?;
    let h = parts[3].parse::<usize>().map_err(|_| format!("bad height {:?}", parts[3]))?;
    Ok(Rect::new(x, y, w, h))
}

/// Parse `WxH`.
pub fn parse_size(s: &str) -> std::result::Result<(usize, usize), String> {
    let (w, h) = s
        .trim()
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got {s:?}"))?;
    let w = w.trim().parse().map_err(|_| format!("bad width in {s:?}"))?;
    let h = h.trim().parse().map_err(|_| format!("bad height in {s:?}"))?;
    Ok((w, h))
}

/// Copy of `frame` with the searched window outlined and the detection
/// marked by a 3x3 block, both at full intensity.
pub fn annotate(frame: &Frame, record: &FrameRecord) -> Frame {
    let mut out = frame.clone();
    let (w, h) = (frame.width() as i64, frame.height() as i64);
    let mut put = |x: i64, y: i64| {
        if (0..w).contains(&x) && (0..h).contains(&y) {
            out.set(x as usize, y as usize, 255.0);
        }
    };
    let r = record.window.rect;
    let (x0, y0, x1, y1) = (r.x, r.y, r.right() - 1, r.bottom() - 1);
    for x in x0..=x1 {
        put(x, y0);
        put(x, y1);
    }
    for y in y0..=y1 {
        put(x0, y);
        put(x1, y);
    }
    if let Some(d) = &record.detection {
        let (cx, cy) = (d.position.0.round() as i64, d.position.1.round() as i64);
        for dy in -1..=1 {
            for dx in -1..=1 {
                put(cx + dx, cy + dy);
            }
        }
    }
    out
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| TrackError::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| TrackError::io(path, e))
}

#[derive(Debug, Clone)]
pub struct TrackOptions {
    pub sequence: PathBuf,
    pub roi: Rect,
    pub config: TrackerConfig,
    /// Track log destination; returned only when `None`.
    pub out: Option<PathBuf>,
    pub motor_log: Option<PathBuf>,
    /// Directory for annotated frames.
    pub dump_frames: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct TrackOutput {
    pub records: Vec<FrameRecord>,
    pub csv: String,
    pub exit_code: i32,
}

/// Track a recorded sequence from a template selected in its first frame.
/// Nothing is written unless the template selection succeeds.
pub fn cmd_track(opts: &TrackOptions) -> Result<TrackOutput> {
    opts.config.validate()?;
    let mut reader = SequenceReader::open(&opts.sequence, opts.config.fps)?;
    let first = reader.next().ok_or_else(|| TrackError::EmptySequence(opts.sequence.clone()))??;
    let mut tracker = Tracker::new(&first, opts.roi, &opts.config, false)?;
    if let Some(dir) = &opts.dump_frames {
        fs::create_dir_all(dir).map_err(|e| TrackError::io(dir, e))?;
    }

    let mut records = Vec::with_capacity(reader.len() + 1);
    let mut frame = Some(first);
    while let Some(f) = frame.take() {
        let rec = tracker.process(&f)?;
        if let Some(dir) = &opts.dump_frames {
            write_frame(&SequenceWriter::frame_path(dir, records.len()), &annotate(&f, &rec))?;
        }
        log::debug!("frame {}: {:?}", rec.frame_index, rec.detection);
        records.push(rec);
        frame = reader.next().transpose()?;
    }

    let csv = csv::track_log(&records);
    if let Some(out) = &opts.out {
        write_text(out, &csv)?;
    }
    if let Some(path) = &opts.motor_log {
        write_text(path, &csv::motor_log(&records))?;
    }
    let exit_code = exit_code(longest_miss_run(&records), &opts.config);
    Ok(TrackOutput {
        records,
        csv,
        exit_code,
    })
}

#[derive(Debug, Clone)]
pub struct SimulateOptions {
    pub scenario: Scenario,
    pub config: TrackerConfig,
    /// Directory receiving the rendered frames and timestamps.
    pub export: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct SimulateOutput {
    pub report: TrackReport,
    pub csv: String,
    pub exit_code: i32,
}

pub fn cmd_simulate(opts: &SimulateOptions) -> Result<SimulateOutput> {
    let mut writer = opts.export.as_deref().map(SequenceWriter::create).transpose()?;
    let report = run_closed_loop_with(&opts.scenario, &opts.config, |frame, _| match writer.as_mut() {
        Some(w) => w.push(frame),
        None => Ok(()),
    })?;
    if let Some(w) = writer {
        w.finish()?;
    }
    let csv = csv::report_csv(&report);
    if let Some(out) = &opts.out {
        write_text(out, &csv)?;
    }
    let exit_code = exit_code(report.longest_miss_run(), &opts.config);
    Ok(SimulateOutput {
        report,
        csv,
        exit_code,
    })
}

pub const BENCHMARK_FRAME_SIZE: (usize, usize) = (640, 480);
pub const BENCHMARK_MIN_FRAMES: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub patch: (usize, usize),
    pub frames: usize,
    /// Frames per second over the tracker's processing time.
    pub fps: f64,
    pub mean_templates: f64,
    pub detection_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkResult {
    /// Sorted by patch area.
    pub rows: Vec<BenchmarkRow>,
}

impl BenchmarkResult {
    pub fn table(&self) -> String {
        let mut s = String::from("patch    area   frames      fps  templates/frame  detected\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<7} {:>5} {:>8} {:>8.2} {:>16.2} {:>8.1}%",
                format!("{}x{}", r.patch.0, r.patch.1),
                r.patch.0 * r.patch.1,
                r.frames,
                r.fps,
                r.mean_templates,
                r.detection_rate * 100.0
            );
        }
        s
    }
}

/// Time the tracker on a fixed-seed 640x480 scene for each patch size.
/// Frames are rendered once, before timing. Every scene is tracked `repeats`
/// times, interleaved across sizes so transient load affects all sizes
/// alike, and each frame contributes its fastest processing time.
pub fn cmd_benchmark(config: &TrackerConfig, sizes: &[(usize, usize)], frames: usize, repeats: usize) -> Result<BenchmarkResult> {
    config.validate()?;
    let (fw, fh) = BENCHMARK_FRAME_SIZE;
    for &(w, h) in sizes {
        if w < 4 || h < 4 || w > fw / 2 || h > fh / 2 {
            return Err(TrackError::InvalidConfig(format!(
                "patch {w}x{h} must be at least 4x4 and at most {}x{}",
                fw / 2,
                fh / 2
            )));
        }
    }
    let frames = frames.max(BENCHMARK_MIN_FRAMES);
    let mut runs = sizes
        .iter()
        .map(|&(w, h)| BenchRun::new(presets::benchmark(w, h, frames)))
        .collect::<Result<Vec<_>>>()?;
    for _ in 0..repeats.max(1) {
        for run in &mut runs {
            run.pass(config)?;
        }
    }
    let mut rows: Vec<BenchmarkRow> = runs.iter().map(BenchRun::row).collect();
    rows.sort_by_key(|r| r.patch.0 * r.patch.1);
    Ok(BenchmarkResult { rows })
}

/// Pre-rendered benchmark scene and its best per-frame times so far.
struct BenchRun {
    scenario: Scenario,
    roi: Rect,
    // 8-bit storage keeps 500 full frames small; rendering is already
    // quantized, so nothing is lost.
    stored: Vec<(Vec<u8>, f64)>,
    best: Vec<f64>,
    templates: usize,
    hits: usize,
}

impl BenchRun {
    fn new(scenario: Scenario) -> Result<Self> {
        let mut renderer = Renderer::new(&scenario)?;
        let roi = renderer.initial_roi((0.0, 0.0));
        let mut stored = Vec::with_capacity(scenario.frames);
        for i in 0..scenario.frames {
            let (f, _) = renderer.render(i, (0.0, 0.0))?;
            stored.push((f.to_u8(), f.timestamp));
        }
        Ok(Self {
            best: vec![f64::INFINITY; scenario.frames],
            scenario,
            roi,
            stored,
            templates: 0,
            hits: 0,
        })
    }

    fn frame_at(&self, i: usize) -> Result<Frame> {
        let (bytes, t) = &self.stored[i];
        Frame::from_u8(self.scenario.width, self.scenario.height, bytes, *t, i as u64)
    }

    /// Track the whole scene once. Tracking is deterministic, so the counts
    /// are the same on every pass.
    fn pass(&mut self, config: &TrackerConfig) -> Result<()> {
        let mut tracker = Tracker::new(&self.frame_at(0)?, self.roi, config, false)?;
        (self.templates, self.hits) = (0, 0);
        for i in 0..self.stored.len() {
            let frame = self.frame_at(i)?;
            let start = Instant::now();
            let rec = tracker.process(&frame)?;
            self.best[i] = self.best[i].min(start.elapsed().as_secs_f64());
            self.templates += rec.templates_evaluated;
            self.hits += usize::from(rec.detection.is_some());
        }
        Ok(())
    }

    fn row(&self) -> BenchmarkRow {
        let n = self.scenario.frames as f64;
        let busy: f64 = self.best.iter().sum();
        BenchmarkRow {
            patch: (self.scenario.target_width, self.scenario.target_height),
            frames: self.scenario.frames,
            fps: n / busy.max(f64::MIN_POSITIVE),
            mean_templates: self.templates as f64 / n,
            detection_rate: self.hits as f64 / n,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::SearchWindow;

    #[test]
    fn roi_and_size_parsing() {
        assert_eq!(parse_roi("1, 2,30,40").unwrap(), Rect::new(1, 2, 30, 40));
        assert!(parse_roi("1,2,3").is_err());
        assert!(parse_roi("1,2,-3,4").is_err());
        assert_eq!(parse_size("27x28").unwrap(), (27, 28));
        assert!(parse_size("27").is_err());
    }

    #[test]
    fn exit_code_threshold() {
        let c = TrackerConfig {
            max_miss_run: 5,
            ..TrackerConfig::default()
        };
        assert_eq!(exit_code(5, &c), EXIT_OK);
        assert_eq!(exit_code(6, &c), EXIT_MISS_RUN);
    }

    #[test]
    fn annotation_marks_window_and_detection() {
        let f = Frame::new(20, 20, vec![10.0; 400], 0.0, 0).unwrap();
        let rec = FrameRecord {
            frame_index: 0,
            timestamp: 0.0,
            detection: Some(crate::matcher::Detection {
                position: (10.0, 9.5),
                score: 1.0,
                template_index: 0,
                frame_index: 0,
            }),
            window: SearchWindow {
                rect: Rect::new(2, 3, 12, 10),
                ..SearchWindow::full_frame(20, 20)
            },
            templates_evaluated: 1,
            counts: (0, 0),
            gimbal: Default::default(),
        };
        let a = annotate(&f, &rec);
        assert_eq!(a.get(2, 3), 255.0);
        assert_eq!(a.get(13, 12), 255.0);
        assert_eq!(a.get(14, 12), 10.0);
        assert_eq!(a.get(5, 7), 10.0);
        // 9.5 rounds to 10.
        for (x, y) in [(9, 9), (11, 11), (10, 10)] {
            assert_eq!(a.get(x, y), 255.0);
        }
        assert_eq!(a.get(10, 8), 10.0);
        let marked = a.pixels().iter().filter(|&&v| v == 255.0).count();
        assert_eq!(marked, 2 * 12 + 2 * 8 + 9);
    }

    #[test]
    fn benchmark_rejects_bad_sizes() {
        let c = TrackerConfig::default();
        assert!(cmd_benchmark(&c, &[(3, 10)], 500, 1).is_err());
        assert!(cmd_benchmark(&c, &[(321, 10)], 500, 1).is_err());
    }
}
