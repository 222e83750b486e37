//! CSV schemas. Column names and order are fixed; floats use the shortest
//! representation that round-trips, and absent values are empty fields.

use std::fmt::Write as _;

use crate::simulator::{ReportRow, TrackReport};
use crate::tracker::FrameRecord;

pub const TRACK_COLUMNS: [&str; 13] = [
    "frame_index",
    "timestamp",
    "detected",
    "x",
    "y",
    "score",
    "template_index",
    "win_x0",
    "win_y0",
    "win_x1",
    "win_y1",
    "miss",
    "templates_evaluated",
];

/// Appended to [`TRACK_COLUMNS`] in simulation reports. `wall_ns` is last
/// and is the only column that varies between identical runs.
pub const REPORT_EXTRA_COLUMNS: [&str; 16] = [
    "pan_counts",
    "tilt_counts",
    "pan_rad",
    "tilt_rad",
    "saturated",
    "viewport_x",
    "viewport_y",
    "truth_present",
    "truth_x",
    "truth_y",
    "truth_heading",
    "gain",
    "offset",
    "error",
    "false_positive",
    "wall_ns",
];

pub const MOTOR_COLUMNS: [&str; 6] = ["frame_index", "pan_counts", "tilt_counts", "pan_rad", "tilt_rad", "saturated"];

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn flag(b: bool) -> u8 {
    u8::from(b)
}

pub fn track_row(r: &FrameRecord) -> String {
    let d = r.detection.as_ref();
    let w = r.window.rect;
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{}",
        r.frame_index,
        r.timestamp,
        flag(d.is_some()),
        opt(d.map(|d| d.position.0)),
        opt(d.map(|d| d.position.1)),
        opt(d.map(|d| d.score)),
        opt(d.map(|d| d.template_index)),
        w.x,
        w.y,
        w.right(),
        w.bottom(),
        flag(d.is_none()),
        r.templates_evaluated
    )
}

pub fn track_log<'a>(records: impl IntoIterator<Item = &'a FrameRecord>) -> String {
    let mut s = TRACK_COLUMNS.join(",");
    s.push('\n');
    for r in records {
        s.push_str(&track_row(r));
        s.push('\n');
    }
    s
}

pub fn motor_row(r: &FrameRecord) -> String {
    format!(
        "{},{},{},{},{},{}",
        r.frame_index,
        r.counts.0,
        r.counts.1,
        r.gimbal.pan,
        r.gimbal.tilt,
        flag(r.gimbal.saturated)
    )
}

pub fn motor_log<'a>(records: impl IntoIterator<Item = &'a FrameRecord>) -> String {
    let mut s = MOTOR_COLUMNS.join(",");
    s.push('\n');
    for r in records {
        s.push_str(&motor_row(r));
        s.push('\n');
    }
    s
}

pub fn report_row(row: &ReportRow) -> String {
    let r = &row.record;
    let t = &row.truth;
    let mut s = track_row(r);
    let _ = write!(
        s,
        ",{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        r.counts.0,
        r.counts.1,
        r.gimbal.pan,
        r.gimbal.tilt,
        flag(r.gimbal.saturated),
        row.viewport.0,
        row.viewport.1,
        flag(t.center.is_some()),
        opt(t.center.map(|c| c.0)),
        opt(t.center.map(|c| c.1)),
        t.heading,
        t.gain,
        t.offset,
        opt(row.error),
        flag(row.false_positive),
        row.wall_ns
    );
    s
}

pub fn report_csv(report: &TrackReport) -> String {
    let mut s = TRACK_COLUMNS.join(",");
    s.push(',');
    s.push_str(&REPORT_EXTRA_COLUMNS.join(","));
    s.push('\n');
    for row in &report.rows {
        s.push_str(&report_row(row));
        s.push('\n');
    }
    s
}

/// Parse a CSV produced by this module into a header and string rows.
pub fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines
        .next()
        .map(|h| h.split(',').map(str::to_string).collect())
        .unwrap_or_default();
    let rows = lines
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::SearchWindow;
    use crate::gimbal::GimbalState;
    use crate::matcher::Detection;

    fn record(detected: bool) -> FrameRecord {
        FrameRecord {
            frame_index: 3,
            timestamp: 0.1,
            detection: detected.then_some(Detection {
                position: (10.5, 20.0),
                score: 0.95,
                template_index: 4,
                frame_index: 3,
            }),
            window: SearchWindow::full_frame(64, 48),
            templates_evaluated: 2,
            counts: (5, -1),
            gimbal: GimbalState::default(),
        }
    }

    #[test]
    fn track_row_layout() {
        assert_eq!(track_row(&record(true)), "3,0.1,1,10.5,20,0.95,4,0,0,64,48,0,2");
        assert_eq!(track_row(&record(false)), "3,0.1,0,,,,,0,0,64,48,1,2");
    }

    #[test]
    fn parsed_log_has_fixed_columns() {
        let text = track_log([&record(true), &record(false)]);
        let (h, rows) = parse_csv(&text);
        assert_eq!(h, TRACK_COLUMNS);
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.len() == TRACK_COLUMNS.len()));
        let (mh, mrows) = parse_csv(&motor_log([&record(true)]));
        assert_eq!(mh, MOTOR_COLUMNS);
        assert_eq!(mrows[0], ["3", "5", "-1", "0", "0", "0"]);
    }
}
