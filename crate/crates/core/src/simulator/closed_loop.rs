use std::time::Instant;

use super::{Renderer, Scenario, TruthRecord};
use crate::error::Result;
use crate::harness::TrackerConfig;
use crate::imaging::Frame;
use crate::tracker::{FrameRecord, Tracker};

/// Tracker output for one frame next to the ground truth it was rendered
/// from.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub record: FrameRecord,
    pub truth: TruthRecord,
    /// Distance from detection to truth, when both exist.
    pub error: Option<f64>,
    /// Detection with no target in view or farther than twice the template
    /// diagonal from it.
    pub false_positive: bool,
    /// Viewport offset the frame was rendered with.
    pub viewport: (f64, f64),
    /// Time spent in the tracker for this frame. Excluded from equality.
    pub wall_ns: u64,
}

#[derive(Debug, Clone)]
pub struct TrackReport {
    pub rows: Vec<ReportRow>,
    pub template_diagonal: f64,
}

impl PartialEq for TrackReport {
    fn eq(&self, other: &Self) -> bool {
        let strip = |r: &ReportRow| ReportRow { wall_ns: 0, ..r.clone() };
        self.template_diagonal == other.template_diagonal
            && self.rows.len() == other.rows.len()
            && self.rows.iter().zip(&other.rows).all(|(a, b)| strip(a) == strip(b))
    }
}

/// Shortest angular distance in degrees.
pub fn heading_difference(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

impl TrackReport {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn in_view_frames(&self) -> usize {
        self.rows.iter().filter(|r| r.truth.center.is_some()).count()
    }

    /// True detections over frames with the target in view.
    pub fn detection_rate(&self) -> f64 {
        let in_view = self.in_view_frames();
        if in_view == 0 {
            return 0.0;
        }
        let hits = self
            .rows
            .iter()
            .filter(|r| r.truth.center.is_some() && r.record.detection.is_some() && !r.false_positive)
            .count();
        hits as f64 / in_view as f64
    }

    pub fn false_positives(&self) -> usize {
        self.rows.iter().filter(|r| r.false_positive).count()
    }

    /// Fraction of true detections whose template angle is within
    /// `tolerance` degrees of the truth heading.
    pub fn heading_agreement(&self, angle_step: f64, tolerance: f64) -> f64 {
        let (mut n, mut ok) = (0usize, 0usize);
        for r in &self.rows {
            if let (Some(d), false) = (&r.record.detection, r.false_positive) {
                n += 1;
                if heading_difference(d.template_index as f64 * angle_step, r.truth.heading) <= tolerance {
                    ok += 1;
                }
            }
        }
        if n == 0 {
            0.0
        } else {
            ok as f64 / n as f64
        }
    }

    /// Fraction of frames, with the target in view and a match on the
    /// previous frame, whose truth center lies inside the searched window.
    pub fn window_containment(&self) -> f64 {
        let (mut n, mut ok) = (0usize, 0usize);
        for w in self.rows.windows(2) {
            let (prev, cur) = (&w[0], &w[1]);
            if prev.record.detection.is_none() || prev.false_positive {
                continue;
            }
            if let Some((x, y)) = cur.truth.center {
                n += 1;
                if cur.record.window.rect.contains_point(x, y) {
                    ok += 1;
                }
            }
        }
        if n == 0 {
            1.0
        } else {
            ok as f64 / n as f64
        }
    }

    /// For each frame where the target comes back into view, the number of
    /// frames until the first true detection (`None` if never).
    pub fn reacquisition_delays(&self) -> Vec<Option<usize>> {
        let mut out = Vec::new();
        for i in 1..self.rows.len() {
            if self.rows[i - 1].truth.center.is_none() && self.rows[i].truth.center.is_some() {
                let delay = self.rows[i..]
                    .iter()
                    .position(|r| r.record.detection.is_some() && !r.false_positive && r.truth.center.is_some());
                out.push(delay);
            }
        }
        out
    }

    /// `q`-quantile of position error over true detections.
    pub fn error_quantile(&self, q: f64) -> Option<f64> {
        let mut e: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| !r.false_positive)
            .filter_map(|r| r.error)
            .collect();
        if e.is_empty() {
            return None;
        }
        e.sort_by(f64::total_cmp);
        let k = ((q * e.len() as f64).ceil() as usize).clamp(1, e.len()) - 1;
        Some(e[k])
    }

    /// Longest run of consecutive frames without a detection.
    pub fn longest_miss_run(&self) -> usize {
        longest_miss_run(self.rows.iter().map(|r| &r.record))
    }

    pub fn max_templates_evaluated(&self) -> usize {
        self.rows.iter().map(|r| r.record.templates_evaluated).max().unwrap_or(0)
    }
}

pub fn longest_miss_run<'a>(records: impl IntoIterator<Item = &'a FrameRecord>) -> usize {
    let (mut best, mut run) = (0, 0);
    for r in records {
        if r.detection.is_some() {
            run = 0;
        } else {
            run += 1;
            best = best.max(run);
        }
    }
    best
}

pub fn run_closed_loop(scenario: &Scenario, config: &TrackerConfig) -> Result<TrackReport> {
    run_closed_loop_with(scenario, config, |_, _| Ok(()))
}

/// As [`run_closed_loop`], handing every rendered frame to `on_frame`
/// before it is tracked.
pub fn run_closed_loop_with(
    scenario: &Scenario,
    config: &TrackerConfig,
    mut on_frame: impl FnMut(&Frame, &TruthRecord) -> Result<()>,
) -> Result<TrackReport> {
    config.validate()?;
    let mut renderer = Renderer::new(scenario)?;
    let feedback = config.gimbal_feedback;
    let mut viewport = (0.0, 0.0);
    let mut tracker: Option<Tracker> = None;
    let mut rows = Vec::with_capacity(scenario.frames);
    let diagonal = scenario.target_diagonal();

    for i in 0..scenario.frames {
        let (frame, truth) = renderer.render(i, viewport)?;
        on_frame(&frame, &truth)?;
        let t = match tracker.as_mut() {
            Some(t) => t,
            None => tracker.insert(Tracker::new(&frame, renderer.initial_roi(viewport), config, feedback)?),
        };
        let start = Instant::now();
        let record = t.process(&frame)?;
        let wall_ns = start.elapsed().as_nanos() as u64;

        let error = match (&record.detection, truth.center) {
            (Some(d), Some(c)) => Some(((d.position.0 - c.0).powi(2) + (d.position.1 - c.1).powi(2)).sqrt()),
            _ => None,
        };
        let false_positive = record.detection.is_some() && error.map_or(true, |e| e > 2.0 * diagonal);
        rows.push(ReportRow {
            record,
            truth,
            error,
            false_positive,
            viewport,
            wall_ns,
        });

        if feedback {
            let (rx, ry) = t.camera().rad_per_pixel();
            viewport = (t.gimbal().pan / rx, t.gimbal().tilt / ry);
        }
    }
    Ok(TrackReport {
        rows,
        template_diagonal: diagonal,
    })
}
