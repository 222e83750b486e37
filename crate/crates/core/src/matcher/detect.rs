use super::zmncc::{zmncc_prepared, PreparedTemplate};
use crate::error::Result;
use crate::estimator::SearchWindow;
use crate::imaging::{Frame, TemplateBank, BANK_SIZE};

/// Default correlation threshold for a true match.
pub const DEFAULT_THRESHOLD: f64 = 0.9;

/// Most templates correlated against a single frame.
pub const TEMPLATE_BUDGET: usize = 7;

/// How far before the last matched template the next frame starts.
const LOOKBACK: usize = 2;

/// A located target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    /// Object center in frame pixels (centroid of matching placements,
    /// shifted to the template center).
    pub position: (f64, f64),
    /// Best score in the matching template's map.
    pub score: f64,
    pub template_index: usize,
    pub frame_index: u64,
}

/// Which rotated templates to try on the next frame.
///
/// After a match at template `k` the next frame tries `k-2 ..= k+4`. After a
/// frame with no match it starts one template later than that frame did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchedulerState {
    pub last_matched_index: Option<usize>,
    pub fallback_start_index: usize,
}

impl Default for SchedulerState {
    fn default() -> Self {
        Self::new()
    }
}

impl SchedulerState {
    pub fn new() -> Self {
        Self {
            last_matched_index: None,
            fallback_start_index: 0,
        }
    }

    pub fn budget(&self) -> usize {
        TEMPLATE_BUDGET
    }

    fn start(&self) -> usize {
        match self.last_matched_index {
            Some(k) => (k + BANK_SIZE - LOOKBACK) % BANK_SIZE,
            None => self.fallback_start_index % BANK_SIZE,
        }
    }

    fn record_miss(&mut self) {
        self.fallback_start_index = (self.start() + 1) % BANK_SIZE;
        self.last_matched_index = None;
    }

    fn record_match(&mut self, index: usize) {
        self.last_matched_index = Some(index % BANK_SIZE);
    }
}

/// Template indices to evaluate this frame, in order.
pub fn schedule_order(sched: &SchedulerState) -> Vec<usize> {
    let start = sched.start();
    (0..TEMPLATE_BUDGET).map(|i| (start + i) % BANK_SIZE).collect()
}

/// Result of matching one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectOutcome {
    pub detection: Option<Detection>,
    /// Correlation maps computed for this frame; never above the budget.
    pub templates_evaluated: usize,
}

/// Try the scheduled templates in order and stop at the first whose map has
/// any score at or above `threshold`. The whole map of that template is used
/// to localize the target.
pub fn detect(
    frame: &Frame,
    bank: &TemplateBank,
    sched: &mut SchedulerState,
    window: &SearchWindow,
    threshold: f64,
) -> Result<DetectOutcome> {
    let order = schedule_order(sched);
    let mut evaluated = 0;
    for &k in &order {
        let prepared = PreparedTemplate::new(bank.template(k));
        let map = zmncc_prepared(frame, &prepared, window)?;
        evaluated += 1;
        let hits: Vec<((usize, usize), f64)> = map.above(threshold).collect();
        if hits.is_empty() {
            continue;
        }
        let (cu, cv) = localize(&hits, 2.0 * bank.source_diagonal());
        let (ox, oy) = bank.center_offset();
        let score = hits.iter().map(|&(_, s)| s).fold(f64::NEG_INFINITY, f64::max);
        sched.record_match(k);
        return Ok(DetectOutcome {
            detection: Some(Detection {
                position: (cu.round() + ox, cv.round() + oy),
                score,
                template_index: k,
                frame_index: frame.frame_index,
            }),
            templates_evaluated: evaluated,
        });
    }
    sched.record_miss();
    Ok(DetectOutcome {
        detection: None,
        templates_evaluated: evaluated,
    })
}

/// Unweighted centroid of the matching placements. When they spread wider
/// than `radius` from that centroid, only the group within `radius` of the
/// best-scoring placement is kept.
fn localize(hits: &[((usize, usize), f64)], radius: f64) -> (f64, f64) {
    let centroid = |pts: &mut dyn Iterator<Item = (usize, usize)>| {
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
        for (x, y) in pts {
            sx += x as f64;
            sy += y as f64;
            n += 1;
        }
        (sx / n as f64, sy / n as f64)
    };
    let all = centroid(&mut hits.iter().map(|&(p, _)| p));
    let far = |c: (f64, f64), p: (usize, usize)| {
        let (dx, dy) = (p.0 as f64 - c.0, p.1 as f64 - c.1);
        dx * dx + dy * dy > radius * radius
    };
    if !hits.iter().any(|&(p, _)| far(all, p)) {
        return all;
    }
    let best = hits
        .iter()
        .fold(hits[0], |b, &h| if h.1 > b.1 { h } else { b })
        .0;
    let best_c = (best.0 as f64, best.1 as f64);
    centroid(&mut hits.iter().map(|&(p, _)| p).filter(|&p| !far(best_c, p)))
}
