//! Synthetic flight scenes with ground truth, and the closed loop that
//! feeds gimbal motion back into the rendered viewport.

mod closed_loop;
pub mod presets;
mod render;
mod scenario;

pub use closed_loop::{
    heading_difference, longest_miss_run, run_closed_loop, run_closed_loop_with, ReportRow, TrackReport,
};
pub use render::{blob_sprite, Renderer, TruthRecord};
pub use scenario::{Lerp, Scenario, Schedule};

use crate::error::Result;
use crate::imaging::Frame;

/// Render every frame of `scenario` with the gimbal at rest.
pub fn render_sequence(scenario: &Scenario) -> Result<(Vec<Frame>, Vec<TruthRecord>)> {
    let mut r = Renderer::new(scenario)?;
    let mut frames = Vec::with_capacity(scenario.frames);
    let mut truth = Vec::with_capacity(scenario.frames);
    for i in 0..scenario.frames {
        let (f, t) = r.render(i, (0.0, 0.0))?;
        frames.push(f);
        truth.push(t);
    }
    Ok((frames, truth))
}
