//! Real-time single-target visual tracking.
//!
//! The pipeline correlates a budgeted subset of 36 rotated templates against
//! a search window predicted by a constant-velocity Kalman filter, and
//! drives a simulated pan/tilt gimbal to keep the target centered. A
//! synthetic scene generator with ground truth closes the loop for testing
//! and benchmarking.
//!
//! - [`imaging`]: frames, patches, rotation warping, the template bank, PGM I/O.
//! - [`matcher`]: ZMNCC (direct and running-sums), detection, template scheduling.
//! - [`estimator`]: Kalman filter and search window.
//! - [`gimbal`]: pixel error to motor counts, pan/tilt plant.
//! - [`tracker`]: the per-frame pipeline tying the above together.
//! - [`simulator`]: synthetic scenarios, rendering, closed-loop runs.
//! - [`harness`]: configuration, CSV output, CLI commands, benchmark.

pub mod error;
pub mod estimator;
pub mod gimbal;
pub mod harness;
pub mod imaging;
pub mod matcher;
pub mod simulator;
pub mod tracker;

pub use error::{Result, TrackError};
