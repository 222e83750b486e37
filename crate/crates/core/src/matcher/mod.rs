//! Zero-mean normalized cross-correlation matching against the rotated
//! template bank, with a per-frame template budget.

mod detect;
mod zmncc;

pub use detect::{
    detect, schedule_order, DetectOutcome, Detection, SchedulerState, DEFAULT_THRESHOLD,
    TEMPLATE_BUDGET,
};
pub use zmncc::{
    zmncc_fast, zmncc_oracle, zmncc_prepared, CorrelationMap, PreparedTemplate,
    DEGENERATE_ENERGY_PER_PIXEL,
};
