//! C interface to the tracker.
//!
//! Handles are opaque pointers owned by the caller and released with the
//! matching `*_free` function. Every fallible call returns a [`UtStatus`];
//! on failure a description is available from [`ut_last_error`] on the same
//! thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use uavtrack::harness::TrackerConfig;
use uavtrack::imaging::{Frame, ImageView, Patch, Rect};
use uavtrack::matcher::zmncc_oracle;
use uavtrack::tracker::Tracker;
use uavtrack::TrackError;

/// Result of an FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    OutOfBounds = 4,
    NonDiscriminativeTemplate = 5,
    UndefinedScore = 6,
    InvalidTimestep = 7,
    InvalidConfig = 8,
    Parse = 9,
    Io = 10,
    Internal = 11,
}

impl From<&TrackError> for UtStatus {
    fn from(e: &TrackError) -> Self {
        match e {
            TrackError::DimensionMismatch(_) => UtStatus::DimensionMismatch,
            TrackError::IntensityOutOfRange { .. } => UtStatus::InvalidArgument,
            TrackError::OutOfBounds { .. } | TrackError::WindowTooSmall { .. } => UtStatus::OutOfBounds,
            TrackError::NonDiscriminativeTemplate => UtStatus::NonDiscriminativeTemplate,
            TrackError::UndefinedScore => UtStatus::UndefinedScore,
            TrackError::InvalidTimestep(_) => UtStatus::InvalidTimestep,
            TrackError::InvalidConfig(_) | TrackError::InvalidScenario(_) => UtStatus::InvalidConfig,
            TrackError::Parse { .. } | TrackError::Pgm(_) => UtStatus::Parse,
            TrackError::EmptySequence(_) | TrackError::Io { .. } => UtStatus::Io,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: UtStatus, message: impl Into<String>) -> UtStatus {
    set_error(message.into());
    status
}

fn from_error(e: TrackError) -> UtStatus {
    let status = UtStatus::from(&e);
    fail(status, e.to_string())
}

/// Run `f`, turning panics into [`UtStatus::Internal`].
fn guard(f: impl FnOnce() -> UtStatus) -> UtStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(UtStatus::Internal, "internal panic"))
}

/// Message for the last failing call on this thread, or null. The pointer is
/// valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn ut_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ut_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Opaque tracker configuration.
pub struct UtConfig {
    inner: TrackerConfig,
}

/// Opaque tracker.
pub struct UtTracker {
    inner: Tracker,
    frames: u64,
}

/// Per-frame tracker output. Detection fields are meaningful only when
/// `detected` is non-zero; `template_index` is -1 otherwise.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UtFrameResult {
    pub frame_index: u64,
    pub detected: u8,
    pub x: f64,
    pub y: f64,
    pub score: f64,
    pub template_index: i32,
    /// Searched window, half-open `[x0, x1) x [y0, y1)`.
    pub win_x0: i64,
    pub win_y0: i64,
    pub win_x1: i64,
    pub win_y1: i64,
    pub templates_evaluated: u32,
    pub pan_counts: i64,
    pub tilt_counts: i64,
    pub pan_rad: f64,
    pub tilt_rad: f64,
    pub saturated: u8,
}

/// New configuration with default values.
#[no_mangle]
pub extern "C" fn ut_config_default() -> *mut UtConfig {
    Box::into_raw(Box::new(UtConfig {
        inner: TrackerConfig::default(),
    }))
}

/// Parse `key = value` configuration text into `*out`.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ut_config_parse(text: *const c_char, out: *mut *mut UtConfig) -> UtStatus {
    guard(|| {
        if text.is_null() || out.is_null() {
            return fail(UtStatus::NullPointer, "null argument");
        }
        let Ok(text) = CStr::from_ptr(text).to_str() else {
            return fail(UtStatus::InvalidArgument, "configuration is not UTF-8");
        };
        match TrackerConfig::parse(text, "<ffi>").and_then(|c| c.validate().map(|_| c)) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(UtConfig { inner }));
                UtStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `config` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ut_config_free(config: *mut UtConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

unsafe fn frame_from_raw(pixels: *const u8, width: usize, height: usize, timestamp: f64, index: u64) -> Result<Frame, UtStatus> {
    if pixels.is_null() {
        return Err(fail(UtStatus::NullPointer, "null pixel buffer"));
    }
    let n = width
        .checked_mul(height)
        .filter(|&n| n > 0)
        .ok_or_else(|| fail(UtStatus::InvalidArgument, format!("bad frame size {width}x{height}")))?;
    let data = std::slice::from_raw_parts(pixels, n);
    Frame::from_u8(width, height, data, timestamp, index).map_err(from_error)
}

/// Build a tracker from the `roi` of an 8-bit row-major first frame. The
/// frame is not processed; pass it to [`ut_tracker_process`] as well.
///
/// # Safety
/// `pixels` must hold `width * height` bytes; `config` may be null for
/// defaults; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ut_tracker_new(
    config: *const UtConfig,
    pixels: *const u8,
    width: usize,
    height: usize,
    roi_x: i64,
    roi_y: i64,
    roi_width: usize,
    roi_height: usize,
    out: *mut *mut UtTracker,
) -> UtStatus {
    guard(|| {
        if out.is_null() {
            return fail(UtStatus::NullPointer, "null output pointer");
        }
        let cfg = if config.is_null() {
            TrackerConfig::default()
        } else {
            (*config).inner.clone()
        };
        let frame = match frame_from_raw(pixels, width, height, 0.0, 0) {
            Ok(f) => f,
            Err(s) => return s,
        };
        match Tracker::new(&frame, Rect::new(roi_x, roi_y, roi_width, roi_height), &cfg, false) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(UtTracker { inner, frames: 0 }));
                UtStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Track one 8-bit frame taken at `timestamp` seconds. Timestamps must
/// increase from call to call.
///
/// # Safety
/// `tracker` must come from [`ut_tracker_new`]; `pixels` must hold
/// `width * height` bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ut_tracker_process(
    tracker: *mut UtTracker,
    pixels: *const u8,
    width: usize,
    height: usize,
    timestamp: f64,
    out: *mut UtFrameResult,
) -> UtStatus {
    guard(|| {
        if tracker.is_null() || out.is_null() {
            return fail(UtStatus::NullPointer, "null argument");
        }
        let t = &mut *tracker;
        let frame = match frame_from_raw(pixels, width, height, timestamp, t.frames) {
            Ok(f) => f,
            Err(s) => return s,
        };
        let rec = match t.inner.process(&frame) {
            Ok(r) => r,
            Err(e) => return from_error(e),
        };
        t.frames += 1;
        let w = rec.window.rect;
        let d = rec.detection;
        *out = UtFrameResult {
            frame_index: rec.frame_index,
            detected: u8::from(d.is_some()),
            x: d.map_or(0.0, |d| d.position.0),
            y: d.map_or(0.0, |d| d.position.1),
            score: d.map_or(0.0, |d| d.score),
            template_index: d.map_or(-1, |d| d.template_index as i32),
            win_x0: w.x,
            win_y0: w.y,
            win_x1: w.right(),
            win_y1: w.bottom(),
            templates_evaluated: rec.templates_evaluated as u32,
            pan_counts: rec.counts.0,
            tilt_counts: rec.counts.1,
            pan_rad: rec.gimbal.pan,
            tilt_rad: rec.gimbal.tilt,
            saturated: u8::from(rec.gimbal.saturated),
        };
        UtStatus::Ok
    })
}

/// # Safety
/// `tracker` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ut_tracker_free(tracker: *mut UtTracker) {
    if !tracker.is_null() {
        drop(Box::from_raw(tracker));
    }
}

/// ZMNCC of a `template_width x template_height` template against the
/// region of `image` with top-left corner `(u, v)`. Buffers are row-major
/// doubles in `[0, 255]`.
///
/// # Safety
/// `image` and `template` must hold the stated number of values; `out` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn ut_zmncc(
    image: *const f64,
    image_width: usize,
    image_height: usize,
    template: *const f64,
    template_width: usize,
    template_height: usize,
    u: usize,
    v: usize,
    out: *mut f64,
) -> UtStatus {
    guard(|| {
        if image.is_null() || template.is_null() || out.is_null() {
            return fail(UtStatus::NullPointer, "null argument");
        }
        let (Some(ni), Some(nt)) = (
            image_width.checked_mul(image_height),
            template_width.checked_mul(template_height),
        ) else {
            return fail(UtStatus::InvalidArgument, "size overflow");
        };
        let img = std::slice::from_raw_parts(image, ni);
        let view = match ImageView::new(image_width, image_height, img) {
            Ok(v) => v,
            Err(e) => return from_error(e),
        };
        let tpl = std::slice::from_raw_parts(template, nt).to_vec();
        let patch = match Patch::new(template_width, template_height, tpl, (0, 0)) {
            Ok(p) => p,
            Err(e) => return from_error(e),
        };
        match zmncc_oracle(&view, &patch, (u, v)) {
            Ok(s) => {
                *out = s;
                UtStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}
