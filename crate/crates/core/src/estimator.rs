//! Constant-velocity Kalman filter over image position and the search window
//! derived from its covariance.
//!
//! State is `[px, py, vx, vy]` in pixels and pixels per second. The process
//! and measurement models are linear, so the extended filter's Jacobians are
//! the transition and selection matrices themselves.

use nalgebra::{Matrix2, Matrix2x4, Matrix4, Matrix4x2, Vector2, Vector4};

use crate::error::{Result, TrackError};
use crate::imaging::Rect;
use crate::matcher::Detection;

/// Default process-noise intensity applied to every state component.
pub const DEFAULT_SIGMA: f64 = 0.4;

/// Default initial covariance diagonal: 2 px position and 5 px/s velocity std.
pub const DEFAULT_P0_DIAG: [f64; 4] = [4.0, 4.0, 25.0, 25.0];

/// Search half-extent in position standard deviations.
pub const WINDOW_SIGMAS: f64 = 3.0;

/// Transition, process noise, measurement selection and measurement noise
/// for one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    /// Process Jacobian.
    pub a: Matrix4<f64>,
    /// Process noise covariance.
    pub q: Matrix4<f64>,
    /// Measurement Jacobian.
    pub h: Matrix2x4<f64>,
    /// Measurement noise covariance (one pixel per axis).
    pub r: Matrix2<f64>,
}

/// Noise model for a step of `dt` seconds with equal intensity `sigma` on all
/// four state components.
///
/// Position variance gets `dt*s + dt^3*s/3`, velocity variance `dt*s`, and
/// the position/velocity cross terms `dt^2*s/2`.
pub fn build_noise(dt: f64, sigma: f64) -> Result<NoiseModel> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(TrackError::InvalidTimestep(format!("dt must be positive, got {dt}")));
    }
    let s = [sigma; 4];
    let a_i = |i: usize| dt * s[i] + (1.0 / 3.0) * dt.powi(3) * s[i + 2];
    let b_i = |i: usize| 0.5 * dt.powi(2) * s[i];

    let mut a = Matrix4::identity();
    a[(0, 2)] = dt;
    a[(1, 3)] = dt;

    let mut q = Matrix4::zeros();
    q[(0, 0)] = a_i(0);
    q[(1, 1)] = a_i(1);
    q[(2, 2)] = dt * s[2];
    q[(3, 3)] = dt * s[3];
    q[(0, 2)] = b_i(2);
    q[(2, 0)] = b_i(2);
    q[(1, 3)] = b_i(3);
    q[(3, 1)] = b_i(3);

    let mut h = Matrix2x4::zeros();
    h[(0, 0)] = 1.0;
    h[(1, 1)] = 1.0;

    Ok(NoiseModel {
        a,
        q,
        h,
        r: Matrix2::identity(),
    })
}

/// Filter state of one tracked object.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackState {
    pub x: Vector4<f64>,
    pub p: Matrix4<f64>,
    pub sigma: f64,
    pub last_time: f64,
    pub initialized: bool,
}

impl TrackState {
    /// Start a track at a full-frame detection with zero velocity.
    pub fn init(detection: &Detection, t0: f64, sigma: f64, p0: Matrix4<f64>) -> Self {
        Self {
            x: Vector4::new(detection.position.0, detection.position.1, 0.0, 0.0),
            p: p0,
            sigma,
            last_time: t0,
            initialized: true,
        }
    }

    pub fn default_p0() -> Matrix4<f64> {
        Matrix4::from_diagonal(&Vector4::from(DEFAULT_P0_DIAG))
    }

    pub fn position(&self) -> (f64, f64) {
        (self.x[0], self.x[1])
    }

    pub fn velocity(&self) -> (f64, f64) {
        (self.x[2], self.x[3])
    }

    pub fn position_variance(&self) -> (f64, f64) {
        (self.p[(0, 0)], self.p[(1, 1)])
    }

    /// Propagate to time `t` under constant velocity: `x = A x`,
    /// `P = A P A^T + Q`.
    pub fn predict(&self, t: f64) -> Result<Self> {
        if !self.initialized {
            return Err(TrackError::InvalidTimestep("track is not initialized".into()));
        }
        if !(t > self.last_time) {
            return Err(TrackError::InvalidTimestep(format!(
                "timestamp {t} does not advance past {}",
                self.last_time
            )));
        }
        let model = build_noise(t - self.last_time, self.sigma)?;
        let p = model.a * self.p * model.a.transpose() + model.q;
        Ok(Self {
            x: model.a * self.x,
            p: symmetrize(p),
            last_time: t,
            ..self.clone()
        })
    }

    /// Fold in a position measurement with unit measurement noise.
    pub fn correct(&self, z: (f64, f64)) -> Self {
        let h = {
            let mut h = Matrix2x4::zeros();
            h[(0, 0)] = 1.0;
            h[(1, 1)] = 1.0;
            h
        };
        let r = Matrix2::<f64>::identity();
        let s = h * self.p * h.transpose() + r;
        // S = HPH^T + I is at least the identity, so the inverse always exists.
        let s_inv = s.try_inverse().expect("innovation covariance is positive definite");
        let k: Matrix4x2<f64> = self.p * h.transpose() * s_inv;
        let innovation = Vector2::new(z.0, z.1) - h * self.x;
        let p = (Matrix4::identity() - k * h) * self.p;
        Self {
            x: self.x + k * innovation,
            p: symmetrize(p),
            ..self.clone()
        }
    }

    /// A frame without a detection: predict and skip the correction, so the
    /// covariance keeps growing.
    pub fn miss(&self, t: f64) -> Result<Self> {
        self.predict(t)
    }

    /// Shift the position estimate by a known image-space offset, e.g. the
    /// viewport motion caused by the gimbal.
    pub fn translate(&mut self, dx: f64, dy: f64) {
        self.x[0] += dx;
        self.x[1] += dy;
    }

    /// Search window around the current position estimate for a template
    /// canvas of `canvas` pixels inside a `frame` sized image.
    pub fn search_window(&self, canvas: (usize, usize), frame: (usize, usize)) -> SearchWindow {
        let (vx, vy) = self.position_variance();
        SearchWindow::around(
            self.position(),
            (
                WINDOW_SIGMAS * vx.max(0.0).sqrt() + canvas.0 as f64 / 2.0,
                WINDOW_SIGMAS * vy.max(0.0).sqrt() + canvas.1 as f64 / 2.0,
            ),
            canvas,
            frame,
        )
    }
}

fn symmetrize(p: Matrix4<f64>) -> Matrix4<f64> {
    (p + p.transpose()) * 0.5
}

/// Region of the frame searched for the template.
///
/// `half_width` and `half_height` are the unclamped extents (3 sigma plus
/// half the template canvas); `rect` is the integer pixel region actually
/// searched after clamping to the frame and padding up to the canvas size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchWindow {
    pub center: (f64, f64),
    pub half_width: f64,
    pub half_height: f64,
    pub clamped: bool,
    pub rect: Rect,
}

impl SearchWindow {
    /// The whole frame, used before the track is initialized.
    pub fn full_frame(width: usize, height: usize) -> Self {
        Self {
            center: ((width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0),
            half_width: width as f64 / 2.0,
            half_height: height as f64 / 2.0,
            clamped: false,
            rect: Rect::new(0, 0, width, height),
        }
    }

    pub fn around(
        center: (f64, f64),
        half: (f64, f64),
        canvas: (usize, usize),
        frame: (usize, usize),
    ) -> Self {
        let (x, w, cx) = clamp_span(center.0, half.0, canvas.0, frame.0);
        let (y, h, cy) = clamp_span(center.1, half.1, canvas.1, frame.1);
        Self {
            center,
            half_width: half.0,
            half_height: half.1,
            clamped: cx || cy,
            rect: Rect::new(x, y, w, h),
        }
    }

    pub fn is_full_frame(&self, width: usize, height: usize) -> bool {
        self.rect == Rect::new(0, 0, width, height)
    }
}

/// One axis of the window: `[floor(c - half), ceil(c + half))` clamped to
/// `[0, limit)` and widened to at least `min_len` when the frame allows.
fn clamp_span(center: f64, half: f64, min_len: usize, limit: usize) -> (i64, usize, bool) {
    let limit_i = limit as i64;
    let raw_lo = (center - half).floor() as i64;
    let raw_hi = (center + half).ceil() as i64;
    let mut lo = raw_lo.clamp(0, limit_i);
    let mut hi = raw_hi.clamp(0, limit_i);
    let need = min_len.min(limit) as i64;
    if hi - lo < need {
        let start = (center.round() as i64 - need / 2).clamp(0, limit_i - need);
        lo = lo.min(start).max(0);
        if hi - lo < need {
            hi = lo + need;
        }
        if hi > limit_i {
            hi = limit_i;
            lo = limit_i - need;
        }
    }
    let clamped = lo != raw_lo || hi != raw_hi;
    (lo, (hi - lo) as usize, clamped)
}
