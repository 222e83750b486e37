//! Pixel error to motor counts, and a rate- and range-limited pan/tilt plant.
//!
//! Angles use a small-angle linear camera model: one pixel spans
//! `hfov / width` radians horizontally and `vfov / height` vertically. A
//! positive pan moves the view right and a positive tilt moves it down, so
//! a target right of center is centered by a positive pan command.

use crate::matcher::Detection;

/// Radians per motor count.
pub const DEFAULT_COUNT_RESOLUTION: f64 = 1e-4;
/// Half of the 30 degree pan/tilt travel.
pub const DEFAULT_LIMIT_RAD: f64 = 0.261_799_387_799_149_4;
pub const DEFAULT_MAX_RATE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraModel {
    pub hfov: f64,
    pub vfov: f64,
    pub width: usize,
    pub height: usize,
}

impl CameraModel {
    pub fn new(hfov: f64, vfov: f64, width: usize, height: usize) -> Self {
        Self {
            hfov,
            vfov,
            width,
            height,
        }
    }

    /// Radians per pixel along x and y.
    pub fn rad_per_pixel(&self) -> (f64, f64) {
        (self.hfov / self.width as f64, self.vfov / self.height as f64)
    }

    pub fn center(&self) -> (f64, f64) {
        (
            (self.width as f64 - 1.0) / 2.0,
            (self.height as f64 - 1.0) / 2.0,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GimbalState {
    pub pan: f64,
    pub tilt: f64,
    pub pan_limits: (f64, f64),
    pub tilt_limits: (f64, f64),
    pub max_rate: f64,
    pub count_resolution: f64,
    /// Set when the last step was cut short by the rate or range limit.
    pub saturated: bool,
}

impl Default for GimbalState {
    fn default() -> Self {
        Self {
            pan: 0.0,
            tilt: 0.0,
            pan_limits: (-DEFAULT_LIMIT_RAD, DEFAULT_LIMIT_RAD),
            tilt_limits: (-DEFAULT_LIMIT_RAD, DEFAULT_LIMIT_RAD),
            max_rate: DEFAULT_MAX_RATE,
            count_resolution: DEFAULT_COUNT_RESOLUTION,
            saturated: false,
        }
    }
}

/// Motor counts for a pixel offset.
pub fn pixel_error_to_counts(err: (f64, f64), cam: &CameraModel, g: &GimbalState) -> (i64, i64) {
    let (rx, ry) = cam.rad_per_pixel();
    (
        (err.0 * rx / g.count_resolution).round() as i64,
        (err.1 * ry / g.count_resolution).round() as i64,
    )
}

fn limited(angle: f64, command: f64, max_step: f64, limits: (f64, f64)) -> (f64, bool) {
    let step = command.clamp(-max_step, max_step);
    let target = (angle + step).clamp(limits.0, limits.1);
    let saturated = step != command || target != angle + step;
    (target, saturated)
}

/// Apply a relative command in counts over `dt` seconds.
pub fn step_gimbal(g: &GimbalState, counts: (i64, i64), dt: f64) -> GimbalState {
    let max_step = g.max_rate * dt.max(0.0);
    let (pan, sp) = limited(g.pan, counts.0 as f64 * g.count_resolution, max_step, g.pan_limits);
    let (tilt, st) = limited(g.tilt, counts.1 as f64 * g.count_resolution, max_step, g.tilt_limits);
    if sp || st {
        log::debug!(
            "gimbal saturated: command ({}, {}) counts at pan {:.5} tilt {:.5}",
            counts.0,
            counts.1,
            g.pan,
            g.tilt
        );
    }
    GimbalState {
        pan,
        tilt,
        saturated: sp || st,
        ..*g
    }
}

/// One centering update. Returns the new state and the counts commanded
/// (zero when there is no detection and the gimbal holds).
pub fn centering_step(
    detection: Option<&Detection>,
    frame_center: (f64, f64),
    cam: &CameraModel,
    g: &GimbalState,
    dt: f64,
) -> (GimbalState, (i64, i64)) {
    match detection {
        Some(d) => {
            let err = (d.position.0 - frame_center.0, d.position.1 - frame_center.1);
            let counts = pixel_error_to_counts(err, cam, g);
            (step_gimbal(g, counts, dt), counts)
        }
        None => (
            GimbalState {
                saturated: false,
                ..*g
            },
            (0, 0),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cam() -> CameraModel {
        CameraModel::new(0.64, 0.48, 640, 480) // 1 mrad per pixel
    }

    fn det(x: f64, y: f64) -> Detection {
        Detection {
            position: (x, y),
            score: 0.95,
            template_index: 0,
            frame_index: 0,
        }
    }

    #[test]
    fn zero_error_zero_counts() {
        assert_eq!(pixel_error_to_counts((0.0, 0.0), &cam(), &GimbalState::default()), (0, 0));
    }

    #[test]
    fn ten_milliradians_is_100_counts() {
        // 10 px at 1 mrad/px.
        assert_eq!(pixel_error_to_counts((10.0, -10.0), &cam(), &GimbalState::default()), (100, -100));
    }

    #[test]
    fn random_errors_match_scalar_arithmetic() {
        let c = cam();
        let g = GimbalState::default();
        for k in 0..200 {
            let e = ((k as f64 * 0.731).sin() * 300.0, (k as f64 * 1.37).cos() * 200.0);
            let expect = (
                (e.0 * (0.64 / 640.0) / 1e-4).round() as i64,
                (e.1 * (0.48 / 480.0) / 1e-4).round() as i64,
            );
            assert_eq!(pixel_error_to_counts(e, &c, &g), expect);
        }
    }

    #[test]
    fn small_command_moves_exactly() {
        let g = step_gimbal(&GimbalState::default(), (100, -50), 0.04);
        assert!((g.pan - 0.01).abs() < 1e-15 && (g.tilt + 0.005).abs() < 1e-15);
        assert!(!g.saturated);
    }

    #[test]
    fn rate_limit_caps_motion() {
        let g = step_gimbal(&GimbalState::default(), (100_000, 0), 0.01);
        assert!((g.pan - 0.02).abs() < 1e-15);
        assert!(g.saturated);
    }

    #[test]
    fn range_limit_holds_at_edge() {
        let mut g = GimbalState::default();
        g.pan = g.pan_limits.1;
        let next = step_gimbal(&g, (10, 0), 0.1);
        assert_eq!(next.pan, g.pan_limits.1);
        assert!(next.saturated);
    }

    #[test]
    fn centered_detection_and_misses_hold() {
        let c = cam();
        let g = GimbalState::default();
        let (same, counts) = centering_step(Some(&det(319.5, 239.5)), c.center(), &c, &g, 0.04);
        assert_eq!((same.pan, same.tilt, counts), (g.pan, g.tilt, (0, 0)));
        let (held, _) = centering_step(None, c.center(), &c, &g, 0.04);
        assert_eq!((held.pan, held.tilt), (g.pan, g.tilt));
    }

    #[test]
    fn sub_half_count_errors_do_not_move() {
        let c = cam();
        // 0.04 px = 0.4 counts.
        let (g, counts) = centering_step(Some(&det(319.54, 239.5)), c.center(), &c, &GimbalState::default(), 0.04);
        assert_eq!(counts, (0, 0));
        assert_eq!(g.pan, 0.0);
    }

    proptest! {
        #[test]
        fn limits_never_exceeded(cmds in proptest::collection::vec((-50_000i64..50_000, -50_000i64..50_000, 0.001f64..0.5), 1..200)) {
            let mut g = GimbalState::default();
            for (p, t, dt) in cmds {
                g = step_gimbal(&g, (p, t), dt);
                prop_assert!(g.pan >= g.pan_limits.0 && g.pan <= g.pan_limits.1);
                prop_assert!(g.tilt >= g.tilt_limits.0 && g.tilt <= g.tilt_limits.1);
            }
        }
    }
}
