//! Line-oriented `key = value` tracker configuration with `#` comments.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Matrix4, Vector4};

use crate::error::{Result, TrackError};
use crate::estimator::{DEFAULT_P0_DIAG, DEFAULT_SIGMA};
use crate::gimbal::{
    GimbalState, DEFAULT_COUNT_RESOLUTION, DEFAULT_LIMIT_RAD, DEFAULT_MAX_RATE,
};
use crate::imaging::BANK_SIZE;
use crate::matcher::{DEFAULT_THRESHOLD, TEMPLATE_BUDGET};

/// Environment variable naming a config file when `--config` is omitted.
pub const CONFIG_ENV: &str = "UAVTRACK_CONFIG";

#[derive(Debug, Clone, PartialEq)]
pub struct TrackerConfig {
    pub zmncc_threshold: f64,
    pub sigma: f64,
    pub template_budget: usize,
    pub bank_size: usize,
    /// Horizontal field of view, radians.
    pub camera_hfov: f64,
    /// Vertical field of view, radians.
    pub camera_vfov: f64,
    pub pan_limit: f64,
    pub tilt_limit: f64,
    pub max_rate: f64,
    pub count_resolution: f64,
    /// Frame rate assumed when a sequence has no timestamps.
    pub fps: f64,
    pub p0_diag: [f64; 4],
    /// Longest tolerated run of consecutive missed frames before a run is
    /// reported as degraded (exit code 1).
    pub max_miss_run: usize,
    /// Whether the simulated gimbal moves the simulator's viewport.
    pub gimbal_feedback: bool,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            zmncc_threshold: DEFAULT_THRESHOLD,
            sigma: DEFAULT_SIGMA,
            template_budget: TEMPLATE_BUDGET,
            bank_size: BANK_SIZE,
            camera_hfov: 40f64.to_radians(),
            camera_vfov: 30f64.to_radians(),
            pan_limit: DEFAULT_LIMIT_RAD,
            tilt_limit: DEFAULT_LIMIT_RAD,
            max_rate: DEFAULT_MAX_RATE,
            count_resolution: DEFAULT_COUNT_RESOLUTION,
            fps: 30.0,
            p0_diag: DEFAULT_P0_DIAG,
            max_miss_run: 60,
            gimbal_feedback: true,
        }
    }
}

fn bad(path: &str, line: usize, message: impl Into<String>) -> TrackError {
    TrackError::Parse {
        path: path.to_string(),
        line,
        message: message.into(),
    }
}

fn parse_f64(path: &str, line: usize, key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .parse()
        .map_err(|_| bad(path, line, format!("{key}: expected a number, got {v:?}")))?;
    if !x.is_finite() {
        return Err(bad(path, line, format!("{key}: value must be finite")));
    }
    Ok(x)
}

fn parse_usize(path: &str, line: usize, key: &str, v: &str) -> Result<usize> {
    v.parse()
        .map_err(|_| bad(path, line, format!("{key}: expected a non-negative integer, got {v:?}")))
}

fn parse_bool(path: &str, line: usize, key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(bad(path, line, format!("{key}: expected true or false, got {v:?}"))),
    }
}

/// Split `key = value` lines, dropping comments and blanks. Yields
/// `(line_number, key, value)`.
pub(crate) fn key_values<'a>(
    text: &'a str,
    origin: &'a str,
) -> impl Iterator<Item = Result<(usize, &'a str, &'a str)>> + 'a {
    text.lines().enumerate().filter_map(move |(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            return None;
        }
        Some(match line.split_once('=') {
            Some((k, v)) => Ok((i + 1, k.trim(), v.trim())),
            None => Err(bad(origin, i + 1, format!("expected key = value, got {line:?}"))),
        })
    })
}

impl TrackerConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut c = Self::default();
        for item in key_values(text, origin) {
            let (ln, key, v) = item?;
            match key {
                "zmncc_threshold" => c.zmncc_threshold = parse_f64(origin, ln, key, v)?,
                "sigma" => c.sigma = parse_f64(origin, ln, key, v)?,
                "template_budget" => c.template_budget = parse_usize(origin, ln, key, v)?,
                "bank_size" => c.bank_size = parse_usize(origin, ln, key, v)?,
                "camera_hfov" => c.camera_hfov = parse_f64(origin, ln, key, v)?,
                "camera_vfov" => c.camera_vfov = parse_f64(origin, ln, key, v)?,
                "pan_limit" => c.pan_limit = parse_f64(origin, ln, key, v)?,
                "tilt_limit" => c.tilt_limit = parse_f64(origin, ln, key, v)?,
                "max_rate" => c.max_rate = parse_f64(origin, ln, key, v)?,
                "count_resolution" => c.count_resolution = parse_f64(origin, ln, key, v)?,
                "fps" => c.fps = parse_f64(origin, ln, key, v)?,
                "p0_diag" => {
                    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
                    if parts.len() != 4 {
                        return Err(bad(origin, ln, "p0_diag: expected four comma-separated numbers"));
                    }
                    for (slot, p) in c.p0_diag.iter_mut().zip(parts) {
                        *slot = parse_f64(origin, ln, key, p)?;
                    }
                }
                "max_miss_run" => c.max_miss_run = parse_usize(origin, ln, key, v)?,
                "gimbal_feedback" => c.gimbal_feedback = parse_bool(origin, ln, key, v)?,
                _ => return Err(bad(origin, ln, format!("unknown key {key:?}"))),
            }
        }
        c.validate().map_err(|e| match e {
            TrackError::InvalidConfig(m) => TrackError::InvalidConfig(format!("{origin}: {m}")),
            other => other,
        })?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| TrackError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(TrackError::InvalidConfig(m));
        if !(self.zmncc_threshold > 0.0 && self.zmncc_threshold <= 1.0) {
            return fail(format!("zmncc_threshold must be in (0, 1], got {}", self.zmncc_threshold));
        }
        if self.sigma < 0.0 {
            return fail(format!("sigma must be non-negative, got {}", self.sigma));
        }
        if self.template_budget != TEMPLATE_BUDGET {
            return fail(format!("template_budget is fixed at {TEMPLATE_BUDGET}"));
        }
        if self.bank_size != BANK_SIZE {
            return fail(format!("bank_size is fixed at {BANK_SIZE}"));
        }
        for (name, v) in [
            ("camera_hfov", self.camera_hfov),
            ("camera_vfov", self.camera_vfov),
            ("pan_limit", self.pan_limit),
            ("tilt_limit", self.tilt_limit),
            ("max_rate", self.max_rate),
            ("count_resolution", self.count_resolution),
            ("fps", self.fps),
        ] {
            if !(v > 0.0) {
                return fail(format!("{name} must be positive, got {v}"));
            }
        }
        if self.p0_diag.iter().any(|&v| v < 0.0) {
            return fail("p0_diag entries must be non-negative".into());
        }
        Ok(())
    }

    /// Canonical text form; `parse(serialize(c)) == c`.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let p = self.p0_diag;
        // Display for f64 prints the shortest string that round-trips.
        let _ = writeln!(s, "zmncc_threshold = {}", self.zmncc_threshold);
        let _ = writeln!(s, "sigma = {}", self.sigma);
        let _ = writeln!(s, "template_budget = {}", self.template_budget);
        let _ = writeln!(s, "bank_size = {}", self.bank_size);
        let _ = writeln!(s, "camera_hfov = {}", self.camera_hfov);
        let _ = writeln!(s, "camera_vfov = {}", self.camera_vfov);
        let _ = writeln!(s, "pan_limit = {}", self.pan_limit);
        let _ = writeln!(s, "tilt_limit = {}", self.tilt_limit);
        let _ = writeln!(s, "max_rate = {}", self.max_rate);
        let _ = writeln!(s, "count_resolution = {}", self.count_resolution);
        let _ = writeln!(s, "fps = {}", self.fps);
        let _ = writeln!(s, "p0_diag = {},{},{},{}", p[0], p[1], p[2], p[3]);
        let _ = writeln!(s, "max_miss_run = {}", self.max_miss_run);
        let _ = writeln!(s, "gimbal_feedback = {}", self.gimbal_feedback);
        s
    }

    pub fn p0(&self) -> Matrix4<f64> {
        Matrix4::from_diagonal(&Vector4::from(self.p0_diag))
    }

    pub fn gimbal(&self) -> GimbalState {
        GimbalState {
            pan_limits: (-self.pan_limit, self.pan_limit),
            tilt_limits: (-self.tilt_limit, self.tilt_limit),
            max_rate: self.max_rate,
            count_resolution: self.count_resolution,
            ..GimbalState::default()
        }
    }
}
