//! Scenario description and its `key = value` file format.
//!
//! Schedules are piecewise-linear breakpoint lists `t:value; t:value; ...`
//! (times in seconds, held constant outside the first and last breakpoint).
//! Positions use `t:x,y`. Dropouts are `start-end` spans separated by `;`.
//!
//! ```text
//! width = 320
//! height = 240
//! fps = 30
//! frames = 500
//! seed = 7
//! target_size = 30x30
//! trajectory = 0:160,120; 16.6:200,140
//! heading = 0:0; 16.6:350
//! gain = 0:1; 8:1.3; 16.6:0.8
//! dropouts = 5.0-6.0
//! distractors = 60,60; 260,190
//! ```

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Result, TrackError};
use crate::harness::config::key_values;

/// Piecewise-linear schedule over time.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule<T> {
    points: Vec<(f64, T)>,
}

pub trait Lerp: Copy {
    fn lerp(a: Self, b: Self, u: f64) -> Self;
}

impl Lerp for f64 {
    fn lerp(a: f64, b: f64, u: f64) -> f64 {
        a + (b - a) * u
    }
}

impl Lerp for (f64, f64) {
    fn lerp(a: Self, b: Self, u: f64) -> Self {
        (a.0 + (b.0 - a.0) * u, a.1 + (b.1 - a.1) * u)
    }
}

impl<T: Lerp> Schedule<T> {
    pub fn new(mut points: Vec<(f64, T)>) -> Result<Self> {
        if points.is_empty() {
            return Err(TrackError::InvalidScenario("schedule needs at least one breakpoint".into()));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(TrackError::InvalidScenario("schedule breakpoints must have distinct times".into()));
        }
        Ok(Self { points })
    }

    pub fn constant(v: T) -> Self {
        Self { points: vec![(0.0, v)] }
    }

    pub fn at(&self, t: f64) -> T {
        let pts = &self.points;
        if t <= pts[0].0 {
            return pts[0].1;
        }
        for w in pts.windows(2) {
            let ((t0, a), (t1, b)) = (w[0], w[1]);
            if t <= t1 {
                return T::lerp(a, b, (t - t0) / (t1 - t0));
            }
        }
        pts[pts.len() - 1].1
    }

    pub fn points(&self) -> &[(f64, T)] {
        &self.points
    }
}

/// A synthetic flight scene.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub width: usize,
    pub height: usize,
    pub fps: f64,
    pub frames: usize,
    pub seed: u64,
    /// Mean background intensity.
    pub background_level: f64,
    /// Background texture amplitude.
    pub background_contrast: f64,
    /// Background texture cell size, pixels.
    pub background_scale: f64,
    pub target_width: usize,
    pub target_height: usize,
    /// Amplitude of the target pattern around its mean level.
    pub target_contrast: f64,
    /// Spatial scale of the target pattern, pixels.
    pub target_blob_sigma: f64,
    /// Target center in world pixels (equal to image pixels with the gimbal
    /// at rest).
    pub trajectory: Schedule<(f64, f64)>,
    /// Target rotation, degrees, same convention as the template warp.
    pub heading: Schedule<f64>,
    pub gain: Schedule<f64>,
    pub offset: Schedule<f64>,
    /// Spans `[start, end)` in seconds during which the target is absent.
    pub dropouts: Vec<(f64, f64)>,
    /// World positions of distractor objects.
    pub distractors: Vec<(f64, f64)>,
    /// Standard deviation of additive per-pixel sensor noise.
    pub sensor_noise: f64,
    /// Round rendered intensities to integers, so frames survive 8-bit
    /// export unchanged.
    pub quantize: bool,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            width: 320,
            height: 240,
            fps: 30.0,
            frames: 300,
            seed: 1,
            background_level: 120.0,
            background_contrast: 12.0,
            background_scale: 14.0,
            target_width: 30,
            target_height: 30,
            target_contrast: 70.0,
            target_blob_sigma: 3.0,
            trajectory: Schedule::constant((160.0, 120.0)),
            heading: Schedule::constant(0.0),
            gain: Schedule::constant(1.0),
            offset: Schedule::constant(0.0),
            dropouts: Vec::new(),
            distractors: Vec::new(),
            sensor_noise: 0.0,
            quantize: true,
        }
    }
}

impl Scenario {
    pub fn time_of(&self, frame: usize) -> f64 {
        frame as f64 / self.fps
    }

    pub fn duration(&self) -> f64 {
        self.frames as f64 / self.fps
    }

    pub fn target_present(&self, t: f64) -> bool {
        !self.dropouts.iter().any(|&(a, b)| t >= a && t < b)
    }

    pub fn target_diagonal(&self) -> f64 {
        ((self.target_width.pow(2) + self.target_height.pow(2)) as f64).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(TrackError::InvalidScenario(m));
        if self.width == 0 || self.height == 0 || self.frames == 0 {
            return fail("width, height and frames must be positive".into());
        }
        if !(self.fps > 0.0) {
            return fail(format!("fps must be positive, got {}", self.fps));
        }
        if self.target_width < 2 || self.target_height < 2 {
            return fail("target must be at least 2x2".into());
        }
        if self.target_diagonal() >= self.width.min(self.height) as f64 {
            return fail("target does not fit in the frame".into());
        }
        if self.dropouts.iter().any(|&(a, b)| !(b > a)) {
            return fail("dropout spans must have end > start".into());
        }
        if !self.target_present(0.0) {
            return fail("target must be in view in the first frame to select the template".into());
        }
        Ok(())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut s = Scenario::default();
        let mut duration = None;
        let bad = |line: usize, message: String| TrackError::Parse {
            path: origin.to_string(),
            line,
            message,
        };
        for item in key_values(text, origin) {
            let (ln, key, v) = item?;
            let num = |v: &str| -> Result<f64> {
                let x: f64 = v
                    .trim()
                    .parse()
                    .map_err(|_| bad(ln, format!("{key}: expected a number, got {v:?}")))?;
                if x.is_finite() {
                    Ok(x)
                } else {
                    Err(bad(ln, format!("{key}: value must be finite")))
                }
            };
            let int = |v: &str| -> Result<u64> {
                v.trim()
                    .parse()
                    .map_err(|_| bad(ln, format!("{key}: expected an integer, got {v:?}")))
            };
            let pair = |v: &str| -> Result<(f64, f64)> {
                let (a, b) = v
                    .split_once(',')
                    .ok_or_else(|| bad(ln, format!("{key}: expected x,y, got {v:?}")))?;
                Ok((num(a)?, num(b)?))
            };
            let items = |v: &str| -> Vec<String> {
                v.split(';').map(|p| p.trim().to_string()).filter(|p| !p.is_empty()).collect()
            };
            let scalar_schedule = |v: &str| -> Result<Schedule<f64>> {
                let pts = items(v)
                    .iter()
                    .map(|p| {
                        let (t, x) = p
                            .split_once(':')
                            .ok_or_else(|| bad(ln, format!("{key}: expected t:value, got {p:?}")))?;
                        Ok((num(t)?, num(x)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Schedule::new(pts).map_err(|e| bad(ln, format!("{key}: {e}")))
            };
            match key {
                "width" => s.width = int(v)? as usize,
                "height" => s.height = int(v)? as usize,
                "fps" => s.fps = num(v)?,
                "frames" => s.frames = int(v)? as usize,
                "duration" => duration = Some(num(v)?),
                "seed" => s.seed = int(v)?,
                "background_level" => s.background_level = num(v)?,
                "background_contrast" => s.background_contrast = num(v)?,
                "background_scale" => s.background_scale = num(v)?,
                "target_size" => {
                    let (w, h) = v
                        .split_once('x')
                        .ok_or_else(|| bad(ln, format!("target_size: expected WxH, got {v:?}")))?;
                    s.target_width = int(w)? as usize;
                    s.target_height = int(h)? as usize;
                }
                "target_contrast" => s.target_contrast = num(v)?,
                "target_blob_sigma" => s.target_blob_sigma = num(v)?,
                "trajectory" => {
                    let pts = items(v)
                        .iter()
                        .map(|p| {
                            let (t, xy) = p
                                .split_once(':')
                                .ok_or_else(|| bad(ln, format!("trajectory: expected t:x,y, got {p:?}")))?;
                            Ok((num(t)?, pair(xy)?))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    s.trajectory = Schedule::new(pts).map_err(|e| bad(ln, format!("trajectory: {e}")))?;
                }
                "heading" => s.heading = scalar_schedule(v)?,
                "gain" => s.gain = scalar_schedule(v)?,
                "offset" => s.offset = scalar_schedule(v)?,
                "dropouts" => {
                    s.dropouts = items(v)
                        .iter()
                        .map(|p| {
                            let (a, b) = p
                                .split_once('-')
                                .ok_or_else(|| bad(ln, format!("dropouts: expected start-end, got {p:?}")))?;
                            Ok((num(a)?, num(b)?))
                        })
                        .collect::<Result<Vec<_>>>()?;
                }
                "distractors" => {
                    s.distractors = items(v).iter().map(|p| pair(p)).collect::<Result<Vec<_>>>()?;
                }
                "sensor_noise" => s.sensor_noise = num(v)?,
                "quantize" => {
                    s.quantize = v
                        .parse()
                        .map_err(|_| bad(ln, format!("quantize: expected true or false, got {v:?}")))?
                }
                _ => return Err(bad(ln, format!("unknown key {key:?}"))),
            }
        }
        if let Some(d) = duration {
            s.frames = (d * s.fps).round() as usize;
        }
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| TrackError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn serialize(&self) -> String {
        fn sched(s: &Schedule<f64>) -> String {
            s.points().iter().map(|(t, v)| format!("{t}:{v}")).collect::<Vec<_>>().join("; ")
        }
        let mut out = String::new();
        let _ = writeln!(out, "width = {}", self.width);
        let _ = writeln!(out, "height = {}", self.height);
        let _ = writeln!(out, "fps = {}", self.fps);
        let _ = writeln!(out, "frames = {}", self.frames);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "background_level = {}", self.background_level);
        let _ = writeln!(out, "background_contrast = {}", self.background_contrast);
        let _ = writeln!(out, "background_scale = {}", self.background_scale);
        let _ = writeln!(out, "target_size = {}x{}", self.target_width, self.target_height);
        let _ = writeln!(out, "target_contrast = {}", self.target_contrast);
        let _ = writeln!(out, "target_blob_sigma = {}", self.target_blob_sigma);
        let traj: Vec<String> = self
            .trajectory
            .points()
            .iter()
            .map(|(t, (x, y))| format!("{t}:{x},{y}"))
            .collect();
        let _ = writeln!(out, "trajectory = {}", traj.join("; "));
        let _ = writeln!(out, "heading = {}", sched(&self.heading));
        let _ = writeln!(out, "gain = {}", sched(&self.gain));
        let _ = writeln!(out, "offset = {}", sched(&self.offset));
        if !self.dropouts.is_empty() {
            let d: Vec<String> = self.dropouts.iter().map(|(a, b)| format!("{a}-{b}")).collect();
            let _ = writeln!(out, "dropouts = {}", d.join("; "));
        }
        if !self.distractors.is_empty() {
            let d: Vec<String> = self.distractors.iter().map(|(x, y)| format!("{x},{y}")).collect();
            let _ = writeln!(out, "distractors = {}", d.join("; "));
        }
        let _ = writeln!(out, "sensor_noise = {}", self.sensor_noise);
        let _ = writeln!(out, "quantize = {}", self.quantize);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_interpolates_and_holds() {
        let s = Schedule::new(vec![(1.0, 10.0), (3.0, 30.0)]).unwrap();
        assert_eq!(s.at(0.0), 10.0);
        assert_eq!(s.at(2.0), 20.0);
        assert_eq!(s.at(9.0), 30.0);
        let p = Schedule::new(vec![(0.0, (0.0, 0.0)), (2.0, (4.0, -2.0))]).unwrap();
        assert_eq!(p.at(0.5), (1.0, -0.5));
        assert!(Schedule::new(vec![(0.0, 1.0), (0.0, 2.0)]).is_err());
    }

    #[test]
    fn parses_full_scenario() {
        let text = "width = 200\nheight=150\nfps=25\nframes=50\nseed=9\ntarget_size=24x20\n\
                    trajectory = 0:100,75; 2:120,80\nheading=0:0;2:90\ngain=0:1;1:1.2\n\
                    dropouts = 0.5-0.8; 1.0-1.2\ndistractors = 30,30; 170,120\nquantize = false\n";
        let s = Scenario::parse(text, "sc").unwrap();
        assert_eq!((s.width, s.height, s.frames, s.seed), (200, 150, 50, 9));
        assert_eq!((s.target_width, s.target_height), (24, 20));
        assert_eq!(s.trajectory.at(1.0), (110.0, 77.5));
        assert_eq!(s.dropouts, vec![(0.5, 0.8), (1.0, 1.2)]);
        assert!(!s.target_present(0.6) && s.target_present(0.8));
        assert_eq!(s.distractors.len(), 2);
        assert!(!s.quantize);
        assert_eq!(Scenario::parse(&s.serialize(), "rt").unwrap(), s);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let e = Scenario::parse("width = 200\n\ntrajectory = 0:1\n", "sc").unwrap_err();
        assert!(matches!(e, TrackError::Parse { line: 3, .. }), "{e}");
        let e = Scenario::parse("fps = fast\n", "sc").unwrap_err();
        assert!(matches!(e, TrackError::Parse { line: 1, .. }));
        let e = Scenario::parse("nonsense\n", "sc").unwrap_err();
        assert!(matches!(e, TrackError::Parse { line: 1, .. }));
        assert!(matches!(
            Scenario::parse("dropouts = 0-1\n", "sc"),
            Err(TrackError::InvalidScenario(_))
        ));
    }
}
