//! Per-frame tracking: predict, search, correct or coast, and re-point the
//! gimbal.

use crate::error::{Result, TrackError};
use crate::estimator::{SearchWindow, TrackState};
use crate::gimbal::{centering_step, CameraModel, GimbalState};
use crate::harness::TrackerConfig;
use crate::imaging::{extract_patch, Frame, Rect, TemplateBank};
use crate::matcher::{detect, Detection, SchedulerState};

/// What happened on one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub frame_index: u64,
    pub timestamp: f64,
    pub detection: Option<Detection>,
    /// Window the matcher searched this frame.
    pub window: SearchWindow,
    pub templates_evaluated: usize,
    /// Counts sent to the gimbal after this frame.
    pub counts: (i64, i64),
    /// Gimbal state after the step.
    pub gimbal: GimbalState,
}

/// A single-target tracker built from a template selected in one frame.
#[derive(Debug, Clone)]
pub struct Tracker {
    config: TrackerConfig,
    bank: TemplateBank,
    scheduler: SchedulerState,
    state: Option<TrackState>,
    gimbal: GimbalState,
    camera: CameraModel,
    frame_size: (usize, usize),
    last_time: Option<f64>,
    compensate_gimbal: bool,
}

impl Tracker {
    /// Cut the template at `roi` out of `frame` and build the rotation bank.
    /// No frame is processed yet. With `compensate_gimbal`, gimbal motion is
    /// assumed to shift the next frame's view and the position estimate is
    /// moved accordingly.
    pub fn new(frame: &Frame, roi: Rect, config: &TrackerConfig, compensate_gimbal: bool) -> Result<Self> {
        config.validate()?;
        let patch = extract_patch(frame, roi)?;
        let bank = TemplateBank::build(&patch)?;
        Ok(Self {
            config: config.clone(),
            bank,
            scheduler: SchedulerState::new(),
            state: None,
            gimbal: config.gimbal(),
            camera: CameraModel::new(config.camera_hfov, config.camera_vfov, frame.width(), frame.height()),
            frame_size: (frame.width(), frame.height()),
            last_time: None,
            compensate_gimbal,
        })
    }

    pub fn bank(&self) -> &TemplateBank {
        &self.bank
    }

    pub fn state(&self) -> Option<&TrackState> {
        self.state.as_ref()
    }

    pub fn gimbal(&self) -> &GimbalState {
        &self.gimbal
    }

    pub fn camera(&self) -> &CameraModel {
        &self.camera
    }

    pub fn scheduler(&self) -> &SchedulerState {
        &self.scheduler
    }

    pub fn process(&mut self, frame: &Frame) -> Result<FrameRecord> {
        if (frame.width(), frame.height()) != self.frame_size {
            return Err(TrackError::DimensionMismatch(format!(
                "frame {} is {}x{}, tracker expects {}x{}",
                frame.frame_index,
                frame.width(),
                frame.height(),
                self.frame_size.0,
                self.frame_size.1
            )));
        }
        let t = frame.timestamp;
        let dt = match self.last_time {
            Some(prev) if t <= prev => {
                return Err(TrackError::InvalidTimestep(format!(
                    "frame {} at {t} s does not follow {prev} s",
                    frame.frame_index
                )))
            }
            Some(prev) => t - prev,
            None => 1.0 / self.config.fps,
        };

        let predicted = self.state.as_ref().map(|s| s.predict(t)).transpose()?;
        let canvas = self.bank.canvas_side();
        let window = match &predicted {
            Some(p) => p.search_window((canvas, canvas), self.frame_size),
            None => SearchWindow::full_frame(self.frame_size.0, self.frame_size.1),
        };
        let outcome = detect(frame, &self.bank, &mut self.scheduler, &window, self.config.zmncc_threshold)?;

        self.state = match (predicted, &outcome.detection) {
            (Some(p), Some(d)) => Some(p.correct(d.position)),
            (Some(p), None) => Some(p),
            (None, Some(d)) => Some(TrackState::init(d, t, self.config.sigma, self.config.p0())),
            (None, None) => None,
        };

        let before = self.gimbal;
        let (gimbal, counts) = centering_step(
            outcome.detection.as_ref(),
            self.camera.center(),
            &self.camera,
            &self.gimbal,
            dt,
        );
        self.gimbal = gimbal;
        if self.compensate_gimbal {
            if let Some(s) = self.state.as_mut() {
                let (rx, ry) = self.camera.rad_per_pixel();
                s.translate(-(gimbal.pan - before.pan) / rx, -(gimbal.tilt - before.tilt) / ry);
            }
        }
        self.last_time = Some(t);

        Ok(FrameRecord {
            frame_index: frame.frame_index,
            timestamp: t,
            detection: outcome.detection,
            window,
            templates_evaluated: outcome.templates_evaluated,
            counts,
            gimbal,
        })
    }
}
