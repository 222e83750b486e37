use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the tracking pipeline.
#[derive(Debug, Error)]
pub enum TrackError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("intensity {value} at index {index} is outside [0, 255]")]
    IntensityOutOfRange { index: usize, value: f64 },

    #[error("region {x},{y} {width}x{height} is outside the {frame_width}x{frame_height} frame")]
    OutOfBounds {
        x: i64,
        y: i64,
        width: usize,
        height: usize,
        frame_width: usize,
        frame_height: usize,
    },

    #[error("template has constant intensity and cannot be correlated")]
    NonDiscriminativeTemplate,

    #[error("correlation undefined: zero-mean energy of the window or template is zero")]
    UndefinedScore,

    #[error("search window {window_width}x{window_height} is smaller than the {template_width}x{template_height} template")]
    WindowTooSmall {
        window_width: usize,
        window_height: usize,
        template_width: usize,
        template_height: usize,
    },

    #[error("invalid timestep: {0}")]
    InvalidTimestep(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("malformed PGM: {0}")]
    Pgm(String),

    #[error("empty sequence: no PGM frames in {0}")]
    EmptySequence(PathBuf),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl TrackError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        TrackError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, TrackError>;
