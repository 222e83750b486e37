//! Standardized scenarios used by the tests, the benchmark and the CLI.

use super::{Scenario, Schedule};

fn sched<T: super::Lerp>(points: Vec<(f64, T)>) -> Schedule<T> {
    Schedule::new(points).expect("preset breakpoints are distinct")
}

/// Slow drift, full heading ramp and an illumination sweep, no dropout.
pub fn benign() -> Scenario {
    let s = Scenario {
        frames: 500,
        seed: 11,
        ..Scenario::default()
    };
    let end = s.duration();
    Scenario {
        trajectory: sched(vec![(0.0, (160.0, 120.0)), (end, (190.0, 135.0))]),
        heading: sched(vec![(0.0, 0.0), (end, 350.0)]),
        gain: sched(vec![(0.0, 1.0), (end * 0.3, 1.3), (end * 0.7, 0.8), (end, 1.0)]),
        offset: sched(vec![(0.0, 0.0), (end * 0.5, 10.0), (end, -5.0)]),
        distractors: vec![(60.0, 60.0), (270.0, 190.0)],
        ..s
    }
}

/// Stationary target turning through every bank heading.
pub fn rotating() -> Scenario {
    let s = Scenario {
        frames: 720,
        seed: 5,
        ..Scenario::default()
    };
    let end = s.duration();
    Scenario {
        heading: sched(vec![(0.0, 0.0), (end, 359.0)]),
        ..s
    }
}

/// Constant-velocity target that leaves view for 30 frames starting at
/// frame `90`.
pub fn dropout() -> Scenario {
    let s = Scenario {
        frames: 200,
        seed: 23,
        ..Scenario::default()
    };
    let end = s.duration();
    Scenario {
        trajectory: sched(vec![(0.0, (160.0, 120.0)), (end, (180.0, 130.0))]),
        dropouts: vec![(s.time_of(90), s.time_of(120))],
        distractors: vec![(60.0, 60.0)],
        ..s
    }
}

/// Stationary target off the optical axis, for gimbal centering.
pub fn static_target() -> Scenario {
    Scenario {
        frames: 120,
        seed: 31,
        trajectory: Schedule::constant((205.0, 148.0)),
        ..Scenario::default()
    }
}

/// 640x480 benchmark scene with a slowly moving target of the given size.
pub fn benchmark(width: usize, height: usize, frames: usize) -> Scenario {
    let s = Scenario {
        width: 640,
        height: 480,
        frames,
        seed: 2011,
        target_width: width,
        target_height: height,
        ..Scenario::default()
    };
    let end = s.duration();
    Scenario {
        trajectory: sched(vec![(0.0, (320.0, 240.0)), (end, (350.0, 255.0))]),
        heading: sched(vec![(0.0, 0.0), (end, 40.0)]),
        ..s
    }
}
