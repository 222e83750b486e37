use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::Scenario;
use crate::error::{Result, TrackError};
use crate::imaging::{bilinear_sample, Frame, Raster, Rect, RotationMap};

/// Ground truth for one rendered frame, in image coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthRecord {
    pub frame_index: u64,
    pub timestamp: f64,
    /// Target center, `None` while the target is out of view.
    pub center: Option<(f64, f64)>,
    /// Rotation used to composite the target, degrees.
    pub heading: f64,
    pub gain: f64,
    pub offset: f64,
}

fn hash2(ix: i64, iy: i64, seed: u64) -> f64 {
    let mut h = seed
        ^ (ix as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (iy as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    h ^= h >> 31;
    h = h.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    h ^= h >> 27;
    h = h.wrapping_mul(0x94D0_49BB_1331_11EB);
    h ^= h >> 33;
    (h >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
}

/// Smoothly interpolated lattice noise in `[-1, 1]`.
fn value_noise(x: f64, y: f64, cell: f64, seed: u64) -> f64 {
    let (gx, gy) = (x / cell, y / cell);
    let (x0, y0) = (gx.floor(), gy.floor());
    let (fx, fy) = (gx - x0, gy - y0);
    let (sx, sy) = (fx * fx * (3.0 - 2.0 * fx), fy * fy * (3.0 - 2.0 * fy));
    let (ix, iy) = (x0 as i64, y0 as i64);
    let a = hash2(ix, iy, seed);
    let b = hash2(ix + 1, iy, seed);
    let c = hash2(ix, iy + 1, seed);
    let d = hash2(ix + 1, iy + 1, seed);
    let top = a + (b - a) * sx;
    let bottom = c + (d - c) * sx;
    top + (bottom - top) * sy
}

/// Random smooth blob pattern around `level`, stretched so its extreme
/// deviation equals `contrast`.
pub fn blob_sprite(width: usize, height: usize, level: f64, contrast: f64, blob_sigma: f64, rng: &mut impl Rng) -> Raster {
    let area = (width * height) as f64;
    let count = ((area / (2.0 * blob_sigma).powi(2)).round() as usize).max(6);
    let blobs: Vec<(f64, f64, f64)> = (0..count)
        .map(|_| {
            (
                rng.gen_range(0.0..width as f64),
                rng.gen_range(0.0..height as f64),
                if rng.gen_bool(0.5) { 1.0 } else { -1.0 } * rng.gen_range(0.5..1.0),
            )
        })
        .collect();
    let inv = 1.0 / (2.0 * blob_sigma * blob_sigma);
    let mut field: Vec<f64> = (0..width * height)
        .map(|i| {
            let (x, y) = ((i % width) as f64, (i / width) as f64);
            blobs
                .iter()
                .map(|&(bx, by, a)| a * (-((x - bx).powi(2) + (y - by).powi(2)) * inv).exp())
                .sum()
        })
        .collect();
    let mean = field.iter().sum::<f64>() / area;
    let peak = field.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max).max(1e-12);
    for v in &mut field {
        *v = level + (*v - mean) / peak * contrast;
    }
    Raster {
        width,
        height,
        pixels: field,
    }
}

struct Object {
    sprite: Raster,
    heading: f64,
    world: (f64, f64),
}

/// Renders frames of a scenario for a given viewport offset.
pub struct Renderer {
    scenario: Scenario,
    target: Raster,
    distractors: Vec<Object>,
    background: Option<((u64, u64), Vec<f64>)>,
}

impl Renderer {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        scenario.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
        let (w, h) = (scenario.target_width, scenario.target_height);
        let target = blob_sprite(w, h, scenario.background_level, scenario.target_contrast, scenario.target_blob_sigma, &mut rng);
        let distractors = scenario
            .distractors
            .iter()
            .map(|&world| Object {
                sprite: blob_sprite(w, h, scenario.background_level, scenario.target_contrast, scenario.target_blob_sigma, &mut rng),
                heading: rng.gen_range(0.0..360.0),
                world,
            })
            .collect();
        Ok(Self {
            scenario: scenario.clone(),
            target,
            distractors,
            background: None,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn target_sprite(&self) -> &Raster {
        &self.target
    }

    /// Axis-aligned box of the unrotated target in the first frame, used as
    /// the template selection.
    pub fn initial_roi(&self, viewport: (f64, f64)) -> Rect {
        let (cx, cy) = self.scenario.trajectory.at(0.0);
        let (w, h) = (self.scenario.target_width, self.scenario.target_height);
        Rect::new(
            (cx - viewport.0 - (w as f64 - 1.0) / 2.0).round() as i64,
            (cy - viewport.1 - (h as f64 - 1.0) / 2.0).round() as i64,
            w,
            h,
        )
    }

    fn background(&mut self, viewport: (f64, f64)) -> &[f64] {
        let key = (viewport.0.to_bits(), viewport.1.to_bits());
        if self.background.as_ref().map(|(k, _)| *k) != Some(key) {
            let s = &self.scenario;
            let seed = s.seed.wrapping_add(0xB5);
            let cell = s.background_scale.max(1.0);
            let mut px = Vec::with_capacity(s.width * s.height);
            for y in 0..s.height {
                for x in 0..s.width {
                    let (wx, wy) = (x as f64 + viewport.0, y as f64 + viewport.1);
                    let n = 0.7 * value_noise(wx, wy, cell, seed) + 0.3 * value_noise(wx, wy, cell / 2.0, seed ^ 0x55);
                    px.push(s.background_level + s.background_contrast * n);
                }
            }
            self.background = Some((key, px));
        }
        &self.background.as_ref().unwrap().1
    }

    /// Draw frame `index` with the camera looking at world offset
    /// `viewport` (image pixel `(x, y)` sees world `(x + vx, y + vy)`).
    pub fn render(&mut self, index: usize, viewport: (f64, f64)) -> Result<(Frame, TruthRecord)> {
        let t = self.scenario.time_of(index);
        let (width, height) = (self.scenario.width, self.scenario.height);
        let mut scene = self.background(viewport).to_vec();
        let s = &self.scenario;

        for d in &self.distractors {
            let c = (d.world.0 - viewport.0, d.world.1 - viewport.1);
            composite(&mut scene, width, height, &d.sprite, c, d.heading);
        }

        let heading = s.heading.at(t);
        let center = if s.target_present(t) {
            let w = s.trajectory.at(t);
            let c = (w.0 - viewport.0, w.1 - viewport.1);
            let r = s.target_diagonal() / 2.0;
            if c.0 - r < 0.0 || c.1 - r < 0.0 || c.0 + r > (width - 1) as f64 || c.1 + r > (height - 1) as f64 {
                return Err(TrackError::InvalidScenario(format!(
                    "target at ({:.1}, {:.1}) leaves the {width}x{height} frame at t = {t:.3} s",
                    c.0, c.1
                )));
            }
            composite(&mut scene, width, height, &self.target, c, heading);
            Some(c)
        } else {
            None
        };

        let gain = s.gain.at(t);
        let offset = s.offset.at(t);
        let mut noise_rng = ChaCha8Rng::seed_from_u64(s.seed ^ (index as u64).wrapping_mul(0x2545_F491_4F6C_DD1D));
        let normal = Normal::new(0.0, s.sensor_noise.max(0.0)).expect("finite noise level");
        let noisy = s.sensor_noise > 0.0;
        let quantize = s.quantize;
        let pixels = scene
            .iter()
            .map(|&v| {
                let n = if noisy { normal.sample(&mut noise_rng) } else { 0.0 };
                let v = (gain * v + offset + n).clamp(0.0, 255.0);
                if quantize {
                    v.round()
                } else {
                    v
                }
            })
            .collect();
        let frame = Frame::new(width, height, pixels, t, index as u64)?;
        Ok((
            frame,
            TruthRecord {
                frame_index: index as u64,
                timestamp: t,
                center,
                heading,
                gain,
                offset,
            },
        ))
    }
}

/// Paint `sprite` rotated by `heading` with its center at `center`.
fn composite(scene: &mut [f64], width: usize, height: usize, sprite: &Raster, center: (f64, f64), heading: f64) {
    let pivot = ((sprite.width as f64 - 1.0) / 2.0, (sprite.height as f64 - 1.0) / 2.0);
    let map = RotationMap::new(heading, pivot, center);
    let r = ((sprite.width.pow(2) + sprite.height.pow(2)) as f64).sqrt() / 2.0 + 1.0;
    let x0 = (center.0 - r).floor().max(0.0) as usize;
    let y0 = (center.1 - r).floor().max(0.0) as usize;
    let x1 = ((center.0 + r).ceil().max(0.0) as usize).min(width);
    let y1 = ((center.1 + r).ceil().max(0.0) as usize).min(height);
    let view = sprite.view();
    for y in y0..y1 {
        for x in x0..x1 {
            let (sx, sy) = map.source_of(x as f64, y as f64);
            if let Some(v) = bilinear_sample(&view, sx, sy) {
                scene[y * width + x] = v;
            }
        }
    }
}
