use rayon::prelude::*;

use crate::error::{Result, TrackError};
use crate::estimator::SearchWindow;
use crate::imaging::{Frame, ImageView, Patch};

/// Zero-mean energy per pixel at or below which a window is treated as
/// constant and its score as undefined.
pub const DEGENERATE_ENERGY_PER_PIXEL: f64 = 1e-9;

/// Above this many multiply-adds one map is split over rayon workers.
const PARALLEL_WORK: usize = 1 << 20;

/// Direct evaluation of the zero-mean normalized cross-correlation of
/// `template` against the region of `image` whose top-left corner is
/// `(u, v)`. No running sums or cached template statistics are used.
pub fn zmncc_oracle(image: &ImageView<'_>, template: &Patch, placement: (usize, usize)) -> Result<f64> {
    let (u, v) = placement;
    let (tw, th) = (template.width(), template.height());
    if u + tw > image.width || v + th > image.height {
        return Err(TrackError::OutOfBounds {
            x: u as i64,
            y: v as i64,
            width: tw,
            height: th,
            frame_width: image.width,
            frame_height: image.height,
        });
    }
    let tpl = template.view();
    let n = (tw * th) as f64;

    let mut f_sum = 0.0;
    let mut t_sum = 0.0;
    for y in 0..th {
        for x in 0..tw {
            f_sum += image.get(u + x, v + y);
            t_sum += tpl.get(x, y);
        }
    }
    let f_mean = f_sum / n;
    let t_mean = t_sum / n;

    let mut num = 0.0;
    let mut f_energy = 0.0;
    let mut t_energy = 0.0;
    for y in 0..th {
        for x in 0..tw {
            let df = image.get(u + x, v + y) - f_mean;
            let dt = tpl.get(x, y) - t_mean;
            num += df * dt;
            f_energy += df * df;
            t_energy += dt * dt;
        }
    }
    let floor = DEGENERATE_ENERGY_PER_PIXEL * n;
    if f_energy <= floor || t_energy <= floor {
        return Err(TrackError::UndefinedScore);
    }
    Ok(num / (f_energy * t_energy).sqrt())
}

/// Scores of every placement of a template inside a search region.
///
/// Entry `(i, j)` is the placement whose top-left corner sits at frame pixel
/// `(origin.0 + i, origin.1 + j)`. Placements over a constant image window
/// hold `NaN`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMap {
    pub origin: (usize, usize),
    pub width: usize,
    pub height: usize,
    pub scores: Vec<f64>,
}

impl CorrelationMap {
    /// Score at map coordinates, `None` when undefined.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let s = self.scores[j * self.width + i];
        (!s.is_nan()).then_some(s)
    }

    /// Best defined score and its frame placement.
    pub fn max(&self) -> Option<(f64, (usize, usize))> {
        let mut best: Option<(f64, usize)> = None;
        for (k, &s) in self.scores.iter().enumerate() {
            if !s.is_nan() && best.map_or(true, |(b, _)| s > b) {
                best = Some((s, k));
            }
        }
        best.map(|(s, k)| (s, (self.origin.0 + k % self.width, self.origin.1 + k / self.width)))
    }

    /// Frame placements scoring at least `threshold`.
    pub fn above(&self, threshold: f64) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.scores.iter().enumerate().filter_map(move |(k, &s)| {
            (s >= threshold).then(|| {
                (
                    (self.origin.0 + k % self.width, self.origin.1 + k / self.width),
                    s,
                )
            })
        })
    }
}

/// Summed-area tables of `g` and `g^2` over a rectangular region, where `g`
/// is the intensity minus a reference level. Shifting by the region mean
/// keeps the sums small, which matters for the variance difference below.
struct RegionSums {
    stride: usize,
    shift: f64,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl RegionSums {
    fn new(frame: &ImageView<'_>, x0: usize, y0: usize, w: usize, h: usize) -> Self {
        let mut total = 0.0;
        for y in y0..y0 + h {
            total += frame.row(y)[x0..x0 + w].iter().sum::<f64>();
        }
        let shift = total / (w * h) as f64;
        let stride = w + 1;
        let mut sum = vec![0.0; stride * (h + 1)];
        let mut sum_sq = vec![0.0; stride * (h + 1)];
        for y in 0..h {
            let row = &frame.row(y0 + y)[x0..x0 + w];
            let (mut rs, mut rq) = (0.0, 0.0);
            for (x, &p) in row.iter().enumerate() {
                let g = p - shift;
                rs += g;
                rq += g * g;
                let k = (y + 1) * stride + x + 1;
                sum[k] = sum[k - stride] + rs;
                sum_sq[k] = sum_sq[k - stride] + rq;
            }
        }
        Self {
            stride,
            shift,
            sum,
            sum_sq,
        }
    }

    #[inline]
    fn rect(table: &[f64], stride: usize, x: usize, y: usize, w: usize, h: usize) -> f64 {
        let a = table[y * stride + x];
        let b = table[y * stride + x + w];
        let c = table[(y + h) * stride + x];
        let d = table[(y + h) * stride + x + w];
        d - b - c + a
    }
}

const LANES: usize = 4;

/// Dot product of equal-length slices whose length is a multiple of `LANES`.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert!(a.len() == b.len() && a.len() % LANES == 0);
    let mut acc = [0.0f64; LANES];
    for (x, y) in a.chunks_exact(LANES).zip(b.chunks_exact(LANES)) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3])
}

/// Template with its mean removed, ready for repeated correlation. Rows are
/// zero-padded to `stride`, a multiple of the dot-product width.
#[derive(Debug, Clone)]
pub struct PreparedTemplate {
    width: usize,
    height: usize,
    stride: usize,
    zero_mean: Vec<f64>,
    norm: f64,
}

impl PreparedTemplate {
    pub fn new(template: &Patch) -> Self {
        let mean = template.mean();
        let (w, h) = (template.width(), template.height());
        let stride = w.div_ceil(LANES) * LANES;
        let mut zero_mean = vec![0.0; stride * h];
        for (dst, src) in zero_mean.chunks_exact_mut(stride).zip(template.pixels().chunks_exact(w)) {
            for (d, &p) in dst.iter_mut().zip(src) {
                *d = p - mean;
            }
        }
        Self {
            width: w,
            height: h,
            stride,
            zero_mean,
            norm: template.zm_norm(),
        }
    }
}

/// ZMNCC over all placements of `template` inside `window`, using summed
/// area tables for the window statistics and a precomputed zero-mean
/// template for the numerator.
pub fn zmncc_fast(frame: &Frame, template: &Patch, window: &SearchWindow) -> Result<CorrelationMap> {
    zmncc_prepared(frame, &PreparedTemplate::new(template), window)
}

pub fn zmncc_prepared(
    frame: &Frame,
    template: &PreparedTemplate,
    window: &SearchWindow,
) -> Result<CorrelationMap> {
    let rect = window.rect;
    let (tw, th) = (template.width, template.height);
    if !rect.fits_in(frame.width(), frame.height()) {
        return Err(TrackError::OutOfBounds {
            x: rect.x,
            y: rect.y,
            width: rect.width,
            height: rect.height,
            frame_width: frame.width(),
            frame_height: frame.height(),
        });
    }
    if rect.width < tw || rect.height < th {
        return Err(TrackError::WindowTooSmall {
            window_width: rect.width,
            window_height: rect.height,
            template_width: tw,
            template_height: th,
        });
    }
    let (x0, y0) = (rect.x as usize, rect.y as usize);
    let view = frame.view();
    let sums = RegionSums::new(&view, x0, y0, rect.width, rect.height);
    let map_w = rect.width - tw + 1;
    let map_h = rect.height - th + 1;
    let n = (tw * th) as f64;
    let floor = DEGENERATE_ENERGY_PER_PIXEL * n;

    // Shifted copy of the region so the numerator uses the same reference
    // level as the sums.
    let stride = template.stride;
    // Padding weights are zero, so reads past a row end only need to stay
    // inside the buffer.
    let region: Vec<f64> = (y0..y0 + rect.height)
        .flat_map(|y| view.row(y)[x0..x0 + rect.width].iter().map(|&p| p - sums.shift))
        .chain(std::iter::repeat(0.0).take(stride - tw))
        .collect();
    let rw = rect.width;

    let score_row = |j: usize, out: &mut [f64]| {
        for (i, slot) in out.iter_mut().enumerate() {
            let s1 = RegionSums::rect(&sums.sum, sums.stride, i, j, tw, th);
            let s2 = RegionSums::rect(&sums.sum_sq, sums.stride, i, j, tw, th);
            let energy = s2 - s1 * s1 / n;
            if energy <= floor {
                *slot = f64::NAN;
                continue;
            }
            let mut num = 0.0;
            for ty in 0..th {
                let start = (j + ty) * rw + i;
                num += dot(&region[start..start + stride], &template.zero_mean[ty * stride..(ty + 1) * stride]);
            }
            *slot = num / (energy.sqrt() * template.norm);
        }
    };

    let mut scores = vec![0.0; map_w * map_h];
    if map_w * map_h * tw * th >= PARALLEL_WORK {
        scores
            .par_chunks_mut(map_w)
            .enumerate()
            .for_each(|(j, row)| score_row(j, row));
    } else {
        scores
            .chunks_mut(map_w)
            .enumerate()
            .for_each(|(j, row)| score_row(j, row));
    }

    Ok(CorrelationMap {
        origin: (x0, y0),
        width: map_w,
        height: map_h,
        scores,
    })
}
