//! Intensity rasters, patches cut from them, rotation warping and the
//! rotated template bank.
//!
//! Coordinates follow the usual image convention: origin at the top-left
//! pixel, `x` to the right, `y` downward, integer coordinates at pixel
//! centers. All pixel data is row-major `f64`.

mod bank;
pub mod pgm;
mod warp;

pub use bank::{build_template_bank, TemplateBank, BANK_ANGLE_STEP_DEG, BANK_SIZE};
pub use warp::{
    bilinear_sample, canvas_side, rotation_sin_cos, warp_rotate, warp_rotate_support, RotationMap,
};
pub(crate) use warp::CanvasLayout;

use crate::error::{Result, TrackError};

/// Borrowed view over a row-major intensity plane.
#[derive(Debug, Clone, Copy)]
pub struct ImageView<'a> {
    pub width: usize,
    pub height: usize,
    pub pixels: &'a [f64],
}

impl<'a> ImageView<'a> {
    pub fn new(width: usize, height: usize, pixels: &'a [f64]) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(TrackError::DimensionMismatch(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn row(&self, y: usize) -> &'a [f64] {
        &self.pixels[y * self.width..(y + 1) * self.width]
    }
}

/// Owned single-channel plane with no range or timing semantics. Used for
/// color channels before conversion and for scratch images.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<f64>,
}

impl Raster {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        ImageView::new(width, height, &pixels)?;
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    pub fn view(&self) -> ImageView<'_> {
        ImageView {
            width: self.width,
            height: self.height,
            pixels: &self.pixels,
        }
    }
}

/// Axis-aligned integer rectangle in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rect {
    pub x: i64,
    pub y: i64,
    pub width: usize,
    pub height: usize,
}

impl Rect {
    pub fn new(x: i64, y: i64, width: usize, height: usize) -> Self {
        Self {
            x,
            y,
            width,
            height,
        }
    }

    pub fn area(&self) -> usize {
        self.width * self.height
    }

    /// Exclusive right edge.
    pub fn right(&self) -> i64 {
        self.x + self.width as i64
    }

    /// Exclusive bottom edge.
    pub fn bottom(&self) -> i64 {
        self.y + self.height as i64
    }

    pub fn fits_in(&self, width: usize, height: usize) -> bool {
        self.x >= 0 && self.y >= 0 && self.right() <= width as i64 && self.bottom() <= height as i64
    }

    /// True if the continuous point lies within the pixel span of the rectangle.
    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        x >= self.x as f64 - 0.5
            && x <= self.right() as f64 - 0.5
            && y >= self.y as f64 - 0.5
            && y <= self.bottom() as f64 - 0.5
    }
}

/// A video frame: intensities in `[0, 255]` plus its capture time.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
    /// Capture time in seconds.
    pub timestamp: f64,
    pub frame_index: u64,
}

impl Frame {
    pub fn new(
        width: usize,
        height: usize,
        pixels: Vec<f64>,
        timestamp: f64,
        frame_index: u64,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(TrackError::DimensionMismatch(format!(
                "frame must be non-empty, got {width}x{height}"
            )));
        }
        ImageView::new(width, height, &pixels)?;
        if let Some((index, &value)) = pixels
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=255.0).contains(*v))
        {
            return Err(TrackError::IntensityOutOfRange { index, value });
        }
        Ok(Self {
            width,
            height,
            pixels,
            timestamp,
            frame_index,
        })
    }

    pub fn from_u8(
        width: usize,
        height: usize,
        bytes: &[u8],
        timestamp: f64,
        frame_index: u64,
    ) -> Result<Self> {
        Self::new(
            width,
            height,
            bytes.iter().map(|&b| f64::from(b)).collect(),
            timestamp,
            frame_index,
        )
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn view(&self) -> ImageView<'_> {
        ImageView {
            width: self.width,
            height: self.height,
            pixels: &self.pixels,
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    /// Overwrite one pixel, clamping into the valid intensity range.
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.pixels[y * self.width + x] = value.clamp(0.0, 255.0);
    }

    /// Rounded and clamped 8-bit copy of the intensities.
    pub fn to_u8(&self) -> Vec<u8> {
        self.pixels
            .iter()
            .map(|&v| v.round().clamp(0.0, 255.0) as u8)
            .collect()
    }
}

/// Convert three color planes into an intensity frame with BT.601 luma
/// weights.
pub fn to_grayscale(red: &Raster, green: &Raster, blue: &Raster) -> Result<Frame> {
    let dims = (red.width, red.height);
    if (green.width, green.height) != dims || (blue.width, blue.height) != dims {
        return Err(TrackError::DimensionMismatch(format!(
            "channel sizes differ: R {}x{}, G {}x{}, B {}x{}",
            red.width, red.height, green.width, green.height, blue.width, blue.height
        )));
    }
    let pixels = red
        .pixels
        .iter()
        .zip(&green.pixels)
        .zip(&blue.pixels)
        .map(|((&r, &g), &b)| 0.299 * r + 0.587 * g + 0.114 * b)
        .collect();
    Frame::new(dims.0, dims.1, pixels, 0.0, 0)
}

/// A small intensity raster used as a correlation template.
///
/// The mean and zero-mean energy are cached at construction; a patch with
/// constant intensity is rejected because its zero-mean energy is zero and
/// the correlation coefficient would be undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
    origin: (i64, i64),
    mean: f64,
    zm_norm: f64,
}

impl Patch {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>, origin: (i64, i64)) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(TrackError::DimensionMismatch(format!(
                "patch must be non-empty, got {width}x{height}"
            )));
        }
        ImageView::new(width, height, &pixels)?;
        let first = pixels[0];
        if pixels.iter().all(|&p| p == first) {
            return Err(TrackError::NonDiscriminativeTemplate);
        }
        let mean = pixels.iter().sum::<f64>() / pixels.len() as f64;
        let zm_norm = pixels
            .iter()
            .map(|&p| (p - mean) * (p - mean))
            .sum::<f64>()
            .sqrt();
        Ok(Self {
            width,
            height,
            pixels,
            origin,
            mean,
            zm_norm,
        })
    }

    /// Square canvas produced by warping. Constant content is allowed here
    /// (zero energy); callers that need a usable template check `zm_norm`.
    pub(crate) fn from_canvas(side: usize, pixels: Vec<f64>, origin: (i64, i64)) -> Self {
        debug_assert_eq!(pixels.len(), side * side);
        let first = pixels[0];
        let (mean, zm_norm) = if pixels.iter().all(|&p| p == first) {
            (first, 0.0)
        } else {
            let mean = pixels.iter().sum::<f64>() / pixels.len() as f64;
            let e = pixels.iter().map(|&p| (p - mean) * (p - mean)).sum::<f64>();
            (mean, e.sqrt())
        };
        Self {
            width: side,
            height: side,
            pixels,
            origin,
            mean,
            zm_norm,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    /// Top-left corner of the patch in the frame it was cut from.
    pub fn origin(&self) -> (i64, i64) {
        self.origin
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Root of the zero-mean energy, `sqrt(sum((t - mean)^2))`.
    pub fn zm_norm(&self) -> f64 {
        self.zm_norm
    }

    pub fn view(&self) -> ImageView<'_> {
        ImageView {
            width: self.width,
            height: self.height,
            pixels: &self.pixels,
        }
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.pixels
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &p| {
                (lo.min(p), hi.max(p))
            })
    }
}

/// Copy the pixels under `roi` out of `frame`.
pub fn extract_patch(frame: &Frame, roi: Rect) -> Result<Patch> {
    if !roi.fits_in(frame.width, frame.height) || roi.area() == 0 {
        return Err(TrackError::OutOfBounds {
            x: roi.x,
            y: roi.y,
            width: roi.width,
            height: roi.height,
            frame_width: frame.width,
            frame_height: frame.height,
        });
    }
    if roi.area() < 4 {
        return Err(TrackError::DimensionMismatch(format!(
            "patch area must be at least 4 pixels, got {}x{}",
            roi.width, roi.height
        )));
    }
    let (x0, y0) = (roi.x as usize, roi.y as usize);
    let mut pixels = Vec::with_capacity(roi.area());
    for y in y0..y0 + roi.height {
        let row = y * frame.width;
        pixels.extend_from_slice(&frame.pixels[row + x0..row + x0 + roi.width]);
    }
    Patch::new(roi.width, roi.height, pixels, (roi.x, roi.y))
}
