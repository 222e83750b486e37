use super::{warp_rotate, CanvasLayout, Patch};
use crate::error::{Result, TrackError};

/// Number of rotated templates covering a full turn.
pub const BANK_SIZE: usize = 36;
/// Angular spacing between consecutive templates.
pub const BANK_ANGLE_STEP_DEG: f64 = 10.0;

/// The source patch rendered at every multiple of 10 degrees on a shared
/// square canvas. Template `k` is the source rotated by `10 * k` degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateBank {
    templates: Vec<Patch>,
    source_size: (usize, usize),
    layout: CanvasLayout,
}

impl TemplateBank {
    pub fn build(patch: &Patch) -> Result<Self> {
        let layout = CanvasLayout::for_patch(patch.width(), patch.height());
        let templates = (0..BANK_SIZE)
            .map(|k| {
                let t = warp_rotate(patch, k as f64 * BANK_ANGLE_STEP_DEG);
                if t.zm_norm() > 0.0 {
                    Ok(t)
                } else {
                    Err(TrackError::NonDiscriminativeTemplate)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            templates,
            source_size: (patch.width(), patch.height()),
            layout,
        })
    }

    pub fn templates(&self) -> &[Patch] {
        &self.templates
    }

    pub fn template(&self, index: usize) -> &Patch {
        &self.templates[index % BANK_SIZE]
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn angle_step(&self) -> f64 {
        BANK_ANGLE_STEP_DEG
    }

    /// Index of the unrotated template.
    pub fn base_index(&self) -> usize {
        0
    }

    pub fn angle_of(&self, index: usize) -> f64 {
        (index % BANK_SIZE) as f64 * BANK_ANGLE_STEP_DEG
    }

    /// Side of the square canvas every template is drawn on.
    pub fn canvas_side(&self) -> usize {
        self.layout.side
    }

    /// Width and height of the patch the bank was built from.
    pub fn source_size(&self) -> (usize, usize) {
        self.source_size
    }

    /// Diagonal of the source patch in pixels.
    pub fn source_diagonal(&self) -> f64 {
        let (w, h) = self.source_size;
        ((w * w + h * h) as f64).sqrt()
    }

    /// Position of the rotation pivot (the source patch center) relative to
    /// a template's top-left corner. Adding it to a placement gives the
    /// object center in frame coordinates.
    pub fn center_offset(&self) -> (f64, f64) {
        self.layout.pivot
    }
}

/// Free-function form of [`TemplateBank::build`].
pub fn build_template_bank(patch: &Patch) -> Result<TemplateBank> {
    TemplateBank::build(patch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::warp_rotate;

    fn patch() -> Patch {
        let px = (0..12 * 10)
            .map(|i| ((i * 37) % 101) as f64 + (i / 12) as f64)
            .collect();
        Patch::new(12, 10, px, (5, 7)).unwrap()
    }

    #[test]
    fn bank_has_36_templates_ten_degrees_apart() {
        let bank = TemplateBank::build(&patch()).unwrap();
        assert_eq!(bank.len(), 36);
        assert_eq!(bank.angle_step(), 10.0);
        assert_eq!(bank.angle_of(4), 40.0);
        assert!(bank
            .templates()
            .iter()
            .all(|t| t.width() == bank.canvas_side() && t.height() == bank.canvas_side()));
    }

    #[test]
    fn base_template_is_the_source_on_canvas() {
        let p = patch();
        let bank = TemplateBank::build(&p).unwrap();
        assert_eq!(bank.template(0), &warp_rotate(&p, 0.0));
        let (ox, oy) = (2, 3); // canvas 16 for 12x10
        let t = bank.template(0);
        for y in 0..10 {
            for x in 0..12 {
                assert_eq!(t.pixels()[(y + oy) * 16 + x + ox], p.pixels()[y * 12 + x]);
            }
        }
        assert_eq!(t.origin(), (3, 4));
        assert_eq!(bank.center_offset(), (2.0 + 5.5, 3.0 + 4.5));
    }

    #[test]
    fn template_18_is_the_half_turn() {
        let p = patch();
        let bank = TemplateBank::build(&p).unwrap();
        let half = warp_rotate(&p, 180.0);
        for (a, b) in bank.template(18).pixels().iter().zip(half.pixels()) {
            assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn building_twice_is_bit_identical() {
        let p = patch();
        assert_eq!(TemplateBank::build(&p).unwrap(), TemplateBank::build(&p).unwrap());
    }
}
