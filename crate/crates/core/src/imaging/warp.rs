use super::{ImageView, Patch};

/// Side of the square canvas that holds every rotation of a `width` x
/// `height` patch: the smallest integer not below the patch diagonal.
pub fn canvas_side(width: usize, height: usize) -> usize {
    let d2 = width * width + height * height;
    let mut side = (d2 as f64).sqrt().ceil() as usize;
    while side * side < d2 {
        side += 1;
    }
    while side > 0 && (side - 1) * (side - 1) >= d2 {
        side -= 1;
    }
    side
}

/// `(sin, cos)` of an angle in degrees, exact at multiples of 90 degrees so
/// quarter turns land on integer pixel positions.
pub fn rotation_sin_cos(alpha_deg: f64) -> (f64, f64) {
    let a = alpha_deg.rem_euclid(360.0);
    if a == 0.0 {
        (0.0, 1.0)
    } else if a == 90.0 {
        (1.0, 0.0)
    } else if a == 180.0 {
        (0.0, -1.0)
    } else if a == 270.0 {
        (-1.0, 0.0)
    } else {
        a.to_radians().sin_cos()
    }
}

/// Pure rotation about a pivot, in the form
///
/// ```text
/// [x']   [ cos a   sin a ] [x]
/// [y'] = [-sin a   cos a ] [y]
/// ```
///
/// applied to coordinates relative to the pivot. With `y` pointing down a
/// positive angle turns content counterclockwise on screen. Destination
/// pixels are filled by inverse mapping, so the map stores both pivots.
#[derive(Debug, Clone, Copy)]
pub struct RotationMap {
    sin: f64,
    cos: f64,
    src_pivot: (f64, f64),
    dst_pivot: (f64, f64),
}

impl RotationMap {
    pub fn new(alpha_deg: f64, src_pivot: (f64, f64), dst_pivot: (f64, f64)) -> Self {
        let (sin, cos) = rotation_sin_cos(alpha_deg);
        Self {
            sin,
            cos,
            src_pivot,
            dst_pivot,
        }
    }

    /// Forward map: source position to destination position.
    pub fn forward(&self, sx: f64, sy: f64) -> (f64, f64) {
        let (dx, dy) = (sx - self.src_pivot.0, sy - self.src_pivot.1);
        (
            self.cos * dx + self.sin * dy + self.dst_pivot.0,
            -self.sin * dx + self.cos * dy + self.dst_pivot.1,
        )
    }

    /// Inverse map: destination position to the source position it samples.
    #[inline]
    pub fn source_of(&self, x: f64, y: f64) -> (f64, f64) {
        let (dx, dy) = (x - self.dst_pivot.0, y - self.dst_pivot.1);
        (
            self.cos * dx - self.sin * dy + self.src_pivot.0,
            self.sin * dx + self.cos * dy + self.src_pivot.1,
        )
    }
}

/// Bilinear sample at a continuous position, `None` outside the pixel-center
/// hull `[0, w-1] x [0, h-1]`.
#[inline]
pub fn bilinear_sample(img: &ImageView<'_>, x: f64, y: f64) -> Option<f64> {
    let max_x = (img.width - 1) as f64;
    let max_y = (img.height - 1) as f64;
    if !(0.0..=max_x).contains(&x) || !(0.0..=max_y).contains(&y) {
        return None;
    }
    let x0 = x.floor();
    let y0 = y.floor();
    let fx = x - x0;
    let fy = y - y0;
    let (x0, y0) = (x0 as usize, y0 as usize);
    let x1 = (x0 + 1).min(img.width - 1);
    let y1 = (y0 + 1).min(img.height - 1);
    let top = if fx == 0.0 {
        img.get(x0, y0)
    } else {
        img.get(x0, y0) * (1.0 - fx) + img.get(x1, y0) * fx
    };
    if fy == 0.0 {
        return Some(top);
    }
    let bottom = if fx == 0.0 {
        img.get(x0, y1)
    } else {
        img.get(x0, y1) * (1.0 - fx) + img.get(x1, y1) * fx
    };
    Some(top * (1.0 - fy) + bottom * fy)
}

/// Placement of a patch on its rotation canvas: integer offset of the patch's
/// top-left corner and the rotation pivot (patch center) in canvas pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct CanvasLayout {
    pub side: usize,
    pub offset: (usize, usize),
    pub pivot: (f64, f64),
}

impl CanvasLayout {
    pub fn for_patch(width: usize, height: usize) -> Self {
        let side = canvas_side(width, height);
        let offset = ((side - width) / 2, (side - height) / 2);
        Self {
            side,
            offset,
            pivot: (
                offset.0 as f64 + (width as f64 - 1.0) / 2.0,
                offset.1 as f64 + (height as f64 - 1.0) / 2.0,
            ),
        }
    }
}

/// Rotated samples of `patch` on its canvas; `None` where the inverse map
/// falls outside the source.
pub fn warp_rotate_support(patch: &Patch, alpha_deg: f64) -> Vec<Option<f64>> {
    let layout = CanvasLayout::for_patch(patch.width(), patch.height());
    let src_pivot = (
        (patch.width() as f64 - 1.0) / 2.0,
        (patch.height() as f64 - 1.0) / 2.0,
    );
    let map = RotationMap::new(alpha_deg, src_pivot, layout.pivot);
    let view = patch.view();
    let side = layout.side;
    let mut out = Vec::with_capacity(side * side);
    for y in 0..side {
        for x in 0..side {
            let (sx, sy) = map.source_of(x as f64, y as f64);
            out.push(bilinear_sample(&view, sx, sy));
        }
    }
    out
}

/// Rotate `patch` by `alpha_deg` about its center onto the square canvas.
/// Canvas pixels with no source support take the source mean, which
/// contributes nothing to a zero-mean correlation.
pub fn warp_rotate(patch: &Patch, alpha_deg: f64) -> Patch {
    let layout = CanvasLayout::for_patch(patch.width(), patch.height());
    let fill = patch.mean();
    let pixels = warp_rotate_support(patch, alpha_deg)
        .into_iter()
        .map(|v| v.unwrap_or(fill))
        .collect();
    let (ox, oy) = patch.origin();
    Patch::from_canvas(
        layout.side,
        pixels,
        (ox - layout.offset.0 as i64, oy - layout.offset.1 as i64),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_patch(w: usize, h: usize, seed: u64) -> Patch {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Patch::new(
            w,
            h,
            (0..w * h).map(|_| rng.gen_range(0.0..255.0f64).round()).collect(),
            (0, 0),
        )
        .unwrap()
    }

    #[test]
    fn canvas_sides() {
        assert_eq!(canvas_side(8, 8), 12);
        assert_eq!(canvas_side(3, 4), 5);
        assert_eq!(canvas_side(20, 22), 30);
        assert_eq!(canvas_side(27, 28), 39);
        assert_eq!(canvas_side(38, 30), 49);
        assert_eq!(canvas_side(30, 33), 45);
    }

    #[test]
    fn zero_rotation_is_identity_on_canvas() {
        let p = random_patch(7, 5, 1);
        let w = warp_rotate(&p, 0.0);
        let layout = CanvasLayout::for_patch(7, 5);
        let (ox, oy) = layout.offset;
        for y in 0..w.height() {
            for x in 0..w.width() {
                let got = w.pixels()[y * w.width() + x];
                let inside = x >= ox && x < ox + 7 && y >= oy && y < oy + 5;
                let expect = if inside {
                    p.pixels()[(y - oy) * 7 + (x - ox)]
                } else {
                    p.mean()
                };
                assert_eq!(got, expect, "({x},{y})");
            }
        }
    }

    // Quarter turns as pure index permutations about the patch center:
    // destination (X, Y) reads source (cx - (Y - cy), cy + (X - cx)) for 90,
    // and the analogous permutations for 180 and 270.
    fn quarter_turn_oracle(p: &Patch, quarter: u32) -> Vec<f64> {
        let n = p.width();
        let layout = CanvasLayout::for_patch(n, n);
        let side = layout.side as i64;
        let off = layout.offset.0 as i64;
        let last = n as i64 - 1;
        let mut out = vec![p.mean(); (side * side) as usize];
        for sy in 0..n as i64 {
            for sx in 0..n as i64 {
                let (dx, dy) = match quarter {
                    1 => (sy, last - sx),
                    2 => (last - sx, last - sy),
                    3 => (last - sy, sx),
                    _ => (sx, sy),
                };
                out[((dy + off) * side + dx + off) as usize] = p.pixels()[(sy * n as i64 + sx) as usize];
            }
        }
        out
    }

    #[test]
    fn quarter_turns_match_permutation_oracle() {
        let p = random_patch(8, 8, 2);
        for q in 1..=3u32 {
            let w = warp_rotate(&p, 90.0 * q as f64);
            assert_eq!(w.pixels(), quarter_turn_oracle(&p, q).as_slice(), "quarter {q}");
        }
    }

    #[test]
    fn ninety_degrees_moves_right_edge_to_top() {
        // Pins the direction: the source's right column becomes the top row.
        let mut px = vec![10.0; 16];
        for y in 0..4 {
            px[y * 4 + 3] = 200.0;
        }
        let p = Patch::new(4, 4, px, (0, 0)).unwrap();
        let w = warp_rotate(&p, 90.0);
        let layout = CanvasLayout::for_patch(4, 4);
        let (ox, oy) = layout.offset;
        for x in 0..4 {
            assert_eq!(w.pixels()[oy * w.width() + ox + x], 200.0);
        }
    }

    #[test]
    fn half_turn_twice_is_near_identity() {
        let p = random_patch(9, 9, 3);
        let once = warp_rotate(&p, 180.0);
        let canvas = warp_rotate(&p, 0.0);
        let twice = warp_rotate(&once, 180.0);
        // `twice` lives on the canvas of the canvas; compare the centered region.
        let inner = CanvasLayout::for_patch(once.width(), once.height());
        for y in 0..canvas.height() {
            for x in 0..canvas.width() {
                let a = canvas.pixels()[y * canvas.width() + x];
                let b = twice.pixels()[(y + inner.offset.1) * twice.width() + x + inner.offset.0];
                assert!((a - b).abs() < 1.0);
            }
        }
    }

    #[test]
    fn forward_and_inverse_agree() {
        let map = RotationMap::new(37.0, (3.5, 2.0), (10.0, 10.0));
        let (x, y) = map.forward(1.25, 4.0);
        let (sx, sy) = map.source_of(x, y);
        assert!((sx - 1.25).abs() < 1e-12 && (sy - 4.0).abs() < 1e-12);
    }

    #[test]
    fn bilinear_edges() {
        let data = [0.0, 10.0, 20.0, 30.0];
        let v = ImageView::new(2, 2, &data).unwrap();
        assert_eq!(bilinear_sample(&v, 1.0, 1.0), Some(30.0));
        assert_eq!(bilinear_sample(&v, 0.5, 0.5), Some(15.0));
        assert_eq!(bilinear_sample(&v, -0.01, 0.0), None);
        assert_eq!(bilinear_sample(&v, 0.0, 1.01), None);
    }
}
