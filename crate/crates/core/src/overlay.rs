//! Detection overlays: red ellipse outlines with yellow ids.

use crate::imaging::RasterImage;
use crate::particles::Detection;

pub const OUTLINE_RGB: [u8; 3] = [255, 0, 0];
pub const LABEL_RGB: [u8; 3] = [255, 255, 0];

// 3x5 digits, one row per entry, bit 2 = left column.
const DIGITS: [[u8; 5]; 10] = [
    [7, 5, 5, 5, 7],
    [2, 6, 2, 2, 7],
    [7, 1, 7, 4, 7],
    [7, 1, 7, 1, 7],
    [5, 5, 7, 1, 1],
    [7, 4, 7, 1, 7],
    [7, 4, 7, 5, 7],
    [7, 1, 1, 1, 1],
    [7, 5, 7, 5, 7],
    [7, 5, 7, 1, 7],
];

fn inside(d: &Detection, x: f64, y: f64) -> bool {
    let t = d.angle.to_radians();
    let (s, c) = (libm::sin(t), libm::cos(t));
    let (dx, dy) = (x - d.centroid_x, y - d.centroid_y);
    let u = (dx * c + dy * s) / (d.major / 2.0);
    let v = (-dx * s + dy * c) / (d.minor / 2.0);
    u * u + v * v <= 1.0
}

/// Inclusive pixel box around the ellipse grown by `pad`, clipped to the image.
fn bounds(d: &Detection, pad: f64, w: usize, h: usize) -> Option<(usize, usize, usize, usize)> {
    let r = d.major / 2.0 + pad;
    let x0 = libm::floor(d.centroid_x - r).max(0.0);
    let y0 = libm::floor(d.centroid_y - r).max(0.0);
    let x1 = libm::ceil(d.centroid_x + r).min(w as f64 - 1.0);
    let y1 = libm::ceil(d.centroid_y + r).min(h as f64 - 1.0);
    (x0 <= x1 && y0 <= y1).then_some((x0 as usize, y0 as usize, x1 as usize, y1 as usize))
}

/// Colours the boundary pixels of the detection's ellipse.
pub fn draw_outline(image: &mut RasterImage, d: &Detection, rgb: [u8; 3]) {
    let (w, h) = (image.width(), image.height());
    let Some((x0, y0, x1, y1)) = bounds(d, 1.0, w, h) else {
        return;
    };
    for y in y0..=y1 {
        for x in x0..=x1 {
            let (fx, fy) = (x as f64, y as f64);
            if !inside(d, fx, fy) {
                continue;
            }
            let edge = [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)]
                .iter()
                .any(|(dx, dy)| !inside(d, fx + dx, fy + dy));
            if edge {
                image.set(x, y, rgb);
            }
        }
    }
}

/// Writes `id` centred on the detection, clipped to its box plus 2 px.
pub fn draw_id(image: &mut RasterImage, d: &Detection, rgb: [u8; 3]) {
    let (w, h) = (image.width(), image.height());
    let Some((bx0, by0, bx1, by1)) = bounds(d, 2.0, w, h) else {
        return;
    };
    let text = alloc::format!("{}", d.id);
    let width = 4 * text.len() as i64 - 1;
    let left = libm::round(d.centroid_x) as i64 - width / 2;
    let top = libm::round(d.centroid_y) as i64 - 2;
    for (k, ch) in text.bytes().enumerate() {
        let glyph = DIGITS[(ch - b'0') as usize];
        for (row, bits) in glyph.iter().enumerate() {
            for col in 0..3 {
                if bits & (4 >> col) == 0 {
                    continue;
                }
                let x = left + 4 * k as i64 + col;
                let y = top + row as i64;
                if x >= bx0 as i64 && x <= bx1 as i64 && y >= by0 as i64 && y <= by1 as i64 {
                    image.set(x as usize, y as usize, rgb);
                }
            }
        }
    }
}

pub fn render_overlay(image: &RasterImage, detections: &[Detection]) -> RasterImage {
    let mut out = image.clone();
    for d in detections {
        draw_outline(&mut out, d, OUTLINE_RGB);
    }
    for d in detections {
        draw_id(&mut out, d, LABEL_RGB);
    }
    out
}
