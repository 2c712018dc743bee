//! Blob measurement: centroid, moment ellipse and minimum-radius filtering.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::imaging::LabelMap;
use crate::segmentation::ProbabilityMap;
use crate::{Error, Result};

/// One counted crown candidate. Coordinates are in pixels with pixel centers at integers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub id: u32,
    pub centroid_x: f64,
    pub centroid_y: f64,
    pub area: f64,
    /// Full axis lengths.
    pub major: f64,
    pub minor: f64,
    /// Degrees in `[0, 180)`.
    pub angle: f64,
    pub score: f64,
}

impl Detection {
    /// Radius of the circle with the same area.
    pub fn equivalent_radius(&self) -> f64 {
        equivalent_radius(self.area)
    }

    pub fn distance_to(&self, other: &Detection) -> f64 {
        libm::hypot(
            self.centroid_x - other.centroid_x,
            self.centroid_y - other.centroid_y,
        )
    }
}

pub fn equivalent_radius(area: f64) -> f64 {
    libm::sqrt(area / PI)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    pub major: f64,
    pub minor: f64,
    pub angle: f64,
}

/// Ellipse from normalized central second moments of `n` unit pixels.
fn ellipse_from_moments(n: f64, mu20: f64, mu02: f64, mu11: f64) -> Ellipse {
    // Each pixel is a unit square, not a point.
    let (a, c) = (mu20 + 1.0 / 12.0, mu02 + 1.0 / 12.0);
    let half_sum = (a + c) / 2.0;
    let root = libm::hypot((a - c) / 2.0, mu11);
    let l1 = half_sum + root;
    let l2 = (half_sum - root).max(f64::MIN_POSITIVE);
    let (mut semi_major, mut semi_minor) = (2.0 * libm::sqrt(l1), 2.0 * libm::sqrt(l2));
    let scale = libm::sqrt(n / (PI * semi_major * semi_minor));
    semi_major *= scale;
    semi_minor *= scale;
    let mut angle = 0.5 * libm::atan2(2.0 * mu11, a - c) * 180.0 / PI;
    if angle < 0.0 {
        angle += 180.0;
    }
    if angle >= 180.0 {
        angle -= 180.0;
    }
    Ellipse {
        major: 2.0 * semi_major,
        minor: 2.0 * semi_minor,
        angle,
    }
}

/// Moment ellipse whose area equals the pixel count.
pub fn fit_ellipse(pixels: &[(i64, i64)]) -> Result<Ellipse> {
    if pixels.is_empty() {
        return Err(Error::Precondition(
            "fit_ellipse needs at least one pixel".into(),
        ));
    }
    let n = pixels.len() as f64;
    let mx = pixels.iter().map(|p| p.0 as f64).sum::<f64>() / n;
    let my = pixels.iter().map(|p| p.1 as f64).sum::<f64>() / n;
    let (mut s20, mut s02, mut s11) = (0.0, 0.0, 0.0);
    for &(x, y) in pixels {
        let (dx, dy) = (x as f64 - mx, y as f64 - my);
        s20 += dx * dx;
        s02 += dy * dy;
        s11 += dx * dy;
    }
    Ok(ellipse_from_moments(n, s20 / n, s02 / n, s11 / n))
}

#[derive(Clone, Default)]
struct Acc {
    n: f64,
    sx: f64,
    sy: f64,
    s20: f64,
    s02: f64,
    s11: f64,
    sp: f64,
    first: usize,
}

/// Measures every labeled blob and keeps those with equivalent radius ≥ `min_radius`.
///
/// Ids are renumbered `1..=K` by the raster position of each kept blob's first pixel.
pub fn analyze_particles(
    labels: &LabelMap,
    min_radius: f64,
    probability: Option<&ProbabilityMap>,
) -> Result<Vec<Detection>> {
    if !(min_radius >= 0.0) || !min_radius.is_finite() {
        return Err(Error::Precondition(
            "min_radius must be a finite value >= 0".into(),
        ));
    }
    let (w, h) = (labels.width(), labels.height());
    if let Some(p) = probability {
        if (p.width(), p.height()) != (w, h) {
            return Err(Error::Dimensions(format!(
                "probability map {}x{} does not match labels {w}x{h}",
                p.width(),
                p.height()
            )));
        }
    }
    let k = labels.count() as usize;
    let mut acc = vec![
        Acc {
            first: usize::MAX,
            ..Acc::default()
        };
        k
    ];
    for (i, &l) in labels.labels().iter().enumerate() {
        if l == 0 {
            continue;
        }
        let a = &mut acc[l as usize - 1];
        a.first = a.first.min(i);
        a.n += 1.0;
        a.sx += (i % w) as f64;
        a.sy += (i / w) as f64;
        a.sp += probability.map_or(1.0, |p| p.values()[i]);
    }
    let centers: Vec<(f64, f64)> = acc.iter().map(|a| (a.sx / a.n, a.sy / a.n)).collect();
    for (i, &l) in labels.labels().iter().enumerate() {
        if l == 0 {
            continue;
        }
        let a = &mut acc[l as usize - 1];
        let (cx, cy) = centers[l as usize - 1];
        let (dx, dy) = ((i % w) as f64 - cx, (i / w) as f64 - cy);
        a.s20 += dx * dx;
        a.s02 += dy * dy;
        a.s11 += dx * dy;
    }
    let mut kept: Vec<(usize, Detection)> = acc
        .iter()
        .zip(&centers)
        .filter(|(a, _)| a.n > 0.0 && equivalent_radius(a.n) >= min_radius)
        .map(|(a, &(cx, cy))| {
            let e = ellipse_from_moments(a.n, a.s20 / a.n, a.s02 / a.n, a.s11 / a.n);
            let det = Detection {
                id: 0,
                centroid_x: cx,
                centroid_y: cy,
                area: a.n,
                major: e.major,
                minor: e.minor,
                angle: e.angle,
                score: (a.sp / a.n).clamp(0.0, 1.0),
            };
            (a.first, det)
        })
        .collect();
    kept.sort_by_key(|(first, _)| *first);
    Ok(kept
        .into_iter()
        .enumerate()
        .map(|(i, (_, mut d))| {
            d.id = i as u32 + 1;
            d
        })
        .collect())
}
