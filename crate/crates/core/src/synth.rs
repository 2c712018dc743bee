//! Synthetic plantation scenes with exact ground truth.
//!
//! Crowns are green shaded ellipses on a grid, soil is brown with a smooth
//! low-frequency pattern, and every pixel gets additive Gaussian noise.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::imaging::RasterImage;
use crate::seed;
use crate::segmentation::{AnnotationMask, MARK_NON_TREE, MARK_TREE};
use crate::{Error, Result};

pub const TREE_RGB: [f64; 3] = [60.0, 130.0, 60.0];
pub const SOIL_RGB: [f64; 3] = [120.0, 90.0, 60.0];
const CLUTTER_RGB: [[f64; 3]; 3] = [
    [150.0, 145.0, 140.0],
    [75.0, 60.0, 50.0],
    [170.0, 140.0, 95.0],
];

/// Fraction of planted trees whose interiors are annotated as class 1.
pub const ANNOTATED_TREE_FRACTION: f64 = 0.2;
/// Squared normalized radius bounding the annotated part of a crown.
pub const INTERIOR_RHO2: f64 = 0.36;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantationSpec {
    pub rows: usize,
    pub cols: usize,
    pub spacing: f64,
    pub crown_radius_range: (f64, f64),
    /// Largest uniform offset of a center along each axis.
    pub jitter: f64,
    pub failure_prob: f64,
    pub noise_sigma: f64,
    pub clutter_count: usize,
    pub seed: u64,
}

impl Default for PlantationSpec {
    fn default() -> Self {
        Self {
            rows: 20,
            cols: 20,
            spacing: 48.0,
            crown_radius_range: (12.0, 18.0),
            jitter: 2.0,
            failure_prob: 0.05,
            noise_sigma: 20.0,
            clutter_count: 0,
            seed: 0,
        }
    }
}

impl PlantationSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(format!("synth: {msg}")));
        let (rmin, rmax) = self.crown_radius_range;
        if self.rows == 0 || self.cols == 0 {
            return bad("rows and cols must be at least 1");
        }
        if !(rmin > 0.0 && rmin <= rmax && rmax.is_finite()) {
            return bad("crown_radius_range must satisfy 0 < min <= max");
        }
        if !(self.spacing > 2.0 * rmax) || !self.spacing.is_finite() {
            return bad("spacing must exceed twice the largest crown radius");
        }
        if !(self.jitter >= 0.0) || !self.jitter.is_finite() {
            return bad("jitter must be >= 0");
        }
        if !(0.0..=1.0).contains(&self.failure_prob) {
            return bad("failure_prob must lie in [0, 1]");
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return bad("noise_sigma must be >= 0");
        }
        let (w, h) = self.dimensions();
        if w.saturating_mul(h) > 1 << 28 {
            return bad("image too large");
        }
        Ok(())
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (
            libm::ceil(self.cols as f64 * self.spacing) as usize,
            libm::ceil(self.rows as f64 * self.spacing) as usize,
        )
    }

    /// Unjittered center of grid cell (row, col).
    pub fn grid_center(&self, row: usize, col: usize) -> (f64, f64) {
        (
            self.spacing / 2.0 + col as f64 * self.spacing,
            self.spacing / 2.0 + row as f64 * self.spacing,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub centers: Vec<(f64, f64)>,
    pub count: usize,
}

impl GroundTruth {
    pub fn new(centers: Vec<(f64, f64)>) -> Self {
        Self {
            count: centers.len(),
            centers,
        }
    }
}

/// A rendered crown: center, semi-axes and orientation in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crown {
    pub x: f64,
    pub y: f64,
    pub a: f64,
    pub b: f64,
    pub theta: f64,
}

impl Crown {
    /// Squared normalized radius; ≤ 1 inside the ellipse.
    pub fn rho2(&self, px: f64, py: f64) -> f64 {
        let (dx, dy) = (px - self.x, py - self.y);
        let (s, c) = (libm::sin(self.theta), libm::cos(self.theta));
        let u = dx * c + dy * s;
        let v = -dx * s + dy * c;
        (u / self.a) * (u / self.a) + (v / self.b) * (v / self.b)
    }

    /// Pixel bounds covering the ellipse grown by `margin`, clipped to the image.
    fn bounds(&self, margin: f64, w: usize, h: usize) -> (usize, usize, usize, usize) {
        let r = self.a.max(self.b) + margin;
        let lo = |v: f64| libm::floor(v - r).max(0.0) as usize;
        let hi = |v: f64, n: usize| (libm::ceil(v + r).max(0.0) as usize).min(n.saturating_sub(1));
        (lo(self.x), lo(self.y), hi(self.x, w), hi(self.y, h))
    }
}

/// Crown layout for a spec: planted trees in row-major grid order.
pub fn layout(spec: &PlantationSpec) -> Result<Vec<Crown>> {
    spec.validate()?;
    let mut rng = seed::rng(seed::derive(spec.seed, "synth.layout"));
    let (rmin, rmax) = spec.crown_radius_range;
    let mut crowns = Vec::new();
    for row in 0..spec.rows {
        for col in 0..spec.cols {
            // Draw everything for every cell so one failure does not shift the rest.
            let failed = rng.random::<f64>() < spec.failure_prob;
            let jx = spec.jitter * (2.0 * rng.random::<f64>() - 1.0);
            let jy = spec.jitter * (2.0 * rng.random::<f64>() - 1.0);
            let a = rmin + (rmax - rmin) * rng.random::<f64>();
            let b = a * (0.85 + 0.15 * rng.random::<f64>());
            let theta = PI * rng.random::<f64>();
            if failed {
                continue;
            }
            let (cx, cy) = spec.grid_center(row, col);
            crowns.push(Crown {
                x: cx + jx,
                y: cy + jy,
                a,
                b,
                theta,
            });
        }
    }
    Ok(crowns)
}

fn soil_pattern(rng: &mut ChaCha8Rng) -> impl Fn(f64, f64) -> f64 {
    let waves: Vec<(f64, f64, f64, f64)> = (0..3)
        .map(|_| {
            let period = 40.0 + 120.0 * rng.random::<f64>();
            let dir = 2.0 * PI * rng.random::<f64>();
            let k = 2.0 * PI / period;
            (
                k * libm::cos(dir),
                k * libm::sin(dir),
                2.0 * PI * rng.random::<f64>(),
                4.0 + 4.0 * rng.random::<f64>(),
            )
        })
        .collect();
    move |x, y| {
        waves
            .iter()
            .map(|&(kx, ky, phase, amp)| amp * libm::sin(kx * x + ky * y + phase))
            .sum()
    }
}

fn to_u8(v: f64) -> u8 {
    libm::round(v.clamp(0.0, 255.0)) as u8
}

/// Renders the scene, its ground truth and a sparse training annotation.
///
/// Class 1 covers the inner 60% (by radius) of a random fifth of the planted
/// crowns; class 2 covers an equal number of random soil pixels at least
/// 4 px outside every crown, plus one in five clutter blobs.
pub fn generate(spec: &PlantationSpec) -> Result<(RasterImage, GroundTruth, AnnotationMask)> {
    let crowns = layout(spec)?;
    let (w, h) = spec.dimensions();
    let mut rng = seed::rng(seed::derive(spec.seed, "synth.texture"));

    const SOIL: u32 = 0;
    const CLUTTER: u32 = u32::MAX;
    let mut owner = vec![SOIL; w * h];
    // Distance band around crowns kept free of soil annotations.
    let mut near_crown = vec![false; w * h];
    let mut colour = vec![[0.0f64; 3]; w * h];

    let pattern = soil_pattern(&mut rng);
    for y in 0..h {
        for x in 0..w {
            let t = pattern(x as f64, y as f64);
            colour[y * w + x] = [
                SOIL_RGB[0] + t,
                SOIL_RGB[1] + 0.8 * t,
                SOIL_RGB[2] + 0.6 * t,
            ];
        }
    }

    for (k, crown) in crowns.iter().enumerate() {
        let tint = 12.0 * (2.0 * rng.random::<f64>() - 1.0);
        let (x0, y0, x1, y1) = crown.bounds(4.0, w, h);
        let grown = Crown {
            a: crown.a + 4.0,
            b: crown.b + 4.0,
            ..*crown
        };
        for y in y0..=y1 {
            for x in x0..=x1 {
                let (px, py) = (x as f64, y as f64);
                let i = y * w + x;
                if grown.rho2(px, py) <= 1.0 {
                    near_crown[i] = true;
                }
                let rho2 = crown.rho2(px, py);
                if rho2 <= 1.0 {
                    owner[i] = k as u32 + 1;
                    let shade = 1.0 - 0.3 * rho2;
                    colour[i] = [
                        TREE_RGB[0] * shade + tint,
                        TREE_RGB[1] * shade + tint,
                        TREE_RGB[2] * shade + tint,
                    ];
                }
            }
        }
    }

    let mut clutter_pixels: Vec<Vec<usize>> = Vec::new();
    let (rmin, _) = spec.crown_radius_range;
    let mut attempts = 0;
    while clutter_pixels.len() < spec.clutter_count && attempts < 100 * spec.clutter_count.max(1) {
        attempts += 1;
        let r = 0.25 * rmin + 0.35 * rmin * rng.random::<f64>();
        let blob = Crown {
            x: w as f64 * rng.random::<f64>(),
            y: h as f64 * rng.random::<f64>(),
            a: r,
            b: r * (0.6 + 0.4 * rng.random::<f64>()),
            theta: PI * rng.random::<f64>(),
        };
        let rgb = CLUTTER_RGB[rng.random_range(0..CLUTTER_RGB.len())];
        let (x0, y0, x1, y1) = blob.bounds(0.0, w, h);
        let inside: Vec<usize> = (y0..=y1)
            .flat_map(|y| (x0..=x1).map(move |x| (x, y)))
            .filter(|&(x, y)| blob.rho2(x as f64, y as f64) <= 1.0)
            .map(|(x, y)| y * w + x)
            .collect();
        if inside.is_empty() || inside.iter().any(|&i| near_crown[i] || owner[i] != SOIL) {
            continue;
        }
        for &i in &inside {
            owner[i] = CLUTTER;
            colour[i] = rgb;
        }
        clutter_pixels.push(inside);
    }

    if spec.noise_sigma > 0.0 {
        let noise = Normal::new(0.0, spec.noise_sigma).expect("validated sigma");
        let mut nrng = seed::rng(seed::derive(spec.seed, "synth.noise"));
        for c in colour.iter_mut() {
            for v in c.iter_mut() {
                *v += noise.sample(&mut nrng);
            }
        }
    }
    let pixels: Vec<[u8; 3]> = colour
        .iter()
        .map(|c| [to_u8(c[0]), to_u8(c[1]), to_u8(c[2])])
        .collect();
    let image = RasterImage::new(w, h, pixels)?;

    let mut marks = vec![0u8; w * h];
    let mut arng = seed::rng(seed::derive(spec.seed, "synth.annotation"));
    if !crowns.is_empty() {
        let n = libm::ceil(ANNOTATED_TREE_FRACTION * crowns.len() as f64) as usize;
        let mut chosen = sample(&mut arng, crowns.len(), n).into_vec();
        chosen.sort_unstable();
        for k in chosen {
            let c = crowns[k];
            let (x0, y0, x1, y1) = c.bounds(0.0, w, h);
            for y in y0..=y1 {
                for x in x0..=x1 {
                    if c.rho2(x as f64, y as f64) <= INTERIOR_RHO2 {
                        marks[y * w + x] = MARK_TREE;
                    }
                }
            }
        }
    }
    let tree_marks = marks.iter().filter(|&&m| m == MARK_TREE).count();
    let soil: Vec<usize> = (0..w * h)
        .filter(|&i| owner[i] == SOIL && !near_crown[i])
        .collect();
    let want = tree_marks.max(500).min(soil.len());
    let mut picked = sample(&mut arng, soil.len(), want).into_vec();
    picked.sort_unstable();
    for p in picked {
        marks[soil[p]] = MARK_NON_TREE;
    }
    for (k, blob) in clutter_pixels.iter().enumerate() {
        if k % 5 == 0 {
            for &i in blob {
                marks[i] = MARK_NON_TREE;
            }
        }
    }
    let annotation = AnnotationMask::new(w, h, marks)?;

    let truth = GroundTruth::new(crowns.iter().map(|c| (c.x, c.y)).collect());
    Ok((image, truth, annotation))
}
