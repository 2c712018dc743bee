//! Per-pixel feature bank: color (RGB, HSI), multiscale Gaussian smoothing,
//! Sobel gradient magnitude and windowed intensity statistics.
//!
//! All neighborhood operators clamp coordinates to the image edge.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::imaging::{GrayPlane, RasterImage};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub gaussian_sigmas: Vec<f64>,
    pub stat_windows: Vec<usize>,
    pub include_hsi: bool,
    pub include_gradient: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            gaussian_sigmas: vec![1.0, 2.0, 4.0, 8.0],
            stat_windows: vec![3, 5, 9],
            include_hsi: true,
            include_gradient: true,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        for (i, &s) in self.gaussian_sigmas.iter().enumerate() {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "gaussian sigma {s} must be positive"
                )));
            }
            if self.gaussian_sigmas[..i].contains(&s) {
                return Err(Error::InvalidConfig(format!(
                    "duplicate gaussian sigma {s}"
                )));
            }
        }
        for (i, &w) in self.stat_windows.iter().enumerate() {
            check_window(w)?;
            if self.stat_windows[..i].contains(&w) {
                return Err(Error::InvalidConfig(format!("duplicate window {w}")));
            }
        }
        Ok(())
    }

    /// Number of planes `build_stack` produces for this configuration.
    pub fn feature_count(&self) -> usize {
        let hsi = if self.include_hsi { 3 } else { 0 };
        let per_sigma = if self.include_gradient { 2 } else { 1 };
        3 + hsi + per_sigma * self.gaussian_sigmas.len() + 4 * self.stat_windows.len()
    }
}

fn check_window(w: usize) -> Result<()> {
    if w < 3 || w.is_multiple_of(2) {
        return Err(Error::Precondition(format!(
            "window {w} must be odd and at least 3"
        )));
    }
    Ok(())
}

/// Named feature planes of identical size, in a fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStack {
    width: usize,
    height: usize,
    names: Vec<String>,
    planes: Vec<GrayPlane>,
}

impl FeatureStack {
    pub fn new(planes: Vec<(String, GrayPlane)>) -> Result<Self> {
        let (first_w, first_h) = match planes.first() {
            Some((_, p)) => (p.width(), p.height()),
            None => {
                return Err(Error::Dimensions(
                    "feature stack needs at least one plane".into(),
                ))
            }
        };
        let mut names = Vec::with_capacity(planes.len());
        let mut out = Vec::with_capacity(planes.len());
        for (name, plane) in planes {
            if plane.width() != first_w || plane.height() != first_h {
                return Err(Error::Dimensions(format!(
                    "plane `{name}` is {}x{}, expected {first_w}x{first_h}",
                    plane.width(),
                    plane.height()
                )));
            }
            if names.contains(&name) {
                return Err(Error::InvalidConfig(format!(
                    "duplicate plane name `{name}`"
                )));
            }
            names.push(name);
            out.push(plane);
        }
        Ok(Self {
            width: first_w,
            height: first_h,
            names,
            planes: out,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn feature_count(&self) -> usize {
        self.planes.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn planes(&self) -> &[GrayPlane] {
        &self.planes
    }

    pub fn plane(&self, name: &str) -> Option<&GrayPlane> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| &self.planes[i])
    }

    /// Writes the feature vector of pixel `index` (row-major) into `out`.
    pub fn vector_into(&self, index: usize, out: &mut [f64]) {
        for (o, p) in out.iter_mut().zip(&self.planes) {
            *o = p.values()[index];
        }
    }

    pub fn vector(&self, x: usize, y: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.planes.len()];
        self.vector_into(y * self.width + x, &mut v);
        v
    }
}

/// RGB to (hue in degrees `[0, 360)`, saturation `[0, 1]`, intensity `[0, 1]`).
pub fn rgb_to_hsi(r: u8, g: u8, b: u8) -> (f64, f64, f64) {
    let (rf, gf, bf) = (f64::from(r), f64::from(g), f64::from(b));
    let sum = rf + gf + bf;
    let i = sum / (3.0 * 255.0);
    let mean = sum / 3.0;
    let min = rf.min(gf).min(bf);
    let s = if mean > 0.0 { 1.0 - min / mean } else { 0.0 };
    if s <= 0.0 {
        return (0.0, 0.0, i);
    }
    let num = 0.5 * ((rf - gf) + (rf - bf));
    let den = libm::sqrt((rf - gf) * (rf - gf) + (rf - bf) * (gf - bf));
    let theta = if den > 0.0 {
        libm::acos((num / den).clamp(-1.0, 1.0)).to_degrees()
    } else {
        0.0
    };
    let mut h = if bf <= gf { theta } else { 360.0 - theta };
    if h >= 360.0 {
        h -= 360.0;
    }
    (h, s, i)
}

/// Normalized 1-D Gaussian weights with radius `ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Result<Vec<f64>> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::Precondition(format!(
            "gaussian sigma {sigma} must be positive"
        )));
    }
    let radius = libm::ceil(3.0 * sigma) as isize;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|d| {
            let d = d as f64;
            libm::exp(-(d * d) / (2.0 * sigma * sigma))
        })
        .collect();
    let total: f64 = k.iter().sum();
    for w in &mut k {
        *w /= total;
    }
    Ok(k)
}

#[inline]
fn clamp_index(i: isize, n: usize) -> usize {
    i.clamp(0, n as isize - 1) as usize
}

/// Applies a 1-D reduction along rows (`horizontal`) or columns over `-radius..=radius`.
fn pass<F>(
    src: &[f64],
    width: usize,
    height: usize,
    radius: usize,
    horizontal: bool,
    mut reduce: F,
) -> Vec<f64>
where
    F: FnMut(&mut dyn Iterator<Item = (usize, f64)>) -> f64,
{
    let r = radius as isize;
    let mut out = Vec::with_capacity(src.len());
    for y in 0..height {
        for x in 0..width {
            let mut it = (-r..=r).enumerate().map(|(k, d)| {
                let v = if horizontal {
                    src[y * width + clamp_index(x as isize + d, width)]
                } else {
                    src[clamp_index(y as isize + d, height) * width + x]
                };
                (k, v)
            });
            out.push(reduce(&mut it));
        }
    }
    out
}

pub fn gaussian_blur(plane: &GrayPlane, sigma: f64) -> Result<GrayPlane> {
    let kernel = gaussian_kernel(sigma)?;
    let radius = kernel.len() / 2;
    let (w, h) = (plane.width(), plane.height());
    let conv = |it: &mut dyn Iterator<Item = (usize, f64)>| it.map(|(k, v)| kernel[k] * v).sum();
    let tmp = pass(plane.values(), w, h, radius, true, conv);
    let out = pass(&tmp, w, h, radius, false, conv);
    Ok(GrayPlane::from_parts(w, h, out))
}

/// Gradient magnitude with the unnormalized 3x3 Sobel kernels.
pub fn sobel_magnitude(plane: &GrayPlane) -> GrayPlane {
    let (w, h) = (plane.width(), plane.height());
    let at = |x: isize, y: isize| plane.get(clamp_index(x, w), clamp_index(y, h));
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            let gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
            out.push(libm::sqrt(gx * gx + gy * gy));
        }
    }
    GrayPlane::from_parts(w, h, out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalStats {
    pub mean: GrayPlane,
    /// Population variance.
    pub variance: GrayPlane,
    pub min: GrayPlane,
    pub max: GrayPlane,
}

/// Window statistics over the `window x window` neighborhood of each pixel.
///
/// Clamping acts per axis, so each statistic separates into a row pass and a
/// column pass over the clamped samples.
pub fn local_stats(plane: &GrayPlane, window: usize) -> Result<LocalStats> {
    check_window(window)?;
    let radius = window / 2;
    let (w, h) = (plane.width(), plane.height());
    let n = (window * window) as f64;
    let src = plane.values();
    let sum = |it: &mut dyn Iterator<Item = (usize, f64)>| it.map(|(_, v)| v).sum::<f64>();
    let min =
        |it: &mut dyn Iterator<Item = (usize, f64)>| it.fold(f64::INFINITY, |a, (_, v)| a.min(v));
    let max = |it: &mut dyn Iterator<Item = (usize, f64)>| {
        it.fold(f64::NEG_INFINITY, |a, (_, v)| a.max(v))
    };

    let s1 = pass(
        &pass(src, w, h, radius, true, sum),
        w,
        h,
        radius,
        false,
        sum,
    );
    let squares: Vec<f64> = src.iter().map(|v| v * v).collect();
    let s2 = pass(
        &pass(&squares, w, h, radius, true, sum),
        w,
        h,
        radius,
        false,
        sum,
    );
    let lo = pass(
        &pass(src, w, h, radius, true, min),
        w,
        h,
        radius,
        false,
        min,
    );
    let hi = pass(
        &pass(src, w, h, radius, true, max),
        w,
        h,
        radius,
        false,
        max,
    );

    let mean: Vec<f64> = s1.iter().map(|s| s / n).collect();
    let variance = s2
        .iter()
        .zip(&mean)
        .map(|(s, m)| (s / n - m * m).max(0.0))
        .collect();
    Ok(LocalStats {
        mean: GrayPlane::from_parts(w, h, mean),
        variance: GrayPlane::from_parts(w, h, variance),
        min: GrayPlane::from_parts(w, h, lo),
        max: GrayPlane::from_parts(w, h, hi),
    })
}

fn fmt_param(v: f64) -> String {
    format!("{v}")
}

enum Job {
    Color,
    Hsi,
    Blur(f64),
    Sobel(f64),
    Stats(usize),
}

fn run_job(
    job: &Job,
    image: &RasterImage,
    intensity: &GrayPlane,
) -> Result<Vec<(String, GrayPlane)>> {
    let (w, h) = (image.width(), image.height());
    Ok(match *job {
        Job::Color => vec![
            ("red".into(), image.channel(0)),
            ("green".into(), image.channel(1)),
            ("blue".into(), image.channel(2)),
        ],
        Job::Hsi => {
            let mut hue = Vec::with_capacity(w * h);
            let mut sat = Vec::with_capacity(w * h);
            let mut int = Vec::with_capacity(w * h);
            for p in image.pixels() {
                let (hh, ss, ii) = rgb_to_hsi(p[0], p[1], p[2]);
                hue.push(hh);
                sat.push(ss);
                int.push(ii);
            }
            vec![
                ("hue".into(), GrayPlane::from_parts(w, h, hue)),
                ("saturation".into(), GrayPlane::from_parts(w, h, sat)),
                ("intensity".into(), GrayPlane::from_parts(w, h, int)),
            ]
        }
        Job::Blur(s) => vec![(
            format!("gaussian_s{}", fmt_param(s)),
            gaussian_blur(intensity, s)?,
        )],
        Job::Sobel(s) => vec![(
            format!("sobel_s{}", fmt_param(s)),
            sobel_magnitude(&gaussian_blur(intensity, s)?),
        )],
        Job::Stats(win) => {
            let st = local_stats(intensity, win)?;
            vec![
                (format!("mean_w{win}"), st.mean),
                (format!("variance_w{win}"), st.variance),
                (format!("min_w{win}"), st.min),
                (format!("max_w{win}"), st.max),
            ]
        }
    })
}

/// Builds the feature stack. Plane order: red, green, blue; hue, saturation,
/// intensity (if enabled); one Gaussian-smoothed gray plane per sigma; one
/// Sobel magnitude of each smoothed plane (if enabled); mean, variance, min
/// and max of gray intensity per window.
pub fn build_stack(image: &RasterImage, config: &FeatureConfig) -> Result<FeatureStack> {
    config.validate()?;
    let intensity = image.intensity();
    let mut jobs = vec![Job::Color];
    if config.include_hsi {
        jobs.push(Job::Hsi);
    }
    jobs.extend(config.gaussian_sigmas.iter().map(|&s| Job::Blur(s)));
    if config.include_gradient {
        jobs.extend(config.gaussian_sigmas.iter().map(|&s| Job::Sobel(s)));
    }
    jobs.extend(config.stat_windows.iter().map(|&w| Job::Stats(w)));

    #[cfg(feature = "std")]
    let results: Vec<Result<Vec<(String, GrayPlane)>>> = {
        use rayon::prelude::*;
        jobs.par_iter()
            .map(|j| run_job(j, image, &intensity))
            .collect()
    };
    #[cfg(not(feature = "std"))]
    let results: Vec<Result<Vec<(String, GrayPlane)>>> =
        jobs.iter().map(|j| run_job(j, image, &intensity)).collect();

    let mut planes = Vec::with_capacity(config.feature_count());
    for r in results {
        planes.extend(r?);
    }
    FeatureStack::new(planes)
}
