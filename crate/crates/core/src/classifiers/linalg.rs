//! Small dense helpers: linear solves, logistic function, scalers.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::TrainingSet;

/// Numerically stable logistic function.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
pub fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + libm::log1p(libm::exp(-z))
    } else {
        libm::log1p(libm::exp(z))
    }
}

/// Solves `a x = b` for square row-major `a` by Gaussian elimination with
/// partial pivoting. Returns `None` when a pivot vanishes.
pub fn solve(mut a: Vec<f64>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    debug_assert_eq!(a.len(), n * n);
    for col in 0..n {
        let pivot =
            (col..n).max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))?;
        if a[pivot * n + col].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            b.swap(pivot, col);
        }
        let d = a[col * n + col];
        for row in col + 1..n {
            let f = a[row * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= f * a[col * n + k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = alloc::vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row * n + k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row * n + row];
    }
    Some(x)
}

/// Affine per-feature rescaling `x' = (x - offset) / scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub offset: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Scaler {
    /// Zero mean, unit population standard deviation.
    pub fn standard(data: &TrainingSet) -> Self {
        let m = data.dims();
        let n = data.len() as f64;
        let mut mean = alloc::vec![0.0; m];
        for r in data.rows() {
            for (a, v) in mean.iter_mut().zip(r) {
                *a += v;
            }
        }
        mean.iter_mut().for_each(|a| *a /= n);
        let mut var = alloc::vec![0.0; m];
        for r in data.rows() {
            for ((a, v), mu) in var.iter_mut().zip(r).zip(&mean) {
                *a += (v - mu) * (v - mu);
            }
        }
        let scale = var
            .iter()
            .map(|v| {
                let sd = libm::sqrt(v / n);
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self {
            offset: mean,
            scale,
        }
    }

    /// Maps each feature's training range onto `[0, 1]`.
    pub fn min_max(data: &TrainingSet) -> Self {
        let m = data.dims();
        let mut lo = alloc::vec![f64::INFINITY; m];
        let mut hi = alloc::vec![f64::NEG_INFINITY; m];
        for r in data.rows() {
            for k in 0..m {
                lo[k] = lo[k].min(r[k]);
                hi[k] = hi[k].max(r[k]);
            }
        }
        let scale = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| if h - l > 1e-12 { h - l } else { 1.0 })
            .collect();
        Self { offset: lo, scale }
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            *o = (x[k] - self.offset[k]) / self.scale[k];
        }
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        let mut out = alloc::vec![0.0; x.len()];
        self.apply(x, &mut out);
        out
    }

    pub fn transform_set(&self, data: &TrainingSet) -> TrainingSet {
        data.map_features(|src, dst| self.apply(src, dst))
    }
}

/// Population standard deviation, floored to 1 when degenerate.
pub fn score_scale(scores: &[f64]) -> f64 {
    let n = scores.len() as f64;
    let mean = scores.iter().sum::<f64>() / n;
    let var = scores.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n;
    let sd = libm::sqrt(var);
    if sd > 1e-12 {
        sd
    } else {
        1.0
    }
}
