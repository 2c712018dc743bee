//! Fisher linear discriminant with the threshold halfway between the class centroids.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::linalg::{score_scale, sigmoid, solve};
use super::TrainingSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flda {
    pub direction: Vec<f64>,
    pub offset: f64,
    pub margin_scale: f64,
}

impl Flda {
    pub fn fit(data: &TrainingSet, ridge: f64) -> Self {
        let m = data.dims();
        let counts = data.class_counts();
        let mut means = [vec![0.0; m], vec![0.0; m]];
        for (i, r) in data.rows().enumerate() {
            for (a, v) in means[usize::from(data.label(i))].iter_mut().zip(r) {
                *a += v;
            }
        }
        for c in 0..2 {
            means[c].iter_mut().for_each(|a| *a /= counts[c] as f64);
        }
        // Pooled within-class scatter.
        let mut sw = vec![0.0; m * m];
        for (i, r) in data.rows().enumerate() {
            let mu = &means[usize::from(data.label(i))];
            for a in 0..m {
                let da = r[a] - mu[a];
                for b in 0..m {
                    sw[a * m + b] += da * (r[b] - mu[b]);
                }
            }
        }
        let trace: f64 = (0..m).map(|a| sw[a * m + a]).sum();
        let reg = ridge * (trace / m as f64).max(1.0);
        for a in 0..m {
            sw[a * m + a] += reg.max(1e-12);
        }
        let diff: Vec<f64> = (0..m).map(|a| means[1][a] - means[0][a]).collect();
        let direction = solve(sw, diff.clone()).unwrap_or(diff);
        let mid: f64 = (0..m)
            .map(|a| direction[a] * 0.5 * (means[0][a] + means[1][a]))
            .sum();
        let mut model = Self {
            direction,
            offset: -mid,
            margin_scale: 1.0,
        };
        let margins: Vec<f64> = data.rows().map(|x| model.margin(x)).collect();
        model.margin_scale = score_scale(&margins);
        model
    }

    pub fn margin(&self, x: &[f64]) -> f64 {
        self.direction
            .iter()
            .zip(x)
            .map(|(w, v)| w * v)
            .sum::<f64>()
            + self.offset
    }

    pub fn prob_tree(&self, x: &[f64]) -> f64 {
        sigmoid(self.margin(x) / self.margin_scale)
    }
}
