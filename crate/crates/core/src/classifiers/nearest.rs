//! One-nearest-neighbor on range-normalized features.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::linalg::Scaler;
use super::TrainingSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearestNeighbor {
    pub scaler: Scaler,
    pub points: Vec<f64>,
    pub labels: Vec<u8>,
}

impl NearestNeighbor {
    pub fn fit(data: &TrainingSet) -> Self {
        let scaler = Scaler::min_max(data);
        let z = scaler.transform_set(data);
        Self {
            scaler,
            points: z.features().to_vec(),
            labels: z.labels().to_vec(),
        }
    }

    /// Label of the closest training instance; the first one wins ties.
    pub fn nearest_label(&self, x: &[f64]) -> u8 {
        let xs = self.scaler.transform(x);
        let m = xs.len();
        let mut best = f64::INFINITY;
        let mut label = self.labels[0];
        for (p, &l) in self.points.chunks_exact(m).zip(&self.labels) {
            let mut d = 0.0;
            for (a, b) in p.iter().zip(&xs) {
                d += (a - b) * (a - b);
                if d >= best {
                    break;
                }
            }
            if d < best {
                best = d;
                label = l;
            }
        }
        label
    }

    pub fn prob_tree(&self, x: &[f64]) -> f64 {
        f64::from(self.nearest_label(x))
    }
}
