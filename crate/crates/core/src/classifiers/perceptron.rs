//! Voted perceptron on standardized features with a bias input.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::linalg::{score_scale, sigmoid, Scaler};
use super::TrainingSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VotedPerceptron {
    pub scaler: Scaler,
    /// Prediction vectors (m weights + bias each), flattened.
    pub vectors: Vec<f64>,
    /// Survival count of each vector.
    pub votes: Vec<f64>,
    /// Training-set standard deviation of the vote margin.
    pub margin_scale: f64,
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl VotedPerceptron {
    pub fn fit(data: &TrainingSet, epochs: usize, max_perceptrons: usize, seed: u64) -> Self {
        let scaler = Scaler::standard(data);
        let z = scaler.transform_set(data);
        let d = data.dims() + 1;
        let mut rng = crate::seed::rng(seed);
        let mut order: Vec<usize> = (0..z.len()).collect();
        let mut v = vec![0.0; d];
        let mut c = 0.0;
        let mut vectors = Vec::new();
        let mut votes = Vec::new();
        'outer: for _ in 0..epochs {
            order.shuffle(&mut rng);
            for &i in &order {
                let x = z.row(i);
                let y = if z.label(i) == 1 { 1.0 } else { -1.0 };
                let dot = v[..d - 1].iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + v[d - 1];
                if y * dot <= 0.0 {
                    if c > 0.0 {
                        vectors.extend_from_slice(&v);
                        votes.push(c);
                        if votes.len() >= max_perceptrons {
                            c = 0.0;
                            break 'outer;
                        }
                    }
                    for (a, b) in v[..d - 1].iter_mut().zip(x) {
                        *a += y * b;
                    }
                    v[d - 1] += y;
                    c = 1.0;
                } else {
                    c += 1.0;
                }
            }
        }
        if c > 0.0 {
            vectors.extend_from_slice(&v);
            votes.push(c);
        }
        let mut model = Self {
            scaler,
            vectors,
            votes,
            margin_scale: 1.0,
        };
        let margins: Vec<f64> = data.rows().map(|x| model.margin(x)).collect();
        model.margin_scale = score_scale(&margins);
        model
    }

    /// Vote-weighted sum of perceptron signs.
    pub fn margin(&self, x: &[f64]) -> f64 {
        let xs = self.scaler.transform(x);
        let d = xs.len() + 1;
        self.vectors
            .chunks_exact(d)
            .zip(&self.votes)
            .map(|(v, c)| {
                let dot = v[..d - 1].iter().zip(&xs).map(|(a, b)| a * b).sum::<f64>() + v[d - 1];
                c * sign(dot)
            })
            .sum()
    }

    pub fn prob_tree(&self, x: &[f64]) -> f64 {
        sigmoid(self.margin(x) / self.margin_scale)
    }
}
