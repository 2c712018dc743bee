//! Radial basis function network: k-means centers on [0, 1]-scaled inputs,
//! one shared Gaussian width, output weights by ridge least squares.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::kmeans::kmeans;
use super::linalg::{solve, Scaler};
use super::TrainingSet;
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbfNetwork {
    pub scaler: Scaler,
    pub centers: Vec<f64>,
    pub width: f64,
    /// One weight per center, then the bias.
    pub weights: Vec<f64>,
}

impl RbfNetwork {
    pub fn fit(data: &TrainingSet, centers: usize, ridge: f64, seed: u64) -> Result<Self> {
        let m = data.dims();
        let scaler = Scaler::min_max(data);
        let z = scaler.transform_set(data);
        let k = centers.min(z.len());
        let ctrs = kmeans(z.features(), m, k, seed)?;

        let mut pair_sum = 0.0;
        let mut pairs = 0usize;
        for i in 0..k {
            for j in i + 1..k {
                let d: f64 = (0..m)
                    .map(|f| {
                        let d = ctrs[i * m + f] - ctrs[j * m + f];
                        d * d
                    })
                    .sum();
                pair_sum += libm::sqrt(d);
                pairs += 1;
            }
        }
        let width = if pairs > 0 && pair_sum > 0.0 {
            pair_sum / pairs as f64
        } else {
            1.0
        };

        let mut net = Self {
            scaler,
            centers: ctrs,
            width,
            weights: vec![0.0; k + 1],
        };
        // Normal equations (Phi^T Phi + ridge I) w = Phi^T y.
        let d = k + 1;
        let mut ata = vec![0.0; d * d];
        let mut aty = vec![0.0; d];
        let mut phi = vec![0.0; d];
        for (i, x) in z.rows().enumerate() {
            net.activations(x, &mut phi);
            let y = f64::from(z.label(i));
            for a in 0..d {
                aty[a] += phi[a] * y;
                for b in 0..d {
                    ata[a * d + b] += phi[a] * phi[b];
                }
            }
        }
        for a in 0..d {
            ata[a * d + a] += ridge.max(1e-12);
        }
        net.weights = solve(ata, aty).unwrap_or_else(|| vec![0.0; d]);
        Ok(net)
    }

    /// Writes `[phi_1 .. phi_k, 1]` for an already scaled input.
    fn activations(&self, xs: &[f64], out: &mut [f64]) {
        let m = xs.len();
        let denom = 2.0 * self.width * self.width;
        for (o, c) in out.iter_mut().zip(self.centers.chunks_exact(m)) {
            let d: f64 = c.iter().zip(xs).map(|(a, b)| (a - b) * (a - b)).sum();
            *o = libm::exp(-d / denom);
        }
        let last = out.len() - 1;
        out[last] = 1.0;
    }

    /// Raw least-squares output before clamping.
    pub fn output(&self, x: &[f64]) -> f64 {
        let xs = self.scaler.transform(x);
        let mut phi = vec![0.0; self.weights.len()];
        self.activations(&xs, &mut phi);
        phi.iter().zip(&self.weights).map(|(a, b)| a * b).sum()
    }

    pub fn prob_tree(&self, x: &[f64]) -> f64 {
        self.output(x).clamp(0.0, 1.0)
    }
}
