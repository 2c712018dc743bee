//! Gaussian naive Bayes (batch and Welford-incremental) and multinomial naive Bayes.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::linalg::sigmoid;
use super::TrainingSet;
use crate::{Error, Result};

/// Per-class running moments for one Gaussian naive Bayes class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMoments {
    pub count: u64,
    pub mean: Vec<f64>,
    /// Sum of squared deviations from the mean (Welford's M2).
    pub m2: Vec<f64>,
}

impl ClassMoments {
    fn empty(m: usize) -> Self {
        Self {
            count: 0,
            mean: vec![0.0; m],
            m2: vec![0.0; m],
        }
    }

    /// Population variance per feature.
    pub fn variance(&self) -> Vec<f64> {
        let n = self.count.max(1) as f64;
        self.m2.iter().map(|v| v / n).collect()
    }

    fn push(&mut self, x: &[f64]) {
        self.count += 1;
        let n = self.count as f64;
        for ((mu, m2), &v) in self.mean.iter_mut().zip(&mut self.m2).zip(x) {
            let delta = v - *mu;
            *mu += delta / n;
            *m2 += delta * (v - *mu);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    pub classes: [ClassMoments; 2],
    pub var_floor: f64,
}

impl GaussianNb {
    /// Two-pass batch estimate of means and variances.
    pub fn fit(data: &TrainingSet, var_floor: f64) -> Self {
        let m = data.dims();
        let mut classes = [ClassMoments::empty(m), ClassMoments::empty(m)];
        for (i, r) in data.rows().enumerate() {
            let c = &mut classes[usize::from(data.label(i))];
            c.count += 1;
            for (a, v) in c.mean.iter_mut().zip(r) {
                *a += v;
            }
        }
        for c in &mut classes {
            let n = c.count.max(1) as f64;
            c.mean.iter_mut().for_each(|a| *a /= n);
        }
        for (i, r) in data.rows().enumerate() {
            let c = &mut classes[usize::from(data.label(i))];
            for ((a, v), mu) in c.m2.iter_mut().zip(r).zip(&c.mean) {
                *a += (v - mu) * (v - mu);
            }
        }
        Self { classes, var_floor }
    }

    /// Sequential fit: one Welford update per row in order.
    pub fn fit_incremental(data: &TrainingSet, var_floor: f64) -> Self {
        let m = data.dims();
        let mut model = Self {
            classes: [ClassMoments::empty(m), ClassMoments::empty(m)],
            var_floor,
        };
        for (i, r) in data.rows().enumerate() {
            model.update(r, data.label(i));
        }
        model
    }

    pub fn update(&mut self, x: &[f64], label: u8) {
        self.classes[usize::from(label)].push(x);
    }

    pub fn prior(&self) -> [f64; 2] {
        let n = (self.classes[0].count + self.classes[1].count) as f64;
        [
            self.classes[0].count as f64 / n,
            self.classes[1].count as f64 / n,
        ]
    }

    fn log_joint(&self, c: usize, x: &[f64], prior: f64) -> f64 {
        let cls = &self.classes[c];
        let n = cls.count.max(1) as f64;
        let mut ll = libm::log(prior);
        for ((&v, &mu), &m2) in x.iter().zip(&cls.mean).zip(&cls.m2) {
            let var = (m2 / n).max(self.var_floor);
            ll -= 0.5 * libm::log(2.0 * core::f64::consts::PI * var)
                + (v - mu) * (v - mu) / (2.0 * var);
        }
        ll
    }

    pub fn prob_tree(&self, x: &[f64]) -> f64 {
        let prior = self.prior();
        sigmoid(self.log_joint(1, x, prior[1]) - self.log_joint(0, x, prior[0]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultinomialNb {
    /// `log theta[c][f]`.
    pub log_theta: [Vec<f64>; 2],
    pub log_prior: [f64; 2],
}

impl MultinomialNb {
    pub fn fit(data: &TrainingSet, alpha: f64) -> Result<Self> {
        let m = data.dims();
        let mut totals = [vec![0.0; m], vec![0.0; m]];
        for (i, r) in data.rows().enumerate() {
            if let Some(col) = r.iter().position(|&v| v < 0.0) {
                return Err(Error::NegativeFeature { row: i, col });
            }
            for (a, v) in totals[usize::from(data.label(i))].iter_mut().zip(r) {
                *a += v;
            }
        }
        let log_theta = totals.map(|t| {
            let denom = t.iter().sum::<f64>() + alpha * m as f64;
            t.iter()
                .map(|c| libm::log((c + alpha) / denom))
                .collect::<Vec<_>>()
        });
        let prior = data.class_prior();
        Ok(Self {
            log_theta,
            log_prior: [libm::log(prior[0]), libm::log(prior[1])],
        })
    }

    pub fn prob_tree(&self, x: &[f64]) -> f64 {
        let score = |c: usize| -> f64 {
            self.log_prior[c]
                + x.iter()
                    .zip(&self.log_theta[c])
                    .map(|(v, lt)| v * lt)
                    .sum::<f64>()
        };
        sigmoid(score(1) - score(0))
    }
}
