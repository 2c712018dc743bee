//! Logistic regression and a one-hidden-layer sigmoid network, both trained
//! by full-batch gradient descent on mean cross-entropy.
//!
//! Flat parameter layouts:
//! * logistic: `[w_0 .. w_{m-1}, b]`
//! * mlp with `h` hidden units: `[W1 (h x m, row-major), b1 (h), w2 (h), b2]`

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::linalg::{sigmoid, softplus, Scaler};
use super::TrainingSet;
use crate::{Error, Result};

/// Model family for [`loss`] and [`gradient_of_loss`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossModel {
    Logistic,
    Mlp { hidden: usize },
}

impl LossModel {
    pub fn param_count(self, m: usize) -> usize {
        match self {
            LossModel::Logistic => m + 1,
            LossModel::Mlp { hidden } => hidden * m + 2 * hidden + 1,
        }
    }
}

fn check(model: LossModel, params: &[f64], batch: &TrainingSet) -> Result<()> {
    let expected = model.param_count(batch.dims());
    if params.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            actual: params.len(),
        });
    }
    if let Some(i) = params.iter().position(|p| !p.is_finite()) {
        return Err(Error::NonFinite { row: 0, col: i });
    }
    Ok(())
}

/// Mean cross-entropy `-(1/n) sum [y ln p + (1-y) ln(1-p)]`.
pub fn loss(model: LossModel, params: &[f64], batch: &TrainingSet) -> Result<f64> {
    check(model, params, batch)?;
    let m = batch.dims();
    let mut hidden_buf = vec![
        0.0;
        if let LossModel::Mlp { hidden } = model {
            hidden
        } else {
            0
        }
    ];
    let mut total = 0.0;
    for (i, x) in batch.rows().enumerate() {
        let z = match model {
            LossModel::Logistic => linear(&params[..m], params[m], x),
            LossModel::Mlp { hidden } => mlp_forward(params, m, hidden, x, &mut hidden_buf),
        };
        let y = f64::from(batch.label(i));
        // -[y ln s(z) + (1-y) ln(1-s(z))] = softplus(z) - y z
        total += softplus(z) - y * z;
    }
    Ok(total / batch.len() as f64)
}

/// Exact gradient of [`loss`] with respect to the flat parameters.
pub fn gradient_of_loss(model: LossModel, params: &[f64], batch: &TrainingSet) -> Result<Vec<f64>> {
    check(model, params, batch)?;
    let m = batch.dims();
    let n = batch.len() as f64;
    let mut grad = vec![0.0; params.len()];
    match model {
        LossModel::Logistic => {
            for (i, x) in batch.rows().enumerate() {
                let err =
                    (sigmoid(linear(&params[..m], params[m], x)) - f64::from(batch.label(i))) / n;
                for (g, v) in grad[..m].iter_mut().zip(x) {
                    *g += err * v;
                }
                grad[m] += err;
            }
        }
        LossModel::Mlp { hidden } => {
            let mut act = vec![0.0; hidden];
            let w2 = &params[hidden * (m + 1)..hidden * (m + 2)];
            for (i, x) in batch.rows().enumerate() {
                let z = mlp_forward(params, m, hidden, x, &mut act);
                let d2 = (sigmoid(z) - f64::from(batch.label(i))) / n;
                let (gw1, grest) = grad.split_at_mut(hidden * m);
                let (gb1, grest) = grest.split_at_mut(hidden);
                let (gw2, gb2) = grest.split_at_mut(hidden);
                gb2[0] += d2;
                for j in 0..hidden {
                    gw2[j] += d2 * act[j];
                    let d1 = d2 * w2[j] * act[j] * (1.0 - act[j]);
                    gb1[j] += d1;
                    for (g, v) in gw1[j * m..(j + 1) * m].iter_mut().zip(x) {
                        *g += d1 * v;
                    }
                }
            }
        }
    }
    Ok(grad)
}

fn linear(w: &[f64], b: f64, x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() + b
}

/// Returns the output pre-activation; fills `act` with hidden activations.
fn mlp_forward(params: &[f64], m: usize, hidden: usize, x: &[f64], act: &mut [f64]) -> f64 {
    let w1 = &params[..hidden * m];
    let b1 = &params[hidden * m..hidden * (m + 1)];
    let w2 = &params[hidden * (m + 1)..hidden * (m + 2)];
    let b2 = params[hidden * (m + 2)];
    for j in 0..hidden {
        act[j] = sigmoid(linear(&w1[j * m..(j + 1) * m], b1[j], x));
    }
    linear(w2, b2, act)
}

fn descend(
    model: LossModel,
    params: &mut [f64],
    data: &TrainingSet,
    learning_rate: f64,
    epochs: usize,
) -> Result<()> {
    for _ in 0..epochs {
        let g = gradient_of_loss(model, params, data)?;
        for (p, d) in params.iter_mut().zip(&g) {
            *p -= learning_rate * d;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub scaler: Scaler,
    /// Weights then bias, on standardized features.
    pub params: Vec<f64>,
}

impl LogisticModel {
    pub fn fit(data: &TrainingSet, learning_rate: f64, epochs: usize) -> Result<Self> {
        let scaler = Scaler::standard(data);
        let z = scaler.transform_set(data);
        let mut params = vec![0.0; data.dims() + 1];
        descend(LossModel::Logistic, &mut params, &z, learning_rate, epochs)?;
        Ok(Self { scaler, params })
    }

    pub fn prob_tree(&self, x: &[f64]) -> f64 {
        let m = x.len();
        let mut s = 0.0;
        for (k, &v) in x.iter().enumerate() {
            s += self.params[k] * (v - self.scaler.offset[k]) / self.scaler.scale[k];
        }
        sigmoid(s + self.params[m])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub scaler: Scaler,
    pub hidden: usize,
    pub params: Vec<f64>,
}

impl MlpModel {
    pub fn fit(
        data: &TrainingSet,
        hidden: usize,
        learning_rate: f64,
        epochs: usize,
        seed: u64,
    ) -> Result<Self> {
        let m = data.dims();
        let hidden = if hidden == 0 { m } else { hidden };
        let scaler = Scaler::standard(data);
        let z = scaler.transform_set(data);
        let model = LossModel::Mlp { hidden };
        let mut rng = crate::seed::rng(seed);
        // Uniform in +-1/sqrt(fan_in) per layer.
        let a1 = 1.0 / libm::sqrt(m as f64);
        let a2 = 1.0 / libm::sqrt(hidden as f64);
        let mut params = vec![0.0; model.param_count(m)];
        for (i, p) in params.iter_mut().enumerate() {
            let a = if i < hidden * (m + 1) { a1 } else { a2 };
            *p = rng.random_range(-a..a);
        }
        descend(model, &mut params, &z, learning_rate, epochs)?;
        Ok(Self {
            scaler,
            hidden,
            params,
        })
    }

    pub fn prob_tree(&self, x: &[f64]) -> f64 {
        let m = x.len();
        let xs = self.scaler.transform(x);
        let mut act = vec![0.0; self.hidden];
        sigmoid(mlp_forward(&self.params, m, self.hidden, &xs, &mut act))
    }
}
