//! Tree ensembles: random forest (bootstrap + per-split feature sampling),
//! random committee (full data, per-split feature sampling, different seeds)
//! and random subspace (one random feature subset per tree).
//!
//! Member `t` always draws from its own stream `derive_indexed(seed, t)` and
//! predictions are averaged in member order, so parallel and sequential
//! training produce identical models.

use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tree::{grow, DecisionTree, TreeParams};
use super::TrainingSet;
use crate::seed::{derive_indexed, rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeEnsemble {
    pub trees: Vec<DecisionTree>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sampling {
    Forest {
        features_per_split: usize,
        bootstrap: bool,
    },
    Committee {
        features_per_split: usize,
    },
    Subspace {
        subspace_size: usize,
    },
}

fn build_member(
    data: &TrainingSet,
    seed: u64,
    t: usize,
    sampling: &Sampling,
    max_depth: usize,
    min_leaf: usize,
) -> DecisionTree {
    let mut r = rng(derive_indexed(seed, t as u64));
    let n = data.len();
    match sampling {
        Sampling::Forest {
            features_per_split,
            bootstrap,
        } => {
            let rows = if *bootstrap {
                (0..n).map(|_| r.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let params = TreeParams {
                max_depth,
                min_leaf,
                features_per_split: Some(*features_per_split),
                allowed: None,
            };
            grow(data, rows, &params, Some(&mut r))
        }
        Sampling::Committee { features_per_split } => {
            let params = TreeParams {
                max_depth,
                min_leaf,
                features_per_split: Some(*features_per_split),
                allowed: None,
            };
            grow(data, (0..n).collect(), &params, Some(&mut r))
        }
        Sampling::Subspace { subspace_size } => {
            let mut allowed: Vec<usize> =
                index::sample(&mut r, data.dims(), *subspace_size).into_vec();
            allowed.sort_unstable();
            let params = TreeParams {
                max_depth,
                min_leaf,
                features_per_split: None,
                allowed: Some(allowed),
            };
            grow(data, (0..n).collect(), &params, None)
        }
    }
}

impl TreeEnsemble {
    pub fn fit(
        data: &TrainingSet,
        trees: usize,
        sampling: &Sampling,
        max_depth: usize,
        min_leaf: usize,
        seed: u64,
        parallel: bool,
    ) -> Self {
        let build = |t: usize| build_member(data, seed, t, sampling, max_depth, min_leaf);
        #[cfg(feature = "std")]
        if parallel {
            use rayon::prelude::*;
            return Self {
                trees: (0..trees).into_par_iter().map(build).collect(),
            };
        }
        let _ = parallel;
        Self {
            trees: (0..trees).map(build).collect(),
        }
    }

    /// Mean leaf probability over members, summed in member order.
    pub fn prob_tree(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for t in &self.trees {
            s += t.prob_tree(x);
        }
        s / self.trees.len() as f64
    }
}
