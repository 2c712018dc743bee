//! Two-class pixel classifiers behind one fit / predict contract.
//!
//! Every model maps a feature vector to `[p_non_tree, p_tree]`, a point on the
//! 2-simplex. Kinds without a native probability are squashed: FLDA and the
//! voted perceptron pass their signed margin, divided by its training-set
//! standard deviation, through the logistic function; 1-NN emits the
//! neighbor's label as 0/1; the RBF network clamps its least-squares output
//! to `[0, 1]`; trees and the stump report leaf class frequencies.

mod dataset;
mod ensemble;
mod flda;
mod kmeans;
mod linalg;
mod naive_bayes;
mod nearest;
mod neural;
mod perceptron;
mod rbf;
mod spec;
mod tree;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use dataset::TrainingSet;
pub use ensemble::{Sampling, TreeEnsemble};
pub use flda::Flda;
pub use kmeans::kmeans;
pub use linalg::{sigmoid, Scaler};
pub use naive_bayes::{ClassMoments, GaussianNb, MultinomialNb};
pub use nearest::NearestNeighbor;
pub use neural::{gradient_of_loss, loss, LogisticModel, LossModel, MlpModel};
pub use perceptron::VotedPerceptron;
pub use rbf::RbfNetwork;
pub use spec::{ClassifierKind, ClassifierSpec};
pub use tree::{fit_stump, grow, DecisionTree, Node, TreeParams};

use spec::Hyper;

use crate::{Error, Result};

/// Validated, typed hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Hyperparams {
    GaussianNb {
        incremental: bool,
        var_floor: f64,
    },
    MultinomialNb {
        alpha: f64,
    },
    Logistic {
        learning_rate: f64,
        epochs: usize,
    },
    Mlp {
        hidden: usize,
        learning_rate: f64,
        epochs: usize,
    },
    VotedPerceptron {
        epochs: usize,
        max_perceptrons: usize,
    },
    Rbf {
        centers: usize,
        ridge: f64,
    },
    Flda {
        ridge: f64,
    },
    OneNn,
    Ensemble {
        trees: usize,
        sampling: Sampling,
        max_depth: usize,
        min_leaf: usize,
    },
    DecisionStump,
    InfoGainTree {
        max_depth: usize,
        min_leaf: usize,
    },
}

impl Hyperparams {
    /// Parses `spec` for data with `m` features.
    pub(crate) fn parse(spec: &ClassifierSpec, m: usize) -> Result<Self> {
        use ClassifierKind as K;
        if spec.parallel && spec.kind != K::RandomForest {
            return Err(Error::Hyperparameter {
                kind: spec.kind.key(),
                key: "parallel".into(),
                reason: "only random_forest supports parallel training".into(),
            });
        }
        let mut h = Hyper::new(spec);
        let inf = f64::INFINITY;
        let parsed = match spec.kind {
            K::GaussianNb => Self::GaussianNb {
                incremental: h.flag("incremental", false)?,
                var_floor: h.real("var_floor", 1e-9, 0.0, false, inf)?,
            },
            K::MultinomialNb => Self::MultinomialNb {
                alpha: h.real("alpha", 1.0, 0.0, false, inf)?,
            },
            K::Logistic => Self::Logistic {
                learning_rate: h.real("learning_rate", 0.1, 0.0, false, inf)?,
                epochs: h.int("epochs", 500, 1)?,
            },
            K::Mlp => Self::Mlp {
                hidden: h.int("hidden_units", 0, 0)?,
                learning_rate: h.real("learning_rate", 0.1, 0.0, false, inf)?,
                epochs: h.int("epochs", 500, 1)?,
            },
            K::VotedPerceptron => Self::VotedPerceptron {
                epochs: h.int("epochs", 10, 1)?,
                max_perceptrons: h.int("max_perceptrons", 10_000, 1)?,
            },
            K::Rbf => Self::Rbf {
                centers: h.int("centers", 10, 1)?,
                ridge: h.real("ridge", 1e-6, 0.0, true, inf)?,
            },
            K::Flda => Self::Flda {
                ridge: h.real("ridge", 1e-6, 0.0, true, inf)?,
            },
            K::OneNn => Self::OneNn,
            K::DecisionStump => Self::DecisionStump,
            K::InfoGainTree => Self::InfoGainTree {
                max_depth: h.int("max_depth", 0, 0)?,
                min_leaf: h.int("min_leaf", 1, 1)?,
            },
            K::RandomForest | K::RandomCommittee | K::RandomSubspace => {
                let trees = h.int("trees", 100, 1)?;
                let max_depth = h.int("max_depth", 0, 0)?;
                let min_leaf = h.int("min_leaf", 1, 1)?;
                let sampling = match spec.kind {
                    K::RandomForest => {
                        let k = h.int("features_per_split", 0, 0)?;
                        let auto = libm::ceil(libm::sqrt(m as f64)) as usize;
                        Sampling::Forest {
                            features_per_split: if k == 0 { auto } else { k }.clamp(1, m.max(1)),
                            bootstrap: h.flag("bootstrap", true)?,
                        }
                    }
                    K::RandomCommittee => {
                        let k = h.int("features_per_split", 0, 0)?;
                        let auto = (usize::BITS - m.max(1).leading_zeros()) as usize;
                        Sampling::Committee {
                            features_per_split: if k == 0 { auto } else { k }.clamp(1, m.max(1)),
                        }
                    }
                    _ => {
                        let frac = h.real("subspace_fraction", 0.5, 0.0, false, 1.0)?;
                        Sampling::Subspace {
                            subspace_size: (libm::ceil(frac * m as f64) as usize)
                                .clamp(1, m.max(1)),
                        }
                    }
                };
                Self::Ensemble {
                    trees,
                    sampling,
                    max_depth,
                    min_leaf,
                }
            }
        };
        h.finish()?;
        Ok(parsed)
    }
}

/// Learned state of each kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelParams {
    GaussianNb(GaussianNb),
    MultinomialNb(MultinomialNb),
    Logistic(LogisticModel),
    VotedPerceptron(VotedPerceptron),
    Mlp(MlpModel),
    Rbf(RbfNetwork),
    Flda(Flda),
    OneNn(NearestNeighbor),
    Ensemble(TreeEnsemble),
    Tree(DecisionTree),
}

/// A trained classifier. Immutable; `predict_proba` is pure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierModel {
    spec: ClassifierSpec,
    n_features: usize,
    class_prior: [f64; 2],
    params: ModelParams,
}

/// Trains `spec` on `data`. Deterministic given `spec.seed`, including
/// parallel random forests.
pub fn fit(spec: &ClassifierSpec, data: &TrainingSet) -> Result<ClassifierModel> {
    let m = data.dims();
    if data.class_counts().contains(&0) {
        return Err(Error::SingleClass);
    }
    let hp = Hyperparams::parse(spec, m)?;
    let seed = spec.seed;
    let params = match hp {
        Hyperparams::GaussianNb {
            incremental,
            var_floor,
        } => ModelParams::GaussianNb(if incremental {
            GaussianNb::fit_incremental(data, var_floor)
        } else {
            GaussianNb::fit(data, var_floor)
        }),
        Hyperparams::MultinomialNb { alpha } => {
            ModelParams::MultinomialNb(MultinomialNb::fit(data, alpha)?)
        }
        Hyperparams::Logistic {
            learning_rate,
            epochs,
        } => ModelParams::Logistic(LogisticModel::fit(data, learning_rate, epochs)?),
        Hyperparams::Mlp {
            hidden,
            learning_rate,
            epochs,
        } => ModelParams::Mlp(MlpModel::fit(data, hidden, learning_rate, epochs, seed)?),
        Hyperparams::VotedPerceptron {
            epochs,
            max_perceptrons,
        } => {
            ModelParams::VotedPerceptron(VotedPerceptron::fit(data, epochs, max_perceptrons, seed))
        }
        Hyperparams::Rbf { centers, ridge } => {
            ModelParams::Rbf(RbfNetwork::fit(data, centers, ridge, seed)?)
        }
        Hyperparams::Flda { ridge } => ModelParams::Flda(Flda::fit(data, ridge)),
        Hyperparams::OneNn => ModelParams::OneNn(NearestNeighbor::fit(data)),
        Hyperparams::Ensemble {
            trees,
            sampling,
            max_depth,
            min_leaf,
        } => ModelParams::Ensemble(TreeEnsemble::fit(
            data,
            trees,
            &sampling,
            max_depth,
            min_leaf,
            seed,
            spec.parallel,
        )),
        Hyperparams::DecisionStump => ModelParams::Tree(fit_stump(data)),
        Hyperparams::InfoGainTree {
            max_depth,
            min_leaf,
        } => ModelParams::Tree(grow(
            data,
            (0..data.len()).collect(),
            &TreeParams::full(max_depth, min_leaf),
            None,
        )),
    };
    Ok(ClassifierModel {
        spec: spec.clone(),
        n_features: m,
        class_prior: data.class_prior(),
        params,
    })
}

impl ClassifierModel {
    pub fn spec(&self) -> &ClassifierSpec {
        &self.spec
    }

    pub fn kind(&self) -> ClassifierKind {
        self.spec.kind
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn class_prior(&self) -> [f64; 2] {
        self.class_prior
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// `p_tree` without argument checks; `x.len()` must equal `n_features`.
    pub fn prob_tree_unchecked(&self, x: &[f64]) -> f64 {
        let p = match &self.params {
            ModelParams::GaussianNb(m) => m.prob_tree(x),
            ModelParams::MultinomialNb(m) => m.prob_tree(x),
            ModelParams::Logistic(m) => m.prob_tree(x),
            ModelParams::VotedPerceptron(m) => m.prob_tree(x),
            ModelParams::Mlp(m) => m.prob_tree(x),
            ModelParams::Rbf(m) => m.prob_tree(x),
            ModelParams::Flda(m) => m.prob_tree(x),
            ModelParams::OneNn(m) => m.prob_tree(x),
            ModelParams::Ensemble(m) => m.prob_tree(x),
            ModelParams::Tree(m) => m.prob_tree(x),
        };
        if p.is_nan() {
            0.5
        } else {
            p.clamp(0.0, 1.0)
        }
    }

    /// `[p_non_tree, p_tree]`.
    pub fn predict_proba(&self, x: &[f64]) -> Result<[f64; 2]> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                actual: x.len(),
            });
        }
        if let Some(col) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: 0, col });
        }
        let p = self.prob_tree_unchecked(x);
        Ok([1.0 - p, p])
    }

    /// Hard label at the 0.5 threshold.
    pub fn predict(&self, x: &[f64]) -> Result<u8> {
        Ok(u8::from(self.predict_proba(x)?[1] >= 0.5))
    }

    /// Fraction of rows of `data` classified correctly.
    pub fn accuracy(&self, data: &TrainingSet) -> Result<f64> {
        let mut ok = 0usize;
        for (i, r) in data.rows().enumerate() {
            if self.predict(r)? == data.label(i) {
                ok += 1;
            }
        }
        Ok(ok as f64 / data.len() as f64)
    }
}

/// Folds one labeled vector into a Gaussian naive Bayes model (Welford update).
pub fn incremental_update(
    model: &ClassifierModel,
    x: &[f64],
    label: u8,
) -> Result<ClassifierModel> {
    let ModelParams::GaussianNb(nb) = &model.params else {
        return Err(Error::WrongKind {
            expected: ClassifierKind::GaussianNb.key(),
            actual: model.spec.kind.key(),
        });
    };
    if x.len() != model.n_features {
        return Err(Error::DimensionMismatch {
            expected: model.n_features,
            actual: x.len(),
        });
    }
    if let Some(col) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { row: 0, col });
    }
    if label > 1 {
        return Err(Error::Precondition(alloc::format!(
            "label {label} is not 0 or 1"
        )));
    }
    let mut nb = nb.clone();
    nb.update(x, label);
    Ok(ClassifierModel {
        spec: model.spec.clone(),
        n_features: model.n_features,
        class_prior: nb.prior(),
        params: ModelParams::GaussianNb(nb),
    })
}

/// Default specs for every kind, in catalog order, all with `seed`.
pub fn default_specs(seed: u64) -> Vec<ClassifierSpec> {
    ClassifierKind::ALL
        .into_iter()
        .map(|k| ClassifierSpec::new(k).with_seed(seed))
        .collect()
}
