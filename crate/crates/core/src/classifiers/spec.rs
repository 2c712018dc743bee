use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    GaussianNb,
    MultinomialNb,
    Logistic,
    VotedPerceptron,
    Mlp,
    Rbf,
    Flda,
    OneNn,
    RandomCommittee,
    RandomSubspace,
    RandomForest,
    DecisionStump,
    InfoGainTree,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 13] = [
        Self::GaussianNb,
        Self::MultinomialNb,
        Self::Logistic,
        Self::VotedPerceptron,
        Self::Mlp,
        Self::Rbf,
        Self::Flda,
        Self::OneNn,
        Self::RandomCommittee,
        Self::RandomSubspace,
        Self::RandomForest,
        Self::DecisionStump,
        Self::InfoGainTree,
    ];

    /// Configuration key, e.g. `random_forest`.
    pub fn key(self) -> &'static str {
        match self {
            Self::GaussianNb => "gaussian_nb",
            Self::MultinomialNb => "multinomial_nb",
            Self::Logistic => "logistic",
            Self::VotedPerceptron => "voted_perceptron",
            Self::Mlp => "mlp",
            Self::Rbf => "rbf",
            Self::Flda => "flda",
            Self::OneNn => "one_nn",
            Self::RandomCommittee => "random_committee",
            Self::RandomSubspace => "random_subspace",
            Self::RandomForest => "random_forest",
            Self::DecisionStump => "decision_stump",
            Self::InfoGainTree => "info_gain_tree",
        }
    }

    /// Human-facing name used in reports.
    pub fn display_name(self) -> &'static str {
        match self {
            Self::GaussianNb => "NaiveBayes",
            Self::MultinomialNb => "NaiveBayesMultinomial",
            Self::Logistic => "Logistic",
            Self::VotedPerceptron => "VotedPerceptron",
            Self::Mlp => "MultilayerPerceptron",
            Self::Rbf => "RBFClassifier",
            Self::Flda => "FLDA",
            Self::OneNn => "IB1",
            Self::RandomCommittee => "RandomCommittee",
            Self::RandomSubspace => "RandomSubSpace",
            Self::RandomForest => "RandomForest",
            Self::DecisionStump => "DecisionStump",
            Self::InfoGainTree => "J48",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.key() == key)
    }
}

impl core::fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.key())
    }
}

/// Which classifier to train, with kind-specific hyperparameters.
///
/// Hyperparameters (unknown keys are rejected):
///
/// | kind | key | default | range |
/// |---|---|---|---|
/// | gaussian_nb | `incremental` | 0 | 0 or 1 (1 = fit by sequential updates) |
/// | gaussian_nb | `var_floor` | 1e-9 | > 0 |
/// | multinomial_nb | `alpha` | 1 | > 0 |
/// | logistic | `learning_rate`, `epochs` | 0.1, 500 | > 0, integer >= 1 |
/// | mlp | `hidden_units`, `learning_rate`, `epochs` | 0 (= m), 0.1, 500 | integer >= 0, > 0, integer >= 1 |
/// | voted_perceptron | `epochs`, `max_perceptrons` | 10, 10000 | integer >= 1 |
/// | rbf | `centers`, `ridge` | 10, 1e-6 | integer >= 1, >= 0 |
/// | flda | `ridge` | 1e-6 | >= 0 |
/// | random_forest | `trees`, `max_depth`, `min_leaf`, `features_per_split`, `bootstrap` | 100, 0, 1, 0 (= ceil(sqrt m)), 1 | integers; depth 0 = unlimited |
/// | random_committee | `trees`, `max_depth`, `min_leaf`, `features_per_split` | 100, 0, 1, 0 (= floor(log2 m) + 1) | integers |
/// | random_subspace | `trees`, `max_depth`, `min_leaf`, `subspace_fraction` | 100, 0, 1, 0.5 | fraction in (0, 1] |
/// | info_gain_tree | `max_depth`, `min_leaf` | 0, 1 | integers |
///
/// `one_nn` and `decision_stump` take no hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    #[serde(default)]
    pub hyperparameters: BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: u64,
    /// Parallel tree training and prediction; random_forest only.
    #[serde(default)]
    pub parallel: bool,
    /// Optional report label; defaults to the kind's display name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl ClassifierSpec {
    pub fn new(kind: ClassifierKind) -> Self {
        Self {
            kind,
            hyperparameters: BTreeMap::new(),
            seed: 0,
            parallel: false,
            name: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.hyperparameters.insert(key.to_string(), value);
        self
    }

    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn label(&self) -> String {
        if let Some(n) = &self.name {
            return n.clone();
        }
        match self.kind {
            ClassifierKind::RandomForest if self.parallel => "FastRandomForest".into(),
            ClassifierKind::GaussianNb if self.hyperparameters.get("incremental") == Some(&1.0) => {
                "NaiveBayesUpdatable".into()
            }
            k => k.display_name().into(),
        }
    }

    /// Checks hyperparameter names and ranges without training.
    pub fn validate(&self) -> Result<()> {
        super::Hyperparams::parse(self, 1).map(|_| ())
    }
}

/// Reads hyperparameters with defaults and range checks, rejecting leftovers.
pub(crate) struct Hyper<'a> {
    kind: ClassifierKind,
    map: &'a BTreeMap<String, f64>,
    used: Vec<&'static str>,
}

impl<'a> Hyper<'a> {
    pub fn new(spec: &'a ClassifierSpec) -> Self {
        Self {
            kind: spec.kind,
            map: &spec.hyperparameters,
            used: Vec::new(),
        }
    }

    fn err(&self, key: &str, reason: String) -> Error {
        Error::Hyperparameter {
            kind: self.kind.key(),
            key: key.to_string(),
            reason,
        }
    }

    pub fn real(
        &mut self,
        key: &'static str,
        default: f64,
        min: f64,
        min_inclusive: bool,
        max: f64,
    ) -> Result<f64> {
        self.used.push(key);
        let v = self.map.get(key).copied().unwrap_or(default);
        let above = if min_inclusive { v >= min } else { v > min };
        if !v.is_finite() || !above || v > max {
            let open = if min_inclusive { "[" } else { "(" };
            return Err(self.err(key, format!("{v} outside {open}{min}, {max}]")));
        }
        Ok(v)
    }

    pub fn int(&mut self, key: &'static str, default: usize, min: usize) -> Result<usize> {
        self.used.push(key);
        let v = self.map.get(key).copied().unwrap_or(default as f64);
        if !v.is_finite() || libm::trunc(v) != v || v < min as f64 || v > 1e9 {
            return Err(self.err(key, format!("{v} is not an integer >= {min}")));
        }
        Ok(v as usize)
    }

    pub fn flag(&mut self, key: &'static str, default: bool) -> Result<bool> {
        self.used.push(key);
        match self.map.get(key).copied() {
            None => Ok(default),
            Some(0.0) => Ok(false),
            Some(1.0) => Ok(true),
            Some(v) => Err(self.err(key, format!("{v} is not 0 or 1"))),
        }
    }

    pub fn finish(self) -> Result<()> {
        if let Some(k) = self.map.keys().find(|k| !self.used.contains(&k.as_str())) {
            return Err(self.err(k, "unknown hyperparameter".into()));
        }
        Ok(())
    }
}
