use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Labeled feature matrix for two-class training. Label 1 is "tree".
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    features: Vec<f64>,
    labels: Vec<u8>,
    feature_names: Vec<String>,
}

impl TrainingSet {
    /// `features` is row-major `n x m` with `m = feature_names.len()`.
    pub fn new(features: Vec<f64>, labels: Vec<u8>, feature_names: Vec<String>) -> Result<Self> {
        let set = Self::unchecked(features, labels, feature_names)?;
        if set.class_counts().contains(&0) {
            return Err(Error::SingleClass);
        }
        Ok(set)
    }

    /// Like [`TrainingSet::new`] but allows a single class; gradient checks and
    /// incremental batches use it.
    pub fn unchecked(
        features: Vec<f64>,
        labels: Vec<u8>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        let m = feature_names.len();
        if m == 0 {
            return Err(Error::Dimensions(
                "training set needs at least one feature".into(),
            ));
        }
        if features.len() != labels.len() * m {
            return Err(Error::DimensionMismatch {
                expected: labels.len() * m,
                actual: features.len(),
            });
        }
        if let Some(bad) = labels.iter().position(|&l| l > 1) {
            return Err(Error::Precondition(format!(
                "label {} at row {bad} is not 0 or 1",
                labels[bad]
            )));
        }
        if let Some(i) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: i / m,
                col: i % m,
            });
        }
        Ok(Self {
            features,
            labels,
            feature_names,
        })
    }

    /// Builds a set from rows with generated feature names `f0, f1, ...`.
    pub fn from_rows(rows: &[Vec<f64>], labels: &[u8]) -> Result<Self> {
        let m = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: r.len(),
            });
        }
        let names = (0..m).map(|i| format!("f{i}")).collect();
        Self::new(rows.concat(), labels.to_vec(), names)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.feature_names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let m = self.dims();
        &self.features[i * m..(i + 1) * m]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.features.chunks_exact(self.dims())
    }

    pub fn label(&self, i: usize) -> u8 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let ones = self.labels.iter().filter(|&&l| l == 1).count();
        [self.labels.len() - ones, ones]
    }

    pub fn class_prior(&self) -> [f64; 2] {
        let [c0, c1] = self.class_counts();
        let n = (c0 + c1) as f64;
        [c0 as f64 / n, c1 as f64 / n]
    }

    pub(crate) fn map_features(&self, f: impl Fn(&[f64], &mut [f64])) -> Self {
        let m = self.dims();
        let mut out = alloc::vec![0.0; self.features.len()];
        for (src, dst) in self.features.chunks_exact(m).zip(out.chunks_exact_mut(m)) {
            f(src, dst);
        }
        Self {
            features: out,
            labels: self.labels.clone(),
            feature_names: self.feature_names.clone(),
        }
    }
}
