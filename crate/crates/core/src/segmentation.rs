//! Supervised segmentation: annotated pixels to a training set, per-pixel
//! classification into a tree-probability map, thresholding to a mask.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;

use crate::classifiers::{ClassifierModel, TrainingSet};
use crate::features::FeatureStack;
use crate::imaging::BinaryMask;
use crate::{Error, Result};

pub const UNLABELED: u8 = 0;
pub const MARK_TREE: u8 = 1;
pub const MARK_NON_TREE: u8 = 2;

pub const DEFAULT_MAX_PER_CLASS: usize = 2000;
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// User annotation: 0 unlabeled, 1 tree, 2 non-tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationMask {
    width: usize,
    height: usize,
    marks: Vec<u8>,
}

impl AnnotationMask {
    /// Checks sizes and mark values only; class presence is checked where it is needed.
    pub fn new(width: usize, height: usize, marks: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 || marks.len() != width * height {
            return Err(Error::Dimensions(format!(
                "{width}x{height} annotation with {} marks",
                marks.len()
            )));
        }
        if let Some(&bad) = marks.iter().find(|&&m| m > MARK_NON_TREE) {
            return Err(Error::Precondition(format!(
                "annotation value {bad} is not 0, 1 or 2"
            )));
        }
        Ok(Self {
            width,
            height,
            marks,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn marks(&self) -> &[u8] {
        &self.marks
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.marks[y * self.width + x]
    }

    pub fn count(&self, mark: u8) -> usize {
        self.marks.iter().filter(|&&m| m == mark).count()
    }
}

/// Per-pixel probability of the tree class.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMap {
    width: usize,
    height: usize,
    p_tree: Vec<f64>,
}

impl ProbabilityMap {
    pub fn new(width: usize, height: usize, p_tree: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || p_tree.len() != width * height {
            return Err(Error::Dimensions(format!(
                "{width}x{height} map with {} values",
                p_tree.len()
            )));
        }
        if let Some(i) = p_tree.iter().position(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Precondition(format!(
                "probability {} at index {i} outside [0, 1]",
                p_tree[i]
            )));
        }
        Ok(Self {
            width,
            height,
            p_tree,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.p_tree
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.p_tree[y * self.width + x]
    }
}

/// Samples up to `max_per_class` annotated pixels per class without
/// replacement (all of them when a class has fewer) and reads their feature
/// vectors. Rows come out in raster order; mark 1 becomes label 1.
pub fn extract_training(
    stack: &FeatureStack,
    mask: &AnnotationMask,
    max_per_class: usize,
    seed: u64,
) -> Result<TrainingSet> {
    if stack.width() != mask.width() || stack.height() != mask.height() {
        return Err(Error::DimensionMismatch {
            expected: stack.width() * stack.height(),
            actual: mask.width() * mask.height(),
        });
    }
    if max_per_class == 0 {
        return Err(Error::Precondition(
            "max_per_class must be at least 1".into(),
        ));
    }
    let mut rng = crate::seed::rng(seed);
    let mut picked = Vec::new();
    for mark in [MARK_TREE, MARK_NON_TREE] {
        let pool: Vec<usize> = mask
            .marks()
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| (m == mark).then_some(i))
            .collect();
        if pool.is_empty() {
            return Err(Error::MissingClass(mark));
        }
        if pool.len() <= max_per_class {
            picked.extend(pool);
        } else {
            picked.extend(
                index::sample(&mut rng, pool.len(), max_per_class)
                    .into_iter()
                    .map(|k| pool[k]),
            );
        }
    }
    picked.sort_unstable();
    let m = stack.feature_count();
    let mut features = vec![0.0; picked.len() * m];
    let mut labels = Vec::with_capacity(picked.len());
    for (row, &px) in picked.iter().enumerate() {
        stack.vector_into(px, &mut features[row * m..(row + 1) * m]);
        labels.push(u8::from(mask.marks()[px] == MARK_TREE));
    }
    TrainingSet::new(features, labels, stack.names().to_vec())
}

fn classify_rows(model: &ClassifierModel, stack: &FeatureStack, y0: usize, out: &mut [f64]) {
    let m = stack.feature_count();
    let w = stack.width();
    let mut buf = vec![0.0; m];
    for (k, o) in out.iter_mut().enumerate() {
        stack.vector_into(y0 * w + k, &mut buf);
        *o = model.prob_tree_unchecked(&buf);
    }
}

/// Tree probability at every pixel. Rows are classified in parallel when the
/// model was configured with `parallel` and the `std` feature is on; the map
/// is identical either way.
pub fn classify_image(model: &ClassifierModel, stack: &FeatureStack) -> Result<ProbabilityMap> {
    if stack.feature_count() != model.n_features() {
        return Err(Error::DimensionMismatch {
            expected: model.n_features(),
            actual: stack.feature_count(),
        });
    }
    let (w, h) = (stack.width(), stack.height());
    let mut p = vec![0.0; w * h];
    #[cfg(feature = "std")]
    if model.spec().parallel {
        use rayon::prelude::*;
        p.par_chunks_mut(w)
            .enumerate()
            .for_each(|(y, row)| classify_rows(model, stack, y, row));
        return ProbabilityMap::new(w, h, p);
    }
    for (y, row) in p.chunks_mut(w).enumerate() {
        classify_rows(model, stack, y, row);
    }
    ProbabilityMap::new(w, h, p)
}

/// Foreground where `p_tree >= threshold`.
pub fn binarize(map: &ProbabilityMap, threshold: f64) -> Result<BinaryMask> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Precondition(format!(
            "threshold {threshold} outside (0, 1)"
        )));
    }
    BinaryMask::new(
        map.width,
        map.height,
        map.p_tree.iter().map(|&p| p >= threshold).collect(),
    )
}
