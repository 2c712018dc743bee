//! Binary decision trees: an information-gain builder (midpoint thresholds,
//! no pruning) shared by the tree ensembles, and the one-level stump.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::TrainingSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        p_tree: f64,
    },
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    /// Probability of the tree class at the leaf reached by `x`. Samples with
    /// `x[feature] <= threshold` go left.
    pub fn prob_tree(&self, x: &[f64]) -> f64 {
        let mut i = 0usize;
        loop {
            match self.nodes[i] {
                Node::Leaf { p_tree } => return p_tree,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x[feature as usize] <= threshold {
                        left
                    } else {
                        right
                    } as usize;
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => {
                    1 + go(nodes, left as usize).max(go(nodes, right as usize))
                }
            }
        }
        go(&self.nodes, 0)
    }
}

/// Growth limits and feature sampling for [`grow`].
#[derive(Debug, Clone, PartialEq)]
pub struct TreeParams {
    /// 0 = unlimited.
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Candidate features drawn afresh at every split; `None` = all allowed features.
    pub features_per_split: Option<usize>,
    /// Restricts the tree to these features (sorted ascending); `None` = all.
    pub allowed: Option<Vec<usize>>,
}

impl TreeParams {
    pub fn full(max_depth: usize, min_leaf: usize) -> Self {
        Self {
            max_depth,
            min_leaf,
            features_per_split: None,
            allowed: None,
        }
    }
}

fn entropy(c0: f64, c1: f64) -> f64 {
    let n = c0 + c1;
    let mut h = 0.0;
    for c in [c0, c1] {
        if c > 0.0 {
            let p = c / n;
            h -= p * libm::log2(p);
        }
    }
    h
}

fn midpoint(a: f64, b: f64) -> f64 {
    let t = a + (b - a) / 2.0;
    if t >= b {
        a
    } else {
        t
    }
}

struct Best {
    feature: usize,
    threshold: f64,
    score: f64,
}

/// Best information-gain split over `features` (ascending); ties keep the
/// lowest feature index, then the lowest threshold.
fn best_gain_split(
    data: &TrainingSet,
    rows: &[usize],
    features: &[usize],
    min_leaf: usize,
    scratch: &mut Vec<(f64, u8)>,
) -> Option<Best> {
    let n = rows.len() as f64;
    let ones = rows.iter().filter(|&&r| data.label(r) == 1).count() as f64;
    let parent = entropy(n - ones, ones);
    let mut best: Option<Best> = None;
    for &f in features {
        scratch.clear();
        scratch.extend(rows.iter().map(|&r| (data.row(r)[f], data.label(r))));
        scratch.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (mut l0, mut l1) = (0.0, 0.0);
        for i in 0..scratch.len() - 1 {
            if scratch[i].1 == 1 {
                l1 += 1.0;
            } else {
                l0 += 1.0;
            }
            let (a, b) = (scratch[i].0, scratch[i + 1].0);
            if a == b {
                continue;
            }
            let nl = (i + 1) as f64;
            let nr = n - nl;
            if (nl as usize) < min_leaf || (nr as usize) < min_leaf {
                continue;
            }
            let (r0, r1) = (n - ones - l0, ones - l1);
            let gain = parent - (nl / n) * entropy(l0, l1) - (nr / n) * entropy(r0, r1);
            if best.as_ref().is_none_or(|b| gain > b.score) {
                best = Some(Best {
                    feature: f,
                    threshold: midpoint(a, b),
                    score: gain,
                });
            }
        }
    }
    best
}

/// Grows an unpruned information-gain tree on `rows` (duplicates allowed, as
/// produced by bootstrap sampling). `rng` is only consulted when
/// `params.features_per_split` is smaller than the number of allowed features.
pub fn grow(
    data: &TrainingSet,
    rows: Vec<usize>,
    params: &TreeParams,
    mut rng: Option<&mut ChaCha8Rng>,
) -> DecisionTree {
    let allowed: Vec<usize> = params
        .allowed
        .clone()
        .unwrap_or_else(|| (0..data.dims()).collect());
    let per_split = params
        .features_per_split
        .unwrap_or(allowed.len())
        .clamp(1, allowed.len());
    let min_leaf = params.min_leaf.max(1);
    let mut nodes = vec![Node::Leaf { p_tree: 0.0 }];
    let mut stack = vec![(0usize, rows, 0usize)];
    let mut scratch = Vec::new();
    let mut candidates = Vec::with_capacity(allowed.len());
    while let Some((at, rows, depth)) = stack.pop() {
        let ones = rows.iter().filter(|&&r| data.label(r) == 1).count();
        let p_tree = ones as f64 / rows.len() as f64;
        let pure = ones == 0 || ones == rows.len();
        let depth_capped = params.max_depth > 0 && depth >= params.max_depth;
        if pure || depth_capped || rows.len() < 2 * min_leaf {
            nodes[at] = Node::Leaf { p_tree };
            continue;
        }
        candidates.clear();
        match rng.as_deref_mut() {
            Some(r) if per_split < allowed.len() => {
                candidates.extend(
                    index::sample(r, allowed.len(), per_split)
                        .into_iter()
                        .map(|i| allowed[i]),
                );
                candidates.sort_unstable();
            }
            _ => candidates.extend_from_slice(&allowed),
        }
        match best_gain_split(data, &rows, &candidates, min_leaf, &mut scratch) {
            Some(best) if best.score > 0.0 => {
                let (left, right): (Vec<usize>, Vec<usize>) = rows
                    .iter()
                    .partition(|&&r| data.row(r)[best.feature] <= best.threshold);
                let li = nodes.len();
                nodes.push(Node::Leaf { p_tree: 0.0 });
                nodes.push(Node::Leaf { p_tree: 0.0 });
                nodes[at] = Node::Split {
                    feature: best.feature as u32,
                    threshold: best.threshold,
                    left: li as u32,
                    right: li as u32 + 1,
                };
                stack.push((li + 1, right, depth + 1));
                stack.push((li, left, depth + 1));
            }
            _ => nodes[at] = Node::Leaf { p_tree },
        }
    }
    DecisionTree { nodes }
}

/// One-level tree whose (feature, threshold) minimizes training
/// misclassification when each side predicts its majority class. Leaves carry
/// the class frequencies of their side.
pub fn fit_stump(data: &TrainingSet) -> DecisionTree {
    let n = data.len();
    let [c0, c1] = data.class_counts();
    let mut best: Option<Best> = None;
    let mut col: Vec<(f64, u8)> = Vec::with_capacity(n);
    for f in 0..data.dims() {
        col.clear();
        col.extend(data.rows().zip(data.labels()).map(|(r, &l)| (r[f], l)));
        col.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (mut l0, mut l1) = (0usize, 0usize);
        for i in 0..n - 1 {
            if col[i].1 == 1 {
                l1 += 1;
            } else {
                l0 += 1;
            }
            let (a, b) = (col[i].0, col[i + 1].0);
            if a == b {
                continue;
            }
            let errors = (l0.min(l1) + (c0 - l0).min(c1 - l1)) as f64;
            if best.as_ref().is_none_or(|b| errors < b.score) {
                best = Some(Best {
                    feature: f,
                    threshold: midpoint(a, b),
                    score: errors,
                });
            }
        }
    }
    let Some(best) = best else {
        return DecisionTree {
            nodes: vec![Node::Leaf {
                p_tree: c1 as f64 / n as f64,
            }],
        };
    };
    let (mut ln, mut l1, mut rn, mut r1) = (0.0, 0.0, 0.0, 0.0);
    for (r, &l) in data.rows().zip(data.labels()) {
        if r[best.feature] <= best.threshold {
            ln += 1.0;
            l1 += f64::from(l);
        } else {
            rn += 1.0;
            r1 += f64::from(l);
        }
    }
    DecisionTree {
        nodes: vec![
            Node::Split {
                feature: best.feature as u32,
                threshold: best.threshold,
                left: 1,
                right: 2,
            },
            Node::Leaf { p_tree: l1 / ln },
            Node::Leaf { p_tree: r1 / rn },
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> TrainingSet {
        TrainingSet::from_rows(&[vec![0.0], vec![0.1], vec![1.0], vec![1.1]], &[0, 0, 1, 1])
            .unwrap()
    }

    #[test]
    fn stump_splits_separable_feature() {
        let t = fit_stump(&toy());
        let Node::Split { threshold, .. } = t.nodes[0] else {
            panic!("expected split")
        };
        assert!(threshold > 0.1 && threshold < 1.0);
        let d = toy();
        for (i, r) in d.rows().enumerate() {
            assert_eq!(t.prob_tree(r) >= 0.5, d.label(i) == 1);
        }
    }

    #[test]
    fn stump_tie_prefers_lowest_feature() {
        let d = TrainingSet::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0]], &[0, 1]).unwrap();
        let t = fit_stump(&d);
        assert!(matches!(t.nodes[0], Node::Split { feature: 0, .. }));
    }

    #[test]
    fn grows_pure_leaves_on_xor_free_data() {
        let d = TrainingSet::from_rows(
            &[
                vec![0.0, 5.0],
                vec![1.0, 4.0],
                vec![2.0, 3.0],
                vec![3.0, 2.0],
                vec![4.0, 1.0],
            ],
            &[0, 0, 1, 1, 0],
        )
        .unwrap();
        let t = grow(&d, (0..d.len()).collect(), &TreeParams::full(0, 1), None);
        for (i, r) in d.rows().enumerate() {
            assert_eq!(t.prob_tree(r), f64::from(d.label(i)));
        }
        let shallow = grow(&d, (0..d.len()).collect(), &TreeParams::full(1, 1), None);
        assert_eq!(shallow.depth(), 1);
    }

    #[test]
    fn constant_features_give_a_leaf() {
        let d = TrainingSet::from_rows(&[vec![1.0], vec![1.0], vec![1.0]], &[0, 1, 1]).unwrap();
        let t = grow(&d, (0..3).collect(), &TreeParams::full(0, 1), None);
        assert_eq!(t.nodes.len(), 1);
        assert!((t.prob_tree(&[1.0]) - 2.0 / 3.0).abs() < 1e-15);
        let s = fit_stump(&d);
        assert_eq!(s.nodes.len(), 1);
    }
}
