//! Lloyd's k-means with k-means++ seeding.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::{Error, Result};

pub const MAX_ITERATIONS: usize = 100;

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Clusters the rows of `points` (row-major, `dims` columns) into `k` groups.
/// Returns `k x dims` centers, row-major.
///
/// Runs until the assignment stops changing or [`MAX_ITERATIONS`]. A cluster
/// that empties is re-seeded at the point farthest from its assigned center.
pub fn kmeans(points: &[f64], dims: usize, k: usize, seed: u64) -> Result<Vec<f64>> {
    if dims == 0 || !points.len().is_multiple_of(dims) {
        return Err(Error::Dimensions("point matrix does not match dims".into()));
    }
    let n = points.len() / dims;
    if k == 0 || n < k {
        return Err(Error::TooFewPoints { n, k: k.max(1) });
    }
    let row = |i: usize| &points[i * dims..(i + 1) * dims];
    let mut rng = crate::seed::rng(seed);

    // k-means++ seeding.
    let mut centers = Vec::with_capacity(k * dims);
    let first = rng.random_range(0..n);
    centers.extend_from_slice(row(first));
    let mut d2: Vec<f64> = (0..n).map(|i| dist2(row(i), row(first))).collect();
    let mut chosen = vec![false; n];
    chosen[first] = true;
    for _ in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 {
                    pick = Some(i);
                    if target < w {
                        break;
                    }
                    target -= w;
                }
            }
            pick.unwrap_or(0)
        } else {
            // All remaining points coincide with a center.
            chosen.iter().position(|c| !c).unwrap_or(0)
        };
        chosen[pick] = true;
        let c = row(pick).to_vec();
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(dist2(row(i), &c));
        }
        centers.extend_from_slice(&c);
    }

    let mut assign = vec![usize::MAX; n];
    for _ in 0..MAX_ITERATIONS {
        let mut changed = false;
        for (i, a) in assign.iter_mut().enumerate() {
            let best = nearest(&centers, dims, row(i));
            if *a != best {
                *a = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![0.0; k * dims];
        let mut counts = vec![0usize; k];
        for (i, &a) in assign.iter().enumerate() {
            counts[a] += 1;
            for (s, v) in sums[a * dims..(a + 1) * dims].iter_mut().zip(row(i)) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for (dst, s) in centers[c * dims..(c + 1) * dims]
                    .iter_mut()
                    .zip(&sums[c * dims..(c + 1) * dims])
                {
                    *dst = s / counts[c] as f64;
                }
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                let far = (0..n)
                    .max_by(|&i, &j| {
                        let di = dist2(row(i), &centers[assign[i] * dims..(assign[i] + 1) * dims]);
                        let dj = dist2(row(j), &centers[assign[j] * dims..(assign[j] + 1) * dims]);
                        di.total_cmp(&dj).then(j.cmp(&i))
                    })
                    .unwrap_or(0);
                let p = row(far).to_vec();
                centers[c * dims..(c + 1) * dims].copy_from_slice(&p);
                assign[far] = c;
            }
        }
    }
    Ok(centers)
}

/// Index of the closest center; ties go to the lowest index.
pub fn nearest(centers: &[f64], dims: usize, x: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, ctr) in centers.chunks_exact(dims).enumerate() {
        let d = dist2(ctr, x);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}
