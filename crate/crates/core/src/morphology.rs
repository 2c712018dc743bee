//! Binary morphology: hole filling, exact Euclidean distance transform,
//! distance-based watershed splitting and 8-connected component labeling.

use alloc::collections::{BinaryHeap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::imaging::{BinaryMask, LabelMap};

const N8: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];
const N4: [(isize, isize); 4] = [(0, -1), (-1, 0), (1, 0), (0, 1)];

fn neighbors<'a>(
    x: usize,
    y: usize,
    w: usize,
    h: usize,
    offsets: &'a [(isize, isize)],
) -> impl Iterator<Item = (usize, usize)> + 'a {
    offsets.iter().filter_map(move |&(dx, dy)| {
        let nx = x as isize + dx;
        let ny = y as isize + dy;
        (nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h)
            .then_some((nx as usize, ny as usize))
    })
}

/// Turns background regions that are not 4-connected to the image border into foreground.
pub fn fill_holes(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = (mask.width(), mask.height());
    let bits = mask.bits();
    let mut outside = vec![false; w * h];
    let mut queue = VecDeque::new();
    for y in 0..h {
        for x in 0..w {
            let border = x == 0 || y == 0 || x == w - 1 || y == h - 1;
            let i = y * w + x;
            if border && !bits[i] && !outside[i] {
                outside[i] = true;
                queue.push_back((x, y));
            }
        }
    }
    while let Some((x, y)) = queue.pop_front() {
        for (nx, ny) in neighbors(x, y, w, h, &N4) {
            let j = ny * w + nx;
            if !bits[j] && !outside[j] {
                outside[j] = true;
                queue.push_back((nx, ny));
            }
        }
    }
    BinaryMask::new(w, h, outside.iter().map(|o| !o).collect()).expect("same dimensions")
}

/// Euclidean distance from each foreground pixel to the nearest background
/// pixel, with the image surrounded by virtual background. Zero on background.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    width: usize,
    height: usize,
    squared: Vec<f64>,
}

impl DistanceField {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        libm::sqrt(self.squared[y * self.width + x])
    }

    /// Squared distances; integers stored as `f64`.
    pub fn squared(&self) -> &[f64] {
        &self.squared
    }

    pub fn values(&self) -> Vec<f64> {
        self.squared.iter().map(|&s| libm::sqrt(s)).collect()
    }
}

const FAR: f64 = 1e20;

/// 1-D lower envelope of parabolas (Felzenszwalb & Huttenlocher).
fn envelope_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let fq = f[q] + (q * q) as f64;
        loop {
            let p = v[k];
            let s = (fq - (f[p] + (p * p) as f64)) / (2.0 * (q - p) as f64);
            if s <= z[k] && k > 0 {
                k -= 1;
                continue;
            }
            if s <= z[k] {
                // k == 0: replace the only parabola.
                v[0] = q;
                z[0] = f64::NEG_INFINITY;
                z[1] = f64::INFINITY;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
            }
            break;
        }
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Exact Euclidean distance transform, separable two-pass form on a grid
/// padded by one background pixel on every side.
pub fn distance_transform(mask: &BinaryMask) -> DistanceField {
    let (w, h) = (mask.width(), mask.height());
    let (pw, ph) = (w + 2, h + 2);
    let mut grid = vec![0.0; pw * ph];
    for y in 0..h {
        for x in 0..w {
            if mask.get(x, y) {
                grid[(y + 1) * pw + x + 1] = FAR;
            }
        }
    }
    let n = pw.max(ph);
    let mut col = vec![0.0; n];
    let mut out = vec![0.0; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];
    for x in 1..pw - 1 {
        for y in 0..ph {
            col[y] = grid[y * pw + x];
        }
        envelope_1d(&col[..ph], &mut out[..ph], &mut v, &mut z);
        for y in 0..ph {
            grid[y * pw + x] = out[y];
        }
    }
    let mut squared = Vec::with_capacity(w * h);
    for y in 1..ph - 1 {
        let row = &grid[y * pw..(y + 1) * pw];
        envelope_1d(row, &mut out[..pw], &mut v, &mut z);
        squared.extend_from_slice(&out[1..pw - 1]);
    }
    for (s, &b) in squared.iter_mut().zip(mask.bits()) {
        if !b {
            *s = 0.0;
        }
    }
    DistanceField {
        width: w,
        height: h,
        squared,
    }
}

/// Seed handling for [`watershed_split_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WatershedParams {
    /// Distance-field maxima whose centroids are closer than this are one seed.
    pub merge_radius: f64,
    /// Two basins meeting at a level less than this below the lower basin's
    /// peak are merged instead of separated by a line.
    pub tolerance: f64,
}

impl Default for WatershedParams {
    fn default() -> Self {
        Self {
            merge_radius: 4.0,
            tolerance: 0.5,
        }
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut a: usize) -> usize {
        while self.parent[a] != a {
            self.parent[a] = self.parent[self.parent[a]];
            a = self.parent[a];
        }
        a
    }

    /// Attaches `b`'s root under `a`'s root.
    fn union_into(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[rb] = ra;
        }
    }
}

struct Seed {
    peak: f64,
    cx: f64,
    cy: f64,
    pixel: usize,
}

#[derive(PartialEq)]
struct Queued {
    level: f64,
    order: u64,
    index: usize,
}

impl Eq for Queued {}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        self.level
            .total_cmp(&other.level)
            .then_with(|| other.order.cmp(&self.order))
    }
}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Seed regions: 8-connected plateaus of the distance field with no higher
/// neighbor. Returns a per-pixel seed id (`usize::MAX` = none) and the seeds.
fn find_maxima(mask: &BinaryMask, dist: &DistanceField) -> (Vec<usize>, Vec<Seed>) {
    let (w, h) = (mask.width(), mask.height());
    let d = dist.squared();
    let mut plateau = vec![usize::MAX; w * h];
    let mut seed_of = vec![usize::MAX; w * h];
    let mut seeds = Vec::new();
    let mut members = Vec::new();
    let mut queue = VecDeque::new();
    let mut next = 0usize;
    for start in 0..w * h {
        if !mask.bits()[start] || plateau[start] != usize::MAX {
            continue;
        }
        let level = d[start];
        members.clear();
        plateau[start] = next;
        queue.push_back(start);
        let mut is_max = true;
        while let Some(i) = queue.pop_front() {
            members.push(i);
            for (nx, ny) in neighbors(i % w, i / w, w, h, &N8) {
                let j = ny * w + nx;
                if d[j] > level {
                    is_max = false;
                } else if d[j] == level && mask.bits()[j] && plateau[j] == usize::MAX {
                    plateau[j] = next;
                    queue.push_back(j);
                }
            }
        }
        if is_max {
            let id = seeds.len();
            let (mut sx, mut sy) = (0.0, 0.0);
            for &i in &members {
                seed_of[i] = id;
                sx += (i % w) as f64;
                sy += (i / w) as f64;
            }
            let n = members.len() as f64;
            seeds.push(Seed {
                peak: libm::sqrt(level),
                cx: sx / n,
                cy: sy / n,
                pixel: start,
            });
        }
        next += 1;
    }
    (seed_of, seeds)
}

pub fn watershed_split(mask: &BinaryMask) -> LabelMap {
    watershed_split_with(mask, &WatershedParams::default())
}

/// Splits touching blobs along ridges of the distance transform.
///
/// Basins grow from the distance maxima in decreasing-distance order (FIFO
/// among equal levels). A pixel reached by two distinct basins becomes a
/// watershed line with label 0 and does not propagate. Every foreground pixel
/// ends up labeled or on a line; labels are compacted to `1..=K` in raster
/// first-encounter order.
pub fn watershed_split_with(mask: &BinaryMask, params: &WatershedParams) -> LabelMap {
    let (w, h) = (mask.width(), mask.height());
    let dist = distance_transform(mask);
    let level = dist.values();
    let (seed_of, seeds) = find_maxima(mask, &dist);
    let blob = connected_components(mask);

    let mut uf = UnionFind::new(seeds.len());
    let mut peak: Vec<f64> = seeds.iter().map(|s| s.peak).collect();
    let r2 = params.merge_radius * params.merge_radius;
    let mut by_x: Vec<usize> = (0..seeds.len()).collect();
    by_x.sort_by(|&a, &b| seeds[a].cx.total_cmp(&seeds[b].cx).then(a.cmp(&b)));
    for (pos, &i) in by_x.iter().enumerate() {
        for &j in &by_x[pos + 1..] {
            let (a, b) = (&seeds[i], &seeds[j]);
            let dx = b.cx - a.cx;
            if dx >= params.merge_radius {
                break;
            }
            let dy = b.cy - a.cy;
            let same_blob = blob.labels()[a.pixel] == blob.labels()[b.pixel];
            if same_blob && dx * dx + dy * dy < r2 {
                let (ri, rj) = (uf.find(i), uf.find(j));
                if ri != rj {
                    let (hi, lo) = if peak[ri] >= peak[rj] {
                        (ri, rj)
                    } else {
                        (rj, ri)
                    };
                    uf.union_into(hi, lo);
                    peak[hi] = peak[hi].max(peak[lo]);
                }
            }
        }
    }

    const NONE: usize = usize::MAX;
    const LINE: usize = usize::MAX - 1;
    let mut owner = seed_of;
    let mut queued = vec![false; w * h];
    let mut heap = BinaryHeap::new();
    let mut order = 0u64;
    let mut push = |heap: &mut BinaryHeap<Queued>, queued: &mut Vec<bool>, j: usize| {
        if !queued[j] {
            queued[j] = true;
            heap.push(Queued {
                level: level[j],
                order,
                index: j,
            });
            order += 1;
        }
    };
    for i in 0..w * h {
        if owner[i] != NONE {
            queued[i] = true;
        }
    }
    for i in 0..w * h {
        if owner[i] < LINE {
            for (nx, ny) in neighbors(i % w, i / w, w, h, &N8) {
                let j = ny * w + nx;
                if mask.bits()[j] && owner[j] == NONE {
                    push(&mut heap, &mut queued, j);
                }
            }
        }
    }

    let mut touching: Vec<usize> = Vec::with_capacity(8);
    while let Some(Queued { index: i, .. }) = heap.pop() {
        let (x, y) = (i % w, i / w);
        touching.clear();
        for (nx, ny) in neighbors(x, y, w, h, &N8) {
            let o = owner[ny * w + nx];
            if o < LINE {
                let r = uf.find(o);
                if !touching.contains(&r) {
                    touching.push(r);
                }
            }
        }
        if touching.len() > 1 {
            let top = *touching
                .iter()
                .max_by(|&&a, &&b| peak[a].total_cmp(&peak[b]).then(b.cmp(&a)))
                .expect("non-empty");
            for &other in touching.iter().filter(|&&o| o != top) {
                if peak[other] - level[i] < params.tolerance {
                    uf.union_into(top, other);
                }
            }
            let root = uf.find(top);
            touching.retain(|&o| uf.find(o) != root);
            touching.push(root);
        }
        match touching.as_slice() {
            [only] => {
                owner[i] = *only;
                for (nx, ny) in neighbors(x, y, w, h, &N8) {
                    let j = ny * w + nx;
                    if mask.bits()[j] && owner[j] == NONE {
                        push(&mut heap, &mut queued, j);
                    }
                }
            }
            _ => owner[i] = LINE,
        }
    }

    let raw: Vec<u32> = owner
        .iter()
        .map(|&o| if o < LINE { uf.find(o) as u32 + 1 } else { 0 })
        .collect();
    // A merged basin cut in two by a third one becomes two labels.
    LabelMap::compact(w, h, &split_components(w, h, &raw))
}

/// Relabels 8-connected runs of equal non-zero values, in raster order.
fn split_components(w: usize, h: usize, raw: &[u32]) -> Vec<u32> {
    let mut labels = vec![0u32; w * h];
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if raw[start] == 0 || labels[start] != 0 {
            continue;
        }
        next += 1;
        labels[start] = next;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            for (nx, ny) in neighbors(i % w, i / w, w, h, &N8) {
                let j = ny * w + nx;
                if raw[j] == raw[start] && labels[j] == 0 {
                    labels[j] = next;
                    queue.push_back(j);
                }
            }
        }
    }
    labels
}

/// 8-connected components, labeled `1..=K` in raster first-encounter order.
pub fn connected_components(mask: &BinaryMask) -> LabelMap {
    let (w, h) = (mask.width(), mask.height());
    let raw: Vec<u32> = mask.bits().iter().map(|&b| u32::from(b)).collect();
    LabelMap::compact(w, h, &split_components(w, h, &raw))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk(w: usize, h: usize, cx: f64, cy: f64, r: f64) -> BinaryMask {
        BinaryMask::from_fn(w, h, |x, y| {
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            dx * dx + dy * dy <= r * r
        })
        .unwrap()
    }

    #[test]
    fn fills_annulus() {
        let ring = BinaryMask::from_fn(21, 21, |x, y| {
            let d2 = (x as f64 - 10.0).powi(2) + (y as f64 - 10.0).powi(2);
            (16.0..=64.0).contains(&d2)
        })
        .unwrap();
        assert_eq!(fill_holes(&ring), disk(21, 21, 10.0, 10.0, 8.0));
    }

    #[test]
    fn border_touching_background_is_kept() {
        let m = BinaryMask::from_ascii(&["##..", "#...", "...#"]).unwrap();
        assert_eq!(fill_holes(&m), m);
    }

    #[test]
    fn nested_rings_fill_both_holes() {
        let m = BinaryMask::from_ascii(&[
            "#########",
            "#.......#",
            "#.#####.#",
            "#.#...#.#",
            "#.#####.#",
            "#.......#",
            "#########",
        ])
        .unwrap();
        assert_eq!(fill_holes(&m).count(), 63);
    }

    #[test]
    fn distance_special_cases() {
        let mut single = BinaryMask::empty(5, 5).unwrap();
        single.set(2, 2, true);
        let d = distance_transform(&single);
        assert_eq!(d.get(2, 2), 1.0);
        assert_eq!(d.values().iter().filter(|&&v| v != 0.0).count(), 1);

        let full = BinaryMask::from_fn(5, 5, |_, _| true).unwrap();
        let d = distance_transform(&full);
        assert_eq!(d.get(2, 2), 3.0);
        assert_eq!(d.get(0, 0), 1.0);
        assert_eq!(d.get(1, 2), 2.0);

        let empty = BinaryMask::empty(4, 3).unwrap();
        assert!(distance_transform(&empty)
            .values()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn watershed_single_disk_and_empty() {
        let m = disk(41, 41, 20.0, 20.0, 15.0);
        assert_eq!(watershed_split(&m).count(), 1);
        let e = BinaryMask::empty(6, 6).unwrap();
        let l = watershed_split(&e);
        assert_eq!(l.count(), 0);
        assert!(l.labels().iter().all(|&v| v == 0));
    }

    #[test]
    fn connectivity_rules() {
        let diag = BinaryMask::from_ascii(&["#.", ".#"]).unwrap();
        assert_eq!(connected_components(&diag).count(), 1);
        let apart = BinaryMask::from_ascii(&["#.#"]).unwrap();
        let l = connected_components(&apart);
        assert_eq!(l.labels(), &[1, 0, 2]);
    }
}
