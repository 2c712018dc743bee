use crowncount_core::imaging::{BinaryMask, LabelMap};
use crowncount_core::morphology::{
    connected_components, distance_transform, fill_holes, watershed_split,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_mask(rng: &mut ChaCha8Rng) -> BinaryMask {
    let w = rng.random_range(1..=12);
    let h = rng.random_range(1..=12);
    let density: f64 = rng.random_range(0.1..0.95);
    let bits = (0..w * h).map(|_| rng.random_bool(density)).collect();
    BinaryMask::new(w, h, bits).unwrap()
}

// squared distance to the nearest background pixel, including the ring just outside the image
fn brute_force_sq(mask: &BinaryMask, x: usize, y: usize) -> i64 {
    if !mask.get(x, y) {
        return 0;
    }
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let mut best = i64::MAX;
    for by in -1..=h {
        for bx in -1..=w {
            let inside = bx >= 0 && by >= 0 && bx < w && by < h;
            if inside && mask.get(bx as usize, by as usize) {
                continue;
            }
            let (dx, dy) = (bx - x as i64, by - y as i64);
            best = best.min(dx * dx + dy * dy);
        }
    }
    best
}

#[test]
fn distance_transform_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let m = random_mask(&mut rng);
        let d = distance_transform(&m);
        for y in 0..m.height() {
            for x in 0..m.width() {
                let want = brute_force_sq(&m, x, y);
                assert_eq!(d.squared()[y * m.width() + x], want as f64, "({x},{y})");
                assert_eq!(d.get(x, y), (want as f64).sqrt());
            }
        }
    }
}

#[test]
fn fill_holes_idempotent_and_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..200 {
        let m = random_mask(&mut rng);
        let f = fill_holes(&m);
        assert_eq!(fill_holes(&f), f);
        assert!(m.bits().iter().zip(f.bits()).all(|(&a, &b)| !a || b));
    }
}

fn two_disks(r: f64) -> BinaryMask {
    let pad = 5.0;
    let (c1, c2) = (pad + r, pad + r + 1.5 * r);
    let w = (c2 + r + pad).ceil() as usize + 1;
    let h = (2.0 * (r + pad)).ceil() as usize + 1;
    let cy = r + pad;
    BinaryMask::from_fn(w, h, |x, y| {
        let (x, y) = (x as f64, y as f64);
        let d1 = (x - c1).powi(2) + (y - cy).powi(2);
        let d2 = (x - c2).powi(2) + (y - cy).powi(2);
        d1 <= r * r || d2 <= r * r
    })
    .unwrap()
}

fn assert_partition(mask: &BinaryMask, labels: &LabelMap) {
    for (i, (&b, &l)) in mask.bits().iter().zip(labels.labels()).enumerate() {
        assert!(b || l == 0, "label outside foreground at {i}");
    }
    for k in 1..=labels.count() {
        let region = BinaryMask::from_fn(labels.width(), labels.height(), |x, y| {
            labels.get(x, y) == k
        })
        .unwrap();
        assert_eq!(
            connected_components(&region).count(),
            1,
            "label {k} not 8-connected"
        );
    }
}

#[test]
fn watershed_splits_two_overlapping_disks() {
    for r in [15.0, 30.0, 60.0] {
        let m = two_disks(r);
        let labels = watershed_split(&m);
        assert_eq!(labels.count(), 2, "r = {r}");
        assert_partition(&m, &labels);
        let lines = m
            .bits()
            .iter()
            .zip(labels.labels())
            .filter(|(&b, &l)| b && l == 0)
            .count();
        assert!(lines > 0);
    }
}

#[test]
fn watershed_partitions_random_masks() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let m = random_mask(&mut rng);
        assert_partition(&m, &watershed_split(&m));
    }
}

#[test]
fn watershed_keeps_separate_blobs_apart() {
    let m = BinaryMask::from_fn(60, 20, |x, y| {
        let d1 = (x as f64 - 10.0).powi(2) + (y as f64 - 10.0).powi(2);
        let d2 = (x as f64 - 45.0).powi(2) + (y as f64 - 10.0).powi(2);
        d1 <= 64.0 || d2 <= 49.0
    })
    .unwrap();
    let l = watershed_split(&m);
    assert_eq!(l.count(), 2);
    assert_eq!(l.get(10, 10), 1);
    assert_eq!(l.get(45, 10), 2);
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, a: usize) -> usize {
        if self.0[a] != a {
            let r = self.find(self.0[a]);
            self.0[a] = r;
        }
        self.0[a]
    }
}

#[test]
fn components_match_union_find() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..200 {
        let m = random_mask(&mut rng);
        let (w, h) = (m.width(), m.height());
        let mut dsu = Dsu((0..w * h).collect());
        for y in 0..h {
            for x in 0..w {
                if !m.get(x, y) {
                    continue;
                }
                for (dx, dy) in [(1i64, 0i64), (0, 1), (1, 1), (-1, 1)] {
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if nx >= 0
                        && ny >= 0
                        && (nx as usize) < w
                        && (ny as usize) < h
                        && m.get(nx as usize, ny as usize)
                    {
                        let (a, b) = (dsu.find(y * w + x), dsu.find(ny as usize * w + nx as usize));
                        dsu.0[a] = b;
                    }
                }
            }
        }
        let labels = connected_components(&m);
        let mut roots = std::collections::BTreeSet::new();
        for i in 0..w * h {
            if m.bits()[i] {
                roots.insert(dsu.find(i));
            }
        }
        assert_eq!(labels.count() as usize, roots.len());
        for i in 0..w * h {
            for j in 0..w * h {
                if m.bits()[i] && m.bits()[j] {
                    let same = dsu.find(i) == dsu.find(j);
                    assert_eq!(labels.labels()[i] == labels.labels()[j], same);
                }
            }
        }
    }
}
