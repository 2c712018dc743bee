use std::f64::consts::PI;

use crowncount_core::domainfilter::{apply_constraints, ConstraintConfig};
use crowncount_core::particles::Detection;
use proptest::prelude::*;

fn det(id: u32, x: f64, y: f64, radius: f64, score: f64) -> Detection {
    Detection {
        id,
        centroid_x: x,
        centroid_y: y,
        area: PI * radius * radius,
        major: 2.0 * radius,
        minor: 2.0 * radius,
        angle: 0.0,
        score,
    }
}

fn scene() -> impl Strategy<Value = Vec<Detection>> {
    (
        2usize..7,
        2usize..7,
        prop::collection::vec(
            (0.0f64..300.0, 0.0f64..300.0, 3.0f64..25.0, 0.0f64..1.0),
            0..15,
        ),
        any::<u64>(),
    )
        .prop_map(|(rows, cols, extra, jseed)| {
            let mut out = Vec::new();
            let mut s = jseed | 1;
            let mut jitter = || {
                s = s
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                ((s >> 33) as f64 / (1u64 << 31) as f64 - 0.5) * 3.0
            };
            for r in 0..rows {
                for c in 0..cols {
                    let id = out.len() as u32 + 1;
                    out.push(det(
                        id,
                        24.0 + c as f64 * 48.0 + jitter(),
                        24.0 + r as f64 * 48.0 + jitter(),
                        14.0,
                        0.8,
                    ));
                }
            }
            for (x, y, r, p) in extra {
                let id = out.len() as u32 + 1;
                out.push(det(id, x, y, r, p));
            }
            out
        })
}

fn config() -> ConstraintConfig {
    ConstraintConfig {
        radius_min: 8.0,
        radius_max: 22.0,
        min_spacing: 24.0,
        row_tolerance: 5.0,
        neighbor_k: 4,
        enable_row_rule: true,
    }
}

fn ids(d: &[Detection]) -> Vec<u32> {
    let mut v: Vec<u32> = d.iter().map(|d| d.id).collect();
    v.sort_unstable();
    v
}

proptest! {
    #[test]
    fn kept_and_removed_partition_input(d in scene()) {
        let r = apply_constraints(&d, &config()).unwrap();
        let mut all = ids(&r.kept);
        all.extend(r.removed.iter().map(|m| m.detection.id));
        all.sort_unstable();
        prop_assert_eq!(all, ids(&d));
        prop_assert_eq!(r.removed_count, r.removed.len());
    }

    #[test]
    fn kept_pairs_respect_spacing(d in scene()) {
        let cfg = config();
        let r = apply_constraints(&d, &cfg).unwrap();
        for (i, a) in r.kept.iter().enumerate() {
            for b in &r.kept[i + 1..] {
                prop_assert!(a.distance_to(b) >= cfg.min_spacing);
            }
        }
    }

    #[test]
    fn filtering_is_idempotent(d in scene()) {
        let cfg = config();
        let r = apply_constraints(&d, &cfg).unwrap();
        let again = apply_constraints(&r.kept, &cfg).unwrap();
        prop_assert_eq!(again.removed_count, 0);
        prop_assert_eq!(again.kept, r.kept);
    }

    #[test]
    fn row_rule_only_removes(d in scene()) {
        let with = apply_constraints(&d, &config()).unwrap();
        let without = apply_constraints(&d, &ConstraintConfig { enable_row_rule: false, ..config() }).unwrap();
        prop_assert!(without.kept.len() >= with.kept.len());
    }

    #[test]
    fn input_order_does_not_matter(d in scene(), rot in 0usize..50) {
        let cfg = ConstraintConfig { enable_row_rule: false, ..config() };
        let mut shuffled = d.clone();
        shuffled.reverse();
        if !shuffled.is_empty() {
            let k = rot % shuffled.len();
            shuffled.rotate_left(k);
        }
        let a = apply_constraints(&d, &cfg).unwrap();
        let b = apply_constraints(&shuffled, &cfg).unwrap();
        prop_assert_eq!(ids(&a.kept), ids(&b.kept));
        let a = apply_constraints(&d, &config()).unwrap();
        let b = apply_constraints(&shuffled, &config()).unwrap();
        prop_assert_eq!(ids(&a.kept), ids(&b.kept));
    }
}
