//! Plantation rules applied to detections: crown radius bounds, minimum
//! spacing between crowns and planting-row collinearity.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::particles::Detection;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstraintConfig {
    pub radius_min: f64,
    pub radius_max: f64,
    /// Center-to-center, pixels.
    pub min_spacing: f64,
    /// Largest accepted perpendicular distance to a local row line.
    pub row_tolerance: f64,
    pub neighbor_k: usize,
    pub enable_row_rule: bool,
}

impl Default for ConstraintConfig {
    fn default() -> Self {
        Self {
            radius_min: 8.0,
            radius_max: 30.0,
            min_spacing: 24.0,
            row_tolerance: 6.0,
            neighbor_k: 4,
            enable_row_rule: true,
        }
    }
}

impl ConstraintConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(format!("constraints: {msg}")));
        if !(self.radius_min >= 0.0 && self.radius_min < self.radius_max)
            || !self.radius_max.is_finite()
        {
            return bad("need 0 <= radius_min < radius_max");
        }
        if !(self.min_spacing > 0.0) || !self.min_spacing.is_finite() {
            return bad("min_spacing must be positive");
        }
        if !(self.row_tolerance >= 0.0) || !self.row_tolerance.is_finite() {
            return bad("row_tolerance must be >= 0");
        }
        if self.neighbor_k < 2 {
            return bad("neighbor_k must be at least 2");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reason {
    Radius,
    Spacing,
    Row,
}

impl Reason {
    pub fn as_str(self) -> &'static str {
        match self {
            Reason::Radius => "radius",
            Reason::Spacing => "spacing",
            Reason::Row => "row",
        }
    }
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Removal {
    pub detection: Detection,
    pub reason: Reason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    /// Survivors in input order.
    pub kept: Vec<Detection>,
    /// In the order the passes removed them.
    pub removed: Vec<Removal>,
    pub removed_count: usize,
}

pub fn count_after_filter(report: &FilterReport) -> usize {
    report.kept.len()
}

/// Point index bucketed by (row, column) cell for radius and nearest-neighbor queries.
struct Grid<'a> {
    points: &'a [(f64, f64)],
    cell: f64,
    cells: BTreeMap<(i64, i64), Vec<usize>>,
    extent: f64,
}

impl<'a> Grid<'a> {
    fn new(points: &'a [(f64, f64)], members: impl Iterator<Item = usize>, cell: f64) -> Self {
        let (mut lo, mut hi) = (
            (f64::INFINITY, f64::INFINITY),
            (f64::NEG_INFINITY, f64::NEG_INFINITY),
        );
        for &(x, y) in points {
            lo = (lo.0.min(x), lo.1.min(y));
            hi = (hi.0.max(x), hi.1.max(y));
        }
        let extent = if points.is_empty() {
            0.0
        } else {
            libm::hypot(hi.0 - lo.0, hi.1 - lo.1)
        };
        let mut grid = Self {
            points,
            cell,
            cells: BTreeMap::new(),
            extent,
        };
        for i in members {
            grid.insert(i);
        }
        grid
    }

    fn insert(&mut self, i: usize) {
        let (x, y) = self.points[i];
        self.cells
            .entry(Self::key(x, y, self.cell))
            .or_default()
            .push(i);
    }

    fn remove(&mut self, i: usize) {
        let (x, y) = self.points[i];
        if let Some(bucket) = self.cells.get_mut(&Self::key(x, y, self.cell)) {
            bucket.retain(|&j| j != i);
        }
    }

    fn key(x: f64, y: f64, cell: f64) -> (i64, i64) {
        (libm::floor(y / cell) as i64, libm::floor(x / cell) as i64)
    }

    /// Members other than `me` within `r` (inclusive) of `me`, unordered.
    fn within(&self, me: usize, r: f64, out: &mut Vec<usize>) {
        out.clear();
        let (x, y) = self.points[me];
        let (y0, x0) = Self::key(x - r, y - r, self.cell);
        let (y1, x1) = Self::key(x + r, y + r, self.cell);
        for cy in y0..=y1 {
            for (_, bucket) in self.cells.range((cy, x0)..=(cy, x1)) {
                for &j in bucket {
                    let (px, py) = self.points[j];
                    if j != me && libm::hypot(px - x, py - y) <= r {
                        out.push(j);
                    }
                }
            }
        }
    }

    /// Up to `k` nearest members, closest first; ties broken by position then index.
    fn nearest(&self, me: usize, k: usize) -> Vec<usize> {
        let mut found = Vec::new();
        let mut r = self.cell;
        loop {
            self.within(me, r, &mut found);
            if found.len() >= k || r > self.extent {
                break;
            }
            r *= 2.0;
        }
        let (x, y) = self.points[me];
        let pts = self.points;
        let dist = |j: usize| libm::hypot(pts[j].0 - x, pts[j].1 - y);
        found.sort_by(|&a, &b| {
            dist(a)
                .total_cmp(&dist(b))
                .then(pts[a].0.total_cmp(&pts[b].0))
                .then(pts[a].1.total_cmp(&pts[b].1))
                .then(a.cmp(&b))
        });
        found.truncate(k);
        found
    }
}

/// Higher priority survives a spacing conflict: larger score, then larger
/// area, then smaller id.
fn priority(a: &Detection, b: &Detection) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(b.area.total_cmp(&a.area))
        .then(a.id.cmp(&b.id))
        .then(a.centroid_x.total_cmp(&b.centroid_x))
        .then(a.centroid_y.total_cmp(&b.centroid_y))
}

fn line_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> Option<f64> {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len = libm::hypot(dx, dy);
    (len > 0.0).then(|| libm::fabs(dx * (p.1 - a.1) - dy * (p.0 - a.0)) / len)
}

/// Whether `me` lies on a local row through two of its nearest members, or
/// has too few close members to judge.
fn on_row(grid: &Grid<'_>, me: usize, config: &ConstraintConfig, scratch: &mut Vec<usize>) -> bool {
    grid.within(me, 3.0 * config.min_spacing, scratch);
    if scratch.len() < 2 {
        return true;
    }
    let near = grid.nearest(me, config.neighbor_k);
    let p = grid.points[me];
    near.iter().enumerate().any(|(i, &a)| {
        near[i + 1..].iter().any(|&b| {
            line_distance(p, grid.points[a], grid.points[b])
                .is_some_and(|d| d <= config.row_tolerance)
        })
    })
}

/// Runs the radius, spacing and (optionally) row passes in that order.
///
/// Spacing keeps detections greedily in priority order, dropping any that
/// come closer than `min_spacing` to one already kept, so the result does not
/// depend on input order. The row pass repeats until no detection is dropped.
/// In each round a detection that fails against the current set is given a
/// second check against the set without the other failures, so a spurious
/// neighbor cannot take a true crown down with it.
pub fn apply_constraints(
    detections: &[Detection],
    config: &ConstraintConfig,
) -> Result<FilterReport> {
    config.validate()?;
    let n = detections.len();
    let mut removed_reason: Vec<Option<Reason>> = alloc::vec![None; n];
    let mut removed_order: Vec<usize> = Vec::new();

    for (i, d) in detections.iter().enumerate() {
        let r = d.equivalent_radius();
        if !(r >= config.radius_min && r <= config.radius_max) {
            removed_reason[i] = Some(Reason::Radius);
            removed_order.push(i);
        }
    }

    let points: Vec<(f64, f64)> = detections
        .iter()
        .map(|d| (d.centroid_x, d.centroid_y))
        .collect();
    let mut order: Vec<usize> = (0..n).filter(|&i| removed_reason[i].is_none()).collect();
    order.sort_by(|&a, &b| priority(&detections[a], &detections[b]).then(a.cmp(&b)));
    let mut kept_cells: BTreeMap<(i64, i64), Vec<usize>> = BTreeMap::new();
    let cell = config.min_spacing;
    let mut spacing_removed = Vec::new();
    for &i in &order {
        let (x, y) = points[i];
        let (cy, cx) = Grid::key(x, y, cell);
        let clash = (cy - 1..=cy + 1).any(|gy| {
            kept_cells
                .range((gy, cx - 1)..=(gy, cx + 1))
                .any(|(_, bucket)| {
                    bucket.iter().any(|&j| {
                        libm::hypot(points[j].0 - x, points[j].1 - y) < config.min_spacing
                    })
                })
        });
        if clash {
            removed_reason[i] = Some(Reason::Spacing);
            spacing_removed.push(i);
        } else {
            kept_cells.entry((cy, cx)).or_default().push(i);
        }
    }
    spacing_removed.sort_unstable();
    removed_order.extend(spacing_removed);

    if config.enable_row_rule {
        let mut scratch = Vec::new();
        loop {
            let alive: Vec<usize> = (0..n).filter(|&i| removed_reason[i].is_none()).collect();
            let grid = Grid::new(&points, alive.iter().copied(), cell);
            let failing: Vec<usize> = alive
                .iter()
                .copied()
                .filter(|&i| !on_row(&grid, i, config, &mut scratch))
                .collect();
            if failing.is_empty() {
                break;
            }
            let mut trimmed = Grid::new(
                &points,
                alive
                    .iter()
                    .copied()
                    .filter(|i| failing.binary_search(i).is_err()),
                cell,
            );
            let mut dropped = Vec::new();
            for &i in &failing {
                trimmed.insert(i);
                if !on_row(&trimmed, i, config, &mut scratch) {
                    dropped.push(i);
                }
                trimmed.remove(i);
            }
            if dropped.is_empty() {
                break;
            }
            for &i in &dropped {
                removed_reason[i] = Some(Reason::Row);
            }
            removed_order.extend(dropped);
        }
    }

    let kept: Vec<Detection> = (0..n)
        .filter(|&i| removed_reason[i].is_none())
        .map(|i| detections[i].clone())
        .collect();
    let removed: Vec<Removal> = removed_order
        .into_iter()
        .map(|i| Removal {
            detection: detections[i].clone(),
            reason: removed_reason[i].expect("recorded"),
        })
        .collect();
    Ok(FilterReport {
        removed_count: removed.len(),
        kept,
        removed,
    })
}
