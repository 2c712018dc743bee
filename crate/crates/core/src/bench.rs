//! Counting error metrics, benchmark report rows and the post-segmentation
//! counting pipeline shared by the CLI and the benchmark runner.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::domainfilter::{apply_constraints, ConstraintConfig, FilterReport};
use crate::imaging::{BinaryMask, LabelMap};
use crate::morphology::{fill_holes, watershed_split};
use crate::particles::{analyze_particles, Detection};
use crate::segmentation::{binarize, ProbabilityMap};
use crate::{Error, Result};

/// `(count - truth, 100·|count - truth| / truth)`.
pub fn signed_error_metrics(count: i64, truth: i64) -> Result<(i64, f64)> {
    if truth < 1 {
        return Err(Error::InvalidTruth);
    }
    let e = count - truth;
    Ok((e, 100.0 * e.unsigned_abs() as f64 / truth as f64))
}

/// `+21`, `-12`, `0`.
pub fn format_signed(e: i64) -> String {
    if e > 0 {
        alloc::format!("+{e}")
    } else {
        alloc::format!("{e}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountParams {
    pub threshold: f64,
    pub min_radius: f64,
    pub constraints: Option<ConstraintConfig>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountOutcome {
    /// Binarized and hole-filled.
    pub mask: BinaryMask,
    pub labels: LabelMap,
    pub detections: Vec<Detection>,
    pub filter: Option<FilterReport>,
}

impl CountOutcome {
    pub fn raw_count(&self) -> usize {
        self.detections.len()
    }

    pub fn filtered_count(&self) -> Option<usize> {
        self.filter.as_ref().map(|r| r.kept.len())
    }
}

/// Binarize, fill holes, watershed, particle analysis and the optional domain filter.
pub fn count_from_probability(map: &ProbabilityMap, params: &CountParams) -> Result<CountOutcome> {
    let mask = fill_holes(&binarize(map, params.threshold)?);
    let labels = watershed_split(&mask);
    let detections = analyze_particles(&labels, params.min_radius, Some(map))?;
    let filter = params
        .constraints
        .as_ref()
        .map(|c| apply_constraints(&detections, c))
        .transpose()?;
    Ok(CountOutcome {
        mask,
        labels,
        detections,
        filter,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub train_s: f64,
    pub segment_s: f64,
    pub total_s: f64,
}

impl Timing {
    pub fn new(train_s: f64, segment_s: f64) -> Self {
        Self {
            train_s,
            segment_s,
            total_s: train_s + segment_s,
        }
    }
}

/// Counting outcome against the truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub count: i64,
    pub signed_error: i64,
    pub error_pct: f64,
}

impl Score {
    pub fn new(count: i64, truth: i64) -> Result<Self> {
        let (signed_error, error_pct) = signed_error_metrics(count, truth)?;
        Ok(Self {
            count,
            signed_error,
            error_pct,
        })
    }
}

/// One classifier's line in the report. `raw` is `None` when the run failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub classifier: String,
    pub timing: Option<Timing>,
    pub raw: Option<Score>,
    pub filtered: Option<Score>,
    pub failure: Option<String>,
}

impl BenchRow {
    pub fn failed(classifier: String, timing: Option<Timing>, failure: String) -> Self {
        Self {
            classifier,
            timing,
            raw: None,
            filtered: None,
            failure: Some(failure),
        }
    }

    /// `-1` marks a failed run.
    pub fn count(&self) -> i64 {
        self.raw.map_or(-1, |s| s.count)
    }

    pub fn is_failed(&self) -> bool {
        self.raw.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub truth: i64,
    pub rows: Vec<BenchRow>,
    pub fingerprint: String,
}

impl BenchReport {
    pub fn new(truth: i64, mut rows: Vec<BenchRow>, fingerprint: String) -> Self {
        sort_rows(&mut rows);
        Self {
            truth,
            rows,
            fingerprint,
        }
    }
}

/// Ascending raw error percent, ties by classifier name; failed rows last.
pub fn sort_rows(rows: &mut [BenchRow]) {
    rows.sort_by(|a, b| match (&a.raw, &b.raw) {
        (Some(x), Some(y)) => x
            .error_pct
            .total_cmp(&y.error_pct)
            .then_with(|| a.classifier.cmp(&b.classifier)),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => a.classifier.cmp(&b.classifier),
    });
}

/// Rounds seconds to the 0.1 s resolution of the report.
pub fn round_seconds(s: f64) -> f64 {
    libm::round(s * 10.0) / 10.0
}

/// FNV-1a 64-bit digest rendered as 16 hex digits.
pub fn fingerprint(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    alloc::format!("{h:016x}")
}
