//! Timed benchmark sweep over classifiers on one annotated image.

use std::time::Instant;

use crowncount_core::bench::{
    count_from_probability, fingerprint, BenchReport, BenchRow, CountParams, Score, Timing,
};
use crowncount_core::classifiers::{fit, ClassifierSpec, TrainingSet};
use crowncount_core::features::{build_stack, FeatureConfig, FeatureStack};
use crowncount_core::imaging::RasterImage;
use crowncount_core::segmentation::{classify_image, extract_training, AnnotationMask};
use crowncount_core::synth::GroundTruth;
use rayon::prelude::*;
use serde::Serialize;

use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchConfig {
    pub features: FeatureConfig,
    pub max_per_class: usize,
    /// Shared by all classifiers so they see the same training pixels.
    pub training_seed: u64,
    pub count: CountParams,
    /// Concurrent sweep without timing columns.
    pub parallel: bool,
}

impl BenchConfig {
    fn fingerprint(&self, specs: &[ClassifierSpec]) -> String {
        let text = serde_json::to_string(&(self, specs)).expect("config serializes");
        fingerprint(text.as_bytes())
    }
}

fn run_one(
    spec: &ClassifierSpec,
    stack: &FeatureStack,
    data: &TrainingSet,
    truth: i64,
    cfg: &BenchConfig,
) -> BenchRow {
    let name = spec.label();
    let start = Instant::now();
    let model = match fit(spec, data) {
        Ok(m) => m,
        Err(e) => return BenchRow::failed(name, None, e.to_string()),
    };
    let trained = Instant::now();
    let map = classify_image(&model, stack);
    let done = Instant::now();
    let timing = (!cfg.parallel).then(|| {
        Timing::new(
            (trained - start).as_secs_f64(),
            (done - trained).as_secs_f64(),
        )
    });
    let outcome = map.and_then(|m| count_from_probability(&m, &cfg.count));
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => return BenchRow::failed(name, timing, e.to_string()),
    };
    let raw = Score::new(outcome.raw_count() as i64, truth);
    let filtered = outcome
        .filtered_count()
        .map(|c| Score::new(c as i64, truth))
        .transpose();
    match (raw, filtered) {
        (Ok(raw), Ok(filtered)) => BenchRow {
            classifier: name,
            timing,
            raw: Some(raw),
            filtered,
            failure: None,
        },
        (Err(e), _) | (_, Err(e)) => BenchRow::failed(name, timing, e.to_string()),
    }
}

/// Builds the feature stack and training set once, then for each spec fits
/// (timed), classifies (timed) and counts. A failing classifier becomes a
/// failed row; errors before the sweep abort it.
pub fn run_bench(
    image: &RasterImage,
    mask: &AnnotationMask,
    truth: &GroundTruth,
    specs: &[ClassifierSpec],
    cfg: &BenchConfig,
) -> Result<BenchReport> {
    let truth_count = truth.count as i64;
    if truth_count < 1 {
        return Err(crowncount_core::Error::InvalidTruth.into());
    }
    if specs.is_empty() {
        return Err(crate::Error::Config(
            "bench needs at least one classifier".into(),
        ));
    }
    let stack = build_stack(image, &cfg.features)?;
    let data = extract_training(&stack, mask, cfg.max_per_class, cfg.training_seed)?;
    let rows: Vec<BenchRow> = if cfg.parallel {
        specs
            .par_iter()
            .map(|s| run_one(s, &stack, &data, truth_count, cfg))
            .collect()
    } else {
        specs
            .iter()
            .map(|s| run_one(s, &stack, &data, truth_count, cfg))
            .collect()
    };
    Ok(BenchReport::new(truth_count, rows, cfg.fingerprint(specs)))
}
