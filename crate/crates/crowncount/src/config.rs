//! Pipeline configuration: one JSON document drives every subcommand.

use std::path::{Path, PathBuf};

use crowncount_core::classifiers::{default_specs, ClassifierKind, ClassifierSpec};
use crowncount_core::domainfilter::ConstraintConfig;
use crowncount_core::features::FeatureConfig;
use crowncount_core::seed::derive;
use crowncount_core::segmentation::{DEFAULT_MAX_PER_CLASS, DEFAULT_THRESHOLD};
use crowncount_core::synth::PlantationSpec;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Input and output locations. Unset files default to names inside `out_dir`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub out_dir: PathBuf,
    pub image: Option<PathBuf>,
    pub annotation: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    pub model: Option<PathBuf>,
    /// Detections CSV read by `filter`.
    pub detections: Option<PathBuf>,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            out_dir: PathBuf::from("out"),
            image: None,
            annotation: None,
            truth: None,
            model: None,
            detections: None,
        }
    }
}

impl Paths {
    fn resolve(&mut self) {
        let dir = self.out_dir.clone();
        let fill = |slot: &mut Option<PathBuf>, name: &str| {
            slot.get_or_insert_with(|| dir.join(name));
        };
        fill(&mut self.image, "image.png");
        fill(&mut self.annotation, "annotation.png");
        fill(&mut self.truth, "truth.csv");
        fill(&mut self.model, "model.json");
        fill(&mut self.detections, "detections.csv");
    }

    pub fn image(&self) -> &Path {
        self.image.as_deref().expect("resolved")
    }

    pub fn annotation(&self) -> &Path {
        self.annotation.as_deref().expect("resolved")
    }

    pub fn truth(&self) -> &Path {
        self.truth.as_deref().expect("resolved")
    }

    pub fn model(&self) -> &Path {
        self.model.as_deref().expect("resolved")
    }

    pub fn detections(&self) -> &Path {
        self.detections.as_deref().expect("resolved")
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSettings {
    /// Empty means every classifier with default hyperparameters.
    pub classifiers: Vec<ClassifierSpec>,
    /// Runs classifiers concurrently; timing columns are left empty.
    pub parallel: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub features: FeatureConfig,
    pub classifier: ClassifierSpec,
    pub max_per_class: usize,
    pub binarize_threshold: f64,
    /// Equivalent-area radius in pixels.
    pub min_radius: f64,
    /// `null` turns the domain filter off.
    pub constraints: Option<ConstraintConfig>,
    pub synth: PlantationSpec,
    pub bench: BenchSettings,
    pub paths: Paths,
}

/// Desk-scale constraints for the synthetic plantations: 48 px spacing,
/// 12-18 px crowns. Eight neighbors keep a row partner across planting gaps.
pub fn synthetic_constraints() -> ConstraintConfig {
    ConstraintConfig {
        neighbor_k: 8,
        ..ConstraintConfig::default()
    }
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            features: FeatureConfig::default(),
            classifier: ClassifierSpec::new(ClassifierKind::RandomForest),
            max_per_class: DEFAULT_MAX_PER_CLASS,
            binarize_threshold: DEFAULT_THRESHOLD,
            min_radius: 10.0,
            constraints: Some(synthetic_constraints()),
            synth: PlantationSpec::default(),
            bench: BenchSettings::default(),
            paths: Paths::default(),
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::format(path, e))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Sub-seeds are hashed from `seed` and the component name; seeds given
    /// inside sub-configs are replaced.
    pub fn training_seed(&self) -> u64 {
        derive(self.seed, "training")
    }

    /// Fills derived seeds, default paths and the default classifier list,
    /// then validates. The result is a fixpoint.
    pub fn resolve(mut self) -> Result<Self> {
        self.synth.seed = derive(self.seed, "synth");
        self.classifier.seed = derive(self.seed, "classifier");
        if self.bench.classifiers.is_empty() {
            self.bench.classifiers = default_specs(0);
        }
        for spec in &mut self.bench.classifiers {
            spec.seed = derive(self.seed, "classifier");
        }
        self.paths.resolve();
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.features.validate()?;
        self.classifier.validate()?;
        for spec in &self.bench.classifiers {
            spec.validate()?;
        }
        if !(self.binarize_threshold > 0.0 && self.binarize_threshold < 1.0) {
            return Err(Error::Config(
                "binarize_threshold must lie in (0, 1)".into(),
            ));
        }
        if !(self.min_radius >= 0.0 && self.min_radius.is_finite()) {
            return Err(Error::Config(
                "min_radius must be a finite value >= 0".into(),
            ));
        }
        if self.max_per_class == 0 {
            return Err(Error::Config("max_per_class must be at least 1".into()));
        }
        if let Some(c) = &self.constraints {
            c.validate()?;
        }
        self.synth.validate()?;
        Ok(())
    }
}
