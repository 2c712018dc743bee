//! JSON model files: a versioned envelope around a fitted classifier and
//! the feature configuration it was trained on.

use std::path::Path;

use crowncount_core::classifiers::ClassifierModel;
use crowncount_core::features::FeatureConfig;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const MODEL_FORMAT: &str = "crowncount-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub features: FeatureConfig,
    pub model: ClassifierModel,
}

impl ModelFile {
    pub fn new(features: FeatureConfig, model: ClassifierModel) -> Self {
        Self {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            features,
            model,
        }
    }
}

pub fn save_model(path: &Path, file: &ModelFile) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let json = serde_json::to_string(file).map_err(|e| Error::format(path, e))?;
    std::fs::write(path, json).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<ModelFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::format(path, e))?;
    if value.get("format").and_then(|v| v.as_str()) != Some(MODEL_FORMAT) {
        return Err(Error::format(path, "not a crowncount model file"));
    }
    match value.get("version").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(MODEL_VERSION) => {}
        other => {
            return Err(Error::format(
                path,
                format!("unsupported model version {other:?}"),
            ))
        }
    }
    let file: ModelFile = serde_json::from_value(value).map_err(|e| Error::format(path, e))?;
    file.features.validate()?;
    Ok(file)
}
