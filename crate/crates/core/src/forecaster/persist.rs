//! Model file: a JSON document
//!
//! ```text
//! { "format": "gridcast-model", "format_version": 1,
//!   "config": {...}, "normalizer": {...},
//!   "parameters": [ {"name", "shape", "values"}, ... ] }
//! ```
//!
//! Parameters appear in [`Network::named_params`] order. Numbers are written
//! in shortest round-trip decimal form and parsed with correct rounding, so
//! a save/load cycle is bit-exact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{ForecastModel, ModelConfig, Network};
use crate::data::NormalizerStats;
use crate::error::{Error, ModelFileError, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;
const FORMAT_TAG: &str = "gridcast-model";

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    format_version: u32,
    config: ModelConfig,
    normalizer: NormalizerStats,
    parameters: Vec<NamedArray>,
}

#[derive(Serialize, Deserialize)]
struct NamedArray {
    name: String,
    shape: Vec<usize>,
    values: Vec<f64>,
}

pub fn model_to_string(model: &ForecastModel) -> String {
    let parameters = model
        .network
        .named_params()
        .into_iter()
        .map(|(name, shape, values)| NamedArray {
            name,
            shape: match shape {
                super::ParamShape::Weight { rows, cols } => vec![rows, cols],
                super::ParamShape::Bias { len } => vec![len],
            },
            values: values.to_vec(),
        })
        .collect();
    let file = ModelFile {
        format: FORMAT_TAG.into(),
        format_version: MODEL_FORMAT_VERSION,
        config: model.config.clone(),
        normalizer: model.normalizer.clone(),
        parameters,
    };
    let mut text = serde_json::to_string_pretty(&file).expect("model serializes");
    text.push('\n');
    text
}

pub fn model_from_str(text: &str) -> Result<ForecastModel> {
    let value: Value = serde_json::from_str(text).map_err(|e| {
        if e.is_eof() {
            ModelFileError::Truncated
        } else {
            ModelFileError::Format(e.to_string())
        }
    })?;
    let format = value.get("format").and_then(Value::as_str);
    if format != Some(FORMAT_TAG) {
        return Err(ModelFileError::Format(format!("format tag is {format:?}")).into());
    }
    let version = value
        .get("format_version")
        .and_then(Value::as_u64)
        .ok_or_else(|| ModelFileError::Format("missing format_version".into()))?;
    if version != u64::from(MODEL_FORMAT_VERSION) {
        return Err(ModelFileError::Version {
            found: version.try_into().unwrap_or(u32::MAX),
            supported: MODEL_FORMAT_VERSION,
        }
        .into());
    }
    let file: ModelFile =
        serde_json::from_value(value).map_err(|e| ModelFileError::Format(e.to_string()))?;
    file.config.validate()?;

    let mut network = Network::zeros(&file.config);
    let mut given = file.parameters.into_iter();
    for (name, shape, slot) in network.named_params_mut() {
        let array = given
            .next()
            .ok_or_else(|| ModelFileError::MissingParam(name.clone()))?;
        if array.name != name {
            return Err(ModelFileError::MissingParam(name).into());
        }
        if array.values.len() != shape.len() || array.shape.iter().product::<usize>() != shape.len() {
            return Err(ModelFileError::ParamShape {
                name,
                expected: shape.len(),
                found: array.values.len(),
            }
            .into());
        }
        slot.copy_from_slice(&array.values);
    }
    if let Some(extra) = given.next() {
        return Err(ModelFileError::UnexpectedParam(extra.name).into());
    }
    ForecastModel::new(file.config, network, file.normalizer)
}

pub fn save_model(model: &ForecastModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model_to_string(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ForecastModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_str(&text)
}
