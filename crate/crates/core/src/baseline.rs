//! Logistic-regression baseline on linker and payload Morgan fingerprints
//! plus peptide composition and length.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chem::{morgan_fingerprint, parse_smiles, ChemError};
use crate::dataset::PdcRecord;
use crate::model::{read_envelope, write_envelope, ModelError};
use crate::peptide::aac_features;

pub const FINGERPRINT_BITS: usize = 1024;
pub const BASELINE_WIDTH: usize = 2 * FINGERPRINT_BITS + 20 + 1;
/// Peptide length at which the length feature saturates.
pub const LENGTH_CAP: usize = 64;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error(transparent)]
    Chem(#[from] ChemError),
    #[error(transparent)]
    Checkpoint(#[from] ModelError),
    #[error("feature width {got}, expected {expected}")]
    Width { expected: usize, got: usize },
    #[error("{features} feature rows but {labels} labels")]
    Length { features: usize, labels: usize },
    #[error("training data needs both classes and at least two examples")]
    SingleClass,
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// `morgan(linker) ++ morgan(payload) ++ aac(20) ++ min(T, 64) / 64`.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineFeatures(Vec<f64>);

impl BaselineFeatures {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

pub fn featurize_baseline(record: &PdcRecord) -> Result<BaselineFeatures, BaselineError> {
    let mut v = Vec::with_capacity(BASELINE_WIDTH);
    for smiles in [&record.linker_smiles, &record.payload_smiles] {
        let fp = morgan_fingerprint(&parse_smiles(smiles)?, 2, FINGERPRINT_BITS)?;
        v.extend(fp.to_f64());
    }
    v.extend(aac_features(&record.peptide));
    v.push(record.peptide.len().min(LENGTH_CAP) as f64 / LENGTH_CAP as f64);
    debug_assert_eq!(v.len(), BASELINE_WIDTH);
    Ok(BaselineFeatures(v))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrConfig {
    /// L2 strength on the weights; the bias is not penalized.
    pub lambda: f64,
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for LrConfig {
    fn default() -> Self {
        LrConfig {
            lambda: 1e-3,
            learning_rate: 0.1,
            epochs: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub lambda: f64,
}

impl LrModel {
    pub fn zeros(width: usize, lambda: f64) -> Self {
        LrModel {
            weights: vec![0.0; width],
            bias: 0.0,
            lambda,
        }
    }

    fn logit(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn check(model: &LrModel, features: &[Vec<f64>], labels: &[u8]) -> Result<(), BaselineError> {
    if features.len() != labels.len() {
        return Err(BaselineError::Length {
            features: features.len(),
            labels: labels.len(),
        });
    }
    if let Some(x) = features.iter().find(|x| x.len() != model.weights.len()) {
        return Err(BaselineError::Width {
            expected: model.weights.len(),
            got: x.len(),
        });
    }
    Ok(())
}

/// Mean BCE plus `lambda / 2 * |w|^2`.
pub fn lr_loss(model: &LrModel, features: &[Vec<f64>], labels: &[u8]) -> Result<f64, BaselineError> {
    check(model, features, labels)?;
    let n = features.len() as f64;
    let data: f64 = features
        .iter()
        .zip(labels)
        .map(|(x, &y)| {
            let z = model.logit(x);
            softplus(z) - f64::from(y) * z
        })
        .sum::<f64>()
        / n;
    let penalty = 0.5 * model.lambda * model.weights.iter().map(|w| w * w).sum::<f64>();
    Ok(data + penalty)
}

/// Gradient of the mean BCE term only, as `(d/dw, d/db)`.
pub fn lr_data_gradient(
    model: &LrModel,
    features: &[Vec<f64>],
    labels: &[u8],
) -> Result<(Vec<f64>, f64), BaselineError> {
    check(model, features, labels)?;
    let n = features.len() as f64;
    let mut gw = vec![0.0; model.weights.len()];
    let mut gb = 0.0;
    for (x, &y) in features.iter().zip(labels) {
        let r = (sigmoid(model.logit(x)) - f64::from(y)) / n;
        for (g, v) in gw.iter_mut().zip(x) {
            *g += r * v;
        }
        gb += r;
    }
    Ok((gw, gb))
}

/// Gradient of [`lr_loss`].
pub fn lr_gradient(
    model: &LrModel,
    features: &[Vec<f64>],
    labels: &[u8],
) -> Result<(Vec<f64>, f64), BaselineError> {
    let (mut gw, gb) = lr_data_gradient(model, features, labels)?;
    for (g, w) in gw.iter_mut().zip(&model.weights) {
        *g += model.lambda * w;
    }
    Ok((gw, gb))
}

/// Full-batch proximal gradient descent from zero weights: a gradient step
/// on the BCE term, then `w <- w / (1 + lr * lambda)`.
pub fn train_lr(features: &[Vec<f64>], labels: &[u8], config: &LrConfig) -> Result<LrModel, BaselineError> {
    if !(config.lambda >= 0.0 && config.learning_rate > 0.0) {
        return Err(BaselineError::Config(format!("{config:?}")));
    }
    let width = features.first().map_or(0, Vec::len);
    let mut model = LrModel::zeros(width, config.lambda);
    check(&model, features, labels)?;
    let pos = labels.iter().filter(|&&y| y == 1).count();
    if features.len() < 2 || pos == 0 || pos == labels.len() {
        return Err(BaselineError::SingleClass);
    }
    let shrink = 1.0 / (1.0 + config.learning_rate * config.lambda);
    for _ in 0..config.epochs {
        let (gw, gb) = lr_data_gradient(&model, features, labels)?;
        for (w, g) in model.weights.iter_mut().zip(gw) {
            *w = (*w - config.learning_rate * g) * shrink;
        }
        model.bias -= config.learning_rate * gb;
    }
    Ok(model)
}

/// `sigmoid(w . x + b)`.
pub fn predict_lr(model: &LrModel, x: &[f64]) -> Result<f64, BaselineError> {
    if x.len() != model.weights.len() {
        return Err(BaselineError::Width {
            expected: model.weights.len(),
            got: x.len(),
        });
    }
    Ok(sigmoid(model.logit(x)))
}

const KIND: &str = "logistic_regression";

pub fn save_lr(path: &Path, model: &LrModel) -> Result<(), BaselineError> {
    Ok(write_envelope(path, KIND, model)?)
}

pub fn load_lr(path: &Path) -> Result<LrModel, BaselineError> {
    let model: LrModel = read_envelope(path, KIND)?;
    if model.weights.iter().any(|w| !w.is_finite()) || !model.bias.is_finite() {
        return Err(ModelError::Corrupt("non-finite LR parameters".into()).into());
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softplus_is_stable() {
        assert_eq!(softplus(1000.0), 1000.0);
        assert!(softplus(-1000.0) >= 0.0);
        assert!((softplus(0.0) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn zero_model_predicts_half() {
        assert_eq!(predict_lr(&LrModel::zeros(3, 0.0), &[1.0, 2.0, 3.0]).unwrap(), 0.5);
        assert!(predict_lr(&LrModel::zeros(3, 0.0), &[1.0]).is_err());
    }
}
