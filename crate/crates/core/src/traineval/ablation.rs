use serde::{Deserialize, Serialize};

use super::{
    evaluate, example_labels, parallel_map, predict_examples, train, Example, MetricsReport,
    TrainConfig, TrainError,
};
use crate::model::{Ablation, Channel, Model, ModelConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantResult {
    /// `"full"` or the ablation label, such as `"w/o payload"`.
    pub variant: String,
    pub ablation: Option<Ablation>,
    pub masked: Vec<Channel>,
    pub best_epoch: usize,
    pub best_val_auc: f64,
    pub test: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub seed: u64,
    pub variants: Vec<VariantResult>,
}

impl AblationReport {
    /// Plain-text comparison table, one row per variant.
    pub fn table(&self) -> String {
        let mut out = format!("{:<12} {:>7} {:>7} {:>7} {:>7}\n", "variant", "AUC", "F1", "MCC", "BA");
        for v in &self.variants {
            out.push_str(&format!(
                "{:<12} {:>7.4} {:>7.4} {:>7.4} {:>7.4}\n",
                v.variant, v.test.auc, v.test.f1, v.test.mcc, v.test.ba
            ));
        }
        out
    }
}

/// Trains the full model and each of the five channel-masked variants from
/// the same seed, early-stopping on `val` and reporting on `test`.
pub fn ablation_study(
    model_config: &ModelConfig,
    train_set: &[Example],
    val: &[Example],
    test: &[Example],
    train_config: &TrainConfig,
    jobs: usize,
) -> Result<AblationReport, TrainError> {
    let variants: Vec<Option<Ablation>> =
        std::iter::once(None).chain(Ablation::ALL.into_iter().map(Some)).collect();
    let results = parallel_map(variants.len(), jobs, |i| -> Result<VariantResult, TrainError> {
        let ablation = variants[i];
        let config = ModelConfig {
            ablation,
            ..model_config.clone()
        };
        let model = Model::new(config, train_config.seed)?;
        let outcome = train(model, train_set, val, train_config)?;
        let scores = predict_examples(&outcome.model, test)?;
        Ok(VariantResult {
            variant: ablation.map_or("full", Ablation::label).to_string(),
            ablation,
            masked: ablation.map_or_else(Vec::new, |a| a.mask().channels()),
            best_epoch: outcome.summary.best_epoch,
            best_val_auc: outcome.summary.best_val_auc,
            test: evaluate(&scores, &example_labels(test), 0.5)?,
        })
    });
    Ok(AblationReport {
        seed: train_config.seed,
        variants: results.into_iter().collect::<Result<_, _>>()?,
    })
}
