use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    evaluate, example_labels, format_table, parallel_map, predict_examples, train, Example, MeanStd,
    MetricsReport, TrainConfig, TrainError, METRIC_NAMES, TABLE_COLUMNS,
};
use crate::dataset::kfold;
use crate::model::{Model, ModelConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub val_indices: Vec<usize>,
    pub best_epoch: usize,
    pub report: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValReport {
    pub k: usize,
    pub seed: u64,
    pub folds: Vec<FoldResult>,
    /// Mean and population standard deviation of each metric over folds.
    pub summary: BTreeMap<String, MeanStd>,
}

impl CrossValReport {
    /// Table with `mean ± std` cells.
    pub fn table(&self, model: &str) -> String {
        let cells = TABLE_COLUMNS.iter().map(|n| self.summary[*n].to_string()).collect();
        format_table(&[(model.to_string(), cells)])
    }

    pub fn summarize(folds: &[FoldResult]) -> BTreeMap<String, MeanStd> {
        METRIC_NAMES
            .iter()
            .map(|&name| {
                let values: Vec<f64> = folds
                    .iter()
                    .map(|f| f.report.get(name).expect("known metric"))
                    .collect();
                (name.to_string(), MeanStd::of(&values))
            })
            .collect()
    }
}

/// k-fold cross-validation. Fold `f` trains a fresh model (initialized and
/// trained with seed `train.seed + f`) on the other folds, early-stops on
/// fold `f` and reports metrics on it.
pub fn crossval(
    model_config: &ModelConfig,
    examples: &[Example],
    k: usize,
    seed: u64,
    train_config: &TrainConfig,
    jobs: usize,
) -> Result<CrossValReport, TrainError> {
    let folds = kfold(examples.len(), k, seed)?;
    for (f, (_, val)) in folds.iter().enumerate() {
        let pos = val.iter().filter(|&&i| examples[i].label == 1).count();
        if pos == 0 || pos == val.len() {
            return Err(TrainError::Fold {
                fold: f,
                source: Box::new(TrainError::SingleClass(format!("validation fold {f}"))),
            });
        }
    }
    let results = parallel_map(folds.len(), jobs, |f| {
        let (train_idx, val_idx) = &folds[f];
        let pick = |idx: &[usize]| idx.iter().map(|&i| examples[i].clone()).collect::<Vec<_>>();
        let (tr, va) = (pick(train_idx), pick(val_idx));
        let cfg = TrainConfig {
            seed: train_config.seed.wrapping_add(f as u64),
            ..train_config.clone()
        };
        let run = || -> Result<FoldResult, TrainError> {
            let model = Model::new(model_config.clone(), cfg.seed)?;
            let outcome = train(model, &tr, &va, &cfg)?;
            let scores = predict_examples(&outcome.model, &va)?;
            Ok(FoldResult {
                fold: f,
                val_indices: val_idx.clone(),
                best_epoch: outcome.summary.best_epoch,
                report: evaluate(&scores, &example_labels(&va), 0.5)?,
            })
        };
        run().map_err(|e| TrainError::Fold {
            fold: f,
            source: Box::new(e),
        })
    });
    let folds = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(CrossValReport {
        k,
        seed,
        summary: CrossValReport::summarize(&folds),
        folds,
    })
}
