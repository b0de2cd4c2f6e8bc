use serde::{Deserialize, Serialize};

use super::{parallel_map, train, Example, TrainConfig, TrainError};
use crate::model::{Model, ModelConfig};
use crate::rng::{below, prng, uniform};

/// Random-search space. Each trial draws, in order, a log-uniform learning
/// rate, then `d_h`, dropout and batch size uniformly from their lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HpoSpace {
    pub lr_min: f64,
    pub lr_max: f64,
    pub d_h: Vec<usize>,
    pub dropout: Vec<f64>,
    pub batch_size: Vec<usize>,
    pub trials: usize,
}

impl Default for HpoSpace {
    fn default() -> Self {
        HpoSpace {
            lr_min: 1e-4,
            lr_max: 1e-2,
            d_h: vec![128, 256],
            dropout: vec![0.0, 0.1, 0.3],
            batch_size: vec![16, 32, 64],
            trials: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialParams {
    pub learning_rate: f64,
    pub d_h: usize,
    pub dropout: f64,
    pub batch_size: usize,
}

impl TrialParams {
    pub fn apply(&self, model: &ModelConfig, train: &TrainConfig) -> (ModelConfig, TrainConfig) {
        (
            ModelConfig {
                d_h: self.d_h,
                dropout: self.dropout,
                ..model.clone()
            },
            TrainConfig {
                learning_rate: self.learning_rate,
                batch_size: self.batch_size,
                ..train.clone()
            },
        )
    }
}

impl HpoSpace {
    pub fn validate(&self) -> Result<(), TrainError> {
        let ok = self.lr_min > 0.0
            && self.lr_min <= self.lr_max
            && self.lr_max.is_finite()
            && !self.d_h.is_empty()
            && !self.dropout.is_empty()
            && !self.batch_size.is_empty()
            && self.trials > 0;
        if ok {
            Ok(())
        } else {
            Err(TrainError::Config(format!("invalid search space {self:?}")))
        }
    }

    pub fn sample(&self, seed: u64) -> Result<Vec<TrialParams>, TrainError> {
        self.validate()?;
        let mut rng = prng(seed);
        let (lo, hi) = (self.lr_min.ln(), self.lr_max.ln());
        Ok((0..self.trials)
            .map(|_| {
                let learning_rate = if lo == hi { self.lr_min } else { uniform(&mut rng, lo, hi).exp() };
                TrialParams {
                    learning_rate,
                    d_h: self.d_h[below(&mut rng, self.d_h.len())],
                    dropout: self.dropout[below(&mut rng, self.dropout.len())],
                    batch_size: self.batch_size[below(&mut rng, self.batch_size.len())],
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub params: TrialParams,
    pub val_auc: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HpoResult {
    pub seed: u64,
    pub trials: Vec<TrialResult>,
    pub best_trial: usize,
}

impl HpoResult {
    pub fn best(&self) -> &TrialResult {
        &self.trials[self.best_trial]
    }
}

/// Runs every sampled trial through `score` (larger is better). Failed
/// trials are logged and skipped; the best is the largest score, ties going
/// to the earlier trial.
pub fn hpo_search_with<F>(space: &HpoSpace, seed: u64, jobs: usize, score: F) -> Result<HpoResult, TrainError>
where
    F: Fn(usize, &TrialParams) -> Result<f64, TrainError> + Sync,
{
    let params = space.sample(seed)?;
    let outcomes = parallel_map(params.len(), jobs, |i| score(i, &params[i]));
    let mut trials = Vec::with_capacity(params.len());
    let mut best: Option<(usize, f64)> = None;
    for (i, (p, outcome)) in params.into_iter().zip(outcomes).enumerate() {
        let (val_auc, error) = match outcome {
            Ok(v) => (Some(v), None),
            Err(e) => {
                log::warn!("trial {i} failed: {e}");
                (None, Some(e.to_string()))
            }
        };
        if let Some(v) = val_auc {
            if best.map_or(true, |(_, b)| v > b) {
                best = Some((i, v));
            }
        }
        trials.push(TrialResult {
            trial: i,
            params: p,
            val_auc,
            error,
        });
    }
    let (best_trial, _) = best.ok_or(TrainError::AllTrialsFailed(trials.len()))?;
    Ok(HpoResult {
        seed,
        trials,
        best_trial,
    })
}

/// Random search scored by each trial's best validation AUC. Every trial
/// initializes its model from `base_train.seed`.
pub fn hpo_search(
    space: &HpoSpace,
    base_model: &ModelConfig,
    base_train: &TrainConfig,
    train_set: &[Example],
    val_set: &[Example],
    seed: u64,
    jobs: usize,
) -> Result<HpoResult, TrainError> {
    hpo_search_with(space, seed, jobs, |_, p| {
        let (mc, tc) = p.apply(base_model, base_train);
        let model = Model::new(mc, tc.seed)?;
        Ok(train(model, train_set, val_set, &tc)?.summary.best_val_auc)
    })
}
