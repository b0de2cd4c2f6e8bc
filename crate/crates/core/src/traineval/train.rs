use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{roc_auc, TrainError};
use crate::dataset::PdcRecord;
use crate::model::{ChannelMask, EmbeddingTables, EpochRecord, Model, NetParams, RecordInputs};
use crate::ndmath::{Adam, AdamConfig, Tape, Tensor, Var};
use crate::rng::{prng, shuffle, Prng};

/// Offset separating the training stream (shuffling, dropout) from the
/// parameter-initialization stream of the same seed.
const TRAIN_STREAM: u64 = 0x7472_6169_6e00_0001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub max_epochs: usize,
    pub patience: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub pos_weight: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_epochs: 50,
            patience: 10,
            learning_rate: 1e-3,
            batch_size: 32,
            seed: 1,
            pos_weight: 1.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::Config(m.into()));
        if self.max_epochs == 0 {
            return bad("max_epochs must be at least 1");
        }
        if self.patience == 0 {
            return bad("patience must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(self.pos_weight > 0.0 && self.pos_weight.is_finite()) {
            return bad("pos_weight must be positive");
        }
        Ok(())
    }
}

/// Patience counter on a monitored score where larger is better.
#[derive(Debug, Clone)]
pub struct EarlyStopping {
    patience: usize,
    max_epochs: usize,
    epoch: usize,
    counter: usize,
    best: Option<(usize, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Observation {
    pub improved: bool,
    pub stop: bool,
}

impl EarlyStopping {
    pub fn new(patience: usize, max_epochs: usize) -> Self {
        EarlyStopping {
            patience,
            max_epochs,
            epoch: 0,
            counter: 0,
            best: None,
        }
    }

    /// Records the next epoch's score. Only a strictly larger score counts
    /// as an improvement; NaN never does.
    pub fn observe(&mut self, score: f64) -> Observation {
        self.epoch += 1;
        let improved = match self.best {
            None => !score.is_nan(),
            Some((_, best)) => score > best,
        };
        if improved {
            self.best = Some((self.epoch, score));
            self.counter = 0;
        } else {
            self.counter += 1;
        }
        Observation {
            improved,
            stop: self.counter >= self.patience || self.epoch >= self.max_epochs,
        }
    }

    /// `(epoch, score)` of the best epoch so far, 1-based.
    pub fn best(&self) -> Option<(usize, f64)> {
        self.best
    }
}

/// One unit of work for [`fit`].
pub trait Trainable {
    /// Runs epoch `epoch` (1-based) and returns `(train loss, validation AUC)`.
    fn run_epoch(&mut self, epoch: usize) -> Result<(f64, f64), TrainError>;
    /// Called after an epoch that improved the validation AUC.
    fn snapshot(&mut self);
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_val_auc: f64,
    pub stopped_early: bool,
}

/// Early-stopping driver shared by the network trainer and tests.
pub fn fit(trainable: &mut impl Trainable, config: &TrainConfig) -> Result<FitSummary, TrainError> {
    config.validate()?;
    let mut stopper = EarlyStopping::new(config.patience, config.max_epochs);
    let mut history = Vec::new();
    loop {
        let epoch = history.len() + 1;
        let (train_loss, val_auc) = trainable.run_epoch(epoch)?;
        let obs = stopper.observe(val_auc);
        if obs.improved {
            trainable.snapshot();
        }
        log::debug!("epoch {epoch}: loss {train_loss:.5}, val AUC {val_auc:.5}");
        history.push(EpochRecord {
            epoch,
            train_loss,
            val_auc,
            is_best: obs.improved,
        });
        if obs.stop {
            break;
        }
    }
    let (best_epoch, best_val_auc) = stopper
        .best()
        .ok_or_else(|| TrainError::Config("validation AUC was never defined".into()))?;
    Ok(FitSummary {
        stopped_early: history.len() < config.max_epochs,
        history,
        best_epoch,
        best_val_auc,
    })
}

/// A prepared record and its label.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub inputs: RecordInputs,
    pub label: u8,
}

/// Resolves the network inputs of every record, labelling each with its
/// stored label or the default threshold rule.
pub fn prepare_examples(
    model: &Model,
    records: &[PdcRecord],
    tables: &EmbeddingTables,
) -> Result<Vec<Example>, TrainError> {
    tables.validate(&model.config)?;
    records
        .iter()
        .map(|r| {
            Ok(Example {
                inputs: model.prepare(r, tables)?,
                label: r.label_or_assigned(),
            })
        })
        .collect()
}

/// Inference-mode probabilities.
pub fn predict_examples(model: &Model, examples: &[Example]) -> Result<Vec<f64>, TrainError> {
    examples
        .iter()
        .map(|e| Ok(model.predict(&e.inputs, ChannelMask::NONE)?))
        .collect()
}

pub fn example_labels(examples: &[Example]) -> Vec<u8> {
    examples.iter().map(|e| e.label).collect()
}

fn require_both_classes(examples: &[Example], what: &str) -> Result<(), TrainError> {
    if examples.is_empty() {
        return Err(TrainError::Empty(what.to_string()));
    }
    let pos = examples.iter().filter(|e| e.label == 1).count();
    if pos == 0 || pos == examples.len() {
        return Err(TrainError::SingleClass(what.to_string()));
    }
    Ok(())
}

/// Mini-batch Adam on the weighted BCE with validation-AUC early stopping.
pub struct NetTrainer<'d> {
    pub model: Model,
    best: NetParams<Tensor>,
    adam: Adam,
    rng: Prng,
    train: &'d [Example],
    val: &'d [Example],
    config: TrainConfig,
}

impl<'d> NetTrainer<'d> {
    pub fn new(
        model: Model,
        train: &'d [Example],
        val: &'d [Example],
        config: &TrainConfig,
    ) -> Result<Self, TrainError> {
        config.validate()?;
        if train.is_empty() {
            return Err(TrainError::Empty("training set".into()));
        }
        require_both_classes(val, "validation set")?;
        let sizes: Vec<usize> = model.params.named().iter().map(|(_, t)| t.len()).collect();
        Ok(NetTrainer {
            best: model.params.clone(),
            adam: Adam::new(AdamConfig::with_lr(config.learning_rate), &sizes),
            rng: prng(config.seed ^ TRAIN_STREAM),
            model,
            train,
            val,
            config: config.clone(),
        })
    }

    /// Best snapshot so far.
    pub fn into_best(self) -> Model {
        Model {
            config: self.model.config,
            params: self.best,
        }
    }
}

impl Trainable for NetTrainer<'_> {
    fn run_epoch(&mut self, _epoch: usize) -> Result<(f64, f64), TrainError> {
        let mut order: Vec<usize> = (0..self.train.len()).collect();
        shuffle(&mut order, &mut self.rng);
        let mut total = 0.0;
        for batch in order.chunks(self.config.batch_size) {
            let scale = 1.0 / batch.len() as f64;
            let mut acc: Vec<Vec<f64>> = self
                .model
                .params
                .named()
                .iter()
                .map(|(_, t)| vec![0.0; t.len()])
                .collect();
            for &i in batch {
                let ex = &self.train[i];
                let mut tape = Tape::new();
                let pv = self.model.param_vars(&mut tape);
                let loss = self.model.loss_vars(
                    &mut tape,
                    &pv,
                    &ex.inputs,
                    ex.label,
                    self.config.pos_weight,
                    Some(&mut self.rng),
                )?;
                total += tape.value(loss).item();
                let grads = tape.backward(loss)?;
                let vars: Vec<Var> = pv.named().into_iter().map(|(_, v)| *v).collect();
                for (a, v) in acc.iter_mut().zip(vars) {
                    if let Some(g) = grads.get(v) {
                        for (x, y) in a.iter_mut().zip(g) {
                            *x += scale * y;
                        }
                    }
                }
            }
            let params = self.model.params.named_mut().into_iter().map(|(_, t)| t.data_mut());
            self.adam.step(params, &acc);
        }
        let train_loss = total / self.train.len() as f64;
        let scores = predict_examples(&self.model, self.val)?;
        let val_auc = roc_auc(&scores, &example_labels(self.val))?;
        Ok((train_loss, val_auc))
    }

    fn snapshot(&mut self) {
        self.best = self.model.params.clone();
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters from the best validation epoch.
    pub model: Model,
    pub summary: FitSummary,
}

/// Trains `model` and returns its best validation snapshot.
pub fn train(
    model: Model,
    train: &[Example],
    val: &[Example],
    config: &TrainConfig,
) -> Result<TrainOutcome, TrainError> {
    let mut trainer = NetTrainer::new(model, train, val, config)?;
    let summary = fit(&mut trainer, config)?;
    Ok(TrainOutcome {
        model: trainer.into_best(),
        summary,
    })
}

/// Writes `epoch,train_loss,val_auc,is_best` rows.
pub fn write_history(path: &Path, history: &[EpochRecord]) -> Result<(), TrainError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["epoch", "train_loss", "val_auc", "is_best"])?;
    for r in history {
        w.write_record([
            r.epoch.to_string(),
            r.train_loss.to_string(),
            r.val_auc.to_string(),
            r.is_best.to_string(),
        ])?;
    }
    w.flush().map_err(|e| TrainError::io(path, e))
}
