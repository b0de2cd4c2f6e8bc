//! Training with validation-AUC early stopping, the ten-metric evaluation
//! suite, k-fold cross-validation, random hyperparameter search and the
//! channel ablation study.

mod ablation;
mod crossval;
mod hpo;
mod metrics;
mod train;

pub use ablation::{ablation_study, AblationReport, VariantResult};
pub use crossval::{crossval, CrossValReport, FoldResult};
pub use hpo::{hpo_search, hpo_search_with, HpoResult, HpoSpace, TrialParams, TrialResult};
pub use metrics::{
    evaluate, format_table, pr_auc, roc_auc, ConfusionCounts, CountMetrics, MeanStd,
    MetricsError, MetricsReport, METRIC_NAMES, TABLE_COLUMNS,
};
pub use train::{
    example_labels, fit, predict_examples, prepare_examples, train, write_history,
    EarlyStopping, Example, FitSummary, NetTrainer, Observation, TrainConfig, TrainOutcome,
    Trainable,
};

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use thiserror::Error;

use crate::dataset::DatasetError;
use crate::model::ModelError;
use crate::ndmath::NdError;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Nd(#[from] NdError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("{0} is empty")]
    Empty(String),
    #[error("{0} contains a single class")]
    SingleClass(String),
    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<TrainError>,
    },
    #[error("all {0} trials failed")]
    AllTrialsFailed(usize),
}

impl TrainError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        TrainError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

/// `f(0..n)` on up to `jobs` scoped threads; results come back in index
/// order whatever the scheduling.
pub(crate) fn parallel_map<T, F>(n: usize, jobs: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let jobs = jobs.clamp(1, n.max(1));
    if jobs == 1 {
        return (0..n).map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..n).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let value = f(i);
                slots.lock().expect("worker panicked")[i] = Some(value);
            });
        }
    });
    slots
        .into_inner()
        .expect("worker panicked")
        .into_iter()
        .map(|v| v.expect("every index computed"))
        .collect()
}
