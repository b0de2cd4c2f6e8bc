use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use pdcnet::dataset::{read_records, read_split, DataSplit, PdcRecord};
use pdcnet::model::{EmbeddingTable, EmbeddingTables, ModelConfig};
use pdcnet::traineval::{TrainConfig, TrainError};

use crate::cli::{EmbeddingArgs, NetArgs, Part};

/// Marks an error as caused by the user's input data (exit code 2).
#[derive(Debug, Clone, Copy)]
pub struct InvalidData;

impl fmt::Display for InvalidData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("invalid input data")
    }
}

/// Marks an error as a bad flag value (exit code 1).
#[derive(Debug, Clone, Copy)]
pub struct InvalidUsage;

impl fmt::Display for InvalidUsage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("invalid arguments")
    }
}

pub trait DataContext<T> {
    fn data(self) -> Result<T>;
    fn usage(self) -> Result<T>;
}

impl<T, E: Into<anyhow::Error>> DataContext<T> for std::result::Result<T, E> {
    fn data(self) -> Result<T> {
        self.map_err(|e| e.into().context(InvalidData))
    }

    fn usage(self) -> Result<T> {
        self.map_err(|e| e.into().context(InvalidUsage))
    }
}

/// Process exit code for a failed command.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<InvalidUsage>().is_some() {
        1
    } else if err.downcast_ref::<InvalidData>().is_some() {
        2
    } else {
        3
    }
}

fn train_error_is_data(e: &TrainError) -> bool {
    use pdcnet::model::ModelError;
    match e {
        TrainError::Empty(_) | TrainError::SingleClass(_) | TrainError::Dataset(_) | TrainError::Metrics(_) => true,
        TrainError::Model(m) => matches!(
            m,
            ModelError::MissingEmbedding { .. } | ModelError::Embedding(_) | ModelError::Chem(_)
        ),
        TrainError::Fold { source, .. } => train_error_is_data(source),
        _ => false,
    }
}

/// Tags training errors that stem from the records rather than the run.
pub fn classify_train<T>(r: std::result::Result<T, TrainError>) -> Result<T> {
    r.map_err(|e| {
        if train_error_is_data(&e) {
            anyhow::Error::new(e).context(InvalidData)
        } else {
            e.into()
        }
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// `dir/name.csv` with `suffix` -> `dir/name.suffix`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    path.with_extension(suffix)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn load_records(path: &Path) -> Result<Vec<PdcRecord>> {
    read_records(path)
        .with_context(|| format!("reading records from {}", path.display()))
        .data()
}

/// Records and a split that indexes them.
pub fn load_split(data: &Path, split: &Path) -> Result<(Vec<PdcRecord>, DataSplit)> {
    let records = load_records(data)?;
    let split = read_split(split)
        .with_context(|| format!("reading split {}", split.display()))
        .data()?;
    if split.n != records.len() {
        return Err(anyhow::anyhow!(
            "split covers {} records but {} has {}",
            split.n,
            data.display(),
            records.len()
        ))
        .data();
    }
    Ok((records, split))
}

pub fn part_indices(split: &DataSplit, part: Part) -> &[usize] {
    match part {
        Part::Train => &split.train,
        Part::Val => &split.val,
        Part::Test => &split.test,
    }
}

pub fn pick<T: Clone>(items: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| items[i].clone()).collect()
}

pub fn load_tables(args: &EmbeddingArgs) -> Result<EmbeddingTables> {
    let read = |p: &Option<PathBuf>| -> Result<Option<EmbeddingTable>> {
        p.as_deref()
            .map(|p| {
                EmbeddingTable::read(p)
                    .with_context(|| format!("reading embeddings {}", p.display()))
                    .data()
            })
            .transpose()
    };
    Ok(EmbeddingTables {
        peptide: read(&args.peptide_embeddings)?,
        molecule: read(&args.molecule_embeddings)?,
    })
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct ConfigFile {
    model: ModelConfig,
    train: TrainConfig,
}

/// Network configuration from the optional config file, flag overrides
/// and the command seed. Embedding tables, when given, fix the channel
/// widths.
pub fn resolve_net(net: &NetArgs, seed: u64) -> Result<(ModelConfig, TrainConfig, EmbeddingTables)> {
    let file = match &net.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))
                .data()?;
            serde_json::from_str::<ConfigFile>(&text)
                .with_context(|| format!("parsing config {}", p.display()))
                .data()?
        }
        None => ConfigFile::default(),
    };
    let (mut model, mut train) = (file.model, file.train);
    train.seed = seed;
    if let Some(v) = net.epochs {
        train.max_epochs = v;
    }
    if let Some(v) = net.patience {
        train.patience = v;
    }
    if let Some(v) = net.lr {
        train.learning_rate = v;
    }
    if let Some(v) = net.batch_size {
        train.batch_size = v;
    }
    if let Some(v) = net.pos_weight {
        train.pos_weight = v;
    }
    if let Some(v) = net.d_h {
        model.d_h = v;
    }
    if let Some(v) = net.dropout {
        model.dropout = v;
    }
    if net.hidden.is_some() {
        model.hidden_head = net.hidden;
    }
    let tables = load_tables(&net.embeddings)?;
    if let Some(t) = &tables.peptide {
        model.peptide_global_dim = t.dim();
    }
    if let Some(t) = &tables.molecule {
        model.molecule_dim = t.dim();
    }
    model.validate().usage()?;
    train.validate().usage()?;
    Ok((model, train, tables))
}

/// What a command read and wrote, for its manifest.
#[derive(Debug, Default)]
pub struct Outcome {
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub inputs: Vec<(&'static str, PathBuf)>,
    pub outputs: Vec<(&'static str, PathBuf)>,
}

impl Outcome {
    pub fn new(config: impl Serialize) -> Result<Self> {
        Ok(Outcome {
            config: serde_json::to_value(config)?,
            ..Outcome::default()
        })
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn input(mut self, role: &'static str, path: &Path) -> Self {
        self.inputs.push((role, path.to_path_buf()));
        self
    }

    pub fn output(mut self, role: &'static str, path: &Path) -> Self {
        self.outputs.push((role, path.to_path_buf()));
        self
    }
}

#[derive(Debug, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub seed: Option<u64>,
    pub config_hash: String,
    pub config: serde_json::Value,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, FileEntry>,
    pub started_at: String,
    pub finished_at: String,
}

fn timestamp(t: chrono::DateTime<chrono::Utc>) -> String {
    t.to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Writes `<first output>.manifest.json` and returns its path.
pub fn write_manifest(
    command: &str,
    outcome: &Outcome,
    started: chrono::DateTime<chrono::Utc>,
) -> Result<PathBuf> {
    let Some((_, primary)) = outcome.outputs.first() else {
        anyhow::bail!("{command} produced no output");
    };
    let mut outputs = BTreeMap::new();
    for (role, path) in &outcome.outputs {
        let bytes = std::fs::read(path).with_context(|| format!("reading back {}", path.display()))?;
        outputs.insert(
            role.to_string(),
            FileEntry {
                path: path.display().to_string(),
                sha256: sha256_hex(&bytes),
            },
        );
    }
    let manifest = RunManifest {
        command: command.to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: outcome.seed,
        config_hash: sha256_hex(serde_json::to_string(&outcome.config)?.as_bytes()),
        config: outcome.config.clone(),
        inputs: outcome
            .inputs
            .iter()
            .map(|(r, p)| (r.to_string(), p.display().to_string()))
            .collect(),
        outputs,
        started_at: timestamp(started),
        finished_at: timestamp(chrono::Utc::now()),
    };
    let mut name = primary.as_os_str().to_owned();
    name.push(".manifest.json");
    let path = PathBuf::from(name);
    write_json(&path, &manifest)?;
    Ok(path)
}
