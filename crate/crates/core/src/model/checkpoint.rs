use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Model, ModelConfig, ModelError};
use crate::ndmath::Tensor;

pub const CHECKPOINT_VERSION: u32 = 1;
const FORMAT: &str = "pdcnet-checkpoint";

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    kind: String,
    version: u32,
    sha256: String,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Writes `body` behind a one-line header carrying its kind, the format
/// version and the SHA-256 of the body bytes.
pub fn write_envelope(path: &Path, kind: &str, body: &impl Serialize) -> Result<(), ModelError> {
    let body = serde_json::to_string_pretty(body)?;
    let header = Header {
        format: FORMAT.into(),
        kind: kind.into(),
        version: CHECKPOINT_VERSION,
        sha256: sha256_hex(body.as_bytes()),
    };
    let text = format!("{}\n{body}\n", serde_json::to_string(&header)?);
    std::fs::write(path, text).map_err(|e| ModelError::io(path, e))
}

/// Reads and verifies an envelope written by [`write_envelope`].
pub fn read_envelope<T: DeserializeOwned>(path: &Path, kind: &str) -> Result<T, ModelError> {
    let bytes = std::fs::read(path).map_err(|e| ModelError::io(path, e))?;
    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| ModelError::Corrupt("missing header line".into()))?;
    let header: Header = serde_json::from_slice(&bytes[..newline])
        .map_err(|e| ModelError::Corrupt(format!("header: {e}")))?;
    if header.format != FORMAT {
        return Err(ModelError::Corrupt(format!("unknown format {:?}", header.format)));
    }
    if header.version != CHECKPOINT_VERSION {
        return Err(ModelError::Version {
            kind: FORMAT.into(),
            found: header.version,
            expected: CHECKPOINT_VERSION,
        });
    }
    if header.kind != kind {
        return Err(ModelError::Corrupt(format!(
            "expected a {kind} checkpoint, found {}",
            header.kind
        )));
    }
    let body = &bytes[newline + 1..];
    let body = body.strip_suffix(b"\n").unwrap_or(body);
    if sha256_hex(body) != header.sha256 {
        return Err(ModelError::Checksum);
    }
    Ok(serde_json::from_slice(body)?)
}

/// One training epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_auc: f64,
    pub is_best: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct StoredTensor {
    pub name: String,
    pub shape: Vec<usize>,
    /// Base64 of little-endian `f64` values.
    pub data: String,
}

impl StoredTensor {
    pub(crate) fn encode(name: &str, t: &Tensor) -> Self {
        let bytes: Vec<u8> = t.data().iter().flat_map(|v| v.to_le_bytes()).collect();
        StoredTensor {
            name: name.into(),
            shape: t.shape().to_vec(),
            data: STANDARD.encode(bytes),
        }
    }

    pub(crate) fn decode(&self) -> Result<Tensor, ModelError> {
        let bytes = STANDARD
            .decode(&self.data)
            .map_err(|e| ModelError::Corrupt(format!("{}: {e}", self.name)))?;
        if bytes.len() % 8 != 0 {
            return Err(ModelError::Corrupt(format!("{}: ragged data", self.name)));
        }
        let data = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        Ok(Tensor::new(self.shape.clone(), data)?)
    }
}

/// Fills `target` from stored tensors, matching names and shapes exactly.
pub(crate) fn restore<'t>(
    target: Vec<(String, &'t mut Tensor)>,
    stored: &[StoredTensor],
) -> Result<(), ModelError> {
    if target.len() != stored.len() {
        return Err(ModelError::Corrupt(format!(
            "expected {} parameter tensors, found {}",
            target.len(),
            stored.len()
        )));
    }
    for ((name, slot), s) in target.into_iter().zip(stored) {
        if s.name != name {
            return Err(ModelError::Corrupt(format!("expected {name}, found {}", s.name)));
        }
        let t = s.decode()?;
        if t.shape() != slot.shape() {
            return Err(ModelError::Corrupt(format!(
                "{name}: shape {:?}, model expects {:?}",
                t.shape(),
                slot.shape()
            )));
        }
        *slot = t;
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct Body {
    config: ModelConfig,
    seed: u64,
    history: Vec<EpochRecord>,
    #[serde(default)]
    metadata: serde_json::Value,
    params: Vec<StoredTensor>,
}

/// A trained network with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: Model,
    pub seed: u64,
    pub history: Vec<EpochRecord>,
    /// Free-form settings recorded by the trainer.
    pub metadata: serde_json::Value,
}

pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<(), ModelError> {
    let body = Body {
        config: ckpt.model.config.clone(),
        seed: ckpt.seed,
        history: ckpt.history.clone(),
        metadata: ckpt.metadata.clone(),
        params: ckpt
            .model
            .params
            .named()
            .into_iter()
            .map(|(n, t)| StoredTensor::encode(&n, t))
            .collect(),
    };
    write_envelope(path, "pdcnet", &body)
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, ModelError> {
    let body: Body = read_envelope(path, "pdcnet")?;
    let mut model = Model::zeros(body.config)?;
    restore(model.params.named_mut(), &body.params)?;
    Ok(Checkpoint {
        model,
        seed: body.seed,
        history: body.history,
        metadata: body.metadata,
    })
}
