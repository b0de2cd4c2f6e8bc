use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use super::{ModelConfig, ModelError};

const FORMAT: &str = "pdcnet-embeddings";

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    dim: usize,
}

#[derive(Serialize, Deserialize)]
struct Entry {
    key: String,
    dim: usize,
    /// Base64 of little-endian `f32` values.
    vec: String,
}

/// Precomputed embeddings keyed by peptide sequence or SMILES text.
///
/// File format is JSON Lines: an optional header
/// `{"format":"pdcnet-embeddings","version":1,"dim":D}` followed by one
/// `{"key":..,"dim":D,"vec":<base64 f32 LE>}` object per line.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EmbeddingTable {
    dim: usize,
    entries: BTreeMap<String, Vec<f32>>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        EmbeddingTable {
            dim,
            entries: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, key: impl Into<String>, vec: Vec<f32>) -> Result<(), ModelError> {
        if vec.len() != self.dim {
            return Err(ModelError::Embedding(format!(
                "vector has {} entries, table dimension is {}",
                vec.len(),
                self.dim
            )));
        }
        if vec.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::Embedding("non-finite embedding value".into()));
        }
        self.entries.insert(key.into(), vec);
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<Vec<f64>> {
        self.entries
            .get(key)
            .map(|v| v.iter().map(|&x| f64::from(x)).collect())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn read(path: &Path) -> Result<Self, ModelError> {
        let file = File::open(path).map_err(|e| ModelError::io(path, e))?;
        let mut table: Option<EmbeddingTable> = None;
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| ModelError::io(path, e))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| ModelError::Embedding(format!("line {}: {msg}", i + 1));
            let value: serde_json::Value =
                serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
            if value.get("format").is_some() {
                let header: Header =
                    serde_json::from_value(value).map_err(|e| bad(e.to_string()))?;
                if header.format != FORMAT {
                    return Err(bad(format!("unknown format {:?}", header.format)));
                }
                if header.version != 1 {
                    return Err(ModelError::Version {
                        kind: FORMAT.into(),
                        found: header.version,
                        expected: 1,
                    });
                }
                if table.is_some() {
                    return Err(bad("header must be the first line".into()));
                }
                table = Some(EmbeddingTable::new(header.dim));
                continue;
            }
            let entry: Entry = serde_json::from_value(value).map_err(|e| bad(e.to_string()))?;
            let bytes = STANDARD.decode(&entry.vec).map_err(|e| bad(e.to_string()))?;
            if bytes.len() != entry.dim * 4 {
                return Err(bad(format!(
                    "dim {} needs {} bytes, got {}",
                    entry.dim,
                    entry.dim * 4,
                    bytes.len()
                )));
            }
            let vec: Vec<f32> = bytes
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect();
            let t = table.get_or_insert_with(|| EmbeddingTable::new(entry.dim));
            if t.entries.contains_key(&entry.key) {
                return Err(bad(format!("duplicate key {:?}", entry.key)));
            }
            t.insert(entry.key, vec).map_err(|e| bad(e.to_string()))?;
        }
        table.ok_or_else(|| ModelError::Embedding(format!("{} is empty", path.display())))
    }

    pub fn write(&self, path: &Path) -> Result<(), ModelError> {
        let file = File::create(path).map_err(|e| ModelError::io(path, e))?;
        let mut out = BufWriter::new(file);
        let header = Header {
            format: FORMAT.into(),
            version: 1,
            dim: self.dim,
        };
        let mut lines = vec![serde_json::to_string(&header)?];
        for (key, vec) in &self.entries {
            let bytes: Vec<u8> = vec.iter().flat_map(|v| v.to_le_bytes()).collect();
            lines.push(serde_json::to_string(&Entry {
                key: key.clone(),
                dim: self.dim,
                vec: STANDARD.encode(bytes),
            })?);
        }
        for line in lines {
            writeln!(out, "{line}").map_err(|e| ModelError::io(path, e))?;
        }
        out.flush().map_err(|e| ModelError::io(path, e))
    }
}

/// Optional peptide-level table and molecule table (shared by linkers and
/// payloads).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EmbeddingTables {
    pub peptide: Option<EmbeddingTable>,
    pub molecule: Option<EmbeddingTable>,
}

impl EmbeddingTables {
    pub fn validate(&self, config: &ModelConfig) -> Result<(), ModelError> {
        for (name, table, dim) in [
            ("peptide", &self.peptide, config.peptide_global_dim),
            ("molecule", &self.molecule, config.molecule_dim),
        ] {
            if let Some(t) = table {
                if t.dim() != dim {
                    return Err(ModelError::Embedding(format!(
                        "{name} table has dimension {}, model expects {dim}",
                        t.dim()
                    )));
                }
            }
        }
        Ok(())
    }
}
