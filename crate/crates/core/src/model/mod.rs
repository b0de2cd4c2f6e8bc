//! The four-channel network: residue-level BiLSTM with attention pooling
//! (t1), peptide-level embedding (t2), linker (x1) and payload (x2)
//! embeddings, fused as `concat(x1, x2, t1, t2)` and scored by a dense head.

mod checkpoint;
mod embedding;

pub use checkpoint::{
    load_checkpoint, read_envelope, save_checkpoint, write_envelope, Checkpoint, EpochRecord,
    CHECKPOINT_VERSION,
};
pub use embedding::{EmbeddingTable, EmbeddingTables};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chem::{morgan_fingerprint, parse_smiles, ChemError};
use crate::dataset::PdcRecord;
use crate::ndmath::{
    attention_pool, bce_loss, bilstm, dense, DenseParams, LstmParams, NdError, Tape, Tensor, Var,
};
use crate::peptide::{encode_residues, RESIDUE_FEATURES};
use crate::rng::{prng, unit, Prng};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Nd(#[from] NdError),
    #[error(transparent)]
    Chem(#[from] ChemError),
    #[error("no {table} embedding for key {key:?}")]
    MissingEmbedding { table: &'static str, key: String },
    #[error("embedding table: {0}")]
    Embedding(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("checksum mismatch: file is corrupted or truncated")]
    Checksum,
    #[error("unsupported {kind} version {found}, this reader handles version {expected}")]
    Version {
        kind: String,
        found: u32,
        expected: u32,
    },
    #[error("corrupted file: {0}")]
    Corrupt(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl ModelError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        ModelError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

/// The four fusion inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    PeptideResidue,
    PeptideGlobal,
    Linker,
    Payload,
}

impl Channel {
    pub const ALL: [Channel; 4] = [
        Channel::PeptideResidue,
        Channel::PeptideGlobal,
        Channel::Linker,
        Channel::Payload,
    ];

    fn bit(self) -> u8 {
        1 << (self as u8)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Channel::PeptideResidue => "peptide_residue",
            Channel::PeptideGlobal => "peptide_global",
            Channel::Linker => "linker",
            Channel::Payload => "payload",
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Set of channels to zero out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ChannelMask(u8);

impl ChannelMask {
    pub const NONE: ChannelMask = ChannelMask(0);
    pub const ALL: ChannelMask = ChannelMask(0b1111);

    pub fn of(channels: &[Channel]) -> Self {
        ChannelMask(channels.iter().fold(0, |m, c| m | c.bit()))
    }

    /// Mask from the low four bits, in [`Channel::ALL`] order.
    pub fn from_bits(bits: u8) -> Self {
        ChannelMask(bits & 0b1111)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn contains(self, channel: Channel) -> bool {
        self.0 & channel.bit() != 0
    }

    pub fn union(self, other: ChannelMask) -> Self {
        ChannelMask(self.0 | other.0)
    }

    pub fn complement(self) -> Self {
        ChannelMask(!self.0 & 0b1111)
    }

    pub fn channels(self) -> Vec<Channel> {
        Channel::ALL.into_iter().filter(|&c| self.contains(c)).collect()
    }
}

/// The five channel-masked model variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ablation {
    WithoutEncode,
    WithoutEmbed,
    WithoutPeptide,
    WithoutLinker,
    WithoutPayload,
}

impl Ablation {
    pub const ALL: [Ablation; 5] = [
        Ablation::WithoutEncode,
        Ablation::WithoutEmbed,
        Ablation::WithoutPeptide,
        Ablation::WithoutLinker,
        Ablation::WithoutPayload,
    ];

    pub fn mask(self) -> ChannelMask {
        match self {
            Ablation::WithoutEncode => ChannelMask::of(&[Channel::PeptideResidue]),
            Ablation::WithoutEmbed => ChannelMask::of(&[Channel::PeptideGlobal]),
            Ablation::WithoutPeptide => {
                ChannelMask::of(&[Channel::PeptideResidue, Channel::PeptideGlobal])
            }
            Ablation::WithoutLinker => ChannelMask::of(&[Channel::Linker]),
            Ablation::WithoutPayload => ChannelMask::of(&[Channel::Payload]),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Ablation::WithoutEncode => "w/o encode",
            Ablation::WithoutEmbed => "w/o embed",
            Ablation::WithoutPeptide => "w/o peptide",
            Ablation::WithoutLinker => "w/o linker",
            Ablation::WithoutPayload => "w/o payload",
        }
    }
}

impl FromStr for Ablation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace(['-', ' ', '/'], "_");
        Ablation::ALL
            .into_iter()
            .find(|a| {
                let name = serde_json::to_value(a).ok();
                name.as_ref().and_then(|v| v.as_str()) == Some(key.as_str())
                    || a.label().replace(['/', ' '], "_") == key
            })
            .ok_or_else(|| format!("unknown ablation {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    /// Per-direction LSTM hidden size; t1 has `2 * d_h` entries.
    pub d_h: usize,
    pub dropout: f64,
    pub peptide_global_dim: usize,
    pub molecule_dim: usize,
    pub fingerprint_bits: usize,
    pub fingerprint_radius: u32,
    /// Use the residue-mean projection when no peptide table entry exists.
    pub fallback_peptide_global: bool,
    pub fallback_linker: bool,
    pub fallback_payload: bool,
    /// Width of an optional ReLU layer between fusion and the output unit.
    pub hidden_head: Option<usize>,
    /// Channels of this variant are always zero, in training and inference.
    pub ablation: Option<Ablation>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            d_h: 256,
            dropout: 0.1,
            peptide_global_dim: 640,
            molecule_dim: 256,
            fingerprint_bits: 1024,
            fingerprint_radius: 2,
            fallback_peptide_global: true,
            fallback_linker: true,
            fallback_payload: true,
            hidden_head: None,
            ablation: None,
        }
    }
}

impl ModelConfig {
    /// Width of the fused vector: `2 * molecule_dim + 2 * d_h +
    /// peptide_global_dim`.
    pub fn fused_dim(&self) -> usize {
        2 * self.molecule_dim + 2 * self.d_h + self.peptide_global_dim
    }

    /// Channels zeroed by the configured ablation.
    pub fn base_mask(&self) -> ChannelMask {
        self.ablation.map_or(ChannelMask::NONE, Ablation::mask)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.d_h == 0 || self.peptide_global_dim == 0 || self.molecule_dim == 0 {
            return Err(ModelError::Config("dimensions must be positive".into()));
        }
        if self.fingerprint_bits == 0 {
            return Err(ModelError::Config("fingerprint_bits must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(ModelError::Config(format!("dropout {} not in [0, 1)", self.dropout)));
        }
        if self.hidden_head == Some(0) {
            return Err(ModelError::Config("hidden_head width must be positive".into()));
        }
        Ok(())
    }
}

/// Trainable parameters, generic over storage (`Tensor`) and tape handles
/// (`Var`).
#[derive(Debug, Clone, PartialEq)]
pub struct NetParams<T> {
    pub lstm_fwd: LstmParams<T>,
    pub lstm_bwd: LstmParams<T>,
    pub peptide_proj: DenseParams<T>,
    pub linker_proj: DenseParams<T>,
    pub payload_proj: DenseParams<T>,
    pub hidden: Option<DenseParams<T>>,
    pub head: DenseParams<T>,
}

impl<T> NetParams<T> {
    pub fn map<'s, U>(&'s self, mut f: impl FnMut(&'s T) -> U) -> NetParams<U> {
        NetParams {
            lstm_fwd: self.lstm_fwd.map(&mut f),
            lstm_bwd: self.lstm_bwd.map(&mut f),
            peptide_proj: self.peptide_proj.map(&mut f),
            linker_proj: self.linker_proj.map(&mut f),
            payload_proj: self.payload_proj.map(&mut f),
            hidden: self.hidden.as_ref().map(|h| h.map(&mut f)),
            head: self.head.map(&mut f),
        }
    }

    /// Named parameters in a fixed order.
    pub fn named(&self) -> Vec<(String, &T)> {
        let mut groups: Vec<(&str, Vec<(&'static str, &T)>)> = vec![
            ("lstm_fwd", self.lstm_fwd.tensors().into()),
            ("lstm_bwd", self.lstm_bwd.tensors().into()),
            ("peptide_proj", self.peptide_proj.tensors().into()),
            ("linker_proj", self.linker_proj.tensors().into()),
            ("payload_proj", self.payload_proj.tensors().into()),
        ];
        if let Some(h) = &self.hidden {
            groups.push(("hidden", h.tensors().into()));
        }
        groups.push(("head", self.head.tensors().into()));
        flatten(groups)
    }

    /// Mutable view in the order of [`NetParams::named`].
    pub fn named_mut(&mut self) -> Vec<(String, &mut T)> {
        let mut groups: Vec<(&str, Vec<(&'static str, &mut T)>)> = vec![
            ("lstm_fwd", self.lstm_fwd.tensors_mut().into()),
            ("lstm_bwd", self.lstm_bwd.tensors_mut().into()),
            ("peptide_proj", self.peptide_proj.tensors_mut().into()),
            ("linker_proj", self.linker_proj.tensors_mut().into()),
            ("payload_proj", self.payload_proj.tensors_mut().into()),
        ];
        if let Some(h) = &mut self.hidden {
            groups.push(("hidden", h.tensors_mut().into()));
        }
        groups.push(("head", self.head.tensors_mut().into()));
        flatten(groups)
    }
}

fn flatten<R>(groups: Vec<(&str, Vec<(&'static str, R)>)>) -> Vec<(String, R)> {
    groups
        .into_iter()
        .flat_map(|(prefix, items)| {
            items
                .into_iter()
                .map(move |(name, t)| (format!("{prefix}.{name}"), t))
        })
        .collect()
}

/// Peptide-level channel source.
#[derive(Debug, Clone, PartialEq)]
pub enum PeptideGlobalInput {
    Embedding(Vec<f64>),
    /// Mean residue feature row, fed to the trainable projection.
    ResidueMean(Vec<f64>),
}

/// Linker or payload channel source.
#[derive(Debug, Clone, PartialEq)]
pub enum MoleculeInput {
    Embedding(Vec<f64>),
    /// 0/1 fingerprint, fed to the trainable projection.
    Fingerprint(Vec<f64>),
}

/// Parameter-free per-record inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordInputs {
    pub residues: Tensor,
    pub peptide_global: PeptideGlobalInput,
    pub linker: MoleculeInput,
    pub payload: MoleculeInput,
}

/// Channel vectors of one record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelVectors {
    pub t1: Vec<f64>,
    pub t2: Vec<f64>,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
}

impl ChannelVectors {
    /// `concat(x1, x2, t1, t2)`.
    pub fn fused(&self) -> Vec<f64> {
        [&self.x1[..], &self.x2, &self.t1, &self.t2].concat()
    }

    pub fn get(&self, channel: Channel) -> &[f64] {
        match channel {
            Channel::PeptideResidue => &self.t1,
            Channel::PeptideGlobal => &self.t2,
            Channel::Linker => &self.x1,
            Channel::Payload => &self.x2,
        }
    }

    fn get_mut(&mut self, channel: Channel) -> &mut Vec<f64> {
        match channel {
            Channel::PeptideResidue => &mut self.t1,
            Channel::PeptideGlobal => &mut self.t2,
            Channel::Linker => &mut self.x1,
            Channel::Payload => &mut self.x2,
        }
    }
}

/// Replaces each masked channel by zeros of the same length.
pub fn mask_channels(channels: &ChannelVectors, mask: ChannelMask) -> ChannelVectors {
    let mut out = channels.clone();
    for c in mask.channels() {
        out.get_mut(c).fill(0.0);
    }
    out
}

/// Tape handles of one record's channels.
#[derive(Debug, Clone, Copy)]
pub struct ChannelVars {
    pub t1: Var,
    pub t2: Var,
    pub x1: Var,
    pub x2: Var,
    /// Attention matrix, absent when the residue channel is masked.
    pub attention: Option<Var>,
}

/// Output of a taped forward pass.
#[derive(Debug, Clone, Copy)]
pub struct Forward {
    pub channels: ChannelVars,
    pub fused: Var,
    pub logit: Var,
    pub prob: Var,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub params: NetParams<Tensor>,
}

impl Model {
    /// Fresh parameters. Draw order: forward LSTM, backward LSTM, peptide,
    /// linker and payload projections, optional hidden layer, head.
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self, ModelError> {
        config.validate()?;
        let mut rng = prng(seed);
        let d = config.d_h;
        let lstm_fwd = LstmParams::init(RESIDUE_FEATURES, d, &mut rng);
        let lstm_bwd = LstmParams::init(RESIDUE_FEATURES, d, &mut rng);
        let peptide_proj = DenseParams::init(config.peptide_global_dim, RESIDUE_FEATURES, &mut rng);
        let linker_proj = DenseParams::init(config.molecule_dim, config.fingerprint_bits, &mut rng);
        let payload_proj = DenseParams::init(config.molecule_dim, config.fingerprint_bits, &mut rng);
        let hidden = config
            .hidden_head
            .map(|w| DenseParams::init(w, config.fused_dim(), &mut rng));
        let head_in = config.hidden_head.unwrap_or(config.fused_dim());
        let head = DenseParams::init(1, head_in, &mut rng);
        Ok(Model {
            params: NetParams {
                lstm_fwd,
                lstm_bwd,
                peptide_proj,
                linker_proj,
                payload_proj,
                hidden,
                head,
            },
            config,
        })
    }

    /// All-zero parameters of the right shapes.
    pub fn zeros(config: ModelConfig) -> Result<Self, ModelError> {
        config.validate()?;
        let d = config.d_h;
        let head_in = config.hidden_head.unwrap_or(config.fused_dim());
        Ok(Model {
            params: NetParams {
                lstm_fwd: LstmParams::zeros(RESIDUE_FEATURES, d),
                lstm_bwd: LstmParams::zeros(RESIDUE_FEATURES, d),
                peptide_proj: DenseParams::zeros(config.peptide_global_dim, RESIDUE_FEATURES),
                linker_proj: DenseParams::zeros(config.molecule_dim, config.fingerprint_bits),
                payload_proj: DenseParams::zeros(config.molecule_dim, config.fingerprint_bits),
                hidden: config
                    .hidden_head
                    .map(|w| DenseParams::zeros(w, config.fused_dim())),
                head: DenseParams::zeros(1, head_in),
            },
            config,
        })
    }

    pub fn parameter_count(&self) -> usize {
        self.params.named().iter().map(|(_, t)| t.len()).sum()
    }

    /// Resolves table lookups and fallbacks for one record.
    pub fn prepare(
        &self,
        record: &PdcRecord,
        tables: &EmbeddingTables,
    ) -> Result<RecordInputs, ModelError> {
        let cfg = &self.config;
        let matrix = encode_residues(&record.peptide);
        let rows = matrix.rows();
        let mean = matrix.mean_row();
        let residues = Tensor::matrix(rows, RESIDUE_FEATURES, matrix.into_vec())?;

        let peptide_key = record.peptide.to_string();
        let peptide_global = match tables.peptide.as_ref().and_then(|t| t.get(&peptide_key)) {
            Some(v) => PeptideGlobalInput::Embedding(v),
            None if cfg.fallback_peptide_global => PeptideGlobalInput::ResidueMean(mean),
            None => {
                return Err(ModelError::MissingEmbedding {
                    table: "peptide",
                    key: peptide_key,
                })
            }
        };
        let molecule = |smiles: &str, fallback: bool, table: &'static str| {
            match tables.molecule.as_ref().and_then(|t| t.get(smiles)) {
                Some(v) => Ok(MoleculeInput::Embedding(v)),
                None if fallback => {
                    let mol = parse_smiles(smiles)?;
                    let fp = morgan_fingerprint(&mol, cfg.fingerprint_radius, cfg.fingerprint_bits)?;
                    Ok(MoleculeInput::Fingerprint(fp.to_f64()))
                }
                None => Err(ModelError::MissingEmbedding {
                    table,
                    key: smiles.to_string(),
                }),
            }
        };
        Ok(RecordInputs {
            residues,
            peptide_global,
            linker: molecule(&record.linker_smiles, cfg.fallback_linker, "linker")?,
            payload: molecule(&record.payload_smiles, cfg.fallback_payload, "payload")?,
        })
    }

    /// Records every parameter on `tape` as a borrowed leaf.
    pub fn param_vars<'a>(&'a self, tape: &mut Tape<'a>) -> NetParams<Var> {
        self.params.map(|t| tape.param(t))
    }

    /// Builds the channel vectors on `tape`; masked channels become zero
    /// constants without evaluating their encoders.
    pub fn channel_vars(
        &self,
        tape: &mut Tape<'_>,
        pv: &NetParams<Var>,
        inputs: &RecordInputs,
        mask: ChannelMask,
    ) -> Result<ChannelVars, ModelError> {
        let cfg = &self.config;
        let mask = mask.union(cfg.base_mask());
        let zeros = |tape: &mut Tape<'_>, n: usize| tape.constant(Tensor::zeros(&[n]));

        let (t1, attention) = if mask.contains(Channel::PeptideResidue) {
            (zeros(tape, 2 * cfg.d_h), None)
        } else {
            let x = tape.constant(inputs.residues.clone());
            let h = bilstm(tape, x, &pv.lstm_fwd, &pv.lstm_bwd)?;
            let att = attention_pool(tape, h)?;
            (att.pooled, Some(att.weights))
        };

        let t2 = if mask.contains(Channel::PeptideGlobal) {
            zeros(tape, cfg.peptide_global_dim)
        } else {
            match &inputs.peptide_global {
                PeptideGlobalInput::Embedding(v) => tape.constant(Tensor::vector(v.clone())),
                PeptideGlobalInput::ResidueMean(m) => {
                    let x = tape.constant(Tensor::vector(m.clone()));
                    dense(tape, x, &pv.peptide_proj)?
                }
            }
        };

        let molecule = |tape: &mut Tape<'_>, input: &MoleculeInput, proj: &DenseParams<Var>| {
            match input {
                MoleculeInput::Embedding(v) => Ok(tape.constant(Tensor::vector(v.clone()))),
                MoleculeInput::Fingerprint(bits) => {
                    let x = tape.constant(Tensor::vector(bits.clone()));
                    dense(tape, x, proj)
                }
            }
        };
        let x1 = if mask.contains(Channel::Linker) {
            zeros(tape, cfg.molecule_dim)
        } else {
            molecule(tape, &inputs.linker, &pv.linker_proj)?
        };
        let x2 = if mask.contains(Channel::Payload) {
            zeros(tape, cfg.molecule_dim)
        } else {
            molecule(tape, &inputs.payload, &pv.payload_proj)?
        };

        for (var, width) in [
            (t1, 2 * cfg.d_h),
            (t2, cfg.peptide_global_dim),
            (x1, cfg.molecule_dim),
            (x2, cfg.molecule_dim),
        ] {
            if tape.value(var).len() != width {
                return Err(ModelError::Nd(NdError::Shape {
                    op: "channel",
                    expected: vec![width],
                    got: tape.value(var).shape().to_vec(),
                }));
            }
        }
        Ok(ChannelVars {
            t1,
            t2,
            x1,
            x2,
            attention,
        })
    }

    /// Head on a fused vector. With `dropout_rng` set, inverted dropout at
    /// the configured rate is applied to the fused vector first.
    pub fn head_vars(
        &self,
        tape: &mut Tape<'_>,
        pv: &NetParams<Var>,
        fused: Var,
        dropout_rng: Option<&mut Prng>,
    ) -> Result<(Var, Var), ModelError> {
        let width = tape.value(fused).len();
        if width != self.config.fused_dim() {
            return Err(ModelError::Nd(NdError::Shape {
                op: "head",
                expected: vec![self.config.fused_dim()],
                got: vec![width],
            }));
        }
        let mut x = fused;
        if let Some(rng) = dropout_rng {
            let p = self.config.dropout;
            if p > 0.0 {
                let keep = 1.0 / (1.0 - p);
                let mask = (0..width)
                    .map(|_| if unit(rng) < p { 0.0 } else { keep })
                    .collect();
                x = tape.mul_const(x, mask)?;
            }
        }
        if let Some(hidden) = &pv.hidden {
            let h = dense(tape, x, hidden)?;
            x = tape.relu(h);
        }
        let logit = dense(tape, x, &pv.head)?;
        let prob = tape.sigmoid(logit);
        Ok((logit, prob))
    }

    /// Full taped forward pass.
    pub fn forward_vars(
        &self,
        tape: &mut Tape<'_>,
        pv: &NetParams<Var>,
        inputs: &RecordInputs,
        mask: ChannelMask,
        dropout_rng: Option<&mut Prng>,
    ) -> Result<Forward, ModelError> {
        let channels = self.channel_vars(tape, pv, inputs, mask)?;
        let fused = tape.concat(&[channels.x1, channels.x2, channels.t1, channels.t2]);
        let (logit, prob) = self.head_vars(tape, pv, fused, dropout_rng)?;
        Ok(Forward {
            channels,
            fused,
            logit,
            prob,
        })
    }

    /// Weighted BCE of one record on `tape`.
    pub fn loss_vars(
        &self,
        tape: &mut Tape<'_>,
        pv: &NetParams<Var>,
        inputs: &RecordInputs,
        label: u8,
        pos_weight: f64,
        dropout_rng: Option<&mut Prng>,
    ) -> Result<Var, ModelError> {
        let out = self.forward_vars(tape, pv, inputs, ChannelMask::NONE, dropout_rng)?;
        Ok(bce_loss(tape, out.prob, f64::from(label), pos_weight)?)
    }

    /// Channel vectors in inference mode.
    pub fn encode_channels(&self, inputs: &RecordInputs) -> Result<ChannelVectors, ModelError> {
        let mut tape = Tape::new();
        let pv = self.param_vars(&mut tape);
        let c = self.channel_vars(&mut tape, &pv, inputs, ChannelMask::NONE)?;
        let v = |var: Var| tape.value(var).data().to_vec();
        Ok(ChannelVectors {
            t1: v(c.t1),
            t2: v(c.t2),
            x1: v(c.x1),
            x2: v(c.x2),
        })
    }

    /// `(logit, probability)` of the head on given channel vectors,
    /// inference mode.
    pub fn score_channels(&self, channels: &ChannelVectors) -> Result<(f64, f64), ModelError> {
        let mut tape = Tape::new();
        let pv = self.param_vars(&mut tape);
        let fused = tape.constant(Tensor::vector(channels.fused()));
        let (logit, prob) = self.head_vars(&mut tape, &pv, fused, None)?;
        Ok((tape.value(logit).item(), tape.value(prob).item()))
    }

    /// Probability on given channel vectors, inference mode.
    pub fn forward(&self, channels: &ChannelVectors) -> Result<f64, ModelError> {
        Ok(self.score_channels(channels)?.1)
    }

    /// Probability for prepared inputs with optional channel masking.
    pub fn predict(&self, inputs: &RecordInputs, mask: ChannelMask) -> Result<f64, ModelError> {
        let mut tape = Tape::new();
        let pv = self.param_vars(&mut tape);
        let out = self.forward_vars(&mut tape, &pv, inputs, mask, None)?;
        Ok(tape.value(out.prob).item())
    }

    /// `T x T` residue attention matrix.
    pub fn attention(&self, inputs: &RecordInputs) -> Result<Tensor, ModelError> {
        let mut tape = Tape::new();
        let pv = self.param_vars(&mut tape);
        let c = self.channel_vars(&mut tape, &pv, inputs, ChannelMask::NONE)?;
        let a = c
            .attention
            .ok_or_else(|| ModelError::Config("residue channel is ablated".into()))?;
        Ok(tape.value(a).clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_fused_width() {
        assert_eq!(ModelConfig::default().fused_dim(), 1664);
    }

    #[test]
    fn ablation_masks() {
        assert_eq!(
            Ablation::WithoutPeptide.mask().channels(),
            vec![Channel::PeptideResidue, Channel::PeptideGlobal]
        );
        assert_eq!("w/o payload".parse::<Ablation>().unwrap(), Ablation::WithoutPayload);
        assert_eq!("without_linker".parse::<Ablation>().unwrap(), Ablation::WithoutLinker);
        assert_eq!(ChannelMask::ALL.complement(), ChannelMask::NONE);
    }

    #[test]
    fn named_order_is_stable() {
        let m = Model::zeros(ModelConfig {
            d_h: 2,
            peptide_global_dim: 3,
            molecule_dim: 2,
            fingerprint_bits: 8,
            hidden_head: Some(4),
            ..ModelConfig::default()
        })
        .unwrap();
        let names: Vec<String> = m.params.named().into_iter().map(|(n, _)| n).collect();
        assert_eq!(names.first().unwrap(), "lstm_fwd.w_ih");
        assert_eq!(names.last().unwrap(), "head.b");
        assert!(names.contains(&"hidden.w".to_string()));
        assert_eq!(names.len(), 16);
    }

    #[test]
    fn config_validation() {
        let bad = ModelConfig {
            dropout: 1.0,
            ..ModelConfig::default()
        };
        assert!(Model::zeros(bad).is_err());
    }
}
