//! Exact channel Shapley values, residue attention traces and fused-feature
//! export.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::PdcRecord;
use crate::model::{
    mask_channels, Channel, ChannelMask, ChannelVectors, EmbeddingTables, Model, ModelError,
    RecordInputs,
};
use crate::ndmath::Tensor;

/// Output the game is played on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapleyValue {
    #[default]
    Probability,
    Logit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapleyReport {
    pub value: ShapleyValue,
    pub attributions: BTreeMap<Channel, f64>,
    /// `f` with every channel masked.
    pub baseline: f64,
    /// `f` with no channel masked.
    pub full: f64,
}

impl ShapleyReport {
    pub fn get(&self, channel: Channel) -> f64 {
        self.attributions[&channel]
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Shapley values over the four channels by enumerating all 16 coalitions.
/// A coalition keeps its channels and zeroes the rest.
pub fn shapley_from_channels(
    model: &Model,
    channels: &ChannelVectors,
    value: ShapleyValue,
) -> Result<ShapleyReport, ModelError> {
    let n = Channel::ALL.len();
    let mut f = [0.0; 16];
    for (bits, slot) in f.iter_mut().enumerate() {
        let present = ChannelMask::from_bits(bits as u8);
        let masked = mask_channels(channels, present.complement());
        let (logit, prob) = model.score_channels(&masked)?;
        *slot = match value {
            ShapleyValue::Probability => prob,
            ShapleyValue::Logit => logit,
        };
    }
    let mut attributions = BTreeMap::new();
    for (i, &channel) in Channel::ALL.iter().enumerate() {
        // Coalitions of the other players, enumerated by a counter over
        // them in channel order.
        let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        let mut phi = 0.0;
        for sub in 0..1usize << others.len() {
            let s: usize = others
                .iter()
                .enumerate()
                .filter(|(k, _)| sub >> k & 1 == 1)
                .map(|(_, &j)| 1 << j)
                .sum();
            let size = s.count_ones() as usize;
            let weight = factorial(size) * factorial(n - size - 1) / factorial(n);
            phi += weight * (f[s | 1 << i] - f[s]);
        }
        attributions.insert(channel, phi);
    }
    Ok(ShapleyReport {
        value,
        attributions,
        baseline: f[0],
        full: f[15],
    })
}

pub fn channel_shapley(
    model: &Model,
    inputs: &RecordInputs,
    value: ShapleyValue,
) -> Result<ShapleyReport, ModelError> {
    shapley_from_channels(model, &model.encode_channels(inputs)?, value)
}

/// Average attention each residue receives, normalized to sum to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionTrace {
    pub residues: Vec<char>,
    pub weights: Vec<f64>,
}

/// Column means of a `T x T` row-stochastic matrix, renormalized.
pub fn trace_from_matrix(attention: &Tensor, sequence: &str) -> Result<AttentionTrace, ModelError> {
    let residues: Vec<char> = sequence.chars().collect();
    let t = residues.len();
    if attention.shape() != [t, t] {
        return Err(ModelError::Nd(crate::ndmath::NdError::Shape {
            op: "attention_trace",
            expected: vec![t, t],
            got: attention.shape().to_vec(),
        }));
    }
    let mut weights = vec![0.0; t];
    for r in 0..t {
        for (w, a) in weights.iter_mut().zip(attention.row(r)) {
            *w += a;
        }
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    Ok(AttentionTrace { residues, weights })
}

pub fn attention_trace(model: &Model, record: &PdcRecord, inputs: &RecordInputs) -> Result<AttentionTrace, ModelError> {
    trace_from_matrix(&model.attention(inputs)?, &record.peptide.to_string())
}

/// Per-record explanation bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub id: String,
    pub probability: f64,
    pub shapley: ShapleyReport,
    /// Absent when the residue channel is ablated.
    pub attention: Option<AttentionTrace>,
}

pub fn explain_record(
    model: &Model,
    record: &PdcRecord,
    tables: &EmbeddingTables,
    value: ShapleyValue,
) -> Result<Explanation, ModelError> {
    let inputs = model.prepare(record, tables)?;
    let shapley = channel_shapley(model, &inputs, value)?;
    let probability = model.predict(&inputs, ChannelMask::NONE)?;
    Ok(Explanation {
        id: record.id.clone(),
        probability,
        shapley,
        attention: if model.config.base_mask().contains(Channel::PeptideResidue) {
            None
        } else {
            Some(attention_trace(model, record, &inputs)?)
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportMode {
    PreTraining,
    PostTraining,
}

impl ExportMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ExportMode::PreTraining => "pre_training",
            ExportMode::PostTraining => "post_training",
        }
    }
}

/// Header of the fused-feature CSV: `id,mode,label` then one column per
/// fused entry, named by channel and offset.
pub fn fused_header(model: &Model) -> Vec<String> {
    let c = &model.config;
    let mut header = vec!["id".to_string(), "mode".into(), "label".into()];
    for (prefix, width) in [
        ("x1", c.molecule_dim),
        ("x2", c.molecule_dim),
        ("t1", 2 * c.d_h),
        ("t2", c.peptide_global_dim),
    ] {
        header.extend((0..width).map(|i| format!("{prefix}_{i}")));
    }
    header
}

/// Writes one fused vector per record.
pub fn export_fused(
    model: &Model,
    records: &[PdcRecord],
    tables: &EmbeddingTables,
    mode: ExportMode,
    path: &Path,
) -> Result<usize, ModelError> {
    let csv_err = |e: csv::Error| ModelError::Corrupt(format!("writing {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(fused_header(model)).map_err(csv_err)?;
    for r in records {
        let inputs = model.prepare(r, tables)?;
        let fused = model.encode_channels(&inputs)?.fused();
        let mut row = vec![r.id.clone(), mode.as_str().into(), r.label_or_assigned().to_string()];
        row.extend(fused.iter().map(f64::to_string));
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| ModelError::io(path, e))?;
    Ok(records.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coalition_weights_sum_to_one() {
        let n = 4;
        let total: f64 = (0..16usize)
            .filter(|s| s & 1 == 0)
            .map(|s| {
                let k = s.count_ones() as usize;
                factorial(k) * factorial(n - k - 1) / factorial(n)
            })
            .sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_residue_trace() {
        let t = trace_from_matrix(&Tensor::matrix(1, 1, vec![1.0]).unwrap(), "K").unwrap();
        assert_eq!(t.weights, vec![1.0]);
        assert!(trace_from_matrix(&Tensor::identity(2), "K").is_err());
    }
}
