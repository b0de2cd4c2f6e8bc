//! WebAssembly bindings for the static demo page in `www/`: molecule
//! fingerprint similarity, peptide alignment similarity and a metrics
//! explorer. Each binding returns a JSON string.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use pdcnet::chem::{ecfp4, parse_smiles, tanimoto};
use pdcnet::peptide::{global_alignment_score, peptide_similarity, PeptideSequence};
use pdcnet::traineval::{evaluate, MetricsReport};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MoleculeComparison {
    pub atoms: [usize; 2],
    pub ring_bonds: [usize; 2],
    pub on_bits: [usize; 2],
    pub tanimoto: f64,
}

pub fn compare_molecules(a: &str, b: &str) -> Result<MoleculeComparison, String> {
    let parse = |s: &str, which: &str| parse_smiles(s).map_err(|e| format!("{which}: {e}"));
    let (ma, mb) = (parse(a, "first molecule")?, parse(b, "second molecule")?);
    let fa = ecfp4(&ma).map_err(|e| e.to_string())?;
    let fb = ecfp4(&mb).map_err(|e| e.to_string())?;
    Ok(MoleculeComparison {
        atoms: [ma.atom_count(), mb.atom_count()],
        ring_bonds: [ma.ring_bonds().len(), mb.ring_bonds().len()],
        on_bits: [fa.count_ones(), fb.count_ones()],
        tanimoto: tanimoto(&fa, &fb).map_err(|e| e.to_string())?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeptideComparison {
    pub lengths: [usize; 2],
    pub alignment_score: usize,
    pub similarity: f64,
}

pub fn compare_peptides(a: &str, b: &str) -> Result<PeptideComparison, String> {
    let parse = |s: &str, which: &str| {
        s.trim()
            .parse::<PeptideSequence>()
            .map_err(|e| format!("{which}: {e}"))
    };
    let (pa, pb) = (parse(a, "first peptide")?, parse(b, "second peptide")?);
    Ok(PeptideComparison {
        lengths: [pa.len(), pb.len()],
        alignment_score: global_alignment_score(&pa, &pb),
        similarity: peptide_similarity(&pa, &pb),
    })
}

/// Parses `score,label` lines (commas, tabs or spaces; `#` starts a
/// comment) and evaluates them at `threshold`.
pub fn metrics_from_text(text: &str, threshold: f64) -> Result<MetricsReport, String> {
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        let [score, label] = fields[..] else {
            return Err(format!("line {}: expected `score,label`", n + 1));
        };
        scores.push(
            score
                .parse::<f64>()
                .map_err(|_| format!("line {}: bad score {score:?}", n + 1))?,
        );
        labels.push(match label {
            "0" => 0,
            "1" => 1,
            _ => return Err(format!("line {}: label must be 0 or 1", n + 1)),
        });
    }
    evaluate(&scores, &labels, threshold).map_err(|e| e.to_string())
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let value = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = compareMolecules)]
pub fn compare_molecules_js(a: &str, b: &str) -> Result<String, JsError> {
    to_js(compare_molecules(a, b))
}

#[wasm_bindgen(js_name = comparePeptides)]
pub fn compare_peptides_js(a: &str, b: &str) -> Result<String, JsError> {
    to_js(compare_peptides(a, b))
}

#[wasm_bindgen(js_name = metricsReport)]
pub fn metrics_report_js(text: &str, threshold: f64) -> Result<String, JsError> {
    to_js(metrics_from_text(text, threshold))
}
