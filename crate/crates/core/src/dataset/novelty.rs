use serde::{Deserialize, Serialize};

use super::{DatasetError, PdcRecord};
use crate::chem::{smiles_ecfp4, tanimoto, Fingerprint};
use crate::peptide::{peptide_similarity, PeptideSequence};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub max_peptide_sim: f64,
    pub max_linker_sim: f64,
    pub max_payload_sim: f64,
    pub harmonic_mean: f64,
}

/// `3 / (1/a + 1/b + 1/c)`, or 0 when any component is 0.
pub fn harmonic_mean(a: f64, b: f64, c: f64) -> f64 {
    if a <= 0.0 || b <= 0.0 || c <= 0.0 {
        return 0.0;
    }
    3.0 / (1.0 / a + 1.0 / b + 1.0 / c)
}

/// Reference peptides and precomputed ECFP4 fingerprints.
#[derive(Debug, Clone)]
pub struct ReferenceSet {
    peptides: Vec<PeptideSequence>,
    linkers: Vec<Fingerprint>,
    payloads: Vec<Fingerprint>,
}

impl ReferenceSet {
    pub fn new(reference: &[PdcRecord]) -> Result<Self, DatasetError> {
        if reference.is_empty() {
            return Err(DatasetError::TooSmall { n: 0, needed: 1 });
        }
        let fingerprint = |r: &PdcRecord, smiles: &str| {
            smiles_ecfp4(smiles).map_err(|e| DatasetError::Record {
                id: r.id.clone(),
                message: e.to_string(),
            })
        };
        let mut set = ReferenceSet {
            peptides: Vec::with_capacity(reference.len()),
            linkers: Vec::with_capacity(reference.len()),
            payloads: Vec::with_capacity(reference.len()),
        };
        for r in reference {
            set.peptides.push(r.peptide.clone());
            set.linkers.push(fingerprint(r, &r.linker_smiles)?);
            set.payloads.push(fingerprint(r, &r.payload_smiles)?);
        }
        Ok(set)
    }

    /// Maximum similarity of the query's components against the reference.
    pub fn score(&self, query: &PdcRecord) -> Result<SimilarityReport, DatasetError> {
        let linker = smiles_ecfp4(&query.linker_smiles)?;
        let payload = smiles_ecfp4(&query.payload_smiles)?;
        let max = |values: &mut dyn Iterator<Item = f64>| values.fold(0.0f64, f64::max);
        let max_peptide_sim = max(&mut self
            .peptides
            .iter()
            .map(|p| peptide_similarity(&query.peptide, p)));
        let best_tanimoto = |fp: &Fingerprint, refs: &[Fingerprint]| -> Result<f64, DatasetError> {
            let mut best = 0.0f64;
            for r in refs {
                best = best.max(tanimoto(fp, r)?);
            }
            Ok(best)
        };
        let max_linker_sim = best_tanimoto(&linker, &self.linkers)?;
        let max_payload_sim = best_tanimoto(&payload, &self.payloads)?;
        Ok(SimilarityReport {
            max_peptide_sim,
            max_linker_sim,
            max_payload_sim,
            harmonic_mean: harmonic_mean(max_peptide_sim, max_linker_sim, max_payload_sim),
        })
    }
}

/// Scores one query against a reference list.
pub fn novelty_score(
    query: &PdcRecord,
    reference: &[PdcRecord],
) -> Result<SimilarityReport, DatasetError> {
    ReferenceSet::new(reference)?.score(query)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_examples() {
        assert_eq!(harmonic_mean(1.0, 1.0, 1.0), 1.0);
        assert_eq!(harmonic_mean(0.5, 1.0, 1.0), 0.75);
        assert_eq!(harmonic_mean(0.0, 1.0, 1.0), 0.0);
    }
}
