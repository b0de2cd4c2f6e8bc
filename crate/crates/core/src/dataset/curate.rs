use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::io::group_rows;
use super::{assign_label, normalize_activity, ActivityMeasurement, PdcRecord, RawRow, Unit};
use crate::chem::parse_smiles;
use crate::peptide::{PeptideError, PeptideSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    Duplicate,
    MissingComponent,
    NonStandardResidue,
    UnparseableLinker,
    UnparseablePayload,
    InvalidMeasurement,
    UnknownStatus,
    InconsistentRows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurationReport {
    pub input_records: usize,
    pub retained: usize,
    pub threshold_um: f64,
    /// Dropped record id to reason.
    pub dropped: BTreeMap<String, DropReason>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curated {
    pub records: Vec<PdcRecord>,
    pub report: CurationReport,
}

fn strip_whitespace(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

/// Validates one id group and builds its record, keeping every measurement.
fn build(id: &str, rows: &[RawRow]) -> Result<PdcRecord, DropReason> {
    let key = |r: &RawRow| {
        (
            strip_whitespace(&r.peptide_sequence),
            strip_whitespace(&r.linker_smiles),
            strip_whitespace(&r.payload_smiles),
            r.status.trim().to_string(),
        )
    };
    let (peptide, linker, payload, status) = key(&rows[0]);
    if rows[1..].iter().any(|r| key(r) != (peptide.clone(), linker.clone(), payload.clone(), status.clone())) {
        return Err(DropReason::InconsistentRows);
    }
    if peptide.is_empty() || linker.is_empty() || payload.is_empty() {
        return Err(DropReason::MissingComponent);
    }
    let status = status.parse().map_err(|_| DropReason::UnknownStatus)?;
    let peptide: PeptideSequence = peptide.parse().map_err(|e| match e {
        PeptideError::Empty => DropReason::MissingComponent,
        _ => DropReason::NonStandardResidue,
    })?;
    parse_smiles(&linker).map_err(|_| DropReason::UnparseableLinker)?;
    parse_smiles(&payload).map_err(|_| DropReason::UnparseablePayload)?;
    let mut measurements = Vec::new();
    for row in rows {
        if let Some(m) = row.measurement().map_err(|_| DropReason::InvalidMeasurement)? {
            measurements.push(m);
        }
    }
    Ok(PdcRecord {
        id: id.to_string(),
        peptide,
        linker_smiles: linker,
        payload_smiles: payload,
        measurements,
        status,
        label: None,
    })
}

/// Runs the curation pipeline.
///
/// Rows are grouped by id. A group is dropped when its rows disagree, a
/// component is missing, the status is unknown, the peptide has a
/// non-standard residue, a SMILES fails to parse or a measurement is
/// malformed. Among the remaining records, later records whose
/// whitespace-stripped (peptide, linker, payload) triple repeats an earlier
/// one are dropped as duplicates and their measurements merged into the
/// first. Each survivor keeps only its minimum measurement, converted to μM,
/// and is labeled with [`assign_label`] at `threshold_um`.
pub fn curate(rows: Vec<RawRow>, threshold_um: f64) -> Curated {
    let groups = group_rows(rows);
    let input_records = groups.len();
    let mut dropped = BTreeMap::new();
    let mut records: Vec<PdcRecord> = Vec::new();
    let mut seen: HashMap<(String, String, String), usize> = HashMap::new();

    for (id, group) in &groups {
        match build(id, group) {
            Err(reason) => {
                log::debug!("dropping {id}: {reason:?}");
                dropped.insert(id.clone(), reason);
            }
            Ok(record) => {
                let triple = (
                    record.peptide.to_string(),
                    record.linker_smiles.clone(),
                    record.payload_smiles.clone(),
                );
                if let Some(&first) = seen.get(&triple) {
                    log::debug!("dropping {id}: duplicate of {}", records[first].id);
                    records[first].measurements.extend(record.measurements);
                    dropped.insert(id.clone(), DropReason::Duplicate);
                } else {
                    seen.insert(triple, records.len());
                    records.push(record);
                }
            }
        }
    }

    for record in &mut records {
        let minimum = record
            .measurements
            .iter()
            .min_by(|a, b| normalize_activity(a).total_cmp(&normalize_activity(b)))
            .map(|m| ActivityMeasurement {
                assay: m.assay,
                value: normalize_activity(m),
                unit: Unit::MicroMolar,
            });
        record.measurements = minimum.into_iter().collect();
        record.label = Some(assign_label(record, threshold_um));
    }

    log::info!(
        "curated {} of {input_records} records ({} dropped)",
        records.len(),
        dropped.len()
    );
    Curated {
        report: CurationReport {
            input_records,
            retained: records.len(),
            threshold_um,
            dropped,
        },
        records,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(id: &str, peptide: &str, assay: &str, value: &str, unit: &str) -> RawRow {
        let opt = |s: &str| (!s.is_empty()).then(|| s.to_string());
        RawRow {
            id: id.into(),
            peptide_sequence: peptide.into(),
            linker_smiles: "CC(=O)O".into(),
            payload_smiles: "c1ccccc1O".into(),
            assay: opt(assay),
            activity_value: opt(value),
            activity_unit: opt(unit),
            status: "investigational".into(),
            label: None,
        }
    }

    #[test]
    fn minimum_after_conversion() {
        let rows = vec![
            row("a", "RGDC", "IC50", "0.8", "uM"),
            row("a", "RGDC", "EC50", "300", "nM"),
        ];
        let out = curate(rows, 1.0);
        assert_eq!(out.records.len(), 1);
        let m = out.records[0].measurements[0];
        assert_eq!((m.assay, m.unit), (crate::dataset::Assay::EC50, Unit::MicroMolar));
        assert!((m.value - 0.3).abs() < 1e-15);
        assert_eq!(out.records[0].label, Some(1));
    }

    #[test]
    fn duplicates_and_reasons() {
        let mut bad_linker = row("e", "RGDC", "", "", "");
        bad_linker.linker_smiles = "C1CC".into();
        let mut bad_status = row("f", "RGDC", "", "", "");
        bad_status.status = "withdrawn".into();
        let mut missing = row("g", "RGDC", "", "", "");
        missing.payload_smiles = " ".into();
        let rows = vec![
            row("a", "RGDC", "IC50", "5", "uM"),
            row("b", "RG DC", "IC50", "0.5", "uM"),
            row("c", "RXDC", "", "", ""),
            row("d", "RGDC", "IC50", "abc", "uM"),
            bad_linker,
            bad_status,
            missing,
            row("h", "KK", "IC50", "1", ""),
        ];
        let out = curate(rows, 1.0);
        let reasons: Vec<(&str, DropReason)> = out
            .report
            .dropped
            .iter()
            .map(|(k, v)| (k.as_str(), *v))
            .collect();
        assert_eq!(
            reasons,
            vec![
                ("b", DropReason::Duplicate),
                ("c", DropReason::NonStandardResidue),
                ("d", DropReason::InvalidMeasurement),
                ("e", DropReason::UnparseableLinker),
                ("f", DropReason::UnknownStatus),
                ("g", DropReason::MissingComponent),
                ("h", DropReason::InvalidMeasurement),
            ]
        );
        assert_eq!(out.records.len(), 1);
        // duplicate's 0.5 uM merged into the survivor
        assert_eq!(out.records[0].min_activity_um(), Some(0.5));
        assert_eq!(out.report.input_records, 8);
    }

    #[test]
    fn inconsistent_rows() {
        let rows = vec![
            row("a", "RGDC", "IC50", "5", "uM"),
            row("a", "RGDK", "IC50", "5", "uM"),
        ];
        let out = curate(rows, 1.0);
        assert_eq!(out.report.dropped["a"], DropReason::InconsistentRows);
    }
}
