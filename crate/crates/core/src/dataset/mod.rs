//! Benchmark construction: ingestion, curation, labeling, splits and novelty
//! scoring against a reference set.

mod curate;
mod io;
mod novelty;
mod split;

pub use curate::{curate, CurationReport, DropReason, Curated};
pub use io::{
    read_raw_rows, read_records, read_split, write_records, write_report, write_split,
    RawRow,
};
pub use novelty::{harmonic_mean, novelty_score, ReferenceSet, SimilarityReport};
pub use split::{kfold, split, split_stratified, DataSplit};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chem::ChemError;
use crate::peptide::{PeptideError, PeptideSequence};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error at line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("record {id}: {message}")]
    Record { id: String, message: String },
    #[error("dataset too small: {n} records, need at least {needed}")]
    TooSmall { n: usize, needed: usize },
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("invalid activity value {0:?}")]
    ActivityValue(String),
    #[error(transparent)]
    Chem(#[from] ChemError),
    #[error(transparent)]
    Peptide(#[from] PeptideError),
}

impl DatasetError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        DatasetError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Assay {
    IC50,
    EC50,
    GI50,
}

impl FromStr for Assay {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "IC50" => Ok(Assay::IC50),
            "EC50" => Ok(Assay::EC50),
            "GI50" => Ok(Assay::GI50),
            _ => Err(format!("unknown assay {s:?}")),
        }
    }
}

impl fmt::Display for Assay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Unit {
    #[serde(rename = "pM")]
    PicoMolar,
    #[serde(rename = "nM")]
    NanoMolar,
    #[serde(rename = "uM")]
    MicroMolar,
    #[serde(rename = "M")]
    Molar,
}

impl Unit {
    /// Multiplier that converts a value in this unit to μM.
    pub fn to_micromolar(self) -> f64 {
        match self {
            Unit::PicoMolar => 1e-6,
            Unit::NanoMolar => 1e-3,
            Unit::MicroMolar => 1.0,
            Unit::Molar => 1e6,
        }
    }
}

impl FromStr for Unit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "pM" => Ok(Unit::PicoMolar),
            "nM" => Ok(Unit::NanoMolar),
            "uM" | "μM" | "µM" => Ok(Unit::MicroMolar),
            "M" => Ok(Unit::Molar),
            _ => Err(format!("unknown unit {s:?}")),
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Unit::PicoMolar => "pM",
            Unit::NanoMolar => "nM",
            Unit::MicroMolar => "uM",
            Unit::Molar => "M",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActivityMeasurement {
    pub assay: Assay,
    pub value: f64,
    pub unit: Unit,
}

impl ActivityMeasurement {
    /// Fails unless `value` is finite and positive.
    pub fn new(assay: Assay, value: f64, unit: Unit) -> Result<Self, DatasetError> {
        if !(value.is_finite() && value > 0.0) {
            return Err(DatasetError::ActivityValue(value.to_string()));
        }
        Ok(ActivityMeasurement { assay, value, unit })
    }
}

/// Converts a measurement to μM.
pub fn normalize_activity(m: &ActivityMeasurement) -> f64 {
    m.value * m.unit.to_micromolar()
}

/// Parses a reported activity value. Leading qualifiers (`>`, `<`, `>=`,
/// `<=`, `≥`, `≤`, `~`, `=`) are dropped and a range `lo-hi` (hyphen, en dash
/// or em dash) is read as its minimum.
pub fn parse_activity_value(text: &str) -> Result<f64, DatasetError> {
    let bad = || DatasetError::ActivityValue(text.to_string());
    let stripped = text
        .trim()
        .trim_start_matches(|c: char| matches!(c, '>' | '<' | '≥' | '≤' | '~' | '=') || c.is_whitespace());
    if stripped.is_empty() {
        return Err(bad());
    }
    let parse = |s: &str| -> Result<f64, DatasetError> {
        let v: f64 = s.trim().parse().map_err(|_| bad())?;
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(bad())
        }
    };
    if let Ok(v) = parse(stripped) {
        return Ok(v);
    }
    let separator = stripped.char_indices().find(|&(i, c)| {
        matches!(c, '\u{2013}' | '\u{2014}')
            || (c == '-'
                && i > 0
                && !stripped[..i].ends_with(|p: char| matches!(p, 'e' | 'E')))
    });
    let (i, c) = separator.ok_or_else(bad)?;
    let lo = parse(&stripped[..i])?;
    let hi = parse(&stripped[i + c.len_utf8()..])?;
    Ok(lo.min(hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DevelopmentStatus {
    Marketed,
    ClinicalPhase1,
    ClinicalPhase2,
    ClinicalPhase3,
    PreclinicalAnimal,
    Investigational,
}

impl DevelopmentStatus {
    pub const ALL: [DevelopmentStatus; 6] = [
        DevelopmentStatus::Marketed,
        DevelopmentStatus::ClinicalPhase1,
        DevelopmentStatus::ClinicalPhase2,
        DevelopmentStatus::ClinicalPhase3,
        DevelopmentStatus::PreclinicalAnimal,
        DevelopmentStatus::Investigational,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DevelopmentStatus::Marketed => "marketed",
            DevelopmentStatus::ClinicalPhase1 => "clinical_phase_1",
            DevelopmentStatus::ClinicalPhase2 => "clinical_phase_2",
            DevelopmentStatus::ClinicalPhase3 => "clinical_phase_3",
            DevelopmentStatus::PreclinicalAnimal => "preclinical_animal",
            DevelopmentStatus::Investigational => "investigational",
        }
    }

    /// Statuses that are labeled active regardless of measured activity.
    pub fn is_status_positive(self) -> bool {
        self != DevelopmentStatus::Investigational
    }
}

impl FromStr for DevelopmentStatus {
    type Err = String;

    /// Accepts the canonical snake_case names, case-insensitively, with
    /// spaces or hyphens in place of underscores; `in_vivo` and
    /// `in_vivo_study` map to `preclinical_animal`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .trim()
            .to_ascii_lowercase()
            .chars()
            .map(|c| if c == ' ' || c == '-' { '_' } else { c })
            .collect();
        if key == "in_vivo" || key == "in_vivo_study" {
            return Ok(DevelopmentStatus::PreclinicalAnimal);
        }
        DevelopmentStatus::ALL
            .into_iter()
            .find(|status| status.as_str() == key)
            .ok_or_else(|| format!("unknown development status {s:?}"))
    }
}

impl fmt::Display for DevelopmentStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One conjugate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdcRecord {
    pub id: String,
    pub peptide: PeptideSequence,
    pub linker_smiles: String,
    pub payload_smiles: String,
    pub measurements: Vec<ActivityMeasurement>,
    pub status: DevelopmentStatus,
    pub label: Option<u8>,
}

impl PdcRecord {
    /// Smallest measured activity in μM.
    pub fn min_activity_um(&self) -> Option<f64> {
        self.measurements
            .iter()
            .map(normalize_activity)
            .min_by(f64::total_cmp)
    }

    /// The stored label, or the default-threshold label when none is stored.
    pub fn label_or_assigned(&self) -> u8 {
        self.label.unwrap_or_else(|| assign_label(self, DEFAULT_THRESHOLD_UM))
    }
}

pub const DEFAULT_THRESHOLD_UM: f64 = 1.0;

/// Activity label: 1 for marketed, clinical and animal-tested conjugates;
/// otherwise 1 iff the minimum activity is at most `threshold_um`, and 0
/// without measurements.
pub fn assign_label(record: &PdcRecord, threshold_um: f64) -> u8 {
    if record.status.is_status_positive() {
        return 1;
    }
    match record.min_activity_um() {
        Some(v) => u8::from(v <= threshold_um),
        None => 0,
    }
}

/// Labels of a record list, from stored labels where present.
pub fn labels(records: &[PdcRecord]) -> Vec<u8> {
    records.iter().map(PdcRecord::label_or_assigned).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_conversion() {
        let m = |v, u| ActivityMeasurement::new(Assay::IC50, v, u).unwrap();
        assert_eq!(normalize_activity(&m(500.0, Unit::NanoMolar)), 0.5);
        assert_eq!(normalize_activity(&m(2e-6, Unit::Molar)), 2.0);
        assert_eq!(normalize_activity(&m(1.0, Unit::PicoMolar)), 1e-6);
        assert!(ActivityMeasurement::new(Assay::IC50, 0.0, Unit::Molar).is_err());
        assert!(ActivityMeasurement::new(Assay::IC50, f64::NAN, Unit::Molar).is_err());
    }

    #[test]
    fn activity_value_forms() {
        assert_eq!(parse_activity_value("0.26").unwrap(), 0.26);
        assert_eq!(parse_activity_value("12.5-25").unwrap(), 12.5);
        assert_eq!(parse_activity_value("121.1–174.1").unwrap(), 121.1);
        assert_eq!(parse_activity_value("> 2").unwrap(), 2.0);
        assert_eq!(parse_activity_value("<=0.5").unwrap(), 0.5);
        assert_eq!(parse_activity_value("2e-6").unwrap(), 2e-6);
        assert_eq!(parse_activity_value("1e-3-5e-3").unwrap(), 1e-3);
        assert_eq!(parse_activity_value("25 - 50").unwrap(), 25.0);
        for bad in ["", "abc", "-1", "0", "1-", ">"] {
            assert!(parse_activity_value(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn status_names() {
        for s in DevelopmentStatus::ALL {
            assert_eq!(s.as_str().parse::<DevelopmentStatus>().unwrap(), s);
        }
        assert_eq!(
            "In vivo study".parse::<DevelopmentStatus>().unwrap(),
            DevelopmentStatus::PreclinicalAnimal
        );
        assert_eq!(
            "Clinical-Phase-2".parse::<DevelopmentStatus>().unwrap(),
            DevelopmentStatus::ClinicalPhase2
        );
        assert!("withdrawn".parse::<DevelopmentStatus>().is_err());
    }

    #[test]
    fn unit_names() {
        assert_eq!("μM".parse::<Unit>().unwrap(), Unit::MicroMolar);
        assert_eq!("M".parse::<Unit>().unwrap(), Unit::Molar);
        assert!("mM".parse::<Unit>().is_err());
    }
}
