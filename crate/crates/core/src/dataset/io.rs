use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};

use super::{
    parse_activity_value, ActivityMeasurement, CurationReport, DataSplit, DatasetError,
    PdcRecord,
};

/// One input row. Several rows sharing an `id` carry several measurements
/// of the same conjugate.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RawRow {
    pub id: String,
    #[serde(default)]
    pub peptide_sequence: String,
    #[serde(default)]
    pub linker_smiles: String,
    #[serde(default)]
    pub payload_smiles: String,
    #[serde(default, deserialize_with = "lenient_text")]
    pub assay: Option<String>,
    #[serde(default, deserialize_with = "lenient_text")]
    pub activity_value: Option<String>,
    #[serde(default, deserialize_with = "lenient_text")]
    pub activity_unit: Option<String>,
    #[serde(default)]
    pub status: String,
    #[serde(default, deserialize_with = "lenient_label")]
    pub label: Option<u8>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Lenient {
    Text(String),
    Int(i64),
    Float(f64),
}

impl Lenient {
    fn into_text(self) -> String {
        match self {
            Lenient::Text(s) => s,
            Lenient::Int(i) => i.to_string(),
            Lenient::Float(f) => f.to_string(),
        }
    }
}

fn lenient_text<'de, D: Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    let value = Option::<Lenient>::deserialize(d)?;
    Ok(value
        .map(|v| v.into_text().trim().to_string())
        .filter(|s| !s.is_empty()))
}

fn lenient_label<'de, D: Deserializer<'de>>(d: D) -> Result<Option<u8>, D::Error> {
    match lenient_text(d)? {
        None => Ok(None),
        Some(s) => match s.as_str() {
            "0" => Ok(Some(0)),
            "1" => Ok(Some(1)),
            other => Err(serde::de::Error::custom(format!("label must be 0 or 1, got {other:?}"))),
        },
    }
}

impl RawRow {
    /// The measurement on this row, if any activity field is filled in.
    pub fn measurement(&self) -> Result<Option<ActivityMeasurement>, String> {
        if self.assay.is_none() && self.activity_value.is_none() && self.activity_unit.is_none() {
            return Ok(None);
        }
        let assay = self.assay.as_deref().ok_or("missing assay")?.parse()?;
        let value = parse_activity_value(self.activity_value.as_deref().ok_or("missing activity value")?)
            .map_err(|e| e.to_string())?;
        let unit = self.activity_unit.as_deref().ok_or("missing activity unit")?.parse()?;
        ActivityMeasurement::new(assay, value, unit)
            .map(Some)
            .map_err(|e| e.to_string())
    }
}

impl PdcRecord {
    /// One row per measurement, or a single row without activity fields.
    pub fn to_rows(&self) -> Vec<RawRow> {
        let base = RawRow {
            id: self.id.clone(),
            peptide_sequence: self.peptide.to_string(),
            linker_smiles: self.linker_smiles.clone(),
            payload_smiles: self.payload_smiles.clone(),
            assay: None,
            activity_value: None,
            activity_unit: None,
            status: self.status.to_string(),
            label: self.label,
        };
        if self.measurements.is_empty() {
            return vec![base];
        }
        self.measurements
            .iter()
            .map(|m| RawRow {
                assay: Some(m.assay.to_string()),
                activity_value: Some(m.value.to_string()),
                activity_unit: Some(m.unit.to_string()),
                ..base.clone()
            })
            .collect()
    }
}

/// Groups rows by id in order of first appearance.
pub(crate) fn group_rows(rows: Vec<RawRow>) -> Vec<(String, Vec<RawRow>)> {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut groups: Vec<(String, Vec<RawRow>)> = Vec::new();
    for row in rows {
        match index.get(&row.id) {
            Some(&i) => groups[i].1.push(row),
            None => {
                index.insert(row.id.clone(), groups.len());
                groups.push((row.id.clone(), vec![row]));
            }
        }
    }
    groups
}

fn is_jsonl(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("jsonl" | "json" | "ndjson")
    )
}

/// Reads CSV, or JSON lines when the extension is `.jsonl`, `.ndjson` or
/// `.json`.
pub fn read_raw_rows(path: &Path) -> Result<Vec<RawRow>, DatasetError> {
    let file = File::open(path).map_err(|e| DatasetError::io(path, e))?;
    if is_jsonl(path) {
        let mut rows = Vec::new();
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| DatasetError::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let row = serde_json::from_str(&line)
                .map_err(|source| DatasetError::Json { line: n + 1, source })?;
            rows.push(row);
        }
        Ok(rows)
    } else {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
        reader
            .deserialize()
            .collect::<Result<Vec<RawRow>, _>>()
            .map_err(DatasetError::from)
    }
}

/// Reads a curated file into records without further curation. Rows
/// sharing an id must agree on every component.
pub fn read_records(path: &Path) -> Result<Vec<PdcRecord>, DatasetError> {
    records_from_rows(read_raw_rows(path)?)
}

pub(crate) fn records_from_rows(rows: Vec<RawRow>) -> Result<Vec<PdcRecord>, DatasetError> {
    group_rows(rows)
        .into_iter()
        .map(|(id, group)| {
            let error = |message: String| DatasetError::Record {
                id: id.clone(),
                message,
            };
            let first = &group[0];
            if group.iter().any(|r| {
                r.peptide_sequence != first.peptide_sequence
                    || r.linker_smiles != first.linker_smiles
                    || r.payload_smiles != first.payload_smiles
                    || r.status != first.status
                    || r.label != first.label
            }) {
                return Err(error("rows sharing this id disagree".into()));
            }
            let peptide = first
                .peptide_sequence
                .parse()
                .map_err(|e: crate::peptide::PeptideError| error(e.to_string()))?;
            let status = first.status.parse().map_err(error)?;
            let mut measurements = Vec::new();
            for row in &group {
                if let Some(m) = row.measurement().map_err(error)? {
                    measurements.push(m);
                }
            }
            Ok(PdcRecord {
                id: id.clone(),
                peptide,
                linker_smiles: first.linker_smiles.clone(),
                payload_smiles: first.payload_smiles.clone(),
                measurements,
                status,
                label: first.label,
            })
        })
        .collect()
}

/// Writes records in the input schema plus a label column, as CSV or JSON
/// lines depending on the extension.
pub fn write_records(path: &Path, records: &[PdcRecord]) -> Result<(), DatasetError> {
    let file = File::create(path).map_err(|e| DatasetError::io(path, e))?;
    if is_jsonl(path) {
        let mut out = BufWriter::new(file);
        for row in records.iter().flat_map(PdcRecord::to_rows) {
            let line = serde_json::to_string(&row).map_err(|source| DatasetError::Json { line: 0, source })?;
            writeln!(out, "{line}").map_err(|e| DatasetError::io(path, e))?;
        }
        out.flush().map_err(|e| DatasetError::io(path, e))
    } else {
        let mut writer = csv::Writer::from_writer(file);
        for row in records.iter().flat_map(PdcRecord::to_rows) {
            writer.serialize(row)?;
        }
        writer.flush().map_err(|e| DatasetError::io(path, e))
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), DatasetError> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|source| DatasetError::Json { line: 0, source })?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| DatasetError::io(path, e))
}

pub fn write_report(path: &Path, report: &CurationReport) -> Result<(), DatasetError> {
    write_json(path, report)
}

pub fn write_split(path: &Path, split: &DataSplit) -> Result<(), DatasetError> {
    write_json(path, split)
}

pub fn read_split(path: &Path) -> Result<DataSplit, DatasetError> {
    let text = std::fs::read_to_string(path).map_err(|e| DatasetError::io(path, e))?;
    let split: DataSplit =
        serde_json::from_str(&text).map_err(|source| DatasetError::Json { line: 1, source })?;
    split.validate()?;
    Ok(split)
}
