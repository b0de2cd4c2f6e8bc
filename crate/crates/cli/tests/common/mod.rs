#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const PAYLOADS: &[&str] = &[
    "c1ccccc1",
    "CC(=O)Oc1ccccc1C(=O)O",
    "O=C1CCC(=O)N1",
    "CCC1(O)C(=O)OCc2c1cc1-c3nc4ccccc4cc3Cn1c2=O",
    "Nc1ncnc2c1ncn2C1OC(CO)C(O)C1O",
    "c1ccc2ccccc2c1",
    "COc1ccc(CCN)cc1",
];

const RESIDUES: &[u8] = b"ACDEFGHIKLMNPQRSTVWY";

/// A distinct peptide for every index.
pub fn peptide(i: usize) -> String {
    let mut s = String::new();
    let mut k = i + 20;
    while k > 0 {
        s.push(RESIDUES[k % 20] as char);
        k /= 20;
    }
    s.push_str("GK");
    s
}

pub struct Raw {
    pub id: String,
    pub peptide: String,
    pub linker: String,
    pub payload: String,
    /// `(value, unit)` in the input's own units.
    pub activity: Option<(String, String)>,
    pub status: String,
}

pub fn write_raw(path: &Path, rows: &[Raw]) {
    let mut w = csv::Writer::from_path(path).unwrap();
    w.write_record([
        "id",
        "peptide_sequence",
        "linker_smiles",
        "payload_smiles",
        "assay",
        "activity_value",
        "activity_unit",
        "status",
    ])
    .unwrap();
    for r in rows {
        let (assay, value, unit) = match &r.activity {
            Some((v, u)) => ("IC50", v.as_str(), u.as_str()),
            None => ("", "", ""),
        };
        w.write_record([&r.id, &r.peptide, &r.linker, &r.payload, assay, value, unit, &r.status])
            .unwrap();
    }
    w.flush().unwrap();
}

/// `n` distinct conjugates; the label follows the payload so small models
/// can learn it.
pub fn synthetic_raw(n: usize) -> Vec<Raw> {
    (0..n)
        .map(|i| {
            let p = i % PAYLOADS.len();
            let active = p % 2 == 0;
            let status = if i % 23 == 0 { "clinical_phase_2" } else { "investigational" };
            let activity = if active {
                Some((format!("{}", 50 + i % 400), "nM".to_string()))
            } else {
                Some((format!("{}", 2 + i % 30), "uM".to_string()))
            };
            Raw {
                id: format!("r{i:04}"),
                peptide: peptide(i),
                linker: format!("N{}C(=O)O", "C".repeat(1 + i % 6)),
                payload: PAYLOADS[p].to_string(),
                activity,
                status: status.into(),
            }
        })
        .collect()
}

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pdcnet"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

/// Runs and asserts success.
pub fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

pub fn manifest_of(p: &Path) -> serde_json::Value {
    let mut name = p.as_os_str().to_owned();
    name.push(".manifest.json");
    let text = std::fs::read_to_string(PathBuf::from(name)).unwrap();
    serde_json::from_str(&text).unwrap()
}

/// Curated dataset of `n` records plus its split, in `dir`.
pub fn prepared(dir: &Path, n: usize) -> (PathBuf, PathBuf) {
    let raw = dir.join("raw.csv");
    let curated = dir.join("curated.csv");
    let split = dir.join("split.json");
    write_raw(&raw, &synthetic_raw(n));
    ok(&["curate", "--in", s(&raw), "--out", s(&curated)]);
    ok(&["split", "--in", s(&curated), "--out", s(&split), "--seed", "3", "--stratified"]);
    (curated, split)
}

/// Flags for a network small enough to train in a test.
pub const TINY: &[&str] = &["--d-h", "4", "--epochs", "4", "--lr", "0.01", "--batch-size", "8"];

pub fn tiny_config(dir: &Path) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(
        &path,
        r#"{"model": {"peptide_global_dim": 6, "molecule_dim": 6, "fingerprint_bits": 128, "dropout": 0.0}}"#,
    )
    .unwrap();
    path
}
