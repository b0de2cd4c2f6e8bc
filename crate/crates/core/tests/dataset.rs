mod common;

use pdcnet::dataset::{
    assign_label, curate, harmonic_mean, kfold, novelty_score, parse_activity_value,
    read_raw_rows, read_records, read_split, split, write_records, write_split,
    ActivityMeasurement, Assay, DevelopmentStatus, PdcRecord, RawRow, Unit,
};
use proptest::prelude::*;

use common::{synthetic_records, external_rows, ReferencePrng, EXTERNAL_SET};

#[test]
fn external_labels_through_curation() {
    let curated = curate(external_rows(), 1.0);
    assert!(curated.report.dropped.is_empty(), "{:?}", curated.report.dropped);
    let got: Vec<u8> = curated.records.iter().map(|r| r.label.unwrap()).collect();
    let want: Vec<u8> = EXTERNAL_SET.iter().map(|row| row.2).collect();
    assert_eq!(got, want);
}

#[test]
fn external_labels_direct() {
    for (peptide, activity, label) in EXTERNAL_SET {
        let peptide = peptide.replace(' ', "").parse().unwrap();
        let (status, measurements) = if activity == "In vivo study" {
            (DevelopmentStatus::PreclinicalAnimal, vec![])
        } else {
            let text = activity.trim_start_matches("IC50").trim_end_matches("μM");
            let value = parse_activity_value(text).unwrap();
            (
                DevelopmentStatus::Investigational,
                vec![ActivityMeasurement::new(Assay::IC50, value, Unit::MicroMolar).unwrap()],
            )
        };
        let record = PdcRecord {
            id: String::new(),
            peptide,
            linker_smiles: "CC".into(),
            payload_smiles: "CC".into(),
            measurements,
            status,
            label: None,
        };
        assert_eq!(assign_label(&record, 1.0), label, "{activity}");
    }
}

#[test]
fn investigational_without_measurement_is_negative() {
    let mut r = synthetic_records(1, 0).remove(0);
    r.status = DevelopmentStatus::Investigational;
    r.measurements.clear();
    assert_eq!(assign_label(&r, 1.0), 0);
    assert_eq!(assign_label(&r, 1e9), 0);
}

#[test]
fn split_matches_reference_prng() {
    for seed in [0u64, 1, 2, 3, 42, u64::MAX] {
        let s = split(834, seed).unwrap();
        let order = ReferencePrng::new(seed).shuffled(834);
        assert_eq!(s.train, order[..667]);
        assert_eq!(s.val, order[667..750]);
        assert_eq!(s.test, order[750..]);
    }
}

#[test]
fn kfold_examples() {
    let folds = kfold(10, 5, 3).unwrap();
    assert!(folds.iter().all(|(t, v)| v.len() == 2 && t.len() == 8));
    let mut all: Vec<usize> = folds.iter().flat_map(|(_, v)| v.clone()).collect();
    all.sort_unstable();
    assert_eq!(all, (0..10).collect::<Vec<_>>());
    assert_eq!(kfold(10, 5, 3).unwrap(), folds);
}

#[test]
fn novelty_of_identical_query() {
    let reference = synthetic_records(30, 4);
    let report = novelty_score(&reference[7], &reference).unwrap();
    assert_eq!(report.max_peptide_sim, 1.0);
    assert_eq!(report.max_linker_sim, 1.0);
    assert_eq!(report.max_payload_sim, 1.0);
    assert_eq!(report.harmonic_mean, 1.0);
    let mut bad = reference[0].clone();
    bad.payload_smiles = "C1CC".into();
    assert!(novelty_score(&bad, &reference).is_err());
}

#[test]
fn csv_and_jsonl_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let records = synthetic_records(40, 9);
    for name in ["records.csv", "records.jsonl"] {
        let path = dir.path().join(name);
        write_records(&path, &records).unwrap();
        assert_eq!(read_records(&path).unwrap(), records);
    }
}

#[test]
fn jsonl_accepts_numeric_values() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("raw.jsonl");
    std::fs::write(
        &path,
        r#"{"id":"a","peptide_sequence":"RGDC","linker_smiles":"CC","payload_smiles":"CO","assay":"IC50","activity_value":300,"activity_unit":"nM","status":"investigational"}
{"id":"b","peptide_sequence":"RGDK","linker_smiles":"CC","payload_smiles":"CO","assay":null,"activity_value":null,"activity_unit":null,"status":"marketed"}
"#,
    )
    .unwrap();
    let rows = read_raw_rows(&path).unwrap();
    assert_eq!(rows[0].activity_value.as_deref(), Some("300"));
    let out = curate(rows, 1.0);
    assert_eq!(out.records[0].min_activity_um(), Some(0.3));
    assert_eq!(out.records[1].label, Some(1));
}

#[test]
fn split_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("split.json");
    let s = split(50, 11).unwrap();
    write_split(&path, &s).unwrap();
    assert_eq!(read_split(&path).unwrap(), s);
    let mut broken = s.clone();
    broken.test.push(0);
    write_split(&path, &broken).unwrap();
    assert!(read_split(&path).is_err());
}

fn raw_row() -> impl Strategy<Value = RawRow> {
    let peptide = prop::sample::select(vec!["RGDC", "RG DC", "KKX", "", "GSS", "RPPR"]);
    let smiles = prop::sample::select(vec!["CC", "CCO", "C1CC", "c1ccccc1", "", "O=C(O)CC"]);
    let value = prop::option::of(prop::sample::select(vec!["0.5", "300", "12.5-25", "> 2", "abc", "1e-3"]));
    let unit = prop::option::of(prop::sample::select(vec!["nM", "uM", "pM", "M", "mM"]));
    let assay = prop::option::of(prop::sample::select(vec!["IC50", "EC50", "GI50"]));
    let status = prop::sample::select(vec![
        "investigational",
        "marketed",
        "preclinical_animal",
        "clinical_phase_3",
        "retired",
    ]);
    (0u8..12, peptide, smiles.clone(), smiles, assay, value, unit, status).prop_map(
        |(id, p, l, y, assay, value, unit, status)| RawRow {
            id: format!("r{id}"),
            peptide_sequence: p.into(),
            linker_smiles: l.into(),
            payload_smiles: y.into(),
            assay: assay.map(Into::into),
            activity_value: value.map(Into::into),
            activity_unit: unit.map(Into::into),
            status: status.into(),
            label: None,
        },
    )
}

fn curated_record() -> impl Strategy<Value = PdcRecord> {
    let status = prop::sample::select(DevelopmentStatus::ALL.to_vec());
    (status, prop::option::of(-4.0f64..3.0)).prop_map(|(status, exponent)| PdcRecord {
        id: "x".into(),
        peptide: "RGDC".parse().unwrap(),
        linker_smiles: "CC".into(),
        payload_smiles: "CC".into(),
        measurements: exponent
            .map(|e| ActivityMeasurement::new(Assay::GI50, 10f64.powf(e), Unit::MicroMolar).unwrap())
            .into_iter()
            .collect(),
        status,
        label: None,
    })
}

proptest! {
    #[test]
    fn curation_idempotent(rows in prop::collection::vec(raw_row(), 0..30)) {
        let once = curate(rows, 1.0);
        let again_rows: Vec<RawRow> = once.records.iter().flat_map(PdcRecord::to_rows).collect();
        let twice = curate(again_rows, 1.0);
        prop_assert_eq!(&twice.records, &once.records);
        prop_assert!(twice.report.dropped.is_empty());
    }

    #[test]
    fn label_monotone_in_threshold(r in curated_record(), a in 1e-5f64..1e3, b in 1e-5f64..1e3) {
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(assign_label(&r, lo) <= assign_label(&r, hi));
        if r.status.is_status_positive() {
            prop_assert_eq!(assign_label(&r, lo), 1);
        }
    }

    #[test]
    fn split_partitions(n in 10usize..2000, seed in any::<u64>()) {
        let s = split(n, seed).unwrap();
        prop_assert_eq!(s.train.len(), n * 8 / 10);
        prop_assert_eq!(s.val.len(), n / 10);
        prop_assert_eq!(s.train.len() + s.val.len() + s.test.len(), n);
        prop_assert!(s.validate().is_ok());
        prop_assert_eq!(split(n, seed).unwrap(), s);
    }

    #[test]
    fn kfold_partitions(n in 5usize..200, k in 2usize..6, seed in any::<u64>()) {
        prop_assume!(n >= k);
        let folds = kfold(n, k, seed).unwrap();
        let mut seen = vec![0; n];
        for (train, val) in &folds {
            prop_assert_eq!(train.len() + val.len(), n);
            prop_assert!(val.len() == n / k || val.len() == n / k + 1);
            for &i in val { seen[i] += 1; }
            for &i in train { prop_assert!(!val.contains(&i)); }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn harmonic_between_min_and_mean(a in 1e-6f64..=1.0, b in 1e-6f64..=1.0, c in 1e-6f64..=1.0) {
        let h = harmonic_mean(a, b, c);
        prop_assert!(h >= a.min(b).min(c) * (1.0 - 1e-12));
        prop_assert!(h <= (a + b + c) / 3.0 * (1.0 + 1e-12));
    }
}
