use pdcnet_wasm::{compare_molecules, compare_peptides, metrics_from_text};

#[test]
fn molecules() {
    let same = compare_molecules("c1ccccc1O", "Oc1ccccc1").unwrap();
    assert_eq!(same.tanimoto, 1.0);
    assert_eq!(same.atoms, [7, 7]);
    assert_eq!(same.ring_bonds, [6, 6]);
    let diff = compare_molecules("CCO", "c1ccccc1").unwrap();
    assert!(diff.tanimoto < 0.2);
    assert!(compare_molecules("C1CC", "CCO").unwrap_err().starts_with("first molecule"));
}

#[test]
fn peptides() {
    let r = compare_peptides("RGDFK", "RGDC").unwrap();
    assert_eq!(r.lengths, [5, 4]);
    assert_eq!(r.alignment_score, 3);
    assert_eq!(r.similarity, 3.0 / 5.0);
    assert!(compare_peptides("RGD", "RXD").is_err());
}

#[test]
fn metrics_text() {
    let r = metrics_from_text("# demo\n0.9,1\n0.8 0\n0.3\t1\n\n0.1,0\n", 0.5).unwrap();
    assert_eq!((r.counts.tp, r.counts.fp, r.counts.tn, r.counts.fn_), (1, 1, 1, 1));
    assert_eq!(r.auc, 0.75);
    assert!(metrics_from_text("0.9", 0.5).unwrap_err().contains("line 1"));
    assert!(metrics_from_text("0.9,2", 0.5).is_err());
    assert!(metrics_from_text("0.9,1\n0.8,1", 0.5).is_err());
}
