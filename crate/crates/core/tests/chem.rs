mod common;

use pdcnet::chem::{
    ecfp4, morgan_fingerprint, parse_smiles, ring_bonds, tanimoto, Atom, Bond, BondOrder,
    Fingerprint, MolGraph,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

use common::{ring_bonds_by_removal, MOLECULES};

#[test]
fn all_fixture_molecules_parse() {
    for smiles in MOLECULES {
        let mol = parse_smiles(smiles).unwrap_or_else(|e| panic!("{smiles}: {e}"));
        assert!(ecfp4(&mol).unwrap().count_ones() > 0, "{smiles}");
    }
    assert!(MOLECULES.len() >= 20);
}

#[test]
fn fingerprint_invariant_under_reordering() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(7);
    for smiles in MOLECULES {
        let mol = parse_smiles(smiles).unwrap();
        let reference = ecfp4(&mol).unwrap();
        for _ in 0..100 {
            let mut perm: Vec<usize> = (0..mol.atom_count()).collect();
            perm.shuffle(&mut rng);
            let mut order: Vec<usize> = (0..mol.bonds().len()).collect();
            order.shuffle(&mut rng);
            let shuffled = mol.renumbered(&perm, &order).unwrap();
            assert_eq!(ecfp4(&shuffled).unwrap(), reference, "{smiles}");
        }
    }
}

#[test]
fn written_order_does_not_matter() {
    let pairs = [
        ("CCO", "OCC"),
        ("CC(=O)O", "OC(C)=O"),
        ("c1ccccc1O", "Oc1ccccc1"),
        ("C1CC1C", "CC1CC1"),
        ("NCC(=O)O", "OC(=O)CN"),
    ];
    for (a, b) in pairs {
        let fa = ecfp4(&parse_smiles(a).unwrap()).unwrap();
        let fb = ecfp4(&parse_smiles(b).unwrap()).unwrap();
        assert_eq!(fa, fb, "{a} vs {b}");
    }
}

#[test]
fn ring_bonds_match_removal_oracle() {
    for smiles in MOLECULES {
        let mol = parse_smiles(smiles).unwrap();
        let fast: Vec<usize> = ring_bonds(&mol).into_iter().collect();
        assert_eq!(fast, ring_bonds_by_removal(&mol), "{smiles}");
        for (index, bond) in mol.bonds().iter().enumerate() {
            assert_eq!(bond.in_ring, fast.contains(&index));
        }
    }
}

#[test]
fn ring_bond_examples() {
    let idx = |s: &str| ring_bonds(&parse_smiles(s).unwrap()).into_iter().collect::<Vec<_>>();
    assert_eq!(idx("C1CC1"), vec![0, 1, 2]);
    assert!(idx("CCO").is_empty());
    let pendant = parse_smiles("C1CC1C").unwrap();
    let ring = ring_bonds(&pendant);
    assert_eq!(ring.len(), 3);
    let tail = pendant
        .bonds()
        .iter()
        .position(|b| b.endpoints.0 == 3 || b.endpoints.1 == 3)
        .unwrap();
    assert!(!ring.contains(&tail));
}

/// Methane: one center, so at most one identifier per iteration.
#[test]
fn methane_environment_count() {
    let fp = ecfp4(&parse_smiles("C").unwrap()).unwrap();
    assert!((1..=3).contains(&fp.count_ones()));
    let r0 = morgan_fingerprint(&parse_smiles("C").unwrap(), 0, 1024).unwrap();
    assert_eq!(r0.count_ones(), 1);
}

#[test]
fn fingerprint_errors() {
    let mol = parse_smiles("CC").unwrap();
    assert!(morgan_fingerprint(&mol, 2, 0).is_err());
    let a = Fingerprint::zeros(1024, 2);
    let b = Fingerprint::zeros(2048, 2);
    assert!(tanimoto(&a, &b).is_err());
}

#[test]
fn tanimoto_examples() {
    let a = Fingerprint::from_bits(16, [1, 2, 3]);
    let b = Fingerprint::from_bits(16, [2, 3, 4]);
    let c = Fingerprint::from_bits(16, [5, 6]);
    assert_eq!(tanimoto(&a, &b).unwrap(), 0.5);
    assert_eq!(tanimoto(&a, &c).unwrap(), 0.0);
    assert_eq!(tanimoto(&a, &a).unwrap(), 1.0);
    let empty = Fingerprint::zeros(16, 0);
    assert_eq!(tanimoto(&empty, &empty).unwrap(), 1.0);
}

#[test]
fn hex_round_trip() {
    for smiles in MOLECULES {
        let fp = ecfp4(&parse_smiles(smiles).unwrap()).unwrap();
        let hex = fp.to_hex();
        assert_eq!(hex.len(), 256);
        assert!(hex.chars().all(|c| c.is_ascii_hexdigit() && !c.is_ascii_uppercase()));
        let back = Fingerprint::from_hex(&hex, 1024).unwrap();
        assert_eq!(back.ones().collect::<Vec<_>>(), fp.ones().collect::<Vec<_>>());
    }
}

/// Writes the graph as a plain adjacency listing, rebuilds it from that text
/// and re-derives hydrogens.
#[test]
fn adjacency_listing_round_trip() {
    for smiles in MOLECULES {
        let mol = parse_smiles(smiles).unwrap();
        let mut listing = String::new();
        for a in mol.atoms() {
            listing.push_str(&format!(
                "atom {} {} {} {} {}\n",
                a.element,
                u8::from(a.aromatic),
                a.formal_charge,
                u8::from(a.bracket),
                a.explicit_h
            ));
        }
        let mut bonds: Vec<(usize, usize, u64)> = mol
            .bonds()
            .iter()
            .map(|b| {
                let (x, y) = b.endpoints;
                (x.min(y), x.max(y), b.order.code())
            })
            .collect();
        bonds.sort();
        for (x, y, code) in &bonds {
            listing.push_str(&format!("bond {x} {y} {code}\n"));
        }

        let mut atoms = Vec::new();
        let mut rebuilt_bonds = Vec::new();
        for line in listing.lines() {
            let f: Vec<&str> = line.split(' ').collect();
            if f[0] == "atom" {
                atoms.push(Atom {
                    element: f[1].parse().unwrap(),
                    aromatic: f[2] == "1",
                    formal_charge: f[3].parse().unwrap(),
                    isotope: None,
                    explicit_h: f[5].parse().unwrap(),
                    implicit_h: 0,
                    bracket: f[4] == "1",
                });
            } else {
                let order = match f[3] {
                    "1" => BondOrder::Single,
                    "2" => BondOrder::Double,
                    "3" => BondOrder::Triple,
                    _ => BondOrder::Aromatic,
                };
                rebuilt_bonds.push(Bond {
                    endpoints: (f[1].parse().unwrap(), f[2].parse().unwrap()),
                    order,
                    in_ring: false,
                });
            }
        }
        let mut rebuilt = MolGraph::from_parts(atoms, rebuilt_bonds).unwrap();
        rebuilt.assign_implicit_hydrogens();
        let before: Vec<u8> = mol.atoms().iter().map(|a| a.implicit_h).collect();
        let after: Vec<u8> = rebuilt.atoms().iter().map(|a| a.implicit_h).collect();
        assert_eq!(before, after, "{smiles}");
    }
}

#[test]
fn serde_round_trip() {
    let mol = parse_smiles("O=C1C=CC(=O)N1CCCCCC(=O)O").unwrap();
    let json = serde_json::to_string(&mol).unwrap();
    let back: MolGraph = serde_json::from_str(&json).unwrap();
    assert_eq!(back, mol);
}

fn fingerprint_strategy() -> impl Strategy<Value = Fingerprint> {
    proptest::collection::btree_set(0usize..64, 0..20)
        .prop_map(|bits| Fingerprint::from_bits(64, bits))
}

proptest! {
    #[test]
    fn tanimoto_symmetric_bounded(a in fingerprint_strategy(), b in fingerprint_strategy()) {
        let ab = tanimoto(&a, &b).unwrap();
        prop_assert_eq!(ab, tanimoto(&b, &a).unwrap());
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(tanimoto(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn parser_never_panics(text in "[CNOcnos()=#1-2\\[\\]+H%]{0,16}") {
        let _ = parse_smiles(&text);
    }
}
