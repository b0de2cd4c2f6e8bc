#![allow(dead_code)]

use pdcnet::chem::MolGraph;

/// Linker and payload structures used across the chemistry tests.
pub const MOLECULES: &[&str] = &[
    "CCO",
    "C1CC1C",
    "c1ccccc1",
    "c1ccc2ccccc2c1",
    "CC(=O)Oc1ccccc1C(=O)O",
    "O=C1CCC(=O)N1",
    "O=C1C=CC(=O)N1CCCCCC(=O)O",
    "NC(=O)NCCCC(NC(=O)C(N)C(C)C)C(=O)Nc1ccc(CO)cc1",
    "COc1cccc2C(=O)c3c(O)c4CC(O)(CC(OC5CC(N)C(O)C(C)O5)c4c(O)c3C(=O)c12)C(=O)CO",
    "CC1=C2C(C(=O)C3(C)C(CC4OCC4(OC(C)=O)C3C(OC(=O)c3ccccc3)C2(O)CC1OC(=O)C(O)C(NC(=O)c1ccccc1)c1ccccc1)O)OC(C)=O",
    "CCC1(O)C(=O)OCc2c1cc1-c3nc4ccccc4cc3Cn1c2=O",
    "Nc1ncnc2c1ncn2C1OC(CO)C(O)C1O",
    "O=C(O)CCSSc1ccccn1",
    "C[N+](C)(C)CC(=O)[O-]",
    "[NH4+]",
    "[2H]C([2H])([2H])Cl",
    "FC(F)(F)c1ccc(Br)cc1I",
    "OCCOCCOCCOCCN",
    "C1CC2CCC1CC2",
    "CS(=O)(=O)c1ccc(cc1)P(=O)(O)O",
    "C#CCNC(=O)C1CCCN1",
    "c1ccc2[nH]ccc2c1",
    "[H]OC([H])([H])[H]",
    "C1CCC2(CC1)CCCC2",
];

/// Ring-bond oracle: a bond is in a ring iff its endpoints stay connected
/// after removing it.
pub fn ring_bonds_by_removal(mol: &MolGraph) -> Vec<usize> {
    let n = mol.atom_count();
    let mut ring = Vec::new();
    for removed in 0..mol.bonds().len() {
        let (start, goal) = mol.bonds()[removed].endpoints;
        let mut seen = vec![false; n];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(a) = stack.pop() {
            for (index, bond) in mol.bonds().iter().enumerate() {
                if index == removed {
                    continue;
                }
                let (x, y) = bond.endpoints;
                let next = if x == a {
                    y
                } else if y == a {
                    x
                } else {
                    continue;
                };
                if !seen[next] {
                    seen[next] = true;
                    stack.push(next);
                }
            }
        }
        if seen[goal] {
            ring.push(removed);
        }
    }
    ring
}

/// Full-table identity-scored global alignment, normalized by the longer
/// length.
pub fn alignment_oracle(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut table = vec![vec![0i64; b.len() + 1]; a.len() + 1];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let score = if a[i - 1] == b[j - 1] { 1 } else { 0 };
            table[i][j] = (table[i - 1][j - 1] + score)
                .max(table[i - 1][j])
                .max(table[i][j - 1]);
        }
    }
    table[a.len()][b.len()] as f64 / a.len().max(b.len()) as f64
}

/// Best identity score over every global alignment, by explicit
/// enumeration of all alignment paths.
pub fn alignment_enumeration(a: &[u8], b: &[u8]) -> usize {
    match (a.split_first(), b.split_first()) {
        (None, _) | (_, None) => 0,
        (Some((x, ra)), Some((y, rb))) => {
            let pair = usize::from(x == y) + alignment_enumeration(ra, rb);
            let gap_b = alignment_enumeration(ra, b);
            let gap_a = alignment_enumeration(a, rb);
            pair.max(gap_a).max(gap_b)
        }
    }
}

/// External conjugates: peptide, reported bioactivity, expected label.
pub const EXTERNAL_SET: [(&str, &str, u8); 21] = [
    ("YRSRKYSSWYVALKRLPET GGG", "IC50 = 12.5-25 μM", 0),
    ("YRSRKYSSWYVALKRLPET GGG", "IC50 = 25-50 μM", 0),
    ("RPPR", "IC50 = 0.26 μM", 1),
    ("YHWYGYTPERVI", "IC50 = 2.3 μM", 0),
    ("KGDEVD", "IC50 = 0.030 μM", 1),
    ("GSS", "IC50 = 121.1-174.1 μM", 0),
    ("RGDC", "IC50 = 41.4-87.1 μM", 0),
    ("FVDLKCIANCSIFGK", "IC50 = 0.22-0.88 μM", 1),
    ("CHVPGSYIC", "IC50 = 0.9 μM", 1),
    ("KPSSPPEEK", "IC50 = 0.23 μM", 1),
    ("GCTKSIPPICSPGAK", "In vivo study", 1),
    ("GCGGPLYKKIHKLLLESGG AGGAPLYKKIHKLLCES", "IC50 > 2 μM", 0),
    ("GCGGPLYKKIHKLLLESGG AGGAPLYKKIHKLLCES", "IC50 = 1.21 μM", 0),
    ("GCGGPLYKKIHKLLLESGG AGGAPLYKKIHKLLCES", "IC50 = 0.44 μM", 1),
    ("GGCGGAPLYKKIHKLLLES GGCGGAPLYKKIHKLLLES", "IC50 = 0.36 μM", 1),
    ("RGDFK", "In vivo study", 1),
    ("FFRFKFRFK", "IC50 = 14.22 μM", 0),
    ("FFRFKFRFK", "IC50 = 29.76 μM", 0),
    ("FFRFKFRFK", "IC50 = 24.23 μM", 0),
    ("FFRFKFRFK", "IC50 = 19.49 μM", 0),
    ("FFRFKFRFK", "IC50 = 21.91 μM", 0),
];

/// Raw rows for the external conjugates. Linker and payload structures are
/// stand-ins, one distinct linker per row.
pub fn external_rows() -> Vec<pdcnet::dataset::RawRow> {
    EXTERNAL_SET
        .iter()
        .enumerate()
        .map(|(i, (peptide, activity, _))| {
            let mut row = pdcnet::dataset::RawRow {
                id: format!("ext{}", i + 1),
                peptide_sequence: peptide.to_string(),
                linker_smiles: format!("N{}C(=O)O", "C".repeat(i + 1)),
                payload_smiles: MOLECULES[8].to_string(),
                status: "investigational".into(),
                ..Default::default()
            };
            if *activity == "In vivo study" {
                row.status = "In vivo study".into();
            } else {
                let value = activity
                    .trim_start_matches("IC50")
                    .trim_end_matches("μM")
                    .trim();
                row.assay = Some("IC50".into());
                row.activity_value = Some(value.into());
                row.activity_unit = Some("μM".into());
            }
            row
        })
        .collect()
}

const POOL: &[&str] = &["RGDC", "KGDEVD", "RPPR", "GSS", "CHVPGSYIC", "FFRFKFRFK", "YHWYGYTPERVI"];

/// Deterministic synthetic curated records with varied statuses and
/// activities.
pub fn synthetic_records(n: usize, seed: u64) -> Vec<pdcnet::dataset::PdcRecord> {
    use pdcnet::dataset::{ActivityMeasurement, Assay, DevelopmentStatus, PdcRecord, Unit};
    let mut rng = pdcnet::rng::prng(seed);
    (0..n)
        .map(|i| {
            let status = match pdcnet::rng::below(&mut rng, 20) {
                0 => DevelopmentStatus::Marketed,
                1 => DevelopmentStatus::ClinicalPhase2,
                2 => DevelopmentStatus::PreclinicalAnimal,
                _ => DevelopmentStatus::Investigational,
            };
            let measurements = if pdcnet::rng::below(&mut rng, 6) == 0 {
                Vec::new()
            } else {
                let exponent = pdcnet::rng::uniform(&mut rng, -3.0, 2.0);
                vec![ActivityMeasurement::new(Assay::IC50, 10f64.powf(exponent), Unit::MicroMolar).unwrap()]
            };
            let peptide = POOL[i % POOL.len()].parse().unwrap();
            let mut r = PdcRecord {
                id: format!("syn{i:04}"),
                peptide,
                linker_smiles: format!("N{}C(=O)O", "C".repeat(1 + i % 9)),
                payload_smiles: MOLECULES[(i / 9) % MOLECULES.len()].to_string(),
                measurements,
                status,
                label: None,
            };
            r.label = Some(pdcnet::dataset::assign_label(&r, 1.0));
            r
        })
        .collect()
}

/// Reference splitmix64 + xoshiro256++ and the documented shuffle.
pub struct ReferencePrng {
    s: [u64; 4],
}

impl ReferencePrng {
    pub fn new(seed: u64) -> Self {
        let mut x = seed;
        let mut next = || {
            x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
            let mut z = x;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
            z ^ (z >> 31)
        };
        ReferencePrng {
            s: [next(), next(), next(), next()],
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.s;
        let result = s[0].wrapping_add(s[3]).rotate_left(23).wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    pub fn shuffled(&mut self, n: usize) -> Vec<usize> {
        let mut v: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = ((self.next_u64() as u128 * (i as u128 + 1)) >> 64) as usize;
            v.swap(i, j);
        }
        v
    }
}

pub fn random_tensor(shape: &[usize], rng: &mut pdcnet::rng::Prng) -> pdcnet::ndmath::Tensor {
    let n = shape.iter().product();
    let data = (0..n).map(|_| pdcnet::rng::uniform(rng, -1.0, 1.0)).collect();
    pdcnet::ndmath::Tensor::new(shape.to_vec(), data).unwrap()
}

/// `n` records whose label is a function of the payload fingerprint alone:
/// 1 iff the payload's ECFP4 has more set bits than the pool median.
/// Measurements agree with the labels under the default threshold.
pub fn payload_fixture(n: usize) -> Vec<pdcnet::dataset::PdcRecord> {
    use pdcnet::dataset::{ActivityMeasurement, Assay, DevelopmentStatus, PdcRecord, Unit};
    let pool = &MOLECULES[2..12];
    let counts: Vec<usize> = pool
        .iter()
        .map(|s| pdcnet::chem::smiles_ecfp4(s).unwrap().count_ones())
        .collect();
    let mut sorted = counts.clone();
    sorted.sort_unstable();
    let median = sorted[sorted.len() / 2];
    (0..n)
        .map(|i| {
            let p = i % pool.len();
            let label = u8::from(counts[p] >= median);
            let value = if label == 1 { 0.1 } else { 10.0 };
            PdcRecord {
                id: format!("fx{i:03}"),
                peptide: POOL[(i * 3) % POOL.len()].parse().unwrap(),
                linker_smiles: format!("N{}C(=O)O", "C".repeat(1 + i % 5)),
                payload_smiles: pool[p].to_string(),
                measurements: vec![ActivityMeasurement::new(Assay::IC50, value, Unit::MicroMolar).unwrap()],
                status: DevelopmentStatus::Investigational,
                label: Some(label),
            }
        })
        .collect()
}

/// Direct evaluation of the count formulas with zero denominators mapped
/// to 0.
pub fn count_oracle(tp: u64, fp: u64, tn: u64, fn_: u64) -> [f64; 8] {
    let (tp, fp, tn, fn_) = (tp as f64, fp as f64, tn as f64, fn_ as f64);
    let div = |a: f64, b: f64| if b == 0.0 { 0.0 } else { a / b };
    let se = div(tp, tp + fn_);
    let sp = div(tn, tn + fp);
    [
        div(tp + tn, tp + tn + fp + fn_),
        div(2.0 * tp, 2.0 * tp + fn_ + fp),
        se,
        sp,
        div(
            tp * tn - fn_ * fp,
            ((tp + fn_) * (tp + fp) * (tn + fn_) * (tn + fp)).sqrt(),
        ),
        (se + sp) / 2.0,
        div(tp, tp + fp),
        div(tn, tn + fn_),
    ]
}

pub fn pair_counting_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let mut total = 0.0;
    let mut pairs = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        for (j, &sj) in scores.iter().enumerate() {
            if labels[i] == 1 && labels[j] == 0 {
                pairs += 1.0;
                total += if si > sj {
                    1.0
                } else if si == sj {
                    0.5
                } else {
                    0.0
                };
            }
        }
    }
    total / pairs
}

/// Average precision as the mean, over positives, of the precision among
/// all items scoring at least that positive's score.
pub fn average_precision(scores: &[f64], labels: &[u8]) -> f64 {
    let pos: Vec<usize> = (0..scores.len()).filter(|&i| labels[i] == 1).collect();
    let sum: f64 = pos
        .iter()
        .map(|&i| {
            let above: Vec<usize> = (0..scores.len()).filter(|&j| scores[j] >= scores[i]).collect();
            let hits = above.iter().filter(|&&j| labels[j] == 1).count();
            hits as f64 / above.len() as f64
        })
        .sum();
    sum / pos.len() as f64
}

pub fn random_scored_set(seed: u64) -> (Vec<f64>, Vec<u8>) {
    let mut rng = pdcnet::rng::prng(seed);
    loop {
        let n = 2 + pdcnet::rng::below(&mut rng, 11);
        let scores: Vec<f64> = (0..n).map(|_| pdcnet::rng::below(&mut rng, 5) as f64 / 4.0).collect();
        let labels: Vec<u8> = (0..n).map(|_| pdcnet::rng::below(&mut rng, 2) as u8).collect();
        if labels.contains(&0) && labels.contains(&1) {
            return (scores, labels);
        }
    }
}

/// Sum of `h ⊙ r` for a fixed random `r`, so every output entry matters.
pub fn weighted_sum(
    tape: &mut pdcnet::ndmath::Tape<'_>,
    h: pdcnet::ndmath::Var,
    seed: u64,
) -> Result<pdcnet::ndmath::Var, pdcnet::ndmath::NdError> {
    let shape = tape.value(h).shape().to_vec();
    let r = tape.constant(random_tensor(&shape, &mut pdcnet::rng::prng(seed)));
    let p = tape.mul(h, r)?;
    Ok(tape.sum(p))
}

