//! Peptide encodings: the 65-dimensional per-residue feature rows, amino-acid
//! composition, and normalized global-alignment similarity.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Width of one residue feature row: one-hot, BLOSUM62 row, sinusoidal
/// position and Z-scales.
pub const RESIDUE_FEATURES: usize = 65;
pub const POSITIONAL_DIM: usize = 20;
const ONE_HOT: std::ops::Range<usize> = 0..20;
const BLOSUM_BLOCK: std::ops::Range<usize> = 20..40;
const POSITION_BLOCK: std::ops::Range<usize> = 40..60;
const ZSCALE_BLOCK: std::ops::Range<usize> = 60..65;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PeptideError {
    #[error("empty peptide sequence")]
    Empty,
    #[error("non-standard residue {residue:?} at position {position}")]
    NonStandardResidue { residue: char, position: usize },
    #[error("positional encoding width must be even, got {0}")]
    OddDimension(usize),
}

/// One of the 20 standard amino acids, in the fixed feature alphabet order
/// `ACDEFGHIKLMNPQRSTVWY`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AminoAcid(u8);

impl AminoAcid {
    pub const ALPHABET: &'static [u8; 20] = b"ACDEFGHIKLMNPQRSTVWY";

    pub fn from_code(code: char) -> Option<Self> {
        let byte = u8::try_from(code).ok()?;
        Self::ALPHABET
            .iter()
            .position(|&c| c == byte)
            .map(|i| AminoAcid(i as u8))
    }

    /// Position in the feature alphabet.
    pub fn index(self) -> usize {
        usize::from(self.0)
    }

    pub fn code(self) -> char {
        char::from(Self::ALPHABET[self.index()])
    }

    pub fn all() -> impl Iterator<Item = AminoAcid> {
        (0..20u8).map(AminoAcid)
    }

    /// BLOSUM62 scores against the 20 residues in alphabet order.
    pub fn blosum62_row(self) -> [f64; 20] {
        let mut row = [0.0; 20];
        for other in AminoAcid::all() {
            row[other.index()] = f64::from(blosum62(self, other));
        }
        row
    }

    pub fn zscales(self) -> [f64; 5] {
        ZSCALES[self.index()]
    }
}

impl fmt::Display for AminoAcid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

/// A non-empty sequence of standard residues.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PeptideSequence(Vec<AminoAcid>);

impl PeptideSequence {
    pub fn new(residues: Vec<AminoAcid>) -> Result<Self, PeptideError> {
        if residues.is_empty() {
            return Err(PeptideError::Empty);
        }
        Ok(PeptideSequence(residues))
    }

    pub fn residues(&self) -> &[AminoAcid] {
        &self.0
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.0.len()
    }
}

impl FromStr for PeptideSequence {
    type Err = PeptideError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let residues = s
            .chars()
            .enumerate()
            .map(|(position, residue)| {
                AminoAcid::from_code(residue)
                    .ok_or(PeptideError::NonStandardResidue { residue, position })
            })
            .collect::<Result<Vec<_>, _>>()?;
        PeptideSequence::new(residues)
    }
}

impl fmt::Display for PeptideSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.0 {
            write!(f, "{r}")?;
        }
        Ok(())
    }
}

impl Serialize for PeptideSequence {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PeptideSequence {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// `T x 65` residue feature matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PeptideMatrix {
    rows: usize,
    data: Vec<f64>,
}

impl PeptideMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        RESIDUE_FEATURES
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * RESIDUE_FEATURES..(t + 1) * RESIDUE_FEATURES]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Column means over all rows.
    pub fn mean_row(&self) -> Vec<f64> {
        let mut mean = vec![0.0; RESIDUE_FEATURES];
        for t in 0..self.rows {
            for (m, v) in mean.iter_mut().zip(self.row(t)) {
                *m += v;
            }
        }
        let n = self.rows as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        mean
    }
}

/// Transformer-style sinusoidal encoding: entry `2i` is
/// `sin(pos / 10000^(2i/d))`, entry `2i+1` the matching cosine.
pub fn positional_encoding(pos: usize, d: usize) -> Result<Vec<f64>, PeptideError> {
    if d % 2 != 0 {
        return Err(PeptideError::OddDimension(d));
    }
    let mut out = Vec::with_capacity(d);
    for i in 0..d / 2 {
        let angle = pos as f64 / 10000f64.powf((2 * i) as f64 / d as f64);
        out.push(angle.sin());
        out.push(angle.cos());
    }
    Ok(out)
}

/// Builds the per-residue feature matrix; row `t` is
/// `one_hot ++ blosum62_row ++ positional(t) ++ zscales`.
pub fn encode_residues(seq: &PeptideSequence) -> PeptideMatrix {
    let rows = seq.len();
    let mut data = vec![0.0; rows * RESIDUE_FEATURES];
    for (t, residue) in seq.residues().iter().enumerate() {
        let row = &mut data[t * RESIDUE_FEATURES..(t + 1) * RESIDUE_FEATURES];
        row[ONE_HOT][residue.index()] = 1.0;
        row[BLOSUM_BLOCK].copy_from_slice(&residue.blosum62_row());
        let position = positional_encoding(t, POSITIONAL_DIM).expect("even width");
        row[POSITION_BLOCK].copy_from_slice(&position);
        row[ZSCALE_BLOCK].copy_from_slice(&residue.zscales());
    }
    PeptideMatrix { rows, data }
}

/// Amino-acid composition over the feature alphabet; entries sum to 1.
pub fn aac_features(seq: &PeptideSequence) -> [f64; 20] {
    let mut counts = [0.0; 20];
    for r in seq.residues() {
        counts[r.index()] += 1.0;
    }
    let n = seq.len() as f64;
    counts.iter_mut().for_each(|c| *c /= n);
    counts
}

/// Global alignment score with identity scoring (match 1, mismatch 0, gap 0).
/// Two-row Needleman-Wunsch.
pub fn global_alignment_score(a: &PeptideSequence, b: &PeptideSequence) -> usize {
    let (a, b) = (a.residues(), b.residues());
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for &x in a {
        for (j, &y) in b.iter().enumerate() {
            let diagonal = prev[j] + usize::from(x == y);
            cur[j + 1] = diagonal.max(prev[j + 1]).max(cur[j]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Alignment score normalized by the longer sequence length, in `[0, 1]`.
pub fn peptide_similarity(a: &PeptideSequence, b: &PeptideSequence) -> f64 {
    global_alignment_score(a, b) as f64 / a.len().max(b.len()) as f64
}

/// BLOSUM62 substitution score.
pub fn blosum62(a: AminoAcid, b: AminoAcid) -> i8 {
    BLOSUM62_NCBI[NCBI_POSITION[a.index()]][NCBI_POSITION[b.index()]]
}

// BLOSUM62 as distributed by NCBI (Henikoff & Henikoff 1992), rows and
// columns in NCBI order ARNDCQEGHILKMFPSTWYV. Table version 1.
const BLOSUM62_NCBI: [[i8; 20]; 20] = [
    [4, -1, -2, -2, 0, -1, -1, 0, -2, -1, -1, -1, -1, -2, -1, 1, 0, -3, -2, 0],
    [-1, 5, 0, -2, -3, 1, 0, -2, 0, -3, -2, 2, -1, -3, -2, -1, -1, -3, -2, -3],
    [-2, 0, 6, 1, -3, 0, 0, 0, 1, -3, -3, 0, -2, -3, -2, 1, 0, -4, -2, -3],
    [-2, -2, 1, 6, -3, 0, 2, -1, -1, -3, -4, -1, -3, -3, -1, 0, -1, -4, -3, -3],
    [0, -3, -3, -3, 9, -3, -4, -3, -3, -1, -1, -3, -1, -2, -3, -1, -1, -2, -2, -1],
    [-1, 1, 0, 0, -3, 5, 2, -2, 0, -3, -2, 1, 0, -3, -1, 0, -1, -2, -1, -2],
    [-1, 0, 0, 2, -4, 2, 5, -2, 0, -3, -3, 1, -2, -3, -1, 0, -1, -3, -2, -2],
    [0, -2, 0, -1, -3, -2, -2, 6, -2, -4, -4, -2, -3, -3, -2, 0, -2, -2, -3, -3],
    [-2, 0, 1, -1, -3, 0, 0, -2, 8, -3, -3, -1, -2, -1, -2, -1, -2, -2, 2, -3],
    [-1, -3, -3, -3, -1, -3, -3, -4, -3, 4, 2, -3, 1, 0, -3, -2, -1, -3, -1, 3],
    [-1, -2, -3, -4, -1, -2, -3, -4, -3, 2, 4, -2, 2, 0, -3, -2, -1, -2, -1, 1],
    [-1, 2, 0, -1, -3, 1, 1, -2, -1, -3, -2, 5, -1, -3, -1, 0, -1, -3, -2, -2],
    [-1, -1, -2, -3, -1, 0, -2, -3, -2, 1, 2, -1, 5, 0, -2, -1, -1, -1, -1, 1],
    [-2, -3, -3, -3, -2, -3, -3, -3, -1, 0, 0, -3, 0, 6, -4, -2, -2, 1, 3, -1],
    [-1, -2, -2, -1, -3, -1, -1, -2, -2, -3, -3, -1, -2, -4, 7, -1, -1, -4, -3, -2],
    [1, -1, 1, 0, -1, 0, 0, 0, -1, -2, -2, 0, -1, -2, -1, 4, 1, -3, -2, -2],
    [0, -1, 0, -1, -1, -1, -1, -2, -2, -1, -1, -1, -1, -2, -1, 1, 5, -2, -2, 0],
    [-3, -3, -4, -4, -2, -2, -3, -2, -2, -3, -2, -3, -1, 1, -4, -3, -2, 11, 2, -3],
    [-2, -2, -2, -3, -2, -1, -2, -3, 2, -1, -1, -2, -1, 3, -3, -2, -2, 2, 7, -1],
    [0, -3, -3, -3, -1, -2, -2, -3, -3, 3, 1, -2, 1, -1, -2, -2, 0, -3, -1, 4],
];

// feature-alphabet index -> NCBI index
const NCBI_POSITION: [usize; 20] = [
    0,  // A
    4,  // C
    3,  // D
    6,  // E
    13, // F
    7,  // G
    8,  // H
    9,  // I
    11, // K
    10, // L
    12, // M
    2,  // N
    14, // P
    5,  // Q
    1,  // R
    15, // S
    16, // T
    19, // V
    17, // W
    18, // Y
];

// Z-scales z1..z5 (Sandberg et al. 1998), feature-alphabet order. Table
// version 1.
const ZSCALES: [[f64; 5]; 20] = [
    [0.24, -2.32, 0.60, -0.14, 1.30],   // A
    [0.84, -1.67, 3.71, 0.18, -2.65],   // C
    [3.98, 0.93, 1.93, -2.46, 0.75],    // D
    [3.11, 0.26, -0.11, -3.04, -0.25],  // E
    [-4.22, 1.94, 1.06, 0.54, -0.62],   // F
    [2.05, -4.06, 0.36, -0.82, -0.38],  // G
    [2.47, 1.95, 0.26, 3.90, 0.09],     // H
    [-3.89, -1.73, -1.71, -0.84, 0.26], // I
    [2.29, 0.89, -2.49, 1.49, 0.31],    // K
    [-4.28, -1.30, -1.49, -0.72, 0.84], // L
    [-2.85, -0.22, 0.47, 1.94, -0.98],  // M
    [3.05, 1.62, 1.04, -1.15, 1.61],    // N
    [-1.66, 0.27, 1.84, 0.70, 2.00],    // P
    [1.75, 0.50, -1.44, -1.34, 0.66],   // Q
    [3.52, 2.50, -3.50, 1.99, -0.17],   // R
    [2.39, -1.07, 1.15, -1.39, 0.67],   // S
    [0.75, -2.18, -1.12, -1.46, -0.40], // T
    [-2.59, -2.64, -1.54, -0.85, -0.02], // V
    [-4.36, 3.94, 0.59, 3.44, -1.59],   // W
    [-2.54, 2.44, 0.43, 0.04, -1.47],   // Y
];

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(s: &str) -> PeptideSequence {
        s.parse().unwrap()
    }

    fn aa(c: char) -> AminoAcid {
        AminoAcid::from_code(c).unwrap()
    }

    #[test]
    fn parse_rejects_nonstandard() {
        assert_eq!(
            "ACXD".parse::<PeptideSequence>(),
            Err(PeptideError::NonStandardResidue {
                residue: 'X',
                position: 2
            })
        );
        assert_eq!("".parse::<PeptideSequence>(), Err(PeptideError::Empty));
        assert!("acd".parse::<PeptideSequence>().is_err());
        assert_eq!(seq("RGDC").to_string(), "RGDC");
    }

    #[test]
    fn single_alanine_row() {
        let m = encode_residues(&seq("A"));
        assert_eq!((m.rows(), m.cols()), (1, 65));
        let row = m.row(0);
        assert_eq!(row[0], 1.0);
        assert!(row[1..20].iter().all(|&v| v == 0.0));
        assert_eq!(row[20], 4.0);
        assert_eq!(&row[60..65], &[0.24, -2.32, 0.60, -0.14, 1.30]);
        // position 0: sin 0, cos 0 alternating
        for i in 0..10 {
            assert_eq!(row[40 + 2 * i], 0.0);
            assert_eq!(row[41 + 2 * i], 1.0);
        }
    }

    #[test]
    fn blosum_reference_entries() {
        // spot checks against the NCBI table
        assert_eq!(blosum62(aa('A'), aa('A')), 4);
        assert_eq!(blosum62(aa('W'), aa('W')), 11);
        assert_eq!(blosum62(aa('C'), aa('C')), 9);
        assert_eq!(blosum62(aa('I'), aa('V')), 3);
        assert_eq!(blosum62(aa('W'), aa('C')), -2);
        assert_eq!(blosum62(aa('E'), aa('Q')), 2);
        assert_eq!(blosum62(aa('P'), aa('F')), -4);
        assert_eq!(blosum62(aa('H'), aa('Y')), 2);
        let diag: Vec<i8> = AminoAcid::all().map(|a| blosum62(a, a)).collect();
        // ACDEFGHIKLMNPQRSTVWY
        assert_eq!(diag, vec![4, 9, 6, 5, 6, 6, 8, 4, 5, 4, 5, 6, 7, 5, 5, 4, 5, 4, 11, 7]);
    }

    #[test]
    fn blosum_symmetric() {
        for a in AminoAcid::all() {
            for b in AminoAcid::all() {
                assert_eq!(a.blosum62_row()[b.index()], b.blosum62_row()[a.index()]);
            }
        }
    }

    #[test]
    fn zscale_reference_entries() {
        assert_eq!(aa('R').zscales(), [3.52, 2.50, -3.50, 1.99, -0.17]);
        assert_eq!(aa('W').zscales(), [-4.36, 3.94, 0.59, 3.44, -1.59]);
        assert_eq!(aa('G').zscales(), [2.05, -4.06, 0.36, -0.82, -0.38]);
    }

    #[test]
    fn positional_values() {
        let p1 = positional_encoding(1, 20).unwrap();
        assert!((p1[0] - 0.841_470_984_807_896_5).abs() < 1e-15);
        assert!((p1[1] - 0.540_302_305_868_139_8).abs() < 1e-15);
        // i = 1: 1 / 10000^(2/20)
        let angle = 1.0 / 10000f64.powf(0.1);
        assert!((p1[2] - angle.sin()).abs() < 1e-15);
        assert_eq!(positional_encoding(3, 7), Err(PeptideError::OddDimension(7)));
        for pos in [0, 1, 17, 1000, 123_456] {
            assert!(positional_encoding(pos, 20)
                .unwrap()
                .iter()
                .all(|v| (-1.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn similarity_examples() {
        assert_eq!(peptide_similarity(&seq("RGDC"), &seq("RGDC")), 1.0);
        assert_eq!(peptide_similarity(&seq("AAAA"), &seq("GGGG")), 0.0);
        assert_eq!(peptide_similarity(&seq("AAAA"), &seq("AAAG")), 0.75);
        assert_eq!(peptide_similarity(&seq("AC"), &seq("ACDE")), 0.5);
    }

    #[test]
    fn composition() {
        let a = aac_features(&seq("AA"));
        assert_eq!(a[0], 1.0);
        assert_eq!(a.iter().sum::<f64>(), 1.0);
        let ag = aac_features(&seq("AG"));
        assert_eq!(ag[aa('A').index()], 0.5);
        assert_eq!(ag[aa('G').index()], 0.5);
    }

    #[test]
    fn mean_row_of_identical_rows() {
        let m = encode_residues(&seq("K"));
        assert_eq!(m.mean_row(), m.row(0));
    }
}
