//! Circular (Morgan/ECFP-style) fingerprints.
//!
//! Atom invariants, neighborhood updates and bit folding all go through
//! [`stable_hash`], a fixed 64-bit mixer, so bit positions are identical on
//! every platform. Bit positions are not those of any other toolkit; only the
//! invariance properties are relied upon.

use serde::{Deserialize, Serialize};

use super::graph::{MolGraph, HYDROGEN};
use super::ChemError;

/// Version tag of the hashing scheme. Bump when [`stable_hash`] or the
/// invariant recipe changes.
pub const FINGERPRINT_HASH_VERSION: u32 = 1;
const HASH_SEED: u64 = 0x5044_434e_4650_0001;

pub const DEFAULT_RADIUS: u32 = 2;
pub const DEFAULT_NBITS: usize = 1024;

fn fmix64(mut h: u64) -> u64 {
    h ^= h >> 33;
    h = h.wrapping_mul(0xff51_afd7_ed55_8ccd);
    h ^= h >> 33;
    h = h.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    h ^ (h >> 33)
}

/// Order-sensitive hash of a word sequence.
pub fn stable_hash(words: &[u64]) -> u64 {
    let mut h = HASH_SEED;
    for &w in words {
        h = fmix64(h ^ w.wrapping_mul(0x9e37_79b9_7f4a_7c15)).rotate_left(27);
    }
    fmix64(h ^ words.len() as u64)
}

/// Fixed-length bit vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fingerprint {
    words: Vec<u64>,
    nbits: usize,
    radius: u32,
}

impl Fingerprint {
    pub fn zeros(nbits: usize, radius: u32) -> Self {
        Fingerprint {
            words: vec![0; nbits.div_ceil(64)],
            nbits,
            radius,
        }
    }

    pub fn from_bits(nbits: usize, bits: impl IntoIterator<Item = usize>) -> Self {
        let mut fp = Fingerprint::zeros(nbits, 0);
        for bit in bits {
            fp.set(bit);
        }
        fp
    }

    pub fn len(&self) -> usize {
        self.nbits
    }

    pub fn is_empty(&self) -> bool {
        self.nbits == 0
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    /// # Panics
    /// If `bit >= len()`.
    pub fn set(&mut self, bit: usize) {
        assert!(bit < self.nbits, "bit {bit} out of range {}", self.nbits);
        self.words[bit / 64] |= 1 << (bit % 64);
    }

    pub fn get(&self, bit: usize) -> bool {
        bit < self.nbits && self.words[bit / 64] & (1 << (bit % 64)) != 0
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nbits).filter(|&b| self.get(b))
    }

    /// Dense 0/1 vector.
    pub fn to_f64(&self) -> Vec<f64> {
        (0..self.nbits)
            .map(|b| if self.get(b) { 1.0 } else { 0.0 })
            .collect()
    }

    /// Lowercase hex, most significant bit first. The length is padded up to
    /// a multiple of 4 bits with leading zeros.
    pub fn to_hex(&self) -> String {
        let nibbles = self.nbits.div_ceil(4);
        (0..nibbles)
            .rev()
            .map(|n| {
                let v = (0..4).fold(0u32, |acc, k| acc | (u32::from(self.get(n * 4 + k)) << k));
                char::from_digit(v, 16).expect("nibble")
            })
            .collect()
    }

    pub fn from_hex(hex: &str, nbits: usize) -> Result<Self, ChemError> {
        if hex.len() != nbits.div_ceil(4) {
            return Err(ChemError::Fingerprint(format!(
                "hex length {} does not match {nbits} bits",
                hex.len()
            )));
        }
        let mut fp = Fingerprint::zeros(nbits, 0);
        for (i, c) in hex.chars().rev().enumerate() {
            let v = c
                .to_digit(16)
                .filter(|_| !c.is_ascii_uppercase())
                .ok_or_else(|| ChemError::Fingerprint(format!("bad hex digit {c:?}")))?;
            for k in 0..4 {
                if v & (1 << k) != 0 {
                    let bit = i * 4 + k;
                    if bit >= nbits {
                        return Err(ChemError::Fingerprint("padding bits set".into()));
                    }
                    fp.set(bit);
                }
            }
        }
        Ok(fp)
    }

    fn and_or_counts(&self, other: &Fingerprint) -> (usize, usize) {
        self.words
            .iter()
            .zip(&other.words)
            .fold((0, 0), |(and, or), (a, b)| {
                (
                    and + (a & b).count_ones() as usize,
                    or + (a | b).count_ones() as usize,
                )
            })
    }
}

/// Tanimoto similarity `|a & b| / |a | b|`. Two empty bit sets have
/// similarity 1.
pub fn tanimoto(a: &Fingerprint, b: &Fingerprint) -> Result<f64, ChemError> {
    if a.nbits != b.nbits {
        return Err(ChemError::Fingerprint(format!(
            "length mismatch: {} vs {}",
            a.nbits, b.nbits
        )));
    }
    let (and, or) = a.and_or_counts(b);
    Ok(if or == 0 { 1.0 } else { and as f64 / or as f64 })
}

/// Computes a circular fingerprint.
///
/// Hydrogen atoms bonded to exactly one heavy atom are folded into that
/// atom's hydrogen count and do not act as centers. The initial identifier of
/// a center hashes (atomic number, heavy degree, total H, formal charge,
/// aromatic, in ring). Iteration `r` hashes `(r, previous id, sorted (bond
/// code, neighbor id) pairs)`. Identifiers from iterations `0..=radius` are
/// folded modulo `nbits`.
pub fn morgan_fingerprint(
    mol: &MolGraph,
    radius: u32,
    nbits: usize,
) -> Result<Fingerprint, ChemError> {
    if nbits == 0 {
        return Err(ChemError::Fingerprint("nbits must be positive".into()));
    }
    if mol.is_empty() {
        return Err(ChemError::Fingerprint("empty molecule".into()));
    }
    let n = mol.atom_count();
    let atoms = mol.atoms();
    let heavy_neighbors = |i: usize| {
        mol.neighbors(i)
            .iter()
            .filter(|&&(j, _)| atoms[j].element != HYDROGEN)
            .count()
    };
    let folded: Vec<bool> = (0..n)
        .map(|i| atoms[i].element == HYDROGEN && mol.degree(i) == 1 && heavy_neighbors(i) == 1)
        .collect();
    let centers: Vec<usize> = (0..n).filter(|&i| !folded[i]).collect();

    let mut ids = vec![0u64; n];
    for &i in &centers {
        let atom = &atoms[i];
        let mut heavy_degree = 0u64;
        let mut hydrogens = u64::from(atom.implicit_h) + u64::from(atom.explicit_h);
        let mut in_ring = false;
        for &(j, bond) in mol.neighbors(i) {
            in_ring |= mol.bonds()[bond].in_ring;
            if folded[j] {
                hydrogens += 1;
            } else {
                heavy_degree += 1;
            }
        }
        ids[i] = stable_hash(&[
            u64::from(atom.element),
            heavy_degree,
            hydrogens,
            i64::from(atom.formal_charge) as u64,
            u64::from(atom.aromatic),
            u64::from(in_ring),
        ]);
    }

    let mut fp = Fingerprint::zeros(nbits, radius);
    let fold = |fp: &mut Fingerprint, id: u64| fp.set((id % nbits as u64) as usize);
    for &i in &centers {
        fold(&mut fp, ids[i]);
    }

    let mut env: Vec<(u64, u64)> = Vec::new();
    let mut words: Vec<u64> = Vec::new();
    for iteration in 1..=radius {
        let mut next = ids.clone();
        for &i in &centers {
            env.clear();
            env.extend(
                mol.neighbors(i)
                    .iter()
                    .filter(|&&(j, _)| !folded[j])
                    .map(|&(j, bond)| (mol.bonds()[bond].order.code(), ids[j])),
            );
            env.sort_unstable();
            words.clear();
            words.push(u64::from(iteration));
            words.push(ids[i]);
            for &(code, id) in &env {
                words.push(code);
                words.push(id);
            }
            next[i] = stable_hash(&words);
            fold(&mut fp, next[i]);
        }
        ids = next;
    }
    Ok(fp)
}

/// ECFP4-style fingerprint: radius 2, 1024 bits.
pub fn ecfp4(mol: &MolGraph) -> Result<Fingerprint, ChemError> {
    morgan_fingerprint(mol, DEFAULT_RADIUS, DEFAULT_NBITS)
}
