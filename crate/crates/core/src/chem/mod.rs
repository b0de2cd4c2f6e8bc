//! Molecular graphs for linkers and payloads: SMILES parsing, ring
//! perception by bridge detection, circular fingerprints and Tanimoto
//! similarity.

mod fingerprint;
mod graph;
mod smiles;

pub use fingerprint::{
    ecfp4, morgan_fingerprint, stable_hash, tanimoto, Fingerprint, DEFAULT_NBITS,
    DEFAULT_RADIUS, FINGERPRINT_HASH_VERSION,
};
pub use graph::{default_valence, Atom, Bond, BondOrder, MolGraph};
pub use smiles::{atomic_number, element_symbol, parse_smiles};

use std::collections::BTreeSet;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmilesErrorKind {
    #[error("empty SMILES string")]
    Empty,
    #[error("unknown atom symbol {0:?}")]
    UnknownAtom(String),
    #[error("unclosed bracket atom")]
    UnclosedBracket,
    #[error("malformed bracket atom")]
    BadBracketAtom,
    #[error("unbalanced parentheses")]
    UnbalancedParenthesis,
    #[error("branch opened without a preceding atom")]
    BranchWithoutAtom,
    #[error("bond symbol without a preceding atom")]
    BondWithoutAtom,
    #[error("bond symbol not followed by an atom")]
    DanglingBond,
    #[error("two consecutive bond symbols")]
    ConsecutiveBonds,
    #[error("malformed ring-closure label")]
    BadRingLabel,
    #[error("ring closure without a preceding atom")]
    RingClosureWithoutAtom,
    #[error("unmatched ring closure at label {0}")]
    UnmatchedRingClosure(u32),
    #[error("conflicting bond orders at ring closure {0}")]
    RingBondMismatch(u32),
    #[error("atom bonded to itself")]
    SelfBond,
    #[error("duplicate bond between the same atoms")]
    DuplicateBond,
    #[error("impossible valence {valence} for bracket atom {element}")]
    ImpossibleValence { element: String, valence: u32 },
    #[error("{0}")]
    Graph(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("SMILES error at byte offset {offset}: {kind}")]
pub struct SmilesError {
    pub offset: usize,
    pub kind: SmilesErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChemError {
    #[error(transparent)]
    Smiles(#[from] SmilesError),
    #[error("invalid molecular graph: {0}")]
    InvalidGraph(String),
    #[error("fingerprint: {0}")]
    Fingerprint(String),
}

/// Free-function form of [`MolGraph::ring_bonds`].
pub fn ring_bonds(mol: &MolGraph) -> BTreeSet<usize> {
    mol.ring_bonds()
}

/// Parses and fingerprints a SMILES string with ECFP4 settings.
pub fn smiles_ecfp4(smiles: &str) -> Result<Fingerprint, ChemError> {
    ecfp4(&parse_smiles(smiles)?)
}
