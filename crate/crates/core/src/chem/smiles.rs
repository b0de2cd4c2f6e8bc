//! SMILES reader for the subset used by linker and payload structures.
//!
//! Supported: organic-subset atoms (`B C N O P S F Cl Br I` and aromatic
//! `b c n o p s`), bracket atoms with isotope, chirality, hydrogen count,
//! charge and atom class, the bonds `- = # :` (plus `/` and `\`, read as
//! single bonds), branches, ring closures `0-9` and `%nn`, and `.` component
//! separators. Stereo marks are accepted and discarded.

use std::collections::BTreeMap;

use super::graph::{max_valence, Atom, Bond, BondOrder, MolGraph, HYDROGEN};
use super::{ChemError, SmilesError, SmilesErrorKind};

const ELEMENTS: [&str; 118] = [
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al", "Si", "P", "S", "Cl",
    "Ar", "K", "Ca", "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As",
    "Se", "Br", "Kr", "Rb", "Sr", "Y", "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In",
    "Sn", "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd", "Pm", "Sm", "Eu", "Gd", "Tb",
    "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W", "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl",
    "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U", "Np", "Pu", "Am", "Cm", "Bk",
    "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn", "Nh",
    "Fl", "Mc", "Lv", "Ts", "Og",
];

/// Atomic number for an element symbol with standard capitalization.
pub fn atomic_number(symbol: &str) -> Option<u8> {
    ELEMENTS
        .iter()
        .position(|&s| s == symbol)
        .map(|p| (p + 1) as u8)
}

pub fn element_symbol(element: u8) -> Option<&'static str> {
    ELEMENTS.get(usize::from(element).checked_sub(1)?).copied()
}

/// Parses a SMILES string into a [`MolGraph`] with implicit hydrogens
/// assigned.
pub fn parse_smiles(text: &str) -> Result<MolGraph, ChemError> {
    Parser::new(text).parse().map_err(ChemError::from)
}

#[derive(Debug, Clone, Copy)]
struct PendingBond {
    order: BondOrder,
    offset: usize,
}

struct RingOpen {
    atom: usize,
    bond: Option<BondOrder>,
    offset: usize,
}

struct Parser<'a> {
    input: &'a [u8],
    pos: usize,
    atoms: Vec<Atom>,
    offsets: Vec<usize>,
    bonds: Vec<Bond>,
    explicit_aromatic_bond: Vec<bool>,
    prev: Option<usize>,
    pending: Option<PendingBond>,
    branches: Vec<(usize, usize)>,
    rings: BTreeMap<u32, RingOpen>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            input: text.as_bytes(),
            pos: 0,
            atoms: Vec::new(),
            offsets: Vec::new(),
            bonds: Vec::new(),
            explicit_aromatic_bond: Vec::new(),
            prev: None,
            pending: None,
            branches: Vec::new(),
            rings: BTreeMap::new(),
        }
    }

    fn err(&self, offset: usize, kind: SmilesErrorKind) -> SmilesError {
        SmilesError { offset, kind }
    }

    fn peek(&self) -> Option<u8> {
        self.input.get(self.pos).copied()
    }

    fn parse(mut self) -> Result<MolGraph, SmilesError> {
        if self.input.is_empty() {
            return Err(self.err(0, SmilesErrorKind::Empty));
        }
        while let Some(c) = self.peek() {
            let start = self.pos;
            match c {
                b'(' => {
                    let Some(prev) = self.prev else {
                        return Err(self.err(start, SmilesErrorKind::BranchWithoutAtom));
                    };
                    if let Some(p) = self.pending {
                        return Err(self.err(p.offset, SmilesErrorKind::DanglingBond));
                    }
                    self.branches.push((prev, start));
                    self.pos += 1;
                }
                b')' => {
                    if let Some(p) = self.pending {
                        return Err(self.err(p.offset, SmilesErrorKind::DanglingBond));
                    }
                    let Some((atom, _)) = self.branches.pop() else {
                        return Err(self.err(start, SmilesErrorKind::UnbalancedParenthesis));
                    };
                    self.prev = Some(atom);
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' | b'/' | b'\\' => {
                    if self.prev.is_none() {
                        return Err(self.err(start, SmilesErrorKind::BondWithoutAtom));
                    }
                    if self.pending.is_some() {
                        return Err(self.err(start, SmilesErrorKind::ConsecutiveBonds));
                    }
                    let order = match c {
                        b'=' => BondOrder::Double,
                        b'#' => BondOrder::Triple,
                        b':' => BondOrder::Aromatic,
                        _ => BondOrder::Single,
                    };
                    self.pending = Some(PendingBond {
                        order,
                        offset: start,
                    });
                    self.pos += 1;
                }
                b'.' => {
                    if let Some(p) = self.pending {
                        return Err(self.err(p.offset, SmilesErrorKind::DanglingBond));
                    }
                    self.prev = None;
                    self.pos += 1;
                }
                b'0'..=b'9' | b'%' => {
                    let label = self.ring_label()?;
                    self.ring_closure(label, start)?;
                }
                b'[' => {
                    let atom = self.bracket_atom()?;
                    self.add_atom(atom, start)?;
                }
                _ => {
                    let atom = self.organic_atom()?;
                    self.add_atom(atom, start)?;
                }
            }
        }
        if let Some(p) = self.pending {
            return Err(self.err(p.offset, SmilesErrorKind::DanglingBond));
        }
        if let Some(&(_, offset)) = self.branches.last() {
            return Err(self.err(offset, SmilesErrorKind::UnbalancedParenthesis));
        }
        if let Some((&label, open)) = self.rings.iter().next() {
            return Err(self.err(open.offset, SmilesErrorKind::UnmatchedRingClosure(label)));
        }
        self.finish()
    }

    fn ring_label(&mut self) -> Result<u32, SmilesError> {
        let start = self.pos;
        if self.input[self.pos] == b'%' {
            let digits = self.input.get(self.pos + 1..self.pos + 3);
            match digits {
                Some(d) if d.iter().all(u8::is_ascii_digit) => {
                    self.pos += 3;
                    Ok(u32::from(d[0] - b'0') * 10 + u32::from(d[1] - b'0'))
                }
                _ => Err(self.err(start, SmilesErrorKind::BadRingLabel)),
            }
        } else {
            self.pos += 1;
            Ok(u32::from(self.input[start] - b'0'))
        }
    }

    fn ring_closure(&mut self, label: u32, offset: usize) -> Result<(), SmilesError> {
        let Some(atom) = self.prev else {
            return Err(self.err(offset, SmilesErrorKind::RingClosureWithoutAtom));
        };
        let pending = self.pending.take();
        match self.rings.remove(&label) {
            None => {
                self.rings.insert(
                    label,
                    RingOpen {
                        atom,
                        bond: pending.map(|p| p.order),
                        offset,
                    },
                );
            }
            Some(open) => {
                let order = match (open.bond, pending.map(|p| p.order)) {
                    (Some(a), Some(b)) if a != b => {
                        return Err(self.err(offset, SmilesErrorKind::RingBondMismatch(label)))
                    }
                    (Some(a), _) => Some(a),
                    (None, b) => b,
                };
                self.connect(open.atom, atom, order, offset)?;
            }
        }
        Ok(())
    }

    fn add_atom(&mut self, atom: Atom, offset: usize) -> Result<(), SmilesError> {
        let index = self.atoms.len();
        self.atoms.push(atom);
        self.offsets.push(offset);
        if let Some(prev) = self.prev {
            let pending = self.pending.take();
            self.connect(prev, index, pending.map(|p| p.order), offset)?;
        }
        self.prev = Some(index);
        Ok(())
    }

    fn connect(
        &mut self,
        a: usize,
        b: usize,
        order: Option<BondOrder>,
        offset: usize,
    ) -> Result<(), SmilesError> {
        if a == b {
            return Err(self.err(offset, SmilesErrorKind::SelfBond));
        }
        let exists = self.bonds.iter().any(|bond| {
            let (x, y) = bond.endpoints;
            (x == a && y == b) || (x == b && y == a)
        });
        if exists {
            return Err(self.err(offset, SmilesErrorKind::DuplicateBond));
        }
        let explicit = order == Some(BondOrder::Aromatic);
        let order = order.unwrap_or(if self.atoms[a].aromatic && self.atoms[b].aromatic {
            BondOrder::Aromatic
        } else {
            BondOrder::Single
        });
        self.bonds.push(Bond {
            endpoints: (a, b),
            order,
            in_ring: false,
        });
        self.explicit_aromatic_bond.push(explicit);
        Ok(())
    }

    fn organic_atom(&mut self) -> Result<Atom, SmilesError> {
        let start = self.pos;
        let rest = &self.input[self.pos..];
        let (element, aromatic, len) = match rest {
            [b'C', b'l', ..] => (17, false, 2),
            [b'B', b'r', ..] => (35, false, 2),
            [b'B', ..] => (5, false, 1),
            [b'C', ..] => (6, false, 1),
            [b'N', ..] => (7, false, 1),
            [b'O', ..] => (8, false, 1),
            [b'P', ..] => (15, false, 1),
            [b'S', ..] => (16, false, 1),
            [b'F', ..] => (9, false, 1),
            [b'I', ..] => (53, false, 1),
            [b'b', ..] => (5, true, 1),
            [b'c', ..] => (6, true, 1),
            [b'n', ..] => (7, true, 1),
            [b'o', ..] => (8, true, 1),
            [b'p', ..] => (15, true, 1),
            [b's', ..] => (16, true, 1),
            _ => {
                return Err(self.err(start, SmilesErrorKind::UnknownAtom(self.symbol_at(start))));
            }
        };
        self.pos += len;
        Ok(Atom::organic(element, aromatic))
    }

    fn symbol_at(&self, offset: usize) -> String {
        let text = String::from_utf8_lossy(&self.input[offset..]);
        text.chars().next().map(String::from).unwrap_or_default()
    }

    fn bracket_atom(&mut self) -> Result<Atom, SmilesError> {
        let open = self.pos;
        let Some(close) = self.input[open..].iter().position(|&c| c == b']') else {
            return Err(self.err(open, SmilesErrorKind::UnclosedBracket));
        };
        let end = open + close;
        let body = &self.input[open + 1..end];
        let mut i = 0;

        let mut isotope = None;
        let digits = body.iter().take_while(|c| c.is_ascii_digit()).count();
        if digits > 0 {
            let value: u32 = std::str::from_utf8(&body[..digits])
                .ok()
                .and_then(|s| s.parse().ok())
                .filter(|&v| v <= u32::from(u16::MAX))
                .ok_or_else(|| self.err(open + 1, SmilesErrorKind::BadBracketAtom))?;
            isotope = Some(value as u16);
            i = digits;
        }

        let symbol_offset = open + 1 + i;
        let (element, aromatic, len) = bracket_symbol(&body[i..]).ok_or_else(|| {
            self.err(symbol_offset, SmilesErrorKind::UnknownAtom(self.symbol_at(symbol_offset)))
        })?;
        i += len;

        // chirality: @, @@, or @ followed by a class tag such as TH1 / OH12
        if body.get(i) == Some(&b'@') {
            i += 1;
            if body.get(i) == Some(&b'@') {
                i += 1;
            } else {
                let tag = body[i..]
                    .iter()
                    .take_while(|c| c.is_ascii_uppercase())
                    .count();
                if tag == 2 {
                    i += 2;
                    i += body[i..].iter().take_while(|c| c.is_ascii_digit()).count();
                }
            }
        }

        let mut explicit_h = 0u8;
        if body.get(i) == Some(&b'H') {
            i += 1;
            let n = body[i..].iter().take_while(|c| c.is_ascii_digit()).count();
            explicit_h = if n == 0 {
                1
            } else {
                std::str::from_utf8(&body[i..i + n])
                    .ok()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| self.err(open + 1 + i, SmilesErrorKind::BadBracketAtom))?
            };
            i += n;
        }

        let mut formal_charge = 0i32;
        if let Some(&sign @ (b'+' | b'-')) = body.get(i) {
            let unit = if sign == b'+' { 1 } else { -1 };
            i += 1;
            let n = body[i..].iter().take_while(|c| c.is_ascii_digit()).count();
            if n > 0 {
                let magnitude: i32 = std::str::from_utf8(&body[i..i + n])
                    .ok()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| self.err(open + 1 + i, SmilesErrorKind::BadBracketAtom))?;
                formal_charge = unit * magnitude;
                i += n;
            } else {
                formal_charge = unit;
                while body.get(i) == Some(&sign) {
                    formal_charge += unit;
                    i += 1;
                }
            }
        }
        if !(-15..=15).contains(&formal_charge) {
            return Err(self.err(open + 1, SmilesErrorKind::BadBracketAtom));
        }

        if body.get(i) == Some(&b':') {
            i += 1;
            let n = body[i..].iter().take_while(|c| c.is_ascii_digit()).count();
            if n == 0 {
                return Err(self.err(open + 1 + i, SmilesErrorKind::BadBracketAtom));
            }
            i += n;
        }
        if i != body.len() {
            return Err(self.err(open + 1 + i, SmilesErrorKind::BadBracketAtom));
        }
        self.pos = end + 1;
        Ok(Atom {
            element,
            aromatic,
            formal_charge: formal_charge as i8,
            isotope,
            explicit_h,
            implicit_h: 0,
            bracket: true,
        })
    }

    fn finish(self) -> Result<MolGraph, SmilesError> {
        let Parser {
            mut atoms,
            offsets,
            bonds,
            explicit_aromatic_bond,
            ..
        } = self;
        for (bond, explicit) in bonds.iter().zip(&explicit_aromatic_bond) {
            if *explicit {
                atoms[bond.endpoints.0].aromatic = true;
                atoms[bond.endpoints.1].aromatic = true;
            }
        }
        let mut mol = MolGraph::from_parts(atoms, bonds)
            .map_err(|e| SmilesError {
                offset: 0,
                kind: SmilesErrorKind::Graph(e.to_string()),
            })?;
        for (index, atom) in mol.atoms().iter().enumerate() {
            if !atom.bracket {
                continue;
            }
            let Some(limit) = max_valence(atom.element) else {
                continue;
            };
            let used = mol.bond_order_sum(index) + u32::from(atom.explicit_h);
            let allowed = limit + atom.formal_charge.unsigned_abs() as u32;
            if used > allowed || (atom.element == HYDROGEN && used > 1) {
                return Err(SmilesError {
                    offset: offsets[index],
                    kind: SmilesErrorKind::ImpossibleValence {
                        element: element_symbol(atom.element).unwrap_or("?").to_string(),
                        valence: used,
                    },
                });
            }
        }
        mol.assign_implicit_hydrogens();
        Ok(mol)
    }
}

/// Element symbol at the start of a bracket body: `(atomic number,
/// aromatic, byte length)`.
fn bracket_symbol(body: &[u8]) -> Option<(u8, bool, usize)> {
    // aromatic forms first: se, as, te are two-letter lowercase
    for (sym, z) in [("se", 34u8), ("as", 33), ("te", 52)] {
        if body.starts_with(sym.as_bytes()) {
            return Some((z, true, 2));
        }
    }
    match body.first()? {
        b'b' => return Some((5, true, 1)),
        b'c' => return Some((6, true, 1)),
        b'n' => return Some((7, true, 1)),
        b'o' => return Some((8, true, 1)),
        b'p' => return Some((15, true, 1)),
        b's' => return Some((16, true, 1)),
        c if c.is_ascii_uppercase() => {}
        _ => return None,
    }
    if let Some(second) = body.get(1).filter(|c| c.is_ascii_lowercase()) {
        let two = [body[0], *second];
        if let Some(z) = std::str::from_utf8(&two).ok().and_then(atomic_number) {
            return Some((z, false, 2));
        }
    }
    let one = [body[0]];
    std::str::from_utf8(&one)
        .ok()
        .and_then(atomic_number)
        .map(|z| (z, false, 1))
}
