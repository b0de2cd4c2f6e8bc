use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use super::ChemError;

/// Hydrogen.
pub const HYDROGEN: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Contribution to an atom's bond-order sum. Aromatic bonds count as 1;
    /// the extra aromatic electron is added once per atom, see
    /// [`MolGraph::assign_implicit_hydrogens`].
    pub fn valence_contribution(self) -> u32 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }

    /// Stable small integer used by fingerprint hashing.
    pub fn code(self) -> u64 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    /// Atomic number.
    pub element: u8,
    pub aromatic: bool,
    pub formal_charge: i8,
    pub isotope: Option<u16>,
    /// Hydrogen count written inside a bracket atom.
    pub explicit_h: u8,
    /// Hydrogens implied by the organic-subset valence rules; always 0 for
    /// bracket atoms.
    pub implicit_h: u8,
    /// Whether the atom was written in brackets.
    pub bracket: bool,
}

impl Atom {
    pub fn organic(element: u8, aromatic: bool) -> Self {
        Atom {
            element,
            aromatic,
            formal_charge: 0,
            isotope: None,
            explicit_h: 0,
            implicit_h: 0,
            bracket: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bond {
    pub endpoints: (usize, usize),
    pub order: BondOrder,
    pub in_ring: bool,
}

impl Bond {
    pub fn other(&self, atom: usize) -> usize {
        if self.endpoints.0 == atom {
            self.endpoints.1
        } else {
            self.endpoints.0
        }
    }
}

/// A simple undirected molecular graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphParts", into = "GraphParts")]
pub struct MolGraph {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

#[derive(Serialize, Deserialize)]
struct GraphParts {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
}

impl TryFrom<GraphParts> for MolGraph {
    type Error = ChemError;

    fn try_from(parts: GraphParts) -> Result<Self, Self::Error> {
        MolGraph::from_parts(parts.atoms, parts.bonds)
    }
}

impl From<MolGraph> for GraphParts {
    fn from(mol: MolGraph) -> Self {
        GraphParts {
            atoms: mol.atoms,
            bonds: mol.bonds,
        }
    }
}

impl MolGraph {
    /// Builds a graph from atoms and bonds, validating endpoints and
    /// recomputing ring membership. Implicit hydrogen counts are taken as
    /// given.
    pub fn from_parts(atoms: Vec<Atom>, bonds: Vec<Bond>) -> Result<Self, ChemError> {
        let mut adjacency = vec![Vec::new(); atoms.len()];
        let mut seen = BTreeSet::new();
        for (index, bond) in bonds.iter().enumerate() {
            let (a, b) = bond.endpoints;
            if a >= atoms.len() || b >= atoms.len() {
                return Err(ChemError::InvalidGraph(format!(
                    "bond {index} references atom outside 0..{}",
                    atoms.len()
                )));
            }
            if a == b {
                return Err(ChemError::InvalidGraph(format!("bond {index} is a self-loop")));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(ChemError::InvalidGraph(format!(
                    "duplicate bond between atoms {a} and {b}"
                )));
            }
            adjacency[a].push((b, index));
            adjacency[b].push((a, index));
        }
        let mut mol = MolGraph {
            atoms,
            bonds,
            adjacency,
        };
        let ring = mol.ring_bonds();
        for (index, bond) in mol.bonds.iter_mut().enumerate() {
            bond.in_ring = ring.contains(&index);
        }
        Ok(mol)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `(neighbor, bond index)` pairs of an atom.
    pub fn neighbors(&self, atom: usize) -> &[(usize, usize)] {
        &self.adjacency[atom]
    }

    pub fn degree(&self, atom: usize) -> usize {
        self.adjacency[atom].len()
    }

    /// Bonds that are not bridges, i.e. lie on at least one cycle.
    pub fn ring_bonds(&self) -> BTreeSet<usize> {
        let n = self.atoms.len();
        let mut order = vec![usize::MAX; n];
        let mut low = vec![0usize; n];
        let mut bridges = BTreeSet::new();
        let mut counter = 0;

        // Iterative Tarjan bridge search. Each frame: (atom, bond used to
        // enter it, next adjacency slot to visit).
        for root in 0..n {
            if order[root] != usize::MAX {
                continue;
            }
            order[root] = counter;
            low[root] = counter;
            counter += 1;
            let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
            while let Some(frame) = stack.last_mut() {
                let (atom, via, slot) = *frame;
                if slot < self.adjacency[atom].len() {
                    frame.2 += 1;
                    let (next, bond) = self.adjacency[atom][slot];
                    if bond == via {
                        continue;
                    }
                    if order[next] == usize::MAX {
                        order[next] = counter;
                        low[next] = counter;
                        counter += 1;
                        stack.push((next, bond, 0));
                    } else {
                        low[atom] = low[atom].min(order[next]);
                    }
                } else {
                    stack.pop();
                    if let Some(&(parent, _, _)) = stack.last() {
                        low[parent] = low[parent].min(low[atom]);
                        if low[atom] > order[parent] {
                            bridges.insert(via);
                        }
                    }
                }
            }
        }
        (0..self.bonds.len()).filter(|b| !bridges.contains(b)).collect()
    }

    /// Recomputes `implicit_h` for every non-bracket atom from the
    /// organic-subset valence table: B 3, C 4, N 3, O 2, P 3, S 2, halogens 1.
    /// The bond-order sum counts aromatic bonds as 1, plus 1 if the atom has
    /// any aromatic bond; implicit H is the remaining valence, floored at 0.
    pub fn assign_implicit_hydrogens(&mut self) {
        for index in 0..self.atoms.len() {
            let atom = &self.atoms[index];
            if atom.bracket {
                self.atoms[index].implicit_h = 0;
                continue;
            }
            let Some(valence) = default_valence(atom.element) else {
                self.atoms[index].implicit_h = 0;
                continue;
            };
            let mut sum = 0u32;
            let mut aromatic_bond = false;
            for &(_, bond) in &self.adjacency[index] {
                let order = self.bonds[bond].order;
                sum += order.valence_contribution();
                aromatic_bond |= order == BondOrder::Aromatic;
            }
            if aromatic_bond {
                sum += 1;
            }
            self.atoms[index].implicit_h = valence.saturating_sub(sum) as u8;
        }
    }

    /// Sum of bond-order contributions around an atom.
    pub fn bond_order_sum(&self, atom: usize) -> u32 {
        self.adjacency[atom]
            .iter()
            .map(|&(_, bond)| self.bonds[bond].order.valence_contribution())
            .sum()
    }

    /// Returns the same molecule with atom `i` moved to position `perm[i]`
    /// and bonds listed in `bond_order` sequence (indices into the current
    /// bond list).
    pub fn renumbered(&self, perm: &[usize], bond_order: &[usize]) -> Result<Self, ChemError> {
        let n = self.atoms.len();
        if perm.len() != n || bond_order.len() != self.bonds.len() {
            return Err(ChemError::InvalidGraph("permutation length mismatch".into()));
        }
        let mut atoms = vec![None; n];
        for (old, &new) in perm.iter().enumerate() {
            if new >= n || atoms[new].is_some() {
                return Err(ChemError::InvalidGraph("not a permutation".into()));
            }
            atoms[new] = Some(self.atoms[old].clone());
        }
        let atoms = atoms.into_iter().map(|a| a.expect("permutation")).collect();
        let bonds = bond_order
            .iter()
            .map(|&b| {
                let bond = self.bonds[b];
                // flip endpoint order on odd bond indices so the tuple order
                // is not preserved either
                let (x, y) = (perm[bond.endpoints.0], perm[bond.endpoints.1]);
                Bond {
                    endpoints: if b % 2 == 0 { (x, y) } else { (y, x) },
                    ..bond
                }
            })
            .collect();
        MolGraph::from_parts(atoms, bonds)
    }
}

/// Lowest standard valence for organic-subset elements.
pub fn default_valence(element: u8) -> Option<u32> {
    match element {
        5 => Some(3),
        6 => Some(4),
        7 => Some(3),
        8 => Some(2),
        15 => Some(3),
        16 => Some(2),
        9 | 17 | 35 | 53 => Some(1),
        _ => None,
    }
}

/// Highest valence accepted for a bracket atom before charge adjustment.
pub fn max_valence(element: u8) -> Option<u32> {
    match element {
        1 => Some(1),
        5 => Some(4),
        6 => Some(4),
        7 => Some(5),
        8 => Some(2),
        9 => Some(1),
        14 => Some(4),
        15 => Some(5),
        16 => Some(6),
        17 | 35 | 53 => Some(7),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize, closing: bool) -> MolGraph {
        let atoms = vec![Atom::organic(6, false); n];
        let mut bonds: Vec<Bond> = (1..n)
            .map(|i| Bond {
                endpoints: (i - 1, i),
                order: BondOrder::Single,
                in_ring: false,
            })
            .collect();
        if closing {
            bonds.push(Bond {
                endpoints: (n - 1, 0),
                order: BondOrder::Single,
                in_ring: false,
            });
        }
        MolGraph::from_parts(atoms, bonds).unwrap()
    }

    #[test]
    fn cycle_bonds_are_ring_bonds() {
        let ring = chain(6, true);
        assert_eq!(ring.ring_bonds().len(), 6);
        assert!(ring.bonds().iter().all(|b| b.in_ring));
        assert!(chain(6, false).ring_bonds().is_empty());
    }

    #[test]
    fn rejects_duplicate_and_self_bonds() {
        let atoms = vec![Atom::organic(6, false); 2];
        let b = Bond {
            endpoints: (0, 1),
            order: BondOrder::Single,
            in_ring: false,
        };
        let flipped = Bond {
            endpoints: (1, 0),
            ..b
        };
        assert!(MolGraph::from_parts(atoms.clone(), vec![b, flipped]).is_err());
        let self_loop = Bond {
            endpoints: (1, 1),
            ..b
        };
        assert!(MolGraph::from_parts(atoms.clone(), vec![self_loop]).is_err());
        let outside = Bond {
            endpoints: (0, 2),
            ..b
        };
        assert!(MolGraph::from_parts(atoms, vec![outside]).is_err());
    }

    #[test]
    fn implicit_h_valence_table() {
        let mut mol = chain(3, false);
        mol.assign_implicit_hydrogens();
        let h: Vec<u8> = mol.atoms().iter().map(|a| a.implicit_h).collect();
        assert_eq!(h, vec![3, 2, 3]);
    }
}
