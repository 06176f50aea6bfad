//! Molecular graphs: SMILES parsing, canonicalization, fingerprints,
//! similarity, and structural filters.
//!
//! The supported SMILES subset covers the organic-subset atoms
//! B, C, N, O, P, S, F, Cl, Br, I (plus bracket atoms with isotope,
//! charge, and H count, and the `[*]` attachment pseudo-atom), the bonds
//! `- = # :`, branches, and ring closures (digits and `%nn`). Aromaticity
//! is taken from the input annotations and verified only to the extent
//! that aromatic atoms must sit in rings; there is no perception pass.
//! Stereo markers (`/ \ @ @@`) are accepted, dropped, and counted.
//!
//! Valences: B 3; C 4; N 3,5; O 2; P 3,5; S 2,4,6; halogens 1; H 1.
//! Formal charge shifts each allowed valence by the charge. Aromatic atoms
//! use sigma-framework valences (one electron or lone pair committed to the
//! ring system): b 3; c 3; n 2,3; o 2; p 2,3; s 2,3. An atom is rejected
//! (`ValenceViolation`) exactly when its bond-order sum plus explicit
//! hydrogens exceeds every allowed valence; under-valent bracket atoms
//! (radicals) are accepted.

mod canon;
mod fingerprint;
pub mod molgen;
mod parse;
mod rings;

pub use canon::canonical_smiles;
pub use fingerprint::{fingerprint, fingerprint_default, tanimoto, Fingerprint};
pub use parse::{parse_smiles, parse_smiles_counting_stereo};

use alloc::string::String;
use alloc::vec::Vec;

/// Supported elements, plus the `[*]` attachment point used by fragment
/// SMILES.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Element {
    H,
    B,
    C,
    N,
    O,
    F,
    P,
    S,
    Cl,
    Br,
    I,
    /// Attachment pseudo-element, rendered `[*]`.
    Star,
}

impl Element {
    pub fn symbol(self) -> &'static str {
        match self {
            Element::H => "H",
            Element::B => "B",
            Element::C => "C",
            Element::N => "N",
            Element::O => "O",
            Element::F => "F",
            Element::P => "P",
            Element::S => "S",
            Element::Cl => "Cl",
            Element::Br => "Br",
            Element::I => "I",
            Element::Star => "*",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Element> {
        Some(match s {
            "H" => Element::H,
            "B" => Element::B,
            "C" => Element::C,
            "N" => Element::N,
            "O" => Element::O,
            "F" => Element::F,
            "P" => Element::P,
            "S" => Element::S,
            "Cl" => Element::Cl,
            "Br" => Element::Br,
            "I" => Element::I,
            "*" => Element::Star,
            _ => return None,
        })
    }

    /// Monoisotopic mass in daltons.
    pub fn monoisotopic_mass(self) -> f64 {
        match self {
            Element::H => 1.007_825_032,
            Element::B => 11.009_305_36,
            Element::C => 12.0,
            Element::N => 14.003_074_004,
            Element::O => 15.994_914_620,
            Element::F => 18.998_403_163,
            Element::P => 30.973_761_998,
            Element::S => 31.972_071_174,
            Element::Cl => 34.968_852_682,
            Element::Br => 78.918_337_6,
            Element::I => 126.904_471_9,
            Element::Star => 0.0,
        }
    }

    /// Allowed valences for a neutral, non-aromatic atom.
    pub fn allowed_valences(self) -> &'static [i32] {
        match self {
            Element::H => &[1],
            Element::B => &[3],
            Element::C => &[4],
            Element::N => &[3, 5],
            Element::O => &[2],
            Element::F => &[1],
            Element::P => &[3, 5],
            Element::S => &[2, 4, 6],
            Element::Cl => &[1],
            Element::Br => &[1],
            Element::I => &[1],
            Element::Star => &[0, 1, 2, 3, 4, 5, 6, 7, 8],
        }
    }

    /// Sigma-framework valences for an aromatic atom.
    pub fn aromatic_sigma_valences(self) -> Option<&'static [i32]> {
        match self {
            Element::B => Some(&[3]),
            Element::C => Some(&[3]),
            Element::N => Some(&[2, 3]),
            Element::O => Some(&[2]),
            Element::P => Some(&[2, 3]),
            Element::S => Some(&[2, 3]),
            _ => None,
        }
    }

    /// Atoms writable without brackets when uncharged, non-isotopic, and
    /// carrying the default hydrogen count.
    pub fn organic_bare(self) -> bool {
        matches!(
            self,
            Element::B
                | Element::C
                | Element::N
                | Element::O
                | Element::F
                | Element::P
                | Element::S
                | Element::Cl
                | Element::Br
                | Element::I
        )
    }

    fn code(self) -> u8 {
        match self {
            Element::H => 0,
            Element::B => 1,
            Element::C => 2,
            Element::N => 3,
            Element::O => 4,
            Element::F => 5,
            Element::P => 6,
            Element::S => 7,
            Element::Cl => 8,
            Element::Br => 9,
            Element::I => 10,
            Element::Star => 11,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Bond order in half-units (aromatic = 1.5).
    pub fn halves(self) -> i32 {
        match self {
            BondOrder::Single => 2,
            BondOrder::Double => 4,
            BondOrder::Triple => 6,
            BondOrder::Aromatic => 3,
        }
    }

    /// Integer order for hydrogen bookkeeping on non-aromatic atoms.
    pub fn integer(self) -> i32 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 1,
        }
    }

    fn code(self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub element: Element,
    pub formal_charge: i8,
    pub aromatic: bool,
    /// Hydrogen count after implicit assignment (or as written in brackets).
    pub h_count: u8,
    pub isotope: Option<u16>,
}

impl Atom {
    pub fn new(element: Element) -> Atom {
        Atom {
            element,
            formal_charge: 0,
            aromatic: false,
            h_count: 0,
            isotope: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Molecule {
    pub atoms: Vec<Atom>,
    pub bonds: Vec<Bond>,
    /// Smallest set of smallest rings, each as an atom-index cycle.
    pub rings: Vec<Vec<usize>>,
    adjacency: Vec<Vec<(usize, usize)>>,
    ring_atom: Vec<bool>,
    ring_bond: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChemError {
    EmptyInput,
    UnclosedRing,
    UnbalancedParenthesis,
    UnknownElement(String),
    ValenceViolation { atom: usize },
    Aromaticity { atom: usize },
    ChargeOutOfRange,
    HCountOutOfRange,
    RingBondSelf,
    DuplicateBond,
    RingBondOrderConflict,
    Syntax { pos: usize, what: &'static str },
    WidthMismatch,
}

impl core::fmt::Display for ChemError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ChemError::EmptyInput => write!(f, "empty SMILES input"),
            ChemError::UnclosedRing => write!(f, "ring closure digit never closed"),
            ChemError::UnbalancedParenthesis => write!(f, "unbalanced parenthesis"),
            ChemError::UnknownElement(s) => write!(f, "unknown element `{s}`"),
            ChemError::ValenceViolation { atom } => {
                write!(f, "valence violation at atom {atom}")
            }
            ChemError::Aromaticity { atom } => {
                write!(f, "aromatic atom {atom} outside any ring")
            }
            ChemError::ChargeOutOfRange => write!(f, "formal charge outside [-4, 4]"),
            ChemError::HCountOutOfRange => write!(f, "hydrogen count above 8"),
            ChemError::RingBondSelf => write!(f, "ring closure bonds an atom to itself"),
            ChemError::DuplicateBond => write!(f, "more than one bond between an atom pair"),
            ChemError::RingBondOrderConflict => {
                write!(f, "conflicting bond orders on ring closure")
            }
            ChemError::Syntax { pos, what } => write!(f, "syntax error at {pos}: {what}"),
            ChemError::WidthMismatch => write!(f, "fingerprint widths differ"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ChemError {}

/// Implicit hydrogens a reader assigns to a bare (bracket-free) atom with
/// the given bonds. Shared by the parser and the canonical writer so that
/// written strings re-parse to the same hydrogen counts.
pub(crate) fn implicit_h(
    element: Element,
    aromatic: bool,
    charge: i8,
    bond_orders: &[BondOrder],
) -> Option<u8> {
    if aromatic {
        let allowed = element.aromatic_sigma_valences()?;
        let sigma: i32 = bond_orders
            .iter()
            .map(|o| match o {
                BondOrder::Aromatic => 1,
                other => other.integer(),
            })
            .sum();
        for &v in allowed {
            let v = v + charge as i32;
            if v >= sigma {
                return Some((v - sigma) as u8);
            }
        }
        None
    } else {
        let halves: i32 = bond_orders.iter().map(|o| o.halves()).sum();
        let needed = (halves + 1) / 2;
        for &v in element.allowed_valences() {
            let v = v + charge as i32;
            if v >= needed {
                return Some((v - needed) as u8);
            }
        }
        None
    }
}

/// Does the atom's bond-order sum plus its hydrogen count exceed every
/// allowed valence?
fn exceeds_valence(atom: &Atom, bond_orders: &[BondOrder]) -> bool {
    if atom.element == Element::Star {
        return false;
    }
    let charge = atom.formal_charge as i32;
    if atom.aromatic {
        let Some(allowed) = atom.element.aromatic_sigma_valences() else {
            return true;
        };
        let sigma: i32 = bond_orders
            .iter()
            .map(|o| match o {
                BondOrder::Aromatic => 1,
                other => other.integer(),
            })
            .sum();
        let total = sigma + atom.h_count as i32;
        allowed.iter().all(|&v| total > v + charge)
    } else {
        let halves: i32 = bond_orders.iter().map(|o| o.halves()).sum();
        let needed = (halves + 1) / 2;
        let total = needed + atom.h_count as i32;
        atom.element
            .allowed_valences()
            .iter()
            .all(|&v| total > v + charge)
    }
}

impl Molecule {
    /// Build a molecule from atoms and bonds, computing rings and checking
    /// every structural invariant. Hydrogen counts must already be resolved.
    pub fn new(atoms: Vec<Atom>, bonds: Vec<Bond>) -> Result<Molecule, ChemError> {
        if atoms.is_empty() {
            return Err(ChemError::EmptyInput);
        }
        let n = atoms.len();
        let mut adjacency: Vec<Vec<(usize, usize)>> = alloc::vec![Vec::new(); n];
        let mut seen_pairs: alloc::collections::BTreeSet<(usize, usize)> =
            alloc::collections::BTreeSet::new();
        for (bi, bond) in bonds.iter().enumerate() {
            if bond.a >= n || bond.b >= n {
                return Err(ChemError::Syntax {
                    pos: bi,
                    what: "bond endpoint out of range",
                });
            }
            if bond.a == bond.b {
                return Err(ChemError::RingBondSelf);
            }
            let key = (bond.a.min(bond.b), bond.a.max(bond.b));
            if !seen_pairs.insert(key) {
                return Err(ChemError::DuplicateBond);
            }
            adjacency[bond.a].push((bond.b, bi));
            adjacency[bond.b].push((bond.a, bi));
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }

        for (i, atom) in atoms.iter().enumerate() {
            if atom.formal_charge.abs() > 4 {
                return Err(ChemError::ChargeOutOfRange);
            }
            if atom.h_count > 8 {
                return Err(ChemError::HCountOutOfRange);
            }
            let orders: Vec<BondOrder> = adjacency[i]
                .iter()
                .map(|&(_, bi)| bonds[bi].order)
                .collect();
            if exceeds_valence(atom, &orders) {
                return Err(ChemError::ValenceViolation { atom: i });
            }
        }

        // Aromatic bonds must join two aromatic atoms.
        for bond in &bonds {
            if bond.order == BondOrder::Aromatic
                && !(atoms[bond.a].aromatic && atoms[bond.b].aromatic)
            {
                return Err(ChemError::Aromaticity {
                    atom: if atoms[bond.a].aromatic { bond.b } else { bond.a },
                });
            }
        }

        let ring_bond = rings::non_bridge_bonds(n, &bonds, &adjacency);
        let mut ring_atom = alloc::vec![false; n];
        for (bi, bond) in bonds.iter().enumerate() {
            if ring_bond[bi] {
                ring_atom[bond.a] = true;
                ring_atom[bond.b] = true;
            }
        }
        for (i, atom) in atoms.iter().enumerate() {
            if atom.aromatic && !ring_atom[i] {
                return Err(ChemError::Aromaticity { atom: i });
            }
        }

        let rings = rings::sssr(n, &bonds, &adjacency);

        Ok(Molecule {
            atoms,
            bonds,
            rings,
            adjacency,
            ring_atom,
            ring_bond,
        })
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    /// Atoms that are not implicit hydrogens and not attachment points.
    pub fn heavy_atom_count(&self) -> usize {
        self.atoms
            .iter()
            .filter(|a| a.element != Element::H && a.element != Element::Star)
            .count()
    }

    pub fn neighbors(&self, atom: usize) -> &[(usize, usize)] {
        &self.adjacency[atom]
    }

    pub fn in_ring(&self, atom: usize) -> bool {
        self.ring_atom[atom]
    }

    pub fn bond_in_ring(&self, bond_index: usize) -> bool {
        self.ring_bond[bond_index]
    }

    pub fn degree(&self, atom: usize) -> usize {
        self.adjacency[atom].len()
    }

    /// Monoisotopic molecular weight including implicit hydrogens.
    pub fn molecular_weight(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| {
                a.element.monoisotopic_mass()
                    + a.h_count as f64 * Element::H.monoisotopic_mass()
            })
            .sum()
    }

    /// Relabel atoms: `perm[i]` is the new index of old atom `i`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Molecule, ChemError> {
        assert_eq!(perm.len(), self.atoms.len());
        let mut atoms = alloc::vec![Atom::new(Element::C); self.atoms.len()];
        for (old, &new) in perm.iter().enumerate() {
            atoms[new] = self.atoms[old].clone();
        }
        let bonds: Vec<Bond> = self
            .bonds
            .iter()
            .map(|b| Bond {
                a: perm[b.a],
                b: perm[b.b],
                order: b.order,
            })
            .collect();
        Molecule::new(atoms, bonds)
    }
}

/// True iff the string parses under the supported subset.
pub fn is_valid(s: &str) -> bool {
    parse_smiles(s).is_ok()
}

const FILTER_ELEMENTS: &[Element] = &[
    Element::C,
    Element::N,
    Element::S,
    Element::O,
    Element::F,
    Element::Cl,
    Element::Br,
    Element::H,
];

/// Structural filter set: allowed elements {C,N,S,O,F,Cl,Br,H}, no formal
/// charges, largest ring at most 8 atoms, monoisotopic weight in
/// [150, 650] Da. A simplification of the benchmark's filter list;
/// reports that use it are tagged "simplified filters".
pub fn passes_filters(m: &Molecule) -> bool {
    for atom in &m.atoms {
        if !FILTER_ELEMENTS.contains(&atom.element) {
            return false;
        }
        if atom.formal_charge != 0 {
            return false;
        }
    }
    if m.rings.iter().any(|r| r.len() > 8) {
        return false;
    }
    let mw = m.molecular_weight();
    (150.0..=650.0).contains(&mw)
}
