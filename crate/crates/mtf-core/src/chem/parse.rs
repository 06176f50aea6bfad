//! SMILES reader for the supported subset.

use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec::Vec;

use super::{implicit_h, Atom, Bond, BondOrder, ChemError, Element, Molecule};

struct RawAtom {
    atom: Atom,
    bracket: bool,
}

struct ParseState {
    atoms: Vec<RawAtom>,
    bonds: Vec<Bond>,
    prev: Option<usize>,
    pending: Option<BondOrder>,
    branch_stack: Vec<usize>,
    // ring number -> (atom index, bond order written at the opening)
    open_rings: BTreeMap<u16, (usize, Option<BondOrder>)>,
    stereo_dropped: usize,
}

impl ParseState {
    fn add_atom(&mut self, raw: RawAtom) {
        let idx = self.atoms.len();
        self.atoms.push(raw);
        if let Some(prev) = self.prev {
            let order = self.resolve_order(prev, idx);
            self.bonds.push(Bond {
                a: prev,
                b: idx,
                order,
            });
        }
        self.pending = None;
        self.prev = Some(idx);
    }

    fn resolve_order(&mut self, a: usize, b: usize) -> BondOrder {
        match self.pending.take() {
            Some(o) => o,
            None => {
                if self.atoms[a].atom.aromatic && self.atoms[b].atom.aromatic {
                    BondOrder::Aromatic
                } else {
                    BondOrder::Single
                }
            }
        }
    }

    fn ring_digit(&mut self, num: u16, pos: usize) -> Result<(), ChemError> {
        let Some(cur) = self.prev else {
            return Err(ChemError::Syntax {
                pos,
                what: "ring closure before any atom",
            });
        };
        let written = self.pending.take();
        match self.open_rings.remove(&num) {
            None => {
                self.open_rings.insert(num, (cur, written));
                Ok(())
            }
            Some((other, opened_with)) => {
                if other == cur {
                    return Err(ChemError::RingBondSelf);
                }
                let order = match (opened_with, written) {
                    (Some(x), Some(y)) if x != y => {
                        return Err(ChemError::RingBondOrderConflict)
                    }
                    (Some(x), _) | (_, Some(x)) => x,
                    (None, None) => {
                        if self.atoms[other].atom.aromatic && self.atoms[cur].atom.aromatic {
                            BondOrder::Aromatic
                        } else {
                            BondOrder::Single
                        }
                    }
                };
                self.bonds.push(Bond {
                    a: other,
                    b: cur,
                    order,
                });
                Ok(())
            }
        }
    }
}

fn parse_bracket(
    chars: &[char],
    mut i: usize,
    state: &mut ParseState,
) -> Result<usize, ChemError> {
    let start = i;
    i += 1; // consume '['
    let mut isotope: Option<u16> = None;
    let mut digits = 0u32;
    let mut value = 0u32;
    while i < chars.len() && chars[i].is_ascii_digit() {
        value = value * 10 + chars[i] as u32 - '0' as u32;
        digits += 1;
        i += 1;
    }
    if digits > 0 {
        if value == 0 || value > u16::MAX as u32 {
            return Err(ChemError::Syntax {
                pos: start,
                what: "bad isotope",
            });
        }
        isotope = Some(value as u16);
    }
    if i >= chars.len() {
        return Err(ChemError::Syntax {
            pos: start,
            what: "unterminated bracket atom",
        });
    }
    // Element symbol (two-letter symbols first), `*`, or aromatic lowercase.
    // An uppercase-lowercase pair is always a two-letter symbol here, so
    // unsupported elements like [Se] report as unknown rather than a stray
    // syntax error.
    let (element, aromatic, sym_len) = if chars[i] == '*' {
        (Element::Star, false, 1)
    } else if i + 1 < chars.len()
        && chars[i].is_ascii_uppercase()
        && chars[i + 1].is_ascii_lowercase()
    {
        let sym = alloc::format!("{}{}", chars[i], chars[i + 1]);
        match Element::from_symbol(&sym) {
            Some(e) => (e, false, 2),
            None => return Err(ChemError::UnknownElement(sym)),
        }
    } else if chars[i].is_ascii_uppercase() {
        match Element::from_symbol(&chars[i].to_string()) {
            Some(e) => (e, false, 1),
            None => return Err(ChemError::UnknownElement(chars[i].to_string())),
        }
    } else if chars[i].is_ascii_lowercase() {
        let sym = chars[i].to_ascii_uppercase().to_string();
        match Element::from_symbol(&sym) {
            Some(e) if e.aromatic_sigma_valences().is_some() => (e, true, 1),
            _ => return Err(ChemError::UnknownElement(chars[i].to_string())),
        }
    } else {
        return Err(ChemError::Syntax {
            pos: i,
            what: "expected element symbol in bracket",
        });
    };
    i += sym_len;

    // Chirality markers are accepted and dropped.
    while i < chars.len() && chars[i] == '@' {
        i += 1;
        state.stereo_dropped += 1;
    }

    let mut h_count = 0u8;
    if i < chars.len() && chars[i] == 'H' {
        i += 1;
        let mut hv = 0u32;
        let mut hd = 0;
        while i < chars.len() && chars[i].is_ascii_digit() {
            hv = hv * 10 + chars[i] as u32 - '0' as u32;
            hd += 1;
            i += 1;
        }
        let hv = if hd == 0 { 1 } else { hv };
        if hv > 8 {
            return Err(ChemError::HCountOutOfRange);
        }
        h_count = hv as u8;
    }

    let mut charge: i32 = 0;
    if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
        let sign: i32 = if chars[i] == '+' { 1 } else { -1 };
        let symbol = chars[i];
        i += 1;
        let mut magnitude = 1i32;
        if i < chars.len() && chars[i].is_ascii_digit() {
            magnitude = 0;
            while i < chars.len() && chars[i].is_ascii_digit() {
                magnitude = magnitude * 10 + (chars[i] as i32 - '0' as i32);
                i += 1;
                if magnitude > 9 {
                    return Err(ChemError::ChargeOutOfRange);
                }
            }
        } else {
            while i < chars.len() && chars[i] == symbol {
                magnitude += 1;
                i += 1;
            }
        }
        charge = sign * magnitude;
        if charge.abs() > 4 {
            return Err(ChemError::ChargeOutOfRange);
        }
    }

    if i >= chars.len() || chars[i] != ']' {
        return Err(ChemError::Syntax {
            pos: start,
            what: "expected `]`",
        });
    }
    i += 1;

    state.add_atom(RawAtom {
        atom: Atom {
            element,
            formal_charge: charge as i8,
            aromatic,
            h_count,
            isotope,
        },
        bracket: true,
    });
    Ok(i)
}

/// Parse a SMILES string, also reporting how many stereo markers were
/// dropped.
pub fn parse_smiles_counting_stereo(s: &str) -> Result<(Molecule, usize), ChemError> {
    if s.is_empty() {
        return Err(ChemError::EmptyInput);
    }
    let chars: Vec<char> = s.chars().collect();
    let mut state = ParseState {
        atoms: Vec::new(),
        bonds: Vec::new(),
        prev: None,
        pending: None,
        branch_stack: Vec::new(),
        open_rings: BTreeMap::new(),
        stereo_dropped: 0,
    };

    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i];
        match c {
            '[' => {
                i = parse_bracket(&chars, i, &mut state)?;
            }
            '(' => {
                let Some(prev) = state.prev else {
                    return Err(ChemError::Syntax {
                        pos: i,
                        what: "branch before any atom",
                    });
                };
                state.branch_stack.push(prev);
                i += 1;
            }
            ')' => {
                if state.pending.is_some() {
                    return Err(ChemError::Syntax {
                        pos: i,
                        what: "dangling bond before `)`",
                    });
                }
                match state.branch_stack.pop() {
                    Some(anchor) => state.prev = Some(anchor),
                    None => return Err(ChemError::UnbalancedParenthesis),
                }
                i += 1;
            }
            '-' | '=' | '#' | ':' | '/' | '\\' => {
                if state.pending.is_some() {
                    return Err(ChemError::Syntax {
                        pos: i,
                        what: "two consecutive bond symbols",
                    });
                }
                state.pending = Some(match c {
                    '-' => BondOrder::Single,
                    '=' => BondOrder::Double,
                    '#' => BondOrder::Triple,
                    ':' => BondOrder::Aromatic,
                    _ => {
                        state.stereo_dropped += 1;
                        BondOrder::Single
                    }
                });
                i += 1;
            }
            '0'..='9' => {
                state.ring_digit(c as u16 - '0' as u16, i)?;
                i += 1;
            }
            '%' => {
                if i + 2 >= chars.len()
                    || !chars[i + 1].is_ascii_digit()
                    || !chars[i + 2].is_ascii_digit()
                {
                    return Err(ChemError::Syntax {
                        pos: i,
                        what: "`%` needs two digits",
                    });
                }
                let num = (chars[i + 1] as u16 - '0' as u16) * 10
                    + (chars[i + 2] as u16 - '0' as u16);
                state.ring_digit(num, i)?;
                i += 3;
            }
            '.' => {
                return Err(ChemError::Syntax {
                    pos: i,
                    what: "dot disconnection not supported",
                });
            }
            _ if c.is_ascii_uppercase() => {
                let two = if i + 1 < chars.len() && chars[i + 1].is_ascii_lowercase() {
                    Element::from_symbol(&alloc::format!("{}{}", c, chars[i + 1]))
                } else {
                    None
                };
                let (element, len) = match two {
                    Some(e) if e.organic_bare() => (e, 2),
                    _ => match Element::from_symbol(&c.to_string()) {
                        Some(e) if e.organic_bare() => (e, 1),
                        _ => return Err(ChemError::UnknownElement(c.to_string())),
                    },
                };
                state.add_atom(RawAtom {
                    atom: Atom::new(element),
                    bracket: false,
                });
                i += len;
            }
            'b' | 'c' | 'n' | 'o' | 'p' | 's' => {
                let element =
                    Element::from_symbol(&c.to_ascii_uppercase().to_string()).unwrap();
                let mut atom = Atom::new(element);
                atom.aromatic = true;
                state.add_atom(RawAtom {
                    atom,
                    bracket: false,
                });
                i += 1;
            }
            _ => {
                return Err(ChemError::Syntax {
                    pos: i,
                    what: "unexpected character",
                });
            }
        }
    }

    if !state.branch_stack.is_empty() {
        return Err(ChemError::UnbalancedParenthesis);
    }
    if !state.open_rings.is_empty() {
        return Err(ChemError::UnclosedRing);
    }
    if state.pending.is_some() {
        return Err(ChemError::Syntax {
            pos: chars.len(),
            what: "dangling bond at end of input",
        });
    }
    if state.atoms.is_empty() {
        return Err(ChemError::EmptyInput);
    }

    // Assign implicit hydrogens to bare atoms.
    let n = state.atoms.len();
    let mut orders: Vec<Vec<BondOrder>> = alloc::vec![Vec::new(); n];
    for bond in &state.bonds {
        orders[bond.a].push(bond.order);
        orders[bond.b].push(bond.order);
    }
    let mut atoms = Vec::with_capacity(n);
    for (idx, raw) in state.atoms.into_iter().enumerate() {
        let mut atom = raw.atom;
        if !raw.bracket {
            match implicit_h(atom.element, atom.aromatic, atom.formal_charge, &orders[idx]) {
                Some(h) => atom.h_count = h,
                None => return Err(ChemError::ValenceViolation { atom: idx }),
            }
        }
        atoms.push(atom);
    }

    let molecule = Molecule::new(atoms, state.bonds)?;
    Ok((molecule, state.stereo_dropped))
}

/// Parse a SMILES string into a molecular graph.
pub fn parse_smiles(s: &str) -> Result<Molecule, ChemError> {
    parse_smiles_counting_stereo(s).map(|(m, _)| m)
}
