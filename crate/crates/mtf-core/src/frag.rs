//! Bemis-Murcko scaffolds and BRICS-style fragmentation.
//!
//! The fragmentation rule set is a documented reduction of BRICS to four
//! bond classes, applied to acyclic single bonds between heavy atoms:
//!
//! - R1: ring atom to non-ring heavy atom
//! - R2: amide carbonyl carbon to nitrogen
//! - R3: ester carbonyl carbon to oxygen
//! - R4: ether carbon-oxygen where neither atom is in a ring
//!
//! Cleavage sites receive a `[*]` attachment atom, so fragment identity
//! stays sensitive to where the cut happened.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::chem::{canonical_smiles, Atom, Bond, BondOrder, Element, Molecule};

/// Canonical SMILES of the molecule's ring systems plus linkers; empty for
/// acyclic molecules.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Scaffold(pub String);

impl Scaffold {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Multiset of canonical fragment SMILES.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FragmentBag {
    counts: BTreeMap<String, u32>,
}

impl FragmentBag {
    pub fn counts(&self) -> &BTreeMap<String, u32> {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.values().map(|&c| c as u64).sum()
    }

    fn add(&mut self, key: String) {
        *self.counts.entry(key).or_insert(0) += 1;
    }
}

/// Extract the induced submolecule over `keep`, adding one hydrogen per
/// cut single bond (two/three for double/triple) so valences stay filled.
fn submolecule(m: &Molecule, keep: &[bool]) -> Option<Molecule> {
    let mut index = alloc::vec![usize::MAX; m.atoms.len()];
    let mut atoms: Vec<Atom> = Vec::new();
    for (i, a) in m.atoms.iter().enumerate() {
        if keep[i] {
            index[i] = atoms.len();
            atoms.push(a.clone());
        }
    }
    if atoms.is_empty() {
        return None;
    }
    let mut bonds = Vec::new();
    for bond in &m.bonds {
        match (keep[bond.a], keep[bond.b]) {
            (true, true) => bonds.push(Bond {
                a: index[bond.a],
                b: index[bond.b],
                order: bond.order,
            }),
            (true, false) => {
                atoms[index[bond.a]].h_count += bond.order.integer() as u8;
            }
            (false, true) => {
                atoms[index[bond.b]].h_count += bond.order.integer() as u8;
            }
            (false, false) => {}
        }
    }
    Molecule::new(atoms, bonds).ok()
}

/// Bemis-Murcko scaffold: iteratively prune terminal atoms down to rings
/// plus linkers, then re-attach atoms double- or triple-bonded to the
/// framework.
pub fn murcko_scaffold(m: &Molecule) -> Scaffold {
    if m.rings.is_empty() {
        return Scaffold(String::new());
    }
    let n = m.atoms.len();
    let mut keep = alloc::vec![true; n];
    // Phase 1: peel terminal atoms that are not in rings.
    loop {
        let mut removed = false;
        for i in 0..n {
            if !keep[i] || m.in_ring(i) {
                continue;
            }
            let alive = m.neighbors(i).iter().filter(|&&(j, _)| keep[j]).count();
            if alive <= 1 {
                keep[i] = false;
                removed = true;
            }
        }
        if !removed {
            break;
        }
    }
    // Phase 2: atoms multiply bonded to the framework come back.
    loop {
        let mut added = false;
        for bond in &m.bonds {
            if matches!(bond.order, BondOrder::Double | BondOrder::Triple) {
                if keep[bond.a] && !keep[bond.b] {
                    keep[bond.b] = true;
                    added = true;
                } else if keep[bond.b] && !keep[bond.a] {
                    keep[bond.a] = true;
                    added = true;
                }
            }
        }
        if !added {
            break;
        }
    }
    match submolecule(m, &keep) {
        Some(sub) => Scaffold(canonical_smiles(&sub)),
        None => Scaffold(String::new()),
    }
}

fn has_double_bond_to(m: &Molecule, atom: usize, element: Element) -> bool {
    m.neighbors(atom)
        .iter()
        .any(|&(j, bi)| m.bonds[bi].order == BondOrder::Double && m.atoms[j].element == element)
}

fn cleavable(m: &Molecule, bond_index: usize) -> bool {
    let bond = &m.bonds[bond_index];
    if bond.order != BondOrder::Single || m.bond_in_ring(bond_index) {
        return false;
    }
    let (a, b) = (bond.a, bond.b);
    let (ea, eb) = (m.atoms[a].element, m.atoms[b].element);
    if ea == Element::H || eb == Element::H || ea == Element::Star || eb == Element::Star {
        return false;
    }
    // R1: ring atom to non-ring atom.
    if m.in_ring(a) != m.in_ring(b) {
        return true;
    }
    // R2 / R3: carbonyl carbon to N / O.
    let carbonyl_pair = |c: usize, x: usize| {
        m.atoms[c].element == Element::C
            && has_double_bond_to(m, c, Element::O)
            && matches!(m.atoms[x].element, Element::N | Element::O)
    };
    if carbonyl_pair(a, b) || carbonyl_pair(b, a) {
        return true;
    }
    // R4: acyclic ether.
    if !m.in_ring(a) && !m.in_ring(b) {
        let co = (ea == Element::C && eb == Element::O) || (ea == Element::O && eb == Element::C);
        if co {
            return true;
        }
    }
    false
}

/// Cleave every bond matching the rule set, cap the cut ends with `[*]`,
/// and count the canonical fragments. A molecule with nothing to cleave is
/// its own single fragment.
pub fn brics_fragments(m: &Molecule) -> FragmentBag {
    let cut: Vec<usize> = (0..m.bonds.len()).filter(|&bi| cleavable(m, bi)).collect();
    let mut bag = FragmentBag::default();
    if cut.is_empty() {
        bag.add(canonical_smiles(m));
        return bag;
    }

    // Rebuild with cut bonds replaced by attachment atoms.
    let mut atoms: Vec<Atom> = m.atoms.clone();
    let mut bonds: Vec<Bond> = Vec::new();
    for (bi, bond) in m.bonds.iter().enumerate() {
        if cut.contains(&bi) {
            for end in [bond.a, bond.b] {
                let star = atoms.len();
                atoms.push(Atom::new(Element::Star));
                bonds.push(Bond {
                    a: end,
                    b: star,
                    order: BondOrder::Single,
                });
            }
        } else {
            bonds.push(*bond);
        }
    }

    // Connected components become fragments.
    let n = atoms.len();
    let mut adjacency: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
    for bond in &bonds {
        adjacency[bond.a].push(bond.b);
        adjacency[bond.b].push(bond.a);
    }
    let mut component = alloc::vec![usize::MAX; n];
    let mut n_components = 0;
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        let mut stack = alloc::vec![start];
        component[start] = n_components;
        while let Some(u) = stack.pop() {
            for &v in &adjacency[u] {
                if component[v] == usize::MAX {
                    component[v] = n_components;
                    stack.push(v);
                }
            }
        }
        n_components += 1;
    }

    for c in 0..n_components {
        let keep: Vec<bool> = component.iter().map(|&k| k == c).collect();
        let mut index = alloc::vec![usize::MAX; n];
        let mut sub_atoms = Vec::new();
        for i in 0..n {
            if keep[i] {
                index[i] = sub_atoms.len();
                sub_atoms.push(atoms[i].clone());
            }
        }
        let sub_bonds: Vec<Bond> = bonds
            .iter()
            .filter(|b| keep[b.a] && keep[b.b])
            .map(|b| Bond {
                a: index[b.a],
                b: index[b.b],
                order: b.order,
            })
            .collect();
        let fragment = Molecule::new(sub_atoms, sub_bonds).expect("fragment stays valid");
        bag.add(canonical_smiles(&fragment));
    }
    bag
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::parse_smiles;

    fn scaffold(s: &str) -> String {
        murcko_scaffold(&parse_smiles(s).unwrap()).0
    }

    fn canon(s: &str) -> String {
        canonical_smiles(&parse_smiles(s).unwrap())
    }

    #[test]
    fn benzene_is_its_own_scaffold() {
        assert_eq!(scaffold("c1ccccc1"), canon("c1ccccc1"));
    }

    #[test]
    fn ethylbenzene_peels_to_benzene() {
        assert_eq!(scaffold("CCc1ccccc1"), canon("c1ccccc1"));
    }

    #[test]
    fn acyclic_molecule_has_empty_scaffold() {
        assert_eq!(scaffold("CCO"), "");
    }

    #[test]
    fn exocyclic_double_bond_is_retained() {
        // Cyclohexanone keeps its carbonyl oxygen.
        assert_eq!(scaffold("O=C1CCCCC1"), canon("O=C1CCCCC1"));
        // Benzaldehyde loses the whole side chain.
        assert_eq!(scaffold("O=Cc1ccccc1"), canon("c1ccccc1"));
    }

    #[test]
    fn linker_between_rings_is_retained() {
        let s = scaffold("c1ccccc1C(=O)Nc1ccccc1C");
        assert_eq!(s, canon("O=C(Nc1ccccc1)c1ccccc1"));
    }

    #[test]
    fn scaffold_idempotent() {
        for src in ["CCc1ccccc1", "O=C1CCCCC1", "c1ccccc1CCNC(=O)Cc1ccccc1"] {
            let s1 = scaffold(src);
            let s2 = scaffold(&s1);
            assert_eq!(s1, s2, "not idempotent for {src}");
        }
    }

    #[test]
    fn scaffold_atoms_subset_of_molecule() {
        let m = parse_smiles("CCc1ccc(CC(N)C(=O)O)cc1").unwrap();
        let s = murcko_scaffold(&m);
        let sub = parse_smiles(&s.0).unwrap();
        assert!(sub.heavy_atom_count() <= m.heavy_atom_count());
    }

    #[test]
    fn methane_is_single_fragment() {
        let bag = brics_fragments(&parse_smiles("C").unwrap());
        assert_eq!(bag.total(), 1);
        assert_eq!(bag.counts().iter().next().unwrap().0, "C");
    }

    #[test]
    fn ethylbenzene_splits_at_ring_bond() {
        let bag = brics_fragments(&parse_smiles("CCc1ccccc1").unwrap());
        assert_eq!(bag.total(), 2);
        let keys: Vec<&str> = bag.counts().keys().map(|s| s.as_str()).collect();
        assert!(
            keys.iter().any(|k| k.contains("[*]") && k.contains("CC")),
            "{keys:?}"
        );
        assert!(keys.iter().any(|k| k.contains('c')), "{keys:?}");
    }

    #[test]
    fn amide_splits_at_carbonyl_nitrogen() {
        let bag = brics_fragments(&parse_smiles("CC(=O)NC").unwrap());
        assert_eq!(bag.total(), 2);
        for key in bag.counts().keys() {
            assert!(key.contains("[*]"), "{key}");
        }
    }

    #[test]
    fn fragment_heavy_atoms_conserved() {
        let mut rng = crate::rng::Rng::new(99);
        for _ in 0..200 {
            let m = crate::chem::molgen::random_molecule(&mut rng, 14);
            let bag = brics_fragments(&m);
            let mut heavy = 0usize;
            for (key, count) in bag.counts() {
                let f = parse_smiles(key).unwrap();
                heavy += f.heavy_atom_count() * *count as usize;
            }
            assert_eq!(heavy, m.heavy_atom_count(), "atom loss fragmenting");
        }
    }

    #[test]
    fn fragmentation_isomorphism_invariant() {
        let mut rng = crate::rng::Rng::new(123);
        for _ in 0..100 {
            let m = crate::chem::molgen::random_molecule(&mut rng, 12);
            let perm = crate::chem::molgen::random_permutation(&mut rng, m.atoms.len());
            let p = m.permuted(&perm).unwrap();
            assert_eq!(brics_fragments(&m), brics_fragments(&p));
            assert_eq!(murcko_scaffold(&m), murcko_scaffold(&p));
        }
    }
}
