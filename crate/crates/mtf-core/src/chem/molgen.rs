//! Seeded random molecule construction for property tests and fixtures.

use alloc::vec::Vec;

use super::{implicit_h, Atom, Bond, BondOrder, Element, Molecule};
use crate::rng::Rng;

const POOL: &[Element] = &[
    Element::C,
    Element::C,
    Element::C,
    Element::C,
    Element::C,
    Element::C,
    Element::N,
    Element::N,
    Element::O,
    Element::O,
    Element::S,
    Element::F,
    Element::Cl,
    Element::P,
    Element::Br,
];

fn max_valence(e: Element) -> i32 {
    *e.allowed_valences().iter().max().unwrap()
}

/// Build a random connected, neutral, non-aromatic molecule with at most
/// `max_heavy` atoms. Valence-safe by construction.
pub fn random_molecule(rng: &mut Rng, max_heavy: usize) -> Molecule {
    let target = 1 + rng.below(max_heavy as u64) as usize;
    let mut elements: Vec<Element> = Vec::with_capacity(target);
    let mut capacity: Vec<i32> = Vec::with_capacity(target);
    let mut bonds: Vec<Bond> = Vec::new();
    let mut adjacent = alloc::collections::BTreeSet::new();

    let first = POOL[rng.below(POOL.len() as u64) as usize];
    elements.push(first);
    capacity.push(max_valence(first));

    while elements.len() < target {
        let i = elements.len();
        let open: Vec<usize> = (0..i).filter(|&j| capacity[j] >= 1).collect();
        if open.is_empty() {
            break; // everything saturated (e.g. F-F); stop growing
        }
        let e = POOL[rng.below(POOL.len() as u64) as usize];
        elements.push(e);
        capacity.push(max_valence(e));
        let j = open[rng.below(open.len() as u64) as usize];
        let max_order = capacity[j].min(capacity[i]).min(3);
        let order = match rng.below(8) {
            0 if max_order >= 3 => BondOrder::Triple,
            1 | 2 if max_order >= 2 => BondOrder::Double,
            _ => BondOrder::Single,
        };
        capacity[i] -= order.integer();
        capacity[j] -= order.integer();
        bonds.push(Bond { a: j, b: i, order });
        adjacent.insert((j.min(i), j.max(i)));
    }
    let n = elements.len();

    // A few extra single bonds to close rings.
    let extra = rng.below(3);
    for _ in 0..extra {
        if n < 3 {
            break;
        }
        let a = rng.below(n as u64) as usize;
        let b = rng.below(n as u64) as usize;
        let key = (a.min(b), a.max(b));
        if a == b || adjacent.contains(&key) || capacity[a] < 1 || capacity[b] < 1 {
            continue;
        }
        capacity[a] -= 1;
        capacity[b] -= 1;
        bonds.push(Bond {
            a,
            b,
            order: BondOrder::Single,
        });
        adjacent.insert(key);
    }

    let mut orders: Vec<Vec<BondOrder>> = alloc::vec![Vec::new(); n];
    for bond in &bonds {
        orders[bond.a].push(bond.order);
        orders[bond.b].push(bond.order);
    }
    let atoms: Vec<Atom> = elements
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            let mut atom = Atom::new(e);
            atom.h_count = implicit_h(e, false, 0, &orders[i]).expect("generator valence-safe");
            atom
        })
        .collect();
    Molecule::new(atoms, bonds).expect("generator output must be valid")
}

/// A random permutation of `0..n`.
pub fn random_permutation(rng: &mut Rng, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut perm);
    perm
}
