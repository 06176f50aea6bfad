//! Canonical SMILES emission.
//!
//! Atom ranks come from iterative invariant refinement seeded with
//! (element, aromaticity, degree, charge, H count, isotope, ring
//! membership). Remaining ties are resolved by trial promotion: each tied
//! atom is promoted in turn, refinement re-run, and the lexicographically
//! smallest emitted string wins. The result is invariant under atom
//! relabeling.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::{implicit_h, BondOrder, Molecule};

fn initial_classes(m: &Molecule) -> Vec<u32> {
    let keys: Vec<(u8, bool, usize, i8, u8, u16, bool)> = (0..m.atoms.len())
        .map(|i| {
            let a = &m.atoms[i];
            (
                a.element.code(),
                a.aromatic,
                m.degree(i),
                a.formal_charge,
                a.h_count,
                a.isotope.unwrap_or(0),
                m.in_ring(i),
            )
        })
        .collect();
    dense_ranks(&keys)
}

fn dense_ranks<K: Ord + Clone>(keys: &[K]) -> Vec<u32> {
    let mut sorted: Vec<K> = keys.to_vec();
    sorted.sort();
    sorted.dedup();
    keys.iter()
        .map(|k| sorted.binary_search(k).unwrap() as u32)
        .collect()
}

fn class_count(classes: &[u32]) -> usize {
    let mut v: Vec<u32> = classes.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

/// Neighborhood refinement to a fixpoint. Classes are re-densified on each
/// sweep; the partition only ever splits.
fn refine(m: &Molecule, classes: &mut Vec<u32>) {
    let mut count = class_count(classes);
    loop {
        let sigs: Vec<(u32, Vec<(u8, u32)>)> = (0..m.atoms.len())
            .map(|i| {
                let mut neigh: Vec<(u8, u32)> = m
                    .neighbors(i)
                    .iter()
                    .map(|&(j, bi)| (m.bonds[bi].order.code(), classes[j]))
                    .collect();
                neigh.sort_unstable();
                (classes[i], neigh)
            })
            .collect();
        let new_classes = dense_ranks(&sigs);
        let new_count = class_count(&new_classes);
        *classes = new_classes;
        if new_count == count {
            return;
        }
        count = new_count;
    }
}

fn resolve(m: &Molecule, classes: Vec<u32>) -> String {
    let n = m.atoms.len();
    if class_count(&classes) == n {
        return write_smiles(m, &classes);
    }
    // Smallest-ranked class with a tie.
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for &c in &classes {
        *counts.entry(c).or_insert(0) += 1;
    }
    let tied = *counts.iter().find(|&(_, &cnt)| cnt > 1).unwrap().0;
    let mut best: Option<String> = None;
    for atom in 0..n {
        if classes[atom] != tied {
            continue;
        }
        let mut promoted = classes.clone();
        promoted[atom] = n as u32 + 1;
        let mut next = dense_ranks(&promoted);
        refine(m, &mut next);
        let s = resolve(m, next);
        if best.as_ref().is_none_or(|b| s < *b) {
            best = Some(s);
        }
    }
    best.unwrap()
}

/// Canonical SMILES: deterministic, identical for isomorphic molecules, and
/// re-parseable to an isomorphic graph.
pub fn canonical_smiles(m: &Molecule) -> String {
    let mut classes = initial_classes(m);
    refine(m, &mut classes);
    resolve(m, classes)
}

struct ClosurePlan {
    /// Closures to open at this atom: (bond index, other atom), in print order.
    opens: Vec<Vec<(usize, usize)>>,
    /// Closures to close at this atom: bond indices in discovery order.
    closes: Vec<Vec<usize>>,
}

/// Classify edges into tree and closure edges by the same rank-ordered DFS
/// the writer uses.
fn plan_closures(m: &Molecule, ranks: &[u32], start: usize) -> ClosurePlan {
    let n = m.atoms.len();
    let mut opens: Vec<Vec<(usize, usize)>> = alloc::vec![Vec::new(); n];
    let mut closes: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
    let mut visited = alloc::vec![false; n];
    let mut bond_used = alloc::vec![false; m.bonds.len()];
    // (atom, cursor over rank-sorted neighbors)
    let mut order: Vec<Vec<(usize, usize)>> = alloc::vec![Vec::new(); n];
    for u in 0..n {
        let mut neigh: Vec<(usize, usize)> = m.neighbors(u).to_vec();
        neigh.sort_by_key(|&(v, _)| ranks[v]);
        order[u] = neigh;
    }
    let mut stack: Vec<(usize, usize)> = alloc::vec![(start, 0)];
    visited[start] = true;
    while let Some(&mut (u, ref mut cursor)) = stack.last_mut() {
        if *cursor < order[u].len() {
            let (v, bi) = order[u][*cursor];
            *cursor += 1;
            if bond_used[bi] {
                continue;
            }
            if visited[v] {
                // Closure: v was emitted earlier, so v opens and u closes.
                bond_used[bi] = true;
                opens[v].push((bi, u));
                closes[u].push(bi);
            } else {
                bond_used[bi] = true;
                visited[v] = true;
                stack.push((v, 0));
            }
        } else {
            stack.pop();
        }
    }
    // Print order for opens: ascending rank of the far endpoint.
    for list in &mut opens {
        list.sort_by_key(|&(_, other)| ranks[other]);
    }
    ClosurePlan { opens, closes }
}

fn bond_symbol(m: &Molecule, bond_index: usize) -> &'static str {
    let b = &m.bonds[bond_index];
    match b.order {
        BondOrder::Single => {
            if m.atoms[b.a].aromatic && m.atoms[b.b].aromatic {
                "-"
            } else {
                ""
            }
        }
        BondOrder::Double => "=",
        BondOrder::Triple => "#",
        BondOrder::Aromatic => "",
    }
}

fn atom_token(m: &Molecule, idx: usize, out: &mut String) {
    let a = &m.atoms[idx];
    let orders: Vec<BondOrder> = m
        .neighbors(idx)
        .iter()
        .map(|&(_, bi)| m.bonds[bi].order)
        .collect();
    let bare_h = implicit_h(a.element, a.aromatic, 0, &orders);
    let needs_bracket = a.isotope.is_some()
        || a.formal_charge != 0
        || !a.element.organic_bare()
        || bare_h != Some(a.h_count);

    let symbol = a.element.symbol();
    if !needs_bracket {
        if a.aromatic {
            out.push_str(&symbol.to_lowercase());
        } else {
            out.push_str(symbol);
        }
        return;
    }
    out.push('[');
    if let Some(iso) = a.isotope {
        out.push_str(&alloc::format!("{iso}"));
    }
    if a.aromatic {
        out.push_str(&symbol.to_lowercase());
    } else {
        out.push_str(symbol);
    }
    match a.h_count {
        0 => {}
        1 => out.push('H'),
        h => out.push_str(&alloc::format!("H{h}")),
    }
    match a.formal_charge {
        0 => {}
        1 => out.push('+'),
        -1 => out.push('-'),
        q if q > 0 => out.push_str(&alloc::format!("+{q}")),
        q => out.push_str(&alloc::format!("-{}", -q)),
    }
    out.push(']');
}

fn push_digit(out: &mut String, digit: u16) {
    if digit < 10 {
        out.push_str(&alloc::format!("{digit}"));
    } else {
        out.push_str(&alloc::format!("%{digit:02}"));
    }
}

/// Emit SMILES for a connected molecule under a total atom ranking.
fn write_smiles(m: &Molecule, ranks: &[u32]) -> String {
    let n = m.atoms.len();
    let start = (0..n).min_by_key(|&i| ranks[i]).unwrap();
    let plan = plan_closures(m, ranks, start);

    let mut digit_of_bond: BTreeMap<usize, u16> = BTreeMap::new();
    let mut in_use: alloc::collections::BTreeSet<u16> = alloc::collections::BTreeSet::new();
    let mut alloc_digit = move |in_use: &mut alloc::collections::BTreeSet<u16>| -> u16 {
        let mut d = 1u16;
        while in_use.contains(&d) {
            d += 1;
        }
        in_use.insert(d);
        d
    };

    let mut out = String::new();
    let mut visited = alloc::vec![false; n];
    let mut order: Vec<Vec<(usize, usize)>> = alloc::vec![Vec::new(); n];
    for u in 0..n {
        let mut neigh: Vec<(usize, usize)> = m.neighbors(u).to_vec();
        neigh.sort_by_key(|&(v, _)| ranks[v]);
        order[u] = neigh;
    }

    // Collect tree children per atom first (same DFS as plan_closures).
    let mut tree_children: Vec<Vec<(usize, usize)>> = alloc::vec![Vec::new(); n];
    {
        let mut seen = alloc::vec![false; n];
        let mut bond_used = alloc::vec![false; m.bonds.len()];
        let mut stack: Vec<(usize, usize)> = alloc::vec![(start, 0)];
        seen[start] = true;
        while let Some(&mut (u, ref mut cursor)) = stack.last_mut() {
            if *cursor < order[u].len() {
                let (v, bi) = order[u][*cursor];
                *cursor += 1;
                if bond_used[bi] {
                    continue;
                }
                if seen[v] {
                    bond_used[bi] = true; // closure, handled via the plan
                } else {
                    bond_used[bi] = true;
                    seen[v] = true;
                    tree_children[u].push((v, bi));
                    stack.push((v, 0));
                }
            } else {
                stack.pop();
            }
        }
    }

    fn emit(
        m: &Molecule,
        u: usize,
        parent_bond: Option<usize>,
        tree_children: &[Vec<(usize, usize)>],
        plan: &ClosurePlan,
        digit_of_bond: &mut BTreeMap<usize, u16>,
        in_use: &mut alloc::collections::BTreeSet<u16>,
        alloc_digit: &mut dyn FnMut(&mut alloc::collections::BTreeSet<u16>) -> u16,
        visited: &mut [bool],
        out: &mut String,
    ) {
        visited[u] = true;
        if let Some(bi) = parent_bond {
            out.push_str(bond_symbol(m, bi));
        }
        atom_token(m, u, out);
        // Closing digits first (frees them for reuse), then opens.
        let mut closes: Vec<u16> = plan.closes[u]
            .iter()
            .map(|bi| digit_of_bond[bi])
            .collect();
        closes.sort_unstable();
        for d in &closes {
            push_digit(out, *d);
            in_use.remove(d);
        }
        for &(bi, _) in &plan.opens[u] {
            let d = alloc_digit(in_use);
            digit_of_bond.insert(bi, d);
            out.push_str(bond_symbol(m, bi));
            push_digit(out, d);
        }
        let children = &tree_children[u];
        for (k, &(child, bi)) in children.iter().enumerate() {
            let last = k + 1 == children.len();
            if !last {
                out.push('(');
            }
            emit(
                m,
                child,
                Some(bi),
                tree_children,
                plan,
                digit_of_bond,
                in_use,
                alloc_digit,
                visited,
                out,
            );
            if !last {
                out.push(')');
            }
        }
    }

    emit(
        m,
        start,
        None,
        &tree_children,
        &plan,
        &mut digit_of_bond,
        &mut in_use,
        &mut alloc_digit,
        &mut visited,
        &mut out,
    );
    debug_assert!(visited.iter().all(|&v| v), "disconnected molecule");
    out
}
