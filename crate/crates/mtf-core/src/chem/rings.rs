//! Ring perception: bridge detection for ring membership and a smallest
//! set of smallest rings chosen by shortest cycles per edge with
//! GF(2)-independence, ties broken by lowest atom index sequence.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use super::Bond;

/// Marks each bond that lies on some cycle (i.e. is not a bridge),
/// via iterative Tarjan lowlink.
pub(crate) fn non_bridge_bonds(
    n: usize,
    bonds: &[Bond],
    adjacency: &[Vec<(usize, usize)>],
) -> Vec<bool> {
    let mut ring_bond = alloc::vec![true; bonds.len()];
    if n == 0 {
        return ring_bond;
    }
    let mut disc = alloc::vec![usize::MAX; n];
    let mut low = alloc::vec![0usize; n];
    let mut timer = 0usize;
    // Stack frames: (node, incoming bond index or MAX, neighbor cursor).
    let mut stack: Vec<(usize, usize, usize)> = Vec::new();
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        stack.push((root, usize::MAX, 0));
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        while let Some(top) = stack.last_mut() {
            let u = top.0;
            let in_bond = top.1;
            if top.2 < adjacency[u].len() {
                let (v, bi) = adjacency[u][top.2];
                top.2 += 1;
                if bi == in_bond {
                    continue;
                }
                if disc[v] == usize::MAX {
                    disc[v] = timer;
                    low[v] = timer;
                    timer += 1;
                    stack.push((v, bi, 0));
                } else {
                    low[u] = low[u].min(disc[v]);
                }
            } else {
                stack.pop();
                if let Some(parent) = stack.last() {
                    let p = parent.0;
                    low[p] = low[p].min(low[u]);
                    if low[u] > disc[p] {
                        ring_bond[in_bond] = false;
                    }
                }
            }
        }
    }
    ring_bond
}

/// Shortest path between `from` and `to` avoiding bond `skip`, as a list of
/// atom indices. BFS with ascending-index neighbor order keeps the result
/// deterministic.
fn shortest_path_avoiding(
    from: usize,
    to: usize,
    skip: usize,
    adjacency: &[Vec<(usize, usize)>],
    n: usize,
) -> Option<Vec<usize>> {
    let mut prev = alloc::vec![usize::MAX; n];
    let mut seen = alloc::vec![false; n];
    let mut queue = VecDeque::new();
    seen[from] = true;
    queue.push_back(from);
    while let Some(u) = queue.pop_front() {
        if u == to {
            let mut path = alloc::vec![to];
            let mut cur = to;
            while cur != from {
                cur = prev[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for &(v, bi) in &adjacency[u] {
            if bi == skip || seen[v] {
                continue;
            }
            seen[v] = true;
            prev[v] = u;
            queue.push_back(v);
        }
    }
    None
}

/// Canonical form of a cycle: the lexicographically smallest rotation in
/// either direction.
fn normalize_cycle(cycle: &[usize]) -> Vec<usize> {
    let k = cycle.len();
    let mut best: Option<Vec<usize>> = None;
    for start in 0..k {
        for dir in [1isize, -1] {
            let mut cand = Vec::with_capacity(k);
            let mut idx = start as isize;
            for _ in 0..k {
                cand.push(cycle[idx.rem_euclid(k as isize) as usize]);
                idx += dir;
            }
            if best.as_ref().is_none_or(|b| cand < *b) {
                best = Some(cand);
            }
        }
    }
    best.unwrap()
}

fn edge_bitset(cycle: &[usize], bond_index: &alloc::collections::BTreeMap<(usize, usize), usize>, words: usize) -> Vec<u64> {
    let mut bits = alloc::vec![0u64; words];
    let k = cycle.len();
    for i in 0..k {
        let a = cycle[i];
        let b = cycle[(i + 1) % k];
        let bi = bond_index[&(a.min(b), a.max(b))];
        bits[bi / 64] |= 1 << (bi % 64);
    }
    bits
}

/// Smallest set of smallest rings. Each returned ring is an atom cycle in
/// canonical rotation.
pub(crate) fn sssr(
    n: usize,
    bonds: &[Bond],
    adjacency: &[Vec<(usize, usize)>],
) -> Vec<Vec<usize>> {
    if bonds.is_empty() {
        return Vec::new();
    }
    // Cycle space dimension = E - V + number of components.
    let mut seen = alloc::vec![false; n];
    let mut components = 0usize;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        components += 1;
        let mut queue = VecDeque::new();
        queue.push_back(start);
        seen[start] = true;
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    let dim = bonds.len() + components - n;
    if dim == 0 {
        return Vec::new();
    }

    let mut bond_index = alloc::collections::BTreeMap::new();
    for (bi, b) in bonds.iter().enumerate() {
        bond_index.insert((b.a.min(b.b), b.a.max(b.b)), bi);
    }
    let words = bonds.len().div_ceil(64);

    // Candidate rings: the shortest cycle through each non-bridge edge.
    let mut candidates: Vec<Vec<usize>> = Vec::new();
    for (bi, bond) in bonds.iter().enumerate() {
        if let Some(path) = shortest_path_avoiding(bond.a, bond.b, bi, adjacency, n) {
            candidates.push(normalize_cycle(&path));
        }
    }
    candidates.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    candidates.dedup();

    // Greedy GF(2) elimination over edge vectors. Reduction loops to a
    // fixpoint because an XOR may re-set a previously cleared pivot bit.
    let mut basis: Vec<(usize, Vec<u64>)> = Vec::new();
    let mut chosen: Vec<Vec<usize>> = Vec::new();
    for cand in candidates {
        let mut vec = edge_bitset(&cand, &bond_index, words);
        loop {
            let mut changed = false;
            for (pivot_bit, b) in &basis {
                if vec[pivot_bit / 64] & (1 << (pivot_bit % 64)) != 0 {
                    for (vw, bw) in vec.iter_mut().zip(b.iter()) {
                        *vw ^= bw;
                    }
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if let Some(word) = vec.iter().position(|w| *w != 0) {
            let pivot_bit = word * 64 + vec[word].trailing_zeros() as usize;
            basis.push((pivot_bit, vec));
            chosen.push(cand);
            if chosen.len() == dim {
                break;
            }
        }
    }
    chosen
}
