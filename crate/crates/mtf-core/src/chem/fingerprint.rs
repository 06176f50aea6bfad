//! Circular (Morgan-style) fingerprints and Tanimoto similarity.

use alloc::vec::Vec;

use super::{ChemError, Molecule};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fingerprint {
    bits: Vec<u64>,
    nbits: usize,
    radius: u32,
}

impl Fingerprint {
    pub fn nbits(&self) -> usize {
        self.nbits
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn get(&self, bit: usize) -> bool {
        self.bits[bit / 64] & (1 << (bit % 64)) != 0
    }

    pub fn count_ones(&self) -> u32 {
        self.bits.iter().map(|w| w.count_ones()).sum()
    }

    pub fn words(&self) -> &[u64] {
        &self.bits
    }
}

#[inline]
fn mix(h: u64, v: u64) -> u64 {
    let mut z = h ^ v.wrapping_mul(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Iterative neighborhood hashing of atom invariants up to `radius`, folded
/// into `nbits` (a power of two). Neighbor contributions are sorted before
/// mixing, so the result is invariant under atom relabeling.
pub fn fingerprint(m: &Molecule, radius: u32, nbits: usize) -> Fingerprint {
    assert!(nbits.is_power_of_two(), "fingerprint width must be a power of two");
    let n = m.atoms.len();
    let mut bits = alloc::vec![0u64; nbits / 64];
    let mut set_bit = |h: u64| {
        let b = (h as usize) & (nbits - 1);
        bits[b / 64] |= 1 << (b % 64);
    };

    let mut env: Vec<u64> = (0..n)
        .map(|i| {
            let a = &m.atoms[i];
            let mut h = 0xcbf29ce484222325u64;
            h = mix(h, a.element as u64);
            h = mix(h, m.degree(i) as u64);
            h = mix(h, (a.formal_charge as i64 + 8) as u64);
            h = mix(h, a.h_count as u64);
            h = mix(h, a.aromatic as u64);
            h = mix(h, a.isotope.unwrap_or(0) as u64);
            h
        })
        .collect();
    for &h in &env {
        set_bit(h);
    }

    for _round in 0..radius {
        let mut next = alloc::vec![0u64; n];
        for i in 0..n {
            let mut contributions: Vec<u64> = m
                .neighbors(i)
                .iter()
                .map(|&(j, bi)| mix(m.bonds[bi].order as u64 + 1, env[j]))
                .collect();
            contributions.sort_unstable();
            let mut h = mix(0x100000001b3, env[i]);
            for c in contributions {
                h = mix(h, c);
            }
            next[i] = h;
        }
        env = next;
        for &h in &env {
            set_bit(h);
        }
    }

    Fingerprint {
        bits,
        nbits,
        radius,
    }
}

/// Fingerprint with the default radius 2 and width 2048.
pub fn fingerprint_default(m: &Molecule) -> Fingerprint {
    fingerprint(m, 2, 2048)
}

/// Intersection over union of the two bit sets; 1.0 when both are empty.
pub fn tanimoto(a: &Fingerprint, b: &Fingerprint) -> Result<f64, ChemError> {
    if a.nbits != b.nbits {
        return Err(ChemError::WidthMismatch);
    }
    let mut inter = 0u32;
    let mut union = 0u32;
    for (x, y) in a.bits.iter().zip(b.bits.iter()) {
        inter += (x & y).count_ones();
        union += (x | y).count_ones();
    }
    if union == 0 {
        Ok(1.0)
    } else {
        Ok(inter as f64 / union as f64)
    }
}
