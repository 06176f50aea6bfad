//! Randomized structural properties of the chemistry layer.

use mtf_core::chem::molgen::{random_molecule, random_permutation};
use mtf_core::chem::{
    canonical_smiles, fingerprint, parse_smiles, tanimoto, Element, Molecule,
};
use mtf_core::rng::Rng;

fn element_counts(m: &Molecule) -> std::collections::BTreeMap<Element, usize> {
    let mut counts = std::collections::BTreeMap::new();
    for a in &m.atoms {
        *counts.entry(a.element).or_insert(0) += 1;
    }
    counts
}

#[test]
fn canonicalization_invariant_under_relabeling_1000_cases() {
    let mut rng = Rng::new(0xC0FFEE);
    let mut failures = 0usize;
    let mut cases = 0usize;
    while cases < 1000 {
        let m = random_molecule(&mut rng, 15);
        let reference = canonical_smiles(&m);
        for _ in 0..4 {
            let perm = random_permutation(&mut rng, m.atoms.len());
            let permuted = m.permuted(&perm).unwrap();
            if canonical_smiles(&permuted) != reference {
                failures += 1;
            }
            cases += 1;
            if cases == 1000 {
                break;
            }
        }
    }
    assert_eq!(failures, 0, "canonicalization broke under relabeling");
}

#[test]
fn aromatic_fixtures_invariant_under_relabeling() {
    let fixtures = [
        "c1ccccc1",
        "c1ccncc1",
        "c1ccc2ccccc2c1",
        "c1ccoc1",
        "c1cc[nH]c1",
        "Cc1ccccc1",
        "c1ccccc1-c1ccccc1",
        "O=C(Nc1ccccc1)c1ccccc1",
    ];
    let mut rng = Rng::new(7);
    for s in fixtures {
        let m = parse_smiles(s).unwrap();
        let reference = canonical_smiles(&m);
        for _ in 0..25 {
            let perm = random_permutation(&mut rng, m.atoms.len());
            let permuted = m.permuted(&perm).unwrap();
            assert_eq!(canonical_smiles(&permuted), reference, "fixture {s}");
        }
    }
}

#[test]
fn parse_canonical_round_trip_is_isomorphic() {
    let mut rng = Rng::new(0xBEEF);
    for _ in 0..300 {
        let m = random_molecule(&mut rng, 15);
        let s = canonical_smiles(&m);
        let back = parse_smiles(&s).unwrap_or_else(|e| panic!("{s} failed to re-parse: {e}"));
        assert_eq!(canonical_smiles(&back), s, "round trip for {s}");
        assert_eq!(element_counts(&back), element_counts(&m));
        let h_total: usize = m.atoms.iter().map(|a| a.h_count as usize).sum();
        let h_back: usize = back.atoms.iter().map(|a| a.h_count as usize).sum();
        assert_eq!(h_total, h_back, "hydrogen counts drifted for {s}");
    }
}

#[test]
fn fingerprint_isomorphism_and_tanimoto_bounds() {
    let mut rng = Rng::new(0xFACE);
    for _ in 0..200 {
        let m = random_molecule(&mut rng, 12);
        let perm = random_permutation(&mut rng, m.atoms.len());
        let p = m.permuted(&perm).unwrap();
        let fa = fingerprint(&m, 2, 2048);
        let fb = fingerprint(&p, 2, 2048);
        assert_eq!(fa, fb);

        let other = random_molecule(&mut rng, 12);
        let fo = fingerprint(&other, 2, 2048);
        let t = tanimoto(&fa, &fo).unwrap();
        assert!((0.0..=1.0).contains(&t));
        let t_sym = tanimoto(&fo, &fa).unwrap();
        assert_eq!(t, t_sym);
        assert_eq!(tanimoto(&fa, &fa).unwrap(), 1.0);
    }
}
