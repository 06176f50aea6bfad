//! Molecule-set benchmark metrics: validity/uniqueness/novelty/filter
//! rates, nearest-neighbor similarity, internal diversity, scaffold and
//! fragment frequency cosines, the Fréchet distance over descriptor
//! embeddings, Jensen-Shannon distance between score distributions, and
//! the per-protein report.

mod frechet;
pub mod linalg;

pub use frechet::{frechet_distance, MetricError};

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::chem::{
    canonical_smiles, fingerprint_default, parse_smiles, passes_filters, tanimoto, BondOrder,
    Element, Fingerprint, Molecule,
};
use crate::frag::{brics_fragments, murcko_scaffold};
use crate::math;
use crate::rng::Rng;

/// Fraction metrics over a generated SMILES list against a canonical-form
/// training set.
#[derive(Debug, Clone, PartialEq)]
pub struct BasicRates {
    pub valid: f64,
    pub unique: f64,
    pub novel: f64,
    pub filters: f64,
    pub n_total: usize,
    pub n_valid: usize,
}

/// valid = parseable fraction; unique = distinct canonical over valid;
/// novel = distinct canonical absent from the training set over distinct;
/// filters = filter-passing fraction of valid.
pub fn basic_rates(
    generated: &[String],
    training_set: &alloc::collections::BTreeSet<String>,
) -> Result<BasicRates, MetricError> {
    if generated.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let mut n_valid = 0usize;
    let mut n_filters = 0usize;
    let mut canon: Vec<String> = Vec::new();
    for s in generated {
        match parse_smiles(s) {
            Ok(m) => {
                n_valid += 1;
                if passes_filters(&m) {
                    n_filters += 1;
                }
                canon.push(canonical_smiles(&m));
            }
            Err(_) => {}
        }
    }
    let mut distinct: Vec<&String> = canon.iter().collect();
    distinct.sort();
    distinct.dedup();
    let n_distinct = distinct.len();
    let n_novel = distinct
        .iter()
        .filter(|s| !training_set.contains(s.as_str()))
        .count();

    Ok(BasicRates {
        valid: n_valid as f64 / generated.len() as f64,
        unique: if n_valid == 0 {
            0.0
        } else {
            n_distinct as f64 / n_valid as f64
        },
        novel: if n_distinct == 0 {
            0.0
        } else {
            n_novel as f64 / n_distinct as f64
        },
        filters: if n_valid == 0 {
            0.0
        } else {
            n_filters as f64 / n_valid as f64
        },
        n_total: generated.len(),
        n_valid,
    })
}

fn fingerprints(set: &[Molecule]) -> Vec<Fingerprint> {
    set.iter().map(fingerprint_default).collect()
}

/// Mean over the generated set of the maximum Tanimoto similarity to the
/// reference set.
pub fn snn(generated: &[Molecule], reference: &[Molecule]) -> Result<f64, MetricError> {
    if generated.is_empty() || reference.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let fg = fingerprints(generated);
    let fr = fingerprints(reference);
    let mut total = 0.0;
    for g in &fg {
        let mut best: f64 = 0.0;
        for r in &fr {
            let t = tanimoto(g, r).expect("uniform fingerprint width");
            if t > best {
                best = t;
            }
        }
        total += best;
    }
    Ok(total / fg.len() as f64)
}

/// Internal diversity: 1 - (mean over ordered pairs, self-pairs included,
/// of tanimoto^p)^(1/p).
pub fn int_div(set: &[Molecule], p: u32) -> f64 {
    if set.is_empty() {
        return 0.0;
    }
    let fps = fingerprints(set);
    let n = fps.len();
    let mut total = 0.0;
    for a in &fps {
        for b in &fps {
            let t = tanimoto(a, b).expect("uniform fingerprint width");
            total += libm::pow(t, p as f64);
        }
    }
    let mean = total / (n * n) as f64;
    1.0 - libm::pow(mean, 1.0 / p as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreqKind {
    Scaffold,
    Fragment,
}

fn freq_vector(set: &[Molecule], kind: FreqKind) -> BTreeMap<String, f64> {
    let mut counts: BTreeMap<String, f64> = BTreeMap::new();
    for m in set {
        match kind {
            FreqKind::Scaffold => {
                *counts.entry(murcko_scaffold(m).0).or_insert(0.0) += 1.0;
            }
            FreqKind::Fragment => {
                for (key, count) in brics_fragments(m).counts() {
                    *counts.entry(key.clone()).or_insert(0.0) += *count as f64;
                }
            }
        }
    }
    counts
}

/// Cosine similarity between scaffold or fragment frequency vectors over
/// the union of keys; zero if either vector is all-zero.
pub fn freq_cosine_sim(
    generated: &[Molecule],
    reference: &[Molecule],
    kind: FreqKind,
) -> Result<f64, MetricError> {
    if generated.is_empty() || reference.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let a = freq_vector(generated, kind);
    let b = freq_vector(reference, kind);
    let mut dot = 0.0;
    for (key, va) in &a {
        if let Some(vb) = b.get(key) {
            dot += va * vb;
        }
    }
    let na: f64 = a.values().map(|v| v * v).sum();
    let nb: f64 = b.values().map(|v| v * v).sum();
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    Ok(dot / (math::sqrt(na) * math::sqrt(nb)))
}

/// Embedding dimension of `descriptor_embed`.
pub const EMBED_DIM: usize = 64;

/// Identifier recorded in reports; absolute Fréchet values are only
/// comparable within one embedder.
pub const EMBEDDER_ID: &str = "desc-v1";

/// Deterministic 64-dimensional descriptor embedding.
///
/// Layout: `[0..9)` element counts (C,N,O,S,F,Cl,Br,P,other); `[9..13)`
/// bond order counts (single,double,triple,aromatic); `[13]` ring count;
/// `[14]` largest ring size; `[15]` heavy atom count; `[16]` molecular
/// weight / 100; `[16..64)` fingerprint popcount buckets (bit index
/// mod 48).
pub fn descriptor_embed(m: &Molecule) -> Vec<f64> {
    let mut v = alloc::vec![0.0f64; EMBED_DIM];
    for atom in &m.atoms {
        let slot = match atom.element {
            Element::C => 0,
            Element::N => 1,
            Element::O => 2,
            Element::S => 3,
            Element::F => 4,
            Element::Cl => 5,
            Element::Br => 6,
            Element::P => 7,
            _ => 8,
        };
        v[slot] += 1.0;
    }
    for bond in &m.bonds {
        let slot = match bond.order {
            BondOrder::Single => 9,
            BondOrder::Double => 10,
            BondOrder::Triple => 11,
            BondOrder::Aromatic => 12,
        };
        v[slot] += 1.0;
    }
    v[13] = m.rings.len() as f64;
    v[14] = m.rings.iter().map(|r| r.len()).max().unwrap_or(0) as f64;
    v[15] = m.heavy_atom_count() as f64;
    v[16] = m.molecular_weight() / 100.0;
    let fp = fingerprint_default(m);
    for bit in 0..fp.nbits() {
        if fp.get(bit) {
            v[16 + (bit % 48)] += 1.0;
        }
    }
    v
}

/// Jensen-Shannon distance between two score samples: 20 shared
/// equal-width bins over the pooled range, epsilon smoothing, base-2
/// logarithms, square root of the divergence.
pub fn jsd(scores_a: &[f64], scores_b: &[f64]) -> Result<f64, MetricError> {
    if scores_a.is_empty() || scores_b.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    const BINS: usize = 20;
    const EPS: f64 = 1e-10;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in scores_a.iter().chain(scores_b.iter()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let width = if hi > lo { (hi - lo) / BINS as f64 } else { 1.0 };
    let histogram = |xs: &[f64]| -> Vec<f64> {
        let mut h = alloc::vec![EPS; BINS];
        for &v in xs {
            let idx = (((v - lo) / width) as usize).min(BINS - 1);
            h[idx] += 1.0;
        }
        let total: f64 = h.iter().sum();
        for b in h.iter_mut() {
            *b /= total;
        }
        h
    };
    let p = histogram(scores_a);
    let q = histogram(scores_b);
    let mut divergence = 0.0;
    for i in 0..BINS {
        let m = 0.5 * (p[i] + q[i]);
        if p[i] > 0.0 {
            divergence += 0.5 * p[i] * math::log2(p[i] / m);
        }
        if q[i] > 0.0 {
            divergence += 0.5 * q[i] * math::log2(q[i] / m);
        }
    }
    Ok(math::sqrt(divergence.clamp(0.0, 1.0)))
}

/// One row of the per-protein evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ProteinRow {
    pub protein_id: String,
    pub fcd: f64,
    pub snn: f64,
    pub n_generated: usize,
    pub n_reference: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProteinReport {
    /// Per test protein: generated set vs its actives.
    pub rows: Vec<ProteinRow>,
    /// Per train protein: a seeded 20-compound sample vs its remaining
    /// actives (the reference distribution).
    pub reference: Vec<ProteinRow>,
    /// Proteins skipped for insufficient data, with a reason.
    pub skipped: Vec<(String, String)>,
}

/// Actives required before a train protein can anchor the reference
/// distribution (20 sampled + at least 2 left over).
pub const REFERENCE_MIN_ACTIVES: usize = 22;
pub const REFERENCE_SAMPLE: usize = 20;

/// Per-protein Fréchet/SNN tables plus the train-side reference
/// distribution, all deterministic in (inputs, seed).
pub fn protein_report(
    generated: &BTreeMap<String, Vec<Molecule>>,
    actives: &BTreeMap<String, Vec<Molecule>>,
    train_reference: &BTreeMap<String, Vec<Molecule>>,
    seed: u64,
) -> ProteinReport {
    let mut report = ProteinReport::default();

    for (protein, gen_set) in generated {
        let Some(active_set) = actives.get(protein) else {
            report
                .skipped
                .push((protein.clone(), "no actives listed".into()));
            continue;
        };
        if gen_set.len() < 2 || active_set.len() < 2 {
            report
                .skipped
                .push((protein.clone(), "fewer than 2 molecules on a side".into()));
            continue;
        }
        let ex: Vec<Vec<f64>> = gen_set.iter().map(descriptor_embed).collect();
        let ey: Vec<Vec<f64>> = active_set.iter().map(descriptor_embed).collect();
        match (frechet_distance(&ex, &ey), snn(gen_set, active_set)) {
            (Ok(fcd), Ok(snn_v)) => report.rows.push(ProteinRow {
                protein_id: protein.clone(),
                fcd,
                snn: snn_v,
                n_generated: gen_set.len(),
                n_reference: active_set.len(),
            }),
            _ => report
                .skipped
                .push((protein.clone(), "metric computation failed".into())),
        }
    }

    for (protein, active_set) in train_reference {
        if active_set.len() < REFERENCE_MIN_ACTIVES {
            report
                .skipped
                .push((protein.clone(), "reference needs 22 actives".into()));
            continue;
        }
        let mut rng = Rng::for_key(seed, &alloc::format!("protein-ref/{protein}"));
        let picked = rng.sample_indices(active_set.len(), REFERENCE_SAMPLE);
        let picked_set: alloc::collections::BTreeSet<usize> = picked.into_iter().collect();
        let sample: Vec<Molecule> = picked_set
            .iter()
            .map(|&i| active_set[i].clone())
            .collect();
        let rest: Vec<Molecule> = (0..active_set.len())
            .filter(|i| !picked_set.contains(i))
            .map(|i| active_set[i].clone())
            .collect();
        let ex: Vec<Vec<f64>> = sample.iter().map(descriptor_embed).collect();
        let ey: Vec<Vec<f64>> = rest.iter().map(descriptor_embed).collect();
        match (frechet_distance(&ex, &ey), snn(&sample, &rest)) {
            (Ok(fcd), Ok(snn_v)) => report.reference.push(ProteinRow {
                protein_id: protein.clone(),
                fcd,
                snn: snn_v,
                n_generated: sample.len(),
                n_reference: rest.len(),
            }),
            _ => report
                .skipped
                .push((protein.clone(), "metric computation failed".into())),
        }
    }

    report
}
