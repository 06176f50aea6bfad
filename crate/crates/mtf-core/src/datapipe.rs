//! Affinity conversion, aggregation, labeling, and dataset assembly rules.
//!
//! Thresholds: at most 100 nM is active, above 10000 nM is inactive, the
//! gray zone (100, 10000] is discarded. Ki and Kd convert to IC50 by a
//! factor of two; IC50 and EC50 pass through unchanged, so a Ki of 50 nM
//! lands exactly on the active boundary.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::chem::{canonical_smiles, parse_smiles_counting_stereo};
use crate::math;
use crate::seqalign::Split;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureKind {
    Ki,
    Kd,
    Ic50,
    Ec50,
}

impl MeasureKind {
    pub fn from_str(s: &str) -> Option<MeasureKind> {
        match s {
            "Ki" | "ki" | "KI" => Some(MeasureKind::Ki),
            "Kd" | "kd" | "KD" => Some(MeasureKind::Kd),
            "IC50" | "ic50" => Some(MeasureKind::Ic50),
            "EC50" | "ec50" => Some(MeasureKind::Ec50),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MeasureKind::Ki => "Ki",
            MeasureKind::Kd => "Kd",
            MeasureKind::Ic50 => "IC50",
            MeasureKind::Ec50 => "EC50",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffinityMeasurement {
    pub kind: MeasureKind,
    pub value_nm: f64,
}

/// Ki and Kd are doubled; IC50/EC50 pass through.
pub fn to_ic50(m: &AffinityMeasurement) -> f64 {
    match m.kind {
        MeasureKind::Ki | MeasureKind::Kd => 2.0 * m.value_nm,
        MeasureKind::Ic50 | MeasureKind::Ec50 => m.value_nm,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PipeError {
    EmptyMeasurements,
}

impl core::fmt::Display for PipeError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            PipeError::EmptyMeasurements => write!(f, "no measurements to aggregate"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for PipeError {}

/// Geometric mean of the converted IC50 values. A single measurement
/// passes through exactly (no exp/ln rounding), which matters when a
/// doubled Ki lands on the active boundary.
pub fn aggregate(ms: &[AffinityMeasurement]) -> Result<f64, PipeError> {
    match ms {
        [] => Err(PipeError::EmptyMeasurements),
        [only] => Ok(to_ic50(only)),
        _ => {
            let log_sum: f64 = ms.iter().map(|m| math::ln(to_ic50(m))).sum();
            Ok(math::exp(log_sum / ms.len() as f64))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Label {
    Active,
    Inactive,
    Discarded,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Active => "active",
            Label::Inactive => "inactive",
            Label::Discarded => "discarded",
        }
    }
}

/// Inclusive active boundary (a doubled Ki of 50 nM is active); the upper
/// boundary stays strict, so exactly 10000 nM is still gray zone.
pub fn label(score_nm: f64) -> Label {
    if score_nm <= 100.0 {
        Label::Active
    } else if score_nm > 10000.0 {
        Label::Inactive
    } else {
        Label::Discarded
    }
}

/// One raw input row: a single measurement of a protein-ligand pair.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRow {
    pub protein_id: String,
    pub sequence: String,
    pub n_chains: u32,
    pub family: String,
    pub smiles: String,
    pub measure: Option<AffinityMeasurement>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum DropReason {
    MissingProtein,
    MissingSmiles,
    Multichain,
    NoMeasurement,
    BadMeasurement,
    UnparseableSmiles,
    MissingSplit,
    GrayZoneLabel,
}

impl DropReason {
    pub fn as_str(self) -> &'static str {
        match self {
            DropReason::MissingProtein => "missing_protein",
            DropReason::MissingSmiles => "missing_smiles",
            DropReason::Multichain => "multichain",
            DropReason::NoMeasurement => "no_measurement",
            DropReason::BadMeasurement => "bad_measurement",
            DropReason::UnparseableSmiles => "unparseable_smiles",
            DropReason::MissingSplit => "missing_split",
            DropReason::GrayZoneLabel => "gray_zone_label",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairRecord {
    pub split: Split,
    pub protein_id: String,
    pub sequence: String,
    /// Canonical form; every emitted SMILES re-parses and equals it.
    pub smiles: String,
    pub score_nm: f64,
}

#[derive(Debug, Clone, Default)]
pub struct DatasetBuild {
    pub active: Vec<PairRecord>,
    pub inactive: Vec<PairRecord>,
    /// Deduplicated canonical SMILES of training-set active ligands,
    /// lexicographically sorted.
    pub ligand_corpus: Vec<String>,
    pub drops: BTreeMap<DropReason, u64>,
    pub label_counts: BTreeMap<Label, u64>,
    pub stereo_warnings: u64,
    pub input_rows: u64,
    pub retained_rows: u64,
}

/// The chain separator marking a multichain record inside a sequence field.
pub const CHAIN_SEPARATOR: char = '.';

/// Filter rows, group measurements per (protein, canonical ligand),
/// aggregate and label, and assemble per-split pair lists. Row-level drops
/// are histogrammed; `input_rows - retained_rows` equals the histogram sum.
pub fn build_dataset(
    rows: &[RawRow],
    split: &BTreeMap<String, Split>,
) -> Result<DatasetBuild, PipeError> {
    let mut out = DatasetBuild {
        input_rows: rows.len() as u64,
        ..DatasetBuild::default()
    };
    let drop = |reason: DropReason, drops: &mut BTreeMap<DropReason, u64>| {
        *drops.entry(reason).or_insert(0) += 1;
    };

    // (protein_id, canonical smiles) -> (sequence, split, measurements, rows)
    type GroupKey = (String, String);
    let mut groups: BTreeMap<GroupKey, (String, Split, Vec<AffinityMeasurement>, u64)> =
        BTreeMap::new();

    for row in rows {
        if row.protein_id.is_empty() || row.sequence.is_empty() {
            drop(DropReason::MissingProtein, &mut out.drops);
            continue;
        }
        if row.smiles.is_empty() {
            drop(DropReason::MissingSmiles, &mut out.drops);
            continue;
        }
        if row.n_chains > 1 || row.sequence.contains(CHAIN_SEPARATOR) {
            drop(DropReason::Multichain, &mut out.drops);
            continue;
        }
        let Some(measure) = row.measure else {
            drop(DropReason::NoMeasurement, &mut out.drops);
            continue;
        };
        if !(measure.value_nm > 0.0 && measure.value_nm.is_finite()) {
            drop(DropReason::BadMeasurement, &mut out.drops);
            continue;
        }
        let Some(&protein_split) = split.get(&row.protein_id) else {
            drop(DropReason::MissingSplit, &mut out.drops);
            continue;
        };
        let canonical = match parse_smiles_counting_stereo(&row.smiles) {
            Ok((m, stereo)) => {
                out.stereo_warnings += stereo as u64;
                canonical_smiles(&m)
            }
            Err(_) => {
                drop(DropReason::UnparseableSmiles, &mut out.drops);
                continue;
            }
        };
        let entry = groups
            .entry((row.protein_id.clone(), canonical))
            .or_insert_with(|| (row.sequence.clone(), protein_split, Vec::new(), 0));
        entry.2.push(measure);
        entry.3 += 1;
    }

    let mut corpus: alloc::collections::BTreeSet<String> = alloc::collections::BTreeSet::new();
    for ((protein_id, smiles), (sequence, protein_split, measures, n_rows)) in groups {
        let score = aggregate(&measures)?;
        let lab = label(score);
        *out.label_counts.entry(lab).or_insert(0) += 1;
        match lab {
            Label::Active => {
                out.retained_rows += n_rows;
                if protein_split == Split::Train {
                    corpus.insert(smiles.clone());
                }
                out.active.push(PairRecord {
                    split: protein_split,
                    protein_id,
                    sequence,
                    smiles,
                    score_nm: score,
                });
            }
            Label::Inactive => {
                out.retained_rows += n_rows;
                out.inactive.push(PairRecord {
                    split: protein_split,
                    protein_id,
                    sequence,
                    smiles,
                    score_nm: score,
                });
            }
            Label::Discarded => {
                *out.drops.entry(DropReason::GrayZoneLabel).or_insert(0) += n_rows;
            }
        }
    }
    out.ligand_corpus = corpus.into_iter().collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn m(kind: MeasureKind, value_nm: f64) -> AffinityMeasurement {
        AffinityMeasurement { kind, value_nm }
    }

    #[test]
    fn conversion_factor_two_for_ki_and_kd() {
        assert_eq!(to_ic50(&m(MeasureKind::Ki, 50.0)), 100.0);
        assert_eq!(to_ic50(&m(MeasureKind::Kd, 5000.0)), 10000.0);
        assert_eq!(to_ic50(&m(MeasureKind::Ic50, 70.0)), 70.0);
        assert_eq!(to_ic50(&m(MeasureKind::Ec50, 70.0)), 70.0);
    }

    #[test]
    fn aggregate_geometric_mean() {
        assert!((aggregate(&[m(MeasureKind::Ic50, 100.0)]).unwrap() - 100.0).abs() < 1e-12);
        let g = aggregate(&[m(MeasureKind::Ic50, 10.0), m(MeasureKind::Ic50, 1000.0)]).unwrap();
        assert!((g - 100.0).abs() < 1e-12, "sqrt(10*1000) = 100, got {g}");
        // Ki 50 converts to 100; geometric mean with IC50 100 is 100.
        let g = aggregate(&[m(MeasureKind::Ki, 50.0), m(MeasureKind::Ic50, 100.0)]).unwrap();
        assert!((g - 100.0).abs() < 1e-12);
        assert_eq!(aggregate(&[]), Err(PipeError::EmptyMeasurements));
    }

    #[test]
    fn labeling_thresholds() {
        assert_eq!(label(99.9), Label::Active);
        assert_eq!(label(100.0), Label::Active); // doubled Ki 50
        assert_eq!(label(100.1), Label::Discarded);
        assert_eq!(label(5000.0), Label::Discarded);
        assert_eq!(label(10000.0), Label::Discarded);
        assert_eq!(label(10000.1), Label::Inactive);
    }

    #[test]
    fn label_monotone_in_score() {
        let scores = [1.0, 50.0, 99.99, 100.0, 101.0, 9999.0, 10000.0, 10001.0, 1e6];
        for w in scores.windows(2) {
            if label(w[1]) == Label::Active {
                assert_eq!(label(w[0]), Label::Active);
            }
        }
    }

    fn raw(protein: &str, smiles: &str, measure: Option<AffinityMeasurement>) -> RawRow {
        RawRow {
            protein_id: protein.to_string(),
            sequence: "MKVLAW".to_string(),
            n_chains: 1,
            family: "F1".to_string(),
            smiles: smiles.to_string(),
            measure,
        }
    }

    fn split_map() -> BTreeMap<String, Split> {
        let mut map = BTreeMap::new();
        map.insert("P1".to_string(), Split::Train);
        map.insert("P2".to_string(), Split::Test);
        map
    }

    #[test]
    fn rows_with_problems_are_dropped_with_reasons() {
        let rows = vec![
            raw("", "CCO", Some(m(MeasureKind::Ki, 10.0))),
            raw("P1", "", Some(m(MeasureKind::Ki, 10.0))),
            raw("P1", "C1CC", Some(m(MeasureKind::Ki, 10.0))),
            raw("P1", "CCO", None),
            raw("P1", "CCO", Some(m(MeasureKind::Ki, -4.0))),
            raw("UNKNOWN", "CCO", Some(m(MeasureKind::Ki, 10.0))),
            raw("P1", "CCO", Some(m(MeasureKind::Ki, 10.0))),
        ];
        let build = build_dataset(&rows, &split_map()).unwrap();
        assert_eq!(build.active.len(), 1);
        assert_eq!(build.drops[&DropReason::MissingProtein], 1);
        assert_eq!(build.drops[&DropReason::MissingSmiles], 1);
        assert_eq!(build.drops[&DropReason::UnparseableSmiles], 1);
        assert_eq!(build.drops[&DropReason::NoMeasurement], 1);
        assert_eq!(build.drops[&DropReason::BadMeasurement], 1);
        assert_eq!(build.drops[&DropReason::MissingSplit], 1);
        let dropped: u64 = build.drops.values().sum();
        assert_eq!(dropped, build.input_rows - build.retained_rows);
    }

    #[test]
    fn multichain_detection() {
        let mut row = raw("P1", "CCO", Some(m(MeasureKind::Ki, 10.0)));
        row.n_chains = 2;
        let build = build_dataset(&[row], &split_map()).unwrap();
        assert_eq!(build.drops[&DropReason::Multichain], 1);

        let mut row = raw("P1", "CCO", Some(m(MeasureKind::Ki, 10.0)));
        row.sequence = "MKVL.AW".to_string();
        let build = build_dataset(&[row], &split_map()).unwrap();
        assert_eq!(build.drops[&DropReason::Multichain], 1);
    }

    #[test]
    fn duplicate_pair_rows_aggregate() {
        // sqrt(50 * 150) = 86.60... < 100 so the pair is active.
        let rows = vec![
            raw("P1", "CCO", Some(m(MeasureKind::Ic50, 50.0))),
            raw("P1", "OCC", Some(m(MeasureKind::Ic50, 150.0))),
        ];
        let build = build_dataset(&rows, &split_map()).unwrap();
        assert_eq!(build.active.len(), 1);
        let rec = &build.active[0];
        assert!((rec.score_nm - 86.60254037844386).abs() < 1e-9);
        assert_eq!(build.retained_rows, 2);
        // The two spellings collapse onto one canonical ligand.
        assert_eq!(build.ligand_corpus.len(), 1);
    }

    #[test]
    fn ki_ten_is_active_after_conversion() {
        let rows = vec![raw("P2", "CCO", Some(m(MeasureKind::Ki, 10.0)))];
        let build = build_dataset(&rows, &split_map()).unwrap();
        assert_eq!(build.active.len(), 1);
        assert_eq!(build.active[0].split, Split::Test);
        assert!((build.active[0].score_nm - 20.0).abs() < 1e-12);
        // Test-split ligands do not enter the training corpus.
        assert!(build.ligand_corpus.is_empty());
    }

    #[test]
    fn gray_zone_pairs_counted_not_emitted() {
        let rows = vec![raw("P1", "CCO", Some(m(MeasureKind::Ic50, 5000.0)))];
        let build = build_dataset(&rows, &split_map()).unwrap();
        assert!(build.active.is_empty());
        assert!(build.inactive.is_empty());
        assert_eq!(build.drops[&DropReason::GrayZoneLabel], 1);
        assert_eq!(build.label_counts[&Label::Discarded], 1);
    }

    #[test]
    fn emitted_smiles_are_canonical() {
        let rows = vec![raw("P1", "OCC", Some(m(MeasureKind::Ki, 1.0)))];
        let build = build_dataset(&rows, &split_map()).unwrap();
        let s = &build.active[0].smiles;
        let reparsed = crate::chem::parse_smiles(s).unwrap();
        assert_eq!(&canonical_smiles(&reparsed), s);
    }
}
