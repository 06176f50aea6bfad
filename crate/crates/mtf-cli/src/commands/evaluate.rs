//! `evaluate`: benchmark metrics, per-protein score tables, and JSD rows
//! for one or more generated-molecule files.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use mtf_core::chem::{canonical_smiles, parse_smiles, Molecule};
use mtf_core::metrics::{
    basic_rates, descriptor_embed, frechet_distance, freq_cosine_sim, int_div, jsd,
    protein_report, snn, FreqKind, EMBEDDER_ID,
};

use super::{required_seed, Ctx};
use crate::manifest::{manifest_path_for, ManifestBuilder};
use crate::report::{
    validate_eval_report, EvalMetadata, EvalReport, JsdRow, MetricsRow, ProteinScoreRow,
    ReferenceScoreRow,
};
use crate::{info, io::tsv, io_runtime, require_file, warn_log, CliError};

/// One generated-molecules input: model label, decoding label, path.
#[derive(Debug, Clone)]
pub struct GeneratedSpec {
    pub model: String,
    pub decoding: String,
    pub path: PathBuf,
}

impl GeneratedSpec {
    /// Parses `model:decoding=path`; a bare path gets the default labels
    /// `model:beam`.
    pub fn parse(s: &str) -> Result<GeneratedSpec, CliError> {
        let Some((label, path)) = s.split_once('=') else {
            return Ok(GeneratedSpec {
                model: "model".into(),
                decoding: "beam".into(),
                path: PathBuf::from(s),
            });
        };
        let (model, decoding) = label.split_once(':').ok_or_else(|| {
            CliError::validation(format!(
                "bad --generated label `{label}`, expected model:decoding"
            ))
        })?;
        Ok(GeneratedSpec {
            model: model.into(),
            decoding: decoding.into(),
            path: PathBuf::from(path),
        })
    }
}

pub struct Args {
    pub generated: Vec<GeneratedSpec>,
    pub actives: PathBuf,
    pub train: PathBuf,
    pub seed: Option<u64>,
    pub out: PathBuf,
}

fn parse_or_skip(smiles: &str) -> Option<Molecule> {
    parse_smiles(smiles).ok()
}

pub fn run(args: Args, ctx: &Ctx) -> Result<(), CliError> {
    if args.generated.is_empty() {
        return Err(CliError::validation(
            "at least one --generated model:decoding=path is required",
        ));
    }
    require_file(&args.actives)?;
    require_file(&args.train)?;
    for spec in &args.generated {
        require_file(&spec.path)?;
    }
    let seed = required_seed(args.seed, ctx.cfg.seeds.eval, "evaluation")?;

    // Reference material: test actives per protein and pooled; training
    // ligand set for novelty; train actives per protein for the reference
    // distribution.
    let active_rows = tsv::read_pairs(&args.actives)?;
    let mut actives_by_protein: BTreeMap<String, Vec<Molecule>> = BTreeMap::new();
    let mut actives_pooled: Vec<Molecule> = Vec::new();
    for row in &active_rows {
        if let Some(m) = parse_or_skip(&row.smiles) {
            actives_by_protein
                .entry(row.protein_id.clone())
                .or_default()
                .push(m.clone());
            actives_pooled.push(m);
        }
    }
    let train_rows = tsv::read_pairs(&args.train)?;
    let mut training_set: BTreeSet<String> = BTreeSet::new();
    let mut train_by_protein: BTreeMap<String, Vec<Molecule>> = BTreeMap::new();
    for row in &train_rows {
        if let Some(m) = parse_or_skip(&row.smiles) {
            training_set.insert(canonical_smiles(&m));
            train_by_protein
                .entry(row.protein_id.clone())
                .or_default()
                .push(m);
        }
    }
    if actives_pooled.is_empty() {
        return Err(CliError::validation("no parseable actives"));
    }

    // Reference distribution is shared across models.
    let reference = protein_report(&BTreeMap::new(), &BTreeMap::new(), &train_by_protein, seed);
    let reference_fcd: Vec<f64> = reference.reference.iter().map(|r| r.fcd).collect();
    let reference_snn: Vec<f64> = reference.reference.iter().map(|r| r.snn).collect();

    let mut metrics_rows: Vec<MetricsRow> = Vec::new();
    let mut jsd_rows: Vec<JsdRow> = Vec::new();
    let mut per_protein: Vec<ProteinScoreRow> = Vec::new();
    let mut skipped: Vec<(String, String)> = Vec::new();

    for spec in &args.generated {
        let rows = tsv::read_generated(&spec.path)?;
        if rows.is_empty() {
            return Err(CliError::validation(format!(
                "{}: no generated molecules",
                spec.path.display()
            )));
        }
        let strings: Vec<String> = rows.iter().map(|r| r.smiles.clone()).collect();
        let rates = basic_rates(&strings, &training_set)
            .map_err(|e| CliError::runtime(format!("rates: {e}")))?;

        let mut by_protein: BTreeMap<String, Vec<Molecule>> = BTreeMap::new();
        let mut pooled: Vec<Molecule> = Vec::new();
        for row in &rows {
            if let Some(m) = parse_or_skip(&row.smiles) {
                by_protein
                    .entry(row.protein_id.clone())
                    .or_default()
                    .push(m.clone());
                pooled.push(m);
            }
        }
        if pooled.len() < 2 {
            return Err(CliError::runtime(format!(
                "{}: fewer than 2 valid molecules; metrics undefined",
                spec.path.display()
            )));
        }

        let ex: Vec<Vec<f64>> = pooled.iter().map(descriptor_embed).collect();
        let ey: Vec<Vec<f64>> = actives_pooled.iter().map(descriptor_embed).collect();
        let fcd = frechet_distance(&ex, &ey)
            .map_err(|e| CliError::runtime(format!("set-level distance: {e}")))?;
        let snn_v = snn(&pooled, &actives_pooled)
            .map_err(|e| CliError::runtime(format!("snn: {e}")))?;
        let scaf = freq_cosine_sim(&pooled, &actives_pooled, FreqKind::Scaffold)
            .map_err(|e| CliError::runtime(format!("scaffold cosine: {e}")))?;
        let frag = freq_cosine_sim(&pooled, &actives_pooled, FreqKind::Fragment)
            .map_err(|e| CliError::runtime(format!("fragment cosine: {e}")))?;

        metrics_rows.push(MetricsRow {
            model: spec.model.clone(),
            decoding: spec.decoding.clone(),
            valid: rates.valid,
            unique: rates.unique,
            novel: rates.novel,
            filters: rates.filters,
            int_div: int_div(&pooled, 1),
            fcd,
            scaf,
            frag,
            snn: snn_v,
            n_generated: rates.n_total,
            n_valid: rates.n_valid,
        });

        let report = protein_report(&by_protein, &actives_by_protein, &BTreeMap::new(), seed);
        let model_fcd: Vec<f64> = report.rows.iter().map(|r| r.fcd).collect();
        let model_snn: Vec<f64> = report.rows.iter().map(|r| r.snn).collect();
        for row in &report.rows {
            per_protein.push(ProteinScoreRow {
                protein_id: row.protein_id.clone(),
                model: spec.model.clone(),
                decoding: spec.decoding.clone(),
                fcd: row.fcd,
                snn: row.snn,
                n_generated: row.n_generated,
                n_reference: row.n_reference,
            });
        }
        for (protein, reason) in report.skipped {
            warn_log!(command = "evaluate", skipped = protein, reason = reason);
            skipped.push((protein, reason));
        }

        let (jsd_fcd, jsd_snn) = if reference_fcd.is_empty() || model_fcd.is_empty() {
            warn_log!(
                command = "evaluate",
                note = "JSD unavailable (empty protein-level distribution)"
            );
            (f64::NAN, f64::NAN)
        } else {
            (
                jsd(&model_fcd, &reference_fcd)
                    .map_err(|e| CliError::runtime(format!("jsd: {e}")))?,
                jsd(&model_snn, &reference_snn)
                    .map_err(|e| CliError::runtime(format!("jsd: {e}")))?,
            )
        };
        jsd_rows.push(JsdRow {
            model: spec.model.clone(),
            decoding: spec.decoding.clone(),
            jsd_fcd,
            jsd_snn,
        });
    }

    for (protein, reason) in reference.skipped {
        skipped.push((protein, reason));
    }

    let report = EvalReport {
        metadata: EvalMetadata {
            embedder: EMBEDDER_ID.into(),
            seed,
            n_test_proteins: actives_by_protein.len(),
            n_train_reference_proteins: reference.reference.len(),
            warnings: vec![
                "simplified filters (allowed elements, neutrality, ring size <= 8, MW 150-650)"
                    .into(),
                format!(
                    "Frechet distances use the {EMBEDDER_ID} descriptor embedder; values are not comparable to numbers published for neural embedders"
                ),
            ],
        },
        metrics: metrics_rows,
        jsd: jsd_rows,
        per_protein,
        reference_distribution: reference
            .reference
            .iter()
            .map(|r| ReferenceScoreRow {
                protein_id: r.protein_id.clone(),
                fcd: r.fcd,
                snn: r.snn,
            })
            .collect(),
        skipped,
    };

    let value =
        serde_json::to_value(&report).map_err(|e| CliError::runtime(format!("report: {e}")))?;
    validate_eval_report(&value)
        .map_err(|e| CliError::runtime(format!("report failed its schema check: {e}")))?;
    std::fs::write(
        &args.out,
        serde_json::to_string_pretty(&value).map_err(|e| CliError::runtime(format!("{e}")))?,
    )
    .map_err(|e| io_runtime("writing report", e))?;

    let mut seeds = ctx.cfg.seed_map();
    seeds.insert("eval".into(), seed);
    let mut manifest = ManifestBuilder::new("evaluate", &ctx.config_text, seeds, ctx.threads);
    manifest.input(&args.actives)?;
    manifest.input(&args.train)?;
    for spec in &args.generated {
        manifest.input(&spec.path)?;
    }
    manifest.output(&args.out)?;
    manifest.write(&manifest_path_for(&args.out))?;
    info!(command = "evaluate", out = args.out.display());
    Ok(())
}
