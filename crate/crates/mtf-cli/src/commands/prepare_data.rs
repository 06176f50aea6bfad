//! `prepare-data`: filter and label raw interactions, emit per-split pair
//! files, the training ligand corpus, and the drop report.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;

use mtf_core::datapipe::{build_dataset, Label};
use mtf_core::seqalign::Split;

use super::{required_path, Ctx};
use crate::manifest::ManifestBuilder;
use crate::{info, io::tsv, io_runtime, require_file, CliError};

pub struct Args {
    pub raw: Option<PathBuf>,
    pub split: Option<PathBuf>,
    pub outdir: Option<PathBuf>,
}

#[derive(Serialize)]
struct DropReport {
    input_rows: u64,
    retained_rows: u64,
    drops: BTreeMap<String, u64>,
    labels: BTreeMap<String, u64>,
    stereo_warnings: u64,
    emitted_pairs: BTreeMap<String, usize>,
    notes: Vec<String>,
}

pub fn run(args: Args, ctx: &Ctx) -> Result<(), CliError> {
    let raw_path = required_path(args.raw, &ctx.cfg.paths.raw, "raw interactions table")?;
    let split_path = required_path(args.split, &ctx.cfg.paths.split, "split assignment")?;
    let outdir = required_path(args.outdir, &ctx.cfg.paths.data_dir, "output directory")?;
    require_file(&raw_path)?;
    require_file(&split_path)?;
    std::fs::create_dir_all(&outdir).map_err(|e| io_runtime("creating output directory", e))?;

    let rows = tsv::read_raw_interactions(&raw_path)?;
    let split = tsv::read_split(&split_path)?;
    info!(command = "prepare-data", input_rows = rows.len());

    let build = build_dataset(&rows, &split)
        .map_err(|e| CliError::runtime(format!("dataset assembly failed: {e}")))?;

    // Pair records sorted by (protein, smiles) for reproducible files.
    let mut emitted: BTreeMap<String, usize> = BTreeMap::new();
    let mut files = Vec::new();
    for (split_kind, name) in [
        (Split::Train, "train.tsv"),
        (Split::Validation, "valid.tsv"),
        (Split::Test, "test.tsv"),
    ] {
        let mut rows: Vec<tsv::PairRow> = build
            .active
            .iter()
            .filter(|r| r.split == split_kind)
            .map(|r| tsv::PairRow {
                protein_id: r.protein_id.clone(),
                sequence: r.sequence.clone(),
                smiles: r.smiles.clone(),
            })
            .collect();
        rows.sort_by(|a, b| (&a.protein_id, &a.smiles).cmp(&(&b.protein_id, &b.smiles)));
        emitted.insert(name.trim_end_matches(".tsv").to_string(), rows.len());
        let path = outdir.join(name);
        tsv::write_pairs(&path, &rows)?;
        files.push(path);
    }

    // Inactive pairs go to a side file, unused by training.
    let mut inactive: Vec<tsv::PairRow> = build
        .inactive
        .iter()
        .map(|r| tsv::PairRow {
            protein_id: r.protein_id.clone(),
            sequence: r.sequence.clone(),
            smiles: r.smiles.clone(),
        })
        .collect();
    inactive.sort_by(|a, b| (&a.protein_id, &a.smiles).cmp(&(&b.protein_id, &b.smiles)));
    emitted.insert("inactive".into(), inactive.len());
    let inactive_path = outdir.join("inactive.tsv");
    tsv::write_pairs(&inactive_path, &inactive)?;
    files.push(inactive_path);

    let corpus_path = outdir.join("ligand_corpus.txt");
    tsv::write_lines(&corpus_path, &build.ligand_corpus)?;
    files.push(corpus_path);

    let report = DropReport {
        input_rows: build.input_rows,
        retained_rows: build.retained_rows,
        drops: build
            .drops
            .iter()
            .map(|(k, v)| (k.as_str().to_string(), *v))
            .collect(),
        labels: [Label::Active, Label::Inactive, Label::Discarded]
            .iter()
            .map(|l| {
                (
                    l.as_str().to_string(),
                    *build.label_counts.get(l).unwrap_or(&0),
                )
            })
            .collect(),
        stereo_warnings: build.stereo_warnings,
        emitted_pairs: emitted,
        notes: vec![
            "labels use strict thresholds: active < 100 nM, inactive > 10000 nM".into(),
            "Ki and Kd converted to IC50 by a factor of 2 before aggregation".into(),
        ],
    };
    let report_path = outdir.join("drop_report.json");
    std::fs::write(
        &report_path,
        serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::runtime(format!("report: {e}")))?,
    )
    .map_err(|e| io_runtime("writing drop report", e))?;
    files.push(report_path);

    let mut manifest =
        ManifestBuilder::new("prepare-data", &ctx.config_text, ctx.cfg.seed_map(), ctx.threads);
    manifest.input(&raw_path)?;
    manifest.input(&split_path)?;
    for f in &files {
        manifest.output(f)?;
    }
    manifest.write(&outdir.join("manifest.json"))?;
    info!(
        command = "prepare-data",
        active = build.active.len(),
        inactive = build.inactive.len(),
        corpus = build.ligand_corpus.len()
    );
    Ok(())
}
