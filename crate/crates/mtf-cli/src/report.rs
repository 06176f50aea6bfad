//! Evaluation and docking report documents plus structural validation.
//!
//! The evaluation report mirrors the benchmark table shapes: one metrics
//! row per model and decoding method (Valid/Unique/Novel/FCD/Scaf/SNN plus
//! Frag, IntDiv, Filters), a JSD row per model and decoding method, and
//! the per-protein score tables. The docking report carries per-target
//! p/AUC for each group pairing and aggregate significance counts.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsRow {
    pub model: String,
    pub decoding: String,
    pub valid: f64,
    pub unique: f64,
    pub novel: f64,
    pub filters: f64,
    pub int_div: f64,
    pub fcd: f64,
    pub scaf: f64,
    pub frag: f64,
    pub snn: f64,
    pub n_generated: usize,
    pub n_valid: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JsdRow {
    pub model: String,
    pub decoding: String,
    pub jsd_fcd: f64,
    pub jsd_snn: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProteinScoreRow {
    pub protein_id: String,
    pub model: String,
    pub decoding: String,
    pub fcd: f64,
    pub snn: f64,
    pub n_generated: usize,
    pub n_reference: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReferenceScoreRow {
    pub protein_id: String,
    pub fcd: f64,
    pub snn: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalMetadata {
    pub embedder: String,
    pub seed: u64,
    pub n_test_proteins: usize,
    pub n_train_reference_proteins: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub metadata: EvalMetadata,
    pub metrics: Vec<MetricsRow>,
    pub jsd: Vec<JsdRow>,
    pub per_protein: Vec<ProteinScoreRow>,
    pub reference_distribution: Vec<ReferenceScoreRow>,
    pub skipped: Vec<(String, String)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairingCell {
    pub positive: String,
    pub negative: String,
    pub p_value: Option<f64>,
    pub auc: Option<f64>,
    pub n_pos: Option<usize>,
    pub n_neg: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TargetRow {
    pub target_id: String,
    pub excluded: bool,
    pub pairings: Vec<PairingCell>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DockAggregates {
    /// pairing label -> number of non-excluded targets with p < alpha.
    pub significant: BTreeMap<String, usize>,
    /// pairing label -> significant targets where AUC > 0.5.
    pub significant_auc_above_half: BTreeMap<String, usize>,
    pub n_targets: usize,
    pub n_excluded: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DockReport {
    pub alpha: f64,
    pub seed: u64,
    pub targets: Vec<TargetRow>,
    pub aggregates: DockAggregates,
}

fn need<'v>(v: &'v Value, key: &str, path: &str) -> Result<&'v Value, String> {
    v.get(key).ok_or_else(|| format!("{path}: missing `{key}`"))
}

fn need_number(v: &Value, key: &str, path: &str) -> Result<(), String> {
    let field = need(v, key, path)?;
    if field.is_number() {
        Ok(())
    } else {
        Err(format!("{path}.{key}: expected a number"))
    }
}

fn need_array<'v>(v: &'v Value, key: &str, path: &str) -> Result<&'v Vec<Value>, String> {
    need(v, key, path)?
        .as_array()
        .ok_or_else(|| format!("{path}.{key}: expected an array"))
}

/// Structural check of an evaluation report document.
pub fn validate_eval_report(v: &Value) -> Result<(), String> {
    let meta = need(v, "metadata", "report")?;
    need(meta, "embedder", "metadata")?;
    need(meta, "seed", "metadata")?;
    need_array(meta, "warnings", "metadata")?;

    let metrics = need_array(v, "metrics", "report")?;
    for (i, row) in metrics.iter().enumerate() {
        let path = format!("metrics[{i}]");
        need(row, "model", &path)?;
        need(row, "decoding", &path)?;
        for col in [
            "valid", "unique", "novel", "filters", "int_div", "fcd", "scaf", "frag", "snn",
        ] {
            need_number(row, col, &path)?;
        }
    }

    let jsd = need_array(v, "jsd", "report")?;
    for (i, row) in jsd.iter().enumerate() {
        let path = format!("jsd[{i}]");
        need(row, "model", &path)?;
        need(row, "decoding", &path)?;
        need_number(row, "jsd_fcd", &path)?;
    }

    let per_protein = need_array(v, "per_protein", "report")?;
    for (i, row) in per_protein.iter().enumerate() {
        let path = format!("per_protein[{i}]");
        need(row, "protein_id", &path)?;
        need_number(row, "fcd", &path)?;
        need_number(row, "snn", &path)?;
    }
    need_array(v, "reference_distribution", "report")?;
    Ok(())
}

/// Structural check of a docking report document.
pub fn validate_dock_report(v: &Value) -> Result<(), String> {
    need_number(v, "alpha", "report")?;
    let targets = need_array(v, "targets", "report")?;
    for (i, t) in targets.iter().enumerate() {
        let path = format!("targets[{i}]");
        need(t, "target_id", &path)?;
        need(t, "excluded", &path)?;
        let pairings = need_array(t, "pairings", &path)?;
        for (j, p) in pairings.iter().enumerate() {
            let path = format!("{path}.pairings[{j}]");
            need(p, "positive", &path)?;
            need(p, "negative", &path)?;
            // p_value/auc may be null for missing groups, but the keys
            // must exist.
            need(p, "p_value", &path)?;
            need(p, "auc", &path)?;
        }
    }
    let agg = need(v, "aggregates", "report")?;
    need(agg, "significant", "aggregates")?;
    need(agg, "n_targets", "aggregates")?;
    Ok(())
}
