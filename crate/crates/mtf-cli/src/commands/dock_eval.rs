//! `dock-eval`: best-pose selection and per-target discrimination
//! statistics over an externally produced docking score table.

use std::collections::BTreeMap;
use std::path::PathBuf;

use mtf_core::dockstats::{best_pose_per_ligand, compare_groups, Group, PoseScore};

use super::{required_seed, Ctx};
use crate::manifest::{manifest_path_for, ManifestBuilder};
use crate::report::{validate_dock_report, DockAggregates, DockReport, PairingCell, TargetRow};
use crate::{info, io::tsv, io_runtime, require_file, CliError};

pub struct Args {
    pub scores: PathBuf,
    pub alpha: Option<f64>,
    pub seed: Option<u64>,
    pub out: PathBuf,
}

pub fn run(args: Args, ctx: &Ctx) -> Result<(), CliError> {
    require_file(&args.scores)?;
    let alpha = args.alpha.unwrap_or(ctx.cfg.eval.alpha);
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CliError::validation("range error: alpha must be in (0, 1)"));
    }
    let seed = required_seed(args.seed, ctx.cfg.seeds.eval, "dock evaluation")?;

    let poses_by_target = tsv::read_poses(&args.scores)?;
    if poses_by_target.is_empty() {
        return Err(CliError::validation("no docking scores"));
    }
    info!(command = "dock-eval", targets = poses_by_target.len(), alpha = alpha);

    let mut targets = Vec::new();
    let mut significant: BTreeMap<String, usize> = BTreeMap::new();
    let mut significant_auc: BTreeMap<String, usize> = BTreeMap::new();
    let mut n_excluded = 0usize;

    for (target_id, poses) in &poses_by_target {
        // Best pose per ligand within each group.
        let mut scores_by_group: BTreeMap<Group, BTreeMap<String, f64>> = BTreeMap::new();
        let mut grouped: BTreeMap<Group, Vec<PoseScore>> = BTreeMap::new();
        for pose in poses {
            grouped.entry(pose.group).or_default().push(pose.clone());
        }
        for (group, poses) in grouped {
            scores_by_group.insert(group, best_pose_per_ligand(&poses));
        }
        let cmp = compare_groups(target_id, &scores_by_group, alpha, seed);
        if cmp.excluded {
            n_excluded += 1;
        }
        let pairings: Vec<PairingCell> = cmp
            .rows
            .iter()
            .map(|row| {
                let label = format!("{}_vs_{}", row.pos.as_str(), row.neg.as_str());
                if let Some(r) = &row.result {
                    if !cmp.excluded {
                        if r.p_value < alpha {
                            *significant.entry(label.clone()).or_insert(0) += 1;
                            if r.auc > 0.5 {
                                *significant_auc.entry(label).or_insert(0) += 1;
                            }
                        }
                    }
                }
                PairingCell {
                    positive: row.pos.as_str().into(),
                    negative: row.neg.as_str().into(),
                    p_value: row.result.as_ref().map(|r| r.p_value),
                    auc: row.result.as_ref().map(|r| r.auc),
                    n_pos: row.result.as_ref().map(|r| r.n_pos),
                    n_neg: row.result.as_ref().map(|r| r.n_neg),
                }
            })
            .collect();
        targets.push(TargetRow {
            target_id: target_id.clone(),
            excluded: cmp.excluded,
            pairings,
        });
    }

    let report = DockReport {
        alpha,
        seed,
        aggregates: DockAggregates {
            significant,
            significant_auc_above_half: significant_auc,
            n_targets: targets.len(),
            n_excluded,
        },
        targets,
    };
    let value =
        serde_json::to_value(&report).map_err(|e| CliError::runtime(format!("report: {e}")))?;
    validate_dock_report(&value)
        .map_err(|e| CliError::runtime(format!("report failed its schema check: {e}")))?;
    std::fs::write(
        &args.out,
        serde_json::to_string_pretty(&value).map_err(|e| CliError::runtime(format!("{e}")))?,
    )
    .map_err(|e| io_runtime("writing dock report", e))?;

    let mut seeds = ctx.cfg.seed_map();
    seeds.insert("eval".into(), seed);
    let mut manifest = ManifestBuilder::new("dock-eval", &ctx.config_text, seeds, ctx.threads);
    manifest.input(&args.scores)?;
    manifest.output(&args.out)?;
    manifest.write(&manifest_path_for(&args.out))?;
    info!(command = "dock-eval", out = args.out.display(), excluded = n_excluded);
    Ok(())
}
