//! `grad-check`: verify analytic gradients against central finite
//! differences for the tiny encoder-decoder and decoder-only models.

use std::path::PathBuf;

use serde::Serialize;

use mtf_core::nn::gradcheck::{grad_check, tiny_config};
use mtf_core::nn::Arch;

use super::Ctx;
use crate::manifest::{manifest_path_for, ManifestBuilder};
use crate::{info, io_runtime, CliError};

pub struct Args {
    pub tolerance: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct CheckDoc {
    arch: String,
    tolerance: f64,
    passed: bool,
    worst_rel_err: f64,
    tensors: Vec<TensorDoc>,
}

#[derive(Serialize)]
struct TensorDoc {
    name: String,
    max_rel_err: f64,
    elements: usize,
}

pub fn run(args: Args, ctx: &Ctx) -> Result<(), CliError> {
    let mut docs = Vec::new();
    let mut all_passed = true;
    for arch in [Arch::EncDec, Arch::DecOnly] {
        let cfg = tiny_config(arch);
        let report = grad_check(&cfg, args.seed, args.tolerance)
            .map_err(|e| CliError::runtime(format!("grad check setup: {e}")))?;
        info!(
            command = "grad-check",
            arch = arch.as_str(),
            worst = format!("{:.3e}", report.worst()),
            passed = report.passed
        );
        all_passed &= report.passed;
        docs.push(CheckDoc {
            arch: arch.as_str().into(),
            tolerance: args.tolerance,
            passed: report.passed,
            worst_rel_err: report.worst(),
            tensors: report
                .tensors
                .iter()
                .map(|t| TensorDoc {
                    name: t.name.clone(),
                    max_rel_err: t.max_rel_err,
                    elements: t.checked,
                })
                .collect(),
        });
    }

    if let Some(out) = &args.out {
        std::fs::write(
            out,
            serde_json::to_string_pretty(&docs)
                .map_err(|e| CliError::runtime(format!("report: {e}")))?,
        )
        .map_err(|e| io_runtime("writing grad-check report", e))?;
        let mut manifest =
            ManifestBuilder::new("grad-check", &ctx.config_text, ctx.cfg.seed_map(), ctx.threads);
        manifest.output(out)?;
        manifest.write(&manifest_path_for(out))?;
    }

    if all_passed {
        Ok(())
    } else {
        Err(CliError::runtime(format!(
            "gradient check failed tolerance {}",
            args.tolerance
        )))
    }
}
