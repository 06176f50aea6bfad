//! Command implementations. Each command is callable in-process (the
//! acceptance suite drives the pipeline this way) and from the binary.

pub mod dock_eval;
pub mod evaluate;
pub mod generate;
pub mod grad_check;
pub mod prepare_data;
pub mod pretrain_lm;
pub mod split;
pub mod train;
pub mod train_bpe;

use std::path::PathBuf;

use crate::config::RunConfig;
use crate::CliError;

/// Everything a command needs besides its own flags.
pub struct Ctx {
    pub cfg: RunConfig,
    /// Canonical serialization of the effective config, digested into
    /// manifests.
    pub config_text: String,
    pub threads: usize,
}

impl Ctx {
    pub fn new(cfg: RunConfig, threads: usize) -> Ctx {
        let config_text = crate::config::canonical_toml(&cfg);
        Ctx {
            cfg,
            config_text,
            threads,
        }
    }
}

pub(crate) fn required_path(
    flag: Option<PathBuf>,
    fallback: &Option<PathBuf>,
    what: &str,
) -> Result<PathBuf, CliError> {
    flag.or_else(|| fallback.clone())
        .ok_or_else(|| CliError::validation(format!("missing required path: {what}")))
}

pub(crate) fn required_seed(
    flag: Option<u64>,
    fallback: Option<u64>,
    what: &str,
) -> Result<u64, CliError> {
    flag.or(fallback).ok_or_else(|| {
        CliError::validation(format!(
            "seed for {what} must be set (flag --seed or [seeds] in the config)"
        ))
    })
}
