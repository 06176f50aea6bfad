//! `train-bpe`: learn a byte-pair vocabulary from a line corpus.

use std::path::PathBuf;

use mtf_core::biotok::{to_text, train_bpe};

use super::Ctx;
use crate::manifest::{manifest_path_for, ManifestBuilder};
use crate::{info, io::tsv, io_runtime, require_file, CliError};

pub struct Args {
    pub input: PathBuf,
    pub vocab_size: usize,
    pub out: PathBuf,
}

pub fn run(args: Args, ctx: &Ctx) -> Result<(), CliError> {
    require_file(&args.input)?;
    let corpus = tsv::read_corpus(&args.input)?;
    info!(command = "train-bpe", lines = corpus.len(), vocab_size = args.vocab_size);
    let vocab = train_bpe(&corpus, args.vocab_size)
        .map_err(|e| CliError::validation(format!("bpe training: {e}")))?;
    std::fs::write(&args.out, to_text(&vocab)).map_err(|e| io_runtime("writing vocab", e))?;

    let mut manifest =
        ManifestBuilder::new("train-bpe", &ctx.config_text, ctx.cfg.seed_map(), ctx.threads);
    manifest.input(&args.input)?;
    manifest.output(&args.out)?;
    manifest.write(&manifest_path_for(&args.out))?;
    info!(command = "train-bpe", tokens = vocab.len(), merges = vocab.merges().len());
    Ok(())
}
