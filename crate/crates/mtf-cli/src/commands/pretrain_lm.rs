//! `pretrain-lm`: self-supervised tower pretraining. The `mlm` objective
//! trains an encoder-only tower from scratch (the desk-scale stand-in for
//! a pretrained protein or chemical LM checkpoint); `clm` builds a causal
//! molecule generator on top of an mlm checkpoint.

use std::path::PathBuf;

use mtf_core::biotok::{encode_framed, from_text};
use mtf_core::nn::{pretrain_clm, pretrain_mlm, Arch};

use super::{required_seed, Ctx};
use crate::io::checkpoint::{read_checkpoint, write_checkpoint};
use crate::manifest::{manifest_path_for, ManifestBuilder};
use crate::{info, io::tsv, io_runtime, require_file, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Mlm,
    Clm,
}

impl Objective {
    pub fn from_str(s: &str) -> Option<Objective> {
        match s {
            "mlm" => Some(Objective::Mlm),
            "clm" => Some(Objective::Clm),
            _ => None,
        }
    }
}

pub struct Args {
    pub corpus: PathBuf,
    pub vocab: PathBuf,
    pub objective: Objective,
    pub init: Option<PathBuf>,
    pub seed: Option<u64>,
    pub epochs: Option<usize>,
    pub out: PathBuf,
}

pub fn run(args: Args, ctx: &Ctx) -> Result<(), CliError> {
    require_file(&args.corpus)?;
    require_file(&args.vocab)?;
    let seed = required_seed(args.seed, ctx.cfg.seeds.train, "pretraining")?;

    let vocab_text =
        std::fs::read_to_string(&args.vocab).map_err(|e| io_runtime("reading vocab", e))?;
    let vocab = from_text(&vocab_text)
        .map_err(|e| CliError::validation(format!("{}: {e}", args.vocab.display())))?;
    let corpus = tsv::read_corpus(&args.corpus)?;
    let ids: Vec<Vec<u32>> = corpus.iter().map(|s| encode_framed(&vocab, s)).collect();

    let mut tc = ctx.cfg.train_config(seed);
    if let Some(epochs) = args.epochs {
        tc.epochs = epochs;
    }

    let params = match args.objective {
        Objective::Mlm => {
            let cfg = ctx
                .cfg
                .model_config(Arch::EncoderOnly, vocab.len(), vocab.len());
            info!(command = "pretrain-lm", objective = "mlm", sequences = ids.len(), seed = seed);
            let (params, history) = pretrain_mlm::<f32>(&cfg, &ids, &tc)
                .map_err(|e| CliError::runtime(format!("mlm pretraining: {e}")))?;
            if let Some(last) = history.last() {
                info!(command = "pretrain-lm", final_loss = format!("{:.4}", last.train_loss));
            }
            params
        }
        Objective::Clm => {
            let init_path = args.init.clone().ok_or_else(|| {
                CliError::validation("clm pre-finetuning needs --init <mlm checkpoint>")
            })?;
            require_file(&init_path)?;
            let ckpt = read_checkpoint(&init_path)?;
            if ckpt.cfg.vocab_tgt != vocab.len() {
                return Err(CliError::validation(format!(
                    "checkpoint vocabulary {} does not match vocab file {}",
                    ckpt.cfg.vocab_tgt,
                    vocab.len()
                )));
            }
            info!(command = "pretrain-lm", objective = "clm", sequences = ids.len(), seed = seed);
            let (params, history) = pretrain_clm(&ckpt, &ids, &tc)
                .map_err(|e| CliError::runtime(format!("clm pre-finetuning: {e}")))?;
            if let Some(last) = history.last() {
                info!(command = "pretrain-lm", final_loss = format!("{:.4}", last.train_loss));
            }
            params
        }
    };

    write_checkpoint(&args.out, &params)?;
    let mut seeds = ctx.cfg.seed_map();
    seeds.insert("train".into(), seed);
    let mut manifest =
        ManifestBuilder::new("pretrain-lm", &ctx.config_text, seeds, ctx.threads);
    manifest.input(&args.corpus)?;
    manifest.input(&args.vocab)?;
    if let Some(init) = &args.init {
        manifest.input(init)?;
    }
    manifest.output(&args.out)?;
    manifest.write(&manifest_path_for(&args.out))?;
    Ok(())
}
