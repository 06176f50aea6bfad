//! `train`: fine-tune the translation model on protein-ligand pairs from
//! a scratch, one-stage, or two-stage initialization.

use std::path::PathBuf;

use serde::Serialize;

use mtf_core::biotok::{encode_framed, from_text, TokenVocab};
use mtf_core::nn::{
    init_params, train_seq2seq, warm_start_one_stage, warm_start_two_stage, Arch, ModelParams,
};

use super::{required_path, required_seed, Ctx};
use crate::io::checkpoint::{read_checkpoint, write_checkpoint};
use crate::manifest::{manifest_path_for, ManifestBuilder};
use crate::{info, io::tsv, io_runtime, require_file, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    OneStage,
    TwoStage,
    Scratch,
}

impl InitMode {
    pub fn from_str(s: &str) -> Option<InitMode> {
        match s {
            "one-stage" => Some(InitMode::OneStage),
            "two-stage" => Some(InitMode::TwoStage),
            "scratch" => Some(InitMode::Scratch),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            InitMode::OneStage => "one-stage",
            InitMode::TwoStage => "two-stage",
            InitMode::Scratch => "scratch",
        }
    }
}

pub struct Args {
    pub init: InitMode,
    pub seed: Option<u64>,
    pub train_pairs: Option<PathBuf>,
    pub valid_pairs: Option<PathBuf>,
    pub src_vocab: Option<PathBuf>,
    pub tgt_vocab: Option<PathBuf>,
    pub epochs: Option<usize>,
    pub out: Option<PathBuf>,
}

fn load_vocab(path: &PathBuf) -> Result<TokenVocab, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_runtime("reading vocab", e))?;
    from_text(&text).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct HistoryDoc {
    init: String,
    seed: u64,
    epochs: Vec<EpochDoc>,
}

#[derive(Serialize)]
struct EpochDoc {
    epoch: usize,
    train_loss: f64,
    val_loss: Option<f64>,
    lr: f64,
    optimizer_steps: u64,
}

pub fn run(args: Args, ctx: &Ctx) -> Result<(), CliError> {
    let seed = required_seed(args.seed, ctx.cfg.seeds.train, "training")?;
    let data_dir = ctx.cfg.paths.data_dir.clone();
    let train_path = args
        .train_pairs
        .or_else(|| data_dir.as_ref().map(|d| d.join("train.tsv")))
        .ok_or_else(|| CliError::validation("missing required path: training pairs"))?;
    let valid_path = args
        .valid_pairs
        .or_else(|| data_dir.as_ref().map(|d| d.join("valid.tsv")))
        .ok_or_else(|| CliError::validation("missing required path: validation pairs"))?;
    let src_vocab_path = required_path(args.src_vocab, &ctx.cfg.paths.src_vocab, "source vocab")?;
    let tgt_vocab_path = required_path(args.tgt_vocab, &ctx.cfg.paths.tgt_vocab, "target vocab")?;
    let out = required_path(args.out, &ctx.cfg.paths.model_out, "model output")?;
    for p in [&train_path, &valid_path, &src_vocab_path, &tgt_vocab_path] {
        require_file(p)?;
    }

    let src_vocab = load_vocab(&src_vocab_path)?;
    let tgt_vocab = load_vocab(&tgt_vocab_path)?;
    let tokenize = |rows: &[tsv::PairRow]| -> Vec<(Vec<u32>, Vec<u32>)> {
        rows.iter()
            .map(|r| {
                (
                    encode_framed(&src_vocab, &r.sequence),
                    encode_framed(&tgt_vocab, &r.smiles),
                )
            })
            .collect()
    };
    let train_rows = tsv::read_pairs(&train_path)?;
    let valid_rows = tsv::read_pairs(&valid_path)?;
    let train_pairs = tokenize(&train_rows);
    let valid_pairs = tokenize(&valid_rows);

    let cfg = ctx
        .cfg
        .model_config(Arch::EncDec, src_vocab.len(), tgt_vocab.len());

    let mut ckpt_inputs: Vec<PathBuf> = Vec::new();
    let init_params_model: ModelParams<f32> = match args.init {
        InitMode::Scratch => init_params(&cfg, seed)
            .map_err(|e| CliError::validation(format!("model config: {e}")))?,
        InitMode::OneStage => {
            let enc_path = required_path(None, &ctx.cfg.paths.enc_ckpt, "encoder checkpoint")?;
            let dec_path = required_path(None, &ctx.cfg.paths.dec_ckpt, "decoder checkpoint")?;
            require_file(&enc_path)?;
            require_file(&dec_path)?;
            let enc = read_checkpoint(&enc_path)?;
            let dec = read_checkpoint(&dec_path)?;
            ckpt_inputs.push(enc_path);
            ckpt_inputs.push(dec_path);
            let (model, audit) = warm_start_one_stage(&enc, &dec, &cfg, seed)
                .map_err(|e| CliError::validation(format!("one-stage surgery: {e}")))?;
            info!(
                command = "train",
                surgery = "one-stage",
                copied = audit.copied().count(),
                fresh = audit.fresh().count()
            );
            model
        }
        InitMode::TwoStage => {
            let enc_path = required_path(None, &ctx.cfg.paths.enc_ckpt, "encoder checkpoint")?;
            let clm_path = required_path(None, &ctx.cfg.paths.clm_ckpt, "molecule LM checkpoint")?;
            require_file(&enc_path)?;
            require_file(&clm_path)?;
            let enc = read_checkpoint(&enc_path)?;
            let clm = read_checkpoint(&clm_path)?;
            ckpt_inputs.push(enc_path);
            ckpt_inputs.push(clm_path);
            let (model, audit) = warm_start_two_stage(&enc, &clm, &cfg, seed)
                .map_err(|e| CliError::validation(format!("two-stage surgery: {e}")))?;
            info!(
                command = "train",
                surgery = "two-stage",
                copied = audit.copied().count(),
                fresh = audit.fresh().count()
            );
            model
        }
    };

    let mut tc = ctx.cfg.train_config(seed);
    if let Some(epochs) = args.epochs {
        tc.epochs = epochs;
    }
    info!(
        command = "train",
        init = args.init.as_str(),
        pairs = train_pairs.len(),
        valid = valid_pairs.len(),
        epochs = tc.epochs,
        seed = seed
    );
    let (best, history) = train_seq2seq(&init_params_model, &train_pairs, &valid_pairs, &tc)
        .map_err(|e| CliError::runtime(format!("training: {e}")))?;
    if let Some(last) = history.last() {
        info!(
            command = "train",
            train_loss = format!("{:.4}", last.train_loss),
            val_loss = format!("{:.4}", last.val_loss.unwrap_or(f64::NAN))
        );
    }

    write_checkpoint(&out, &best)?;
    let history_path = out.with_extension("history.json");
    let doc = HistoryDoc {
        init: args.init.as_str().into(),
        seed,
        epochs: history
            .iter()
            .map(|e| EpochDoc {
                epoch: e.epoch,
                train_loss: e.train_loss,
                val_loss: e.val_loss,
                lr: e.lr,
                optimizer_steps: e.optimizer_steps,
            })
            .collect(),
    };
    std::fs::write(
        &history_path,
        serde_json::to_string_pretty(&doc).map_err(|e| CliError::runtime(format!("history: {e}")))?,
    )
    .map_err(|e| io_runtime("writing history", e))?;

    let mut seeds = ctx.cfg.seed_map();
    seeds.insert("train".into(), seed);
    let mut manifest = ManifestBuilder::new("train", &ctx.config_text, seeds, ctx.threads);
    for p in [&train_path, &valid_path, &src_vocab_path, &tgt_vocab_path] {
        manifest.input(p)?;
    }
    for p in &ckpt_inputs {
        manifest.input(p)?;
    }
    manifest.output(&out)?;
    manifest.output(&history_path)?;
    manifest.write(&manifest_path_for(&out))?;
    Ok(())
}
