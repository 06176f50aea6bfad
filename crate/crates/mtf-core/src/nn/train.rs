//! Training loops: seq2seq fine-tuning, masked-LM tower pretraining, and
//! causal-LM pre-finetuning.

use alloc::vec::Vec;

use super::model::{
    init_params, loss_and_grads, loss_and_grads_tower, Arch, Batch, ModelConfig, ModelParams,
    NnError, Seq2SeqBatch, TrainMode,
};
use super::optim::{lr_at, Adam, AdamConfig};
use super::real::Real;
use crate::biotok::{PAD_ID, UNK_ID};
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub peak_lr: f64,
    pub warmup_steps: u64,
    pub batch_size: usize,
    pub grad_accum: usize,
    pub epochs: usize,
    pub seed: u64,
    pub adam: AdamConfig,
    pub dropout: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            peak_lr: 5e-5,
            warmup_steps: 2000,
            batch_size: 8,
            grad_accum: 8,
            epochs: 5,
            seed: 0,
            adam: AdamConfig::default(),
            dropout: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: Option<f64>,
    pub lr: f64,
    pub optimizer_steps: u64,
}

fn scale_grads<T: Real>(grads: &mut super::tensor::TensorMap<T>, factor: f64) {
    let f = T::from_f64(factor);
    let names: Vec<alloc::string::String> =
        grads.names().map(alloc::string::String::from).collect();
    for name in names {
        for v in grads.get_mut(&name).data_mut() {
            *v *= f;
        }
    }
}

fn zero_grads<T: Real>(grads: &mut super::tensor::TensorMap<T>) {
    let names: Vec<alloc::string::String> =
        grads.names().map(alloc::string::String::from).collect();
    for name in names {
        for v in grads.get_mut(&name).data_mut() {
            *v = T::ZERO;
        }
    }
}

/// Evaluation-mode mean loss over a pair set.
pub fn eval_loss<T: Real>(
    params: &ModelParams<T>,
    pairs: &[(Vec<u32>, Vec<u32>)],
    batch_size: usize,
) -> Result<f64, NnError> {
    if pairs.is_empty() {
        return Err(NnError::EmptyDataset);
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for chunk in pairs.chunks(batch_size) {
        let batch = Seq2SeqBatch::from_pairs(chunk);
        let (logits, _cache) = super::model::forward_enc_dec(params, &batch.src, &batch.tgt_in, None)?;
        let mut scratch = alloc::vec![T::ZERO; logits.len()];
        let (loss, n) = super::functional::cross_entropy(
            &logits,
            &batch.tgt_out,
            params.cfg.vocab_tgt,
            PAD_ID,
            &mut scratch,
        );
        total += loss * n as f64;
        count += n;
    }
    Ok(if count == 0 { 0.0 } else { total / count as f64 })
}

/// Adam fine-tuning with the linear warmup/decay schedule, gradient
/// accumulation, and best-validation checkpoint selection. Deterministic
/// for a fixed seed.
pub fn train_seq2seq<T: Real>(
    init: &ModelParams<T>,
    train_pairs: &[(Vec<u32>, Vec<u32>)],
    valid_pairs: &[(Vec<u32>, Vec<u32>)],
    tc: &TrainConfig,
) -> Result<(ModelParams<T>, Vec<EpochStats>), NnError> {
    let usable: Vec<&(Vec<u32>, Vec<u32>)> = train_pairs
        .iter()
        .filter(|(s, t)| s.len() <= init.cfg.max_len && t.len() - 1 <= init.cfg.max_len)
        .collect();
    if usable.is_empty() {
        return Err(NnError::EmptyDataset);
    }
    let micro_per_epoch = usable.len().div_ceil(tc.batch_size);
    let steps_per_epoch = micro_per_epoch.div_ceil(tc.grad_accum) as u64;
    let total_steps = steps_per_epoch * tc.epochs as u64;

    let mut params = init.clone();
    let mut adam = Adam::new(&params.tensors, tc.adam.clone());
    let mut grads = params.tensors.zeros_like();
    let mut shuffle_rng = Rng::for_key(tc.seed, "train-shuffle");
    let mut dropout_rng = Rng::for_key(tc.seed, "train-dropout");

    let mut best: Option<(f64, ModelParams<T>)> = None;
    let mut history = Vec::with_capacity(tc.epochs);
    let mut steps_done = 0u64;

    for epoch in 0..tc.epochs {
        let mut order: Vec<usize> = (0..usable.len()).collect();
        shuffle_rng.shuffle(&mut order);

        let mut epoch_loss = 0.0;
        let mut micro_count = 0usize;
        let mut accum = 0usize;
        let mut micro_index = 0usize;
        while micro_index < usable.len() {
            let hi = (micro_index + tc.batch_size).min(usable.len());
            let rows: Vec<(Vec<u32>, Vec<u32>)> = order[micro_index..hi]
                .iter()
                .map(|&i| usable[i].clone())
                .collect();
            micro_index = hi;
            let batch = Seq2SeqBatch::from_pairs(&rows);
            let mode = if tc.dropout > 0.0 {
                Some(TrainMode {
                    rate: tc.dropout,
                    rng: &mut dropout_rng,
                })
            } else {
                None
            };
            let loss = loss_and_grads(&params, &batch, &mut grads, mode)?;
            if !loss.is_finite() {
                return Err(NnError::NonFiniteLoss {
                    step: steps_done as usize,
                });
            }
            epoch_loss += loss;
            micro_count += 1;
            accum += 1;

            let last_of_epoch = micro_index >= usable.len();
            if accum == tc.grad_accum || last_of_epoch {
                scale_grads(&mut grads, 1.0 / accum as f64);
                let lr = lr_at(steps_done, tc.warmup_steps, total_steps, tc.peak_lr);
                adam.step(&mut params.tensors, &grads, lr);
                zero_grads(&mut grads);
                steps_done += 1;
                accum = 0;
            }
        }

        let val_loss = if valid_pairs.is_empty() {
            None
        } else {
            Some(eval_loss(&params, valid_pairs, tc.batch_size)?)
        };
        history.push(EpochStats {
            epoch,
            train_loss: epoch_loss / micro_count.max(1) as f64,
            val_loss,
            lr: lr_at(steps_done, tc.warmup_steps, total_steps, tc.peak_lr),
            optimizer_steps: steps_done,
        });
        let score = val_loss.unwrap_or(epoch_loss / micro_count.max(1) as f64);
        if best.as_ref().is_none_or(|(b, _)| score < *b) {
            best = Some((score, params.clone()));
        }
    }

    let (_, best_params) = best.expect("at least one epoch ran");
    Ok((best_params, history))
}

/// Next-token (causal) example from a framed sequence.
fn clm_example(rows: &[Vec<u32>]) -> (Batch, Vec<u32>) {
    let inputs: Vec<Vec<u32>> = rows.iter().map(|r| r[..r.len() - 1].to_vec()).collect();
    let batch = Batch::from_rows(&inputs);
    let mut targets = alloc::vec![PAD_ID; batch.batch * batch.len];
    for (b, row) in rows.iter().enumerate() {
        for (i, &id) in row[1..].iter().enumerate() {
            targets[b * batch.len + i] = id;
        }
    }
    (batch, targets)
}

/// Masked-LM example: 15% of non-special positions are replaced by the unk
/// token and predicted.
fn mlm_example(rows: &[Vec<u32>], rng: &mut Rng) -> (Batch, Vec<u32>) {
    let batch = Batch::from_rows(rows);
    let mut ids = batch.ids.clone();
    let mut targets = alloc::vec![PAD_ID; ids.len()];
    for (i, id) in ids.iter_mut().enumerate() {
        if *id >= 4 && rng.f64() < 0.15 {
            targets[i] = *id;
            *id = UNK_ID;
        }
    }
    (
        Batch {
            ids,
            batch: batch.batch,
            len: batch.len,
        },
        targets,
    )
}

/// Shared tower-LM training loop.
fn train_tower<T: Real>(
    mut params: ModelParams<T>,
    corpus: &[Vec<u32>],
    tc: &TrainConfig,
    masked: bool,
) -> Result<(ModelParams<T>, Vec<EpochStats>), NnError> {
    let usable: Vec<&Vec<u32>> = corpus
        .iter()
        .filter(|r| r.len() >= 2 && r.len() <= params.cfg.max_len + 1)
        .collect();
    if usable.is_empty() {
        return Err(NnError::EmptyCorpus);
    }
    let micro_per_epoch = usable.len().div_ceil(tc.batch_size);
    let steps_per_epoch = micro_per_epoch.div_ceil(tc.grad_accum) as u64;
    let total_steps = steps_per_epoch * tc.epochs as u64;

    let mut adam = Adam::new(&params.tensors, tc.adam.clone());
    let mut grads = params.tensors.zeros_like();
    let mut shuffle_rng = Rng::for_key(tc.seed, "tower-shuffle");
    let mut dropout_rng = Rng::for_key(tc.seed, "tower-dropout");
    let mut mask_rng = Rng::for_key(tc.seed, "tower-mask");

    let mut history = Vec::new();
    let mut steps_done = 0u64;
    for epoch in 0..tc.epochs {
        let mut order: Vec<usize> = (0..usable.len()).collect();
        shuffle_rng.shuffle(&mut order);
        let mut epoch_loss = 0.0;
        let mut micro_count = 0usize;
        let mut accum = 0usize;
        let mut micro_index = 0usize;
        while micro_index < usable.len() {
            let hi = (micro_index + tc.batch_size).min(usable.len());
            let rows: Vec<Vec<u32>> = order[micro_index..hi]
                .iter()
                .map(|&i| usable[i].clone())
                .collect();
            micro_index = hi;
            let (batch, targets) = if masked {
                mlm_example(&rows, &mut mask_rng)
            } else {
                clm_example(&rows)
            };
            let mode = if tc.dropout > 0.0 {
                Some(TrainMode {
                    rate: tc.dropout,
                    rng: &mut dropout_rng,
                })
            } else {
                None
            };
            let loss = loss_and_grads_tower(&params, &batch, &targets, &mut grads, mode)?;
            if !loss.is_finite() {
                return Err(NnError::NonFiniteLoss {
                    step: steps_done as usize,
                });
            }
            epoch_loss += loss;
            micro_count += 1;
            accum += 1;
            let last_of_epoch = micro_index >= usable.len();
            if accum == tc.grad_accum || last_of_epoch {
                scale_grads(&mut grads, 1.0 / accum as f64);
                let lr = lr_at(steps_done, tc.warmup_steps, total_steps, tc.peak_lr);
                adam.step(&mut params.tensors, &grads, lr);
                zero_grads(&mut grads);
                steps_done += 1;
                accum = 0;
            }
        }
        history.push(EpochStats {
            epoch,
            train_loss: epoch_loss / micro_count.max(1) as f64,
            val_loss: None,
            lr: lr_at(steps_done, tc.warmup_steps, total_steps, tc.peak_lr),
            optimizer_steps: steps_done,
        });
    }
    Ok((params, history))
}

/// Masked-LM pretraining of an encoder-only tower from random init.
pub fn pretrain_mlm<T: Real>(
    cfg: &ModelConfig,
    corpus: &[Vec<u32>],
    tc: &TrainConfig,
) -> Result<(ModelParams<T>, Vec<EpochStats>), NnError> {
    if cfg.arch != Arch::EncoderOnly {
        return Err(NnError::ConfigMismatch {
            what: "pretrain_mlm needs an encoder_only config".into(),
        });
    }
    let params = init_params::<T>(cfg, tc.seed)?;
    train_tower(params, corpus, tc, true)
}

/// Causal-LM pre-finetuning: build a decoder-only model from a masked-LM
/// tower checkpoint (fresh LM head) and train next-token prediction on the
/// molecule corpus.
pub fn pretrain_clm<T: Real>(
    dec_ckpt: &ModelParams<T>,
    corpus: &[Vec<u32>],
    tc: &TrainConfig,
) -> Result<(ModelParams<T>, Vec<EpochStats>), NnError> {
    if dec_ckpt.cfg.arch != Arch::EncoderOnly {
        return Err(NnError::ConfigMismatch {
            what: "pretrain_clm seeds from an encoder_only checkpoint".into(),
        });
    }
    if corpus.is_empty() {
        return Err(NnError::EmptyCorpus);
    }
    let cfg = ModelConfig {
        arch: Arch::DecOnly,
        ..dec_ckpt.cfg.clone()
    };
    let mut params = init_params::<T>(&cfg, tc.seed)?;
    // Tower tensors come over verbatim; only lm_head stays fresh.
    let names: Vec<alloc::string::String> = params
        .tensors
        .names()
        .map(alloc::string::String::from)
        .collect();
    for name in names {
        if name.starts_with("embed.") || name.starts_with("layer.") {
            let src = dec_ckpt.tensors.get(&name);
            params.tensors.get_mut(&name).data_mut().copy_from_slice(src.data());
        }
    }
    if tc.epochs == 0 {
        return Ok((params, Vec::new()));
    }
    train_tower(params, corpus, tc, false)
}
