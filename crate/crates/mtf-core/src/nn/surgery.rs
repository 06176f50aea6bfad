//! Warm-start weight surgery.
//!
//! Builds an encoder-decoder model from pretrained tower checkpoints. The
//! encoder side is copied verbatim from a protein checkpoint; the decoder
//! tower (embeddings, positions, self-attention, feed-forward, layer
//! norms) is copied from a chemical checkpoint. Cross-attention and the LM
//! head do not exist in the source towers, so they are freshly
//! initialized: weights from N(0, 0.02^2) drawn from the seed, biases
//! zero, cross-block layer-norm gain one. The audit classifies every
//! tensor of the new model as copied or fresh, leaving none unaccounted.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::model::{init_params, Arch, ModelConfig, ModelParams, NnError};
use super::real::Real;
use super::tensor::TensorMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TensorClass {
    /// Copied bit-for-bit from a checkpoint tensor.
    Copied,
    /// Freshly initialized (random weights or constant layer-norm/bias).
    Fresh,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurgeryAudit {
    /// (target tensor, class, source tensor when copied)
    pub entries: Vec<(String, TensorClass, Option<String>)>,
}

impl SurgeryAudit {
    pub fn copied(&self) -> impl Iterator<Item = &str> {
        self.entries
            .iter()
            .filter(|(_, c, _)| *c == TensorClass::Copied)
            .map(|(n, _, _)| n.as_str())
    }

    pub fn fresh(&self) -> impl Iterator<Item = &str> {
        self.entries
            .iter()
            .filter(|(_, c, _)| *c == TensorClass::Fresh)
            .map(|(n, _, _)| n.as_str())
    }
}

fn check_tower_compat(
    ckpt: &ModelConfig,
    cfg: &ModelConfig,
    vocab_expected: usize,
    side: &str,
) -> Result<(), NnError> {
    if ckpt.n_layers != cfg.n_layers
        || ckpt.d_model != cfg.d_model
        || ckpt.d_ff != cfg.d_ff
        || ckpt.n_heads != cfg.n_heads
    {
        return Err(NnError::ConfigMismatch {
            what: format!("{side} checkpoint dimensions do not match the target config"),
        });
    }
    if ckpt.max_len < cfg.max_len {
        return Err(NnError::ConfigMismatch {
            what: format!("{side} checkpoint max_len {} below target {}", ckpt.max_len, cfg.max_len),
        });
    }
    if ckpt.vocab_tgt != vocab_expected {
        return Err(NnError::ConfigMismatch {
            what: format!(
                "{side} checkpoint vocabulary {} does not match target {}",
                ckpt.vocab_tgt, vocab_expected
            ),
        });
    }
    Ok(())
}

/// Copy `src_prefix.*` tensors of a tower checkpoint onto `dst_embed` /
/// `dst_layers` names of the target model.
fn copy_tower<T: Real>(
    target: &mut TensorMap<T>,
    source: &TensorMap<T>,
    cfg: &ModelConfig,
    dst_embed: &str,
    dst_layers: &str,
    audit: &mut SurgeryAudit,
) -> Result<(), NnError> {
    let mut copy_one = |dst: String, src: String| -> Result<(), NnError> {
        let s = source
            .try_get(&src)
            .ok_or_else(|| NnError::ShapeMismatch { tensor: src.clone() })?;
        let t = target.get_mut(&dst);
        if t.shape() != s.shape() && !(dst.ends_with(".pos") && s.shape()[1] == t.shape()[1]) {
            return Err(NnError::ShapeMismatch { tensor: dst });
        }
        if dst.ends_with(".pos") && s.shape()[0] != t.shape()[0] {
            // Checkpoint trained with a longer table: take the prefix rows.
            let d = t.shape()[1];
            let rows = t.shape()[0];
            t.data_mut().copy_from_slice(&s.data()[..rows * d]);
        } else {
            t.data_mut().copy_from_slice(s.data());
        }
        audit
            .entries
            .push((dst, TensorClass::Copied, Some(src)));
        Ok(())
    };

    for part in ["tok", "pos", "ln.g", "ln.b"] {
        copy_one(format!("{dst_embed}.{part}"), format!("embed.{part}"))?;
    }
    for i in 0..cfg.n_layers {
        for part in [
            "attn.wq", "attn.wk", "attn.wv", "attn.wo", "attn.bq", "attn.bk", "attn.bv",
            "attn.bo", "ln1.g", "ln1.b", "ffn.w1", "ffn.b1", "ffn.w2", "ffn.b2", "ln2.g",
            "ln2.b",
        ] {
            copy_one(format!("{dst_layers}.l{i}.{part}"), format!("layer.l{i}.{part}"))?;
        }
    }
    Ok(())
}

fn mark_fresh(audit: &mut SurgeryAudit, cfg: &ModelConfig) {
    for i in 0..cfg.n_layers {
        for part in [
            "cross.wq", "cross.wk", "cross.wv", "cross.wo", "cross.bq", "cross.bk", "cross.bv",
            "cross.bo", "lnc.g", "lnc.b",
        ] {
            audit
                .entries
                .push((format!("decoder.l{i}.{part}"), TensorClass::Fresh, None));
        }
    }
    audit
        .entries
        .push(("lm_head.w".into(), TensorClass::Fresh, None));
    audit
        .entries
        .push(("lm_head.b".into(), TensorClass::Fresh, None));
}

fn warm_start<T: Real>(
    enc_ckpt: &ModelParams<T>,
    dec_ckpt: &ModelParams<T>,
    cfg: &ModelConfig,
    seed: u64,
    expect_dec_arch: &[Arch],
) -> Result<(ModelParams<T>, SurgeryAudit), NnError> {
    cfg.validate()?;
    if cfg.arch != Arch::EncDec {
        return Err(NnError::ConfigMismatch {
            what: "warm start targets an enc_dec config".into(),
        });
    }
    if enc_ckpt.cfg.arch != Arch::EncoderOnly {
        return Err(NnError::ConfigMismatch {
            what: "encoder checkpoint must be encoder_only".into(),
        });
    }
    if !expect_dec_arch.contains(&dec_ckpt.cfg.arch) {
        return Err(NnError::ConfigMismatch {
            what: format!(
                "decoder checkpoint arch {} not usable here",
                dec_ckpt.cfg.arch.as_str()
            ),
        });
    }
    check_tower_compat(&enc_ckpt.cfg, cfg, cfg.vocab_src, "encoder")?;
    check_tower_compat(&dec_ckpt.cfg, cfg, cfg.vocab_tgt, "decoder")?;

    // Fresh init seeds cross-attention and the LM head; everything else is
    // then overwritten by checkpoint copies.
    let mut model = init_params::<T>(cfg, seed)?;
    let mut audit = SurgeryAudit {
        entries: Vec::new(),
    };
    copy_tower(
        &mut model.tensors,
        &enc_ckpt.tensors,
        cfg,
        "src_embed",
        "encoder",
        &mut audit,
    )?;
    copy_tower(
        &mut model.tensors,
        &dec_ckpt.tensors,
        cfg,
        "tgt_embed",
        "decoder",
        &mut audit,
    )?;
    mark_fresh(&mut audit, cfg);
    debug_assert_eq!(audit.entries.len(), model.tensors.len());
    Ok((model, audit))
}

/// One-stage warm start: encoder and decoder towers both come from
/// masked-LM (encoder-only) checkpoints.
pub fn warm_start_one_stage<T: Real>(
    enc_ckpt: &ModelParams<T>,
    dec_ckpt: &ModelParams<T>,
    cfg: &ModelConfig,
    seed: u64,
) -> Result<(ModelParams<T>, SurgeryAudit), NnError> {
    warm_start(enc_ckpt, dec_ckpt, cfg, seed, &[Arch::EncoderOnly])
}

/// Two-stage warm start: the decoder tower comes from the causal molecule
/// LM produced by pre-finetuning.
pub fn warm_start_two_stage<T: Real>(
    enc_ckpt: &ModelParams<T>,
    clm_params: &ModelParams<T>,
    cfg: &ModelConfig,
    seed: u64,
) -> Result<(ModelParams<T>, SurgeryAudit), NnError> {
    warm_start(enc_ckpt, clm_params, cfg, seed, &[Arch::DecOnly])
}
