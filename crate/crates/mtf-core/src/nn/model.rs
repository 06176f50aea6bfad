//! Encoder-decoder transformer with explicit forward and backward passes.
//!
//! Post-layer-norm residual blocks, learned absolute positions, GELU feed
//! forward, untied LM head. Three architectures share the tower code:
//! bidirectional encoder-only (for masked-LM pretraining checkpoints),
//! causal decoder-only (molecule language model), and the encoder-decoder
//! translation model with cross-attention.
//!
//! Tensor names:
//! - towers: `{src_embed,tgt_embed,embed}.{tok,pos,ln.g,ln.b}`
//! - layers: `{encoder,decoder,layer}.l{i}.attn.{wq,wk,wv,wo,bq,bk,bv,bo}`,
//!   `.ln1.{g,b}`, `.ffn.{w1,b1,w2,b2}`, `.ln2.{g,b}`; decoder layers add
//!   `.cross.{...}` and `.lnc.{g,b}`
//! - heads: `lm_head.{w,b}` or `mlm_head.{w,b}`

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::functional as fx;
use super::real::Real;
use super::tensor::{Tensor, TensorMap};
use crate::biotok::PAD_ID;
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arch {
    EncDec,
    DecOnly,
    EncoderOnly,
}

impl Arch {
    pub fn as_str(self) -> &'static str {
        match self {
            Arch::EncDec => "enc_dec",
            Arch::DecOnly => "dec_only",
            Arch::EncoderOnly => "encoder_only",
        }
    }

    pub fn from_str(s: &str) -> Option<Arch> {
        match s {
            "enc_dec" => Some(Arch::EncDec),
            "dec_only" => Some(Arch::DecOnly),
            "encoder_only" => Some(Arch::EncoderOnly),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelConfig {
    pub n_layers: usize,
    pub d_model: usize,
    pub d_ff: usize,
    pub n_heads: usize,
    pub vocab_src: usize,
    pub vocab_tgt: usize,
    pub max_len: usize,
    pub arch: Arch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NnError {
    Config(String),
    Shape { what: String },
    VocabOverflow { id: u32, vocab: usize },
    ShapeMismatch { tensor: String },
    ConfigMismatch { what: String },
    EmptyCorpus,
    EmptyDataset,
    NonFiniteLoss { step: usize },
}

impl core::fmt::Display for NnError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            NnError::Config(msg) => write!(f, "bad model config: {msg}"),
            NnError::Shape { what } => write!(f, "shape error: {what}"),
            NnError::VocabOverflow { id, vocab } => {
                write!(f, "token id {id} outside vocabulary of {vocab}")
            }
            NnError::ShapeMismatch { tensor } => write!(f, "shape mismatch on `{tensor}`"),
            NnError::ConfigMismatch { what } => write!(f, "config mismatch: {what}"),
            NnError::EmptyCorpus => write!(f, "empty training corpus"),
            NnError::EmptyDataset => write!(f, "empty dataset"),
            NnError::NonFiniteLoss { step } => {
                write!(f, "loss became non-finite at optimizer step {step}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for NnError {}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), NnError> {
        if self.d_model == 0 || self.d_ff == 0 || self.n_layers == 0 || self.n_heads == 0 {
            return Err(NnError::Config("dimensions must be positive".into()));
        }
        if self.d_model % self.n_heads != 0 {
            return Err(NnError::Config(format!(
                "d_model {} not divisible by n_heads {}",
                self.d_model, self.n_heads
            )));
        }
        if self.max_len < 2 {
            return Err(NnError::Config("max_len must be at least 2".into()));
        }
        if self.vocab_src == 0 || self.vocab_tgt == 0 {
            return Err(NnError::Config("vocab sizes must be positive".into()));
        }
        Ok(())
    }

    /// CPU-friendly default used across tests and the smoke pipeline.
    pub fn desk_default(arch: Arch, vocab_src: usize, vocab_tgt: usize) -> ModelConfig {
        ModelConfig {
            n_layers: 2,
            d_model: 64,
            d_ff: 128,
            n_heads: 4,
            vocab_src,
            vocab_tgt,
            max_len: 256,
            arch,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<T> {
    pub cfg: ModelConfig,
    pub tensors: TensorMap<T>,
}

/// (embed prefix, layer prefix) per tower of an architecture.
fn towers(arch: Arch) -> Vec<(&'static str, &'static str, bool)> {
    // (embed, layers, has_cross)
    match arch {
        Arch::EncDec => alloc::vec![
            ("src_embed", "encoder", false),
            ("tgt_embed", "decoder", true),
        ],
        Arch::DecOnly | Arch::EncoderOnly => alloc::vec![("embed", "layer", false)],
    }
}

fn head_name(arch: Arch) -> &'static str {
    match arch {
        Arch::EncoderOnly => "mlm_head",
        _ => "lm_head",
    }
}

fn tower_vocab(cfg: &ModelConfig, embed_prefix: &str) -> usize {
    match embed_prefix {
        "src_embed" => cfg.vocab_src,
        _ => cfg.vocab_tgt,
    }
}

/// Expected name -> shape table for an architecture.
pub fn tensor_layout(cfg: &ModelConfig) -> Vec<(String, Vec<usize>)> {
    let d = cfg.d_model;
    let f = cfg.d_ff;
    let mut out: Vec<(String, Vec<usize>)> = Vec::new();
    for (embed, layers, has_cross) in towers(cfg.arch) {
        let v = tower_vocab(cfg, embed);
        out.push((format!("{embed}.tok"), alloc::vec![v, d]));
        out.push((format!("{embed}.pos"), alloc::vec![cfg.max_len, d]));
        out.push((format!("{embed}.ln.g"), alloc::vec![d]));
        out.push((format!("{embed}.ln.b"), alloc::vec![d]));
        for i in 0..cfg.n_layers {
            for attn in if has_cross {
                alloc::vec![format!("{layers}.l{i}.attn"), format!("{layers}.l{i}.cross")]
            } else {
                alloc::vec![format!("{layers}.l{i}.attn")]
            } {
                for w in ["wq", "wk", "wv", "wo"] {
                    out.push((format!("{attn}.{w}"), alloc::vec![d, d]));
                }
                for b in ["bq", "bk", "bv", "bo"] {
                    out.push((format!("{attn}.{b}"), alloc::vec![d]));
                }
            }
            out.push((format!("{layers}.l{i}.ln1.g"), alloc::vec![d]));
            out.push((format!("{layers}.l{i}.ln1.b"), alloc::vec![d]));
            if has_cross {
                out.push((format!("{layers}.l{i}.lnc.g"), alloc::vec![d]));
                out.push((format!("{layers}.l{i}.lnc.b"), alloc::vec![d]));
            }
            out.push((format!("{layers}.l{i}.ffn.w1"), alloc::vec![d, f]));
            out.push((format!("{layers}.l{i}.ffn.b1"), alloc::vec![f]));
            out.push((format!("{layers}.l{i}.ffn.w2"), alloc::vec![f, d]));
            out.push((format!("{layers}.l{i}.ffn.b2"), alloc::vec![d]));
            out.push((format!("{layers}.l{i}.ln2.g"), alloc::vec![d]));
            out.push((format!("{layers}.l{i}.ln2.b"), alloc::vec![d]));
        }
    }
    let head = head_name(cfg.arch);
    out.push((format!("{head}.w"), alloc::vec![d, cfg.vocab_tgt]));
    out.push((format!("{head}.b"), alloc::vec![cfg.vocab_tgt]));
    out
}

const INIT_STD: f64 = 0.02;

/// Fresh random parameters: weights N(0, 0.02^2), zero biases, unit
/// layer-norm gains.
pub fn init_params<T: Real>(cfg: &ModelConfig, seed: u64) -> Result<ModelParams<T>, NnError> {
    cfg.validate()?;
    let mut rng = Rng::for_key(seed, "init");
    let mut tensors = TensorMap::new();
    for (name, shape) in tensor_layout(cfg) {
        let tensor = if name.ends_with(".g") {
            Tensor::filled(&shape, T::ONE)
        } else if name.ends_with(".b")
            || name.ends_with(".b1")
            || name.ends_with(".b2")
            || name.ends_with("bq")
            || name.ends_with("bk")
            || name.ends_with("bv")
            || name.ends_with("bo")
        {
            Tensor::zeros(&shape)
        } else {
            let n: usize = shape.iter().product();
            let data: Vec<T> = (0..n)
                .map(|_| T::from_f64(rng.normal() * INIT_STD))
                .collect();
            Tensor::from_vec(&shape, data)
        };
        tensors.insert(&name, tensor);
    }
    Ok(ModelParams {
        cfg: cfg.clone(),
        tensors,
    })
}

/// Token-id batch, row-major `[batch, len]`, right-padded with the pad id.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub ids: Vec<u32>,
    pub batch: usize,
    pub len: usize,
}

impl Batch {
    pub fn from_rows(rows: &[Vec<u32>]) -> Batch {
        let batch = rows.len();
        let len = rows.iter().map(|r| r.len()).max().unwrap_or(0).max(1);
        let mut ids = alloc::vec![PAD_ID; batch * len];
        for (b, row) in rows.iter().enumerate() {
            ids[b * len..b * len + row.len()].copy_from_slice(row);
        }
        Batch { ids, batch, len }
    }

    fn pad_mask(&self) -> Vec<bool> {
        self.ids.iter().map(|&id| id != PAD_ID).collect()
    }

    fn check(&self, vocab: usize, max_len: usize) -> Result<(), NnError> {
        if self.len > max_len {
            return Err(NnError::Shape {
                what: format!("sequence length {} exceeds max_len {max_len}", self.len),
            });
        }
        if self.len == 0 || self.batch == 0 {
            return Err(NnError::Shape {
                what: "empty batch".into(),
            });
        }
        for &id in &self.ids {
            if id as usize >= vocab {
                return Err(NnError::VocabOverflow { id, vocab });
            }
        }
        Ok(())
    }
}

/// Dropout configuration for a training-mode forward pass.
pub struct TrainMode<'r> {
    pub rate: f64,
    pub rng: &'r mut Rng,
}

pub struct MhaCache<T> {
    x_q: Vec<T>,
    x_kv: Vec<T>,
    q: Vec<T>,
    k: Vec<T>,
    v: Vec<T>,
    probs: Vec<T>,
    ctx: Vec<T>,
    mask: Vec<bool>,
    b: usize,
    lq: usize,
    lk: usize,
}

pub struct BlockCache<T> {
    ln: fx::LayerNormCache<T>,
    drop_mask: Option<Vec<T>>,
}

pub struct FfnCache<T> {
    x: Vec<T>,
    h_pre: Vec<T>,
    h_act: Vec<T>,
    rows: usize,
}

pub struct LayerCacheData<T> {
    self_attn: MhaCache<T>,
    blk1: BlockCache<T>,
    cross: Option<MhaCache<T>>,
    blkc: Option<BlockCache<T>>,
    ffn: FfnCache<T>,
    blk2: BlockCache<T>,
}

pub struct TowerCache<T> {
    ids: Vec<u32>,
    b: usize,
    l: usize,
    embed_ln: fx::LayerNormCache<T>,
    embed_drop: Option<Vec<T>>,
    layers: Vec<LayerCacheData<T>>,
    pub out: Vec<T>,
}

impl<T: Real> TowerCache<T> {
    /// Attention probability tensors per layer: (self, cross-if-present),
    /// each `[B, H, Lq, Lk]` flattened.
    pub fn attention_probs(&self) -> Vec<(&[T], Option<&[T]>)> {
        self.layers
            .iter()
            .map(|l| (&l.self_attn.probs[..], l.cross.as_ref().map(|c| &c.probs[..])))
            .collect()
    }
}

struct MhaParams<'p, T> {
    wq: &'p [T],
    wk: &'p [T],
    wv: &'p [T],
    wo: &'p [T],
    bq: &'p [T],
    bk: &'p [T],
    bv: &'p [T],
    bo: &'p [T],
}

fn mha_params<'p, T: Real>(tensors: &'p TensorMap<T>, prefix: &str) -> MhaParams<'p, T> {
    MhaParams {
        wq: tensors.get(&format!("{prefix}.wq")).data(),
        wk: tensors.get(&format!("{prefix}.wk")).data(),
        wv: tensors.get(&format!("{prefix}.wv")).data(),
        wo: tensors.get(&format!("{prefix}.wo")).data(),
        bq: tensors.get(&format!("{prefix}.bq")).data(),
        bk: tensors.get(&format!("{prefix}.bk")).data(),
        bv: tensors.get(&format!("{prefix}.bv")).data(),
        bo: tensors.get(&format!("{prefix}.bo")).data(),
    }
}

#[allow(clippy::too_many_arguments)]
fn mha_forward<T: Real>(
    p: &MhaParams<'_, T>,
    x_q: &[T],
    x_kv: &[T],
    b: usize,
    lq: usize,
    lk: usize,
    d: usize,
    n_heads: usize,
    causal: bool,
    kv_keep: &[bool],
    out: &mut [T],
) -> MhaCache<T> {
    let dh = d / n_heads;
    let scale = T::from_f64(1.0 / (dh as f64).sqrt());

    let mut q = alloc::vec![T::ZERO; b * lq * d];
    let mut k = alloc::vec![T::ZERO; b * lk * d];
    let mut v = alloc::vec![T::ZERO; b * lk * d];
    fx::linear_forward(x_q, p.wq, p.bq, b * lq, d, d, &mut q);
    fx::linear_forward(x_kv, p.wk, p.bk, b * lk, d, d, &mut k);
    fx::linear_forward(x_kv, p.wv, p.bv, b * lk, d, d, &mut v);

    let mut scores = alloc::vec![T::ZERO; b * n_heads * lq * lk];
    let mut mask = alloc::vec![false; b * n_heads * lq * lk];
    for bi in 0..b {
        for h in 0..n_heads {
            for qi in 0..lq {
                let row = ((bi * n_heads + h) * lq + qi) * lk;
                let qv = &q[(bi * lq + qi) * d + h * dh..(bi * lq + qi) * d + (h + 1) * dh];
                for ki in 0..lk {
                    let keep = kv_keep[bi * lk + ki] && (!causal || ki <= qi);
                    mask[row + ki] = keep;
                    if keep {
                        let kv = &k[(bi * lk + ki) * d + h * dh..(bi * lk + ki) * d + (h + 1) * dh];
                        let mut dot = T::ZERO;
                        for (a, bb) in qv.iter().zip(kv.iter()) {
                            dot += *a * *bb;
                        }
                        scores[row + ki] = dot * scale;
                    }
                }
            }
        }
    }
    fx::masked_softmax_rows(&mut scores, lk, &mask);
    let probs = scores;

    let mut ctx = alloc::vec![T::ZERO; b * lq * d];
    for bi in 0..b {
        for h in 0..n_heads {
            for qi in 0..lq {
                let row = ((bi * n_heads + h) * lq + qi) * lk;
                let c = &mut ctx[(bi * lq + qi) * d + h * dh..(bi * lq + qi) * d + (h + 1) * dh];
                for ki in 0..lk {
                    let pr = probs[row + ki];
                    if pr == T::ZERO {
                        continue;
                    }
                    let vv = &v[(bi * lk + ki) * d + h * dh..(bi * lk + ki) * d + (h + 1) * dh];
                    for (cc, &vv) in c.iter_mut().zip(vv.iter()) {
                        *cc += pr * vv;
                    }
                }
            }
        }
    }

    fx::linear_forward(&ctx, p.wo, p.bo, b * lq, d, d, out);

    MhaCache {
        x_q: x_q.to_vec(),
        x_kv: x_kv.to_vec(),
        q,
        k,
        v,
        probs,
        ctx,
        mask,
        b,
        lq,
        lk,
    }
}

#[allow(clippy::too_many_arguments)]
fn mha_backward<T: Real>(
    p: &MhaParams<'_, T>,
    cache: &MhaCache<T>,
    dout: &[T],
    d: usize,
    n_heads: usize,
    grads: &mut TensorMap<T>,
    prefix: &str,
    dx_q: &mut [T],
    dx_kv: &mut [T],
) {
    let (b, lq, lk) = (cache.b, cache.lq, cache.lk);
    let dh = d / n_heads;
    let scale = T::from_f64(1.0 / (dh as f64).sqrt());

    // Output projection.
    let mut dctx = alloc::vec![T::ZERO; b * lq * d];
    {
        let (dwo, dbo) = (format!("{prefix}.wo"), format!("{prefix}.bo"));
        let mut dw = core::mem::take(grads.get_mut(&dwo));
        let mut db = core::mem::take(grads.get_mut(&dbo));
        fx::linear_backward(
            &cache.ctx,
            p.wo,
            dout,
            b * lq,
            d,
            d,
            &mut dctx,
            dw.data_mut(),
            db.data_mut(),
        );
        *grads.get_mut(&dwo) = dw;
        *grads.get_mut(&dbo) = db;
    }

    // Attention core.
    let mut dprobs = alloc::vec![T::ZERO; b * n_heads * lq * lk];
    let mut dv = alloc::vec![T::ZERO; b * lk * d];
    for bi in 0..b {
        for h in 0..n_heads {
            for qi in 0..lq {
                let row = ((bi * n_heads + h) * lq + qi) * lk;
                let dc = &dctx[(bi * lq + qi) * d + h * dh..(bi * lq + qi) * d + (h + 1) * dh];
                for ki in 0..lk {
                    let pr = cache.probs[row + ki];
                    let vv = &cache.v
                        [(bi * lk + ki) * d + h * dh..(bi * lk + ki) * d + (h + 1) * dh];
                    let mut dot = T::ZERO;
                    for (a, bb) in dc.iter().zip(vv.iter()) {
                        dot += *a * *bb;
                    }
                    dprobs[row + ki] = dot;
                    if pr != T::ZERO {
                        let dvv = &mut dv
                            [(bi * lk + ki) * d + h * dh..(bi * lk + ki) * d + (h + 1) * dh];
                        for (dvx, &dcx) in dvv.iter_mut().zip(dc.iter()) {
                            *dvx += pr * dcx;
                        }
                    }
                }
            }
        }
    }
    let mut dscores = alloc::vec![T::ZERO; dprobs.len()];
    fx::softmax_backward_rows(&cache.probs, &dprobs, lk, &mut dscores);

    let mut dq = alloc::vec![T::ZERO; b * lq * d];
    let mut dk = alloc::vec![T::ZERO; b * lk * d];
    for bi in 0..b {
        for h in 0..n_heads {
            for qi in 0..lq {
                let row = ((bi * n_heads + h) * lq + qi) * lk;
                let qv = &cache.q[(bi * lq + qi) * d + h * dh..(bi * lq + qi) * d + (h + 1) * dh];
                let dqv_base = (bi * lq + qi) * d + h * dh;
                for ki in 0..lk {
                    if !cache.mask[row + ki] {
                        continue;
                    }
                    let ds = dscores[row + ki] * scale;
                    if ds == T::ZERO {
                        continue;
                    }
                    let kv = &cache.k
                        [(bi * lk + ki) * d + h * dh..(bi * lk + ki) * d + (h + 1) * dh];
                    let dkv_base = (bi * lk + ki) * d + h * dh;
                    for x in 0..dh {
                        dq[dqv_base + x] += ds * kv[x];
                        dk[dkv_base + x] += ds * qv[x];
                    }
                }
            }
        }
    }

    // Input projections; q comes from x_q, k and v from x_kv.
    let mut dx = alloc::vec![T::ZERO; cache.x_q.len()];
    for (w_name, b_name, x, dy, dx_target) in [
        ("wq", "bq", &cache.x_q, &dq, true),
        ("wk", "bk", &cache.x_kv, &dk, false),
        ("wv", "bv", &cache.x_kv, &dv, false),
    ] {
        let rows = if dx_target { b * lq } else { b * lk };
        let w = match w_name {
            "wq" => p.wq,
            "wk" => p.wk,
            _ => p.wv,
        };
        let wn = format!("{prefix}.{w_name}");
        let bn = format!("{prefix}.{b_name}");
        let mut dw = core::mem::take(grads.get_mut(&wn));
        let mut db = core::mem::take(grads.get_mut(&bn));
        if dx_target {
            dx.resize(b * lq * d, T::ZERO);
        } else {
            dx.resize(b * lk * d, T::ZERO);
        }
        fx::linear_backward(x, w, dy, rows, d, d, &mut dx, dw.data_mut(), db.data_mut());
        *grads.get_mut(&wn) = dw;
        *grads.get_mut(&bn) = db;
        if dx_target {
            for (t, &s) in dx_q.iter_mut().zip(dx.iter()) {
                *t += s;
            }
        } else {
            for (t, &s) in dx_kv.iter_mut().zip(dx.iter()) {
                *t += s;
            }
        }
    }
}

/// Residual + optional dropout + post-layer-norm. Returns the block output.
fn block_forward<T: Real>(
    tensors: &TensorMap<T>,
    ln_prefix: &str,
    residual: &[T],
    sub_out: &mut Vec<T>,
    rows: usize,
    d: usize,
    mode: &mut Option<TrainMode<'_>>,
) -> (Vec<T>, BlockCache<T>) {
    let drop_mask = match mode {
        Some(tm) if tm.rate > 0.0 => Some(fx::dropout_forward(sub_out, tm.rate, tm.rng)),
        _ => None,
    };
    let mut pre = alloc::vec![T::ZERO; residual.len()];
    for i in 0..pre.len() {
        pre[i] = residual[i] + sub_out[i];
    }
    let g = tensors.get(&format!("{ln_prefix}.g")).data();
    let b = tensors.get(&format!("{ln_prefix}.b")).data();
    let mut out = alloc::vec![T::ZERO; pre.len()];
    let ln = fx::layernorm_forward(&pre, g, b, rows, d, &mut out);
    (out, BlockCache { ln, drop_mask })
}

/// Backward of `block_forward`: given dL/d(out), add the residual branch
/// gradient to `dresidual` and return the sub-layer branch gradient.
fn block_backward<T: Real>(
    tensors: &TensorMap<T>,
    grads: &mut TensorMap<T>,
    ln_prefix: &str,
    cache: &BlockCache<T>,
    dout: &[T],
    rows: usize,
    d: usize,
    dresidual: &mut [T],
) -> Vec<T> {
    let g = tensors.get(&format!("{ln_prefix}.g")).data();
    let gn = format!("{ln_prefix}.g");
    let bn = format!("{ln_prefix}.b");
    let mut dg = core::mem::take(grads.get_mut(&gn));
    let mut db = core::mem::take(grads.get_mut(&bn));
    let mut dpre = alloc::vec![T::ZERO; dout.len()];
    fx::layernorm_backward(
        dout,
        g,
        &cache.ln,
        rows,
        d,
        &mut dpre,
        dg.data_mut(),
        db.data_mut(),
    );
    *grads.get_mut(&gn) = dg;
    *grads.get_mut(&bn) = db;

    for (t, &s) in dresidual.iter_mut().zip(dpre.iter()) {
        *t += s;
    }
    let mut dsub = dpre;
    if let Some(mask) = &cache.drop_mask {
        fx::dropout_backward(&mut dsub, mask);
    }
    dsub
}

fn ffn_forward<T: Real>(
    tensors: &TensorMap<T>,
    prefix: &str,
    x: &[T],
    rows: usize,
    d: usize,
    f: usize,
) -> (Vec<T>, FfnCache<T>) {
    let w1 = tensors.get(&format!("{prefix}.w1")).data();
    let b1 = tensors.get(&format!("{prefix}.b1")).data();
    let w2 = tensors.get(&format!("{prefix}.w2")).data();
    let b2 = tensors.get(&format!("{prefix}.b2")).data();
    let mut h_pre = alloc::vec![T::ZERO; rows * f];
    fx::linear_forward(x, w1, b1, rows, d, f, &mut h_pre);
    let mut h_act = alloc::vec![T::ZERO; rows * f];
    fx::gelu_forward(&h_pre, &mut h_act);
    let mut out = alloc::vec![T::ZERO; rows * d];
    fx::linear_forward(&h_act, w2, b2, rows, f, d, &mut out);
    (
        out,
        FfnCache {
            x: x.to_vec(),
            h_pre,
            h_act,
            rows,
        },
    )
}

fn ffn_backward<T: Real>(
    tensors: &TensorMap<T>,
    grads: &mut TensorMap<T>,
    prefix: &str,
    cache: &FfnCache<T>,
    dout: &[T],
    d: usize,
    f: usize,
    dx: &mut [T],
) {
    let rows = cache.rows;
    let w1 = tensors.get(&format!("{prefix}.w1")).data();
    let w2 = tensors.get(&format!("{prefix}.w2")).data();

    let mut dh_act = alloc::vec![T::ZERO; rows * f];
    {
        let wn = format!("{prefix}.w2");
        let bn = format!("{prefix}.b2");
        let mut dw = core::mem::take(grads.get_mut(&wn));
        let mut db = core::mem::take(grads.get_mut(&bn));
        fx::linear_backward(
            &cache.h_act,
            w2,
            dout,
            rows,
            f,
            d,
            &mut dh_act,
            dw.data_mut(),
            db.data_mut(),
        );
        *grads.get_mut(&wn) = dw;
        *grads.get_mut(&bn) = db;
    }
    let mut dh_pre = alloc::vec![T::ZERO; rows * f];
    fx::gelu_backward(&cache.h_pre, &dh_act, &mut dh_pre);
    {
        let wn = format!("{prefix}.w1");
        let bn = format!("{prefix}.b1");
        let mut dw = core::mem::take(grads.get_mut(&wn));
        let mut db = core::mem::take(grads.get_mut(&bn));
        fx::linear_backward(
            &cache.x,
            w1,
            &dh_pre,
            rows,
            d,
            f,
            dx,
            dw.data_mut(),
            db.data_mut(),
        );
        *grads.get_mut(&wn) = dw;
        *grads.get_mut(&bn) = db;
    }
}

/// Encoder output handed to decoder cross-attention.
pub struct CrossInput<'a, T> {
    pub memory: &'a [T],
    pub keep: &'a [bool],
    pub lk: usize,
}

/// Run one tower (embedding + layer stack). `causal` applies the
/// autoregressive mask in self-attention; `cross` wires cross-attention to
/// an encoder memory.
fn tower_forward<T: Real>(
    params: &ModelParams<T>,
    embed_prefix: &str,
    layer_prefix: &str,
    batch: &Batch,
    causal: bool,
    cross: Option<&CrossInput<'_, T>>,
    mode: &mut Option<TrainMode<'_>>,
) -> TowerCache<T> {
    let cfg = &params.cfg;
    let (b, l, d) = (batch.batch, batch.len, cfg.d_model);
    let tensors = &params.tensors;

    let tok = tensors.get(&format!("{embed_prefix}.tok")).data();
    let pos = tensors.get(&format!("{embed_prefix}.pos")).data();
    let mut x = alloc::vec![T::ZERO; b * l * d];
    for bi in 0..b {
        for li in 0..l {
            let id = batch.ids[bi * l + li] as usize;
            let dst = &mut x[(bi * l + li) * d..(bi * l + li + 1) * d];
            let trow = &tok[id * d..(id + 1) * d];
            let prow = &pos[li * d..(li + 1) * d];
            for i in 0..d {
                dst[i] = trow[i] + prow[i];
            }
        }
    }
    let g = tensors.get(&format!("{embed_prefix}.ln.g")).data();
    let bb = tensors.get(&format!("{embed_prefix}.ln.b")).data();
    let mut normed = alloc::vec![T::ZERO; x.len()];
    let embed_ln = fx::layernorm_forward(&x, g, bb, b * l, d, &mut normed);
    let embed_drop = match mode {
        Some(tm) if tm.rate > 0.0 => Some(fx::dropout_forward(&mut normed, tm.rate, tm.rng)),
        _ => None,
    };
    let mut h = normed;

    let self_keep = batch.pad_mask();
    let mut layers: Vec<LayerCacheData<T>> = Vec::with_capacity(cfg.n_layers);
    for i in 0..cfg.n_layers {
        let attn_prefix = format!("{layer_prefix}.l{i}.attn");
        let mp = mha_params(tensors, &attn_prefix);
        let mut attn_out = alloc::vec![T::ZERO; b * l * d];
        let self_attn = mha_forward(
            &mp,
            &h,
            &h,
            b,
            l,
            l,
            d,
            cfg.n_heads,
            causal,
            &self_keep,
            &mut attn_out,
        );
        let (h1, blk1) = block_forward(
            tensors,
            &format!("{layer_prefix}.l{i}.ln1"),
            &h,
            &mut attn_out,
            b * l,
            d,
            mode,
        );

        let (h2, cross_cache, blkc) = if let Some(ci) = cross {
            let cross_prefix = format!("{layer_prefix}.l{i}.cross");
            let cp = mha_params(tensors, &cross_prefix);
            let mut cross_out = alloc::vec![T::ZERO; b * l * d];
            let cc = mha_forward(
                &cp,
                &h1,
                ci.memory,
                b,
                l,
                ci.lk,
                d,
                cfg.n_heads,
                false,
                ci.keep,
                &mut cross_out,
            );
            let (h2, blkc) = block_forward(
                tensors,
                &format!("{layer_prefix}.l{i}.lnc"),
                &h1,
                &mut cross_out,
                b * l,
                d,
                mode,
            );
            (h2, Some(cc), Some(blkc))
        } else {
            (h1.clone(), None, None)
        };

        let (mut ffn_out, ffn) =
            ffn_forward(tensors, &format!("{layer_prefix}.l{i}.ffn"), &h2, b * l, d, cfg.d_ff);
        let (h3, blk2) = block_forward(
            tensors,
            &format!("{layer_prefix}.l{i}.ln2"),
            &h2,
            &mut ffn_out,
            b * l,
            d,
            mode,
        );

        layers.push(LayerCacheData {
            self_attn,
            blk1,
            cross: cross_cache,
            blkc,
            ffn,
            blk2,
        });
        h = h3;
    }

    TowerCache {
        ids: batch.ids.clone(),
        b,
        l,
        embed_ln,
        embed_drop,
        layers,
        out: h,
    }
}

/// Backward through a tower. `dmemory` (when cross-attention is present)
/// accumulates the gradient w.r.t. the encoder memory.
#[allow(clippy::too_many_arguments)]
fn tower_backward<T: Real>(
    params: &ModelParams<T>,
    cache: &TowerCache<T>,
    embed_prefix: &str,
    layer_prefix: &str,
    dout: &[T],
    grads: &mut TensorMap<T>,
    mut dmemory: Option<&mut [T]>,
) {
    let cfg = &params.cfg;
    let tensors = &params.tensors;
    let (b, l, d) = (cache.b, cache.l, cfg.d_model);
    let mut dh = dout.to_vec();

    for (i, layer) in cache.layers.iter().enumerate().rev() {
        // FFN block.
        let mut dh2 = alloc::vec![T::ZERO; b * l * d];
        let dffn_out = block_backward(
            tensors,
            grads,
            &format!("{layer_prefix}.l{i}.ln2"),
            &layer.blk2,
            &dh,
            b * l,
            d,
            &mut dh2,
        );
        let mut dx_ffn = alloc::vec![T::ZERO; b * l * d];
        ffn_backward(
            tensors,
            grads,
            &format!("{layer_prefix}.l{i}.ffn"),
            &layer.ffn,
            &dffn_out,
            d,
            cfg.d_ff,
            &mut dx_ffn,
        );
        for (t, &s) in dh2.iter_mut().zip(dx_ffn.iter()) {
            *t += s;
        }

        // Cross-attention block (decoder only).
        let dh1 = if let (Some(cc), Some(blkc)) = (&layer.cross, &layer.blkc) {
            let mut dh1 = alloc::vec![T::ZERO; b * l * d];
            let dcross_out = block_backward(
                tensors,
                grads,
                &format!("{layer_prefix}.l{i}.lnc"),
                blkc,
                &dh2,
                b * l,
                d,
                &mut dh1,
            );
            let cp = mha_params(tensors, &format!("{layer_prefix}.l{i}.cross"));
            let mut dxq = alloc::vec![T::ZERO; b * l * d];
            let mem = dmemory.as_deref_mut().expect("cross-attention needs dmemory");
            mha_backward(
                &cp,
                cc,
                &dcross_out,
                d,
                cfg.n_heads,
                grads,
                &format!("{layer_prefix}.l{i}.cross"),
                &mut dxq,
                mem,
            );
            for (t, &s) in dh1.iter_mut().zip(dxq.iter()) {
                *t += s;
            }
            dh1
        } else {
            dh2
        };

        // Self-attention block.
        let mut dh0 = alloc::vec![T::ZERO; b * l * d];
        let dattn_out = block_backward(
            tensors,
            grads,
            &format!("{layer_prefix}.l{i}.ln1"),
            &layer.blk1,
            &dh1,
            b * l,
            d,
            &mut dh0,
        );
        let mp = mha_params(tensors, &format!("{layer_prefix}.l{i}.attn"));
        // Self-attention: q and kv are the same activation; both gradient
        // paths land on dh0.
        let mut dxq = alloc::vec![T::ZERO; b * l * d];
        let mut dxkv = alloc::vec![T::ZERO; b * l * d];
        mha_backward(
            &mp,
            &layer.self_attn,
            &dattn_out,
            d,
            cfg.n_heads,
            grads,
            &format!("{layer_prefix}.l{i}.attn"),
            &mut dxq,
            &mut dxkv,
        );
        for i2 in 0..dh0.len() {
            dh0[i2] += dxq[i2] + dxkv[i2];
        }
        dh = dh0;
    }

    // Embedding.
    if let Some(mask) = &cache.embed_drop {
        fx::dropout_backward(&mut dh, mask);
    }
    let g = tensors.get(&format!("{embed_prefix}.ln.g")).data();
    let gn = format!("{embed_prefix}.ln.g");
    let bn = format!("{embed_prefix}.ln.b");
    let mut dg = core::mem::take(grads.get_mut(&gn));
    let mut db = core::mem::take(grads.get_mut(&bn));
    let mut dx = alloc::vec![T::ZERO; dh.len()];
    fx::layernorm_backward(
        &dh,
        g,
        &cache.embed_ln,
        b * l,
        d,
        &mut dx,
        dg.data_mut(),
        db.data_mut(),
    );
    *grads.get_mut(&gn) = dg;
    *grads.get_mut(&bn) = db;

    let tok_name = format!("{embed_prefix}.tok");
    let pos_name = format!("{embed_prefix}.pos");
    let mut dtok = core::mem::take(grads.get_mut(&tok_name));
    let mut dpos = core::mem::take(grads.get_mut(&pos_name));
    for bi in 0..b {
        for li in 0..l {
            let id = cache.ids[bi * l + li] as usize;
            let src = &dx[(bi * l + li) * d..(bi * l + li + 1) * d];
            let trow = &mut dtok.data_mut()[id * d..(id + 1) * d];
            for i in 0..d {
                trow[i] += src[i];
            }
            let prow = &mut dpos.data_mut()[li * d..(li + 1) * d];
            for i in 0..d {
                prow[i] += src[i];
            }
        }
    }
    *grads.get_mut(&tok_name) = dtok;
    *grads.get_mut(&pos_name) = dpos;
}

pub struct EncDecCache<T> {
    pub encoder: TowerCache<T>,
    pub decoder: TowerCache<T>,
    pub src_keep: Vec<bool>,
}

/// Full encoder-decoder forward to logits `[B, T_tgt, vocab_tgt]`.
pub fn forward_enc_dec<T: Real>(
    params: &ModelParams<T>,
    src: &Batch,
    tgt_in: &Batch,
    mut mode: Option<TrainMode<'_>>,
) -> Result<(Vec<T>, EncDecCache<T>), NnError> {
    let cfg = &params.cfg;
    if cfg.arch != Arch::EncDec {
        return Err(NnError::ConfigMismatch {
            what: "forward_enc_dec requires an enc_dec model".into(),
        });
    }
    src.check(cfg.vocab_src, cfg.max_len)?;
    tgt_in.check(cfg.vocab_tgt, cfg.max_len)?;
    if src.batch != tgt_in.batch {
        return Err(NnError::Shape {
            what: "src and tgt batch sizes differ".into(),
        });
    }

    let encoder = tower_forward(params, "src_embed", "encoder", src, false, None, &mut mode);
    let src_keep = src.pad_mask();
    let cross = CrossInput {
        memory: &encoder.out,
        keep: &src_keep,
        lk: src.len,
    };
    let decoder = tower_forward(
        params,
        "tgt_embed",
        "decoder",
        tgt_in,
        true,
        Some(&cross),
        &mut mode,
    );

    let w = params.tensors.get("lm_head.w").data();
    let b = params.tensors.get("lm_head.b").data();
    let rows = tgt_in.batch * tgt_in.len;
    let mut logits = alloc::vec![T::ZERO; rows * cfg.vocab_tgt];
    fx::linear_forward(&decoder.out, w, b, rows, cfg.d_model, cfg.vocab_tgt, &mut logits);

    Ok((
        logits,
        EncDecCache {
            encoder,
            decoder,
            src_keep,
        },
    ))
}

/// Backward from dlogits; accumulates into `grads`.
pub fn backward_enc_dec<T: Real>(
    params: &ModelParams<T>,
    cache: &EncDecCache<T>,
    dlogits: &[T],
    grads: &mut TensorMap<T>,
) {
    let cfg = &params.cfg;
    let rows = cache.decoder.b * cache.decoder.l;
    let w = params.tensors.get("lm_head.w").data();
    let mut ddec = alloc::vec![T::ZERO; rows * cfg.d_model];
    {
        let mut dw = core::mem::take(grads.get_mut("lm_head.w"));
        let mut db = core::mem::take(grads.get_mut("lm_head.b"));
        fx::linear_backward(
            &cache.decoder.out,
            w,
            dlogits,
            rows,
            cfg.d_model,
            cfg.vocab_tgt,
            &mut ddec,
            dw.data_mut(),
            db.data_mut(),
        );
        *grads.get_mut("lm_head.w") = dw;
        *grads.get_mut("lm_head.b") = db;
    }

    let mut dmemory = alloc::vec![T::ZERO; cache.encoder.out.len()];
    tower_backward(
        params,
        &cache.decoder,
        "tgt_embed",
        "decoder",
        &ddec,
        grads,
        Some(&mut dmemory),
    );
    tower_backward(
        params,
        &cache.encoder,
        "src_embed",
        "encoder",
        &dmemory,
        grads,
        None,
    );
}

/// Tower-only forward (decoder-only causal LM or encoder-only MLM) to
/// logits over `vocab_tgt`.
pub fn forward_tower_lm<T: Real>(
    params: &ModelParams<T>,
    ids: &Batch,
    mut mode: Option<TrainMode<'_>>,
) -> Result<(Vec<T>, TowerCache<T>), NnError> {
    let cfg = &params.cfg;
    let causal = match cfg.arch {
        Arch::DecOnly => true,
        Arch::EncoderOnly => false,
        Arch::EncDec => {
            return Err(NnError::ConfigMismatch {
                what: "forward_tower_lm requires a tower model".into(),
            })
        }
    };
    ids.check(cfg.vocab_tgt, cfg.max_len)?;
    let tower = tower_forward(params, "embed", "layer", ids, causal, None, &mut mode);
    let head = head_name(cfg.arch);
    let w = params.tensors.get(&format!("{head}.w")).data();
    let b = params.tensors.get(&format!("{head}.b")).data();
    let rows = ids.batch * ids.len;
    let mut logits = alloc::vec![T::ZERO; rows * cfg.vocab_tgt];
    fx::linear_forward(&tower.out, w, b, rows, cfg.d_model, cfg.vocab_tgt, &mut logits);
    Ok((logits, tower))
}

pub fn backward_tower_lm<T: Real>(
    params: &ModelParams<T>,
    cache: &TowerCache<T>,
    dlogits: &[T],
    grads: &mut TensorMap<T>,
) {
    let cfg = &params.cfg;
    let head = head_name(cfg.arch);
    let rows = cache.b * cache.l;
    let w = params.tensors.get(&format!("{head}.w")).data();
    let mut dtower = alloc::vec![T::ZERO; rows * cfg.d_model];
    {
        let wn = format!("{head}.w");
        let bn = format!("{head}.b");
        let mut dw = core::mem::take(grads.get_mut(&wn));
        let mut db = core::mem::take(grads.get_mut(&bn));
        fx::linear_backward(
            &cache.out,
            w,
            dlogits,
            rows,
            cfg.d_model,
            cfg.vocab_tgt,
            &mut dtower,
            dw.data_mut(),
            db.data_mut(),
        );
        *grads.get_mut(&wn) = dw;
        *grads.get_mut(&bn) = db;
    }
    tower_backward(params, cache, "embed", "layer", &dtower, grads, None);
}

/// Teacher-forced batch: `tgt_out[b*len + i]` is the gold next token for
/// decoder position i (pad where ignored).
#[derive(Debug, Clone)]
pub struct Seq2SeqBatch {
    pub src: Batch,
    pub tgt_in: Batch,
    pub tgt_out: Vec<u32>,
}

impl Seq2SeqBatch {
    /// Build from framed id sequences (`[bos, ..., eos]` on both sides).
    pub fn from_pairs(pairs: &[(Vec<u32>, Vec<u32>)]) -> Seq2SeqBatch {
        let srcs: Vec<Vec<u32>> = pairs.iter().map(|(s, _)| s.clone()).collect();
        let tgt_ins: Vec<Vec<u32>> = pairs
            .iter()
            .map(|(_, t)| t[..t.len() - 1].to_vec())
            .collect();
        let src = Batch::from_rows(&srcs);
        let tgt_in = Batch::from_rows(&tgt_ins);
        let mut tgt_out = alloc::vec![PAD_ID; tgt_in.batch * tgt_in.len];
        for (b, (_, t)) in pairs.iter().enumerate() {
            for (i, &id) in t[1..].iter().enumerate() {
                tgt_out[b * tgt_in.len + i] = id;
            }
        }
        Seq2SeqBatch {
            src,
            tgt_in,
            tgt_out,
        }
    }
}

/// Mean teacher-forced cross-entropy over non-pad target positions plus
/// analytic gradients for every tensor, accumulated into `grads`.
pub fn loss_and_grads<T: Real>(
    params: &ModelParams<T>,
    batch: &Seq2SeqBatch,
    grads: &mut TensorMap<T>,
    mode: Option<TrainMode<'_>>,
) -> Result<f64, NnError> {
    let (logits, cache) = forward_enc_dec(params, &batch.src, &batch.tgt_in, mode)?;
    let mut dlogits = alloc::vec![T::ZERO; logits.len()];
    let (loss, _n) = fx::cross_entropy(
        &logits,
        &batch.tgt_out,
        params.cfg.vocab_tgt,
        PAD_ID,
        &mut dlogits,
    );
    backward_enc_dec(params, &cache, &dlogits, grads);
    Ok(loss)
}

/// Same for tower LMs (causal or masked objective is expressed by the
/// targets the caller builds).
pub fn loss_and_grads_tower<T: Real>(
    params: &ModelParams<T>,
    ids: &Batch,
    targets: &[u32],
    grads: &mut TensorMap<T>,
    mode: Option<TrainMode<'_>>,
) -> Result<f64, NnError> {
    let (logits, cache) = forward_tower_lm(params, ids, mode)?;
    let mut dlogits = alloc::vec![T::ZERO; logits.len()];
    let (loss, _n) = fx::cross_entropy(
        &logits,
        targets,
        params.cfg.vocab_tgt,
        PAD_ID,
        &mut dlogits,
    );
    backward_tower_lm(params, &cache, &dlogits, grads);
    Ok(loss)
}

/// Evaluation-mode logits for external callers (decoding, tests).
pub fn forward_logits<T: Real>(
    params: &ModelParams<T>,
    src: &Batch,
    tgt_in: &Batch,
) -> Result<Vec<T>, NnError> {
    forward_enc_dec(params, src, tgt_in, None).map(|(logits, _)| logits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biotok::{BOS_ID, EOS_ID};

    fn cfg() -> ModelConfig {
        ModelConfig {
            n_layers: 2,
            d_model: 16,
            d_ff: 32,
            n_heads: 2,
            vocab_src: 9,
            vocab_tgt: 11,
            max_len: 10,
            arch: Arch::EncDec,
        }
    }

    fn params() -> ModelParams<f32> {
        init_params(&cfg(), 77).unwrap()
    }

    #[test]
    fn logits_shape_contract() {
        let p = params();
        let src = Batch::from_rows(&[vec![BOS_ID, 4, 5, EOS_ID], vec![BOS_ID, 6, EOS_ID]]);
        let tgt = Batch::from_rows(&[vec![BOS_ID, 4, 4], vec![BOS_ID, 5, 6]]);
        let logits = forward_logits(&p, &src, &tgt).unwrap();
        assert_eq!(logits.len(), 2 * 3 * cfg().vocab_tgt);
    }

    #[test]
    fn causal_mask_is_bit_exact() {
        // Perturbing the target token at position j leaves logits at
        // positions before j bit-identical.
        let p = params();
        let src = Batch::from_rows(&[vec![BOS_ID, 4, 5, EOS_ID]]);
        let a = Batch::from_rows(&[vec![BOS_ID, 4, 5, 6, 7]]);
        let b = Batch::from_rows(&[vec![BOS_ID, 4, 5, 9, 7]]); // j = 3 changed
        let la = forward_logits(&p, &src, &a).unwrap();
        let lb = forward_logits(&p, &src, &b).unwrap();
        let v = cfg().vocab_tgt;
        assert_eq!(la[..3 * v], lb[..3 * v], "prefix logits must match bit for bit");
        assert_ne!(la[3 * v..], lb[3 * v..], "suffix should react to the change");
    }

    #[test]
    fn padding_invariance_on_source() {
        let p = params();
        let tgt = Batch::from_rows(&[vec![BOS_ID, 4, 5]]);
        let short = Batch::from_rows(&[vec![BOS_ID, 4, 5, EOS_ID]]);
        let mut padded_rows = vec![vec![BOS_ID, 4, 5, EOS_ID]];
        padded_rows[0].extend([crate::biotok::PAD_ID; 3]);
        let padded = Batch::from_rows(&padded_rows);
        let a = forward_logits(&p, &short, &tgt).unwrap();
        let b = forward_logits(&p, &padded, &tgt).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).abs() <= 1e-6, "{x} vs {y}");
        }
    }

    #[test]
    fn attention_rows_are_distributions() {
        let p = params();
        let src = Batch::from_rows(&[vec![BOS_ID, 4, 5, EOS_ID], vec![BOS_ID, 6, EOS_ID]]);
        let tgt = Batch::from_rows(&[vec![BOS_ID, 4, 4, 5], vec![BOS_ID, 5, 6, 6]]);
        let (_, cache) = forward_enc_dec(&p, &src, &tgt, None).unwrap();
        for tower in [&cache.encoder, &cache.decoder] {
            for (self_probs, cross_probs) in tower.attention_probs() {
                for chunk in self_probs.chunks(tower.l) {
                    let sum: f32 = chunk.iter().sum();
                    assert!(
                        (sum - 1.0).abs() <= 1e-6 || sum == 0.0,
                        "row sum {sum}"
                    );
                }
                if let Some(cp) = cross_probs {
                    for chunk in cp.chunks(src.len) {
                        let sum: f32 = chunk.iter().sum();
                        assert!((sum - 1.0).abs() <= 1e-6 || sum == 0.0);
                    }
                }
            }
        }
        // Masked entries are exactly zero: causal upper triangle of the
        // decoder's first-layer self-attention.
        let dec_probs = cache.decoder.attention_probs();
        let (self_probs, _) = dec_probs[0];
        let lt = tgt.len;
        for q in 0..lt {
            for k in (q + 1)..lt {
                assert_eq!(self_probs[q * lt + k], 0.0);
            }
        }
    }

    #[test]
    fn loss_is_batch_order_invariant() {
        let p = params();
        let pairs = vec![
            (vec![BOS_ID, 4, 5, EOS_ID], vec![BOS_ID, 4, 6, EOS_ID]),
            (vec![BOS_ID, 6, EOS_ID], vec![BOS_ID, 5, EOS_ID]),
            (vec![BOS_ID, 7, 7, 4, EOS_ID], vec![BOS_ID, 9, 4, EOS_ID]),
        ];
        let mut reversed = pairs.clone();
        reversed.reverse();
        let mut g1 = p.tensors.zeros_like();
        let mut g2 = p.tensors.zeros_like();
        let l1 = loss_and_grads(&p, &Seq2SeqBatch::from_pairs(&pairs), &mut g1, None).unwrap();
        let l2 = loss_and_grads(&p, &Seq2SeqBatch::from_pairs(&reversed), &mut g2, None).unwrap();
        assert!((l1 - l2).abs() <= 1e-6, "{l1} vs {l2}");
    }

    #[test]
    fn vocab_overflow_is_rejected() {
        let p = params();
        let src = Batch::from_rows(&[vec![BOS_ID, 50, EOS_ID]]);
        let tgt = Batch::from_rows(&[vec![BOS_ID, 4]]);
        assert!(matches!(
            forward_logits(&p, &src, &tgt),
            Err(NnError::VocabOverflow { id: 50, .. })
        ));
        let long = Batch::from_rows(&[vec![4; 99]]);
        let tgt = Batch::from_rows(&[vec![BOS_ID, 4]]);
        assert!(matches!(
            forward_logits(&p, &long, &tgt),
            Err(NnError::Shape { .. })
        ));
    }
}
