//! Beam search and temperature sampling over trained models.
//!
//! Both decoders work for the encoder-decoder (given a source sequence)
//! and the decoder-only molecule LM (no source). Hypotheses are re-scored
//! by a full forward pass per step; at desk scale that costs little and
//! keeps the code free of cache-invalidation state.

use alloc::vec::Vec;

use crate::biotok::{BOS_ID, EOS_ID, PAD_ID};
use crate::math;
use crate::nn::model::{forward_enc_dec, forward_tower_lm, Arch, Batch, ModelParams, NnError};
use crate::nn::real::Real;
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Beam,
    Sampling,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Beam => "beam",
            Method::Sampling => "sampling",
        }
    }

    pub fn from_str(s: &str) -> Option<Method> {
        match s {
            "beam" => Some(Method::Beam),
            "sampling" => Some(Method::Sampling),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GenerationRequest {
    pub n_outputs: usize,
    pub method: Method,
    pub max_len: usize,
    /// Sampling temperature; 0 is the argmax (greedy) limit.
    pub temperature: f64,
    /// Keep only the k most probable tokens before sampling (0 disables).
    pub top_k: usize,
    /// Nucleus cutoff (1.0 disables).
    pub top_p: f64,
    pub seed: u64,
}

impl GenerationRequest {
    pub fn beam(n_outputs: usize, max_len: usize) -> GenerationRequest {
        GenerationRequest {
            n_outputs,
            method: Method::Beam,
            max_len,
            temperature: 1.0,
            top_k: 0,
            top_p: 1.0,
            seed: 0,
        }
    }

    pub fn sampling(n_outputs: usize, max_len: usize, temperature: f64, seed: u64) -> GenerationRequest {
        GenerationRequest {
            n_outputs,
            method: Method::Sampling,
            max_len,
            temperature,
            top_k: 0,
            top_p: 1.0,
            seed,
        }
    }
}

/// A finished hypothesis. `tokens` excludes the leading bos and includes
/// the closing eos when the sequence finished before the length horizon.
/// Beam scores are length-normalized log-probabilities; sampling scores are
/// total model log-probabilities at temperature 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub tokens: Vec<u32>,
    pub score: f64,
}

/// Log-probabilities of the next token after `prefixes` (each starting
/// with bos), batched. For enc_dec models `src` must be the framed source
/// sequence; for dec_only models it must be None.
fn next_token_logprobs<T: Real>(
    params: &ModelParams<T>,
    src: Option<&[u32]>,
    prefixes: &[Vec<u32>],
) -> Result<Vec<Vec<f64>>, NnError> {
    let vocab = params.cfg.vocab_tgt;
    let tgt = Batch::from_rows(prefixes);
    let logits: Vec<f64> = match (params.cfg.arch, src) {
        (Arch::EncDec, Some(src_ids)) => {
            let rows: Vec<Vec<u32>> = (0..prefixes.len()).map(|_| src_ids.to_vec()).collect();
            let src_batch = Batch::from_rows(&rows);
            let (logits, _) = forward_enc_dec(params, &src_batch, &tgt, None)?;
            logits.iter().map(|v| v.to_f64()).collect()
        }
        (Arch::DecOnly, None) => {
            let (logits, _) = forward_tower_lm(params, &tgt, None)?;
            logits.iter().map(|v| v.to_f64()).collect()
        }
        _ => {
            return Err(NnError::ConfigMismatch {
                what: "decoder input does not match the model architecture".into(),
            })
        }
    };
    let mut out = Vec::with_capacity(prefixes.len());
    for (i, prefix) in prefixes.iter().enumerate() {
        let last = prefix.len() - 1;
        let row = &logits[(i * tgt.len + last) * vocab..(i * tgt.len + last + 1) * vocab];
        out.push(log_softmax(row));
    }
    Ok(out)
}

fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logits.iter().map(|&v| math::exp(v - max)).sum();
    let lse = max + math::ln(sum);
    logits.iter().map(|&v| v - lse).collect()
}

struct Hypothesis {
    tokens: Vec<u32>, // includes leading bos
    logprob: f64,
}

/// Emitted-token count of a hypothesis (bos excluded).
fn emitted(h_tokens: &[u32]) -> usize {
    h_tokens.len() - 1
}

/// Width-`n_outputs` beam search with length-normalized final ranking.
/// Returns up to `n_outputs` distinct finished sequences, best first.
pub fn beam_search<T: Real>(
    params: &ModelParams<T>,
    src: Option<&[u32]>,
    req: &GenerationRequest,
) -> Result<Vec<Generated>, NnError> {
    let width = req.n_outputs.max(1);
    let mut live = alloc::vec![Hypothesis {
        tokens: alloc::vec![BOS_ID],
        logprob: 0.0,
    }];
    let mut finished: Vec<Generated> = Vec::new();

    while !live.is_empty() {
        let prefixes: Vec<Vec<u32>> = live.iter().map(|h| h.tokens.clone()).collect();
        let logprobs = next_token_logprobs(params, src, &prefixes)?;

        // (cumulative logprob, hyp index, token)
        let mut candidates: Vec<(f64, usize, u32)> = Vec::new();
        for (i, lp) in logprobs.iter().enumerate() {
            for (tok, &l) in lp.iter().enumerate() {
                let tok = tok as u32;
                if tok == PAD_ID || tok == BOS_ID {
                    continue;
                }
                candidates.push((live[i].logprob + l, i, tok));
            }
        }
        candidates.sort_by(|a, b| {
            b.0.partial_cmp(&a.0)
                .unwrap()
                .then(a.1.cmp(&b.1))
                .then(a.2.cmp(&b.2))
        });
        candidates.truncate(width);

        let mut next_live = Vec::new();
        for (logprob, i, tok) in candidates {
            let mut tokens = live[i].tokens.clone();
            tokens.push(tok);
            let done = tok == EOS_ID || emitted(&tokens) >= req.max_len;
            if done {
                finished.push(Generated {
                    tokens: tokens[1..].to_vec(),
                    score: logprob / emitted(&tokens) as f64,
                });
            } else {
                next_live.push(Hypothesis { tokens, logprob });
            }
        }
        live = next_live;
        if finished.len() >= width {
            break;
        }
    }

    finished.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap().then(a.tokens.cmp(&b.tokens)));
    finished.truncate(req.n_outputs);

    // Distinct prefixes make duplicates impossible; keep the claim honest.
    let mut seen = alloc::collections::BTreeSet::new();
    for g in &finished {
        assert!(seen.insert(g.tokens.clone()), "duplicate beam output");
    }
    Ok(finished)
}

fn sample_from(probs: &[(u32, f64)], u: f64) -> u32 {
    let mut acc = 0.0;
    for &(tok, p) in probs {
        acc += p;
        if u < acc {
            return tok;
        }
    }
    probs.last().expect("non-empty distribution").0
}

/// Ancestral sampling: independent samples, next token drawn from
/// softmax(logits / temperature) with optional top-k/top-p truncation.
/// Temperature zero degenerates to greedy argmax.
pub fn sample<T: Real>(
    params: &ModelParams<T>,
    src: Option<&[u32]>,
    req: &GenerationRequest,
) -> Result<Vec<Generated>, NnError> {
    let mut out = Vec::with_capacity(req.n_outputs);
    for s in 0..req.n_outputs {
        let mut rng = Rng::for_key(req.seed, &alloc::format!("sample/{s}"));
        let mut tokens = alloc::vec![BOS_ID];
        let mut logprob = 0.0f64;
        loop {
            let lp = &next_token_logprobs(params, src, core::slice::from_ref(&tokens))?[0];
            let tok = if req.temperature <= 0.0 {
                argmax_token(lp)
            } else {
                let mut probs: Vec<(u32, f64)> = lp
                    .iter()
                    .enumerate()
                    .filter(|&(tok, _)| tok as u32 != PAD_ID && tok as u32 != BOS_ID)
                    .map(|(tok, &l)| (tok as u32, math::exp(l / req.temperature)))
                    .collect();
                let z: f64 = probs.iter().map(|(_, p)| p).sum();
                for p in probs.iter_mut() {
                    p.1 /= z;
                }
                if req.top_k > 0 && req.top_k < probs.len() {
                    probs.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
                    probs.truncate(req.top_k);
                    probs.sort_by_key(|&(tok, _)| tok);
                    let z: f64 = probs.iter().map(|(_, p)| p).sum();
                    for p in probs.iter_mut() {
                        p.1 /= z;
                    }
                }
                if req.top_p < 1.0 {
                    probs.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
                    let mut acc = 0.0;
                    let mut cut = probs.len();
                    for (i, &(_, p)) in probs.iter().enumerate() {
                        acc += p;
                        if acc >= req.top_p {
                            cut = i + 1;
                            break;
                        }
                    }
                    probs.truncate(cut);
                    probs.sort_by_key(|&(tok, _)| tok);
                    let z: f64 = probs.iter().map(|(_, p)| p).sum();
                    for p in probs.iter_mut() {
                        p.1 /= z;
                    }
                }
                sample_from(&probs, rng.f64())
            };
            logprob += lp[tok as usize];
            tokens.push(tok);
            if tok == EOS_ID || emitted(&tokens) >= req.max_len {
                break;
            }
        }
        out.push(Generated {
            tokens: tokens[1..].to_vec(),
            score: logprob,
        });
    }
    Ok(out)
}

fn argmax_token(logprobs: &[f64]) -> u32 {
    let mut best = 0usize;
    let mut best_v = f64::NEG_INFINITY;
    for (tok, &v) in logprobs.iter().enumerate() {
        if tok as u32 == PAD_ID || tok as u32 == BOS_ID {
            continue;
        }
        if v > best_v {
            best_v = v;
            best = tok;
        }
    }
    best as u32
}

/// Dispatch on the request's method.
pub fn generate<T: Real>(
    params: &ModelParams<T>,
    src: Option<&[u32]>,
    req: &GenerationRequest,
) -> Result<Vec<Generated>, NnError> {
    match req.method {
        Method::Beam => beam_search(params, src, req),
        Method::Sampling => sample(params, src, req),
    }
}
