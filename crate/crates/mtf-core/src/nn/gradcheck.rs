//! Finite-difference verification of the analytic backward pass.
//!
//! Runs in f64. For every parameter tensor the check perturbs each element
//! by ±h, recomputes the loss, and compares the central difference against
//! the analytic gradient. Per-tensor error is normalized by the largest
//! gradient magnitude in that tensor (floored), which keeps the measure
//! meaningful when a tensor's gradients are uniformly tiny.

use alloc::string::String;
use alloc::vec::Vec;

use super::model::{
    init_params, loss_and_grads, loss_and_grads_tower, Arch, Batch, ModelConfig, ModelParams,
    NnError, Seq2SeqBatch,
};
use crate::rng::Rng;

const FD_STEP: f64 = 1e-5;
/// Per-tensor error denominator floor. Some tensors have structurally
/// zero gradients (the key-projection bias cancels inside the softmax), so
/// both sides sit at rounding level; the floor keeps finite-difference
/// noise (~1e-11 here) from registering as relative error while leaving a
/// genuine defect of any practical size detectable (a wrong term of
/// magnitude 1e-5 still reads as 1e-2 against this floor).
const SCALE_FLOOR: f64 = 1e-3;

/// Re-draw parameters at a healthy scale. The production init (std 0.02)
/// leaves attention near-uniform, which drives some gradients below the
/// resolution of central differences; the checker instead verifies the
/// backward code at a point where every path carries signal.
fn randomize_for_check(params: &mut super::model::ModelParams<f64>, rng: &mut Rng) {
    let names: Vec<String> = params.tensors.names().map(String::from).collect();
    for name in names {
        let t = params.tensors.get_mut(&name);
        if name.ends_with(".g") {
            for v in t.data_mut() {
                *v = 1.0 + 0.2 * rng.normal();
            }
        } else {
            for v in t.data_mut() {
                *v = 0.4 * rng.normal();
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorReport {
    pub name: String,
    pub max_rel_err: f64,
    pub checked: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub arch: Arch,
    pub tolerance: f64,
    pub tensors: Vec<TensorReport>,
    pub passed: bool,
}

impl GradCheckReport {
    pub fn worst(&self) -> f64 {
        self.tensors.iter().fold(0.0, |m, t| m.max(t.max_rel_err))
    }
}

fn toy_seq2seq_batch(cfg: &ModelConfig, rng: &mut Rng) -> Seq2SeqBatch {
    let b = 2;
    let ls = 5.min(cfg.max_len);
    let lt = 5.min(cfg.max_len);
    let mut pairs = Vec::new();
    for _ in 0..b {
        let src: Vec<u32> = (0..ls)
            .map(|i| {
                if i == 0 {
                    crate::biotok::BOS_ID
                } else if i == ls - 1 {
                    crate::biotok::EOS_ID
                } else {
                    4 + rng.below((cfg.vocab_src - 4) as u64) as u32
                }
            })
            .collect();
        let tgt: Vec<u32> = (0..lt)
            .map(|i| {
                if i == 0 {
                    crate::biotok::BOS_ID
                } else if i == lt - 1 {
                    crate::biotok::EOS_ID
                } else {
                    4 + rng.below((cfg.vocab_tgt - 4) as u64) as u32
                }
            })
            .collect();
        pairs.push((src, tgt));
    }
    // One ragged row exercises padding.
    pairs[0].0.truncate(ls - 1);
    pairs[0].0.push(crate::biotok::EOS_ID);
    Seq2SeqBatch::from_pairs(&pairs)
}

fn loss_of(params: &ModelParams<f64>, batch: &Seq2SeqBatch, ids: &Batch, targets: &[u32]) -> f64 {
    match params.cfg.arch {
        Arch::EncDec => {
            let mut grads = params.tensors.zeros_like();
            loss_and_grads(params, batch, &mut grads, None).expect("forward")
        }
        _ => {
            let mut grads = params.tensors.zeros_like();
            loss_and_grads_tower(params, ids, targets, &mut grads, None).expect("forward")
        }
    }
}

/// Check every tensor of a model built from `cfg` with seed `seed`.
/// `corrupt_tensor` perturbs one analytic gradient tensor before the
/// comparison; it exists as a negative control for the checker itself.
pub fn grad_check_with_corruption(
    cfg: &ModelConfig,
    seed: u64,
    tolerance: f64,
    corrupt_tensor: Option<&str>,
) -> Result<GradCheckReport, NnError> {
    cfg.validate()?;
    let mut params: ModelParams<f64> = init_params(cfg, seed)?;
    let mut rng = Rng::for_key(seed, "gradcheck-data");
    randomize_for_check(&mut params, &mut rng);
    let batch = toy_seq2seq_batch(cfg, &mut rng);

    // Tower objective: next-token prediction on the tgt side of the batch.
    let ids = batch.tgt_in.clone();
    let mut targets = batch.tgt_out.clone();
    if cfg.arch == Arch::EncoderOnly {
        // Denoising stand-in: predict the input at every non-pad position.
        targets = ids.ids.clone();
    }

    let mut grads = params.tensors.zeros_like();
    let base_loss = match cfg.arch {
        Arch::EncDec => loss_and_grads(&params, &batch, &mut grads, None)?,
        _ => loss_and_grads_tower(&params, &ids, &targets, &mut grads, None)?,
    };
    if !base_loss.is_finite() {
        return Err(NnError::NonFiniteLoss { step: 0 });
    }
    if let Some(name) = corrupt_tensor {
        let g = grads.get_mut(name);
        g.data_mut()[0] += 1e-3;
    }

    let names: Vec<String> = params.tensors.names().map(String::from).collect();
    let mut tensors = Vec::with_capacity(names.len());
    for name in names {
        let n = params.tensors.get(&name).numel();
        let analytic_max = grads
            .get(&name)
            .data()
            .iter()
            .fold(0.0f64, |m, &g| m.max(g.abs()));
        let mut fd_max = 0.0f64;
        let mut diff_max = 0.0f64;
        for i in 0..n {
            let orig = params.tensors.get(&name).data()[i];
            params.tensors.get_mut(&name).data_mut()[i] = orig + FD_STEP;
            let up = loss_of(&params, &batch, &ids, &targets);
            params.tensors.get_mut(&name).data_mut()[i] = orig - FD_STEP;
            let down = loss_of(&params, &batch, &ids, &targets);
            params.tensors.get_mut(&name).data_mut()[i] = orig;
            let fd = (up - down) / (2.0 * FD_STEP);
            let analytic = grads.get(&name).data()[i];
            fd_max = fd_max.max(fd.abs());
            diff_max = diff_max.max((fd - analytic).abs());
        }
        let max_rel = diff_max / analytic_max.max(fd_max).max(SCALE_FLOOR);
        tensors.push(TensorReport {
            name,
            max_rel_err: max_rel,
            checked: n,
        });
    }
    let passed = tensors.iter().all(|t| t.max_rel_err <= tolerance);
    Ok(GradCheckReport {
        arch: cfg.arch,
        tolerance,
        tensors,
        passed,
    })
}

/// Gradient check against central finite differences in double precision.
pub fn grad_check(cfg: &ModelConfig, seed: u64, tolerance: f64) -> Result<GradCheckReport, NnError> {
    grad_check_with_corruption(cfg, seed, tolerance, None)
}

/// Tiny configuration used by the `grad-check` command and the acceptance
/// gate: 2 layers, d_model 8, 2 heads.
pub fn tiny_config(arch: Arch) -> ModelConfig {
    ModelConfig {
        n_layers: 2,
        d_model: 8,
        d_ff: 16,
        n_heads: 2,
        vocab_src: 11,
        vocab_tgt: 13,
        max_len: 8,
        arch,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enc_dec_gradients_match_finite_differences() {
        let report = grad_check(&tiny_config(Arch::EncDec), 7, 1e-6).unwrap();
        assert!(
            report.passed,
            "worst {} on {:?}",
            report.worst(),
            report
                .tensors
                .iter()
                .max_by(|a, b| a.max_rel_err.partial_cmp(&b.max_rel_err).unwrap())
                .map(|t| &t.name)
        );
    }

    #[test]
    fn dec_only_gradients_match_finite_differences() {
        let report = grad_check(&tiny_config(Arch::DecOnly), 11, 1e-6).unwrap();
        assert!(report.passed, "worst {}", report.worst());
    }

    #[test]
    fn encoder_only_gradients_match_finite_differences() {
        let report = grad_check(&tiny_config(Arch::EncoderOnly), 13, 1e-6).unwrap();
        assert!(report.passed, "worst {}", report.worst());
    }

    #[test]
    fn corrupted_backward_fails_the_check() {
        let report =
            grad_check_with_corruption(&tiny_config(Arch::EncDec), 7, 1e-6, Some("lm_head.b"))
                .unwrap();
        assert!(!report.passed, "corruption must be detected");
    }
}
