//! Transformer models, weight surgery, optimization, and training loops.

pub mod functional;
pub mod gradcheck;
pub mod model;
pub mod optim;
pub mod real;
pub mod surgery;
pub mod tensor;
pub mod train;

pub use gradcheck::{grad_check, GradCheckReport};
pub use model::{
    forward_enc_dec, forward_logits, forward_tower_lm, init_params, loss_and_grads, Arch, Batch,
    ModelConfig, ModelParams, NnError, Seq2SeqBatch, TrainMode,
};
pub use real::Real;
pub use surgery::{warm_start_one_stage, warm_start_two_stage, SurgeryAudit, TensorClass};
pub use tensor::{Tensor, TensorMap};
pub use train::{pretrain_clm, pretrain_mlm, train_seq2seq, EpochStats, TrainConfig};
