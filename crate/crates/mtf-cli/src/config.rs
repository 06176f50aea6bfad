//! The run configuration file (TOML). Unknown keys are errors; every
//! default is set here and nowhere else.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use mtf_core::nn::{Arch, ModelConfig};
use mtf_core::nn::optim::AdamConfig;
use mtf_core::nn::TrainConfig;

use crate::CliError;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Paths {
    pub raw: Option<PathBuf>,
    pub proteins: Option<PathBuf>,
    pub split: Option<PathBuf>,
    pub data_dir: Option<PathBuf>,
    pub src_vocab: Option<PathBuf>,
    pub tgt_vocab: Option<PathBuf>,
    pub enc_ckpt: Option<PathBuf>,
    pub dec_ckpt: Option<PathBuf>,
    pub clm_ckpt: Option<PathBuf>,
    pub model_out: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub n_layers: usize,
    pub d_model: usize,
    pub d_ff: usize,
    pub n_heads: usize,
    pub max_len: usize,
}

impl Default for ModelSection {
    fn default() -> Self {
        // Desk-scale default; the full-scale 4/256/512 layout is a config
        // change away.
        ModelSection {
            n_layers: 2,
            d_model: 64,
            d_ff: 128,
            n_heads: 4,
            max_len: 256,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub peak_lr: f64,
    pub warmup_steps: u64,
    pub batch_size: usize,
    pub grad_accum: usize,
    pub epochs: usize,
    pub dropout: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
}

impl Default for TrainSection {
    fn default() -> Self {
        TrainSection {
            peak_lr: 5e-5,
            warmup_steps: 2000,
            batch_size: 8,
            grad_accum: 8,
            epochs: 5,
            dropout: 0.1,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenerateSection {
    pub n_outputs: usize,
    pub max_len: usize,
    pub temperature: f64,
    pub top_k: usize,
    pub top_p: f64,
}

impl Default for GenerateSection {
    fn default() -> Self {
        GenerateSection {
            n_outputs: 20,
            max_len: 128,
            temperature: 1.0,
            top_k: 0,
            top_p: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BpeSection {
    pub protein_vocab_size: usize,
    pub chemical_vocab_size: usize,
}

impl Default for BpeSection {
    fn default() -> Self {
        BpeSection {
            protein_vocab_size: 10_000,
            chemical_vocab_size: 8_000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitSection {
    pub n_heldout: usize,
}

impl Default for SplitSection {
    fn default() -> Self {
        SplitSection { n_heldout: 200 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSection {
    pub alpha: f64,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection { alpha: 0.05 }
    }
}

/// Seeds are explicit; commands that need one fail validation when it is
/// absent from both the config and the command line.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Seeds {
    pub split: Option<u64>,
    pub train: Option<u64>,
    pub generate: Option<u64>,
    pub eval: Option<u64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub paths: Paths,
    pub model: ModelSection,
    pub train: TrainSection,
    pub generate: GenerateSection,
    pub bpe: BpeSection,
    pub split: SplitSection,
    pub eval: EvalSection,
    pub seeds: Seeds,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn model_config(&self, arch: Arch, vocab_src: usize, vocab_tgt: usize) -> ModelConfig {
        ModelConfig {
            n_layers: self.model.n_layers,
            d_model: self.model.d_model,
            d_ff: self.model.d_ff,
            n_heads: self.model.n_heads,
            vocab_src,
            vocab_tgt,
            max_len: self.model.max_len,
            arch,
        }
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            peak_lr: self.train.peak_lr,
            warmup_steps: self.train.warmup_steps,
            batch_size: self.train.batch_size,
            grad_accum: self.train.grad_accum,
            epochs: self.train.epochs,
            seed,
            adam: AdamConfig {
                beta1: self.train.adam_beta1,
                beta2: self.train.adam_beta2,
                eps: self.train.adam_eps,
            },
            dropout: self.train.dropout,
        }
    }

    /// Seeds as a map for the manifest.
    pub fn seed_map(&self) -> BTreeMap<String, u64> {
        let mut m = BTreeMap::new();
        if let Some(s) = self.seeds.split {
            m.insert("split".into(), s);
        }
        if let Some(s) = self.seeds.train {
            m.insert("train".into(), s);
        }
        if let Some(s) = self.seeds.generate {
            m.insert("generate".into(), s);
        }
        if let Some(s) = self.seeds.eval {
            m.insert("eval".into(), s);
        }
        m
    }
}

fn range(cond: bool, what: &str) -> Result<(), CliError> {
    if cond {
        Ok(())
    } else {
        Err(CliError::validation(format!("range error: {what}")))
    }
}

pub fn validate(cfg: &RunConfig) -> Result<(), CliError> {
    range(cfg.model.n_layers >= 1, "model.n_layers must be at least 1")?;
    range(cfg.model.d_model >= 1, "model.d_model must be positive")?;
    range(cfg.model.d_ff >= 1, "model.d_ff must be positive")?;
    range(cfg.model.n_heads >= 1, "model.n_heads must be positive")?;
    range(
        cfg.model.d_model % cfg.model.n_heads == 0,
        "model.d_model must be divisible by model.n_heads",
    )?;
    range(cfg.model.max_len >= 2, "model.max_len must be at least 2")?;
    range(cfg.train.peak_lr > 0.0, "train.peak_lr must be positive")?;
    range(cfg.train.batch_size >= 1, "train.batch_size must be positive")?;
    range(cfg.train.grad_accum >= 1, "train.grad_accum must be positive")?;
    range(
        (0.0..1.0).contains(&cfg.train.dropout),
        "train.dropout must be in [0, 1)",
    )?;
    range(
        cfg.bpe.protein_vocab_size >= 5,
        "bpe.protein_vocab_size must be at least 5",
    )?;
    range(
        cfg.bpe.chemical_vocab_size >= 5,
        "bpe.chemical_vocab_size must be at least 5",
    )?;
    range(cfg.generate.n_outputs >= 1, "generate.n_outputs must be at least 1")?;
    range(cfg.generate.max_len >= 1, "generate.max_len must be at least 1")?;
    range(
        cfg.generate.temperature >= 0.0,
        "generate.temperature must be non-negative",
    )?;
    range(
        (0.0..=1.0).contains(&cfg.generate.top_p),
        "generate.top_p must be in (0, 1]",
    )?;
    range(cfg.split.n_heldout >= 1, "split.n_heldout must be at least 1")?;
    range(
        (0.0..1.0).contains(&cfg.eval.alpha) && cfg.eval.alpha > 0.0,
        "eval.alpha must be in (0, 1)",
    )?;
    Ok(())
}

/// Parse, default, and validate a config file. Unknown keys and duplicate
/// keys are errors.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read config {}: {e}", path.display())))?;
    load_config_str(&text)
}

pub fn load_config_str(text: &str) -> Result<RunConfig, CliError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let msg = e.to_string();
        if msg.contains("unknown field") {
            CliError::validation(format!("unknown key: {msg}"))
        } else {
            CliError::validation(format!("parse error: {msg}"))
        }
    })?;
    validate(&cfg)?;
    Ok(cfg)
}

/// Canonical serialization for digesting into manifests.
pub fn canonical_toml(cfg: &RunConfig) -> String {
    toml::to_string(cfg).expect("config serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_documented_defaults() {
        let cfg = load_config_str("[paths]\nraw = \"raw.tsv\"\n").unwrap();
        assert_eq!(cfg.train.warmup_steps, 2000);
        assert_eq!(cfg.train.batch_size, 8);
        assert_eq!(cfg.train.grad_accum, 8);
        assert_eq!(cfg.generate.n_outputs, 20);
        assert_eq!(cfg.bpe.protein_vocab_size, 10_000);
        assert_eq!(cfg.bpe.chemical_vocab_size, 8_000);
        assert_eq!(cfg.split.n_heldout, 200);
        assert_eq!(cfg.train.epochs, 5);
        assert!((cfg.train.peak_lr - 5e-5).abs() < 1e-18);
        assert!((cfg.train.dropout - 0.1).abs() < 1e-12);
    }

    #[test]
    fn unknown_key_is_an_error() {
        let err = load_config_str("[train]\nbogus_key = 3\n").unwrap_err();
        assert!(err.to_string().contains("unknown key"), "{err}");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn duplicate_key_is_a_parse_error() {
        let err = load_config_str("[train]\nepochs = 1\nepochs = 2\n").unwrap_err();
        assert!(err.to_string().contains("parse error"), "{err}");
    }

    #[test]
    fn range_violations_are_reported_with_field_path() {
        let err = load_config_str("[bpe]\nprotein_vocab_size = 2\n").unwrap_err();
        assert!(err.to_string().contains("bpe.protein_vocab_size"), "{err}");
        let err = load_config_str("[model]\nd_model = 30\nn_heads = 4\n").unwrap_err();
        assert!(err.to_string().contains("divisible"), "{err}");
    }

    #[test]
    fn negative_vocab_size_fails_at_parse() {
        // usize cannot hold a negative literal, so TOML rejects it.
        let err = load_config_str("[bpe]\nprotein_vocab_size = -5\n").unwrap_err();
        assert!(err.to_string().contains("error"), "{err}");
    }

    #[test]
    fn seeds_are_optional_in_the_file() {
        let cfg = load_config_str("[seeds]\ntrain = 7\n").unwrap();
        assert_eq!(cfg.seeds.train, Some(7));
        assert_eq!(cfg.seeds.split, None);
        assert_eq!(cfg.seed_map().len(), 1);
    }
}
