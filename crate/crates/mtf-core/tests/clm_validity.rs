//! Pre-finetuning the causal molecule LM should raise the validity of its
//! samples above the untrained initialization's.

use mtf_core::biotok::{decode, encode_framed, train_bpe};
use mtf_core::chem::molgen::random_molecule;
use mtf_core::chem::{canonical_smiles, is_valid};
use mtf_core::decode::{sample, GenerationRequest};
use mtf_core::nn::{init_params, pretrain_clm, Arch, ModelConfig, ModelParams, TrainConfig};
use mtf_core::rng::Rng;

fn validity_of_samples(params: &ModelParams<f32>, vocab: &mtf_core::biotok::TokenVocab) -> f64 {
    let req = GenerationRequest::sampling(60, 24, 1.0, 7);
    let samples = sample(params, None, &req).unwrap();
    let valid = samples
        .iter()
        .filter(|g| {
            decode(vocab, &g.tokens)
                .map(|s| !s.is_empty() && is_valid(&s))
                .unwrap_or(false)
        })
        .count();
    valid as f64 / samples.len() as f64
}

#[test]
fn trained_clm_beats_untrained_on_validity() {
    // Corpus: canonical forms of small random molecules.
    let mut rng = Rng::new(51);
    let corpus: Vec<String> = (0..60)
        .map(|_| canonical_smiles(&random_molecule(&mut rng, 8)))
        .collect();
    let vocab = train_bpe(&corpus, 48).unwrap();
    let ids: Vec<Vec<u32>> = corpus.iter().map(|s| encode_framed(&vocab, s)).collect();

    let tower_cfg = ModelConfig {
        n_layers: 2,
        d_model: 32,
        d_ff: 64,
        n_heads: 4,
        vocab_src: vocab.len(),
        vocab_tgt: vocab.len(),
        max_len: 32,
        arch: Arch::EncoderOnly,
    };
    let mlm: ModelParams<f32> = init_params(&tower_cfg, 5).unwrap();

    let untrained = {
        let tc = TrainConfig {
            epochs: 0,
            seed: 9,
            ..TrainConfig::default()
        };
        pretrain_clm(&mlm, &ids, &tc).unwrap().0
    };
    let trained = {
        let tc = TrainConfig {
            peak_lr: 2e-3,
            warmup_steps: 30,
            batch_size: 8,
            grad_accum: 1,
            epochs: 60,
            seed: 9,
            dropout: 0.0,
            ..TrainConfig::default()
        };
        pretrain_clm(&mlm, &ids, &tc).unwrap().0
    };

    let v_untrained = validity_of_samples(&untrained, &vocab);
    let v_trained = validity_of_samples(&trained, &vocab);
    assert!(
        v_trained > v_untrained,
        "trained {v_trained:.2} vs untrained {v_untrained:.2}"
    );
    assert!(v_trained >= 0.5, "trained validity only {v_trained:.2}");
}
