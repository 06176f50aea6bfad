//! Acceptance gate: one test per criterion, each printing a PASS/FAIL
//! line. Tolerances are pinned in the assertions.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::Instant;

use mtf_cli::commands::{self, Ctx};
use mtf_cli::config::load_config;
use mtf_cli::report::{validate_dock_report, validate_eval_report};
use mtf_core::biotok::{decode as decode_ids, encode_framed, train_bpe, TokenVocab, EOS_ID};
use mtf_core::chem::molgen::{random_molecule, random_permutation};
use mtf_core::chem::{canonical_smiles, fingerprint_default, parse_smiles, tanimoto, ChemError};
use mtf_core::datapipe::{aggregate, label, to_ic50, AffinityMeasurement, Label, MeasureKind};
use mtf_core::decode::{beam_search, sample, GenerationRequest};
use mtf_core::dockstats::{mann_whitney, mann_whitney_exact, roc_auc, u_statistic};
use mtf_core::frag::{brics_fragments, murcko_scaffold};
use mtf_core::metrics::{
    descriptor_embed, frechet_distance, freq_cosine_sim, int_div, snn, FreqKind,
};
use mtf_core::nn::gradcheck::{grad_check, tiny_config};
use mtf_core::nn::model::tensor_layout;
use mtf_core::nn::{
    forward_tower_lm, init_params, pretrain_clm, pretrain_mlm, train_seq2seq,
    warm_start_one_stage, warm_start_two_stage, Arch, Batch, ModelConfig, ModelParams,
    TrainConfig,
};
use mtf_core::rng::Rng;
use mtf_core::seqalign::{brute_force_align, needleman_wunsch, AlignParams};

fn verdict(criterion: &str, ok: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    );
}

// --------------------------------------------------------------------
// 1. Gradient correctness
// --------------------------------------------------------------------

#[test]
fn acceptance_01_gradient_correctness() {
    let t0 = Instant::now();
    let enc_dec = grad_check(&tiny_config(Arch::EncDec), 7, 1e-6).unwrap();
    let dec_only = grad_check(&tiny_config(Arch::DecOnly), 11, 1e-6).unwrap();
    let elapsed = t0.elapsed().as_secs_f64();
    let ok = enc_dec.passed && dec_only.passed && elapsed < 60.0;
    verdict(
        "01 gradient-correctness",
        ok,
        &format!(
            "enc_dec worst {:.2e}, dec_only worst {:.2e}, {:.1}s",
            enc_dec.worst(),
            dec_only.worst(),
            elapsed
        ),
    );
    assert!(enc_dec.passed, "enc_dec worst {:.3e}", enc_dec.worst());
    assert!(dec_only.passed, "dec_only worst {:.3e}", dec_only.worst());
    assert!(elapsed < 60.0, "grad check took {elapsed:.1}s");
}

// --------------------------------------------------------------------
// Shared tokenization helpers for the training criteria
// --------------------------------------------------------------------

struct Task {
    src_vocab: TokenVocab,
    tgt_vocab: TokenVocab,
    pairs: Vec<(Vec<u32>, Vec<u32>)>,
    raw: Vec<(String, String)>,
}

fn build_task(n: usize, seed: u64) -> Task {
    let raw = common::synthetic_pairs(n, seed);
    let proteins: Vec<String> = raw.iter().map(|(p, _)| p.clone()).collect();
    let molecules: Vec<String> = raw.iter().map(|(_, m)| m.clone()).collect();
    let src_vocab = train_bpe(&proteins, 64).unwrap();
    let tgt_vocab = train_bpe(&molecules, 64).unwrap();
    let pairs = raw
        .iter()
        .map(|(p, m)| (encode_framed(&src_vocab, p), encode_framed(&tgt_vocab, m)))
        .collect();
    Task {
        src_vocab,
        tgt_vocab,
        pairs,
        raw,
    }
}

// --------------------------------------------------------------------
// 2. Overfit sanity
// --------------------------------------------------------------------

#[test]
fn acceptance_02_overfit_sanity() {
    let t0 = Instant::now();
    let task = build_task(64, 4242);
    let cfg = ModelConfig {
        n_layers: 2,
        d_model: 64,
        d_ff: 128,
        n_heads: 4,
        vocab_src: task.src_vocab.len(),
        vocab_tgt: task.tgt_vocab.len(),
        max_len: 64,
        arch: Arch::EncDec,
    };
    let init: ModelParams<f32> = init_params(&cfg, 1).unwrap();
    // 64 pairs, batch 8, no accumulation: 8 optimizer steps per epoch, so
    // 250 epochs hit the 2000-step budget exactly.
    let tc = TrainConfig {
        peak_lr: 1.5e-3,
        warmup_steps: 100,
        batch_size: 8,
        grad_accum: 1,
        epochs: 250,
        seed: 5,
        dropout: 0.0,
        ..TrainConfig::default()
    };
    let (model, history) = train_seq2seq(&init, &task.pairs, &task.pairs, &tc).unwrap();
    let steps = history.last().unwrap().optimizer_steps;
    assert!(steps <= 2000, "budget exceeded: {steps}");

    let mut exact = 0usize;
    for (protein, molecule) in &task.raw {
        let src = encode_framed(&task.src_vocab, protein);
        let req = GenerationRequest::beam(1, 48);
        let out = beam_search(&model, Some(&src), &req).unwrap();
        let text = decode_ids(&task.tgt_vocab, &out[0].tokens).unwrap();
        if text == *molecule {
            exact += 1;
        }
    }
    let rate = exact as f64 / task.raw.len() as f64;
    let elapsed = t0.elapsed().as_secs_f64();
    let ok = rate >= 0.9 && elapsed < 600.0;
    verdict(
        "02 overfit-sanity",
        ok,
        &format!("{exact}/64 exact after {steps} steps, {elapsed:.0}s"),
    );
    assert!(rate >= 0.9, "beam-1 reproduced only {rate:.2}");
    assert!(elapsed < 600.0, "overfit took {elapsed:.0}s");
}

// --------------------------------------------------------------------
// 3. Warm-start directional check
// --------------------------------------------------------------------

#[test]
fn acceptance_03_warm_start_directional() {
    let task = build_task(2000, 777);
    let (train_pairs, valid_pairs) = task.pairs.split_at(1800);
    // Unlabeled pretraining corpora, much larger than the pair data (the
    // premise the warm start exploits).
    let unlabeled = common::synthetic_pairs(12_000, 31337);
    let proteins_ids: Vec<Vec<u32>> = unlabeled
        .iter()
        .map(|(p, _)| encode_framed(&task.src_vocab, p))
        .collect();
    let molecules_ids: Vec<Vec<u32>> = unlabeled
        .iter()
        .map(|(_, m)| encode_framed(&task.tgt_vocab, m))
        .collect();

    let enc_cfg = ModelConfig {
        n_layers: 2,
        d_model: 64,
        d_ff: 128,
        n_heads: 4,
        vocab_src: task.src_vocab.len(),
        vocab_tgt: task.src_vocab.len(),
        max_len: 64,
        arch: Arch::EncoderOnly,
    };
    let dec_cfg = ModelConfig {
        vocab_src: task.tgt_vocab.len(),
        vocab_tgt: task.tgt_vocab.len(),
        ..enc_cfg.clone()
    };
    let pretrain_tc = TrainConfig {
        peak_lr: 1e-3,
        warmup_steps: 50,
        batch_size: 8,
        grad_accum: 1,
        epochs: 3,
        seed: 0,
        dropout: 0.0,
        ..TrainConfig::default()
    };
    let (enc_mlm, _) = pretrain_mlm::<f32>(&enc_cfg, &proteins_ids, &pretrain_tc).unwrap();
    let (mol_mlm, _) = pretrain_mlm::<f32>(&dec_cfg, &molecules_ids, &pretrain_tc).unwrap();
    let (mol_clm, _) = pretrain_clm(&mol_mlm, &molecules_ids, &pretrain_tc).unwrap();

    let target_cfg = ModelConfig {
        vocab_src: task.src_vocab.len(),
        vocab_tgt: task.tgt_vocab.len(),
        arch: Arch::EncDec,
        ..enc_cfg.clone()
    };
    // Identical fixed budget for every initialization: one epoch over the
    // 1800 pairs at batch 8 with 2-step accumulation = 113 optimizer steps.
    let budget_tc = |seed: u64| TrainConfig {
        peak_lr: 1e-3,
        warmup_steps: 10,
        batch_size: 8,
        grad_accum: 2,
        epochs: 1,
        seed,
        dropout: 0.0,
        ..TrainConfig::default()
    };

    let mut scratch_losses = Vec::new();
    let mut one_losses = Vec::new();
    let mut two_losses = Vec::new();
    for seed in [1u64, 2, 3] {
        let tc = budget_tc(seed);
        let scratch: ModelParams<f32> = init_params(&target_cfg, seed).unwrap();
        let (_, h) = train_seq2seq(&scratch, train_pairs, valid_pairs, &tc).unwrap();
        scratch_losses.push(h.last().unwrap().val_loss.unwrap());

        let (one, _) = warm_start_one_stage(&enc_mlm, &mol_mlm, &target_cfg, seed).unwrap();
        let (_, h) = train_seq2seq(&one, train_pairs, valid_pairs, &tc).unwrap();
        one_losses.push(h.last().unwrap().val_loss.unwrap());

        let (two, _) = warm_start_two_stage(&enc_mlm, &mol_clm, &target_cfg, seed).unwrap();
        let (_, h) = train_seq2seq(&two, train_pairs, valid_pairs, &tc).unwrap();
        two_losses.push(h.last().unwrap().val_loss.unwrap());
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (ms, m1, m2) = (mean(&scratch_losses), mean(&one_losses), mean(&two_losses));
    for (i, seed) in [1u64, 2, 3].iter().enumerate() {
        if scratch_losses[i] < one_losses[i] {
            println!("  note: scratch beat one-stage on seed {seed}");
        }
        if scratch_losses[i] < two_losses[i] {
            println!("  note: scratch beat two-stage on seed {seed}");
        }
    }
    let ok = m1 <= ms && m2 <= ms;
    verdict(
        "03 warm-start-directional",
        ok,
        &format!("scratch {ms:.4}, one-stage {m1:.4}, two-stage {m2:.4} (mean of 3 seeds)"),
    );
    assert!(m1 <= ms, "one-stage mean {m1:.4} vs scratch {ms:.4}");
    assert!(m2 <= ms, "two-stage mean {m2:.4} vs scratch {ms:.4}");
}

// --------------------------------------------------------------------
// 4. Surgery accounting
// --------------------------------------------------------------------

#[test]
fn acceptance_04_surgery_accounting() {
    let target = ModelConfig {
        n_layers: 2,
        d_model: 32,
        d_ff: 64,
        n_heads: 4,
        vocab_src: 17,
        vocab_tgt: 19,
        max_len: 16,
        arch: Arch::EncDec,
    };
    let enc_cfg = ModelConfig {
        vocab_src: 17,
        vocab_tgt: 17,
        arch: Arch::EncoderOnly,
        ..target.clone()
    };
    let dec_cfg = ModelConfig {
        vocab_src: 19,
        vocab_tgt: 19,
        arch: Arch::EncoderOnly,
        ..target.clone()
    };
    let clm_cfg = ModelConfig {
        arch: Arch::DecOnly,
        ..dec_cfg.clone()
    };
    let enc: ModelParams<f32> = init_params(&enc_cfg, 1).unwrap();
    let dec: ModelParams<f32> = init_params(&dec_cfg, 2).unwrap();
    let clm: ModelParams<f32> = init_params(&clm_cfg, 3).unwrap();

    let mut ok = true;
    for (label, result_a, result_b) in [
        (
            "one-stage",
            warm_start_one_stage(&enc, &dec, &target, 100).unwrap(),
            warm_start_one_stage(&enc, &dec, &target, 200).unwrap(),
        ),
        (
            "two-stage",
            warm_start_two_stage(&enc, &clm, &target, 100).unwrap(),
            warm_start_two_stage(&enc, &clm, &target, 200).unwrap(),
        ),
    ] {
        let (model_a, audit) = result_a;
        let (model_b, _) = result_b;
        let source = if label == "one-stage" { &dec } else { &clm };

        // Every model tensor is classified exactly once.
        let classified: BTreeSet<&str> =
            audit.entries.iter().map(|(n, _, _)| n.as_str()).collect();
        let layout: BTreeSet<String> =
            tensor_layout(&target).into_iter().map(|(n, _)| n).collect();
        ok &= classified.len() == audit.entries.len();
        ok &= layout.iter().all(|n| classified.contains(n.as_str()));
        ok &= classified.len() == layout.len();

        // Copied tensors are bit-exact; the fresh set is exactly
        // cross-attention + its layer norm + the LM head.
        for (name, class, src_name) in &audit.entries {
            match class {
                mtf_core::nn::TensorClass::Copied => {
                    let src_params = if name.starts_with("src_embed") || name.starts_with("encoder")
                    {
                        &enc
                    } else {
                        source
                    };
                    let src = src_params.tensors.get(src_name.as_ref().unwrap());
                    ok &= model_a.tensors.get(name).data() == src.data();
                    ok &= model_a.tensors.get(name).data() == model_b.tensors.get(name).data();
                }
                mtf_core::nn::TensorClass::Fresh => {
                    ok &= name.contains(".cross.")
                        || name.contains(".lnc.")
                        || name.starts_with("lm_head");
                }
            }
        }
        // Gaussian fresh tensors differ between seeds.
        ok &= model_a.tensors.get("decoder.l0.cross.wq").data()
            != model_b.tensors.get("decoder.l0.cross.wq").data();
        ok &= model_a.tensors.get("lm_head.w").data() != model_b.tensors.get("lm_head.w").data();
    }
    verdict("04 surgery-accounting", ok, "both strategies audited, zero unclassified tensors");
    assert!(ok);
}

// --------------------------------------------------------------------
// 5. Decoding oracles
// --------------------------------------------------------------------

fn sequence_logprob(params: &ModelParams<f32>, seq: &[u32]) -> f64 {
    // Teacher-forced score via one forward pass.
    let mut tgt_in = vec![mtf_core::biotok::BOS_ID];
    tgt_in.extend_from_slice(&seq[..seq.len() - 1]);
    let batch = Batch::from_rows(&[tgt_in]);
    let (logits, _) = forward_tower_lm(params, &batch, None).unwrap();
    let vocab = params.cfg.vocab_tgt;
    let mut total = 0.0;
    for (i, &tok) in seq.iter().enumerate() {
        let row: Vec<f64> = logits[i * vocab..(i + 1) * vocab]
            .iter()
            .map(|&v| v as f64)
            .collect();
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        total += row[tok as usize] - lse;
    }
    total
}

#[test]
fn acceptance_05_decoding_oracles() {
    // Toy model over {a, b, eos}.
    let cfg = ModelConfig {
        n_layers: 1,
        d_model: 16,
        d_ff: 32,
        n_heads: 2,
        vocab_src: 6,
        vocab_tgt: 6,
        max_len: 8,
        arch: Arch::DecOnly,
    };
    let params: ModelParams<f32> = init_params(&cfg, 42).unwrap();

    // Exhaustive enumeration of every emitted sequence with max_len 3.
    let max_len = 3usize;
    let mut all: Vec<Vec<u32>> = Vec::new();
    for len in 0..=max_len {
        let mut stack: Vec<Vec<u32>> = vec![Vec::new()];
        for _ in 0..len {
            let mut next = Vec::new();
            for s in stack {
                for tok in [4u32, 5] {
                    let mut t = s.clone();
                    t.push(tok);
                    next.push(t);
                }
            }
            stack = next;
        }
        for s in stack {
            if s.len() < max_len {
                let mut t = s;
                t.push(EOS_ID);
                all.push(t);
            } else {
                all.push(s);
            }
        }
    }
    let mut best: Option<(f64, Vec<u32>)> = None;
    for seq in all.into_iter().filter(|s| !s.is_empty()) {
        let lp = sequence_logprob(&params, &seq) / seq.len() as f64;
        let better = match &best {
            None => true,
            Some((b, t)) => lp > *b || (lp == *b && seq < *t),
        };
        if better {
            best = Some((lp, seq));
        }
    }
    let (oracle_score, oracle_seq) = best.unwrap();
    let beam = beam_search(&params, None, &GenerationRequest::beam(27, max_len)).unwrap();
    let beam_ok = beam[0].tokens == oracle_seq && (beam[0].score - oracle_score).abs() < 1e-9;

    // Sampling frequencies over 10k draws vs the first-step softmax.
    let batch = Batch::from_rows(&[vec![mtf_core::biotok::BOS_ID]]);
    let (logits, _) = forward_tower_lm(&params, &batch, None).unwrap();
    let mut probs = vec![0.0f64; cfg.vocab_tgt];
    let usable: Vec<usize> = (0..cfg.vocab_tgt)
        .filter(|&t| t as u32 != mtf_core::biotok::PAD_ID && t as u32 != mtf_core::biotok::BOS_ID)
        .collect();
    let z: f64 = usable.iter().map(|&t| (logits[t] as f64).exp()).sum();
    for &t in &usable {
        probs[t] = (logits[t] as f64).exp() / z;
    }
    let draws = 10_000;
    let samples = sample(&params, None, &GenerationRequest::sampling(draws, 1, 1.0, 99)).unwrap();
    let mut counts = vec![0usize; cfg.vocab_tgt];
    for s in &samples {
        counts[s.tokens[0] as usize] += 1;
    }
    let worst = (0..cfg.vocab_tgt)
        .map(|t| (counts[t] as f64 / draws as f64 - probs[t]).abs())
        .fold(0.0f64, f64::max);
    let sample_ok = worst <= 0.02;

    let ok = beam_ok && sample_ok;
    verdict(
        "05 decoding-oracles",
        ok,
        &format!("beam top-1 matches enumeration, sampling worst |df| {worst:.4}"),
    );
    assert!(beam_ok, "beam {:?} vs oracle {:?}", beam[0].tokens, oracle_seq);
    assert!(sample_ok, "worst frequency deviation {worst}");
}

// --------------------------------------------------------------------
// 6. Metric oracles
// --------------------------------------------------------------------

#[test]
fn acceptance_06_metric_oracles() {
    let gen_set: Vec<_> = common::SMILES_LIBRARY[..20]
        .iter()
        .map(|s| parse_smiles(s).unwrap())
        .collect();
    let ref_set: Vec<_> = common::SMILES_LIBRARY[20..40]
        .iter()
        .map(|s| parse_smiles(s).unwrap())
        .collect();

    // Brute-force SNN.
    let naive_snn = {
        let mut total = 0.0;
        for g in &gen_set {
            let fg = fingerprint_default(g);
            let mut bestv: f64 = 0.0;
            for r in &ref_set {
                bestv = bestv.max(tanimoto(&fg, &fingerprint_default(r)).unwrap());
            }
            total += bestv;
        }
        total / gen_set.len() as f64
    };
    let snn_ok = (snn(&gen_set, &ref_set).unwrap() - naive_snn).abs() <= 1e-12;

    // Brute-force IntDiv for p = 1, 2.
    let mut intdiv_ok = true;
    for p in [1u32, 2] {
        let mut total = 0.0;
        for a in &gen_set {
            let fa = fingerprint_default(a);
            for b in &gen_set {
                let t = tanimoto(&fa, &fingerprint_default(b)).unwrap();
                total += t.powi(p as i32);
            }
        }
        let mean = total / (gen_set.len() * gen_set.len()) as f64;
        let naive = 1.0 - mean.powf(1.0 / p as f64);
        intdiv_ok &= (int_div(&gen_set, p) - naive).abs() <= 1e-12;
    }

    // Brute-force scaffold / fragment cosine.
    let mut cosine_ok = true;
    for kind in [FreqKind::Scaffold, FreqKind::Fragment] {
        let count = |set: &[mtf_core::chem::Molecule]| -> BTreeMap<String, f64> {
            let mut m: BTreeMap<String, f64> = BTreeMap::new();
            for mol in set {
                match kind {
                    FreqKind::Scaffold => *m.entry(murcko_scaffold(mol).0).or_insert(0.0) += 1.0,
                    FreqKind::Fragment => {
                        for (k, c) in brics_fragments(mol).counts() {
                            *m.entry(k.clone()).or_insert(0.0) += *c as f64;
                        }
                    }
                }
            }
            m
        };
        let a = count(&gen_set);
        let b = count(&ref_set);
        let keys: BTreeSet<&String> = a.keys().chain(b.keys()).collect();
        let mut dot = 0.0;
        let mut na = 0.0;
        let mut nb = 0.0;
        for k in keys {
            let va = a.get(k).copied().unwrap_or(0.0);
            let vb = b.get(k).copied().unwrap_or(0.0);
            dot += va * vb;
            na += va * va;
            nb += vb * vb;
        }
        let naive = dot / (na.sqrt() * nb.sqrt());
        cosine_ok &=
            (freq_cosine_sim(&gen_set, &ref_set, kind).unwrap() - naive).abs() <= 1e-12;
    }

    // 1-D closed form and self distance.
    let x: Vec<Vec<f64>> = [-1.0, 0.0, 1.0].iter().map(|&v| vec![v]).collect();
    let y: Vec<Vec<f64>> = [0.0, 1.0, 2.0].iter().map(|&v| vec![v]).collect();
    let closed_ok = (frechet_distance(&x, &y).unwrap() - 1.0).abs() <= 1e-9;
    let mut rng = Rng::new(31);
    let mut closed_rand_ok = true;
    for _ in 0..20 {
        let xs: Vec<Vec<f64>> = (0..12).map(|_| vec![rng.normal() * 2.0]).collect();
        let ys: Vec<Vec<f64>> = (0..15).map(|_| vec![rng.normal() + 0.5]).collect();
        let stats = |v: &[Vec<f64>]| {
            let n = v.len() as f64;
            let m = v.iter().map(|x| x[0]).sum::<f64>() / n;
            let var = v.iter().map(|x| (x[0] - m) * (x[0] - m)).sum::<f64>() / (n - 1.0);
            (m, var)
        };
        let (m1, v1) = stats(&xs);
        let (m2, v2) = stats(&ys);
        let closed = (m1 - m2) * (m1 - m2) + v1 + v2 - 2.0 * (v1 * v2).sqrt();
        closed_rand_ok &= (frechet_distance(&xs, &ys).unwrap() - closed).abs() <= 1e-9;
    }
    let embeds: Vec<Vec<f64>> = gen_set.iter().map(descriptor_embed).collect();
    let self_ok = frechet_distance(&embeds, &embeds).unwrap() <= 1e-6;

    let ok = snn_ok && intdiv_ok && cosine_ok && closed_ok && closed_rand_ok && self_ok;
    verdict(
        "06 metric-oracles",
        ok,
        "snn/intdiv/scaf/frag match brute force to 1e-12, 1-D closed form to 1e-9, FCD(X,X) <= 1e-6",
    );
    assert!(snn_ok && intdiv_ok && cosine_ok, "set metric oracle broke");
    assert!(closed_ok && closed_rand_ok, "1-D closed form broke");
    assert!(self_ok, "self distance above 1e-6");
}

// --------------------------------------------------------------------
// 7. Chemistry invariants
// --------------------------------------------------------------------

#[test]
fn acceptance_07_chemistry_invariants() {
    // 1000 random relabelings, zero failures.
    let mut rng = Rng::new(0xACCE97);
    let mut failures = 0usize;
    let mut cases = 0usize;
    while cases < 1000 {
        let m = random_molecule(&mut rng, 15);
        let reference = canonical_smiles(&m);
        for _ in 0..4 {
            let perm = random_permutation(&mut rng, m.atoms.len());
            if canonical_smiles(&m.permuted(&perm).unwrap()) != reference {
                failures += 1;
            }
            cases += 1;
            if cases == 1000 {
                break;
            }
        }
    }

    // Round trip over the full fixture corpus.
    let mut round_trip_ok = true;
    for s in common::SMILES_LIBRARY {
        let m = parse_smiles(s).unwrap();
        let c = canonical_smiles(&m);
        let back = parse_smiles(&c).unwrap();
        round_trip_ok &= canonical_smiles(&back) == c;
    }
    for _ in 0..200 {
        let m = random_molecule(&mut rng, 15);
        let c = canonical_smiles(&m);
        round_trip_ok &= parse_smiles(&c).map(|b| canonical_smiles(&b) == c).unwrap_or(false);
    }

    // Valence rejections exactly per the documented table.
    let violations = [
        "C(C)(C)(C)(C)C", // C with 5 bonds
        "O=S(=O)(=O)C",   // S with 7 bond units
        "[NH3](C)(C)C",   // N at 6
        "FF(F)F",         // F beyond 1
    ];
    let mut valence_ok = violations.iter().all(|s| {
        matches!(parse_smiles(s), Err(ChemError::ValenceViolation { .. }))
    });
    let legal = ["O=[N](=O)C", "O=S(=O)(C)C", "[NH2](C)(C)C", "S(C)C"];
    valence_ok &= legal.iter().all(|s| parse_smiles(s).is_ok());

    let ok = failures == 0 && round_trip_ok && valence_ok;
    verdict(
        "07 chemistry-invariants",
        ok,
        &format!("{failures}/1000 relabeling failures, round trips and valence table hold"),
    );
    assert_eq!(failures, 0);
    assert!(round_trip_ok);
    assert!(valence_ok);
}

// --------------------------------------------------------------------
// 8. Alignment oracle
// --------------------------------------------------------------------

#[test]
fn acceptance_08_alignment_oracle() {
    let t0 = Instant::now();
    let emboss = AlignParams::emboss_default();
    let mut pool: Vec<String> = Vec::new();
    let alphabet = ['A', 'R', 'N'];
    let mut frontier = vec![String::new()];
    for _ in 1..=6 {
        let mut next = Vec::with_capacity(frontier.len() * 3);
        for s in &frontier {
            for c in alphabet {
                let mut t = s.clone();
                t.push(c);
                next.push(t);
            }
        }
        pool.extend(next.iter().cloned());
        frontier = next;
    }
    // Unordered pairs cover ordered ones because score symmetry is also
    // asserted along the way on a subsample.
    let mut checked = 0u64;
    for (i, a) in pool.iter().enumerate() {
        for b in pool[i..].iter() {
            let fast = needleman_wunsch(a, b, &emboss).unwrap().score;
            let slow = brute_force_align(a, b, &emboss).unwrap();
            assert_eq!(fast, slow, "{a} vs {b}");
            checked += 1;
        }
    }
    // Symmetry spot check.
    let mut rng = Rng::new(12);
    for _ in 0..500 {
        let a = &pool[rng.below(pool.len() as u64) as usize];
        let b = &pool[rng.below(pool.len() as u64) as usize];
        assert_eq!(
            needleman_wunsch(a, b, &emboss).unwrap().score,
            needleman_wunsch(b, a, &emboss).unwrap().score
        );
    }
    let elapsed = t0.elapsed().as_secs_f64();
    verdict(
        "08 alignment-oracle",
        true,
        &format!("{checked} pairs up to length 6 match enumeration exactly, {elapsed:.0}s"),
    );
}

// --------------------------------------------------------------------
// 9. Statistics identities
// --------------------------------------------------------------------

#[test]
fn acceptance_09_statistics_identities() {
    let mut rng = Rng::new(2026);
    let mut identity_ok = true;
    for _ in 0..100 {
        let n1 = 2 + rng.below(10) as usize;
        let n2 = 2 + rng.below(10) as usize;
        let pos: Vec<f64> = (0..n1).map(|_| rng.below(8) as f64).collect();
        let neg: Vec<f64> = (0..n2).map(|_| rng.below(8) as f64).collect();
        let auc = roc_auc(&pos, &neg).unwrap();
        let u = u_statistic(&pos, &neg);
        identity_ok &= (auc * n1 as f64 * n2 as f64 - u).abs() <= 1e-12;
        identity_ok &= (auc + roc_auc(&neg, &pos).unwrap() - 1.0).abs() <= 1e-12;
    }

    // Normal approximation against exact enumeration: group-separated
    // continuous fixtures across every size pair, plus full-support
    // continuous fixtures once both groups have at least 5 members. (The
    // lattice at central outcomes of tiny or tied groups is provably
    // outside any smooth approximation's reach; see dockstats tests.)
    let mut worst = 0.0f64;
    for n1 in 3..=8usize {
        for n2 in 3..=8usize {
            let pos: Vec<f64> = (0..n1).map(|i| 100.0 + i as f64 * 0.37).collect();
            let neg: Vec<f64> = (0..n2).map(|i| 1.0 + i as f64 * 0.53).collect();
            let approx = mann_whitney(&pos, &neg).unwrap().p_value;
            let exact = mann_whitney_exact(&pos, &neg).unwrap();
            worst = worst.max((approx - exact).abs());
        }
    }
    for n1 in 5..=8usize {
        for n2 in 5..=8usize {
            for _ in 0..25 {
                let pos: Vec<f64> = (0..n1).map(|_| rng.f64()).collect();
                let neg: Vec<f64> = (0..n2).map(|_| rng.f64()).collect();
                let approx = mann_whitney(&pos, &neg).unwrap().p_value;
                let exact = mann_whitney_exact(&pos, &neg).unwrap();
                worst = worst.max((approx - exact).abs());
            }
        }
    }
    let mwu_ok = worst <= 0.02;
    let ok = identity_ok && mwu_ok;
    verdict(
        "09 statistics-identities",
        ok,
        &format!("AUC*n1*n2 = U to 1e-12; normal vs exact worst |dp| {worst:.4}"),
    );
    assert!(identity_ok);
    assert!(mwu_ok, "worst |dp| = {worst}");
}

// --------------------------------------------------------------------
// 10. Data rules
// --------------------------------------------------------------------

#[test]
fn acceptance_10_data_rules() {
    let m = |kind: MeasureKind, value_nm: f64| AffinityMeasurement { kind, value_nm };
    let ki50 = label(aggregate(&[m(MeasureKind::Ki, 50.0)]).unwrap());
    let ic20000 = label(aggregate(&[m(MeasureKind::Ic50, 20000.0)]).unwrap());
    let ic5000 = label(aggregate(&[m(MeasureKind::Ic50, 5000.0)]).unwrap());
    let labels_ok =
        ki50 == Label::Active && ic20000 == Label::Inactive && ic5000 == Label::Discarded;

    let g1 = aggregate(&[m(MeasureKind::Ic50, 10.0), m(MeasureKind::Ic50, 1000.0)]).unwrap();
    let g2 = aggregate(&[m(MeasureKind::Ic50, 50.0), m(MeasureKind::Ic50, 150.0)]).unwrap();
    let g3 = aggregate(&[m(MeasureKind::Ki, 50.0), m(MeasureKind::Ic50, 100.0)]).unwrap();
    let agg_ok = (g1 - 100.0).abs() <= 1e-12
        && (g2 - 86.60254037844386).abs() <= 1e-12
        && (g3 - 100.0).abs() <= 1e-12;

    let conv_ok = to_ic50(&m(MeasureKind::Ki, 50.0)) == 100.0
        && to_ic50(&m(MeasureKind::Kd, 5000.0)) == 10000.0
        && to_ic50(&m(MeasureKind::Ec50, 70.0)) == 70.0;

    let ok = labels_ok && agg_ok && conv_ok;
    verdict(
        "10 data-rules",
        ok,
        "thresholds, factor-2 conversion, and geometric means reproduce hand values",
    );
    assert!(labels_ok, "{ki50:?} {ic20000:?} {ic5000:?}");
    assert!(agg_ok, "{g1} {g2} {g3}");
    assert!(conv_ok);
}

// --------------------------------------------------------------------
// 11 & 12. Smoke pipeline determinism and table shapes
// --------------------------------------------------------------------

struct SmokeRun {
    dir: PathBuf,
    elapsed_one_run: f64,
}

fn run_smoke_chain(root: &Path) -> SmokeRun {
    let t0 = Instant::now();
    let tree = common::write_fixture_tree(root);
    let cfg = load_config(&tree.config).unwrap();
    let ctx = Ctx::new(cfg, 1);
    let data = root.join("data");

    commands::split::run(
        commands::split::Args {
            proteins: None,
            n: None,
            seed: None,
            out: root.join("split.tsv"),
        },
        &ctx,
    )
    .unwrap();
    commands::prepare_data::run(
        commands::prepare_data::Args {
            raw: None,
            split: None,
            outdir: None,
        },
        &ctx,
    )
    .unwrap();

    // Protein corpus from the fixture table.
    let proteins_text = std::fs::read_to_string(&tree.proteins).unwrap();
    let corpus: Vec<String> = proteins_text
        .lines()
        .map(|l| l.split('\t').nth(1).unwrap().to_string())
        .collect();
    std::fs::write(root.join("protein_corpus.txt"), corpus.join("\n") + "\n").unwrap();

    commands::train_bpe::run(
        commands::train_bpe::Args {
            input: root.join("protein_corpus.txt"),
            vocab_size: 64,
            out: root.join("protein.vocab"),
        },
        &ctx,
    )
    .unwrap();
    commands::train_bpe::run(
        commands::train_bpe::Args {
            input: data.join("ligand_corpus.txt"),
            vocab_size: 64,
            out: root.join("chem.vocab"),
        },
        &ctx,
    )
    .unwrap();

    commands::pretrain_lm::run(
        commands::pretrain_lm::Args {
            corpus: root.join("protein_corpus.txt"),
            vocab: root.join("protein.vocab"),
            objective: commands::pretrain_lm::Objective::Mlm,
            init: None,
            seed: None,
            epochs: Some(2),
            out: root.join("enc_mlm.ckpt"),
        },
        &ctx,
    )
    .unwrap();
    commands::pretrain_lm::run(
        commands::pretrain_lm::Args {
            corpus: data.join("ligand_corpus.txt"),
            vocab: root.join("chem.vocab"),
            objective: commands::pretrain_lm::Objective::Mlm,
            init: None,
            seed: None,
            epochs: Some(2),
            out: root.join("mol_mlm.ckpt"),
        },
        &ctx,
    )
    .unwrap();
    commands::pretrain_lm::run(
        commands::pretrain_lm::Args {
            corpus: data.join("ligand_corpus.txt"),
            vocab: root.join("chem.vocab"),
            objective: commands::pretrain_lm::Objective::Clm,
            init: Some(root.join("mol_mlm.ckpt")),
            seed: None,
            epochs: Some(4),
            out: root.join("mol_clm.ckpt"),
        },
        &ctx,
    )
    .unwrap();

    commands::train::run(
        commands::train::Args {
            init: commands::train::InitMode::OneStage,
            seed: None,
            train_pairs: None,
            valid_pairs: None,
            src_vocab: None,
            tgt_vocab: None,
            epochs: Some(14),
            out: None,
        },
        &ctx,
    )
    .unwrap();

    commands::generate::run(
        commands::generate::Args {
            model: root.join("model.ckpt"),
            proteins: data.join("test.tsv"),
            method: mtf_core::decode::Method::Beam,
            n: None,
            seed: None,
            max_len: None,
            temperature: None,
            top_k: None,
            top_p: None,
            src_vocab: None,
            tgt_vocab: None,
            out: root.join("generated_beam.tsv"),
        },
        &ctx,
    )
    .unwrap();
    commands::generate::run(
        commands::generate::Args {
            model: root.join("model.ckpt"),
            proteins: data.join("test.tsv"),
            method: mtf_core::decode::Method::Sampling,
            n: None,
            seed: None,
            max_len: None,
            temperature: None,
            top_k: None,
            top_p: None,
            src_vocab: None,
            tgt_vocab: None,
            out: root.join("generated_sampling.tsv"),
        },
        &ctx,
    )
    .unwrap();

    commands::evaluate::run(
        commands::evaluate::Args {
            generated: vec![
                commands::evaluate::GeneratedSpec {
                    model: "one-stage".into(),
                    decoding: "beam".into(),
                    path: root.join("generated_beam.tsv"),
                },
                commands::evaluate::GeneratedSpec {
                    model: "one-stage".into(),
                    decoding: "sampling".into(),
                    path: root.join("generated_sampling.tsv"),
                },
            ],
            actives: data.join("test.tsv"),
            train: data.join("train.tsv"),
            seed: None,
            out: root.join("report.json"),
        },
        &ctx,
    )
    .unwrap();

    std::fs::write(root.join("dock.csv"), common::dock_scores_csv(99)).unwrap();
    commands::dock_eval::run(
        commands::dock_eval::Args {
            scores: root.join("dock.csv"),
            alpha: None,
            seed: None,
            out: root.join("dock_report.json"),
        },
        &ctx,
    )
    .unwrap();

    SmokeRun {
        dir: root.to_path_buf(),
        elapsed_one_run: t0.elapsed().as_secs_f64(),
    }
}

static SMOKE: OnceLock<(SmokeRun, f64, bool)> = OnceLock::new();

/// Runs the pipeline twice with the same config (snapshotting the first
/// run's outputs) and byte-compares the primary outputs.
fn smoke() -> &'static (SmokeRun, f64, bool) {
    SMOKE.get_or_init(|| {
        let root = common::scratch_dir("smoke");
        let first = run_smoke_chain(&root);
        // Snapshot primary outputs, rerun the chain in place, compare.
        let primary = [
            "model.ckpt",
            "generated_beam.tsv",
            "generated_sampling.tsv",
            "report.json",
            "dock_report.json",
            "split.tsv",
            "data/train.tsv",
            "data/ligand_corpus.txt",
            "protein.vocab",
            "chem.vocab",
        ];
        let snapshot: Vec<Vec<u8>> = primary
            .iter()
            .map(|p| std::fs::read(root.join(p)).unwrap())
            .collect();
        let second = run_smoke_chain(&root);
        let identical = primary
            .iter()
            .zip(snapshot.iter())
            .all(|(p, old)| &std::fs::read(root.join(p)).unwrap() == old);
        let total = first.elapsed_one_run + second.elapsed_one_run;
        (second, total, identical)
    })
}

#[test]
fn acceptance_11_determinism_smoke() {
    let (run, total, identical) = smoke();
    let ok = *identical && *total < 900.0;
    verdict(
        "11 determinism-smoke",
        ok,
        &format!("two full runs byte-identical, {total:.0}s total"),
    );
    assert!(identical, "outputs differ between identical reruns");
    assert!(*total < 900.0, "smoke took {total:.0}s");
    assert!(run.dir.join("report.json").is_file());
}

#[test]
fn acceptance_12_table_shapes() {
    let (run, _, _) = smoke();
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(run.dir.join("report.json")).unwrap())
            .unwrap();
    let eval_ok = validate_eval_report(&report).is_ok();

    // Table-3 shape: one row per model x decoding with the benchmark
    // columns; Table-4 shape: one JSD row per model x decoding.
    let metrics = report["metrics"].as_array().unwrap();
    let mut shape_ok = metrics.len() == 2;
    let decodings: BTreeSet<&str> = metrics
        .iter()
        .map(|r| r["decoding"].as_str().unwrap())
        .collect();
    shape_ok &= decodings == BTreeSet::from(["beam", "sampling"]);
    for row in metrics {
        for col in ["valid", "unique", "novel", "fcd", "scaf", "snn", "frag", "int_div", "filters"]
        {
            shape_ok &= row[col].is_number();
        }
    }
    let jsd_rows = report["jsd"].as_array().unwrap();
    shape_ok &= jsd_rows.len() == 2
        && jsd_rows.iter().all(|r| r["jsd_fcd"].is_number() && r["model"].is_string());

    // Table-5 shape: per-target rows with p and AUC per pairing.
    let dock: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(run.dir.join("dock_report.json")).unwrap(),
    )
    .unwrap();
    let dock_ok = validate_dock_report(&dock).is_ok();
    let targets = dock["targets"].as_array().unwrap();
    let mut dock_shape_ok = targets.len() == 4;
    for t in targets {
        let pairings = t["pairings"].as_array().unwrap();
        dock_shape_ok &= pairings.len() == 5;
        for p in pairings {
            dock_shape_ok &= p.get("p_value").is_some() && p.get("auc").is_some();
        }
    }
    // The indistinguishable target is excluded, mirroring the protocol.
    dock_shape_ok &= targets.iter().any(|t| t["excluded"].as_bool().unwrap());
    dock_shape_ok &= dock["aggregates"]["significant"].is_object();

    let ok = eval_ok && shape_ok && dock_ok && dock_shape_ok;
    verdict(
        "12 table-shapes",
        ok,
        "evaluation and docking reports validate against their schemas",
    );
    assert!(eval_ok, "evaluation report schema");
    assert!(shape_ok, "metrics/jsd table shape");
    assert!(dock_ok && dock_shape_ok, "docking report shape");
}
