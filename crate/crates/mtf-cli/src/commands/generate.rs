//! `generate`: produce molecules per protein by beam search or sampling.

use std::collections::BTreeSet;
use std::path::PathBuf;

use mtf_core::biotok::{decode as decode_ids, encode_framed, from_text};
use mtf_core::decode::{generate as run_decoder, GenerationRequest, Method};
use mtf_core::rng::fnv1a;

use super::{required_path, required_seed, Ctx};
use crate::io::checkpoint::read_checkpoint;
use crate::manifest::{manifest_path_for, ManifestBuilder};
use crate::{info, io::tsv, io_runtime, require_file, CliError};

pub struct Args {
    pub model: PathBuf,
    pub proteins: PathBuf,
    pub method: Method,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub max_len: Option<usize>,
    pub temperature: Option<f64>,
    pub top_k: Option<usize>,
    pub top_p: Option<f64>,
    pub src_vocab: Option<PathBuf>,
    pub tgt_vocab: Option<PathBuf>,
    pub out: PathBuf,
}

pub fn run(args: Args, ctx: &Ctx) -> Result<(), CliError> {
    require_file(&args.model)?;
    require_file(&args.proteins)?;
    let src_vocab_path = required_path(args.src_vocab, &ctx.cfg.paths.src_vocab, "source vocab")?;
    let tgt_vocab_path = required_path(args.tgt_vocab, &ctx.cfg.paths.tgt_vocab, "target vocab")?;
    require_file(&src_vocab_path)?;
    require_file(&tgt_vocab_path)?;
    let seed = required_seed(args.seed, ctx.cfg.seeds.generate, "generation")?;

    let params = read_checkpoint(&args.model)?;
    let src_vocab = {
        let text = std::fs::read_to_string(&src_vocab_path)
            .map_err(|e| io_runtime("reading vocab", e))?;
        from_text(&text).map_err(|e| CliError::validation(format!("source vocab: {e}")))?
    };
    let tgt_vocab = {
        let text = std::fs::read_to_string(&tgt_vocab_path)
            .map_err(|e| io_runtime("reading vocab", e))?;
        from_text(&text).map_err(|e| CliError::validation(format!("target vocab: {e}")))?
    };
    if params.cfg.vocab_src != src_vocab.len() || params.cfg.vocab_tgt != tgt_vocab.len() {
        return Err(CliError::validation(
            "vocabulary sizes do not match the checkpoint".to_string(),
        ));
    }

    // Unique proteins in first-appearance order, then sorted for output
    // determinism.
    let rows = tsv::read_pairs(&args.proteins)?;
    let mut seen = BTreeSet::new();
    let mut proteins: Vec<(String, String)> = Vec::new();
    for r in &rows {
        if seen.insert(r.protein_id.clone()) {
            proteins.push((r.protein_id.clone(), r.sequence.clone()));
        }
    }
    proteins.sort();

    let request = GenerationRequest {
        n_outputs: args.n.unwrap_or(ctx.cfg.generate.n_outputs),
        method: args.method,
        max_len: args.max_len.unwrap_or(ctx.cfg.generate.max_len),
        temperature: args.temperature.unwrap_or(ctx.cfg.generate.temperature),
        top_k: args.top_k.unwrap_or(ctx.cfg.generate.top_k),
        top_p: args.top_p.unwrap_or(ctx.cfg.generate.top_p),
        seed,
    };
    info!(
        command = "generate",
        proteins = proteins.len(),
        method = request.method.as_str(),
        n = request.n_outputs,
        seed = seed
    );

    let mut out_rows = Vec::new();
    for (protein_id, sequence) in &proteins {
        let src_ids = encode_framed(&src_vocab, sequence);
        let mut req = request.clone();
        // Independent stream per protein.
        req.seed = seed ^ fnv1a(protein_id.as_bytes());
        let generated = run_decoder(&params, Some(&src_ids), &req)
            .map_err(|e| CliError::runtime(format!("decoding for {protein_id}: {e}")))?;
        for (rank, g) in generated.iter().enumerate() {
            let smiles = decode_ids(&tgt_vocab, &g.tokens)
                .map_err(|e| CliError::runtime(format!("detokenizing: {e}")))?;
            out_rows.push(tsv::GeneratedRow {
                protein_id: protein_id.clone(),
                rank: rank + 1,
                smiles,
                score: g.score,
            });
        }
    }
    tsv::write_generated(&args.out, &out_rows)?;

    let mut seeds = ctx.cfg.seed_map();
    seeds.insert("generate".into(), seed);
    let mut manifest = ManifestBuilder::new("generate", &ctx.config_text, seeds, ctx.threads);
    manifest.input(&args.model)?;
    manifest.input(&args.proteins)?;
    manifest.input(&src_vocab_path)?;
    manifest.input(&tgt_vocab_path)?;
    manifest.output(&args.out)?;
    manifest.write(&manifest_path_for(&args.out))?;
    info!(command = "generate", rows = out_rows.len(), out = args.out.display());
    Ok(())
}
