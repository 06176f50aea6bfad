//! `split`: similarity-binned validation/test selection over a protein
//! table.

use std::path::PathBuf;

use mtf_core::seqalign::make_split;

use super::{required_path, required_seed, Ctx};
use crate::manifest::{manifest_path_for, ManifestBuilder};
use crate::{info, io::tsv, require_file, CliError};

pub struct Args {
    pub proteins: Option<PathBuf>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub out: PathBuf,
}

pub fn run(args: Args, ctx: &Ctx) -> Result<(), CliError> {
    let proteins_path = required_path(args.proteins, &ctx.cfg.paths.proteins, "proteins table")?;
    require_file(&proteins_path)?;
    let n_heldout = args.n.unwrap_or(ctx.cfg.split.n_heldout);
    let seed = required_seed(args.seed, ctx.cfg.seeds.split, "split")?;

    let proteins = tsv::read_proteins(&proteins_path)?;
    info!(command = "split", proteins = proteins.len(), n_heldout = n_heldout, seed = seed);
    let assignment = make_split(&proteins, n_heldout, seed)
        .map_err(|e| CliError::runtime(format!("split failed: {e}")))?;
    tsv::write_split(&args.out, &assignment)?;

    let mut seeds = ctx.cfg.seed_map();
    seeds.insert("split".into(), seed);
    let mut manifest = ManifestBuilder::new("split", &ctx.config_text, seeds, ctx.threads);
    manifest.input(&proteins_path)?;
    manifest.output(&args.out)?;
    manifest.write(&manifest_path_for(&args.out))?;
    info!(command = "split", out = args.out.display());
    Ok(())
}
