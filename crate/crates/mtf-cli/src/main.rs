use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mtf_cli::commands::{self, Ctx};
use mtf_cli::config::{load_config, RunConfig};
use mtf_cli::manifest::resolve_threads;
use mtf_cli::CliError;
use mtf_core::decode::Method;

#[derive(Parser)]
#[command(
    name = "mtf",
    about = "Protein-to-molecule translation pipeline: data curation, biochemical BPE, warm-started seq2seq training, generation, and evaluation",
    version
)]
struct Cli {
    /// Run configuration file (TOML). Defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads recorded in run manifests (kernels are
    /// single-threaded for determinism). Falls back to MTF_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assign proteins to train/validation/test by family-stratified,
    /// similarity-binned sampling.
    Split {
        #[arg(long)]
        proteins: Option<PathBuf>,
        /// Heldout proteins per round (default from config; 200).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Filter and label raw interactions; emit pair files, the ligand
    /// corpus, and the drop report.
    PrepareData {
        #[arg(long)]
        raw: Option<PathBuf>,
        #[arg(long)]
        split: Option<PathBuf>,
        #[arg(long)]
        outdir: Option<PathBuf>,
    },
    /// Train a byte-pair vocabulary from a line corpus.
    TrainBpe {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        vocab_size: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Self-supervised tower pretraining (mlm) or causal molecule-LM
    /// pre-finetuning (clm).
    PretrainLm {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long)]
        objective: String,
        #[arg(long)]
        init: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fine-tune the translation model from a scratch, one-stage, or
    /// two-stage initialization.
    Train {
        #[arg(long)]
        init: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        train_pairs: Option<PathBuf>,
        #[arg(long)]
        valid_pairs: Option<PathBuf>,
        #[arg(long)]
        src_vocab: Option<PathBuf>,
        #[arg(long)]
        tgt_vocab: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate molecules per protein with beam search or sampling.
    Generate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        proteins: PathBuf,
        #[arg(long)]
        method: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        max_len: Option<usize>,
        #[arg(long)]
        temperature: Option<f64>,
        #[arg(long)]
        top_k: Option<usize>,
        #[arg(long)]
        top_p: Option<f64>,
        #[arg(long)]
        src_vocab: Option<PathBuf>,
        #[arg(long)]
        tgt_vocab: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute benchmark metrics, per-protein tables, and JSD rows.
    Evaluate {
        /// Repeatable: model:decoding=path
        #[arg(long)]
        generated: Vec<String>,
        #[arg(long)]
        actives: PathBuf,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Discrimination statistics over an external docking score table.
    DockEval {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Verify analytic gradients against central finite differences.
    GradCheck {
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let cfg: RunConfig = match &cli.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    let threads = resolve_threads(cli.threads);
    let ctx = Ctx::new(cfg, threads);

    match cli.command {
        Command::Split {
            proteins,
            n,
            seed,
            out,
        } => commands::split::run(
            commands::split::Args {
                proteins,
                n,
                seed,
                out,
            },
            &ctx,
        ),
        Command::PrepareData { raw, split, outdir } => {
            commands::prepare_data::run(commands::prepare_data::Args { raw, split, outdir }, &ctx)
        }
        Command::TrainBpe {
            input,
            vocab_size,
            out,
        } => commands::train_bpe::run(
            commands::train_bpe::Args {
                input,
                vocab_size,
                out,
            },
            &ctx,
        ),
        Command::PretrainLm {
            corpus,
            vocab,
            objective,
            init,
            seed,
            epochs,
            out,
        } => {
            let objective = commands::pretrain_lm::Objective::from_str(&objective)
                .ok_or_else(|| CliError::validation("objective must be `mlm` or `clm`"))?;
            commands::pretrain_lm::run(
                commands::pretrain_lm::Args {
                    corpus,
                    vocab,
                    objective,
                    init,
                    seed,
                    epochs,
                    out,
                },
                &ctx,
            )
        }
        Command::Train {
            init,
            seed,
            train_pairs,
            valid_pairs,
            src_vocab,
            tgt_vocab,
            epochs,
            out,
        } => {
            let init = commands::train::InitMode::from_str(&init).ok_or_else(|| {
                CliError::validation("init must be one of one-stage|two-stage|scratch")
            })?;
            commands::train::run(
                commands::train::Args {
                    init,
                    seed,
                    train_pairs,
                    valid_pairs,
                    src_vocab,
                    tgt_vocab,
                    epochs,
                    out,
                },
                &ctx,
            )
        }
        Command::Generate {
            model,
            proteins,
            method,
            n,
            seed,
            max_len,
            temperature,
            top_k,
            top_p,
            src_vocab,
            tgt_vocab,
            out,
        } => {
            let method = Method::from_str(&method)
                .ok_or_else(|| CliError::validation("method must be `beam` or `sampling`"))?;
            commands::generate::run(
                commands::generate::Args {
                    model,
                    proteins,
                    method,
                    n,
                    seed,
                    max_len,
                    temperature,
                    top_k,
                    top_p,
                    src_vocab,
                    tgt_vocab,
                    out,
                },
                &ctx,
            )
        }
        Command::Evaluate {
            generated,
            actives,
            train,
            seed,
            out,
        } => {
            let generated = generated
                .iter()
                .map(|s| commands::evaluate::GeneratedSpec::parse(s))
                .collect::<Result<Vec<_>, _>>()?;
            commands::evaluate::run(
                commands::evaluate::Args {
                    generated,
                    actives,
                    train,
                    seed,
                    out,
                },
                &ctx,
            )
        }
        Command::DockEval {
            scores,
            alpha,
            seed,
            out,
        } => commands::dock_eval::run(
            commands::dock_eval::Args {
                scores,
                alpha,
                seed,
                out,
            },
            &ctx,
        ),
        Command::GradCheck {
            tolerance,
            seed,
            out,
        } => commands::grad_check::run(
            commands::grad_check::Args {
                tolerance,
                seed,
                out,
            },
            &ctx,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
