use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use molgp::analysis::EmbedMode;
use molgp::io::{IoError, RunConfig};

mod commands;

/// Gaussian process regression of molecular properties with a marginalized
/// graph kernel.
#[derive(Debug, Parser)]
#[command(name = "molgp", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON configuration; defaults apply to absent fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output JSON file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Perceive one SMILES string and emit its graph.
    Parse {
        #[arg(long)]
        smiles: String,
    },
    /// Pairwise kernel matrix of a dataset.
    Kernel {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        normalized: bool,
    },
    /// Fit a model with the configured hyperparameters.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: PathBuf,
    },
    /// Sorted-id split, grid search with k-fold CV, refit and test.
    Cv {
        #[arg(long)]
        data: PathBuf,
        /// Where to save the refitted model (default: next to --out).
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Predictions, variances and (for labeled data) metrics.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Bertz complexity index of every molecule.
    Bertz {
        #[arg(long)]
        data: PathBuf,
    },
    /// Graph distances of a dataset to a model's training set.
    Distance {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Embedding of a model's training covariance matrix.
    Embed {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_parser = parse_mode)]
        mode: Option<EmbedMode>,
        #[arg(long)]
        dmax: usize,
    },
}

fn parse_mode(s: &str) -> Result<EmbedMode, String> {
    match s {
        "raw" => Ok(EmbedMode::Raw),
        "distance" => Ok(EmbedMode::Distance),
        _ => Err(format!("unknown mode {s:?} (expected raw or distance)")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let body = serde_json::json!({ "error": e.code(), "detail": e.to_string() });
            eprintln!("{body}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> molgp::Result<()> {
    let config = match &cli.common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(n) = cli.common.threads {
        if n == 0 {
            return Err(IoError::InvalidConfig("--threads must be positive".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| IoError::InvalidConfig(e.to_string()))?;
    }
    let out = cli
        .common
        .out
        .ok_or_else(|| IoError::InvalidConfig("--out is required".into()))?;
    match cli.command {
        Command::Parse { smiles } => commands::parse(&config, &smiles, &out),
        Command::Kernel { data, normalized } => commands::kernel(&config, &data, normalized, &out),
        Command::Train { data, model } => commands::train(&config, &data, &model, &out),
        Command::Cv { data, model } => {
            let model = model.unwrap_or_else(|| sibling(&out, "model.json"));
            commands::cv(&config, &data, &model, &out)
        }
        Command::Predict { model, data } => commands::predict(&config, &model, &data, &out),
        Command::Bertz { data } => commands::bertz(&config, &data, &out),
        Command::Distance { model, data } => commands::distance(&config, &model, &data, &out),
        Command::Embed { model, mode, dmax } => {
            commands::embed(mode.unwrap_or(config.embed_mode), &model, dmax, &out)
        }
    }
}

/// `report.json` -> `report.<suffix>`.
pub(crate) fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}
