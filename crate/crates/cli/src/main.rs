mod commands;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use error::CliError;

/// File formats this build reads and writes.
pub const FORMATS: &[(&str, &str)] = &[
    ("rows", "v1"),
    ("dataset", "v1"),
    ("splits", "v1"),
    ("lexicon", "v1"),
    ("scores", "v1"),
    ("pairs", "v1"),
];

const VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (formats: rows v1, dataset v1, splits v1, lexicon v1, scores v1, pairs v1)"
);

/// Arabic Level of Dialectness: corpus building, baselines and evaluation.
///
/// Settings resolve as command-line flag, then environment variable
/// (ALDI_SEED, ALDI_JOBS, ALDI_CONFIG), then the `--config` TOML file.
#[derive(Parser, Debug)]
#[command(name = "aldi", version = VERSION, long_version = VERSION)]
pub struct Cli {
    /// Print results as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Worker threads for parallel stages; outputs do not depend on it.
    #[arg(long, global = true, env = "ALDI_JOBS")]
    pub jobs: Option<usize>,
    /// Write scores with full f64 precision instead of 6 decimals.
    #[arg(long, global = true)]
    pub full_precision: bool,
    /// TOML file with defaults for seed, jobs, full_precision, key_mode.
    #[arg(long, global = true, env = "ALDI_CONFIG")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Turn a raw HIT export into one row per annotated sentence.
    Ingest {
        hit_file: PathBuf,
        #[arg(long)]
        column_map: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Skip malformed lines instead of stopping at the first one.
        #[arg(long)]
        lenient: bool,
    },
    /// Group, filter, score and split annotation rows.
    BuildDataset {
        rows_file: PathBuf,
        #[arg(long, env = "ALDI_SEED")]
        seed: Option<u64>,
        /// Use a fixed article-to-split assignment instead of shuffling.
        #[arg(long)]
        splits: Option<PathBuf>,
        #[arg(long, value_enum)]
        key_mode: Option<KeyModeArg>,
        /// Output directory.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Fleiss' kappa and Krippendorff's alpha over the kept groups.
    Agreement {
        rows_file: PathBuf,
        #[arg(long, value_enum)]
        key_mode: Option<KeyModeArg>,
    },
    /// MSA lexicon from a corpus, one sentence per line.
    BuildLexicon {
        corpus: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Keep tokens seen at least this often.
        #[arg(long, default_value_t = 2)]
        min_count: u64,
    },
    /// Score sentences (plain lines or a dataset file) with one estimator.
    Score {
        /// Sentences; optional for the cmi estimator, which reads --tags.
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        est: EstimatorArgs,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// RMSE of predictions against dataset gold scores.
    Evaluate {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long, value_enum, default_value = "test")]
        split: SplitArg,
    },
    /// D' between two score populations.
    Dprime {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Divide variances by n instead of n - 1.
        #[arg(long)]
        population_variance: bool,
        /// Drop box-plot outliers from each group first.
        #[arg(long)]
        trim_outliers: bool,
    },
    /// Score contrastive MSA/EGY pairs with every configured estimator.
    Contrastive {
        pairs_file: PathBuf,
        #[command(flatten)]
        est: EstimatorArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Segment a saved speech page, score each sentence and plot the series.
    Speech {
        html: PathBuf,
        #[arg(long, value_enum, default_value = "br")]
        mode: ModeArg,
        #[command(flatten)]
        est: EstimatorArgs,
        /// Sentence-level DI labels used to color the points.
        #[arg(long)]
        di_labels: Option<PathBuf>,
        #[arg(long)]
        plot: PathBuf,
        /// Also write the series as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Keep DIAL2MSA records with perfect confidence and clean translations.
    FilterDial2msa {
        records: PathBuf,
        /// TOML with max_confidence and per-dialect distinctive terms.
        #[arg(long)]
        rules: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Args, Debug, Default)]
pub struct EstimatorArgs {
    #[arg(long, value_enum)]
    pub estimator: Option<EstimatorKind>,
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Sentence-level DI labels, one per sentence.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Token-level DI tags, one sentence per blank-line-separated block.
    #[arg(long)]
    pub tags: Option<PathBuf>,
    /// External scorer program.
    #[arg(long)]
    pub scorer: Option<String>,
    #[arg(long = "scorer-arg", allow_hyphen_values = true)]
    pub scorer_args: Vec<String>,
    /// Sentences per external scorer process.
    #[arg(long)]
    pub batch_size: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimatorKind {
    Lexicon,
    Cmi,
    BinaryDi,
    External,
}

#[derive(ValueEnum, Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum KeyModeArg {
    Normalized,
    Raw,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum SplitArg {
    Train,
    Dev,
    Test,
    All,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum ModeArg {
    Br,
    P,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    jobs: Option<usize>,
    full_precision: Option<bool>,
    key_mode: Option<KeyModeArg>,
}

/// Settings after applying flag > env > config file precedence.
#[derive(Debug)]
pub struct Settings {
    pub json: bool,
    pub jobs: Option<usize>,
    pub full_precision: bool,
    config: FileConfig,
}

impl Settings {
    fn resolve(cli: &Cli) -> Result<Self, CliError> {
        let config = match &cli.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io_at(p, e))?;
                toml::from_str(&text).map_err(|e| CliError::Format(format!("{}: {e}", p.display())))?
            }
            None => FileConfig::default(),
        };
        Ok(Self {
            json: cli.json,
            jobs: cli.jobs.or(config.jobs),
            full_precision: cli.full_precision || config.full_precision.unwrap_or(false),
            config,
        })
    }

    pub fn seed(&self, flag: Option<u64>) -> Result<u64, CliError> {
        flag.or(self.config.seed)
            .ok_or_else(|| CliError::Format("no seed: pass --seed, set ALDI_SEED or add seed to the config file".into()))
    }

    pub fn key_mode(&self, flag: Option<KeyModeArg>) -> aldi::dataset::KeyMode {
        match flag.or(self.config.key_mode) {
            Some(KeyModeArg::Raw) => aldi::dataset::KeyMode::Raw,
            _ => aldi::dataset::KeyMode::Normalized,
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let settings = Settings::resolve(&cli)?;
    if let Some(n) = settings.jobs {
        if n == 0 {
            return Err(CliError::Format("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Format(e.to_string()))?;
    }
    commands::dispatch(cli.cmd, &settings)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("aldi: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
