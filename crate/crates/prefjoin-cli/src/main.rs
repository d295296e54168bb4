//! `prefjoin`: similarity join without a user-supplied threshold.
//!
//! Subcommands: `join` runs the full engine and prints matched pairs,
//! `eval` scores a join output against ground truth, `oracle` dumps the
//! brute-force per-threshold table for inspection.

mod commands;
mod error;
mod ingest;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use error::CliError;

#[derive(Parser)]
#[command(name = "prefjoin", version, about = "Preference-driven set similarity join")]
struct Cli {
    /// Worker threads for candidate verification (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find the preference-optimal threshold and print the joined pairs.
    Join(JoinArgs),
    /// Compare a join output against ground-truth pairs.
    Eval(EvalArgs),
    /// Brute-force all pair similarities and print the score table.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SimArg {
    Jaccard,
    Overlap,
    Dice,
    Cosine,
    Tversky,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PrefArg {
    Maxgroups,
    Minoutjoin,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PivotalArg {
    #[value(alias = "paper")]
    Mutual,
    Relaxed,
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Left-side (R) file: delimiter-separated values with a header row.
    #[arg(long)]
    left: PathBuf,

    /// Right-side (S) file.
    #[arg(long)]
    right: PathBuf,

    /// Tokenizer: `words` or `qgrams:N`.
    #[arg(long, default_value = "words")]
    tokenizer: String,

    /// Override case folding (defaults: on for words, off for q-grams).
    #[arg(long)]
    case_fold: Option<bool>,

    /// Override whitespace normalization (defaults match case folding).
    #[arg(long)]
    ws_norm: Option<bool>,

    /// Id column name (default: 1-based data row number).
    #[arg(long)]
    id_col: Option<String>,

    /// Text column(s); multiple columns are concatenated with a space.
    /// Default: every column except the id column.
    #[arg(long)]
    text_col: Vec<String>,

    /// Field delimiter override (default: by extension, .tsv tab else comma).
    #[arg(long)]
    delim: Option<char>,
}

#[derive(Args, Debug)]
struct MeasureArgs {
    /// Similarity function.
    #[arg(long)]
    sim: SimArg,

    /// Tversky alpha as an exact fraction `P/Q` (required for tversky,
    /// rejected otherwise). Alpha weights the left side.
    #[arg(long)]
    alpha: Option<String>,
}

#[derive(Args, Debug)]
struct JoinArgs {
    #[command(flatten)]
    input: InputArgs,

    #[command(flatten)]
    measure: MeasureArgs,

    /// Result-set preference to maximize.
    #[arg(long)]
    pref: PrefArg,

    /// Pivotal threshold set: `mutual` (pairs that are each other's best
    /// match) or `relaxed` (best match in at least one direction).
    #[arg(long, default_value = "mutual")]
    pivotal: PivotalArg,

    /// Append NULL-padded rows for unmatched records (full outer join).
    #[arg(long)]
    outer: bool,

    /// Append a JSON-lines run report to this file.
    #[arg(long)]
    report: Option<PathBuf>,

    /// Disable the length-based candidate routing (diagnostic).
    #[arg(long)]
    no_length_filter: bool,

    /// Disable early termination (diagnostic; never changes the result).
    #[arg(long)]
    no_early_termination: bool,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Join output to evaluate (TSV, as produced by `prefjoin join`).
    #[arg(long)]
    pred: PathBuf,

    /// Ground-truth pairs: first column R id, second column S id.
    #[arg(long)]
    truth: PathBuf,

    /// Optional datasets used to validate ground-truth ids; unreferenced
    /// ids are dropped with a warning.
    #[arg(long)]
    left: Option<PathBuf>,

    #[arg(long)]
    right: Option<PathBuf>,

    #[arg(long)]
    id_col: Option<String>,

    #[arg(long)]
    delim: Option<char>,

    /// Append a JSON-lines evaluation report to this file.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[command(flatten)]
    input: InputArgs,

    #[command(flatten)]
    measure: MeasureArgs,

    /// Refuse to enumerate more than this many pairs.
    #[arg(long, default_value_t = 10_000_000)]
    max_pairs: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads;
    let run = || match cli.command {
        Command::Join(args) => commands::join(args),
        Command::Eval(args) => commands::eval(args),
        Command::Oracle(args) => commands::oracle(args),
    };
    let result = match threads {
        Some(n) if n > 0 => {
            match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                Ok(pool) => pool.install(run),
                Err(e) => Err(CliError::Usage(format!("--threads: {e}"))),
            }
        }
        Some(_) => Err(CliError::Usage("--threads must be positive".into())),
        None => run(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("prefjoin: {err}");
            ExitCode::from(err.code() as u8)
        }
    }
}
