//! The `gdim` command line.
//!
//! Every subcommand writes its outputs and a `manifest.json` into `--out`.
//! A `--config FILE` of `key = value` lines supplies defaults for any flag of
//! the subcommand; flags given on the command line take precedence.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or input error.

mod commands;
mod manifest;

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{ArgAction, Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::apps::{ControlToken, DEFAULT_MIN_PARAGRAPHS};
use crate::labels::{Dimension, GenderLabel};
use crate::textkit::{MaskMode, DEFAULT_MIN_COUNT};

pub use manifest::{sha256_hex, RunContext, RunManifest, MANIFEST_FILE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable naming the default lexicon directory.
pub const LEXICON_ENV: &str = "GDIM_LEXICON_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "gdim",
    version,
    about = "Multi-dimensional gender annotation, classification and auditing"
)]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Output directory (created if missing).
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    /// Root seed for every random substream.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Lexicon directory; defaults to $GDIM_LEXICON_DIR, then the built-in lexicon.
    #[arg(long)]
    pub lexicon_dir: Option<PathBuf>,
    /// File of `key = value` defaults for this subcommand's flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Label raw text, conversations or scored records with rule-based annotators.
    Annotate(AnnotateArgs),
    /// Train a single-task or multitask classifier.
    Train(TrainArgs),
    /// Evaluate a model and print the per-class accuracy grid.
    Eval(EvalArgs),
    /// Fill unknown ABOUT labels with model predictions.
    Impute(ImputeArgs),
    /// Rank documents by the median masculine probability of their paragraphs.
    Score(ScoreArgs),
    /// Per-gender word over-representation ranking.
    Stats(StatsArgs),
    /// Prefix utterances with DIM:label control tokens.
    ControlCorpus(ControlCorpusArgs),
    /// Sample utterances from a control-token n-gram model.
    Generate(GenerateArgs),
    /// Gendered-word statistics of generated text.
    StatsGen(StatsGenArgs),
    /// Compare masculine shares of safe and offensive utterances.
    Offense(OffenseArgs),
    /// Lexicon utilities.
    #[command(subcommand)]
    Lexicon(LexiconCommand),
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LexiconCommand {
    /// Write the active lexicon as editable files.
    Export(LexiconExportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// ABOUT from pronoun majority.
    Pronoun,
    /// ABOUT (text) or speaker gender (conversations) from kinship terms.
    Kinship,
    /// ABOUT from a `name` field, or speaker gender from the speaker name.
    Names,
    /// Speaker gender from persona lines.
    Persona,
    /// TO from the next or previous speaker.
    Dialogue,
    /// AS from `prob_masculine` scores with a confidence cut-off.
    Retention,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    About,
    To,
    As,
    Multitask,
}

impl Task {
    pub fn dimensions(self) -> Vec<Dimension> {
        match self {
            Task::About => vec![Dimension::About],
            Task::To => vec![Dimension::To],
            Task::As => vec![Dimension::As],
            Task::Multitask => Dimension::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DataFormat {
    Canonical,
    Mdgender,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AnnotateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Input: JSONL conversations, JSONL text or scored records, or plain text lines.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "pronoun")]
    pub rules: Vec<Rule>,
    #[arg(long, default_value_t = 0.9)]
    pub name_threshold: f64,
    #[arg(long, default_value_t = 0.9)]
    pub retention_threshold: f64,
    /// Label for they-majority texts: neutral or unknown.
    #[arg(long, default_value = "neutral")]
    pub they_maps_to: GenderLabel,
    /// Source name stored on every example; defaults to the input file stem.
    #[arg(long)]
    pub source: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    /// Canonical corpus files; repeat or comma-separate.
    #[arg(long, required = true, value_delimiter = ',')]
    pub train: Vec<PathBuf>,
    /// Validation corpus; without it the training data is split.
    #[arg(long)]
    pub valid: Option<PathBuf>,
    /// Train/valid/test fractions used when --valid is absent.
    #[arg(long, default_value = "0.8,0.1,0.1", value_parser = parse_fractions)]
    pub split: (f64, f64, f64),
    #[arg(long, value_enum, default_value = "multitask")]
    pub task: Task,
    #[arg(long, default_value_t = 20)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.5)]
    pub lr: f64,
    #[arg(long, default_value_t = 32)]
    pub embed_dim: usize,
    /// log2 of the number of hashed feature buckets.
    #[arg(long, default_value_t = 18, value_parser = clap::value_parser!(u32).range(1..=31))]
    pub feature_bits: u32,
    #[arg(long, default_value_t = 0.1)]
    pub init_scale: f64,
    #[arg(long)]
    pub patience: Option<usize>,
    /// Mask gendered words (and names) before training.
    #[arg(long, default_value = "none")]
    pub mask: MaskMode,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value = "canonical")]
    pub format: DataFormat,
    /// Only examples whose confidence is `certain`.
    #[arg(long)]
    pub certain_only: bool,
    /// Rank all of the model's classes rather than the in-dimension set.
    #[arg(long)]
    pub nine_way: bool,
    /// Apply the same masking the model was trained with.
    #[arg(long, default_value = "none")]
    pub mask: MaskMode,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ImputeArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long = "in")]
    pub input: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub model: PathBuf,
    /// JSONL documents `{"doc_id", "title", "paragraphs"}`.
    #[arg(long)]
    pub docs: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MIN_PARAGRAPHS)]
    pub min_paragraphs: usize,
    /// Number of documents printed from each end of the ranking.
    #[arg(long, default_value_t = 10)]
    pub top: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StatsArgs {
    #[command(flatten)]
    pub common: Common,
    /// Canonical corpus.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Dimension whose labels group the documents.
    #[arg(long, default_value = "about")]
    pub dimension: Dimension,
    #[arg(long, default_value_t = DEFAULT_MIN_COUNT)]
    pub min_count: u64,
    /// JSONL file of tag arrays aligned with the corpus tokens, one line per example.
    #[arg(long, requires = "pos")]
    pub tags: Option<PathBuf>,
    /// Tags to keep, e.g. ADJ,VERB.
    #[arg(long, value_delimiter = ',', requires = "tags")]
    pub pos: Vec<String>,
    /// Rows printed per gender.
    #[arg(long, default_value_t = 20)]
    pub top: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(group(clap::ArgGroup::new("labeler").required(true).args(["model", "wordlist"])))]
pub struct ControlCorpusArgs {
    #[command(flatten)]
    pub common: Common,
    /// Plain text, one utterance per line.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Dimensions to emit; one output line per utterance and dimension.
    #[arg(long, value_delimiter = ',', default_value = "about")]
    pub dimension: Vec<Dimension>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Label with the word-list baseline instead of a model.
    #[arg(long)]
    pub wordlist: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Control corpus (`DIM:label utterance` lines).
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub order: usize,
    #[arg(long, default_value_t = 1.0)]
    pub smoothing: f64,
    /// Control tokens to condition on; repeat or comma-separate.
    #[arg(long, required = true, value_delimiter = ',')]
    pub control: Vec<ControlToken>,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Block repeated n-grams of this length.
    #[arg(long, default_value_t = 3)]
    pub block: usize,
    #[arg(long, default_value_t = 20)]
    pub min_tokens: usize,
    #[arg(long, default_value_t = 60)]
    pub max_tokens: usize,
    /// Generations per control token.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Tag generations as word-list baseline output (`WORDLIST:label`).
    #[arg(long)]
    pub wordlist_baseline: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StatsGenArgs {
    #[command(flatten)]
    pub common: Common,
    /// Generation TSV files from `generate`.
    #[arg(long = "in", required = true, value_delimiter = ',')]
    pub input: Vec<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OffenseArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub safe: PathBuf,
    #[arg(long)]
    pub offensive: PathBuf,
    /// Also list frequent words of confidently gendered offensive utterances.
    #[arg(long)]
    pub words: bool,
    #[arg(long, default_value_t = 0.7)]
    pub prob_threshold: f64,
    #[arg(long, default_value_t = 3)]
    pub min_len: usize,
    #[arg(long, default_value_t = 20)]
    pub top_n: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LexiconExportArgs {
    #[command(flatten)]
    pub common: Common,
}

fn parse_fractions(s: &str) -> Result<(f64, f64, f64), String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [a, b, c] => Ok((a, b, c)),
        _ => Err("expected three comma-separated fractions".into()),
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Annotate(_) => "annotate",
            Command::Train(_) => "train",
            Command::Eval(_) => "eval",
            Command::Impute(_) => "impute",
            Command::Score(_) => "score",
            Command::Stats(_) => "stats",
            Command::ControlCorpus(_) => "control-corpus",
            Command::Generate(_) => "generate",
            Command::StatsGen(_) => "stats-gen",
            Command::Offense(_) => "offense",
            Command::Lexicon(LexiconCommand::Export(_)) => "lexicon export",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Annotate(a) => &a.common,
            Command::Train(a) => &a.common,
            Command::Eval(a) => &a.common,
            Command::Impute(a) => &a.common,
            Command::Score(a) => &a.common,
            Command::Stats(a) => &a.common,
            Command::ControlCorpus(a) => &a.common,
            Command::Generate(a) => &a.common,
            Command::StatsGen(a) => &a.common,
            Command::Offense(a) => &a.common,
            Command::Lexicon(LexiconCommand::Export(a)) => &a.common,
        }
    }
}

/// Errors in how the tool was invoked, as opposed to what it was given.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

/// Splices `key = value` lines from `--config` into the argument list right
/// after the subcommand, skipping keys whose flag is already present.
pub fn merge_config(argv: Vec<OsString>) -> Result<Vec<OsString>, UsageError> {
    let strings: Vec<String> = argv
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let config_path = strings.iter().enumerate().find_map(|(i, a)| {
        if a == "--config" {
            strings.get(i + 1).cloned()
        } else {
            a.strip_prefix("--config=").map(str::to_string)
        }
    });
    let Some(config_path) = config_path else {
        return Ok(argv);
    };
    let text =
        fs::read_to_string(&config_path).map_err(|e| UsageError(format!("{config_path}: {e}")))?;

    let root = Cli::command();
    let mut cmd = root
        .find_subcommand(strings.get(1).map(String::as_str).unwrap_or(""))
        .ok_or_else(|| UsageError("--config needs a subcommand".into()))?;
    let mut insert_at = 2;
    if cmd.has_subcommands() {
        cmd = cmd
            .find_subcommand(strings.get(2).map(String::as_str).unwrap_or(""))
            .ok_or_else(|| UsageError("--config needs a subcommand".into()))?;
        insert_at = 3;
    }

    let mut injected: Vec<OsString> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            UsageError(format!(
                "{config_path}:{}: expected key = value",
                lineno + 1
            ))
        })?;
        let long = key.trim().replace('_', "-");
        let value = value.trim();
        if long == "config" {
            continue;
        }
        let arg = cmd
            .get_arguments()
            .find(|a| a.get_long() == Some(long.as_str()))
            .ok_or_else(|| {
                UsageError(format!(
                    "{config_path}:{}: unknown key `{}`",
                    lineno + 1,
                    key.trim()
                ))
            })?;
        let flag = format!("--{long}");
        if strings
            .iter()
            .any(|a| *a == flag || a.starts_with(&format!("{flag}=")))
        {
            continue;
        }
        if matches!(arg.get_action(), ArgAction::SetTrue) {
            let on: bool = value.parse().map_err(|_| {
                UsageError(format!(
                    "{config_path}:{}: `{long}` expects true or false",
                    lineno + 1
                ))
            })?;
            if on {
                injected.push(flag.into());
            }
        } else {
            injected.push(flag.into());
            injected.push(value.into());
        }
    }
    let mut out = argv;
    let at = insert_at.min(out.len());
    out.splice(at..at, injected);
    Ok(out)
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let argv = match merge_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match commands::dispatch(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", error_message(&e));
            exit_code(&e)
        }
    }
}

/// The outermost message, plus causes not already contained in it.
fn error_message(e: &anyhow::Error) -> String {
    let mut msg = e.to_string();
    for cause in e.chain().skip(1) {
        let c = cause.to_string();
        if !msg.contains(&c) {
            msg.push_str(": ");
            msg.push_str(&c);
        }
    }
    msg
}

pub fn exit_code(e: &anyhow::Error) -> i32 {
    if e.downcast_ref::<UsageError>().is_some() {
        return EXIT_USAGE;
    }
    match e.downcast_ref::<crate::Error>() {
        Some(err) if err.is_input_error() => EXIT_USAGE,
        _ => EXIT_RUNTIME,
    }
}
