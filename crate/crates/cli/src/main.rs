//! `structsum`: evaluation, analysis, prompting, decoding and labeling for
//! structure-controlled summaries.

mod commands;
mod output;
mod scorer;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "structsum", version, about, propagate_version = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Seed for the mock scorer, generation requests and bootstrap resampling.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for record-level parallelism (default: logical cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Suppress progress and summary output on standard error.
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Report encoding.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Report zero wall-clock time so reports are byte-reproducible.
    #[arg(long, global = true)]
    pub no_timing: bool,
    /// Log-likelihood noise amplitude of the mock scorer.
    #[arg(long, global = true, default_value_t = 0.0)]
    pub mock_noise: f64,
    /// Number of summary sentences after which the mock scorer signals end-of-sequence.
    #[arg(long, global = true, default_value_t = 12)]
    pub mock_eos_after: u32,
    /// JSON file of sentence banks for the mock scorer, keyed by label.
    #[arg(long, global = true)]
    pub mock_banks: Option<PathBuf>,
    /// Per-request timeout for HTTP scorers, in seconds.
    #[arg(long, global = true, default_value_t = 30.0)]
    pub scorer_timeout: f64,
    /// Retries for failed HTTP scorer requests.
    #[arg(long, global = true, default_value_t = 2)]
    pub scorer_retries: u32,
}

impl GlobalOpts {
    pub fn workers(&self) -> usize {
        self.workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
            .max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LabelChoice {
    Gold,
    Predicted,
}

impl From<LabelChoice> for structsum_core::pipeline::LabelField {
    fn from(choice: LabelChoice) -> Self {
        match choice {
            LabelChoice::Gold => Self::Gold,
            LabelChoice::Predicted => Self::Predicted,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score predictions against reference summaries.
    Evaluate(EvaluateArgs),
    /// Distribution of normalized summary structures in a corpus.
    Analyze(AnalyzeArgs),
    /// Build or parse structure-prompted inputs.
    #[command(subcommand)]
    Prompt(PromptCommand),
    /// Decode a single document.
    Decode(DecodeArgs),
    /// Attach classifier labels to records that lack gold labels.
    Label(LabelArgs),
    /// Paired bootstrap comparison of two reports on one metric.
    Compare(CompareArgs),
    /// Decode and evaluate a corpus with several systems.
    Run(RunArgs),
    /// Write a synthetic corpus built from the mock sentence banks.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Reference corpus (JSONL).
    #[arg(long)]
    pub corpus: PathBuf,
    /// JSONL of {id, prediction[, prediction_labels]}; defaults to each record's `prediction`.
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    /// Classifier for prediction labels: `mock` or an http(s) URL.
    #[arg(long)]
    pub classifier: Option<String>,
    /// Labels that prediction structures are compared against.
    #[arg(long, value_enum, default_value_t = LabelChoice::Gold)]
    pub oracle: LabelChoice,
    /// Add n-gram overlap ratios against the source document.
    #[arg(long)]
    pub overlap: bool,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Which label field to analyze.
    #[arg(long, value_enum, default_value_t = LabelChoice::Gold)]
    pub labels: LabelChoice,
    /// Rows in the text table.
    #[arg(long, default_value_t = 10)]
    pub top_k: usize,
    /// Collapse duplicates before removing Non_IRC.
    #[arg(long)]
    pub dedupe_first: bool,
    /// Output file for the distribution (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PromptStyle {
    /// Text between the label prefix and the document.
    #[arg(long, default_value = "==>")]
    pub marker: String,
    /// Separator between labels in the prefix.
    #[arg(long, default_value = " | ")]
    pub sep: String,
    /// Do not surround the marker with spaces.
    #[arg(long)]
    pub no_pad_marker: bool,
}

#[derive(Debug, Subcommand)]
pub enum PromptCommand {
    /// Prefix a document with a label sequence.
    Build {
        /// Label sequence, e.g. "Issue | Conclusion | Reason".
        #[arg(long)]
        labels: String,
        /// Document file, or `-` for standard input.
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        style: PromptStyle,
    },
    /// Split a prompted input back into labels and document (JSON).
    Parse {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        style: PromptStyle,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DecodeKind {
    Sentbs,
    Unconstrained,
    Forced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeChoice {
    Sentence,
    Segment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LikelihoodChoice {
    Mean,
    Sum,
}

#[derive(Debug, Args)]
pub struct DecoderOpts {
    /// Scorer: `mock` or an http(s) URL.
    #[arg(long, default_value = "mock")]
    pub scorer: String,
    /// Weight of the likelihood term against the label term.
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value_t = ModeChoice::Sentence)]
    pub mode: ModeChoice,
    /// Sentence cap per segment in segment mode.
    #[arg(long, default_value_t = 4)]
    pub max_per_segment: u32,
    /// Candidates requested per step.
    #[arg(long, default_value_t = 4)]
    pub num_candidates: u32,
    /// Word budget for unconstrained decoding.
    #[arg(long, default_value_t = 256)]
    pub max_tokens: u32,
    #[arg(long, value_enum, default_value_t = LikelihoodChoice::Mean)]
    pub likelihood: LikelihoodChoice,
    /// Keep stepping through the structure after the generator signals end-of-sequence.
    #[arg(long)]
    pub no_eos_stop: bool,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[arg(value_enum)]
    pub kind: DecodeKind,
    /// Requested structure, e.g. "Issue|Conclusion" (sentbs only).
    #[arg(long)]
    pub structure: Option<String>,
    /// Document file, or `-` for standard input.
    #[arg(long)]
    pub input: PathBuf,
    /// Exact word count (forced only).
    #[arg(long)]
    pub exact_words: Option<usize>,
    /// Write the full decode trace as JSON.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub decoder: DecoderOpts,
}

#[derive(Debug, Args)]
pub struct LabelArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Classifier: `mock` or an http(s) URL.
    #[arg(long, default_value = "mock")]
    pub classifier: String,
    /// Confidence below which a sentence label is counted as low-confidence.
    #[arg(long, default_value_t = 0.0)]
    pub min_confidence: f64,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Report of system A; `path#system` selects a system from a `run` report.
    #[arg(long)]
    pub a: String,
    /// Report of system B, same syntax as --a.
    #[arg(long)]
    pub b: String,
    /// Dotted metric name, e.g. rouge2.f1.
    #[arg(long, default_value = "rouge1.f1")]
    pub metric: String,
    #[arg(long, default_value_t = 1000)]
    pub resamples: usize,
    #[arg(long, default_value_t = 0.95)]
    pub confidence: f64,
    /// Exit with status 1 when the difference is significant.
    #[arg(long)]
    pub fail_on_significant: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SystemChoice {
    Sentbs,
    Nostructure,
    Strong,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Corpus (JSONL); defaults to the bundled 20-record synthetic corpus.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Systems to run.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "sentbs,nostructure,strong")]
    pub systems: Vec<SystemChoice>,
    /// Labels used as the requested structure.
    #[arg(long, value_enum, default_value_t = LabelChoice::Gold)]
    pub structure_source: LabelChoice,
    #[arg(long)]
    pub overlap: bool,
    /// Write whatever finished when a scorer error aborts the run.
    #[arg(long)]
    pub keep_partial: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub decoder: DecoderOpts,
    #[command(flatten)]
    pub style: PromptStyle,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Number of records.
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
