//! Run configuration: optional JSON config file merged under command-line
//! flags (flags win, then the file, then built-in defaults).

use std::path::PathBuf;

use clap::Args;
use serde::Deserialize;

use qeforge_core::align::{AlignerConfig, Symmetrization};
use qeforge_core::backend::{BackendSpec, LanguagePair};
use qeforge_core::pipeline::{AlignmentStrategy, BuildConfig};
use qeforge_core::text::TokenizeMode;
use qeforge_core::{Error, Result};

/// Every knob a config file may carry. All fields optional; unknown keys are
/// rejected so typos surface instead of silently using defaults.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    // shared knobs
    pub backend: Option<String>,
    pub lang_pair: Option<String>,
    pub tokenize: Option<TokenizeMode>,
    pub lowercase: Option<bool>,
    pub ter_shifts: Option<bool>,
    pub shift_cap: Option<usize>,
    pub iterations: Option<usize>,
    pub diagonal_tension: Option<f64>,
    pub null_prob: Option<f64>,
    pub favor_diagonal: Option<bool>,
    pub optimize_tension: Option<bool>,
    pub symmetrization: Option<String>,
    pub align_corpus_source: Option<PathBuf>,
    pub align_corpus_target: Option<PathBuf>,
    pub alignments_file: Option<PathBuf>,
    pub split_name: Option<String>,
    pub batch_size: Option<usize>,
    pub checkpoint_every: Option<u64>,
    pub resume: Option<bool>,
    pub jobs: Option<usize>,
    // split sizes
    pub valid: Option<u64>,
    pub test: Option<u64>,
    pub seed: Option<u64>,
    // input/output paths
    pub mono: Option<PathBuf>,
    pub parallel: Option<String>,
    pub round_trip_mt: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub source: Option<PathBuf>,
    pub target: Option<PathBuf>,
    pub mt: Option<PathBuf>,
    pub pe: Option<PathBuf>,
    pub alignments: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub reverse_model: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub pred_target: Option<PathBuf>,
    pub gold_target: Option<PathBuf>,
    pub pred_source: Option<PathBuf>,
    pub gold_source: Option<PathBuf>,
    pub ter: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: Option<&PathBuf>) -> Result<FileConfig> {
        match path {
            None => Ok(FileConfig::default()),
            Some(p) => {
                let body = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                serde_json::from_str(&body).map_err(|e| Error::Config(format!(
                    "{}: {e}",
                    p.display()
                )))
            }
        }
    }
}

/// Build/annotation flags shared by every subcommand that produces or
/// re-tags datasets.
#[derive(Debug, Args)]
pub struct BuildFlags {
    /// Translation backend, e.g. mock:seed=42, file:src2tgt=a.tsv, http:...
    #[arg(long)]
    pub backend: Option<String>,
    /// Language pair label, source-target (default ko-en).
    #[arg(long)]
    pub lang_pair: Option<String>,
    /// Tokenization applied to raw input lines.
    #[arg(long, value_enum)]
    pub tokenize: Option<TokenizeModeArg>,
    /// Fold case before alignment and tagging.
    #[arg(long, num_args = 0..=1, require_equals = true, default_missing_value = "true")]
    pub lowercase: Option<bool>,
    /// Enable the block-shift phase for ter.txt values.
    #[arg(long = "ter-shifts", num_args = 0..=1, require_equals = true, default_missing_value = "true")]
    pub ter_shifts: Option<bool>,
    /// Cap on accepted shifts per pair.
    #[arg(long)]
    pub shift_cap: Option<usize>,
    /// EM iterations for the word aligner.
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Diagonal prior tension λ.
    #[arg(long)]
    pub diagonal_tension: Option<f64>,
    /// NULL alignment probability p0.
    #[arg(long)]
    pub null_prob: Option<f64>,
    #[arg(long, num_args = 0..=1, require_equals = true, default_missing_value = "true")]
    pub favor_diagonal: Option<bool>,
    #[arg(long, num_args = 0..=1, require_equals = true, default_missing_value = "true")]
    pub optimize_tension: Option<bool>,
    /// Alignment symmetrization: none, intersection, union,
    /// grow-diag-final-and.
    #[arg(long)]
    pub symmetrization: Option<String>,
    /// Train the aligner on this external corpus instead of the dataset
    /// being built (source side).
    #[arg(long)]
    pub align_corpus_source: Option<PathBuf>,
    /// Target side of --align-corpus-source.
    #[arg(long)]
    pub align_corpus_target: Option<PathBuf>,
    /// Skip aligner training and use this Pharaoh alignments file.
    #[arg(long)]
    pub alignments_file: Option<PathBuf>,
    /// Name of the split directory created under --out.
    #[arg(long)]
    pub split_name: Option<String>,
    /// Lines per translation batch.
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Checkpoint granularity in lines.
    #[arg(long)]
    pub checkpoint_every: Option<u64>,
    /// Resume an interrupted build from its checkpoints.
    #[arg(long, num_args = 0..=1, require_equals = true, default_missing_value = "true")]
    pub resume: Option<bool>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum TokenizeModeArg {
    Whitespace,
    PunctSplit,
}

impl From<TokenizeModeArg> for TokenizeMode {
    fn from(value: TokenizeModeArg) -> Self {
        match value {
            TokenizeModeArg::Whitespace => TokenizeMode::Whitespace,
            TokenizeModeArg::PunctSplit => TokenizeMode::PunctSplit,
        }
    }
}

fn parse_symmetrization(s: &str) -> Result<Option<Symmetrization>> {
    if s == "none" {
        Ok(None)
    } else {
        Ok(Some(s.parse()?))
    }
}

impl BuildFlags {
    /// Merges flags over the config file over defaults.
    pub fn resolve(&self, file: &FileConfig, jobs: Option<usize>) -> Result<BuildConfig> {
        let defaults = BuildConfig::default();
        let aligner_defaults = AlignerConfig::default();

        let alignment = match (
            self.alignments_file.clone().or_else(|| file.alignments_file.clone()),
            self.align_corpus_source.clone().or_else(|| file.align_corpus_source.clone()),
            self.align_corpus_target.clone().or_else(|| file.align_corpus_target.clone()),
        ) {
            (Some(path), _, _) => AlignmentStrategy::Precomputed { path },
            (None, Some(source), Some(target)) => AlignmentStrategy::External { source, target },
            (None, None, None) => AlignmentStrategy::SelfTrained,
            _ => {
                return Err(Error::Config(
                    "--align-corpus-source and --align-corpus-target go together".into(),
                ))
            }
        };

        let symmetrization = match self
            .symmetrization
            .clone()
            .or_else(|| file.symmetrization.clone())
        {
            None => defaults.symmetrization,
            Some(s) => parse_symmetrization(&s)?,
        };

        let lang_pair: LanguagePair = match self.lang_pair.clone().or_else(|| file.lang_pair.clone())
        {
            None => LanguagePair::default(),
            Some(s) => s.parse()?,
        };

        Ok(BuildConfig {
            tokenize_mode: self
                .tokenize
                .map(TokenizeMode::from)
                .or(file.tokenize)
                .unwrap_or(defaults.tokenize_mode),
            lowercase: self.lowercase.or(file.lowercase).unwrap_or(defaults.lowercase),
            ter_shifts: self.ter_shifts.or(file.ter_shifts).unwrap_or(defaults.ter_shifts),
            shift_cap: self.shift_cap.or(file.shift_cap).unwrap_or(defaults.shift_cap),
            aligner: AlignerConfig {
                iterations: self
                    .iterations
                    .or(file.iterations)
                    .unwrap_or(aligner_defaults.iterations),
                diagonal_tension: self
                    .diagonal_tension
                    .or(file.diagonal_tension)
                    .unwrap_or(aligner_defaults.diagonal_tension),
                null_prob: self
                    .null_prob
                    .or(file.null_prob)
                    .unwrap_or(aligner_defaults.null_prob),
                favor_diagonal: self
                    .favor_diagonal
                    .or(file.favor_diagonal)
                    .unwrap_or(aligner_defaults.favor_diagonal),
                optimize_tension: self
                    .optimize_tension
                    .or(file.optimize_tension)
                    .unwrap_or(aligner_defaults.optimize_tension),
            },
            alignment,
            symmetrization,
            lang_pair,
            split_name: self
                .split_name
                .clone()
                .or_else(|| file.split_name.clone())
                .unwrap_or(defaults.split_name),
            batch_size: self.batch_size.or(file.batch_size).unwrap_or(defaults.batch_size),
            checkpoint_every: self
                .checkpoint_every
                .or(file.checkpoint_every)
                .unwrap_or(defaults.checkpoint_every),
            resume: self.resume.or(file.resume).unwrap_or(defaults.resume),
            jobs: jobs.or(file.jobs).unwrap_or(defaults.jobs),
        })
    }

    pub fn resolve_backend(&self, file: &FileConfig) -> Result<BackendSpec> {
        match self.backend.clone().or_else(|| file.backend.clone()) {
            Some(s) => s.parse(),
            None => Err(Error::Config(
                "a --backend is required (e.g. mock:seed=42)".into(),
            )),
        }
    }
}

/// `flag.or(file).ok_or(config error naming the flag)` for required paths.
pub fn require_path(
    flag: Option<PathBuf>,
    file: Option<PathBuf>,
    name: &str,
) -> Result<PathBuf> {
    flag.or(file)
        .ok_or_else(|| Error::Config(format!("missing required --{name}")))
}
