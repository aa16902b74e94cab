//! qeforge: build, audit, and score word-level translation QE datasets.

mod config;

use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use config::{require_path, BuildFlags, FileConfig, TokenizeModeArg};
use qeforge_core::align::{
    symmetrize, train, viterbi_align, AlignerConfig, AlignmentSet, FilePairSource, Symmetrization,
    TranslationTable,
};
use qeforge_core::backend::{
    translate_file, Direction, LanguagePair, MockBackend, MockNoise, TranslateOptions,
};
use qeforge_core::edit::{levenshtein_align, ter_score_capped, DEFAULT_SHIFT_CAP};
use qeforge_core::error::{Error, Result};
use qeforge_core::eval::{evaluate_by_ter_range, mcc_files, pooled_confusion, MccReport};
use qeforge_core::pipeline::{
    build_hybrid, build_monolingual, build_parallel, split_dataset, RoundTripSource,
};
use qeforge_core::stats::{render_stats_text, write_reports};
use qeforge_core::tags::{annotate_mt_tags, project_source_tags};
use qeforge_core::text::{normalize, RawLines, TokenSequence, TokenizeMode};

const VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (dataset format v1, alignment model v1)"
);

#[derive(Parser)]
#[command(name = "qeforge", version = VERSION, about = "Synthetic word-level MT quality-estimation corpus builder")]
struct Cli {
    /// JSON config file; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker parallelism across all stages (default: available cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a dataset from a target-language monolingual corpus
    /// (strategy M, round-trip translation).
    BuildM {
        /// Monolingual target-language corpus, one sentence per line.
        #[arg(long)]
        mono: Option<PathBuf>,
        /// Output dataset directory; the split is created beneath it.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        flags: BuildFlags,
    },
    /// Build a dataset from a parallel corpus (strategy P, one-way
    /// translation).
    BuildP {
        /// Parallel corpus as source,target file paths.
        #[arg(long)]
        parallel: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        flags: BuildFlags,
    },
    /// Build a dataset from a parallel corpus plus round-trip MT outputs
    /// (strategy H).
    BuildH {
        #[arg(long)]
        parallel: Option<String>,
        /// Round-trip MT outputs of the target side, one line per record.
        /// Omit to compute them with --backend.
        #[arg(long)]
        round_trip_mt: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        flags: BuildFlags,
    },
    /// Train a word-alignment model on a parallel corpus.
    AlignTrain {
        #[arg(long)]
        source: Option<PathBuf>,
        #[arg(long)]
        target: Option<PathBuf>,
        /// Output model file.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        diagonal_tension: Option<f64>,
        #[arg(long)]
        null_prob: Option<f64>,
        #[arg(long, num_args = 0..=1, require_equals = true, default_missing_value = "true")]
        favor_diagonal: Option<bool>,
        #[arg(long, num_args = 0..=1, require_equals = true, default_missing_value = "true")]
        optimize_tension: Option<bool>,
        #[arg(long, value_enum)]
        tokenize: Option<TokenizeModeArg>,
        #[arg(long, num_args = 0..=1, require_equals = true, default_missing_value = "true")]
        lowercase: Option<bool>,
    },
    /// Produce Pharaoh alignments for a sentence-pair file with a trained
    /// model.
    Align {
        #[arg(long)]
        model: Option<PathBuf>,
        /// Reverse-direction model; enables symmetrization.
        #[arg(long)]
        reverse_model: Option<PathBuf>,
        /// none, intersection, union, or grow-diag-final-and.
        #[arg(long)]
        heuristic: Option<String>,
        #[arg(long)]
        source: Option<PathBuf>,
        #[arg(long)]
        target: Option<PathBuf>,
        /// Output alignments file.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        tokenize: Option<TokenizeModeArg>,
        #[arg(long, num_args = 0..=1, require_equals = true, default_missing_value = "true")]
        lowercase: Option<bool>,
    },
    /// Tag existing source/MT/reference files through given alignments.
    Tag {
        #[arg(long)]
        source: Option<PathBuf>,
        #[arg(long)]
        mt: Option<PathBuf>,
        #[arg(long)]
        pe: Option<PathBuf>,
        /// Pharaoh alignments, one line per record.
        #[arg(long)]
        alignments: Option<PathBuf>,
        /// Output directory for mt_tags.txt and source_tags.txt.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        tokenize: Option<TokenizeModeArg>,
        #[arg(long, num_args = 0..=1, require_equals = true, default_missing_value = "true")]
        lowercase: Option<bool>,
    },
    /// Score TER between MT output and reference files.
    Ter {
        #[arg(long)]
        mt: Option<PathBuf>,
        #[arg(long)]
        pe: Option<PathBuf>,
        /// Enable the greedy block-shift phase.
        #[arg(long, num_args = 0..=1, require_equals = true, default_missing_value = "true")]
        shifts: Option<bool>,
        #[arg(long)]
        shift_cap: Option<usize>,
        /// Write one TER value per scored pair to this file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write one serialized edit script per scored pair to this file.
        #[arg(long)]
        scripts: Option<PathBuf>,
        #[arg(long, value_enum)]
        tokenize: Option<TokenizeModeArg>,
        #[arg(long, num_args = 0..=1, require_equals = true, default_missing_value = "true")]
        lowercase: Option<bool>,
    },
    /// Report statistics and the TER histogram for a dataset split.
    Stats {
        /// Dataset split directory (contains manifest.json).
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Draw seeded valid/test splits from a dataset.
    Split {
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        valid: Option<u64>,
        #[arg(long)]
        test: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score predicted tags against gold tags with MCC.
    Evaluate {
        #[arg(long)]
        pred_target: Option<PathBuf>,
        #[arg(long)]
        gold_target: Option<PathBuf>,
        #[arg(long)]
        pred_source: Option<PathBuf>,
        #[arg(long)]
        gold_source: Option<PathBuf>,
        /// Per-record TER file; enables the per-bin breakdown.
        #[arg(long)]
        ter: Option<PathBuf>,
        /// Write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Translate a file with the deterministic mock backend.
    MockTranslate {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "src-to-tgt")]
        direction: DirectionArg,
        #[arg(long)]
        lang_pair: Option<String>,
        /// Token dropout probability.
        #[arg(long, default_value_t = 0.1)]
        drop: f64,
        /// Adjacent swap probability.
        #[arg(long, default_value_t = 0.05)]
        swap: f64,
        /// Substitution probability.
        #[arg(long, default_value_t = 0.1)]
        sub: f64,
    },
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum DirectionArg {
    SrcToTgt,
    TgtToSrc,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage problems exit 1; --help and --version are not errors.
            std::process::exit(if e.use_stderr() { 1 } else { 0 });
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    if let Err(e) = run(cli) {
        eprintln!("qeforge: {e}");
        std::process::exit(e.exit_code());
    }
}

fn parse_parallel(s: &str) -> Result<(PathBuf, PathBuf)> {
    match s.split_once(',') {
        Some((a, b)) if !a.is_empty() && !b.is_empty() => {
            Ok((PathBuf::from(a), PathBuf::from(b)))
        }
        _ => Err(Error::Config(format!(
            "--parallel expects source,target file paths, got {s:?}"
        ))),
    }
}

fn text_options(
    tokenize: Option<TokenizeModeArg>,
    lowercase: Option<bool>,
    file: &FileConfig,
) -> (TokenizeMode, bool) {
    (
        tokenize
            .map(TokenizeMode::from)
            .or(file.tokenize)
            .unwrap_or_default(),
        lowercase.or(file.lowercase).unwrap_or(false),
    )
}

fn open_lines(path: &Path) -> Result<RawLines<BufReader<std::fs::File>>> {
    Ok(RawLines::new(BufReader::new(
        std::fs::File::open(path).map_err(|e| Error::io(path, e))?,
    )))
}

fn prep_line(raw: &str, mode: TokenizeMode, lowercase: bool) -> TokenSequence {
    let seq = TokenSequence::parse(&normalize(raw), mode);
    if lowercase {
        seq.to_lowercase()
    } else {
        seq
    }
}

fn run(cli: Cli) -> Result<()> {
    let file = FileConfig::load(cli.config.as_ref())?;
    let jobs = cli.jobs.or(file.jobs);
    if let Some(n) = jobs {
        if n > 0 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Error::Config(format!("cannot set --jobs: {e}")))?;
        }
    }

    match cli.command {
        Command::BuildM { mono, out, flags } => {
            let mono = require_path(mono, file.mono.clone(), "mono")?;
            let out = require_path(out, file.out.clone(), "out")?;
            let build = flags.resolve(&file, jobs)?;
            let backend = flags.resolve_backend(&file)?;
            let manifest = build_monolingual(&mono, &backend, &build, &out)?;
            println!(
                "strategy M dataset at {}: {} records, {} dropped",
                out.join(&build.split_name).display(),
                manifest.records,
                manifest.dropped
            );
        }
        Command::BuildP {
            parallel,
            out,
            flags,
        } => {
            let parallel = parallel
                .or_else(|| file.parallel.clone())
                .ok_or_else(|| Error::Config("missing required --parallel".into()))?;
            let (src, tgt) = parse_parallel(&parallel)?;
            let out = require_path(out, file.out.clone(), "out")?;
            let build = flags.resolve(&file, jobs)?;
            let backend = flags.resolve_backend(&file)?;
            let manifest = build_parallel(&src, &tgt, &backend, &build, &out)?;
            println!(
                "strategy P dataset at {}: {} records, {} dropped",
                out.join(&build.split_name).display(),
                manifest.records,
                manifest.dropped
            );
        }
        Command::BuildH {
            parallel,
            round_trip_mt,
            out,
            flags,
        } => {
            let parallel = parallel
                .or_else(|| file.parallel.clone())
                .ok_or_else(|| Error::Config("missing required --parallel".into()))?;
            let (src, tgt) = parse_parallel(&parallel)?;
            let out = require_path(out, file.out.clone(), "out")?;
            let build = flags.resolve(&file, jobs)?;
            let round_trip_mt = round_trip_mt.or_else(|| file.round_trip_mt.clone());
            let manifest = match &round_trip_mt {
                Some(path) => {
                    build_hybrid(&src, &tgt, RoundTripSource::File(path), &build, &out)?
                }
                None => {
                    let backend = flags.resolve_backend(&file).map_err(|_| {
                        Error::Config(
                            "build-h needs --round-trip-mt or a --backend to compute it".into(),
                        )
                    })?;
                    build_hybrid(&src, &tgt, RoundTripSource::Backend(&backend), &build, &out)?
                }
            };
            println!(
                "strategy H dataset at {}: {} records, {} dropped",
                out.join(&build.split_name).display(),
                manifest.records,
                manifest.dropped
            );
        }
        Command::AlignTrain {
            source,
            target,
            out,
            iterations,
            diagonal_tension,
            null_prob,
            favor_diagonal,
            optimize_tension,
            tokenize,
            lowercase,
        } => {
            let source = require_path(source, file.source.clone(), "source")?;
            let target = require_path(target, file.target.clone(), "target")?;
            let out = require_path(out, file.out.clone(), "out")?;
            let defaults = AlignerConfig::default();
            let aligner = AlignerConfig {
                iterations: iterations.or(file.iterations).unwrap_or(defaults.iterations),
                diagonal_tension: diagonal_tension
                    .or(file.diagonal_tension)
                    .unwrap_or(defaults.diagonal_tension),
                null_prob: null_prob.or(file.null_prob).unwrap_or(defaults.null_prob),
                favor_diagonal: favor_diagonal
                    .or(file.favor_diagonal)
                    .unwrap_or(defaults.favor_diagonal),
                optimize_tension: optimize_tension
                    .or(file.optimize_tension)
                    .unwrap_or(defaults.optimize_tension),
            };
            let (mode, lowercase) = text_options(tokenize, lowercase, &file);
            let pairs = FilePairSource {
                source,
                target,
                mode,
                lowercase,
            };
            let outcome = train(&pairs, &aligner)?;
            outcome.table.write_to(&out)?;
            println!(
                "model written to {} ({} entries, tension {:.4}, {} pairs skipped)",
                out.display(),
                outcome.table.entry_count(),
                outcome.table.diagonal_tension,
                outcome.skipped_pairs
            );
            println!(
                "log-likelihood per iteration: {}",
                outcome
                    .log_likelihoods
                    .iter()
                    .map(|ll| format!("{ll:.4}"))
                    .collect::<Vec<_>>()
                    .join(" ")
            );
        }
        Command::Align {
            model,
            reverse_model,
            heuristic,
            source,
            target,
            out,
            tokenize,
            lowercase,
        } => {
            let model = require_path(model, file.model.clone(), "model")?;
            let source = require_path(source, file.source.clone(), "source")?;
            let target = require_path(target, file.target.clone(), "target")?;
            let out = require_path(out, file.out.clone(), "out")?;
            let forward = TranslationTable::read_from(&model)?;
            let reverse = reverse_model
                .or_else(|| file.reverse_model.clone())
                .map(|p| TranslationTable::read_from(&p))
                .transpose()?;
            let heuristic = match heuristic.or_else(|| file.symmetrization.clone()) {
                None => Some(Symmetrization::GrowDiagFinalAnd),
                Some(s) if s == "none" => None,
                Some(s) => Some(s.parse()?),
            };
            let (mode, lowercase) = text_options(tokenize, lowercase, &file);

            let mut s_lines = open_lines(&source)?;
            let mut t_lines = open_lines(&target)?;
            let mut writer = BufWriter::new(
                std::fs::File::create(&out).map_err(|e| Error::io(&out, e))?,
            );
            let mut pairs = 0u64;
            loop {
                let (s, t) = match (s_lines.next(), t_lines.next()) {
                    (None, None) => break,
                    (Some(s), Some(t)) => (s?, t?),
                    _ => {
                        return Err(Error::Config(format!(
                            "{} and {} have different line counts",
                            source.display(),
                            target.display()
                        )))
                    }
                };
                let s_seq = prep_line(&s, mode, lowercase);
                let t_seq = prep_line(&t, mode, lowercase);
                let fwd = viterbi_align(&forward, &s_seq, &t_seq);
                let links = match (&reverse, heuristic) {
                    (Some(rt), Some(h)) => {
                        let rev = viterbi_align(rt, &t_seq, &s_seq).transpose();
                        symmetrize(&fwd, &rev, h, s_seq.len(), t_seq.len())?
                    }
                    _ => fwd,
                };
                writeln!(writer, "{}", links.to_pharaoh()).map_err(|e| Error::io(&out, e))?;
                pairs += 1;
            }
            writer.flush().map_err(|e| Error::io(&out, e))?;
            println!("aligned {pairs} pairs into {}", out.display());
        }
        Command::Tag {
            source,
            mt,
            pe,
            alignments,
            out,
            tokenize,
            lowercase,
        } => {
            let source = require_path(source, file.source.clone(), "source")?;
            let mt = require_path(mt, file.mt.clone(), "mt")?;
            let pe = require_path(pe, file.pe.clone(), "pe")?;
            let alignments = require_path(alignments, file.alignments.clone(), "alignments")?;
            let out = require_path(out, file.out.clone(), "out")?;
            std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
            let (mode, lowercase) = text_options(tokenize, lowercase, &file);

            let mut s_lines = open_lines(&source)?;
            let mut m_lines = open_lines(&mt)?;
            let mut p_lines = open_lines(&pe)?;
            let mut a_lines = open_lines(&alignments)?;
            let mt_tags_path = out.join("mt_tags.txt");
            let source_tags_path = out.join("source_tags.txt");
            let mut mt_w = BufWriter::new(
                std::fs::File::create(&mt_tags_path).map_err(|e| Error::io(&mt_tags_path, e))?,
            );
            let mut src_w = BufWriter::new(
                std::fs::File::create(&source_tags_path)
                    .map_err(|e| Error::io(&source_tags_path, e))?,
            );
            let mut records = 0u64;
            loop {
                let row = (s_lines.next(), m_lines.next(), p_lines.next(), a_lines.next());
                let (s, m, p, a) = match row {
                    (None, None, None, None) => break,
                    (Some(s), Some(m), Some(p), Some(a)) => (s?, m?, p?, a?),
                    _ => {
                        return Err(Error::Config(
                            "tag inputs have different line counts".into(),
                        ))
                    }
                };
                let s_seq = prep_line(&s, mode, lowercase);
                let m_seq = prep_line(&m, mode, lowercase);
                let p_seq = prep_line(&p, mode, lowercase);
                let links = AlignmentSet::parse(&a)?;
                let script = levenshtein_align(&m_seq, &p_seq);
                let mt_tags = annotate_mt_tags(&script)?;
                let source_tags = project_source_tags(&mt_tags, &links, s_seq.len())?;
                writeln!(mt_w, "{}", mt_tags.to_line())
                    .map_err(|e| Error::io(&mt_tags_path, e))?;
                writeln!(src_w, "{}", source_tags.to_line())
                    .map_err(|e| Error::io(&source_tags_path, e))?;
                records += 1;
            }
            mt_w.flush().map_err(|e| Error::io(&mt_tags_path, e))?;
            src_w.flush().map_err(|e| Error::io(&source_tags_path, e))?;
            println!("tagged {records} records into {}", out.display());
        }
        Command::Ter {
            mt,
            pe,
            shifts,
            shift_cap,
            out,
            scripts,
            tokenize,
            lowercase,
        } => {
            let mt = require_path(mt, file.mt.clone(), "mt")?;
            let pe = require_path(pe, file.pe.clone(), "pe")?;
            let shifts = shifts.or(file.ter_shifts).unwrap_or(false);
            let shift_cap = shift_cap.or(file.shift_cap).unwrap_or(DEFAULT_SHIFT_CAP);
            let (mode, lowercase) = text_options(tokenize, lowercase, &file);

            let mut m_lines = open_lines(&mt)?;
            let mut p_lines = open_lines(&pe)?;
            let mut ter_w = out
                .as_ref()
                .map(|p| -> Result<_> {
                    Ok(BufWriter::new(
                        std::fs::File::create(p).map_err(|e| Error::io(p, e))?,
                    ))
                })
                .transpose()?;
            let mut script_w = scripts
                .as_ref()
                .map(|p| -> Result<_> {
                    Ok(BufWriter::new(
                        std::fs::File::create(p).map_err(|e| Error::io(p, e))?,
                    ))
                })
                .transpose()?;
            let mut scored = 0u64;
            let mut skipped = 0u64;
            let mut line_no = 0u64;
            let mut sum = 0.0f64;
            loop {
                line_no += 1;
                let (m, p) = match (m_lines.next(), p_lines.next()) {
                    (None, None) => break,
                    (Some(m), Some(p)) => (m?, p?),
                    _ => {
                        return Err(Error::Config(format!(
                            "{} and {} have different line counts",
                            mt.display(),
                            pe.display()
                        )))
                    }
                };
                let m_seq = prep_line(&m, mode, lowercase);
                let p_seq = prep_line(&p, mode, lowercase);
                if p_seq.is_empty() {
                    log::warn!("line {line_no}: empty reference, TER undefined; skipping");
                    skipped += 1;
                    continue;
                }
                let result = ter_score_capped(&m_seq, &p_seq, shifts, shift_cap)?;
                sum += result.ter();
                scored += 1;
                if let Some(w) = &mut ter_w {
                    writeln!(w, "{}", result.ter())
                        .map_err(|e| Error::io(out.as_ref().unwrap(), e))?;
                }
                if let Some(w) = &mut script_w {
                    writeln!(w, "{}", result.script.serialize())
                        .map_err(|e| Error::io(scripts.as_ref().unwrap(), e))?;
                }
            }
            if let Some(w) = &mut ter_w {
                w.flush().map_err(|e| Error::io(out.as_ref().unwrap(), e))?;
            }
            if let Some(w) = &mut script_w {
                w.flush().map_err(|e| Error::io(scripts.as_ref().unwrap(), e))?;
            }
            println!("pairs scored    {scored}");
            println!("pairs skipped   {skipped}");
            if scored > 0 {
                println!("mean TER        {:.2}", sum / scored as f64);
            }
        }
        Command::Stats { dataset } => {
            let dataset = require_path(dataset, file.dataset.clone(), "dataset")?;
            let manifest = qeforge_core::pipeline::DatasetManifest::read(&dataset)?;
            let (stats, histogram) = write_reports(&dataset)?;
            print!(
                "{}",
                render_stats_text(&manifest.strategy, manifest.ter_shifts, &stats, &histogram)
            );
        }
        Command::Split {
            dataset,
            valid,
            test,
            seed,
            out,
        } => {
            let dataset = require_path(dataset, file.dataset.clone(), "dataset")?;
            let out = require_path(out, file.out.clone(), "out")?;
            let valid = valid.or(file.valid).unwrap_or(0);
            let test = test.or(file.test).unwrap_or(0);
            let seed = seed.or(file.seed).unwrap_or(0);
            let [train_m, valid_m, test_m] = split_dataset(&dataset, valid, test, seed, &out)?;
            println!(
                "split into train {} / valid {} / test {} under {}",
                train_m.records,
                valid_m.records,
                test_m.records,
                out.display()
            );
        }
        Command::Evaluate {
            pred_target,
            gold_target,
            pred_source,
            gold_source,
            ter,
            out,
        } => {
            let pred_target = require_path(pred_target, file.pred_target.clone(), "pred-target")?;
            let gold_target = require_path(gold_target, file.gold_target.clone(), "gold-target")?;
            let pred_source = pred_source.or_else(|| file.pred_source.clone());
            let gold_source = gold_source.or_else(|| file.gold_source.clone());
            let ter = ter.or_else(|| file.ter.clone());

            let target_mcc = pooled_confusion(&pred_target, &gold_target)?.mcc();
            let source_mcc = match (pred_source, gold_source) {
                (Some(p), Some(g)) => Some(mcc_files(&p, &g)?),
                (None, None) => None,
                _ => {
                    return Err(Error::Config(
                        "--pred-source and --gold-source go together".into(),
                    ))
                }
            };
            let per_bin = ter
                .map(|t| evaluate_by_ter_range(&pred_target, &gold_target, &t))
                .transpose()?;
            let report = MccReport {
                target_mcc,
                source_mcc,
                per_bin,
            };
            print!("{}", report.render_text());
            if let Some(out) = out {
                let json =
                    serde_json::to_string_pretty(&report).expect("serializable report");
                std::fs::write(&out, json + "\n").map_err(|e| Error::io(&out, e))?;
                println!("JSON report written to {}", out.display());
            }
        }
        Command::MockTranslate {
            input,
            output,
            seed,
            direction,
            lang_pair,
            drop,
            swap,
            sub,
        } => {
            let input = require_path(input, file.input.clone(), "input")?;
            let output = require_path(output, file.output.clone(), "output")?;
            let pair: LanguagePair = match lang_pair.or_else(|| file.lang_pair.clone()) {
                Some(s) => s.parse()?,
                None => LanguagePair::default(),
            };
            let direction = match direction {
                DirectionArg::SrcToTgt => Direction::src_to_tgt(pair),
                DirectionArg::TgtToSrc => Direction::tgt_to_src(pair),
            };
            let backend = MockBackend::new(
                seed,
                MockNoise {
                    drop_p: drop,
                    swap_p: swap,
                    substitute_p: sub,
                },
            );
            let opts = TranslateOptions {
                jobs: jobs.unwrap_or(1).max(1),
                ..TranslateOptions::default()
            };
            let written = translate_file(&backend, &direction, &input, &output, &opts)?;
            println!("translated {written} lines into {}", output.display());
        }
    }
    Ok(())
}
