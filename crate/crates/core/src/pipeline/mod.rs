//! Orchestration of the three dataset construction strategies.
//!
//! * [`build_monolingual`] (strategy M): round-trip translation of
//!   target-language text. The intermediate pseudo-source becomes the `src`
//!   column, the second translation the `mt` column, and the original text
//!   the reference `pe` column.
//! * [`build_parallel`] (strategy P): one-way translation of a parallel
//!   corpus's source side; the target side is the reference.
//! * [`build_hybrid`] (strategy H): source and reference from the parallel
//!   corpus, MT output from the round-trip translation of the reference.
//!
//! Every stage streams line by line; no stage holds a corpus in memory.
//! Records whose reference is empty after normalization are dropped (their
//! TER is undefined) and counted in the manifest.

mod manifest;

pub use manifest::{count_lines, dataset_file, DatasetManifest, ManifestFiles, MANIFEST_NAME};

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::align::{
    symmetrize, train, viterbi_align, AlignerConfig, AlignmentSet, FilePairSource, Symmetrization,
    TranslationTable,
};
use crate::backend::{BackendSpec, Direction, LanguagePair, TranslateOptions, TranslationBackend};
use crate::edit::{levenshtein_align, ter_score_capped, TerResult, DEFAULT_SHIFT_CAP};
use crate::error::{Error, Result};
use crate::tags::{annotate_mt_tags, project_source_tags};
use crate::text::{normalize, RawLines, TokenSequence, TokenizeMode};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Records processed per parallel annotation block.
const ANNOTATE_BLOCK: usize = 512;

/// Where per-record word alignments come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum AlignmentStrategy {
    /// Train the aligner on the (source, MT) pairs of the dataset being
    /// built.
    #[default]
    SelfTrained,
    /// Train on an external parallel corpus.
    External { source: PathBuf, target: PathBuf },
    /// Read alignments from an existing Pharaoh file, one line per record.
    Precomputed { path: PathBuf },
}

/// Build-time knobs shared by all strategies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BuildConfig {
    pub tokenize_mode: TokenizeMode,
    /// Fold case before alignment, edit alignment, and tagging. Dataset
    /// files keep the original casing.
    pub lowercase: bool,
    /// Compute `ter.txt` with the block-shift phase. Tags always come from
    /// the monotone script.
    pub ter_shifts: bool,
    pub shift_cap: usize,
    pub aligner: AlignerConfig,
    pub alignment: AlignmentStrategy,
    /// `None` uses the forward Viterbi links unsymmetrized.
    pub symmetrization: Option<Symmetrization>,
    pub lang_pair: LanguagePair,
    pub split_name: String,
    pub batch_size: usize,
    pub checkpoint_every: u64,
    pub resume: bool,
    /// Worker parallelism for backend batches; 0 means single in-flight.
    pub jobs: usize,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            tokenize_mode: TokenizeMode::Whitespace,
            lowercase: false,
            ter_shifts: false,
            shift_cap: DEFAULT_SHIFT_CAP,
            aligner: AlignerConfig::default(),
            alignment: AlignmentStrategy::default(),
            symmetrization: Some(Symmetrization::GrowDiagFinalAnd),
            lang_pair: LanguagePair::default(),
            split_name: "train".into(),
            batch_size: 64,
            checkpoint_every: 10_000,
            resume: false,
            jobs: 0,
        }
    }
}

impl BuildConfig {
    fn translate_options(&self) -> TranslateOptions {
        TranslateOptions {
            batch_size: self.batch_size,
            checkpoint_every: self.checkpoint_every,
            resume: self.resume,
            jobs: self.jobs.max(1),
        }
    }
}

/// The semantic configuration covered by the manifest's config hash. Input
/// and output locations are deliberately excluded so that rebuilding the
/// same configuration elsewhere yields byte-identical directories.
#[derive(Serialize)]
struct ConfigFingerprint<'a> {
    strategy: &'a str,
    tokenize_mode: TokenizeMode,
    lowercase: bool,
    ter_shifts: bool,
    shift_cap: usize,
    aligner: &'a AlignerConfig,
    alignment: &'a AlignmentStrategy,
    symmetrization: Option<Symmetrization>,
    lang_pair: &'a LanguagePair,
    split_name: &'a str,
    backend: Option<&'a BackendSpec>,
    tool_version: &'a str,
}

pub fn config_hash(strategy: &str, config: &BuildConfig, backend: Option<&BackendSpec>) -> String {
    let fingerprint = ConfigFingerprint {
        strategy,
        tokenize_mode: config.tokenize_mode,
        lowercase: config.lowercase,
        ter_shifts: config.ter_shifts,
        shift_cap: config.shift_cap,
        aligner: &config.aligner,
        alignment: &config.alignment,
        symmetrization: config.symmetrization,
        lang_pair: &config.lang_pair,
        split_name: &config.split_name,
        backend,
        tool_version: TOOL_VERSION,
    };
    let json = serde_json::to_string(&fingerprint).expect("serializable fingerprint");
    hex::encode(Sha256::digest(json.as_bytes()))
}

/// Canonical form written to dataset columns: normalized, tokenized under
/// `mode`, re-joined with single spaces.
fn canonical_line(raw: &str, mode: TokenizeMode) -> String {
    TokenSequence::parse(&normalize(raw), mode).join()
}

struct CleanStats {
    raw_lines: u64,
    kept: u64,
    dropped: u64,
    /// Per raw line: was it kept?
    mask: Vec<bool>,
}

/// Normalizes a monolingual reference corpus into `out`, dropping lines that
/// are invalid UTF-8 or empty after normalization.
fn clean_reference(input: &Path, out: &Path, mode: TokenizeMode) -> Result<CleanStats> {
    let file = File::open(input).map_err(|e| Error::io(input, e))?;
    let mut writer = BufWriter::new(File::create(out).map_err(|e| Error::io(out, e))?);
    let mut stats = CleanStats {
        raw_lines: 0,
        kept: 0,
        dropped: 0,
        mask: Vec::new(),
    };
    for line in RawLines::new(BufReader::new(file)) {
        stats.raw_lines += 1;
        let keep = match line {
            Err(Error::Line { line, message }) => {
                log::warn!("dropping line {line}: {message}");
                None
            }
            Err(e) => return Err(e),
            Ok(raw) => {
                let canon = canonical_line(&raw, mode);
                if canon.is_empty() {
                    log::warn!("dropping line {}: empty reference", stats.raw_lines);
                    None
                } else {
                    Some(canon)
                }
            }
        };
        match keep {
            Some(canon) => {
                writeln!(writer, "{canon}").map_err(|e| Error::io(out, e))?;
                stats.kept += 1;
                stats.mask.push(true);
            }
            None => {
                stats.dropped += 1;
                stats.mask.push(false);
            }
        }
    }
    writer.flush().map_err(|e| Error::io(out, e))?;
    Ok(stats)
}

/// Normalizes a parallel corpus into (src, pe) columns with a shared drop
/// mask: a pair is dropped when either line is invalid UTF-8 or the target
/// (reference) side is empty after normalization.
fn clean_parallel(
    src_in: &Path,
    tgt_in: &Path,
    src_out: &Path,
    pe_out: &Path,
    mode: TokenizeMode,
) -> Result<CleanStats> {
    let sf = File::open(src_in).map_err(|e| Error::io(src_in, e))?;
    let tf = File::open(tgt_in).map_err(|e| Error::io(tgt_in, e))?;
    let mut s_lines = RawLines::new(BufReader::new(sf));
    let mut t_lines = RawLines::new(BufReader::new(tf));
    let mut sw = BufWriter::new(File::create(src_out).map_err(|e| Error::io(src_out, e))?);
    let mut pw = BufWriter::new(File::create(pe_out).map_err(|e| Error::io(pe_out, e))?);
    let mut stats = CleanStats {
        raw_lines: 0,
        kept: 0,
        dropped: 0,
        mask: Vec::new(),
    };
    loop {
        let (s, t) = match (s_lines.next(), t_lines.next()) {
            (None, None) => break,
            (Some(s), Some(t)) => (s, t),
            _ => {
                return Err(Error::Config(format!(
                    "{} and {} have different line counts",
                    src_in.display(),
                    tgt_in.display()
                )))
            }
        };
        stats.raw_lines += 1;
        let keep = match (s, t) {
            (Ok(s), Ok(t)) => {
                let pe = canonical_line(&t, mode);
                if pe.is_empty() {
                    log::warn!("dropping pair {}: empty reference", stats.raw_lines);
                    None
                } else {
                    Some((canonical_line(&s, mode), pe))
                }
            }
            _ => {
                log::warn!("dropping pair {}: invalid UTF-8", stats.raw_lines);
                None
            }
        };
        match keep {
            Some((src, pe)) => {
                writeln!(sw, "{src}").map_err(|e| Error::io(src_out, e))?;
                writeln!(pw, "{pe}").map_err(|e| Error::io(pe_out, e))?;
                stats.kept += 1;
                stats.mask.push(true);
            }
            None => {
                stats.dropped += 1;
                stats.mask.push(false);
            }
        }
    }
    sw.flush().map_err(|e| Error::io(src_out, e))?;
    pw.flush().map_err(|e| Error::io(pe_out, e))?;
    Ok(stats)
}

/// Re-canonicalizes translated output line by line, preserving line count.
fn canonicalize_file(input: &Path, out: &Path, mode: TokenizeMode) -> Result<()> {
    let file = File::open(input).map_err(|e| Error::io(input, e))?;
    let mut writer = BufWriter::new(File::create(out).map_err(|e| Error::io(out, e))?);
    for line in RawLines::new(BufReader::new(file)) {
        let line = line?;
        writeln!(writer, "{}", canonical_line(&line, mode)).map_err(|e| Error::io(out, e))?;
    }
    writer.flush().map_err(|e| Error::io(out, e))?;
    Ok(())
}

fn translate_column(
    backend: &dyn TranslationBackend,
    direction: &Direction,
    input: &Path,
    out: &Path,
    config: &BuildConfig,
) -> Result<()> {
    let raw = out.with_extension("raw");
    crate::backend::translate_file(backend, direction, input, &raw, &config.translate_options())?;
    canonicalize_file(&raw, out, config.tokenize_mode)?;
    std::fs::remove_file(&raw).map_err(|e| Error::io(&raw, e))?;
    Ok(())
}

struct AnnotatedRecord {
    alignment: String,
    mt_tags: String,
    source_tags: String,
    ter: String,
}

fn fold(seq: &TokenSequence, lowercase: bool) -> TokenSequence {
    if lowercase {
        seq.to_lowercase()
    } else {
        seq.clone()
    }
}

fn annotate_record(
    src: &str,
    mt: &str,
    pe: &str,
    precomputed: Option<&str>,
    tables: Option<&(TranslationTable, Option<TranslationTable>)>,
    config: &BuildConfig,
) -> Result<AnnotatedRecord> {
    let source = TokenSequence::parse(src, TokenizeMode::Whitespace);
    let mt_seq = TokenSequence::parse(mt, TokenizeMode::Whitespace);
    let pe_seq = TokenSequence::parse(pe, TokenizeMode::Whitespace);
    let c_src = fold(&source, config.lowercase);
    let c_mt = fold(&mt_seq, config.lowercase);
    let c_pe = fold(&pe_seq, config.lowercase);

    let script = levenshtein_align(&c_mt, &c_pe);
    let ter: TerResult = if config.ter_shifts {
        ter_score_capped(&c_mt, &c_pe, true, config.shift_cap)?
    } else {
        TerResult {
            edit_count: script.edit_count(),
            ref_len: c_pe.len(),
            script: script.clone(),
        }
    };

    let links = match precomputed {
        Some(line) => AlignmentSet::parse(line)?,
        None => {
            let (forward_table, reverse_table) =
                tables.expect("aligner tables present when no precomputed alignments");
            let forward = viterbi_align(forward_table, &c_src, &c_mt);
            match (reverse_table, config.symmetrization) {
                (Some(rt), Some(heuristic)) => {
                    let reverse = viterbi_align(rt, &c_mt, &c_src).transpose();
                    symmetrize(&forward, &reverse, heuristic, source.len(), mt_seq.len())?
                }
                _ => forward,
            }
        }
    };

    let mt_tags = annotate_mt_tags(&script)?;
    let source_tags = project_source_tags(&mt_tags, &links, source.len())?;
    Ok(AnnotatedRecord {
        alignment: links.to_pharaoh(),
        mt_tags: mt_tags.to_line(),
        source_tags: source_tags.to_line(),
        ter: ter.ter().to_string(),
    })
}

fn train_tables(
    dir: &Path,
    files: &ManifestFiles,
    config: &BuildConfig,
) -> Result<Option<(TranslationTable, Option<TranslationTable>)>> {
    let ((fwd_src, fwd_tgt), mode) = match &config.alignment {
        AlignmentStrategy::Precomputed { .. } => return Ok(None),
        AlignmentStrategy::SelfTrained => (
            (dir.join(&files.src), dir.join(&files.mt)),
            TokenizeMode::Whitespace,
        ),
        AlignmentStrategy::External { source, target } => {
            ((source.clone(), target.clone()), config.tokenize_mode)
        }
    };
    let make_source = |source: &Path, target: &Path| FilePairSource {
        source: source.to_path_buf(),
        target: target.to_path_buf(),
        mode,
        lowercase: config.lowercase,
    };
    log::info!("training forward aligner");
    let forward = train(&make_source(&fwd_src, &fwd_tgt), &config.aligner)?.table;
    let reverse = if config.symmetrization.is_some() {
        log::info!("training reverse aligner");
        Some(train(&make_source(&fwd_tgt, &fwd_src), &config.aligner)?.table)
    } else {
        None
    };
    Ok(Some((forward, reverse)))
}

/// Runs alignment, tagging, and TER over the prepared src/mt/pe columns and
/// writes the four derived files plus the manifest.
fn annotate_dataset(
    dir: &Path,
    strategy: &str,
    config: &BuildConfig,
    backend: Option<&BackendSpec>,
    dropped: u64,
) -> Result<DatasetManifest> {
    let files = ManifestFiles::default();
    let tables = train_tables(dir, &files, config)?;

    let open = |p: &Path| -> Result<RawLines<BufReader<File>>> {
        Ok(RawLines::new(BufReader::new(
            File::open(p).map_err(|e| Error::io(p, e))?,
        )))
    };
    let mut src_lines = open(&dir.join(&files.src))?;
    let mut mt_lines = open(&dir.join(&files.mt))?;
    let mut pe_lines = open(&dir.join(&files.pe))?;
    let mut precomputed = match &config.alignment {
        AlignmentStrategy::Precomputed { path } => Some(open(path)?),
        _ => None,
    };

    let make_writer = |name: &str| -> Result<BufWriter<File>> {
        let p = dir.join(name);
        Ok(BufWriter::new(File::create(&p).map_err(|e| Error::io(&p, e))?))
    };
    let mut alignments_w = make_writer(&files.alignments)?;
    let mut mt_tags_w = make_writer(&files.mt_tags)?;
    let mut source_tags_w = make_writer(&files.source_tags)?;
    let mut ter_w = make_writer(&files.ter)?;

    let mut records = 0u64;
    loop {
        let mut block: Vec<(String, String, String, Option<String>)> =
            Vec::with_capacity(ANNOTATE_BLOCK);
        while block.len() < ANNOTATE_BLOCK {
            match (src_lines.next(), mt_lines.next(), pe_lines.next()) {
                (None, None, None) => break,
                (Some(s), Some(m), Some(p)) => {
                    let pre = match &mut precomputed {
                        Some(lines) => Some(lines.next().ok_or_else(|| {
                            Error::Config("alignment file shorter than the dataset".into())
                        })??),
                        None => None,
                    };
                    block.push((s?, m?, p?, pre));
                }
                _ => {
                    return Err(Error::Invariant(
                        "src/mt/pe column files have unequal line counts".into(),
                    ))
                }
            }
        }
        if block.is_empty() {
            break;
        }
        let annotated: Vec<Result<AnnotatedRecord>> = block
            .par_iter()
            .map(|(s, m, p, pre)| annotate_record(s, m, p, pre.as_deref(), tables.as_ref(), config))
            .collect();
        for rec in annotated {
            let rec = rec?;
            writeln!(alignments_w, "{}", rec.alignment)
                .map_err(|e| Error::io(dir.join(&files.alignments), e))?;
            writeln!(mt_tags_w, "{}", rec.mt_tags)
                .map_err(|e| Error::io(dir.join(&files.mt_tags), e))?;
            writeln!(source_tags_w, "{}", rec.source_tags)
                .map_err(|e| Error::io(dir.join(&files.source_tags), e))?;
            writeln!(ter_w, "{}", rec.ter).map_err(|e| Error::io(dir.join(&files.ter), e))?;
            records += 1;
        }
    }
    if let Some(mut lines) = precomputed {
        if lines.next().is_some() {
            return Err(Error::Config("alignment file longer than the dataset".into()));
        }
    }
    alignments_w.flush().map_err(|e| Error::io(dir.join(&files.alignments), e))?;
    mt_tags_w.flush().map_err(|e| Error::io(dir.join(&files.mt_tags), e))?;
    source_tags_w.flush().map_err(|e| Error::io(dir.join(&files.source_tags), e))?;
    ter_w.flush().map_err(|e| Error::io(dir.join(&files.ter), e))?;

    let manifest = DatasetManifest {
        strategy: strategy.into(),
        records,
        dropped,
        ter_shifts: config.ter_shifts,
        config_hash: config_hash(strategy, config, backend),
        tool_version: TOOL_VERSION.into(),
        files,
    };
    manifest.validate_files(dir)?;
    manifest.write(dir)?;
    Ok(manifest)
}

fn split_dir(out: &Path, config: &BuildConfig) -> Result<PathBuf> {
    let dir = out.join(&config.split_name);
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

/// Strategy M: round-trip translation of a target-language monolingual
/// corpus.
pub fn build_monolingual(
    mono: &Path,
    backend_spec: &BackendSpec,
    config: &BuildConfig,
    out: &Path,
) -> Result<DatasetManifest> {
    let dir = split_dir(out, config)?;
    let files = ManifestFiles::default();
    let backend = backend_spec.build()?;

    let stats = clean_reference(mono, &dir.join(&files.pe), config.tokenize_mode)?;
    if stats.kept == 0 {
        return Err(Error::Config(format!(
            "{} has no usable lines",
            mono.display()
        )));
    }
    log::info!("round-trip: translating {} references", stats.kept);
    let pair = config.lang_pair.clone();
    translate_column(
        backend.as_ref(),
        &Direction::tgt_to_src(pair.clone()),
        &dir.join(&files.pe),
        &dir.join(&files.src),
        config,
    )?;
    translate_column(
        backend.as_ref(),
        &Direction::src_to_tgt(pair),
        &dir.join(&files.src),
        &dir.join(&files.mt),
        config,
    )?;
    annotate_dataset(&dir, "M", config, Some(backend_spec), stats.dropped)
}

/// Strategy P: one-way translation of a parallel corpus's source side.
pub fn build_parallel(
    src: &Path,
    tgt: &Path,
    backend_spec: &BackendSpec,
    config: &BuildConfig,
    out: &Path,
) -> Result<DatasetManifest> {
    let dir = split_dir(out, config)?;
    let files = ManifestFiles::default();
    let backend = backend_spec.build()?;

    let stats = clean_parallel(
        src,
        tgt,
        &dir.join(&files.src),
        &dir.join(&files.pe),
        config.tokenize_mode,
    )?;
    if stats.kept == 0 {
        return Err(Error::Config("parallel corpus has no usable pairs".into()));
    }
    log::info!("one-way: translating {} source lines", stats.kept);
    translate_column(
        backend.as_ref(),
        &Direction::src_to_tgt(config.lang_pair.clone()),
        &dir.join(&files.src),
        &dir.join(&files.mt),
        config,
    )?;
    annotate_dataset(&dir, "P", config, Some(backend_spec), stats.dropped)
}

/// MT column provider for strategy H.
pub enum RoundTripSource<'a> {
    /// Per-line MT outputs of the round-trip applied to the target side,
    /// line-aligned with either the raw corpus or its kept records.
    File(&'a Path),
    /// Compute the round-trip here with this backend.
    Backend(&'a BackendSpec),
}

/// Strategy H: parallel source and reference, round-trip MT output.
pub fn build_hybrid(
    src: &Path,
    tgt: &Path,
    round_trip: RoundTripSource<'_>,
    config: &BuildConfig,
    out: &Path,
) -> Result<DatasetManifest> {
    let dir = split_dir(out, config)?;
    let files = ManifestFiles::default();

    let stats = clean_parallel(
        src,
        tgt,
        &dir.join(&files.src),
        &dir.join(&files.pe),
        config.tokenize_mode,
    )?;
    if stats.kept == 0 {
        return Err(Error::Config("parallel corpus has no usable pairs".into()));
    }

    let backend_for_hash = match round_trip {
        RoundTripSource::File(mt_file) => {
            let mt_lines = count_lines(mt_file)?;
            let mt_out = dir.join(&files.mt);
            if mt_lines == stats.raw_lines {
                // Apply the same drop mask as the parallel cleaning pass.
                let file = File::open(mt_file).map_err(|e| Error::io(mt_file, e))?;
                let mut writer =
                    BufWriter::new(File::create(&mt_out).map_err(|e| Error::io(&mt_out, e))?);
                for (line, &keep) in RawLines::new(BufReader::new(file)).zip(&stats.mask) {
                    let line = line?;
                    if keep {
                        writeln!(writer, "{}", canonical_line(&line, config.tokenize_mode))
                            .map_err(|e| Error::io(&mt_out, e))?;
                    }
                }
                writer.flush().map_err(|e| Error::io(&mt_out, e))?;
            } else if mt_lines == stats.kept {
                canonicalize_file(mt_file, &mt_out, config.tokenize_mode)?;
            } else {
                return Err(Error::Config(format!(
                    "{} has {mt_lines} lines; expected {} (raw) or {} (kept)",
                    mt_file.display(),
                    stats.raw_lines,
                    stats.kept
                )));
            }
            None
        }
        RoundTripSource::Backend(spec) => {
            let backend = spec.build()?;
            let pair = config.lang_pair.clone();
            let pseudo = dir.join("pseudo_source.tmp");
            translate_column(
                backend.as_ref(),
                &Direction::tgt_to_src(pair.clone()),
                &dir.join(&files.pe),
                &pseudo,
                config,
            )?;
            translate_column(
                backend.as_ref(),
                &Direction::src_to_tgt(pair),
                &pseudo,
                &dir.join(&files.mt),
                config,
            )?;
            std::fs::remove_file(&pseudo).map_err(|e| Error::io(&pseudo, e))?;
            Some(spec)
        }
    };
    annotate_dataset(&dir, "H", config, backend_for_hash, stats.dropped)
}

/// Draws a seeded uniform sample without replacement into valid and test
/// splits; the remaining records form the training split. Splits are
/// disjoint and deterministic for a fixed seed.
pub fn split_dataset(
    dataset_dir: &Path,
    valid_count: u64,
    test_count: u64,
    seed: u64,
    out: &Path,
) -> Result<[DatasetManifest; 3]> {
    let parent = DatasetManifest::read(dataset_dir)?;
    parent.validate_files(dataset_dir)?;
    let n = parent.records;
    if valid_count + test_count >= n {
        return Err(Error::Config(format!(
            "cannot draw {valid_count}+{test_count} records from {n}"
        )));
    }

    // Partial Fisher-Yates: the first valid+test slots of a virtual shuffle.
    let mut ids: Vec<u64> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = (valid_count + test_count) as usize;
    for k in 0..draw {
        let j = k + rng.gen_range(0..(n as usize - k));
        ids.swap(k, j);
    }
    let mut route = vec![0u8; n as usize];
    for &id in &ids[..valid_count as usize] {
        route[id as usize] = 1;
    }
    for &id in &ids[valid_count as usize..draw] {
        route[id as usize] = 2;
    }

    let names = ["train", "valid", "test"];
    let dirs: Vec<PathBuf> = names.iter().map(|n| out.join(n)).collect();
    for d in &dirs {
        std::fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }
    for file in parent.files.all() {
        let src = dataset_dir.join(file);
        let reader = RawLines::new(BufReader::new(
            File::open(&src).map_err(|e| Error::io(&src, e))?,
        ));
        let mut writers: Vec<BufWriter<File>> = dirs
            .iter()
            .map(|d| {
                let p = d.join(file);
                Ok(BufWriter::new(File::create(&p).map_err(|e| Error::io(&p, e))?))
            })
            .collect::<Result<_>>()?;
        for (idx, line) in reader.enumerate() {
            let line = line?;
            let which = route[idx] as usize;
            writeln!(writers[which], "{line}").map_err(|e| Error::io(dirs[which].join(file), e))?;
        }
        for (w, d) in writers.iter_mut().zip(&dirs) {
            w.flush().map_err(|e| Error::io(d.join(file), e))?;
        }
    }

    let counts = [n - valid_count - test_count, valid_count, test_count];
    let mut manifests = Vec::with_capacity(3);
    for ((dir, &records), is_train) in dirs.iter().zip(&counts).zip([true, false, false]) {
        let manifest = DatasetManifest {
            strategy: parent.strategy.clone(),
            records,
            dropped: if is_train { parent.dropped } else { 0 },
            ter_shifts: parent.ter_shifts,
            config_hash: parent.config_hash.clone(),
            tool_version: TOOL_VERSION.into(),
            files: parent.files.clone(),
        };
        manifest.validate_files(dir)?;
        manifest.write(dir)?;
        manifests.push(manifest);
    }
    Ok(manifests.try_into().expect("three manifests"))
}
