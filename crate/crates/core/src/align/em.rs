//! EM training of the lexical translation model with a diagonal prior.
//!
//! Each iteration streams the corpus once. The E-step computes posterior
//! link probabilities under p(i | j, m, n) ∝ exp(−λ·|i/m − j/n|) with a fixed
//! NULL mass p0, the M-step renormalizes expected counts. The first pass runs
//! with an implicit uniform translation table (which cancels from the
//! posteriors) while the vocabularies are being built.
//!
//! Expected counts are accumulated in fixed corpus order: pairs are processed
//! in parallel per fixed-size slice and the per-slice partial counts merged
//! in slice order, so training is bit-reproducible for any thread count.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use rayon::prelude::*;

use super::{diagonal_prior, AlignerConfig, TranslationTable, Vocab, PROB_FLOOR};
use crate::error::{Error, Result};
use crate::text::{normalize, RawLines, TokenSequence, TokenizeMode};

/// Pairs processed per streaming block.
const BLOCK: usize = 8192;
/// Pairs per parallel slice within a block.
const SLICE: usize = 256;
/// Gradient steps on the tension objective per EM iteration.
const TENSION_STEPS: usize = 8;
const TENSION_RATE: f64 = 20.0;
const TENSION_RANGE: (f64, f64) = (0.1, 14.0);

/// Owned iterator over (source, target) pairs for one EM pass.
pub type PairIter<'a> = Box<dyn Iterator<Item = Result<(TokenSequence, TokenSequence)>> + 'a>;

/// A corpus of sentence pairs that can be re-iterated once per EM pass.
pub trait PairSource {
    fn pairs(&self) -> Result<PairIter<'_>>;
}

impl PairSource for [(TokenSequence, TokenSequence)] {
    fn pairs(&self) -> Result<PairIter<'_>> {
        Ok(Box::new(self.iter().map(|p| Ok(p.clone()))))
    }
}

impl PairSource for Vec<(TokenSequence, TokenSequence)> {
    fn pairs(&self) -> Result<PairIter<'_>> {
        self.as_slice().pairs()
    }
}

/// Streams a (source, target) pair per line from two parallel files,
/// normalizing and tokenizing on the fly. Differing line counts surface as a
/// config error; invalid UTF-8 lines surface as recoverable per-line errors.
pub struct FilePairSource {
    pub source: PathBuf,
    pub target: PathBuf,
    pub mode: TokenizeMode,
    pub lowercase: bool,
}

impl FilePairSource {
    pub fn new(source: impl Into<PathBuf>, target: impl Into<PathBuf>) -> Self {
        FilePairSource {
            source: source.into(),
            target: target.into(),
            mode: TokenizeMode::Whitespace,
            lowercase: false,
        }
    }
}

impl PairSource for FilePairSource {
    fn pairs(&self) -> Result<PairIter<'_>> {
        let sf = File::open(&self.source).map_err(|e| Error::io(&self.source, e))?;
        let tf = File::open(&self.target).map_err(|e| Error::io(&self.target, e))?;
        let mut s_lines = RawLines::new(BufReader::new(sf));
        let mut t_lines = RawLines::new(BufReader::new(tf));
        let mode = self.mode;
        let lowercase = self.lowercase;
        let mismatch = format!(
            "{} and {} have different line counts",
            self.source.display(),
            self.target.display()
        );
        let prep = move |line: Result<String>| -> Result<TokenSequence> {
            let seq = TokenSequence::parse(&normalize(&line?), mode);
            Ok(if lowercase { seq.to_lowercase() } else { seq })
        };
        Ok(Box::new(std::iter::from_fn(move || {
            match (s_lines.next(), t_lines.next()) {
                (None, None) => None,
                (Some(s), Some(t)) => Some(prep(s).and_then(|s| Ok((s, prep(t)?)))),
                _ => Some(Err(Error::Config(mismatch.clone()))),
            }
        })))
    }
}

pub struct TrainOutcome {
    pub table: TranslationTable,
    /// Corpus log-likelihood of the model entering each iteration.
    pub log_likelihoods: Vec<f64>,
    /// Pairs skipped because one side was empty or unreadable.
    pub skipped_pairs: u64,
}

enum TableView<'a> {
    /// First pass: t is uniform and cancels from the posteriors.
    Uniform,
    Trained {
        rows: &'a [BTreeMap<u32, f64>],
        null_row: &'a BTreeMap<u32, f64>,
    },
}

impl TableView<'_> {
    fn prob(&self, s: u32, t: u32) -> f64 {
        match self {
            TableView::Uniform => 1.0,
            TableView::Trained { rows, .. } => rows[s as usize]
                .get(&t)
                .copied()
                .unwrap_or(PROB_FLOOR)
                .max(PROB_FLOOR),
        }
    }

    fn prob_null(&self, t: u32) -> f64 {
        match self {
            TableView::Uniform => 1.0,
            TableView::Trained { null_row, .. } => {
                null_row.get(&t).copied().unwrap_or(PROB_FLOOR).max(PROB_FLOOR)
            }
        }
    }
}

#[derive(Default)]
struct Partial {
    counts: HashMap<(u32, u32), f64>,
    null_counts: HashMap<u32, f64>,
    log_likelihood: f64,
    /// Posterior expectation of the diagonal feature −|i/m − j/n|.
    emp_feat: f64,
    target_tokens: u64,
}

fn estep_slice(
    pairs: &[(Vec<u32>, Vec<u32>)],
    view: &TableView<'_>,
    tension: f64,
    null_prob: f64,
    favor_diagonal: bool,
) -> Partial {
    let mut part = Partial::default();
    for (src, tgt) in pairs {
        let m = src.len();
        let n = tgt.len();
        for (j, &f) in tgt.iter().enumerate() {
            let prior = diagonal_prior(j, m, n, tension, null_prob, favor_diagonal);
            let w_null = null_prob * view.prob_null(f);
            let mut z = w_null;
            let mut weights = Vec::with_capacity(m);
            for (i, &e) in src.iter().enumerate() {
                let w = prior[i] * view.prob(e, f);
                weights.push(w);
                z += w;
            }
            part.log_likelihood += z.ln();
            *part.null_counts.entry(f).or_default() += w_null / z;
            let jn = (j + 1) as f64 / n as f64;
            for (i, (&e, w)) in src.iter().zip(&weights).enumerate() {
                let gamma = w / z;
                *part.counts.entry((e, f)).or_default() += gamma;
                if favor_diagonal {
                    part.emp_feat -= gamma * ((i + 1) as f64 / m as f64 - jn).abs();
                }
            }
            part.target_tokens += 1;
        }
    }
    part
}

/// Expected diagonal feature for one target position under tension λ.
fn model_feat(j: usize, m: usize, n: usize, tension: f64) -> f64 {
    let jn = (j + 1) as f64 / n as f64;
    let mut z = 0.0;
    let mut acc = 0.0;
    for i in 0..m {
        let h = -((i + 1) as f64 / m as f64 - jn).abs();
        let w = (tension * h).exp();
        z += w;
        acc += w * h;
    }
    acc / z
}

/// Runs EM over the corpus. See the module docs for the model; the returned
/// table carries the (possibly updated) diagonal tension.
pub fn train<P: PairSource + ?Sized>(corpus: &P, config: &AlignerConfig) -> Result<TrainOutcome> {
    config.validate()?;
    let mut src_vocab = Vocab::default();
    let mut tgt_vocab = Vocab::default();
    let mut rows: Vec<BTreeMap<u32, f64>> = Vec::new();
    let mut null_row: BTreeMap<u32, f64> = BTreeMap::new();
    let mut trained = false;
    let mut tension = config.diagonal_tension;
    let mut log_likelihoods = Vec::with_capacity(config.iterations);
    let mut skipped_pairs = 0u64;
    // (n, m) sentence-length profile, for the tension gradient.
    let mut size_counts: BTreeMap<(usize, usize), u64> = BTreeMap::new();

    for iteration in 0..config.iterations {
        let first = iteration == 0;
        let mut counts: Vec<BTreeMap<u32, f64>> = vec![BTreeMap::new(); src_vocab.len()];
        let mut null_counts: BTreeMap<u32, f64> = BTreeMap::new();
        let mut log_likelihood = 0.0;
        let mut emp_feat = 0.0;
        let mut target_tokens = 0u64;
        let mut usable_pairs = 0u64;

        let mut pairs = corpus.pairs()?;
        let mut done = false;
        while !done {
            // Collect one block, interning tokens on the main thread.
            let mut block: Vec<(Vec<u32>, Vec<u32>)> = Vec::with_capacity(BLOCK);
            while block.len() < BLOCK {
                match pairs.next() {
                    None => {
                        done = true;
                        break;
                    }
                    Some(Err(Error::Line { line, message })) => {
                        if first {
                            skipped_pairs += 1;
                            log::warn!("skipping pair at line {line}: {message}");
                        }
                    }
                    Some(Err(e)) => return Err(e),
                    Some(Ok((s, t))) => {
                        if s.is_empty() || t.is_empty() {
                            if first {
                                skipped_pairs += 1;
                                log::warn!("skipping pair with an empty side");
                            }
                            continue;
                        }
                        let s_ids: Vec<u32> =
                            s.tokens().iter().map(|tok| src_vocab.intern(tok)).collect();
                        let t_ids: Vec<u32> =
                            t.tokens().iter().map(|tok| tgt_vocab.intern(tok)).collect();
                        if first {
                            *size_counts.entry((t_ids.len(), s_ids.len())).or_default() += 1;
                        }
                        block.push((s_ids, t_ids));
                    }
                }
            }
            usable_pairs += block.len() as u64;
            counts.resize(src_vocab.len(), BTreeMap::new());

            let view = if trained {
                TableView::Trained {
                    rows: &rows,
                    null_row: &null_row,
                }
            } else {
                TableView::Uniform
            };
            let partials: Vec<Partial> = block
                .par_chunks(SLICE)
                .map(|slice| {
                    estep_slice(slice, &view, tension, config.null_prob, config.favor_diagonal)
                })
                .collect();
            // Merge in slice order: bit-reproducible regardless of scheduling.
            for part in partials {
                for ((s, t), c) in part.counts {
                    *counts[s as usize].entry(t).or_default() += c;
                }
                for (t, c) in part.null_counts {
                    *null_counts.entry(t).or_default() += c;
                }
                log_likelihood += part.log_likelihood;
                emp_feat += part.emp_feat;
                target_tokens += part.target_tokens;
            }
        }

        if first && usable_pairs == 0 {
            return Err(Error::Config("alignment corpus has no usable pairs".into()));
        }
        if !trained {
            // The uniform table assigns 1/|V| to every target token.
            log_likelihood -= target_tokens as f64 * (tgt_vocab.len() as f64).ln();
        }
        log_likelihoods.push(log_likelihood);

        // M-step.
        rows = counts;
        for row in &mut rows {
            let sum: f64 = row.values().sum();
            if sum > 0.0 {
                for v in row.values_mut() {
                    *v /= sum;
                }
            }
        }
        let null_sum: f64 = null_counts.values().sum();
        if null_sum > 0.0 {
            for v in null_counts.values_mut() {
                *v /= null_sum;
            }
        }
        null_row = null_counts;
        trained = true;

        if config.optimize_tension && config.favor_diagonal && iteration > 0 {
            for _ in 0..TENSION_STEPS {
                let mut mod_feat = 0.0;
                for (&(n, m), &count) in &size_counts {
                    for j in 0..n {
                        mod_feat += count as f64 * model_feat(j, m, n, tension);
                    }
                }
                let gradient = (emp_feat - mod_feat) / target_tokens as f64;
                tension = (tension + TENSION_RATE * gradient)
                    .clamp(TENSION_RANGE.0, TENSION_RANGE.1);
            }
            log::debug!("iteration {iteration}: diagonal tension now {tension:.4}");
        }
    }

    Ok(TrainOutcome {
        table: TranslationTable {
            src_vocab,
            tgt_vocab,
            rows,
            null_row,
            diagonal_tension: tension,
            null_prob: config.null_prob,
            favor_diagonal: config.favor_diagonal,
        },
        log_likelihoods,
        skipped_pairs,
    })
}
