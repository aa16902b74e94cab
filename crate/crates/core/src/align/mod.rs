//! Source-to-MT word alignment: an EM-trained lexical translation model with
//! an optional diagonal prior (the reparameterized IBM Model 2 family), plus
//! Viterbi inference and directional symmetrization.
//!
//! Links are `(source index, MT index)` pairs, 0-based, serialized in Pharaoh
//! format (`i-j` tokens, source index first). The distinguished NULL source
//! token is written as `<NULL>` in model files; corpora must not use that
//! literal as a token.

mod em;

pub use em::{train, FilePairSource, PairSource, TrainOutcome};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{RawLines, TokenSequence};

/// Inference-time probability floor for unseen (source, target) pairs.
pub const PROB_FLOOR: f64 = 1e-9;

const MODEL_MAGIC: &str = "qeforge-align";
const MODEL_VERSION: &str = "v1";
const NULL_TOKEN: &str = "<NULL>";

/// EM training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlignerConfig {
    pub iterations: usize,
    /// λ of the diagonal prior p(i | j, m, n) ∝ exp(−λ·|i/m − j/n|).
    pub diagonal_tension: f64,
    /// Probability mass reserved for the NULL source token.
    pub null_prob: f64,
    pub favor_diagonal: bool,
    /// Update λ by gradient steps after each EM iteration.
    pub optimize_tension: bool,
}

impl Default for AlignerConfig {
    fn default() -> Self {
        AlignerConfig {
            iterations: 5,
            diagonal_tension: 4.0,
            null_prob: 0.08,
            favor_diagonal: true,
            optimize_tension: false,
        }
    }
}

impl AlignerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("aligner iterations must be >= 1".into()));
        }
        if self.diagonal_tension.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::Config("diagonal tension must be positive".into()));
        }
        if !(self.null_prob.partial_cmp(&0.0) == Some(std::cmp::Ordering::Greater)
            && self.null_prob.partial_cmp(&1.0) == Some(std::cmp::Ordering::Less))
        {
            return Err(Error::Config("null probability must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Interned vocabulary with ids assigned in first-occurrence order.
#[derive(Debug, Clone, Default)]
pub(crate) struct Vocab {
    map: HashMap<String, u32>,
    toks: Vec<String>,
}

impl Vocab {
    pub(crate) fn intern(&mut self, tok: &str) -> u32 {
        if let Some(&id) = self.map.get(tok) {
            return id;
        }
        let id = self.toks.len() as u32;
        self.map.insert(tok.to_string(), id);
        self.toks.push(tok.to_string());
        id
    }

    pub(crate) fn get(&self, tok: &str) -> Option<u32> {
        self.map.get(tok).copied()
    }

    pub(crate) fn token(&self, id: u32) -> &str {
        &self.toks[id as usize]
    }

    pub(crate) fn len(&self) -> usize {
        self.toks.len()
    }
}

/// Sparse conditional distributions t(target | source), including the NULL
/// source row, together with the prior parameters learned alongside them.
#[derive(Debug, Clone)]
pub struct TranslationTable {
    pub(crate) src_vocab: Vocab,
    pub(crate) tgt_vocab: Vocab,
    /// Row per source id; keys are target ids.
    pub(crate) rows: Vec<BTreeMap<u32, f64>>,
    pub(crate) null_row: BTreeMap<u32, f64>,
    pub diagonal_tension: f64,
    pub null_prob: f64,
    pub favor_diagonal: bool,
}

impl TranslationTable {
    /// t(target | source) with the inference floor for unseen pairs.
    pub fn prob(&self, source: &str, target: &str) -> f64 {
        let p = match (self.src_vocab.get(source), self.tgt_vocab.get(target)) {
            (Some(s), Some(t)) => self.rows[s as usize].get(&t).copied().unwrap_or(0.0),
            _ => 0.0,
        };
        p.max(PROB_FLOOR)
    }

    /// t(target | NULL) with the inference floor.
    pub fn prob_null(&self, target: &str) -> f64 {
        let p = self
            .tgt_vocab
            .get(target)
            .and_then(|t| self.null_row.get(&t).copied())
            .unwrap_or(0.0);
        p.max(PROB_FLOOR)
    }

    /// Number of (source, target) entries carrying mass, NULL row included.
    pub fn entry_count(&self) -> usize {
        self.rows.iter().map(BTreeMap::len).sum::<usize>() + self.null_row.len()
    }

    /// Iterates `(source, target, prob)` with `<NULL>` for the null row,
    /// sorted by token strings. This is the model-file order.
    pub fn entries(&self) -> Vec<(String, String, f64)> {
        let sorted_row = |row: &BTreeMap<u32, f64>| -> Vec<(String, f64)> {
            let mut v: Vec<(String, f64)> = row
                .iter()
                .map(|(&t, &p)| (self.tgt_vocab.token(t).to_string(), p))
                .collect();
            v.sort_by(|a, b| a.0.cmp(&b.0));
            v
        };
        let mut out = Vec::with_capacity(self.entry_count());
        for (tgt, p) in sorted_row(&self.null_row) {
            out.push((NULL_TOKEN.to_string(), tgt, p));
        }
        let mut src_ids: Vec<u32> = (0..self.src_vocab.len() as u32).collect();
        src_ids.sort_by(|&a, &b| self.src_vocab.token(a).cmp(self.src_vocab.token(b)));
        for s in src_ids {
            for (tgt, p) in sorted_row(&self.rows[s as usize]) {
                out.push((self.src_vocab.token(s).to_string(), tgt, p));
            }
        }
        out
    }

    /// Checks that every row with mass sums to 1 within `tol`.
    pub fn rows_are_stochastic(&self, tol: f64) -> bool {
        self.rows
            .iter()
            .chain(std::iter::once(&self.null_row))
            .filter(|row| !row.is_empty())
            .all(|row| (row.values().sum::<f64>() - 1.0).abs() <= tol)
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        (|| -> std::io::Result<()> {
            writeln!(
                w,
                "{MODEL_MAGIC}\t{MODEL_VERSION}\t{}\t{}\t{}",
                self.diagonal_tension, self.null_prob, self.favor_diagonal
            )?;
            for (src, tgt, p) in self.entries() {
                writeln!(w, "{src}\t{tgt}\t{p}")?;
            }
            w.flush()
        })()
        .map_err(|e| Error::io(path, e))
    }

    pub fn read_from(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = RawLines::new(BufReader::new(file));
        let header = lines
            .next()
            .ok_or_else(|| Error::format(path, "empty model file"))??;
        let head: Vec<&str> = header.split('\t').collect();
        if head.len() != 5 || head[0] != MODEL_MAGIC || head[1] != MODEL_VERSION {
            return Err(Error::format(path, "not a v1 alignment model"));
        }
        let parse_f = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::format(path, format!("bad number {s:?} in header")))
        };
        let mut table = TranslationTable {
            src_vocab: Vocab::default(),
            tgt_vocab: Vocab::default(),
            rows: Vec::new(),
            null_row: BTreeMap::new(),
            diagonal_tension: parse_f(head[2])?,
            null_prob: parse_f(head[3])?,
            favor_diagonal: head[4]
                .parse()
                .map_err(|_| Error::format(path, "bad favor_diagonal flag"))?,
        };
        for (idx, line) in lines.enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            let (src, tgt, prob) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
                (Some(s), Some(t), Some(p), None) => (s, t, p),
                _ => {
                    return Err(Error::format(path, format!("bad triple at line {}", idx + 2)));
                }
            };
            let p: f64 = prob
                .parse()
                .map_err(|_| Error::format(path, format!("bad probability at line {}", idx + 2)))?;
            let t = table.tgt_vocab.intern(tgt);
            if src == NULL_TOKEN {
                table.null_row.insert(t, p);
            } else {
                let s = table.src_vocab.intern(src);
                if s as usize == table.rows.len() {
                    table.rows.push(BTreeMap::new());
                }
                table.rows[s as usize].insert(t, p);
            }
        }
        Ok(table)
    }
}

/// Normalized diagonal prior over source positions for target position `j`
/// (0-based) in an (m source, n target) pair. Returns the probability of each
/// source position, already scaled by (1 − p0).
pub(crate) fn diagonal_prior(
    j: usize,
    m: usize,
    n: usize,
    tension: f64,
    null_prob: f64,
    favor_diagonal: bool,
) -> Vec<f64> {
    if m == 0 {
        return Vec::new();
    }
    if !favor_diagonal {
        return vec![(1.0 - null_prob) / m as f64; m];
    }
    let jn = (j + 1) as f64 / n as f64;
    let mut weights: Vec<f64> = (0..m)
        .map(|i| (-tension * ((i + 1) as f64 / m as f64 - jn).abs()).exp())
        .collect();
    let z: f64 = weights.iter().sum();
    for w in &mut weights {
        *w *= (1.0 - null_prob) / z;
    }
    weights
}

/// Highest-scoring source position (or NULL) for every MT token.
///
/// NULL wins exact ties; among source positions the smaller index wins.
/// NULL choices produce no link, so the result may leave MT tokens unlinked.
pub fn viterbi_align(
    table: &TranslationTable,
    source: &TokenSequence,
    mt: &TokenSequence,
) -> AlignmentSet {
    let mut links = AlignmentSet::new();
    let m = source.len();
    let n = mt.len();
    if m == 0 || n == 0 {
        return links;
    }
    for (j, f) in mt.tokens().iter().enumerate() {
        let prior = diagonal_prior(
            j,
            m,
            n,
            table.diagonal_tension,
            table.null_prob,
            table.favor_diagonal,
        );
        let mut best_score = table.null_prob * table.prob_null(f);
        let mut best: Option<usize> = None;
        for (i, e) in source.tokens().iter().enumerate() {
            let score = prior[i] * table.prob(e, f);
            if score > best_score {
                best_score = score;
                best = Some(i);
            }
        }
        if let Some(i) = best {
            links.insert(i as u32, j as u32);
        }
    }
    links
}

/// Set of (source index, MT index) links for one sentence pair, ordered.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AlignmentSet {
    links: BTreeSet<(u32, u32)>,
}

impl AlignmentSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, source: u32, mt: u32) {
        self.links.insert((source, mt));
    }

    pub fn contains(&self, source: u32, mt: u32) -> bool {
        self.links.contains(&(source, mt))
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.links.iter().copied()
    }

    /// Parses one Pharaoh line (`0-3 1-4 …`). Empty lines are legal and give
    /// an empty set.
    pub fn parse(line: &str) -> Result<Self> {
        let mut set = AlignmentSet::new();
        for pair in line.split_whitespace() {
            let (i, j) = pair
                .split_once('-')
                .ok_or_else(|| Error::Config(format!("bad alignment pair {pair:?}")))?;
            let i: u32 = i
                .parse()
                .map_err(|_| Error::Config(format!("bad alignment pair {pair:?}")))?;
            let j: u32 = j
                .parse()
                .map_err(|_| Error::Config(format!("bad alignment pair {pair:?}")))?;
            set.insert(i, j);
        }
        Ok(set)
    }

    pub fn to_pharaoh(&self) -> String {
        let mut out = String::new();
        for (k, (i, j)) in self.iter().enumerate() {
            if k > 0 {
                out.push(' ');
            }
            out.push_str(&format!("{i}-{j}"));
        }
        out
    }

    /// Swaps the two sides of every link.
    pub fn transpose(&self) -> AlignmentSet {
        let mut out = AlignmentSet::new();
        for (i, j) in self.iter() {
            out.insert(j, i);
        }
        out
    }

    pub fn validate(&self, source_len: usize, mt_len: usize) -> Result<()> {
        for (i, j) in self.iter() {
            if i as usize >= source_len || j as usize >= mt_len {
                return Err(Error::Invariant(format!(
                    "link {i}-{j} out of range for lengths ({source_len}, {mt_len})"
                )));
            }
        }
        Ok(())
    }

    fn union(&self, other: &AlignmentSet) -> AlignmentSet {
        let mut out = self.clone();
        out.links.extend(other.links.iter().copied());
        out
    }

    fn intersection(&self, other: &AlignmentSet) -> AlignmentSet {
        AlignmentSet {
            links: self.links.intersection(&other.links).copied().collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Symmetrization {
    Intersection,
    Union,
    #[default]
    GrowDiagFinalAnd,
}

impl std::str::FromStr for Symmetrization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "intersection" => Ok(Symmetrization::Intersection),
            "union" => Ok(Symmetrization::Union),
            "grow-diag-final-and" | "gdfa" => Ok(Symmetrization::GrowDiagFinalAnd),
            other => Err(Error::Config(format!("unknown symmetrization {other:?}"))),
        }
    }
}

/// Combines the two directional alignments. Both arguments must already be in
/// (source, MT) orientation; transpose the reverse direction first.
pub fn symmetrize(
    forward: &AlignmentSet,
    reverse: &AlignmentSet,
    heuristic: Symmetrization,
    source_len: usize,
    mt_len: usize,
) -> Result<AlignmentSet> {
    forward.validate(source_len, mt_len)?;
    reverse.validate(source_len, mt_len)?;
    Ok(match heuristic {
        Symmetrization::Intersection => forward.intersection(reverse),
        Symmetrization::Union => forward.union(reverse),
        Symmetrization::GrowDiagFinalAnd => {
            grow_diag_final_and(forward, reverse, source_len, mt_len)
        }
    })
}

fn grow_diag_final_and(
    forward: &AlignmentSet,
    reverse: &AlignmentSet,
    source_len: usize,
    mt_len: usize,
) -> AlignmentSet {
    const NEIGHBORS: [(i64, i64); 8] = [
        (-1, 0),
        (0, -1),
        (1, 0),
        (0, 1),
        (-1, -1),
        (-1, 1),
        (1, -1),
        (1, 1),
    ];
    let union = forward.union(reverse);
    let mut a = forward.intersection(reverse);
    let mut src_aligned = vec![false; source_len];
    let mut mt_aligned = vec![false; mt_len];
    for (i, j) in a.iter() {
        src_aligned[i as usize] = true;
        mt_aligned[j as usize] = true;
    }

    // grow-diag: extend into the union through the 8-neighborhood while one
    // endpoint is still unaligned, until fixpoint.
    loop {
        let snapshot: Vec<(u32, u32)> = a.iter().collect();
        let mut added = false;
        for (i, j) in snapshot {
            for (di, dj) in NEIGHBORS {
                let ni = i as i64 + di;
                let nj = j as i64 + dj;
                if ni < 0 || nj < 0 || ni as usize >= source_len || nj as usize >= mt_len {
                    continue;
                }
                let (ni, nj) = (ni as u32, nj as u32);
                if !a.contains(ni, nj)
                    && union.contains(ni, nj)
                    && (!src_aligned[ni as usize] || !mt_aligned[nj as usize])
                {
                    a.insert(ni, nj);
                    src_aligned[ni as usize] = true;
                    mt_aligned[nj as usize] = true;
                    added = true;
                }
            }
        }
        if !added {
            break;
        }
    }

    // final-and: adopt directional links whose endpoints are both unaligned.
    for set in [forward, reverse] {
        for (i, j) in set.iter() {
            if !src_aligned[i as usize] && !mt_aligned[j as usize] {
                a.insert(i, j);
                src_aligned[i as usize] = true;
                mt_aligned[j as usize] = true;
            }
        }
    }
    a
}
