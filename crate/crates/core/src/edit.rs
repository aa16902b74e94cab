//! Minimal edit alignment and TER between an MT output (hypothesis) and its
//! reference, the pseudo post-edit.
//!
//! [`levenshtein_align`] produces a monotone minimal-cost script under unit
//! costs; [`shift_phase`] optionally prepends greedy block moves in the style
//! of shift-based TER tools. Edits are expressed on the MT side:
//! [`EditOp::DeleteFromMt`] is an extra MT token (the reference-to-MT view
//! would call it an insertion) and [`EditOp::InsertIntoMt`] is a reference
//! word missing from the MT output, which surfaces at a gap position.

use crate::error::{Error, Result};
use crate::text::TokenSequence;

/// Default cap on accepted block shifts per sentence pair.
pub const DEFAULT_SHIFT_CAP: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EditOp {
    Match { mt: usize, pe: usize },
    Substitute { mt: usize, pe: usize },
    /// Reference word `pe` with no MT counterpart; it falls at MT gap
    /// `mt_gap` (0 = before the first token, N = after the last).
    InsertIntoMt { pe: usize, mt_gap: usize },
    /// Extra MT token with no reference counterpart.
    DeleteFromMt { mt: usize },
    /// Block move of `len` MT tokens starting at `start` to position `dest`
    /// (index into the sequence after removal). Counts as one edit.
    Shift { start: usize, len: usize, dest: usize },
}

impl EditOp {
    fn serialize_into(&self, out: &mut String) {
        use std::fmt::Write;
        match self {
            EditOp::Match { mt, pe } => write!(out, "M:{mt}:{pe}"),
            EditOp::Substitute { mt, pe } => write!(out, "S:{mt}:{pe}"),
            EditOp::InsertIntoMt { pe, .. } => write!(out, "I:-:{pe}"),
            EditOp::DeleteFromMt { mt } => write!(out, "D:{mt}:-"),
            // The triple layout has no slot for the span length, so it rides
            // on the kind letter: Z<len>:start:dest.
            EditOp::Shift { start, len, dest } => write!(out, "Z{len}:{start}:{dest}"),
        }
        .expect("write to String")
    }
}

/// An ordered edit script. After a shift phase, MT indices in the monotone
/// ops refer to the shifted sequence (which has the original length).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EditScript {
    pub ops: Vec<EditOp>,
    pub mt_len: usize,
    pub pe_len: usize,
}

impl EditScript {
    /// Number of edits: every non-Match op counts 1, shifts included.
    pub fn edit_count(&self) -> usize {
        self.ops
            .iter()
            .filter(|op| !matches!(op, EditOp::Match { .. }))
            .count()
    }

    /// One-line debug form: comma-separated `kind:mtIdx:peIdx` triples.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (k, op) in self.ops.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            op.serialize_into(&mut out);
        }
        out
    }

    /// Checks full, single coverage of both sides and monotone index order.
    pub fn validate(&self) -> Result<()> {
        let mut mt_seen = vec![false; self.mt_len];
        let mut pe_seen = vec![false; self.pe_len];
        let mut last_mt = None;
        let mut last_pe = None;
        for op in &self.ops {
            let (mt, pe) = match *op {
                EditOp::Match { mt, pe } | EditOp::Substitute { mt, pe } => (Some(mt), Some(pe)),
                EditOp::InsertIntoMt { pe, mt_gap } => {
                    if mt_gap > self.mt_len {
                        return Err(Error::Invariant(format!(
                            "gap {mt_gap} out of range for {} MT tokens",
                            self.mt_len
                        )));
                    }
                    (None, Some(pe))
                }
                EditOp::DeleteFromMt { mt } => (Some(mt), None),
                EditOp::Shift { .. } => continue,
            };
            if let Some(i) = mt {
                if i >= self.mt_len || std::mem::replace(&mut mt_seen[i], true) {
                    return Err(Error::Invariant(format!("MT index {i} out of range or reused")));
                }
                if last_mt.is_some_and(|p| i <= p) {
                    return Err(Error::Invariant("MT indices not increasing".into()));
                }
                last_mt = Some(i);
            }
            if let Some(j) = pe {
                if j >= self.pe_len || std::mem::replace(&mut pe_seen[j], true) {
                    return Err(Error::Invariant(format!("PE index {j} out of range or reused")));
                }
                if last_pe.is_some_and(|p| j <= p) {
                    return Err(Error::Invariant("PE indices not increasing".into()));
                }
                last_pe = Some(j);
            }
        }
        if mt_seen.iter().any(|s| !s) || pe_seen.iter().any(|s| !s) {
            return Err(Error::Invariant("script does not cover every token".into()));
        }
        Ok(())
    }
}

/// TER: `edit_count / ref_len`, not clamped at 1.0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TerResult {
    pub edit_count: usize,
    pub ref_len: usize,
    pub script: EditScript,
}

impl TerResult {
    pub fn ter(&self) -> f64 {
        self.edit_count as f64 / self.ref_len as f64
    }
}

/// Monotone minimal-cost alignment under unit costs (match 0, everything
/// else 1).
///
/// Backtrace ties break in the order Match, Substitute, DeleteFromMt,
/// InsertIntoMt, which keeps extra MT tokens tagged on the token rather than
/// producing spurious gap insertions, and makes output deterministic.
#[allow(clippy::needless_range_loop)] // index arithmetic mirrors the DP recurrence
pub fn levenshtein_align(mt: &TokenSequence, pe: &TokenSequence) -> EditScript {
    let m = mt.len();
    let n = pe.len();
    let mt_toks = mt.tokens();
    let pe_toks = pe.tokens();

    // dp[i][j] = cost of aligning mt[..i] with pe[..j], row-major.
    let width = n + 1;
    let mut dp = vec![0usize; (m + 1) * width];
    for j in 0..=n {
        dp[j] = j;
    }
    for i in 1..=m {
        dp[i * width] = i;
        for j in 1..=n {
            let sub = dp[(i - 1) * width + j - 1]
                + usize::from(mt_toks[i - 1] != pe_toks[j - 1]);
            let del = dp[(i - 1) * width + j] + 1;
            let ins = dp[i * width + j - 1] + 1;
            dp[i * width + j] = sub.min(del).min(ins);
        }
    }

    let mut rev_ops = Vec::with_capacity(m.max(n));
    let (mut i, mut j) = (m, n);
    while i > 0 || j > 0 {
        let cur = dp[i * width + j];
        if i > 0 && j > 0 && mt_toks[i - 1] == pe_toks[j - 1] && cur == dp[(i - 1) * width + j - 1]
        {
            rev_ops.push(EditOp::Match { mt: i - 1, pe: j - 1 });
            i -= 1;
            j -= 1;
        } else if i > 0 && j > 0 && cur == dp[(i - 1) * width + j - 1] + 1 {
            rev_ops.push(EditOp::Substitute { mt: i - 1, pe: j - 1 });
            i -= 1;
            j -= 1;
        } else if i > 0 && cur == dp[(i - 1) * width + j] + 1 {
            rev_ops.push(EditOp::DeleteFromMt { mt: i - 1 });
            i -= 1;
        } else {
            rev_ops.push(EditOp::InsertIntoMt { pe: j - 1, mt_gap: 0 });
            j -= 1;
        }
    }
    rev_ops.reverse();

    // Fix up gap positions in one forward pass.
    let mut consumed = 0;
    for op in &mut rev_ops {
        match op {
            EditOp::Match { .. } | EditOp::Substitute { .. } | EditOp::DeleteFromMt { .. } => {
                consumed += 1;
            }
            EditOp::InsertIntoMt { mt_gap, .. } => *mt_gap = consumed,
            EditOp::Shift { .. } => {}
        }
    }

    EditScript {
        ops: rev_ops,
        mt_len: m,
        pe_len: n,
    }
}

/// Levenshtein cost only, O(min) memory. Used by the shift search.
fn lev_cost(mt: &[String], pe: &[String]) -> usize {
    let mut prev: Vec<usize> = (0..=pe.len()).collect();
    let mut cur = vec![0usize; pe.len() + 1];
    for (i, mtok) in mt.iter().enumerate() {
        cur[0] = i + 1;
        for (j, ptok) in pe.iter().enumerate() {
            let sub = prev[j] + usize::from(mtok != ptok);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[pe.len()]
}

fn apply_shift(tokens: &[String], start: usize, len: usize, dest: usize) -> Vec<String> {
    let mut rest: Vec<String> = Vec::with_capacity(tokens.len());
    rest.extend_from_slice(&tokens[..start]);
    rest.extend_from_slice(&tokens[start + len..]);
    let mut out = Vec::with_capacity(tokens.len());
    out.extend_from_slice(&rest[..dest]);
    out.extend_from_slice(&tokens[start..start + len]);
    out.extend_from_slice(&rest[dest..]);
    out
}

/// Greedy block-shift phase.
///
/// Repeatedly applies the contiguous-span move that most reduces the
/// remaining Levenshtein cost (ties: longest span, then leftmost origin, then
/// leftmost destination), accepting only strict reductions. Each accepted
/// shift counts as one edit; the loop stops when no move helps or after
/// `max_shifts`.
pub fn shift_phase(
    mt: &TokenSequence,
    pe: &TokenSequence,
    max_shifts: usize,
) -> (TokenSequence, Vec<EditOp>) {
    let pe_toks = pe.tokens();
    let mut cur: Vec<String> = mt.tokens().to_vec();
    let mut base = lev_cost(&cur, pe_toks);
    let mut shifts = Vec::new();

    while shifts.len() < max_shifts && base > 0 {
        // (reduction, len, start, dest) with the comparison orientation
        // arranged so that bigger tuples are better.
        let mut best: Option<(usize, usize, std::cmp::Reverse<usize>, std::cmp::Reverse<usize>)> =
            None;
        let mut best_move = None;
        for start in 0..cur.len() {
            for len in 1..=cur.len() - start {
                for dest in 0..=cur.len() - len {
                    if dest == start {
                        continue;
                    }
                    let cand = apply_shift(&cur, start, len, dest);
                    let cost = lev_cost(&cand, pe_toks);
                    if cost >= base {
                        continue;
                    }
                    let key = (
                        base - cost,
                        len,
                        std::cmp::Reverse(start),
                        std::cmp::Reverse(dest),
                    );
                    if best.is_none_or(|b| key > b) {
                        best = Some(key);
                        best_move = Some((start, len, dest, cand, cost));
                    }
                }
            }
        }
        match best_move {
            Some((start, len, dest, cand, cost)) => {
                cur = cand;
                base = cost;
                shifts.push(EditOp::Shift { start, len, dest });
            }
            None => break,
        }
    }

    let shifted = TokenSequence::new(cur).expect("shift preserves token validity");
    (shifted, shifts)
}

/// Scores a hypothesis/reference pair. With `shifts`, the edit count is the
/// number of accepted block moves plus the post-shift Levenshtein cost.
///
/// An empty reference has no defined score and yields
/// [`Error::EmptyReference`]; callers drop such pairs.
pub fn ter_score(mt: &TokenSequence, pe: &TokenSequence, shifts: bool) -> Result<TerResult> {
    ter_score_capped(mt, pe, shifts, DEFAULT_SHIFT_CAP)
}

/// [`ter_score`] with an explicit cap on the number of accepted shifts.
pub fn ter_score_capped(
    mt: &TokenSequence,
    pe: &TokenSequence,
    shifts: bool,
    shift_cap: usize,
) -> Result<TerResult> {
    if pe.is_empty() {
        return Err(Error::EmptyReference);
    }
    let script = if shifts {
        let (shifted, shift_ops) = shift_phase(mt, pe, shift_cap);
        let mut script = levenshtein_align(&shifted, pe);
        let mut ops = shift_ops;
        ops.append(&mut script.ops);
        script.ops = ops;
        script
    } else {
        levenshtein_align(mt, pe)
    };
    Ok(TerResult {
        edit_count: script.edit_count(),
        ref_len: pe.len(),
        script,
    })
}
