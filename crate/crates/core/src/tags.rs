//! Word-level OK/BAD quality annotation.
//!
//! An MT output of N tokens receives 2N+1 tags: a gap before and after every
//! token, interleaved as gap₀ tok₁ gap₁ … tokN gapN. Token tags mark wrong
//! or spurious MT tokens; gap tags mark positions where reference words are
//! missing. Source tags are projected from MT token tags through word
//! alignments and have no gaps.

use crate::align::AlignmentSet;
use crate::edit::{levenshtein_align, EditOp, EditScript};
use crate::error::{Error, Result};
use crate::text::TokenSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tag {
    Ok,
    Bad,
}

impl Tag {
    pub fn as_str(self) -> &'static str {
        match self {
            Tag::Ok => "OK",
            Tag::Bad => "BAD",
        }
    }

    pub fn parse(s: &str) -> Result<Tag> {
        match s {
            "OK" => Ok(Tag::Ok),
            "BAD" => Ok(Tag::Bad),
            other => Err(Error::Config(format!("unknown tag {other:?}"))),
        }
    }
}

fn tags_to_line(tags: &[Tag]) -> String {
    let mut out = String::with_capacity(tags.len() * 3);
    for (i, t) in tags.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(t.as_str());
    }
    out
}

fn tags_from_line(line: &str) -> Result<Vec<Tag>> {
    line.split_whitespace().map(Tag::parse).collect()
}

/// The 2N+1 interleaved MT-side tags. Position 2k holds gap k and position
/// 2k−1 holds token k (1-based k).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MtTagSequence {
    tags: Vec<Tag>,
}

impl MtTagSequence {
    pub fn from_tags(tags: Vec<Tag>) -> Result<Self> {
        if tags.len().is_multiple_of(2) {
            return Err(Error::Invariant(format!(
                "MT tag sequence length {} is not 2N+1",
                tags.len()
            )));
        }
        Ok(MtTagSequence { tags })
    }

    pub fn parse_line(line: &str) -> Result<Self> {
        Self::from_tags(tags_from_line(line)?)
    }

    /// Number of MT tokens N.
    pub fn mt_len(&self) -> usize {
        self.tags.len() / 2
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn tags(&self) -> &[Tag] {
        &self.tags
    }

    /// Tag of MT token `k` (0-based).
    pub fn token_tag(&self, k: usize) -> Tag {
        self.tags[2 * k + 1]
    }

    /// Tag of gap `g` (0 = before the first token, N = after the last).
    pub fn gap_tag(&self, g: usize) -> Tag {
        self.tags[2 * g]
    }

    pub fn to_line(&self) -> String {
        tags_to_line(&self.tags)
    }

    pub fn bad_count(&self) -> usize {
        self.tags.iter().filter(|t| **t == Tag::Bad).count()
    }
}

/// Per-token source tags; gaps are not labeled on the source side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceTagSequence {
    tags: Vec<Tag>,
}

impl SourceTagSequence {
    pub fn from_tags(tags: Vec<Tag>) -> Self {
        SourceTagSequence { tags }
    }

    pub fn parse_line(line: &str) -> Result<Self> {
        Ok(SourceTagSequence {
            tags: tags_from_line(line)?,
        })
    }

    pub fn tags(&self) -> &[Tag] {
        &self.tags
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn to_line(&self) -> String {
        tags_to_line(&self.tags)
    }

    pub fn bad_count(&self) -> usize {
        self.tags.iter().filter(|t| **t == Tag::Bad).count()
    }
}

/// The complete annotation of one record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagSet {
    pub mt_tags: MtTagSequence,
    pub source_tags: SourceTagSequence,
    pub alignment: AlignmentSet,
}

/// Derives the 2N+1 MT tags from a monotone edit script.
///
/// A token is BAD when it is substituted or has no reference counterpart; a
/// gap is BAD when at least one reference word is missing there (several
/// missing words at one gap still yield a single BAD). Scripts containing
/// shift ops are rejected: tagging is defined on the monotone alignment.
pub fn annotate_mt_tags(script: &EditScript) -> Result<MtTagSequence> {
    if script.ops.iter().any(|op| matches!(op, EditOp::Shift { .. })) {
        return Err(Error::Invariant(
            "tag annotation requires a monotone (shift-free) edit script".into(),
        ));
    }
    script.validate()?;
    let n = script.mt_len;
    let mut tags = vec![Tag::Ok; 2 * n + 1];
    for op in &script.ops {
        match *op {
            EditOp::Match { .. } => {}
            EditOp::Substitute { mt, .. } | EditOp::DeleteFromMt { mt } => {
                tags[2 * mt + 1] = Tag::Bad;
            }
            EditOp::InsertIntoMt { mt_gap, .. } => tags[2 * mt_gap] = Tag::Bad,
            EditOp::Shift { .. } => unreachable!(),
        }
    }
    MtTagSequence::from_tags(tags)
}

/// Projects MT token tags onto the source: a source token is BAD when linked
/// to at least one BAD MT token. Gap tags never project; unaligned source
/// tokens stay OK.
pub fn project_source_tags(
    mt_tags: &MtTagSequence,
    alignment: &AlignmentSet,
    source_len: usize,
) -> Result<SourceTagSequence> {
    let mut tags = vec![Tag::Ok; source_len];
    for (src, mt) in alignment.iter() {
        if src as usize >= source_len || mt as usize >= mt_tags.mt_len() {
            return Err(Error::Invariant(format!(
                "alignment link {src}-{mt} out of range (source {source_len}, MT {})",
                mt_tags.mt_len()
            )));
        }
        if mt_tags.token_tag(mt as usize) == Tag::Bad {
            tags[src as usize] = Tag::Bad;
        }
    }
    Ok(SourceTagSequence::from_tags(tags))
}

/// Full annotation of one record: align MT against the reference, tag the MT
/// side, project to the source.
pub fn annotate_triple(
    source: &TokenSequence,
    mt: &TokenSequence,
    pe: &TokenSequence,
    alignment: &AlignmentSet,
) -> Result<TagSet> {
    let script = levenshtein_align(mt, pe);
    let mt_tags = annotate_mt_tags(&script)?;
    let source_tags = project_source_tags(&mt_tags, alignment, source.len())?;
    Ok(TagSet {
        mt_tags,
        source_tags,
        alignment: alignment.clone(),
    })
}
