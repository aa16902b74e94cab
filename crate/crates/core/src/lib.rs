//! Construction, auditing, and scoring of synthetic word-level translation
//! quality-estimation corpora.
//!
//! A dataset record pairs a source sentence with its machine translation and a
//! reference treated as a flawless post-edit (the "pseudo-PE"). Comparing the
//! MT output against that reference with a token-level edit alignment yields
//! per-token OK/BAD tags (including gap positions), and word alignments project
//! the MT-side tags back onto the source. Three strategies build such records
//! from plain-text corpora:
//!
//! * strategy **M** — round-trip translation of target-language monolingual text,
//! * strategy **P** — one-way translation of a parallel corpus's source side,
//! * strategy **H** — parallel source/reference combined with the round-trip MT
//!   output of the reference.
//!
//! The crate also ships the supporting tooling: a Levenshtein/TER edit aligner
//! with an optional block-shift phase, an EM word aligner with a diagonal
//! prior, pluggable translation backends, dataset statistics, and MCC scoring
//! of predicted tags.

pub mod align;
pub mod backend;
pub mod edit;
pub mod error;
pub mod eval;
pub mod pipeline;
pub mod stats;
pub mod tags;
pub mod text;

pub use error::{Error, Result};
