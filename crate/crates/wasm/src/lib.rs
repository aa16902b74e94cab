//! Browser bindings for the interactive demo page.
//!
//! Every function takes plain strings and returns a JSON string so the page
//! needs no generated TypeScript. Failures come back as `{"error": "..."}`.

use serde_json::json;
use wasm_bindgen::prelude::wasm_bindgen;

use qeforge_core::align::{
    symmetrize, train, viterbi_align, AlignerConfig, AlignmentSet, Symmetrization,
};
use qeforge_core::backend::{Direction, LanguagePair, MockBackend, MockNoise, TranslationBackend};
use qeforge_core::edit::{levenshtein_align, EditOp};
use qeforge_core::error::Result;
use qeforge_core::stats::TerHistogram;
use qeforge_core::tags::{annotate_mt_tags, project_source_tags, Tag};
use qeforge_core::text::{normalize, TokenSequence, TokenizeMode};

fn parse_line(s: &str, lowercase: bool) -> TokenSequence {
    let seq = TokenSequence::parse(&normalize(s), TokenizeMode::Whitespace);
    if lowercase {
        seq.to_lowercase()
    } else {
        seq
    }
}

fn err_json(message: impl std::fmt::Display) -> String {
    json!({ "error": message.to_string() }).to_string()
}

fn tags_json(tags: &[Tag]) -> Vec<&'static str> {
    tags.iter().map(|t| t.as_str()).collect()
}

fn edit_json(op: &EditOp, mt: &TokenSequence, pe: &TokenSequence) -> serde_json::Value {
    match *op {
        EditOp::Match { mt: i, pe: j } => json!({
            "kind": "match", "mt": i, "pe": j,
            "mt_token": mt.tokens()[i], "pe_token": pe.tokens()[j],
        }),
        EditOp::Substitute { mt: i, pe: j } => json!({
            "kind": "substitute", "mt": i, "pe": j,
            "mt_token": mt.tokens()[i], "pe_token": pe.tokens()[j],
        }),
        EditOp::InsertIntoMt { pe: j, mt_gap } => json!({
            "kind": "missing", "pe": j, "gap": mt_gap, "pe_token": pe.tokens()[j],
        }),
        EditOp::DeleteFromMt { mt: i } => json!({
            "kind": "extra", "mt": i, "mt_token": mt.tokens()[i],
        }),
        EditOp::Shift { start, len, dest } => json!({
            "kind": "shift", "start": start, "len": len, "dest": dest,
        }),
    }
}

/// Tags one record: source, MT output, reference, and a Pharaoh alignment
/// line. Returns tags, the edit script, and TER as JSON.
#[wasm_bindgen]
pub fn annotate_pair(
    source: &str,
    mt: &str,
    pe: &str,
    alignments: &str,
    lowercase: bool,
) -> String {
    let run = || -> Result<String> {
        let source = parse_line(source, lowercase);
        let mt = parse_line(mt, lowercase);
        let pe = parse_line(pe, lowercase);
        let links = AlignmentSet::parse(alignments)?;
        let script = levenshtein_align(&mt, &pe);
        let mt_tags = annotate_mt_tags(&script)?;
        let source_tags = project_source_tags(&mt_tags, &links, source.len())?;
        let edits: Vec<serde_json::Value> = script
            .ops
            .iter()
            .filter(|op| !matches!(op, EditOp::Match { .. }))
            .map(|op| edit_json(op, &mt, &pe))
            .collect();
        Ok(json!({
            "source_tokens": source.tokens(),
            "mt_tokens": mt.tokens(),
            "pe_tokens": pe.tokens(),
            "mt_tags": tags_json(mt_tags.tags()),
            "source_tags": tags_json(source_tags.tags()),
            "alignment": links.iter().collect::<Vec<(u32, u32)>>(),
            "edits": edits,
            "edit_count": script.edit_count(),
            "ref_len": pe.len(),
            "ter": if pe.is_empty() { serde_json::Value::Null } else {
                json!(script.edit_count() as f64 / pe.len() as f64)
            },
            "script": script.serialize(),
        })
        .to_string())
    };
    run().unwrap_or_else(err_json)
}

/// Builds a small strategy-M dataset in memory from pasted reference lines
/// using the seeded mock translator, then reports per-record annotations,
/// the TER histogram, and summary statistics.
#[wasm_bindgen]
pub fn build_round_trip_dataset(
    lines: &str,
    seed: u64,
    drop_p: f64,
    swap_p: f64,
    substitute_p: f64,
) -> String {
    let run = || -> Result<String> {
        let references: Vec<TokenSequence> = lines
            .lines()
            .map(|l| parse_line(l, false))
            .filter(|seq| !seq.is_empty())
            .collect();
        if references.is_empty() {
            return Ok(err_json("paste at least one non-empty line"));
        }
        let backend = MockBackend::new(
            seed,
            MockNoise {
                drop_p,
                swap_p,
                substitute_p,
            },
        );
        let pair = LanguagePair::default();
        let pe_lines: Vec<String> = references.iter().map(TokenSequence::join).collect();
        let pseudo = backend.translate_batch(&pe_lines, &Direction::tgt_to_src(pair.clone()), 1)?;
        let mt_lines =
            backend.translate_batch(&pseudo, &Direction::src_to_tgt(pair), 1)?;

        let sources: Vec<TokenSequence> = pseudo.iter().map(|l| parse_line(l, false)).collect();
        let mts: Vec<TokenSequence> = mt_lines.iter().map(|l| parse_line(l, false)).collect();
        let corpus: Vec<(TokenSequence, TokenSequence)> = sources
            .iter()
            .cloned()
            .zip(mts.iter().cloned())
            .collect();
        let aligner = AlignerConfig::default();
        let forward = train(&corpus, &aligner)?.table;
        let reverse_corpus: Vec<(TokenSequence, TokenSequence)> = mts
            .iter()
            .cloned()
            .zip(sources.iter().cloned())
            .collect();
        let reverse = train(&reverse_corpus, &aligner)?.table;

        let mut histogram = TerHistogram::default();
        let mut ters = Vec::with_capacity(references.len());
        let mut records = Vec::with_capacity(references.len());
        let (mut mt_bad, mut mt_total, mut src_bad) = (0u64, 0u64, 0u64);
        for ((source, mt), pe) in sources.iter().zip(&mts).zip(&references) {
            let script = levenshtein_align(mt, pe);
            let fwd = viterbi_align(&forward, source, mt);
            let rev = viterbi_align(&reverse, mt, source).transpose();
            let links = symmetrize(
                &fwd,
                &rev,
                Symmetrization::GrowDiagFinalAnd,
                source.len(),
                mt.len(),
            )?;
            let mt_tags = annotate_mt_tags(&script)?;
            let source_tags = project_source_tags(&mt_tags, &links, source.len())?;
            let ter = script.edit_count() as f64 / pe.len() as f64;
            histogram.add(ter);
            ters.push(ter);
            mt_bad += mt_tags.bad_count() as u64;
            mt_total += mt_tags.len() as u64;
            src_bad += source_tags.bad_count() as u64;
            records.push(json!({
                "source_tokens": source.tokens(),
                "mt_tokens": mt.tokens(),
                "pe_tokens": pe.tokens(),
                "mt_tags": tags_json(mt_tags.tags()),
                "source_tags": tags_json(source_tags.tags()),
                "alignment": links.iter().collect::<Vec<(u32, u32)>>(),
                "ter": ter,
            }));
        }

        let n = ters.len() as f64;
        let mean = ters.iter().sum::<f64>() / n;
        let variance = ters.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / n;
        let mut sorted = ters.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        let median = sorted[(sorted.len() - 1) / 2];
        Ok(json!({
            "records": records,
            "histogram": { "bins": histogram.bins, "overflow": histogram.overflow },
            "stats": {
                "records": ters.len(),
                "ter_mean": mean,
                "ter_median": median,
                "ter_std": variance.sqrt(),
                "ter_variance": variance,
                "mt_tags": mt_total,
                "mt_bad_tags": mt_bad,
                "source_bad_tags": src_bad,
            },
        })
        .to_string())
    };
    run().unwrap_or_else(err_json)
}

/// Trains the EM word aligner on pasted `source ||| target` lines and
/// returns the log-likelihood curve plus Viterbi links for every pair.
#[wasm_bindgen]
pub fn train_alignment_demo(
    corpus: &str,
    iterations: usize,
    diagonal_tension: f64,
    null_prob: f64,
    favor_diagonal: bool,
) -> String {
    let run = || -> Result<String> {
        let mut pairs = Vec::new();
        for line in corpus.lines() {
            let Some((s, t)) = line.split_once("|||") else {
                continue;
            };
            let s = parse_line(s, false);
            let t = parse_line(t, false);
            if !s.is_empty() && !t.is_empty() {
                pairs.push((s, t));
            }
        }
        if pairs.is_empty() {
            return Ok(err_json("paste lines of the form: source tokens ||| target tokens"));
        }
        let config = AlignerConfig {
            iterations: iterations.max(1),
            diagonal_tension,
            null_prob,
            favor_diagonal,
            optimize_tension: false,
        };
        let outcome = train(&pairs, &config)?;
        let aligned: Vec<serde_json::Value> = pairs
            .iter()
            .map(|(s, t)| {
                let links = viterbi_align(&outcome.table, s, t);
                json!({
                    "source_tokens": s.tokens(),
                    "mt_tokens": t.tokens(),
                    "links": links.iter().collect::<Vec<(u32, u32)>>(),
                })
            })
            .collect();
        let mut entries = outcome.table.entries();
        entries.sort_by(|a, b| b.2.partial_cmp(&a.2).expect("finite probabilities"));
        entries.truncate(30);
        Ok(json!({
            "log_likelihoods": outcome.log_likelihoods,
            "tension": outcome.table.diagonal_tension,
            "pairs": aligned,
            "top_entries": entries
                .into_iter()
                .map(|(s, t, p)| json!([s, t, p]))
                .collect::<Vec<_>>(),
        })
        .to_string())
    };
    run().unwrap_or_else(err_json)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn annotate_pair_reports_the_worked_example() {
        let out = annotate_pair(
            "중국 당국이 부인하지 않는 것으로 볼 때 가능성이 높다 .",
            "Given that the Chinese authorities do not deny it , it is highly likely .",
            "Given that the Chinese authorities do not deny it , chances are high .",
            "0-3 1-4 2-7 3-5 3-6 4-8 5-8 6-0 7-13 8-11 8-12 9-14",
            false,
        );
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["edit_count"], 4);
        assert_eq!(v["mt_tags"].as_array().unwrap().len(), 31);
        assert_eq!(v["source_tags"][7], "BAD");
        assert_eq!(v["source_tags"][8], "BAD");
        assert!(v.get("error").is_none());
    }

    #[test]
    fn round_trip_demo_builds_records() {
        let out = build_round_trip_dataset(
            "the cat sat on the mat\nthe dog barked at the moon\n",
            42,
            0.1,
            0.05,
            0.1,
        );
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["records"].as_array().unwrap().len(), 2);
        let record = &v["records"][0];
        let n = record["mt_tokens"].as_array().unwrap().len();
        assert_eq!(record["mt_tags"].as_array().unwrap().len(), 2 * n + 1);
    }

    #[test]
    fn aligner_demo_learns_the_diagonal() {
        let corpus = "a b ||| x y\na ||| x\nb ||| y\n";
        let out = train_alignment_demo(corpus, 5, 4.0, 0.08, true);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["log_likelihoods"].as_array().unwrap().len(), 5);
        assert_eq!(v["pairs"][0]["links"], serde_json::json!([[0, 0], [1, 1]]));
    }

    #[test]
    fn errors_come_back_as_json() {
        let out = annotate_pair("a", "b", "c", "not-a-link", false);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(v["error"].as_str().unwrap().contains("not-a-link"));
        let out = build_round_trip_dataset("", 0, 0.0, 0.0, 0.0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(v.get("error").is_some());
    }
}
