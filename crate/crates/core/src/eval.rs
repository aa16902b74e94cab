//! Scoring of predicted OK/BAD tags against gold tags with the Matthews
//! correlation coefficient, pooled over every tag in a file and optionally
//! broken down by TER range.
//!
//! BAD is the positive class. A zero factor in the denominator yields an MCC
//! of 0 by the usual convention, noted in the reports.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::{ter_bin, TER_BIN_LABELS, TER_OVERFLOW_LABEL};
use crate::tags::Tag;
use crate::text::RawLines;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ConfusionCounts {
    pub true_pos: u64,
    pub false_pos: u64,
    pub true_neg: u64,
    pub false_neg: u64,
}

impl ConfusionCounts {
    pub fn add(&mut self, pred: Tag, gold: Tag) {
        match (pred, gold) {
            (Tag::Bad, Tag::Bad) => self.true_pos += 1,
            (Tag::Bad, Tag::Ok) => self.false_pos += 1,
            (Tag::Ok, Tag::Ok) => self.true_neg += 1,
            (Tag::Ok, Tag::Bad) => self.false_neg += 1,
        }
    }

    pub fn merge(&mut self, other: &ConfusionCounts) {
        self.true_pos += other.true_pos;
        self.false_pos += other.false_pos;
        self.true_neg += other.true_neg;
        self.false_neg += other.false_neg;
    }

    pub fn total(&self) -> u64 {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }

    /// (tp·tn − fp·fn) / √((tp+fp)(tp+fn)(tn+fp)(tn+fn)), 0 when any factor
    /// of the denominator vanishes.
    pub fn mcc(&self) -> f64 {
        let (tp, fp, tn, fn_) = (
            self.true_pos as u128,
            self.false_pos as u128,
            self.true_neg as u128,
            self.false_neg as u128,
        );
        let factors = [tp + fp, tp + fn_, tn + fp, tn + fn_];
        if factors.contains(&0) {
            return 0.0;
        }
        let numerator = (tp * tn) as i128 - (fp * fn_) as i128;
        let denominator = factors.iter().map(|&f| f as f64).product::<f64>().sqrt();
        numerator as f64 / denominator
    }
}

fn parse_tag_line(line: &str, line_no: u64) -> Result<Vec<Tag>> {
    line.split_whitespace()
        .map(|t| Tag::parse(t).map_err(|e| Error::line(line_no, e.to_string())))
        .collect()
}

/// Pools confusion counts over two line-aligned tag files. Any line-count or
/// per-line tag-count mismatch is an error naming the offending line.
pub fn pooled_confusion(pred: &Path, gold: &Path) -> Result<ConfusionCounts> {
    let open = |p: &Path| -> Result<RawLines<BufReader<File>>> {
        Ok(RawLines::new(BufReader::new(
            File::open(p).map_err(|e| Error::io(p, e))?,
        )))
    };
    let mut pred_lines = open(pred)?;
    let mut gold_lines = open(gold)?;
    let mut counts = ConfusionCounts::default();
    let mut line_no = 0u64;
    loop {
        line_no += 1;
        let (p, g) = match (pred_lines.next(), gold_lines.next()) {
            (None, None) => break,
            (Some(p), Some(g)) => (p?, g?),
            _ => {
                return Err(Error::line(
                    line_no,
                    format!(
                        "{} and {} have different line counts",
                        pred.display(),
                        gold.display()
                    ),
                ))
            }
        };
        let p_tags = parse_tag_line(&p, line_no)?;
        let g_tags = parse_tag_line(&g, line_no)?;
        if p_tags.len() != g_tags.len() {
            return Err(Error::line(
                line_no,
                format!("{} predicted tags vs {} gold tags", p_tags.len(), g_tags.len()),
            ));
        }
        for (pt, gt) in p_tags.iter().zip(&g_tags) {
            counts.add(*pt, *gt);
        }
    }
    Ok(counts)
}

/// Pooled MCC of a predicted tag file against a gold tag file.
pub fn mcc_files(pred: &Path, gold: &Path) -> Result<f64> {
    Ok(pooled_confusion(pred, gold)?.mcc())
}

/// One TER-range bucket of [`evaluate_by_ter_range`]. `mcc` is `None` for
/// empty buckets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinScore {
    pub range: String,
    pub mcc: Option<f64>,
    pub count: u64,
}

/// Partitions records by their TER value into the statistics module's
/// 0.1-wide bins (plus the ≥ 1.0 overflow bin) and pools an MCC per bin.
pub fn evaluate_by_ter_range(pred: &Path, gold: &Path, ter: &Path) -> Result<Vec<BinScore>> {
    let open = |p: &Path| -> Result<RawLines<BufReader<File>>> {
        Ok(RawLines::new(BufReader::new(
            File::open(p).map_err(|e| Error::io(p, e))?,
        )))
    };
    let mut pred_lines = open(pred)?;
    let mut gold_lines = open(gold)?;
    let mut ter_lines = open(ter)?;
    let mut counts = [ConfusionCounts::default(); 11];
    let mut records = [0u64; 11];
    let mut line_no = 0u64;
    loop {
        line_no += 1;
        let (p, g, t) = match (pred_lines.next(), gold_lines.next(), ter_lines.next()) {
            (None, None, None) => break,
            (Some(p), Some(g), Some(t)) => (p?, g?, t?),
            _ => {
                return Err(Error::line(
                    line_no,
                    "tag and TER files have different line counts".to_string(),
                ))
            }
        };
        let p_tags = parse_tag_line(&p, line_no)?;
        let g_tags = parse_tag_line(&g, line_no)?;
        if p_tags.len() != g_tags.len() {
            return Err(Error::line(
                line_no,
                format!("{} predicted tags vs {} gold tags", p_tags.len(), g_tags.len()),
            ));
        }
        let ter_value: f64 = t
            .trim()
            .parse()
            .map_err(|_| Error::line(line_no, format!("bad TER value {t:?}")))?;
        let bin = ter_bin(ter_value).unwrap_or(10);
        records[bin] += 1;
        for (pt, gt) in p_tags.iter().zip(&g_tags) {
            counts[bin].add(*pt, *gt);
        }
    }
    let labels = TER_BIN_LABELS
        .iter()
        .copied()
        .chain(std::iter::once(TER_OVERFLOW_LABEL));
    Ok(labels
        .zip(counts.iter().zip(&records))
        .map(|(label, (c, &n))| BinScore {
            range: label.to_string(),
            mcc: (n > 0).then(|| c.mcc()),
            count: n,
        })
        .collect())
}

/// The full evaluation report. Serialized as
/// `{target_mcc, source_mcc, per_bin: [{range, mcc|null, count}]}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MccReport {
    pub target_mcc: f64,
    pub source_mcc: Option<f64>,
    pub per_bin: Option<Vec<BinScore>>,
}

impl MccReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("Target MCC{:>12.4}\n", self.target_mcc));
        match self.source_mcc {
            Some(v) => out.push_str(&format!("Source MCC{:>12.4}\n", v)),
            None => out.push_str("Source MCC           -\n"),
        }
        if let Some(bins) = &self.per_bin {
            out.push_str("\nTER range    Target MCC   records\n");
            for bin in bins {
                let mcc = match bin.mcc {
                    Some(v) => format!("{v:>10.4}"),
                    None => format!("{:>10}", "-"),
                };
                out.push_str(&format!("{:<12} {} {:>9}\n", bin.range, mcc, bin.count));
            }
        }
        out.push_str("\nBAD is the positive class; zero-denominator MCC is reported as 0.\n");
        out
    }
}
