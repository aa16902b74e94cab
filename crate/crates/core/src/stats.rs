//! Dataset statistics: sentence/token counts, TER moments, tag counts, and
//! the TER-range histogram.
//!
//! Conventions, also recorded in the text report header: the standard
//! deviation is population (divide by n), the median of an even count is the
//! lower of the two middle values, and averages are shown with two decimals
//! while the JSON report keeps full precision.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::DatasetManifest;
use crate::tags::Tag;
use crate::text::RawLines;

/// Index of the 0.1-wide histogram bin for a TER value, or `None` for the
/// overflow bin (TER ≥ 1.0).
pub fn ter_bin(ter: f64) -> Option<usize> {
    if ter >= 1.0 {
        None
    } else {
        Some(((ter * 10.0).floor() as usize).min(9))
    }
}

pub const TER_BIN_LABELS: [&str; 10] = [
    "0.0-0.1", "0.1-0.2", "0.2-0.3", "0.3-0.4", "0.4-0.5", "0.5-0.6", "0.6-0.7", "0.7-0.8",
    "0.8-0.9", "0.9-1.0",
];
pub const TER_OVERFLOW_LABEL: &str = ">=1.0";

/// Ten bins of width 0.1 over [0, 1) plus an overflow bin for TER ≥ 1.0.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TerHistogram {
    pub bins: [u64; 10],
    pub overflow: u64,
}

impl TerHistogram {
    pub fn add(&mut self, ter: f64) {
        match ter_bin(ter) {
            Some(k) => self.bins[k] += 1,
            None => self.overflow += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.bins.iter().sum::<u64>() + self.overflow
    }
}

/// The statistics block of one dataset split. Floats carry full precision;
/// rounding happens only in the text rendering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub source_sentences: u64,
    pub mt_sentences: u64,
    pub pe_sentences: u64,
    pub source_tokens: u64,
    pub mt_tokens: u64,
    pub pe_tokens: u64,
    pub avg_tokens_per_source: f64,
    pub avg_tokens_per_mt: f64,
    pub avg_tokens_per_pe: f64,
    pub ter_mean: f64,
    pub ter_median: f64,
    pub ter_std: f64,
    pub ter_variance: f64,
    pub source_ok_tags: u64,
    pub source_bad_tags: u64,
    pub mt_ok_tags: u64,
    pub mt_bad_tags: u64,
}

fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

struct Scan {
    stats: CorpusStats,
    histogram: TerHistogram,
}

fn scan_dataset(dir: &Path) -> Result<Scan> {
    let manifest = DatasetManifest::read(dir)?;
    manifest.validate_files(dir)?;
    if manifest.records == 0 {
        return Err(Error::Config(format!(
            "{} holds an empty dataset",
            dir.display()
        )));
    }
    let open = |name: &str| -> Result<RawLines<BufReader<File>>> {
        let p = dir.join(name);
        Ok(RawLines::new(BufReader::new(
            File::open(&p).map_err(|e| Error::io(&p, e))?,
        )))
    };
    let mut src = open(&manifest.files.src)?;
    let mut mt = open(&manifest.files.mt)?;
    let mut pe = open(&manifest.files.pe)?;
    let mut mt_tags = open(&manifest.files.mt_tags)?;
    let mut source_tags = open(&manifest.files.source_tags)?;
    let mut ter = open(&manifest.files.ter)?;

    let mut stats = CorpusStats {
        source_sentences: 0,
        mt_sentences: 0,
        pe_sentences: 0,
        source_tokens: 0,
        mt_tokens: 0,
        pe_tokens: 0,
        avg_tokens_per_source: 0.0,
        avg_tokens_per_mt: 0.0,
        avg_tokens_per_pe: 0.0,
        ter_mean: 0.0,
        ter_median: 0.0,
        ter_std: 0.0,
        ter_variance: 0.0,
        source_ok_tags: 0,
        source_bad_tags: 0,
        mt_ok_tags: 0,
        mt_bad_tags: 0,
    };
    let mut histogram = TerHistogram::default();
    let mut ters = Vec::with_capacity(manifest.records as usize);

    let mut line_no = 0u64;
    loop {
        line_no += 1;
        let row = (
            src.next(),
            mt.next(),
            pe.next(),
            mt_tags.next(),
            source_tags.next(),
            ter.next(),
        );
        let (s, m, p, mtt, stt, t) = match row {
            (None, None, None, None, None, None) => break,
            (Some(s), Some(m), Some(p), Some(mtt), Some(stt), Some(t)) => {
                (s?, m?, p?, mtt?, stt?, t?)
            }
            _ => return Err(Error::Invariant("dataset files have unequal line counts".into())),
        };
        let src_len = s.split_whitespace().count() as u64;
        let mt_len = m.split_whitespace().count() as u64;
        stats.source_sentences += 1;
        stats.mt_sentences += 1;
        stats.pe_sentences += 1;
        stats.source_tokens += src_len;
        stats.mt_tokens += mt_len;
        stats.pe_tokens += p.split_whitespace().count() as u64;

        let mut mt_ok = 0u64;
        let mut mt_bad = 0u64;
        for tag in mtt.split_whitespace() {
            match Tag::parse(tag).map_err(|e| Error::line(line_no, e.to_string()))? {
                Tag::Ok => mt_ok += 1,
                Tag::Bad => mt_bad += 1,
            }
        }
        if mt_ok + mt_bad != 2 * mt_len + 1 {
            return Err(Error::Invariant(format!(
                "record {line_no}: {} MT tags for {mt_len} MT tokens (expected {})",
                mt_ok + mt_bad,
                2 * mt_len + 1
            )));
        }
        let mut src_ok = 0u64;
        let mut src_bad = 0u64;
        for tag in stt.split_whitespace() {
            match Tag::parse(tag).map_err(|e| Error::line(line_no, e.to_string()))? {
                Tag::Ok => src_ok += 1,
                Tag::Bad => src_bad += 1,
            }
        }
        if src_ok + src_bad != src_len {
            return Err(Error::Invariant(format!(
                "record {line_no}: {} source tags for {src_len} source tokens",
                src_ok + src_bad
            )));
        }
        stats.mt_ok_tags += mt_ok;
        stats.mt_bad_tags += mt_bad;
        stats.source_ok_tags += src_ok;
        stats.source_bad_tags += src_bad;

        let ter_value: f64 = t
            .trim()
            .parse()
            .map_err(|_| Error::line(line_no, format!("bad TER value {t:?}")))?;
        histogram.add(ter_value);
        ters.push(ter_value);
    }

    let n = ters.len() as f64;
    stats.avg_tokens_per_source = stats.source_tokens as f64 / n;
    stats.avg_tokens_per_mt = stats.mt_tokens as f64 / n;
    stats.avg_tokens_per_pe = stats.pe_tokens as f64 / n;
    stats.ter_mean = kahan_sum(ters.iter().copied()) / n;
    let mean = stats.ter_mean;
    stats.ter_variance = kahan_sum(ters.iter().map(|t| (t - mean) * (t - mean))) / n;
    stats.ter_std = stats.ter_variance.sqrt();
    let mut sorted = ters;
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite TER values"));
    stats.ter_median = sorted[(sorted.len() - 1) / 2];

    Ok(Scan { stats, histogram })
}

/// Computes the statistics block for a dataset split directory.
pub fn corpus_stats(dir: &Path) -> Result<CorpusStats> {
    Ok(scan_dataset(dir)?.stats)
}

/// Computes the TER-range histogram for a dataset split directory.
pub fn ter_histogram(dir: &Path) -> Result<TerHistogram> {
    Ok(scan_dataset(dir)?.histogram)
}

/// Renders the human-readable report, mirroring the usual statistics table
/// rows.
pub fn render_stats_text(
    strategy: &str,
    ter_shifts: bool,
    stats: &CorpusStats,
    histogram: &TerHistogram,
) -> String {
    let mut out = String::new();
    out.push_str(&format!("Dataset statistics (strategy {strategy})\n"));
    out.push_str(&format!(
        "Conventions: TER shifts={}; std is population (/n); even-count median takes the lower middle value\n\n",
        if ter_shifts { "on" } else { "off" }
    ));
    let mut row = |name: &str, value: String| {
        out.push_str(&format!("{name:<36}{value}\n"));
    };
    row("# of Source Sentences", stats.source_sentences.to_string());
    row("# of MT Output", stats.mt_sentences.to_string());
    row("# of pseudo-PE", stats.pe_sentences.to_string());
    row("# of Source Tokens", stats.source_tokens.to_string());
    row("# of MT Output Tokens", stats.mt_tokens.to_string());
    row("# of pseudo-PE Tokens", stats.pe_tokens.to_string());
    row(
        "Average Token Per Source Sentence",
        format!("{:.2}", stats.avg_tokens_per_source),
    );
    row(
        "Average Token Per MT Output",
        format!("{:.2}", stats.avg_tokens_per_mt),
    );
    row(
        "Average Token Per pseudo-PE",
        format!("{:.2}", stats.avg_tokens_per_pe),
    );
    row("Mean TER", format!("{:.2}", stats.ter_mean));
    row("Median TER", format!("{:.2}", stats.ter_median));
    row("STD TER", format!("{:.2}", stats.ter_std));
    row("Variance TER", format!("{:.2}", stats.ter_variance));
    row("# Source OK tags", stats.source_ok_tags.to_string());
    row("# Source BAD tags", stats.source_bad_tags.to_string());
    row("# MT Output OK tags", stats.mt_ok_tags.to_string());
    row("# MT Output BAD tags", stats.mt_bad_tags.to_string());
    out.push_str("\nTER range histogram\n");
    for (label, count) in TER_BIN_LABELS.iter().zip(histogram.bins.iter()) {
        out.push_str(&format!("{label:<12}{count}\n"));
    }
    out.push_str(&format!("{TER_OVERFLOW_LABEL:<12}{}\n", histogram.overflow));
    out
}

/// Computes statistics and writes `stats.json` and `stats.txt` into the
/// dataset directory. Returns the computed block.
pub fn write_reports(dir: &Path) -> Result<(CorpusStats, TerHistogram)> {
    let manifest = DatasetManifest::read(dir)?;
    let scan = scan_dataset(dir)?;

    #[derive(Serialize)]
    struct JsonReport<'a> {
        #[serde(flatten)]
        stats: &'a CorpusStats,
        ter_histogram: &'a TerHistogram,
    }
    let json_path = dir.join("stats.json");
    let json = serde_json::to_string_pretty(&JsonReport {
        stats: &scan.stats,
        ter_histogram: &scan.histogram,
    })
    .expect("serializable stats");
    std::fs::write(&json_path, json + "\n").map_err(|e| Error::io(&json_path, e))?;

    let text_path = dir.join("stats.txt");
    let mut f = File::create(&text_path).map_err(|e| Error::io(&text_path, e))?;
    f.write_all(
        render_stats_text(
            &manifest.strategy,
            manifest.ter_shifts,
            &scan.stats,
            &scan.histogram,
        )
        .as_bytes(),
    )
    .map_err(|e| Error::io(&text_path, e))?;
    Ok((scan.stats, scan.histogram))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::ManifestFiles;

    /// Writes a minimal consistent dataset with the given per-record shape:
    /// (source tokens, mt tokens, pe tokens, ter, bad source, bad mt tokens).
    fn write_fixture(dir: &Path, records: &[(usize, usize, usize, f64, usize, usize)]) {
        let files = ManifestFiles::default();
        let mut src = String::new();
        let mut mt = String::new();
        let mut pe = String::new();
        let mut mt_tags = String::new();
        let mut source_tags = String::new();
        let mut aligns = String::new();
        let mut ter = String::new();
        for &(s, m, p, t, bad_src, bad_mt) in records {
            src.push_str(&(0..s).map(|i| format!("s{i}")).collect::<Vec<_>>().join(" "));
            src.push('\n');
            mt.push_str(&(0..m).map(|i| format!("m{i}")).collect::<Vec<_>>().join(" "));
            mt.push('\n');
            pe.push_str(&(0..p).map(|i| format!("p{i}")).collect::<Vec<_>>().join(" "));
            pe.push('\n');
            let mut tags = vec!["OK"; 2 * m + 1];
            for k in 0..bad_mt.min(m) {
                tags[2 * k + 1] = "BAD";
            }
            mt_tags.push_str(&tags.join(" "));
            mt_tags.push('\n');
            let mut stags = vec!["OK"; s];
            for item in stags.iter_mut().take(bad_src.min(s)) {
                *item = "BAD";
            }
            source_tags.push_str(&stags.join(" "));
            source_tags.push('\n');
            aligns.push('\n');
            ter.push_str(&format!("{t}\n"));
        }
        std::fs::write(dir.join(&files.src), src).unwrap();
        std::fs::write(dir.join(&files.mt), mt).unwrap();
        std::fs::write(dir.join(&files.pe), pe).unwrap();
        std::fs::write(dir.join(&files.mt_tags), mt_tags).unwrap();
        std::fs::write(dir.join(&files.source_tags), source_tags).unwrap();
        std::fs::write(dir.join(&files.alignments), aligns).unwrap();
        std::fs::write(dir.join(&files.ter), ter).unwrap();
        DatasetManifest {
            strategy: "P".into(),
            records: records.len() as u64,
            dropped: 0,
            ter_shifts: false,
            config_hash: "test".into(),
            tool_version: "0".into(),
            files,
        }
        .write(dir)
        .unwrap();
    }

    #[test]
    fn two_record_fixture_moments() {
        let tmp = tempfile::tempdir().unwrap();
        write_fixture(tmp.path(), &[(3, 4, 4, 0.0, 0, 0), (2, 2, 2, 0.5, 1, 1)]);
        let stats = corpus_stats(tmp.path()).unwrap();
        assert_eq!(stats.ter_mean, 0.25);
        assert_eq!(stats.ter_median, 0.0, "lower median for even counts");
        assert_eq!(stats.ter_variance, 0.0625);
        assert_eq!(stats.ter_std, 0.25);
        assert_eq!(stats.source_tokens, 5);
        assert_eq!(stats.mt_tokens, 6);
        assert_eq!(stats.source_ok_tags + stats.source_bad_tags, 5);
        assert_eq!(stats.mt_ok_tags + stats.mt_bad_tags, (2 * 4 + 1) + (2 * 2 + 1));
        assert_eq!(stats.source_bad_tags, 1);
        assert_eq!(stats.mt_bad_tags, 1);
    }

    #[test]
    fn identical_pairs_have_zero_moments() {
        let tmp = tempfile::tempdir().unwrap();
        write_fixture(tmp.path(), &[(2, 3, 3, 0.0, 0, 0); 5]);
        let stats = corpus_stats(tmp.path()).unwrap();
        assert_eq!(stats.ter_mean, 0.0);
        assert_eq!(stats.ter_median, 0.0);
        assert_eq!(stats.ter_std, 0.0);
        assert_eq!(stats.ter_variance, 0.0);
    }

    #[test]
    fn histogram_binning() {
        let mut h = TerHistogram::default();
        for t in [0.05, 0.15, 0.15] {
            h.add(t);
        }
        assert_eq!(h.bins[0], 1);
        assert_eq!(h.bins[1], 2);
        h.add(1.3);
        assert_eq!(h.overflow, 1);
        assert_eq!(h.total(), 4);

        let mut grid = TerHistogram::default();
        for k in 0..10 {
            grid.add(k as f64 / 10.0);
        }
        assert_eq!(grid.bins, [1; 10]);
        assert_eq!(grid.overflow, 0);
    }

    #[test]
    fn histogram_total_equals_record_count() {
        let tmp = tempfile::tempdir().unwrap();
        let records: Vec<_> = (0..37).map(|k| (2, 2, 2, k as f64 * 0.04, 0, 0)).collect();
        write_fixture(tmp.path(), &records);
        let hist = ter_histogram(tmp.path()).unwrap();
        assert_eq!(hist.total(), 37);
    }

    #[test]
    fn stats_are_permutation_invariant() {
        let tmp_a = tempfile::tempdir().unwrap();
        let tmp_b = tempfile::tempdir().unwrap();
        let records = [(3, 4, 4, 0.25, 1, 2), (2, 2, 2, 0.5, 0, 1), (5, 6, 5, 0.8, 2, 3)];
        let mut reversed = records;
        reversed.reverse();
        write_fixture(tmp_a.path(), &records);
        write_fixture(tmp_b.path(), &reversed);
        assert_eq!(
            corpus_stats(tmp_a.path()).unwrap(),
            corpus_stats(tmp_b.path()).unwrap()
        );
    }

    #[test]
    fn tag_law_violation_is_detected() {
        let tmp = tempfile::tempdir().unwrap();
        write_fixture(tmp.path(), &[(2, 2, 2, 0.0, 0, 0)]);
        // Corrupt the MT tag line: 4 tags for 2 tokens (needs 5).
        std::fs::write(tmp.path().join("mt_tags.txt"), "OK OK OK OK\n").unwrap();
        assert!(matches!(corpus_stats(tmp.path()), Err(Error::Invariant(_))));
    }

    #[test]
    fn empty_dataset_is_an_error() {
        let tmp = tempfile::tempdir().unwrap();
        let files = ManifestFiles::default();
        for name in files.all() {
            std::fs::write(tmp.path().join(name), "").unwrap();
        }
        DatasetManifest {
            strategy: "M".into(),
            records: 0,
            dropped: 0,
            ter_shifts: false,
            config_hash: "x".into(),
            tool_version: "0".into(),
            files,
        }
        .write(tmp.path())
        .unwrap();
        assert!(matches!(corpus_stats(tmp.path()), Err(Error::Config(_))));
    }

    #[test]
    fn report_rendering_is_stable() {
        let tmp = tempfile::tempdir().unwrap();
        write_fixture(tmp.path(), &[(3, 4, 4, 0.0, 0, 0), (2, 2, 2, 0.5, 1, 1)]);
        let (stats, hist) = write_reports(tmp.path()).unwrap();
        let text = std::fs::read_to_string(tmp.path().join("stats.txt")).unwrap();
        assert_eq!(text, render_stats_text("P", false, &stats, &hist));
        assert!(text.contains("Mean TER"));
        assert!(text.contains("0.25"));
        let json = std::fs::read_to_string(tmp.path().join("stats.json")).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed["ter_variance"], 0.0625);
        assert_eq!(
            parsed["mt_ok_tags"].as_u64().unwrap() + parsed["mt_bad_tags"].as_u64().unwrap(),
            14
        );
    }
}
