//! Acceptance suite: golden-example and property-based checks over the whole
//! crate, one test per criterion. Each prints a `[acceptance] ... PASS` line
//! (visible with `cargo test --test acceptance -- --nocapture`).

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qeforge_core::align::{train, viterbi_align, AlignerConfig};
use qeforge_core::backend::{BackendSpec, MockNoise};
use qeforge_core::edit::levenshtein_align;
use qeforge_core::eval::{evaluate_by_ter_range, mcc_files, pooled_confusion};
use qeforge_core::pipeline::{
    build_hybrid, build_monolingual, build_parallel, DatasetManifest, ManifestFiles,
    RoundTripSource,
};
use qeforge_core::stats::{corpus_stats, ter_histogram};
use qeforge_core::tags::{annotate_triple, Tag};
use qeforge_core::text::{TokenSequence, TokenizeMode};
use qeforge_core::{align::AlignmentSet, pipeline::BuildConfig};

fn seq(s: &str) -> TokenSequence {
    TokenSequence::parse(s, TokenizeMode::Whitespace)
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

/// Deterministic synthetic corpus lines.
fn synth_lines(seed: u64, count: usize, min_len: usize, max_len: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab: Vec<String> = (0..40)
        .map(|_| {
            let len = rng.gen_range(2..=6);
            (0..len).map(|_| rng.gen_range(b'a'..=b'z') as char).collect()
        })
        .collect();
    let mut out = String::new();
    for _ in 0..count {
        let len = rng.gen_range(min_len..=max_len);
        let line: Vec<&str> = (0..len)
            .map(|_| vocab[rng.gen_range(0..vocab.len())].as_str())
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Shared 1,000-record mock builds of the three strategies.
struct MockBuilds {
    _tmp: tempfile::TempDir,
    m_dir: PathBuf,
    p_dir: PathBuf,
    h_dir: PathBuf,
}

fn mock_builds() -> &'static MockBuilds {
    static CELL: OnceLock<MockBuilds> = OnceLock::new();
    CELL.get_or_init(|| {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path();
        let src_file = dir.join("fixture_src.txt");
        let tgt_file = dir.join("fixture_tgt.txt");
        std::fs::write(&src_file, synth_lines(11, 1000, 3, 12)).unwrap();
        std::fs::write(&tgt_file, synth_lines(22, 1000, 3, 14)).unwrap();
        let backend = BackendSpec::Mock {
            seed: 42,
            noise: MockNoise::default(),
        };
        let config = BuildConfig::default();
        let m_out = dir.join("m");
        let p_out = dir.join("p");
        let h_out = dir.join("h");
        build_monolingual(&tgt_file, &backend, &config, &m_out).unwrap();
        build_parallel(&src_file, &tgt_file, &backend, &config, &p_out).unwrap();
        build_hybrid(
            &src_file,
            &tgt_file,
            RoundTripSource::File(&m_out.join("train/mt.txt")),
            &config,
            &h_out,
        )
        .unwrap();
        MockBuilds {
            _tmp: tmp,
            m_dir: m_out.join("train"),
            p_dir: p_out.join("train"),
            h_dir: h_out.join("train"),
        }
    })
}

const WORKED_SOURCE: &str = "중국 당국이 부인하지 않는 것으로 볼 때 가능성이 높다 .";
const WORKED_MT: &str = "Given that the Chinese authorities do not deny it , it is highly likely .";
const WORKED_PE: &str = "Given that the Chinese authorities do not deny it , chances are high .";
const WORKED_ALIGNMENT: &str = "0-3 1-4 2-7 3-5 3-6 4-8 5-8 6-0 7-13 8-11 8-12 9-14";

#[test]
fn c1_golden_example_tags() {
    let start = Instant::now();
    let source = seq(WORKED_SOURCE);
    let mt = seq(WORKED_MT);
    let pe = seq(WORKED_PE);
    let alignment = AlignmentSet::parse(WORKED_ALIGNMENT).unwrap();

    let script = levenshtein_align(&mt, &pe);
    assert_eq!(script.edit_count(), 4, "edit count must be exactly 4");

    let tags = annotate_triple(&source, &mt, &pe, &alignment).unwrap();
    let expected_mt_tags = "OK OK OK OK OK OK OK OK OK OK OK OK OK OK OK OK OK OK OK OK OK \
                           BAD OK BAD OK BAD OK BAD OK OK OK";
    assert_eq!(tags.mt_tags.len(), 31);
    assert_eq!(tags.mt_tags.to_line(), expected_mt_tags, "MT tag row must match byte-exactly");
    assert_eq!(
        tags.source_tags.to_line(),
        "OK OK OK OK OK OK OK BAD BAD OK",
        "source tag row must match byte-exactly"
    );
    // BAD lands exactly on tokens 11..14 (1-based): it, is, highly, likely.
    for k in 0..15 {
        let expected = if (10..=13).contains(&k) { Tag::Bad } else { Tag::Ok };
        assert_eq!(tags.mt_tags.token_tag(k), expected);
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}, budget 1s");
    println!("[acceptance] c1 golden example tags: PASS ({elapsed:?})");
}

/// Exhaustive recursion with memoization, written independently of the
/// production DP.
fn oracle_cost(mt: &[String], pe: &[String]) -> usize {
    fn go<'a>(
        mt: &'a [String],
        pe: &'a [String],
        memo: &mut HashMap<(usize, usize), usize>,
    ) -> usize {
        let key = (mt.len(), pe.len());
        if let Some(&v) = memo.get(&key) {
            return v;
        }
        let result = match (mt.split_first(), pe.split_first()) {
            (None, None) => 0,
            (Some(_), None) => mt.len(),
            (None, Some(_)) => pe.len(),
            (Some((m0, m_rest)), Some((p0, p_rest))) => {
                let mut best = usize::MAX;
                if m0 == p0 {
                    best = best.min(go(m_rest, p_rest, memo));
                } else {
                    best = best.min(1 + go(m_rest, p_rest, memo));
                }
                best = best.min(1 + go(m_rest, pe, memo));
                best.min(1 + go(mt, p_rest, memo))
            }
        };
        memo.insert(key, result);
        result
    }
    // Memo keyed on suffix lengths; fresh per pair.
    go(mt, pe, &mut HashMap::new())
}

#[test]
fn c2_edit_distance_matches_bruteforce_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let vocab = ["v", "w", "x", "y", "z"];
    let mut checked = 0u32;
    for _ in 0..10_000 {
        let draw = |rng: &mut ChaCha8Rng| -> Vec<String> {
            let len = rng.gen_range(0..=8);
            (0..len).map(|_| vocab[rng.gen_range(0..5)].to_string()).collect()
        };
        let mt_tokens = draw(&mut rng);
        let pe_tokens = draw(&mut rng);
        let mt = TokenSequence::new(mt_tokens.clone()).unwrap();
        let pe = TokenSequence::new(pe_tokens.clone()).unwrap();
        let script = levenshtein_align(&mt, &pe);
        let expected = oracle_cost(&mt_tokens, &pe_tokens);
        assert_eq!(
            script.edit_count(),
            expected,
            "cost mismatch on {mt_tokens:?} vs {pe_tokens:?}"
        );
        script.validate().unwrap();
        checked += 1;
    }
    let elapsed = start.elapsed();
    assert_eq!(checked, 10_000);
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}, budget 60s");
    println!("[acceptance] c2 edit distance vs brute-force oracle on 10000 pairs: PASS ({elapsed:?})");
}

fn check_tag_laws(dir: &Path) {
    let manifest = DatasetManifest::read(dir).unwrap();
    manifest.validate_files(dir).unwrap();
    let mt = read(dir, "mt.txt");
    let src = read(dir, "src.txt");
    let mt_tags = read(dir, "mt_tags.txt");
    let source_tags = read(dir, "source_tags.txt");
    let mut records = 0u64;
    for (((m, s), mtt), stt) in mt
        .lines()
        .zip(src.lines())
        .zip(mt_tags.lines())
        .zip(source_tags.lines())
    {
        let n = m.split_whitespace().count();
        assert_eq!(
            mtt.split_whitespace().count(),
            2 * n + 1,
            "2N+1 law violated in {}",
            dir.display()
        );
        assert_eq!(
            stt.split_whitespace().count(),
            s.split_whitespace().count(),
            "source tag length law violated in {}",
            dir.display()
        );
        records += 1;
    }
    assert_eq!(records, manifest.records);
}

#[test]
fn c3_tag_laws_on_mock_builds() {
    let start = Instant::now();
    let builds = mock_builds();
    for dir in [&builds.m_dir, &builds.p_dir, &builds.h_dir] {
        let manifest = DatasetManifest::read(dir).unwrap();
        assert_eq!(manifest.records, 1000);
        check_tag_laws(dir);
    }

    // Identity records: a zero-noise round-trip build is all-OK everywhere.
    let tmp = tempfile::tempdir().unwrap();
    let mono = tmp.path().join("mono.txt");
    std::fs::write(&mono, synth_lines(33, 100, 3, 10)).unwrap();
    let backend = BackendSpec::Mock {
        seed: 0,
        noise: MockNoise::NONE,
    };
    let out = tmp.path().join("ident");
    build_monolingual(&mono, &backend, &BuildConfig::default(), &out).unwrap();
    let dir = out.join("train");
    check_tag_laws(&dir);
    assert!(!read(&dir, "mt_tags.txt").contains("BAD"));
    assert!(!read(&dir, "source_tags.txt").contains("BAD"));
    for ter in read(&dir, "ter.txt").lines() {
        assert_eq!(ter, "0");
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}, budget 2min");
    println!("[acceptance] c3 tag laws on 1000-record M/P/H mock builds: PASS ({elapsed:?})");
}

#[test]
fn c4_strategy_column_consistency() {
    let builds = mock_builds();
    assert_eq!(
        read(&builds.p_dir, "src.txt"),
        read(&builds.h_dir, "src.txt"),
        "P and H must share src.txt byte-exactly"
    );
    assert_eq!(
        read(&builds.p_dir, "pe.txt"),
        read(&builds.h_dir, "pe.txt"),
        "P and H must share pe.txt byte-exactly"
    );
    assert_eq!(
        read(&builds.m_dir, "mt.txt"),
        read(&builds.h_dir, "mt.txt"),
        "H's mt.txt must equal M's mt.txt byte-exactly"
    );
    println!("[acceptance] c4 strategy column consistency across shared fixtures: PASS");
}

/// Dense IBM Model 1 EM with a NULL word, run by hand as an oracle.
fn ibm1_viterbi(
    pairs: &[(Vec<&str>, Vec<&str>)],
    iterations: usize,
    null_prob: f64,
    query: (&[&str], &[&str]),
) -> Vec<(u32, u32)> {
    use std::collections::BTreeMap;
    let mut t: BTreeMap<(String, String), f64> = BTreeMap::new();
    let mut tgt_vocab: Vec<&str> = pairs.iter().flat_map(|(_, t)| t.iter().copied()).collect();
    tgt_vocab.sort_unstable();
    tgt_vocab.dedup();
    let uniform = 1.0 / tgt_vocab.len() as f64;
    let lookup = |t: &BTreeMap<(String, String), f64>, s: &str, f: &str, uniform: f64| {
        t.get(&(s.to_string(), f.to_string())).copied().unwrap_or(uniform)
    };
    for iter in 0..iterations {
        let mut counts: BTreeMap<(String, String), f64> = BTreeMap::new();
        for (src, tgt) in pairs {
            for f in tgt {
                let mut z = null_prob * lookup(&t, "<NULL>", f, if iter == 0 { uniform } else { 0.0 });
                let w = (1.0 - null_prob) / src.len() as f64;
                for e in src {
                    z += w * lookup(&t, e, f, if iter == 0 { uniform } else { 0.0 });
                }
                let gamma_null =
                    null_prob * lookup(&t, "<NULL>", f, if iter == 0 { uniform } else { 0.0 }) / z;
                *counts.entry(("<NULL>".to_string(), f.to_string())).or_default() += gamma_null;
                for e in src {
                    let gamma =
                        w * lookup(&t, e, f, if iter == 0 { uniform } else { 0.0 }) / z;
                    *counts.entry((e.to_string(), f.to_string())).or_default() += gamma;
                }
            }
        }
        let mut row_sums: BTreeMap<String, f64> = BTreeMap::new();
        for ((e, _), c) in &counts {
            *row_sums.entry(e.clone()).or_default() += c;
        }
        t = counts
            .into_iter()
            .map(|((e, f), c)| {
                let sum = row_sums[&e];
                ((e, f), c / sum)
            })
            .collect();
    }
    let (src, tgt) = query;
    let mut links = Vec::new();
    for (j, f) in tgt.iter().enumerate() {
        let mut best = null_prob * lookup(&t, "<NULL>", f, 0.0);
        let mut arg = None;
        let w = (1.0 - null_prob) / src.len() as f64;
        for (i, e) in src.iter().enumerate() {
            let score = w * lookup(&t, e, f, 0.0);
            if score > best {
                best = score;
                arg = Some(i);
            }
        }
        if let Some(i) = arg {
            links.push((i as u32, j as u32));
        }
    }
    links
}

#[test]
fn c5_aligner_em_properties() {
    // 1,000-pair toy corpus: log-likelihood non-decreasing, rows stochastic.
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let vocab: Vec<(String, String)> = (0..30)
        .map(|k| (format!("s{k}"), format!("t{k}")))
        .collect();
    let corpus: Vec<(TokenSequence, TokenSequence)> = (0..1000)
        .map(|_| {
            let len = rng.gen_range(1..=7);
            let mut src = Vec::with_capacity(len);
            let mut tgt = Vec::with_capacity(len);
            for _ in 0..len {
                let (s, t) = &vocab[rng.gen_range(0..vocab.len())];
                src.push(s.clone());
                tgt.push(t.clone());
            }
            (
                TokenSequence::new(src).unwrap(),
                TokenSequence::new(tgt).unwrap(),
            )
        })
        .collect();
    let outcome = train(&corpus, &AlignerConfig::default()).unwrap();
    assert_eq!(outcome.log_likelihoods.len(), 5);
    for w in outcome.log_likelihoods.windows(2) {
        assert!(
            w[1] >= w[0] - 1e-6,
            "log-likelihood decreased: {} -> {}",
            w[0],
            w[1]
        );
    }
    assert!(
        outcome.table.rows_are_stochastic(1e-9),
        "translation-table rows must sum to 1 within 1e-9"
    );

    // Toy example 1: a single repeated pair concentrates the mass.
    let single: Vec<_> = std::iter::repeat_n((seq("a"), seq("b")), 100).collect();
    let single_out = train(&single, &AlignerConfig::default()).unwrap();
    assert!(single_out.table.prob("a", "b") >= 0.99);
    let links = viterbi_align(&single_out.table, &seq("a"), &seq("b"));
    assert_eq!(links.to_pharaoh(), "0-0");

    // Toy example 2: the disambiguating corpus aligns the diagonal, agreeing
    // with a hand-run IBM Model 1 oracle.
    let toy = vec![
        (seq("a b"), seq("x y")),
        (seq("a"), seq("x")),
        (seq("b"), seq("y")),
    ];
    let toy_out = train(&toy, &AlignerConfig::default()).unwrap();
    let links = viterbi_align(&toy_out.table, &seq("a b"), &seq("x y"));
    assert_eq!(links.to_pharaoh(), "0-0 1-1");
    let oracle_pairs = vec![
        (vec!["a", "b"], vec!["x", "y"]),
        (vec!["a"], vec!["x"]),
        (vec!["b"], vec!["y"]),
    ];
    let oracle_links = ibm1_viterbi(&oracle_pairs, 2, 0.08, (&["a", "b"], &["x", "y"]));
    assert_eq!(oracle_links, vec![(0, 0), (1, 1)], "IBM1 oracle agrees");

    // Toy example 3: NULL outscores unseen vocabulary, leaving the token
    // unlinked.
    let null_case = train(&vec![(seq("a"), seq("x"))], &AlignerConfig::default()).unwrap();
    let links = viterbi_align(&null_case.table, &seq("zz"), &seq("x"));
    assert!(links.is_empty(), "NULL must win over floored unseen tokens");

    println!("[acceptance] c5 aligner EM properties on a 1000-pair corpus: PASS");
}

#[test]
fn c6_mcc_correctness() {
    let tmp = tempfile::tempdir().unwrap();
    let pred_path = tmp.path().join("pred.txt");
    let gold_path = tmp.path().join("gold.txt");
    let mut rng = ChaCha8Rng::seed_from_u64(99);

    for _ in 0..1000 {
        let lines = rng.gen_range(1..=4);
        let mut pred = String::new();
        let mut gold = String::new();
        let (mut tp, mut fp, mut tn, mut fn_) = (0u64, 0u64, 0u64, 0u64);
        for _ in 0..lines {
            let len = rng.gen_range(1..=12);
            let mut p_line = Vec::with_capacity(len);
            let mut g_line = Vec::with_capacity(len);
            for _ in 0..len {
                let p = rng.gen_bool(0.3);
                let g = rng.gen_bool(0.3);
                match (p, g) {
                    (true, true) => tp += 1,
                    (true, false) => fp += 1,
                    (false, false) => tn += 1,
                    (false, true) => fn_ += 1,
                }
                p_line.push(if p { "BAD" } else { "OK" });
                g_line.push(if g { "BAD" } else { "OK" });
            }
            pred.push_str(&p_line.join(" "));
            pred.push('\n');
            gold.push_str(&g_line.join(" "));
            gold.push('\n');
        }
        std::fs::write(&pred_path, &pred).unwrap();
        std::fs::write(&gold_path, &gold).unwrap();
        let got = mcc_files(&pred_path, &gold_path).unwrap();
        // Direct confusion-count arithmetic, computed independently.
        let factors = [
            (tp + fp) as f64,
            (tp + fn_) as f64,
            (tn + fp) as f64,
            (tn + fn_) as f64,
        ];
        let expected = if factors.contains(&0.0) {
            0.0
        } else {
            ((tp * tn) as f64 - (fp * fn_) as f64)
                / factors.iter().product::<f64>().sqrt()
        };
        assert!(
            (got - expected).abs() <= 1e-12,
            "pooled MCC {got} vs direct arithmetic {expected}"
        );
    }

    // Perfect, inverted, single-class.
    std::fs::write(&gold_path, "OK BAD OK\nBAD OK\n").unwrap();
    std::fs::write(&pred_path, "OK BAD OK\nBAD OK\n").unwrap();
    assert_eq!(mcc_files(&pred_path, &gold_path).unwrap(), 1.0);
    std::fs::write(&pred_path, "BAD OK BAD\nOK BAD\n").unwrap();
    assert_eq!(mcc_files(&pred_path, &gold_path).unwrap(), -1.0);
    std::fs::write(&gold_path, "OK OK OK\n").unwrap();
    std::fs::write(&pred_path, "OK OK OK\n").unwrap();
    assert_eq!(mcc_files(&pred_path, &gold_path).unwrap(), 0.0);

    // Two-bin fixture: tp=2 tn=3 fp=1 fn=1 in each bin -> 5/12 = 0.4167.
    let ter_path = tmp.path().join("ter.txt");
    std::fs::write(&gold_path, "BAD BAD BAD OK OK OK OK\nBAD BAD BAD OK OK OK OK\n").unwrap();
    std::fs::write(&pred_path, "BAD BAD OK BAD OK OK OK\nBAD BAD OK BAD OK OK OK\n").unwrap();
    std::fs::write(&ter_path, "0.15\n0.35\n").unwrap();
    let bins = evaluate_by_ter_range(&pred_path, &gold_path, &ter_path).unwrap();
    for bin_idx in [1, 3] {
        let mcc = bins[bin_idx].mcc.expect("bin populated");
        assert!(
            (mcc - 0.4167).abs() <= 1e-4,
            "bin {bin_idx} MCC {mcc} != 0.4167 ± 1e-4"
        );
    }
    // Cross-check the pooled counts behind the fixture.
    let pooled = pooled_confusion(&pred_path, &gold_path).unwrap();
    assert_eq!(
        (pooled.true_pos, pooled.true_neg, pooled.false_pos, pooled.false_neg),
        (4, 6, 2, 2)
    );
    println!("[acceptance] c6 MCC vs direct arithmetic on 1000 random tag files: PASS");
}

#[test]
fn c7_statistics_correctness() {
    // Constructed fixture with TERs {0.0, 0.5}.
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let files = ManifestFiles::default();
    std::fs::write(dir.join(&files.src), "s0 s1\ns0\n").unwrap();
    std::fs::write(dir.join(&files.mt), "m0 m1\nm0 m1\n").unwrap();
    std::fs::write(dir.join(&files.pe), "m0 m1\np0 p1\n").unwrap();
    std::fs::write(dir.join(&files.mt_tags), "OK OK OK OK OK\nOK BAD OK OK OK\n").unwrap();
    std::fs::write(dir.join(&files.source_tags), "OK OK\nBAD\n").unwrap();
    std::fs::write(dir.join(&files.alignments), "0-0 1-1\n0-0\n").unwrap();
    std::fs::write(dir.join(&files.ter), "0\n0.5\n").unwrap();
    DatasetManifest {
        strategy: "P".into(),
        records: 2,
        dropped: 0,
        ter_shifts: false,
        config_hash: "fixture".into(),
        tool_version: "0".into(),
        files,
    }
    .write(dir)
    .unwrap();
    let stats = corpus_stats(dir).unwrap();
    assert_eq!(stats.ter_mean, 0.25, "mean must be exactly 0.25");
    assert_eq!(stats.ter_variance, 0.0625, "variance must be exactly 0.0625");

    // Histogram totals and the tag-count law on every criterion-3 build.
    let builds = mock_builds();
    for dir in [&builds.m_dir, &builds.p_dir, &builds.h_dir] {
        let manifest = DatasetManifest::read(dir).unwrap();
        let hist = ter_histogram(dir).unwrap();
        assert_eq!(hist.total(), manifest.records, "histogram total != record count");
        let stats = corpus_stats(dir).unwrap();
        let expected_mt_tags: u64 = read(dir, "mt.txt")
            .lines()
            .map(|l| 2 * l.split_whitespace().count() as u64 + 1)
            .sum();
        assert_eq!(
            stats.mt_ok_tags + stats.mt_bad_tags,
            expected_mt_tags,
            "mtOK+mtBAD must equal the sum of 2N+1"
        );
    }
    println!("[acceptance] c7 statistics exactness and tag-count law: PASS");
}

#[test]
fn c8_build_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let mono = tmp.path().join("mono.txt");
    std::fs::write(&mono, synth_lines(55, 200, 3, 12)).unwrap();
    let backend = BackendSpec::Mock {
        seed: 42,
        noise: MockNoise::default(),
    };
    let config = BuildConfig::default();
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    let ma = build_monolingual(&mono, &backend, &config, &out_a).unwrap();
    let mb = build_monolingual(&mono, &backend, &config, &out_b).unwrap();
    assert_eq!(ma.config_hash, mb.config_hash, "manifest hashes must be equal");
    let mut names: Vec<String> = ManifestFiles::default()
        .all()
        .iter()
        .map(|s| s.to_string())
        .collect();
    names.push("manifest.json".into());
    for name in names {
        let a = std::fs::read(out_a.join("train").join(&name)).unwrap();
        let b = std::fs::read(out_b.join("train").join(&name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
    println!("[acceptance] c8 rebuild determinism (byte-identical directories): PASS");
}
