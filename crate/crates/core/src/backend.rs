//! Pluggable machine-translation providers.
//!
//! Three backends implement [`TranslationBackend`]: a deterministic noise
//! `mock` for tests and offline builds, a `file` backend serving precomputed
//! translations keyed by line number (TSV `lineNo<TAB>translation`, 1-based),
//! and an `http` backend speaking a minimal JSON contract
//! (`{"direction": "ko-en", "lines": [...]}` in,
//! `{"lines": [...]}` out) so any MT service can be bridged with a thin
//! adapter.
//!
//! [`translate_file`] drives whole-corpus translation in order-preserving
//! batches with periodic checkpoints, so multi-million-line runs survive
//! backend failures and resume where they stopped.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::text::RawLines;

/// Environment variable providing the default HTTP endpoint.
pub const ENDPOINT_ENV: &str = "QEFORGE_MT_ENDPOINT";
/// Default environment variable holding the HTTP auth token.
pub const TOKEN_ENV: &str = "QEFORGE_MT_TOKEN";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguagePair {
    pub source: String,
    pub target: String,
}

impl Default for LanguagePair {
    fn default() -> Self {
        LanguagePair {
            source: "ko".into(),
            target: "en".into(),
        }
    }
}

impl std::str::FromStr for LanguagePair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once('-') {
            Some((a, b)) if !a.is_empty() && !b.is_empty() => Ok(LanguagePair {
                source: a.into(),
                target: b.into(),
            }),
            _ => Err(Error::Config(format!(
                "language pair must look like \"ko-en\", got {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirectionKind {
    SrcToTgt,
    TgtToSrc,
}

/// A translation direction over a configurable language pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Direction {
    pub pair: LanguagePair,
    pub kind: DirectionKind,
}

impl Direction {
    pub fn src_to_tgt(pair: LanguagePair) -> Self {
        Direction {
            pair,
            kind: DirectionKind::SrcToTgt,
        }
    }

    pub fn tgt_to_src(pair: LanguagePair) -> Self {
        Direction {
            pair,
            kind: DirectionKind::TgtToSrc,
        }
    }

    pub fn reversed(&self) -> Direction {
        Direction {
            pair: self.pair.clone(),
            kind: match self.kind {
                DirectionKind::SrcToTgt => DirectionKind::TgtToSrc,
                DirectionKind::TgtToSrc => DirectionKind::SrcToTgt,
            },
        }
    }

    /// Wire label, e.g. "ko-en" for source→target of the ko-en pair.
    pub fn label(&self) -> String {
        match self.kind {
            DirectionKind::SrcToTgt => format!("{}-{}", self.pair.source, self.pair.target),
            DirectionKind::TgtToSrc => format!("{}-{}", self.pair.target, self.pair.source),
        }
    }
}

/// Provider of batched translations. `first_line` is the 1-based line number
/// of `lines[0]` in the corpus being translated; backends that do not key by
/// position ignore it.
pub trait TranslationBackend: Send + Sync {
    fn translate_batch(
        &self,
        lines: &[String],
        direction: &Direction,
        first_line: u64,
    ) -> Result<Vec<String>>;

    fn name(&self) -> &'static str;
}

/// Noise probabilities of the mock backend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MockNoise {
    pub drop_p: f64,
    pub swap_p: f64,
    pub substitute_p: f64,
}

impl Default for MockNoise {
    fn default() -> Self {
        MockNoise {
            drop_p: 0.1,
            swap_p: 0.05,
            substitute_p: 0.1,
        }
    }
}

impl MockNoise {
    pub const NONE: MockNoise = MockNoise {
        drop_p: 0.0,
        swap_p: 0.0,
        substitute_p: 0.0,
    };
}

/// Deterministic pseudo-translator: token dropout, adjacent swaps, and
/// substitutions from a seeded synthetic vocabulary.
///
/// The transform of a line is a pure function of (seed, direction, line) —
/// the per-line RNG is seeded from a hash of all three — so outputs do not
/// depend on batching, retries, or call order. Output tokens are joined with
/// single spaces.
pub struct MockBackend {
    seed: u64,
    noise: MockNoise,
    vocab: Vec<String>,
}

impl MockBackend {
    pub fn new(seed: u64, noise: MockNoise) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c0de_u64);
        let vocab = (0..256)
            .map(|_| {
                let len = rng.gen_range(3..=7);
                (0..len).map(|_| rng.gen_range(b'a'..=b'z') as char).collect()
            })
            .collect();
        MockBackend { seed, noise, vocab }
    }

    fn line_rng(&self, line: &str, direction: &Direction) -> ChaCha8Rng {
        let mut hasher = Sha256::new();
        hasher.update(self.seed.to_le_bytes());
        hasher.update(direction.label().as_bytes());
        hasher.update([0x1f]);
        hasher.update(line.as_bytes());
        ChaCha8Rng::from_seed(hasher.finalize().into())
    }

    fn transform(&self, line: &str, direction: &Direction) -> String {
        let mut rng = self.line_rng(line, direction);
        let mut tokens: Vec<&str> = Vec::new();
        for tok in line.split_whitespace() {
            if rng.gen::<f64>() >= self.noise.drop_p {
                tokens.push(tok);
            }
        }
        let mut i = 0;
        while i + 1 < tokens.len() {
            if rng.gen::<f64>() < self.noise.swap_p {
                tokens.swap(i, i + 1);
                i += 2;
            } else {
                i += 1;
            }
        }
        let mut out: Vec<&str> = tokens;
        for tok in &mut out {
            if rng.gen::<f64>() < self.noise.substitute_p {
                *tok = &self.vocab[rng.gen_range(0..self.vocab.len())];
            }
        }
        out.join(" ")
    }
}

impl TranslationBackend for MockBackend {
    fn translate_batch(
        &self,
        lines: &[String],
        direction: &Direction,
        _first_line: u64,
    ) -> Result<Vec<String>> {
        Ok(lines.iter().map(|l| self.transform(l, direction)).collect())
    }

    fn name(&self) -> &'static str {
        "mock"
    }
}

/// Serves translations from per-direction lookup tables loaded from TSV
/// files (`lineNo<TAB>translation`, 1-based line numbers).
pub struct FileBackend {
    tables: HashMap<DirectionKind, HashMap<u64, String>>,
}

impl FileBackend {
    pub fn new(
        src_to_tgt: Option<&Path>,
        tgt_to_src: Option<&Path>,
    ) -> Result<Self> {
        let mut tables = HashMap::new();
        if let Some(p) = src_to_tgt {
            tables.insert(DirectionKind::SrcToTgt, Self::load(p)?);
        }
        if let Some(p) = tgt_to_src {
            tables.insert(DirectionKind::TgtToSrc, Self::load(p)?);
        }
        if tables.is_empty() {
            return Err(Error::Config(
                "file backend needs at least one translation table".into(),
            ));
        }
        Ok(FileBackend { tables })
    }

    fn load(path: &Path) -> Result<HashMap<u64, String>> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut table = HashMap::new();
        for (idx, line) in RawLines::new(BufReader::new(file)).enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let (no, text) = line
                .split_once('\t')
                .ok_or_else(|| Error::format(path, format!("missing tab at line {}", idx + 1)))?;
            let no: u64 = no
                .parse()
                .map_err(|_| Error::format(path, format!("bad line number at line {}", idx + 1)))?;
            table.insert(no, text.to_string());
        }
        Ok(table)
    }
}

impl TranslationBackend for FileBackend {
    fn translate_batch(
        &self,
        lines: &[String],
        direction: &Direction,
        first_line: u64,
    ) -> Result<Vec<String>> {
        let table = self.tables.get(&direction.kind).ok_or_else(|| {
            Error::Config(format!(
                "file backend has no table for direction {}",
                direction.label()
            ))
        })?;
        let mut out = Vec::with_capacity(lines.len());
        for k in 0..lines.len() as u64 {
            let line_no = first_line + k;
            match table.get(&line_no) {
                Some(t) => out.push(t.clone()),
                None => {
                    return Err(Error::line(line_no, "no precomputed translation".to_string()))
                }
            }
        }
        Ok(out)
    }

    fn name(&self) -> &'static str {
        "file"
    }
}

#[cfg(feature = "http")]
mod http {
    use super::*;
    use std::time::Duration;

    #[derive(Serialize)]
    struct WireRequest<'a> {
        direction: String,
        lines: &'a [String],
    }

    #[derive(Deserialize)]
    struct WireResponse {
        lines: Vec<String>,
    }

    /// Bridges an MT service speaking the JSON batch contract. Transport
    /// failures and 5xx responses are retried with exponential backoff.
    pub struct HttpBackend {
        agent: ureq::Agent,
        endpoint: String,
        auth_header: String,
        token: Option<String>,
        retries: u32,
    }

    impl HttpBackend {
        pub fn new(
            endpoint: Option<&str>,
            auth_header: &str,
            token_env: &str,
            timeout_secs: u64,
            retries: u32,
        ) -> Result<Self> {
            let endpoint = match endpoint {
                Some(e) => e.to_string(),
                None => std::env::var(ENDPOINT_ENV).map_err(|_| {
                    Error::Config(format!(
                        "http backend needs an endpoint (flag or {ENDPOINT_ENV})"
                    ))
                })?,
            };
            let agent: ureq::Agent = ureq::Agent::config_builder()
                .timeout_global(Some(Duration::from_secs(timeout_secs)))
                .http_status_as_error(false)
                .build()
                .into();
            Ok(HttpBackend {
                agent,
                endpoint,
                auth_header: auth_header.to_string(),
                token: std::env::var(token_env).ok(),
                retries,
            })
        }

        fn attempt(&self, body: &str) -> std::result::Result<(u16, String), String> {
            let mut req = self
                .agent
                .post(&self.endpoint)
                .header("content-type", "application/json");
            if let Some(token) = &self.token {
                req = req.header(&self.auth_header, token);
            }
            let mut resp = req.send(body).map_err(|e| e.to_string())?;
            let status = resp.status().as_u16();
            let text = resp
                .body_mut()
                .read_to_string()
                .map_err(|e| e.to_string())?;
            Ok((status, text))
        }
    }

    impl TranslationBackend for HttpBackend {
        fn translate_batch(
            &self,
            lines: &[String],
            direction: &Direction,
            _first_line: u64,
        ) -> Result<Vec<String>> {
            let body = serde_json::to_string(&WireRequest {
                direction: direction.label(),
                lines,
            })
            .expect("serializable request");
            let mut last_failure = String::new();
            for attempt in 0..=self.retries {
                if attempt > 0 {
                    let backoff = Duration::from_millis(250 << (attempt - 1).min(5));
                    std::thread::sleep(backoff);
                }
                match self.attempt(&body) {
                    Err(e) => last_failure = e,
                    Ok((status, text)) if (200..300).contains(&status) => {
                        let parsed: WireResponse = serde_json::from_str(&text).map_err(|e| {
                            Error::Backend(format!("unparseable response: {e}"))
                        })?;
                        if parsed.lines.len() != lines.len() {
                            return Err(Error::Backend(format!(
                                "response has {} lines for a {}-line batch",
                                parsed.lines.len(),
                                lines.len()
                            )));
                        }
                        return Ok(parsed.lines);
                    }
                    Ok((status, _)) if status >= 500 => {
                        last_failure = format!("server returned {status}");
                    }
                    Ok((status, text)) => {
                        return Err(Error::Backend(format!(
                            "server returned {status}: {}",
                            text.chars().take(200).collect::<String>()
                        )));
                    }
                }
            }
            Err(Error::Backend(format!(
                "{} failed after {} attempts: {last_failure}",
                self.endpoint,
                self.retries + 1
            )))
        }

        fn name(&self) -> &'static str {
            "http"
        }
    }
}

#[cfg(feature = "http")]
pub use http::HttpBackend;

/// Declarative backend choice, parseable from a compact CLI string:
/// `mock:seed=42,drop=0.1`, `file:src2tgt=a.tsv,tgt2src=b.tsv`,
/// `http:endpoint=https://…,batch=64,timeout=30,retries=3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BackendSpec {
    Mock {
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        noise: MockNoise,
    },
    File {
        #[serde(default)]
        src_to_tgt: Option<PathBuf>,
        #[serde(default)]
        tgt_to_src: Option<PathBuf>,
    },
    Http {
        #[serde(default)]
        endpoint: Option<String>,
        #[serde(default = "default_auth_header")]
        auth_header: String,
        #[serde(default = "default_token_env")]
        token_env: String,
        #[serde(default = "default_timeout")]
        timeout_secs: u64,
        #[serde(default = "default_retries")]
        retries: u32,
    },
}

fn default_auth_header() -> String {
    "Authorization".into()
}

fn default_token_env() -> String {
    TOKEN_ENV.into()
}

fn default_timeout() -> u64 {
    30
}

fn default_retries() -> u32 {
    3
}

impl BackendSpec {
    pub fn build(&self) -> Result<Box<dyn TranslationBackend>> {
        match self {
            BackendSpec::Mock { seed, noise } => Ok(Box::new(MockBackend::new(*seed, *noise))),
            BackendSpec::File {
                src_to_tgt,
                tgt_to_src,
            } => Ok(Box::new(FileBackend::new(
                src_to_tgt.as_deref(),
                tgt_to_src.as_deref(),
            )?)),
            #[cfg(feature = "http")]
            BackendSpec::Http {
                endpoint,
                auth_header,
                token_env,
                timeout_secs,
                retries,
            } => Ok(Box::new(HttpBackend::new(
                endpoint.as_deref(),
                auth_header,
                token_env,
                *timeout_secs,
                *retries,
            )?)),
            #[cfg(not(feature = "http"))]
            BackendSpec::Http { .. } => Err(Error::Config(
                "this build has no http backend support".into(),
            )),
        }
    }
}

impl std::str::FromStr for BackendSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, params) = match s.split_once(':') {
            Some((k, p)) => (k, p),
            None => (s, ""),
        };
        let mut map = HashMap::new();
        for kv in params.split(',').filter(|kv| !kv.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("backend parameter {kv:?} is not k=v")))?;
            map.insert(k, v);
        }
        let parse_f64 = |map: &HashMap<&str, &str>, key: &str, default: f64| -> Result<f64> {
            map.get(key)
                .map(|v| {
                    v.parse()
                        .map_err(|_| Error::Config(format!("bad {key}={v}")))
                })
                .unwrap_or(Ok(default))
        };
        match kind {
            "mock" => {
                let seed = map
                    .get("seed")
                    .map(|v| v.parse().map_err(|_| Error::Config(format!("bad seed={v}"))))
                    .unwrap_or(Ok(0))?;
                let defaults = MockNoise::default();
                Ok(BackendSpec::Mock {
                    seed,
                    noise: MockNoise {
                        drop_p: parse_f64(&map, "drop", defaults.drop_p)?,
                        swap_p: parse_f64(&map, "swap", defaults.swap_p)?,
                        substitute_p: parse_f64(&map, "sub", defaults.substitute_p)?,
                    },
                })
            }
            "file" => Ok(BackendSpec::File {
                src_to_tgt: map.get("src2tgt").map(PathBuf::from),
                tgt_to_src: map.get("tgt2src").map(PathBuf::from),
            }),
            "http" => Ok(BackendSpec::Http {
                endpoint: map.get("endpoint").map(|s| s.to_string()),
                auth_header: map
                    .get("auth-header")
                    .map(|s| s.to_string())
                    .unwrap_or_else(default_auth_header),
                token_env: map
                    .get("token-env")
                    .map(|s| s.to_string())
                    .unwrap_or_else(default_token_env),
                timeout_secs: map
                    .get("timeout")
                    .map(|v| v.parse().map_err(|_| Error::Config(format!("bad timeout={v}"))))
                    .unwrap_or(Ok(default_timeout()))?,
                retries: map
                    .get("retries")
                    .map(|v| v.parse().map_err(|_| Error::Config(format!("bad retries={v}"))))
                    .unwrap_or(Ok(default_retries()))?,
            }),
            other => Err(Error::Config(format!("unknown backend kind {other:?}"))),
        }
    }
}

/// Options for [`translate_file`].
#[derive(Debug, Clone)]
pub struct TranslateOptions {
    pub batch_size: usize,
    /// Checkpoint after (at least) this many written lines.
    pub checkpoint_every: u64,
    /// Continue from an existing checkpoint instead of starting over.
    pub resume: bool,
    /// In-flight batches.
    pub jobs: usize,
}

impl Default for TranslateOptions {
    fn default() -> Self {
        TranslateOptions {
            batch_size: 64,
            checkpoint_every: 10_000,
            resume: false,
            jobs: 1,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    lines_done: u64,
    direction: String,
}

fn checkpoint_path(output: &Path) -> PathBuf {
    let mut os = output.as_os_str().to_os_string();
    os.push(".ckpt");
    PathBuf::from(os)
}

fn write_checkpoint(output: &Path, lines_done: u64, direction: &Direction) -> Result<()> {
    let path = checkpoint_path(output);
    let tmp = checkpoint_path(output).with_extension("ckpt.tmp");
    let json = serde_json::to_string(&Checkpoint {
        lines_done,
        direction: direction.label(),
    })
    .expect("serializable checkpoint");
    std::fs::write(&tmp, json).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
    Ok(())
}

/// Truncates `path` to its first `lines` lines; errors if fewer are present.
fn truncate_to_lines(path: &Path, lines: u64) -> Result<()> {
    use std::io::Read;
    if lines == 0 {
        let file = std::fs::OpenOptions::new()
            .write(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        return file.set_len(0).map_err(|e| Error::io(path, e));
    }
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut seen = 0u64;
    let mut offset = 0u64;
    let mut buf = [0u8; 8192];
    'outer: loop {
        let n = reader.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        for (k, &b) in buf[..n].iter().enumerate() {
            if b == b'\n' {
                seen += 1;
                if seen == lines {
                    offset += k as u64 + 1;
                    break 'outer;
                }
            }
        }
        offset += n as u64;
    }
    if seen < lines {
        return Err(Error::Config(format!(
            "checkpoint claims {lines} lines but {} holds only {seen}",
            path.display()
        )));
    }
    let file = std::fs::OpenOptions::new()
        .write(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    file.set_len(offset).map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Translates `input` line by line into `output`, preserving order.
///
/// Batches may be in flight concurrently (`jobs`); a sequencer writes them
/// strictly in batch order, checkpoints every `checkpoint_every` lines, and
/// leaves a valid checkpoint behind on failure. On success the checkpoint is
/// removed. Returns the number of lines written.
pub fn translate_file(
    backend: &dyn TranslationBackend,
    direction: &Direction,
    input: &Path,
    output: &Path,
    opts: &TranslateOptions,
) -> Result<u64> {
    let ckpt_path = checkpoint_path(output);
    let mut start_at = 0u64;
    if opts.resume && ckpt_path.exists() {
        let body = std::fs::read_to_string(&ckpt_path).map_err(|e| Error::io(&ckpt_path, e))?;
        let ckpt: Checkpoint = serde_json::from_str(&body)
            .map_err(|e| Error::format(&ckpt_path, format!("bad checkpoint: {e}")))?;
        if ckpt.direction != direction.label() {
            return Err(Error::Config(format!(
                "checkpoint was written for direction {} not {}",
                ckpt.direction,
                direction.label()
            )));
        }
        truncate_to_lines(output, ckpt.lines_done)?;
        start_at = ckpt.lines_done;
        log::info!("resuming translation at line {}", start_at + 1);
    }

    let in_file = File::open(input).map_err(|e| Error::io(input, e))?;
    let mut in_lines = RawLines::new(BufReader::new(in_file)).enumerate();
    // Skip already-translated lines.
    for _ in 0..start_at {
        if in_lines.next().is_none() {
            return Err(Error::Config(format!(
                "checkpoint beyond the end of {}",
                input.display()
            )));
        }
    }

    let out_file = if start_at > 0 {
        std::fs::OpenOptions::new()
            .append(true)
            .open(output)
            .map_err(|e| Error::io(output, e))?
    } else {
        File::create(output).map_err(|e| Error::io(output, e))?
    };
    let mut writer = BufWriter::new(out_file);

    let batch_size = opts.batch_size.max(1);
    let jobs = opts.jobs.max(1);
    let abort = AtomicBool::new(false);

    // Feeder yielding (batch index, first 1-based line number, lines).
    let mut next_batch_idx = 0u64;
    let feeder = Mutex::new(move || -> Result<Option<(u64, u64, Vec<String>)>> {
        let mut lines = Vec::with_capacity(batch_size);
        let mut first_line = 0u64;
        while lines.len() < batch_size {
            match in_lines.next() {
                None => break,
                Some((idx, line)) => {
                    if lines.is_empty() {
                        first_line = idx as u64 + 1;
                    }
                    lines.push(line?);
                }
            }
        }
        if lines.is_empty() {
            return Ok(None);
        }
        let idx = next_batch_idx;
        next_batch_idx += 1;
        Ok(Some((idx, first_line, lines)))
    });

    let (tx, rx) = mpsc::channel::<(u64, Result<Vec<String>>)>();
    let mut written = start_at;
    let mut since_checkpoint = 0u64;
    let mut first_error: Option<Error> = None;

    std::thread::scope(|scope| -> Result<()> {
        for _ in 0..jobs {
            let tx = tx.clone();
            let abort = &abort;
            let feeder = &feeder;
            scope.spawn(move || loop {
                if abort.load(Ordering::Relaxed) {
                    break;
                }
                let next = { (feeder.lock().unwrap())() };
                match next {
                    Ok(None) => break,
                    Ok(Some((idx, first_line, lines))) => {
                        let result = backend.translate_batch(&lines, direction, first_line).and_then(
                            |out| {
                                if out.len() == lines.len() {
                                    Ok(out)
                                } else {
                                    Err(Error::Backend(format!(
                                        "backend returned {} lines for a {}-line batch",
                                        out.len(),
                                        lines.len()
                                    )))
                                }
                            },
                        );
                        let failed = result.is_err();
                        if tx.send((idx, result)).is_err() {
                            break;
                        }
                        if failed {
                            abort.store(true, Ordering::Relaxed);
                            break;
                        }
                    }
                    Err(e) => {
                        abort.store(true, Ordering::Relaxed);
                        let _ = tx.send((u64::MAX, Err(e)));
                        break;
                    }
                }
            });
        }
        drop(tx);

        // Sequencer: write batches strictly in order.
        let mut pending: std::collections::BTreeMap<u64, Vec<String>> =
            std::collections::BTreeMap::new();
        let mut expected = 0u64;
        for (idx, result) in rx {
            match result {
                Err(e) => {
                    if first_error.is_none() {
                        first_error = Some(e);
                    }
                    abort.store(true, Ordering::Relaxed);
                }
                Ok(lines) => {
                    pending.insert(idx, lines);
                    while let Some(lines) = pending.remove(&expected) {
                        for line in &lines {
                            writeln!(writer, "{line}").map_err(|e| Error::io(output, e))?;
                        }
                        written += lines.len() as u64;
                        since_checkpoint += lines.len() as u64;
                        expected += 1;
                        if since_checkpoint >= opts.checkpoint_every {
                            writer.flush().map_err(|e| Error::io(output, e))?;
                            write_checkpoint(output, written, direction)?;
                            since_checkpoint = 0;
                        }
                    }
                }
            }
        }
        writer.flush().map_err(|e| Error::io(output, e))?;
        Ok(())
    })?;

    if let Some(e) = first_error {
        write_checkpoint(output, written, direction)?;
        truncate_to_lines(output, written)?;
        return Err(e);
    }
    if ckpt_path.exists() {
        std::fs::remove_file(&ckpt_path).map_err(|e| Error::io(&ckpt_path, e))?;
    }
    Ok(written)
}
