//! Text normalization and tokenization.
//!
//! Every algorithm in this crate operates on [`TokenSequence`]s: ordered lists
//! of non-empty, whitespace-free tokens. The canonical on-disk form is UTF-8,
//! one sentence per line, tokens separated by single spaces, so joining a
//! sequence with spaces and re-tokenizing in whitespace mode is the identity.

use std::io::BufRead;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

/// Canonicalizes one raw line: Unicode NFC, control characters removed,
/// whitespace runs collapsed to single spaces, ends trimmed.
pub fn normalize(raw: &str) -> String {
    let nfc: String = raw
        .nfc()
        .filter(|c| !c.is_control() || c.is_whitespace())
        .collect();
    let mut out = String::with_capacity(nfc.len());
    for part in nfc.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(part);
    }
    out
}

/// How a normalized line is cut into tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TokenizeMode {
    /// Split on spaces only. The default: corpora are trusted to arrive
    /// pre-tokenized.
    #[default]
    Whitespace,
    /// Additionally detach leading/trailing punctuation marks
    /// (`. , ! ? ; : " ( )`) into their own tokens.
    PunctSplit,
}

fn is_splittable_punct(c: char) -> bool {
    matches!(c, '.' | ',' | '!' | '?' | ';' | ':' | '"' | '(' | ')')
}

/// A normalized, tokenized sentence.
///
/// Invariants: no token is empty and no token contains whitespace, so
/// `TokenSequence::parse(seq.join(" "), Whitespace) == seq` always holds.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    /// Wraps pre-split tokens, validating the invariants.
    pub fn new(tokens: Vec<String>) -> Result<Self> {
        for t in &tokens {
            if t.is_empty() {
                return Err(Error::Invariant("empty token".into()));
            }
            if t.chars().any(char::is_whitespace) {
                return Err(Error::Invariant(format!("token {t:?} contains whitespace")));
            }
        }
        Ok(TokenSequence(tokens))
    }

    /// Tokenizes a normalized line. An empty line yields an empty sequence.
    pub fn parse(line: &str, mode: TokenizeMode) -> Self {
        let mut tokens = Vec::new();
        for word in line.split_whitespace() {
            match mode {
                TokenizeMode::Whitespace => tokens.push(word.to_string()),
                TokenizeMode::PunctSplit => split_punct(word, &mut tokens),
            }
        }
        TokenSequence(tokens)
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn join(&self) -> String {
        self.0.join(" ")
    }

    pub fn to_lowercase(&self) -> TokenSequence {
        TokenSequence(self.0.iter().map(|t| t.to_lowercase()).collect())
    }

    pub fn iter(&self) -> std::slice::Iter<'_, String> {
        self.0.iter()
    }
}

fn split_punct(word: &str, out: &mut Vec<String>) {
    let chars: Vec<char> = word.chars().collect();
    let mut start = 0;
    while start < chars.len() && is_splittable_punct(chars[start]) {
        start += 1;
    }
    let mut end = chars.len();
    while end > start && is_splittable_punct(chars[end - 1]) {
        end -= 1;
    }
    for &c in &chars[..start] {
        out.push(c.to_string());
    }
    if start < end {
        out.push(chars[start..end].iter().collect());
    }
    for &c in &chars[end..] {
        out.push(c.to_string());
    }
}

/// Iterator over raw lines of a UTF-8 corpus file.
///
/// Lines are split on `\n` with a trailing `\r` stripped, so CRLF corpora read
/// identically to LF ones. A line that is not valid UTF-8 yields a recoverable
/// [`Error::Line`] and reading continues with the next line.
pub struct RawLines<R> {
    reader: R,
    line_no: u64,
}

impl<R: BufRead> RawLines<R> {
    pub fn new(reader: R) -> Self {
        RawLines { reader, line_no: 0 }
    }
}

impl<R: BufRead> Iterator for RawLines<R> {
    type Item = Result<String>;

    fn next(&mut self) -> Option<Self::Item> {
        let mut buf = Vec::new();
        match self.reader.read_until(b'\n', &mut buf) {
            Ok(0) => None,
            Ok(_) => {
                self.line_no += 1;
                if buf.last() == Some(&b'\n') {
                    buf.pop();
                    if buf.last() == Some(&b'\r') {
                        buf.pop();
                    }
                }
                Some(String::from_utf8(buf).map_err(|_| {
                    Error::line(self.line_no, "invalid UTF-8".to_string())
                }))
            }
            Err(e) => Some(Err(Error::line(self.line_no + 1, e.to_string()))),
        }
    }
}
