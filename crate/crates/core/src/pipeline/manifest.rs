//! Dataset directory layout and manifest.
//!
//! A dataset split is a directory of seven line-aligned files plus
//! `manifest.json`. All files are UTF-8, one record per line:
//!
//! * `src.txt` — source sentences (the pseudo-source for strategy M)
//! * `mt.txt` — MT outputs
//! * `pe.txt` — references (corpus-provided pseudo post-edits)
//! * `mt_tags.txt` — 2N+1 space-separated OK/BAD tags per record
//! * `source_tags.txt` — per-source-token OK/BAD tags
//! * `alignments.txt` — Pharaoh `i-j` links, source index first
//! * `ter.txt` — one decimal TER value per line

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestFiles {
    pub src: String,
    pub mt: String,
    pub pe: String,
    pub mt_tags: String,
    pub source_tags: String,
    pub alignments: String,
    pub ter: String,
}

impl Default for ManifestFiles {
    fn default() -> Self {
        ManifestFiles {
            src: "src.txt".into(),
            mt: "mt.txt".into(),
            pe: "pe.txt".into(),
            mt_tags: "mt_tags.txt".into(),
            source_tags: "source_tags.txt".into(),
            alignments: "alignments.txt".into(),
            ter: "ter.txt".into(),
        }
    }
}

impl ManifestFiles {
    pub fn all(&self) -> [&str; 7] {
        [
            &self.src,
            &self.mt,
            &self.pe,
            &self.mt_tags,
            &self.source_tags,
            &self.alignments,
            &self.ter,
        ]
    }
}

/// Metadata of one dataset split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    /// Construction strategy: "M", "P", or "H".
    pub strategy: String,
    pub records: u64,
    /// Input lines dropped during normalization (invalid UTF-8 or an empty
    /// reference, whose TER would be undefined).
    pub dropped: u64,
    /// Whether `ter.txt` was computed with the block-shift phase.
    pub ter_shifts: bool,
    pub config_hash: String,
    pub tool_version: String,
    pub files: ManifestFiles,
}

impl DatasetManifest {
    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_NAME);
        let json = serde_json::to_string_pretty(self).expect("serializable manifest");
        std::fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_NAME);
        let body = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&body).map_err(|e| Error::format(&path, e.to_string()))
    }

    /// Checks that every file exists and all seven have exactly `records`
    /// lines.
    pub fn validate_files(&self, dir: &Path) -> Result<()> {
        for name in self.files.all() {
            let path = dir.join(name);
            let lines = count_lines(&path)?;
            if lines != self.records {
                return Err(Error::Invariant(format!(
                    "{} has {lines} lines, manifest says {}",
                    path.display(),
                    self.records
                )));
            }
        }
        Ok(())
    }
}

pub fn count_lines(path: &Path) -> Result<u64> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut lines = 0u64;
    loop {
        let buf = reader.fill_buf().map_err(|e| Error::io(path, e))?;
        if buf.is_empty() {
            break;
        }
        lines += buf.iter().filter(|&&b| b == b'\n').count() as u64;
        let n = buf.len();
        reader.consume(n);
    }
    Ok(lines)
}

/// Resolves a manifest file entry against its directory.
pub fn dataset_file(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
