//! Versioned artifact files.
//!
//! Every file written by the toolkit starts with a header naming its format,
//! format version and the hash of the configuration that produced it.
//! Line-delimited JSON files carry the header as their first record.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Config hash used for artifacts produced outside a pipeline run.
pub const NO_CONFIG: &str = "none";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    pub format: String,
    pub version: u32,
    pub config_hash: String,
}

impl Header {
    pub fn new(format: &str, version: u32, config_hash: &str) -> Self {
        Header {
            format: format.to_string(),
            version,
            config_hash: config_hash.to_string(),
        }
    }

    pub fn expect(&self, format: &str, version: u32, label: &str) -> Result<()> {
        if self.format != format || self.version != version {
            return Err(Error::format(
                label,
                1,
                format!("expected {format} v{version}, found {} v{}", self.format, self.version),
            ));
        }
        Ok(())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Serialises `records` as line-delimited JSON behind a header line.
pub fn to_jsonl<T: Serialize>(header: &Header, records: impl IntoIterator<Item = T>) -> Result<String> {
    let mut out = serde_json::to_string(header)?;
    out.push('\n');
    for r in records {
        out.push_str(&serde_json::to_string(&r)?);
        out.push('\n');
    }
    Ok(out)
}

/// Parses a header-led JSONL file. Blank lines are ignored.
pub fn from_jsonl<T: DeserializeOwned>(text: &str, label: &str, format: &str, version: u32) -> Result<(Header, Vec<T>)> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines.next().ok_or_else(|| Error::format(label, 1, "missing header"))?;
    let header: Header = serde_json::from_str(first).map_err(|e| Error::format(label, 1, format!("bad header: {e}")))?;
    header.expect(format, version, label)?;
    let mut records = Vec::new();
    for (i, line) in lines {
        records.push(serde_json::from_str(line).map_err(|e| Error::format(label, i + 1, e.to_string()))?);
    }
    Ok((header, records))
}

pub const TEXT_FORMAT: &str = "sectionmt.text";

/// Header line for plain-text artifacts (one sentence per line).
pub fn text_header(config_hash: &str) -> String {
    format!("# {TEXT_FORMAT} version=1 config_hash={config_hash}\n")
}

/// Config hash of a plain-text header line, if `line` is one.
pub fn text_header_hash(line: &str) -> Option<String> {
    let rest = line.strip_prefix(&format!("# {TEXT_FORMAT} version=1 config_hash="))?;
    Some(rest.trim_end().to_string())
}

/// Lines of a plain-text file, without its header line if present.
pub fn text_lines(text: &str) -> Vec<&str> {
    let mut lines: Vec<&str> = text.lines().collect();
    if lines.first().is_some_and(|l| text_header_hash(l).is_some()) {
        lines.remove(0);
    }
    lines
}

/// Files written by one stage. Content lands in `<path>.partial` and is only
/// renamed into place by [`StagedFiles::commit`]; dropping uncommitted files
/// removes them.
#[derive(Debug, Default)]
pub struct StagedFiles {
    pending: Vec<(PathBuf, PathBuf)>,
}

impl StagedFiles {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                fs::create_dir_all(dir)?;
            }
        }
        let mut partial = path.as_os_str().to_owned();
        partial.push(".partial");
        let partial = PathBuf::from(partial);
        let mut f = fs::File::create(&partial)?;
        self.pending.push((partial, path.to_path_buf()));
        f.write_all(bytes)?;
        f.sync_all()?;
        Ok(())
    }

    pub fn commit(mut self) -> Result<Vec<PathBuf>> {
        let pending = std::mem::take(&mut self.pending);
        let mut done = Vec::with_capacity(pending.len());
        for (partial, target) in pending {
            fs::rename(&partial, &target)?;
            done.push(target);
        }
        Ok(done)
    }
}

impl Drop for StagedFiles {
    fn drop(&mut self) {
        for (partial, _) in &self.pending {
            let _ = fs::remove_file(partial);
        }
    }
}
