//! End-to-end pipeline: stages that read and write versioned artifacts in a
//! work directory, recorded in a manifest.

mod config;
mod decode;
mod stages;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use config::{
    seed_offsets, BpeConfig, CacheConfig, InputConfig, PipelineConfig, ScorerConfig, TopicSettings, SEED_ENV,
};
pub use decode::{argmax, DecodeSentence};
pub use stages::{CacheRunRecord, CACHE_RUN_FORMAT, TAGGED_FORMAT, VOCAB_FORMAT};

use crate::artifact::{sha256_hex, StagedFiles};
use crate::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_FORMAT: &str = "sectionmt.manifest";

/// Artifact file names inside the work directory.
pub mod files {
    pub const CORPUS_SRC: &str = "corpus.src.jsonl";
    pub const CORPUS_TGT: &str = "corpus.tgt.jsonl";
    pub const LINKS: &str = "links.jsonl";
    pub const LINKS_CLEAN: &str = "links.clean.jsonl";
    pub const BPE: &str = "bpe.merges";
    pub const LDA_SRC: &str = "lda.src.model";
    pub const LDA_TGT: &str = "lda.tgt.model";
    pub const TOPIC_ALIGNMENT: &str = "topics.align.json";
    pub const TAGGED_SRC: &str = "tagged.src.jsonl";
    pub const SCORER: &str = "scorer.ckpt";
    pub const SCORER_VOCAB: &str = "scorer.vocab.jsonl";
    pub const CACHE_RUN: &str = "cache_run.jsonl";
    pub const CACHE_DUMP: &str = "cache_dump.jsonl";
    pub const HYP_BASE: &str = "hyp.base.txt";
    pub const HYP_CACHE: &str = "hyp.cache.txt";
    pub const REF: &str = "ref.txt";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    Ingest,
    AlignSents,
    Clean,
    LearnBpe,
    TrainLda,
    AlignTopics,
    Tag,
    TrainScorer,
    CacheRun,
}

impl Stage {
    pub const ALL: [Stage; 9] = [
        Stage::Ingest,
        Stage::AlignSents,
        Stage::Clean,
        Stage::LearnBpe,
        Stage::TrainLda,
        Stage::AlignTopics,
        Stage::Tag,
        Stage::TrainScorer,
        Stage::CacheRun,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::AlignSents => "align-sents",
            Stage::Clean => "clean",
            Stage::LearnBpe => "learn-bpe",
            Stage::TrainLda => "train-lda",
            Stage::AlignTopics => "align-topics",
            Stage::Tag => "tag",
            Stage::TrainScorer => "train-scorer",
            Stage::CacheRun => "cache-run",
        }
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::config(format!("unknown stage {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub config_hash: String,
    pub artifacts: Vec<ArtifactEntry>,
    /// Deterministic stage statistics.
    pub summary: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub version: u32,
    pub config_hash: String,
    /// In pipeline order.
    pub stages: Vec<StageRecord>,
}

impl Manifest {
    fn empty(config_hash: &str) -> Self {
        Manifest {
            format: MANIFEST_FORMAT.into(),
            version: 1,
            config_hash: config_hash.into(),
            stages: Vec::new(),
        }
    }

    pub fn read(path: &Path) -> Result<Manifest> {
        let text = fs::read_to_string(path)?;
        let m: Manifest = serde_json::from_str(&text).map_err(|e| Error::format(path.display().to_string(), 1, e.to_string()))?;
        if m.format != MANIFEST_FORMAT || m.version != 1 {
            return Err(Error::format(path.display().to_string(), 1, "not a manifest"));
        }
        Ok(m)
    }

    fn upsert(&mut self, rec: StageRecord) {
        self.stages.retain(|s| s.name != rec.name);
        self.stages.push(rec);
        let order = |n: &str| Stage::ALL.iter().position(|s| s.name() == n).unwrap_or(usize::MAX);
        self.stages.sort_by_key(|s| order(&s.name));
    }
}

/// What a stage produced: file contents keyed by work-dir-relative name.
#[derive(Debug, Default)]
pub(crate) struct StageOutput {
    pub files: Vec<(&'static str, Vec<u8>)>,
    pub summary: BTreeMap<String, serde_json::Value>,
}

impl StageOutput {
    pub fn file(&mut self, name: &'static str, bytes: impl Into<Vec<u8>>) {
        self.files.push((name, bytes.into()));
    }

    pub fn stat(&mut self, key: &str, value: impl Into<serde_json::Value>) {
        self.summary.insert(key.to_string(), value.into());
    }
}

/// Runs stages against a work directory.
#[derive(Debug, Clone)]
pub struct Pipeline {
    cfg: PipelineConfig,
    work_dir: PathBuf,
    hash: String,
}

impl Pipeline {
    pub fn new(cfg: PipelineConfig) -> Result<Self> {
        cfg.validate()?;
        let hash = cfg.hash();
        let work_dir = cfg.work_dir.clone();
        Ok(Pipeline { cfg, work_dir, hash })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn config_hash(&self) -> &str {
        &self.hash
    }

    pub fn work_dir(&self) -> &Path {
        &self.work_dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.work_dir.join(name)
    }

    /// Runs one stage. Its files, and then the manifest, are written only if
    /// the whole stage succeeds.
    pub fn run_stage(&self, stage: Stage) -> Result<StageRecord> {
        log::info!("stage {stage}: start");
        let out = stages::run(self, stage)?;
        let mut staged = StagedFiles::new();
        let mut artifacts = Vec::new();
        for (name, bytes) in &out.files {
            staged.write(&self.path(name), bytes)?;
            artifacts.push(ArtifactEntry {
                path: name.to_string(),
                sha256: sha256_hex(bytes),
            });
        }
        let rec = StageRecord {
            name: stage.name().to_string(),
            config_hash: self.hash.clone(),
            artifacts,
            summary: out.summary,
        };
        let manifest_path = self.path(MANIFEST_FILE);
        let mut manifest = match Manifest::read(&manifest_path) {
            Ok(m) if m.config_hash == self.hash => m,
            _ => Manifest::empty(&self.hash),
        };
        manifest.upsert(rec.clone());
        let mut json = serde_json::to_string_pretty(&manifest)?;
        json.push('\n');
        staged.write(&manifest_path, json.as_bytes())?;
        staged.commit()?;
        log::info!("stage {stage}: wrote {} artifact(s)", rec.artifacts.len());
        Ok(rec)
    }

    /// Runs every stage from the first up to and including `until`.
    pub fn run_all(&self, until: Option<Stage>) -> Result<Vec<StageRecord>> {
        let last = until.unwrap_or(Stage::CacheRun);
        Stage::ALL
            .into_iter()
            .filter(|s| *s <= last)
            .map(|s| self.run_stage(s))
            .collect()
    }

    /// Reads an artifact written by an earlier stage and checks that it was
    /// produced under the current config.
    pub(crate) fn read_artifact(&self, name: &str) -> Result<Vec<u8>> {
        let path = self.path(name);
        let bytes = fs::read(&path).map_err(|e| {
            Error::config(format!("missing artifact {} ({e}); run the earlier stages first", path.display()))
        })?;
        match artifact_config_hash(&bytes) {
            Some(h) if h == self.hash => Ok(bytes),
            Some(h) => Err(Error::config(format!(
                "{} was produced by config {h}, current config is {}; re-run the earlier stages",
                path.display(),
                self.hash
            ))),
            None => Err(Error::format(path.display().to_string(), 1, "no config hash in header")),
        }
    }

    pub(crate) fn read_text(&self, name: &str) -> Result<String> {
        String::from_utf8(self.read_artifact(name)?)
            .map_err(|_| Error::format(self.path(name).display().to_string(), 0, "not UTF-8"))
    }
}

/// Extracts the producing config hash from any artifact header.
pub fn artifact_config_hash(bytes: &[u8]) -> Option<String> {
    if let Some(rest) = bytes.strip_prefix(crate::neural::CHECKPOINT_MAGIC.as_slice()) {
        let len = u32::from_le_bytes(rest.get(4..8)?.try_into().ok()?) as usize;
        let v: serde_json::Value = serde_json::from_slice(rest.get(8..8 + len)?).ok()?;
        return v.get("config_hash")?.as_str().map(str::to_string);
    }
    let text = std::str::from_utf8(bytes).ok()?;
    let mut lines = text.lines();
    let first = lines.next()?;
    if first == "version 1" {
        return lines.next()?.strip_prefix("config ").map(str::to_string);
    }
    if let Some(h) = crate::artifact::text_header_hash(first) {
        return Some(h);
    }
    let v: serde_json::Value = serde_json::from_str(first).ok()?;
    v.get("config_hash")
        .or_else(|| v.get("header")?.get("config_hash"))?
        .as_str()
        .map(str::to_string)
}
