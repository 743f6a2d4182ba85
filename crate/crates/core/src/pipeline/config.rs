use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::artifact::sha256_hex;
use crate::cache::DEFAULT_CAPACITY;
use crate::corpus::{default_biography_keywords, AlignConfig, CleanConfig};
use crate::neural::ScorerDims;
use crate::topics::{Granularity, InferConfig, LdaConfig};
use crate::{Error, Result};

/// Environment variable overriding the global seed.
pub const SEED_ENV: &str = "SECTIONMT_SEED";

/// Offsets added to the global seed for each consumer of randomness.
pub mod seed_offsets {
    pub const LDA_SRC: u64 = 1;
    pub const LDA_TGT: u64 = 2;
    pub const INFER: u64 = 3;
    pub const XALIGN: u64 = 4;
    pub const TAG: u64 = 5;
    pub const SCORER_INIT: u64 = 6;
    pub const SCHEDULE: u64 = 7;
    pub const TRAIN_SHUFFLE: u64 = 8;
    pub const BOOTSTRAP: u64 = 9;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputConfig {
    pub src_raw: PathBuf,
    pub tgt_raw: PathBuf,
    pub filter_bio: bool,
    pub bio_keywords: Vec<String>,
}

impl Default for InputConfig {
    fn default() -> Self {
        InputConfig {
            src_raw: "src.raw.jsonl".into(),
            tgt_raw: "tgt.raw.jsonl".into(),
            filter_bio: true,
            bio_keywords: default_biography_keywords(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BpeConfig {
    pub merges: usize,
}

impl Default for BpeConfig {
    fn default() -> Self {
        BpeConfig { merges: 8000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopicSettings {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub burn_in: usize,
    pub granularity: Granularity,
    pub infer_iterations: usize,
}

impl Default for TopicSettings {
    fn default() -> Self {
        let l = LdaConfig::default();
        TopicSettings {
            k: l.k,
            alpha: l.alpha,
            beta: l.beta,
            iterations: l.iterations,
            burn_in: l.burn_in,
            granularity: l.granularity,
            infer_iterations: InferConfig::default().iterations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CacheConfig {
    pub topic_capacity: usize,
    pub dynamic_capacity: usize,
}

impl Default for CacheConfig {
    fn default() -> Self {
        CacheConfig {
            topic_capacity: DEFAULT_CAPACITY,
            dynamic_capacity: DEFAULT_CAPACITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScorerConfig {
    pub dims: ScorerDims,
    /// Fraction of training units given the gold target topic.
    pub schedule_ratio: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub freeze_embeddings: bool,
}

impl Default for ScorerConfig {
    fn default() -> Self {
        ScorerConfig {
            dims: ScorerDims::default(),
            schedule_ratio: 0.5,
            epochs: 2,
            batch_size: 16,
            learning_rate: 0.05,
            freeze_embeddings: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    /// Output directory. Not part of the config hash.
    pub work_dir: PathBuf,
    pub src_lang: String,
    pub tgt_lang: String,
    pub input: InputConfig,
    pub align: AlignConfig,
    pub clean: CleanConfig,
    pub bpe: BpeConfig,
    pub lda: TopicSettings,
    pub cache: CacheConfig,
    pub scorer: ScorerConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            work_dir: "work".into(),
            src_lang: "fr".into(),
            tgt_lang: "en".into(),
            input: InputConfig::default(),
            align: AlignConfig::default(),
            clean: CleanConfig::default(),
            bpe: BpeConfig::default(),
            lda: TopicSettings::default(),
            cache: CacheConfig::default(),
            scorer: ScorerConfig::default(),
        }
    }
}

fn parse_override_value(raw: &str) -> toml::Value {
    match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("key v"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

fn set_path(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let mut parts = key.split('.').peekable();
    let mut cur = table;
    while let Some(part) = parts.next() {
        if part.is_empty() {
            return Err(Error::config(format!("bad override key {key:?}")));
        }
        if parts.peek().is_none() {
            cur.insert(part.to_string(), value);
            return Ok(());
        }
        let next = cur
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = next
            .as_table_mut()
            .ok_or_else(|| Error::config(format!("override {key:?}: {part} is not a table")))?;
    }
    Ok(())
}

impl PipelineConfig {
    /// Builds a config from defaults, an optional TOML file, the seed
    /// environment variable and `key=value` overrides, in that order of
    /// increasing precedence. Relative input paths are resolved against the
    /// config file's directory.
    pub fn load(file: Option<&Path>, env_seed: Option<&str>, overrides: &[(String, String)]) -> Result<Self> {
        let mut table = match file {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| Error::config(format!("cannot read config {}: {e}", p.display())))?;
                toml::from_str::<toml::Table>(&text)
                    .map_err(|e| Error::config(format!("{}: {}", p.display(), e.message())))?
            }
            None => toml::Table::new(),
        };
        if let Some(s) = env_seed {
            let seed: u64 = s
                .trim()
                .parse()
                .map_err(|_| Error::config(format!("{SEED_ENV}={s:?} is not an unsigned integer")))?;
            table.insert("seed".into(), toml::Value::Integer(seed as i64));
        }
        for (k, v) in overrides {
            set_path(&mut table, k, parse_override_value(v))?;
        }
        let mut cfg: PipelineConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::config(e.message().to_string()))?;
        if let Some(dir) = file.and_then(Path::parent) {
            for p in [&mut cfg.input.src_raw, &mut cfg.input.tgt_raw, &mut cfg.work_dir] {
                if p.is_relative() && !dir.as_os_str().is_empty() {
                    *p = dir.join(&*p);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.clean.validate()?;
        self.lda_config(0).validate()?;
        self.scorer.dims.validate()?;
        if self.align.skip_penalty < 0.0 || !self.align.skip_penalty.is_finite() {
            return Err(Error::config("align.skip_penalty must be a non-negative number"));
        }
        if self.lda.infer_iterations == 0 {
            return Err(Error::config("lda.infer_iterations must be positive"));
        }
        if self.cache.topic_capacity == 0 || self.cache.dynamic_capacity == 0 {
            return Err(Error::config("cache capacities must be positive"));
        }
        if !(0.0..=1.0).contains(&self.scorer.schedule_ratio) {
            return Err(Error::config("scorer.schedule_ratio must lie in [0,1]"));
        }
        if self.scorer.batch_size == 0 || !(self.scorer.learning_rate > 0.0) {
            return Err(Error::config("scorer.batch_size and scorer.learning_rate must be positive"));
        }
        if self.input.filter_bio && self.input.bio_keywords.is_empty() {
            return Err(Error::config("input.bio_keywords must be non-empty when filter_bio is set"));
        }
        if self.src_lang.is_empty() || self.tgt_lang.is_empty() {
            return Err(Error::config("languages must be set"));
        }
        Ok(())
    }

    /// Checks that the referenced input files exist.
    pub fn check_inputs(&self) -> Result<()> {
        for p in [&self.input.src_raw, &self.input.tgt_raw] {
            if !p.is_file() {
                return Err(Error::config(format!("input file {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    /// sha256 of the canonical JSON form with `work_dir` blanked.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.work_dir = PathBuf::new();
        let json = serde_json::to_string(&c).expect("config serialises");
        sha256_hex(json.as_bytes())
    }

    pub fn module_seed(&self, offset: u64) -> u64 {
        self.seed.wrapping_add(offset)
    }

    pub fn lda_config(&self, seed: u64) -> LdaConfig {
        LdaConfig {
            k: self.lda.k,
            alpha: self.lda.alpha,
            beta: self.lda.beta,
            iterations: self.lda.iterations,
            burn_in: self.lda.burn_in,
            seed,
            granularity: self.lda.granularity,
        }
    }

    pub fn infer_config(&self, offset: u64) -> InferConfig {
        InferConfig {
            iterations: self.lda.infer_iterations,
            seed: self.module_seed(offset),
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::config(e.to_string()))
    }
}
