use serde::{Deserialize, Serialize};

use super::ParallelCorpus;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CleanConfig {
    pub min_len: usize,
    pub max_len: usize,
    pub max_ratio: f64,
}

impl Default for CleanConfig {
    fn default() -> Self {
        CleanConfig {
            min_len: 1,
            max_len: 80,
            max_ratio: 9.0,
        }
    }
}

impl CleanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_len < 1 || self.max_len < self.min_len || !(self.max_ratio > 1.0) {
            return Err(Error::config(format!(
                "clean bounds need 1 <= min_len <= max_len and max_ratio > 1, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn keeps(&self, src_len: usize, tgt_len: usize) -> bool {
        let in_range = |n: usize| (self.min_len..=self.max_len).contains(&n);
        if !in_range(src_len) || !in_range(tgt_len) {
            return false;
        }
        let (lo, hi) = (src_len.min(tgt_len) as f64, src_len.max(tgt_len) as f64);
        hi / lo <= self.max_ratio
    }
}

/// Keeps pairs whose token counts lie in `[min_len, max_len]` on both sides
/// and whose length ratio is at most `max_ratio`. Order is preserved.
pub fn clean_parallel(corpus: &ParallelCorpus, cfg: &CleanConfig) -> Result<ParallelCorpus> {
    cfg.validate()?;
    Ok(ParallelCorpus {
        pairs: corpus
            .pairs
            .iter()
            .filter(|p| cfg.keeps(p.src.tokens.len(), p.tgt.tokens.len()))
            .cloned()
            .collect(),
    })
}
