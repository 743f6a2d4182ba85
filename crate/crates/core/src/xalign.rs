//! Cross-lingual topic projection.
//!
//! Source and target topic models are trained separately, so their topic ids
//! do not correspond. Each parallel section pair votes for the pair of its
//! dominant topics; a source topic projects to the target topic it co-occurs
//! with most often.

use serde::{Deserialize, Serialize};

use crate::artifact::Header;
use crate::error::{Error, Result};
use crate::seed;
use crate::topics::{dominant_topic, infer_topics, InferConfig, TopicModel, Unit};

pub const ALIGNMENT_FORMAT: &str = "sectionmt.topic-alignment";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopicAlignment {
    pub k_src: usize,
    pub k_tgt: usize,
    /// Row-major K_src × K_tgt co-occurrence counts.
    pub counts: Vec<u64>,
    pub projection: Vec<usize>,
    /// Target topic used for source topics never observed.
    pub fallback: usize,
}

#[derive(Serialize, Deserialize)]
struct AlignmentFile {
    #[serde(flatten)]
    header: Header,
    k_src: usize,
    k_tgt: usize,
    fallback: usize,
    projection: Vec<usize>,
    counts: Vec<(usize, usize, u64)>,
}

fn argmax_u64(row: &[u64]) -> usize {
    let mut best = 0;
    for (i, &c) in row.iter().enumerate() {
        if c > row[best] {
            best = i;
        }
    }
    best
}

impl TopicAlignment {
    /// Derives projection and fallback from a count matrix.
    pub fn from_counts(k_src: usize, k_tgt: usize, counts: Vec<u64>) -> Result<Self> {
        if k_src == 0 || k_tgt == 0 || counts.len() != k_src * k_tgt {
            return Err(Error::input("co-occurrence matrix shape mismatch"));
        }
        let column_totals: Vec<u64> = (0..k_tgt).map(|t| (0..k_src).map(|s| counts[s * k_tgt + t]).sum()).collect();
        let fallback = argmax_u64(&column_totals);
        let projection = (0..k_src)
            .map(|s| {
                let row = &counts[s * k_tgt..(s + 1) * k_tgt];
                if row.iter().all(|&c| c == 0) {
                    fallback
                } else {
                    argmax_u64(row)
                }
            })
            .collect();
        Ok(TopicAlignment {
            k_src,
            k_tgt,
            counts,
            projection,
            fallback,
        })
    }

    pub fn count(&self, src: usize, tgt: usize) -> u64 {
        self.counts[src * self.k_tgt + tgt]
    }

    pub fn row_total(&self, src: usize) -> u64 {
        self.counts[src * self.k_tgt..(src + 1) * self.k_tgt].iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn to_json(&self, config_hash: &str) -> Result<String> {
        let counts = self
            .counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (i / self.k_tgt, i % self.k_tgt, c))
            .collect();
        let file = AlignmentFile {
            header: Header::new(ALIGNMENT_FORMAT, 1, config_hash),
            k_src: self.k_src,
            k_tgt: self.k_tgt,
            fallback: self.fallback,
            projection: self.projection.clone(),
            counts,
        };
        let mut s = serde_json::to_string(&file)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str, label: &str) -> Result<Self> {
        let file: AlignmentFile = serde_json::from_str(text).map_err(|e| Error::format(label, 1, e.to_string()))?;
        file.header.expect(ALIGNMENT_FORMAT, 1, label)?;
        let mut counts = vec![0u64; file.k_src * file.k_tgt];
        for (s, t, c) in file.counts {
            if s >= file.k_src || t >= file.k_tgt {
                return Err(Error::format(label, 1, "count triple out of range"));
            }
            counts[s * file.k_tgt + t] = c;
        }
        let a = TopicAlignment::from_counts(file.k_src, file.k_tgt, counts)?;
        if a.projection != file.projection || a.fallback != file.fallback {
            return Err(Error::format(label, 1, "projection does not match counts"));
        }
        Ok(a)
    }
}

/// Counts dominant-topic co-occurrences over parallel section pairs.
///
/// Pair `i` infers its source side with seed stream `2i` and its target side
/// with stream `2i + 1` of `cfg.seed`.
pub fn build_alignment(
    pairs: &[(Unit, Unit)],
    src_model: &TopicModel,
    tgt_model: &TopicModel,
    cfg: &InferConfig,
) -> Result<TopicAlignment> {
    if pairs.is_empty() {
        return Err(Error::config("topic alignment needs at least one parallel section pair"));
    }
    let (k_src, k_tgt) = (src_model.k(), tgt_model.k());
    let mut counts = vec![0u64; k_src * k_tgt];
    for (i, (su, tu)) in pairs.iter().enumerate() {
        let i = i as u64;
        let s_cfg = InferConfig { iterations: cfg.iterations, seed: seed::derive(cfg.seed, 2 * i) };
        let t_cfg = InferConfig { iterations: cfg.iterations, seed: seed::derive(cfg.seed, 2 * i + 1) };
        let s = dominant_topic(&infer_topics(src_model, su, &s_cfg).probs);
        let t = dominant_topic(&infer_topics(tgt_model, tu, &t_cfg).probs);
        counts[s * k_tgt + t] += 1;
    }
    TopicAlignment::from_counts(k_src, k_tgt, counts)
}

/// Target topic for `src_topic`.
pub fn project_topic(alignment: &TopicAlignment, src_topic: usize) -> Result<usize> {
    alignment
        .projection
        .get(src_topic)
        .copied()
        .ok_or_else(|| Error::input(format!("source topic {src_topic} out of range 0..{}", alignment.k_src)))
}
