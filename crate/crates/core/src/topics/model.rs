use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{LdaConfig, Unit, UnitId};
use crate::artifact::Header;
use crate::error::{Error, Result};
use crate::seed;

pub const MODEL_FORMAT: &str = "sectionmt.lda";

/// Word ↔ id map; ids follow first occurrence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocab {
    words: Vec<String>,
    ids: HashMap<String, u32>,
}

impl Vocab {
    pub fn from_words(words: Vec<String>) -> Result<Self> {
        let mut ids = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if ids.insert(w.clone(), i as u32).is_some() {
                return Err(Error::input(format!("duplicate vocabulary entry {w:?}")));
            }
        }
        Ok(Vocab { words, ids })
    }

    pub fn intern(&mut self, word: &str) -> u32 {
        if let Some(&id) = self.ids.get(word) {
            return id;
        }
        let id = self.words.len() as u32;
        self.words.push(word.to_string());
        self.ids.insert(word.to_string(), id);
        id
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.ids.get(word).copied()
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Per-unit topic proportions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicDistribution {
    pub probs: Vec<f64>,
    /// Set when the unit had no known words and the distribution is uniform.
    pub flagged: bool,
}

impl TopicDistribution {
    pub fn uniform(k: usize) -> Self {
        TopicDistribution {
            probs: vec![1.0 / k as f64; k],
            flagged: true,
        }
    }

    pub fn dominant(&self) -> usize {
        dominant_topic(&self.probs)
    }

    pub fn entropy(&self) -> f64 {
        -self.probs.iter().filter(|&&p| p > 0.0).map(|p| p * p.ln()).sum::<f64>()
    }
}

/// Index of the largest score; ties go to the lowest index.
pub fn dominant_topic(scores: &[f64]) -> usize {
    let mut best = 0;
    for (k, &p) in scores.iter().enumerate() {
        if p > scores[best] {
            best = k;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InferConfig {
    pub iterations: usize,
    pub seed: u64,
}

impl Default for InferConfig {
    fn default() -> Self {
        InferConfig { iterations: 100, seed: 0 }
    }
}

/// Trained topic–word counts plus the vocabulary and configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    pub config: LdaConfig,
    pub vocab: Vocab,
    /// Row-major K × V.
    pub topic_word_counts: Vec<u32>,
    pub topic_totals: Vec<u64>,
    /// Unit–topic counts of the final sweep; only present after training.
    pub unit_topic_counts: Option<Vec<Vec<u32>>>,
    pub unit_ids: Option<Vec<UnitId>>,
}

#[derive(Serialize, Deserialize)]
struct ConfigLine {
    config: LdaConfig,
}

#[derive(Serialize, Deserialize)]
struct VocabLine {
    vocab: Vec<String>,
}

impl TopicModel {
    pub fn k(&self) -> usize {
        self.config.k
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn count(&self, topic: usize, word: u32) -> u32 {
        self.topic_word_counts[topic * self.vocab.len() + word as usize]
    }

    /// Smoothed topic–word probability (n_kw + β) / (n_k + Vβ).
    pub fn phi(&self, topic: usize, word: u32) -> f64 {
        let beta = self.config.beta;
        (self.count(topic, word) as f64 + beta) / (self.topic_totals[topic] as f64 + self.vocab.len() as f64 * beta)
    }

    /// Checks Σ_w n_kw = n_k and, when present, Σ_k n_uk = |bag(u)|.
    pub fn check_counts(&self, bag_sizes: Option<&[usize]>) -> Result<()> {
        let v = self.vocab.len();
        if self.topic_word_counts.len() != self.k() * v || self.topic_totals.len() != self.k() {
            return Err(Error::Invariant("count table shape does not match K × V".into()));
        }
        for k in 0..self.k() {
            let row: u64 = self.topic_word_counts[k * v..(k + 1) * v].iter().map(|&c| u64::from(c)).sum();
            if row != self.topic_totals[k] {
                return Err(Error::Invariant(format!("topic {k}: row sum {row} != total {}", self.topic_totals[k])));
            }
        }
        if let (Some(sizes), Some(ut)) = (bag_sizes, &self.unit_topic_counts) {
            for (u, (row, &n)) in ut.iter().zip(sizes).enumerate() {
                let s: u64 = row.iter().map(|&c| u64::from(c)).sum();
                if s != n as u64 {
                    return Err(Error::Invariant(format!("unit {u}: topic counts sum {s} != bag size {n}")));
                }
            }
        }
        Ok(())
    }

    /// Training-set unit distributions (n_uk + α) / Σ_k (n_uk + α).
    pub fn unit_distributions(&self) -> Option<Vec<TopicDistribution>> {
        let alpha = self.config.alpha;
        self.unit_topic_counts.as_ref().map(|rows| {
            rows.iter()
                .map(|row| {
                    let total: f64 = row.iter().map(|&c| c as f64 + alpha).sum();
                    TopicDistribution {
                        probs: row.iter().map(|&c| (c as f64 + alpha) / total).collect(),
                        flagged: false,
                    }
                })
                .collect()
        })
    }

    /// The `n` most probable words of `topic`, ties broken by word id.
    pub fn top_words(&self, topic: usize, n: usize) -> Result<Vec<(String, f64)>> {
        if topic >= self.k() {
            return Err(Error::input(format!("topic {topic} out of range 0..{}", self.k())));
        }
        let v = self.vocab.len();
        let row = &self.topic_word_counts[topic * v..(topic + 1) * v];
        let mut ids: Vec<u32> = (0..v as u32).collect();
        ids.sort_by(|&a, &b| row[b as usize].cmp(&row[a as usize]).then(a.cmp(&b)));
        Ok(ids
            .into_iter()
            .take(n)
            .map(|w| (self.vocab.word(w).to_string(), self.phi(topic, w)))
            .collect())
    }

    /// Writes the model as line-oriented JSON: header, config, vocabulary,
    /// then one `[topic, word_id, count]` triple per non-zero count.
    pub fn to_text(&self, config_hash: &str) -> Result<String> {
        let mut out = serde_json::to_string(&Header::new(MODEL_FORMAT, 1, config_hash))?;
        out.push('\n');
        out.push_str(&serde_json::to_string(&ConfigLine { config: self.config.clone() })?);
        out.push('\n');
        out.push_str(&serde_json::to_string(&VocabLine { vocab: self.vocab.words().to_vec() })?);
        out.push('\n');
        let v = self.vocab.len();
        for (i, &c) in self.topic_word_counts.iter().enumerate() {
            if c > 0 {
                out.push_str(&format!("[{},{},{}]\n", i / v, i % v, c));
            }
        }
        Ok(out)
    }

    pub fn from_text(text: &str, label: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let mut next = |what: &str| {
            lines
                .next()
                .map(|(i, l)| (i + 1, l))
                .ok_or_else(|| Error::format(label, 0, format!("missing {what}")))
        };
        let (n, line) = next("header")?;
        let header: Header = serde_json::from_str(line).map_err(|e| Error::format(label, n, e.to_string()))?;
        header.expect(MODEL_FORMAT, 1, label)?;
        let (n, line) = next("config")?;
        let config = serde_json::from_str::<ConfigLine>(line).map_err(|e| Error::format(label, n, e.to_string()))?.config;
        config.validate()?;
        let (n, line) = next("vocabulary")?;
        let words = serde_json::from_str::<VocabLine>(line).map_err(|e| Error::format(label, n, e.to_string()))?.vocab;
        let vocab = Vocab::from_words(words).map_err(|e| Error::format(label, n, e.to_string()))?;
        let v = vocab.len();
        let mut counts = vec![0u32; config.k * v];
        let mut totals = vec![0u64; config.k];
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let [k, w, c]: [u64; 3] = serde_json::from_str(line).map_err(|e| Error::format(label, i + 1, e.to_string()))?;
            let (k, w) = (k as usize, w as usize);
            if k >= config.k || w >= v || c == 0 || c > u64::from(u32::MAX) {
                return Err(Error::format(label, i + 1, "count triple out of range"));
            }
            counts[k * v + w] = c as u32;
            totals[k] += c;
        }
        Ok(TopicModel {
            config,
            vocab,
            topic_word_counts: counts,
            topic_totals: totals,
            unit_topic_counts: None,
            unit_ids: None,
        })
    }
}

/// Topic proportions of `unit` under a trained model.
///
/// Gibbs sampling over the unit's tokens with topic–word counts held fixed;
/// unknown words are skipped. Returns (n_uk + α) / Σ_k (n_uk + α), or a
/// flagged uniform distribution when no word is known.
pub fn infer_topics(model: &TopicModel, unit: &Unit, cfg: &InferConfig) -> TopicDistribution {
    let k_topics = model.k();
    let words: Vec<u32> = unit.bag.iter().filter_map(|w| model.vocab.id(w)).collect();
    if words.is_empty() {
        return TopicDistribution::uniform(k_topics);
    }
    let alpha = model.config.alpha;
    let v_beta = model.vocab_size() as f64 * model.config.beta;
    let mut rng = seed::rng(cfg.seed);
    let mut z: Vec<usize> = words.iter().map(|_| rng.random_range(0..k_topics)).collect();
    let mut unit_counts = vec![0u32; k_topics];
    for &k in &z {
        unit_counts[k] += 1;
    }
    let denom: Vec<f64> = model.topic_totals.iter().map(|&t| t as f64 + v_beta).collect();
    let mut cumulative = vec![0.0; k_topics];
    for _ in 0..cfg.iterations {
        for (i, &w) in words.iter().enumerate() {
            unit_counts[z[i]] -= 1;
            let mut acc = 0.0;
            for k in 0..k_topics {
                acc += (unit_counts[k] as f64 + alpha) * (model.count(k, w) as f64 + model.config.beta) / denom[k];
                cumulative[k] = acc;
            }
            let u = rng.random::<f64>() * acc;
            let k_new = cumulative.partition_point(|&c| c <= u).min(k_topics - 1);
            z[i] = k_new;
            unit_counts[k_new] += 1;
        }
    }
    let total: f64 = unit_counts.iter().map(|&c| c as f64 + alpha).sum();
    TopicDistribution {
        probs: unit_counts.iter().map(|&c| (c as f64 + alpha) / total).collect(),
        flagged: false,
    }
}
