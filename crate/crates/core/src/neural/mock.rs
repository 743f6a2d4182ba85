use std::collections::BTreeMap;

use super::scorer::DecoderContext;
use crate::seed::{derive, fnv1a};
use crate::{Error, Result};

/// Frozen stand-in for a translation model: an add-one-smoothed bigram
/// distribution plus hashed bag-of-features context vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct MockBaseModel {
    vocab_size: usize,
    d: usize,
    seed: u64,
    /// Row `vocab_size` is the sentence-start context.
    bigrams: Vec<BTreeMap<usize, u64>>,
    row_totals: Vec<u64>,
}

impl MockBaseModel {
    /// Estimates bigram counts from target sentences given as vocab ids.
    pub fn fit(targets: &[Vec<usize>], vocab_size: usize, d: usize, seed: u64) -> Result<Self> {
        if vocab_size == 0 || d == 0 {
            return Err(Error::config("mock model needs a non-empty vocabulary and d > 0"));
        }
        let mut bigrams = vec![BTreeMap::new(); vocab_size + 1];
        let mut row_totals = vec![0u64; vocab_size + 1];
        for sent in targets {
            let mut prev = vocab_size;
            for &tok in sent {
                if tok >= vocab_size {
                    return Err(Error::input(format!("token id {tok} out of range (V={vocab_size})")));
                }
                *bigrams[prev].entry(tok).or_insert(0) += 1;
                row_totals[prev] += 1;
                prev = tok;
            }
        }
        Ok(MockBaseModel { vocab_size, d, seed, bigrams, row_totals })
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn bigram_count(&self, prev: Option<usize>, next: usize) -> u64 {
        let row = prev.unwrap_or(self.vocab_size);
        self.bigrams[row].get(&next).copied().unwrap_or(0)
    }

    /// `(count(prev, w) + 1) / (count(prev, ·) + V)`; `None` is sentence start.
    pub fn p_nmt(&self, prev: Option<usize>) -> Vec<f64> {
        let row = prev.filter(|&p| p < self.vocab_size).unwrap_or(self.vocab_size);
        let denom = (self.row_totals[row] + self.vocab_size as u64) as f64;
        let mut p = vec![1.0 / denom; self.vocab_size];
        for (&w, &c) in &self.bigrams[row] {
            p[w] = (c + 1) as f64 / denom;
        }
        p
    }

    fn hashed(&self, role: &str, items: &[String]) -> Vec<f64> {
        let mut v = vec![0.0; self.d];
        if items.is_empty() {
            return v;
        }
        let salt = derive(self.seed, fnv1a(role.as_bytes()));
        for item in items {
            let h = fnv1a(&[&salt.to_le_bytes()[..], item.as_bytes()].concat());
            let idx = (h % self.d as u64) as usize;
            v[idx] += if h >> 63 == 0 { 1.0 } else { -1.0 };
        }
        let norm = (items.len() as f64).sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        v
    }

    /// Context vectors for the next position after `history` given the
    /// source words.
    pub fn context(&self, history: &[usize], source: &[String]) -> DecoderContext {
        let mut recent: Vec<String> = history.iter().rev().take(2).enumerate().map(|(i, t)| format!("p{i}:{t}")).collect();
        recent.push(format!("len:{}", history.len().min(16)));
        let prev: Vec<String> = history.iter().map(|t| t.to_string()).collect();
        DecoderContext {
            h_t: self.hashed("state", &recent),
            c_e: self.hashed("source", source),
            y_prev: self.hashed("prev", &prev),
        }
    }

    /// Context and base distribution for the next token.
    pub fn step(&self, history: &[usize], source: &[String]) -> (DecoderContext, Vec<f64>) {
        (self.context(history, source), self.p_nmt(history.last().copied()))
    }
}
