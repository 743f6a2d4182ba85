use std::collections::HashMap;
use std::ops::AddAssign;

use crate::error::{Error, Result};

use super::tokenize_13a;

pub const MAX_ORDER: usize = 4;

/// Sufficient statistics of one hypothesis/reference pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BleuStats {
    pub matches: [u64; MAX_ORDER],
    pub totals: [u64; MAX_ORDER],
    pub hyp_len: u64,
    pub ref_len: u64,
}

impl AddAssign<&BleuStats> for BleuStats {
    fn add_assign(&mut self, other: &BleuStats) {
        for n in 0..MAX_ORDER {
            self.matches[n] += other.matches[n];
            self.totals[n] += other.totals[n];
        }
        self.hyp_len += other.hyp_len;
        self.ref_len += other.ref_len;
    }
}

fn ngram_counts<S: AsRef<str>>(tokens: &[S], n: usize) -> HashMap<Vec<&str>, u64> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            let key: Vec<&str> = w.iter().map(AsRef::as_ref).collect();
            *counts.entry(key).or_insert(0) += 1;
        }
    }
    counts
}

impl BleuStats {
    /// Clipped n-gram statistics for a single reference.
    pub fn from_tokens<S: AsRef<str>, T: AsRef<str>>(hyp: &[S], reference: &[T]) -> Self {
        let mut stats = BleuStats {
            hyp_len: hyp.len() as u64,
            ref_len: reference.len() as u64,
            ..Default::default()
        };
        for n in 1..=MAX_ORDER {
            let h = ngram_counts(hyp, n);
            let r = ngram_counts(reference, n);
            stats.totals[n - 1] = hyp.len().saturating_sub(n - 1) as u64;
            stats.matches[n - 1] = h
                .iter()
                .map(|(g, &c)| c.min(r.get(g).copied().unwrap_or(0)))
                .sum();
        }
        stats
    }

    pub fn brevity_penalty(&self) -> f64 {
        if self.hyp_len >= self.ref_len {
            1.0
        } else if self.hyp_len == 0 {
            0.0
        } else {
            (1.0 - self.ref_len as f64 / self.hyp_len as f64).exp()
        }
    }

    pub fn report(&self) -> BleuReport {
        let mut precisions = [0.0; MAX_ORDER];
        for n in 0..MAX_ORDER {
            if self.totals[n] > 0 {
                precisions[n] = self.matches[n] as f64 / self.totals[n] as f64;
            }
        }
        let bp = self.brevity_penalty();
        let score = if precisions.iter().any(|&p| p == 0.0) {
            0.0
        } else {
            let mean_log = precisions.iter().map(|p| p.ln()).sum::<f64>() / MAX_ORDER as f64;
            100.0 * bp * mean_log.exp()
        };
        BleuReport {
            score,
            precisions,
            brevity_penalty: bp,
            hyp_len: self.hyp_len,
            ref_len: self.ref_len,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BleuReport {
    /// Score in [0, 100].
    pub score: f64,
    /// Modified n-gram precisions as fractions.
    pub precisions: [f64; MAX_ORDER],
    pub brevity_penalty: f64,
    pub hyp_len: u64,
    pub ref_len: u64,
}

impl BleuReport {
    /// Line-oriented `key: value` rendering.
    pub fn to_kv(&self) -> String {
        let p: Vec<String> = self.precisions.iter().map(|p| format!("{:.6}", p * 100.0)).collect();
        format!(
            "bleu: {:.4}\nprecisions: {}\nbrevity_penalty: {:.6}\nhyp_len: {}\nref_len: {}\n",
            self.score,
            p.join("/"),
            self.brevity_penalty,
            self.hyp_len,
            self.ref_len
        )
    }
}

/// Corpus BLEU over pre-tokenised sentences.
pub fn corpus_bleu_tokens<S: AsRef<str>, T: AsRef<str>>(hyps: &[Vec<S>], refs: &[Vec<T>]) -> Result<BleuReport> {
    if hyps.len() != refs.len() {
        return Err(Error::input(format!(
            "hypothesis count {} differs from reference count {}",
            hyps.len(),
            refs.len()
        )));
    }
    if hyps.is_empty() {
        return Err(Error::input("empty corpus"));
    }
    let mut total = BleuStats::default();
    for (h, r) in hyps.iter().zip(refs) {
        total += &BleuStats::from_tokens(h, r);
    }
    Ok(total.report())
}

/// Corpus BLEU of detokenised strings, tokenised with the 13a rules.
pub fn corpus_bleu<S: AsRef<str>, T: AsRef<str>>(hyps: &[S], refs: &[T]) -> Result<BleuReport> {
    let h: Vec<Vec<String>> = hyps.iter().map(|s| tokenize_13a(s.as_ref())).collect();
    let r: Vec<Vec<String>> = refs.iter().map(|s| tokenize_13a(s.as_ref())).collect();
    corpus_bleu_tokens(&h, &r)
}

/// Sentence BLEU in [0, 1] with add-one smoothing on every precision.
///
/// Used as a similarity for sentence alignment; corpus BLEU is unsmoothed.
pub fn sentence_bleu_smoothed<S: AsRef<str>, T: AsRef<str>>(hyp: &[S], reference: &[T]) -> f64 {
    if hyp.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let stats = BleuStats::from_tokens(hyp, reference);
    let mean_log = (0..MAX_ORDER)
        .map(|n| ((stats.matches[n] + 1) as f64 / (stats.totals[n] + 1) as f64).ln())
        .sum::<f64>()
        / MAX_ORDER as f64;
    (stats.brevity_penalty() * mean_log.exp()).clamp(0.0, 1.0)
}
