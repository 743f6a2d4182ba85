use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{LdaConfig, TopicModel, Unit, Vocab};
use crate::error::{Error, Result};
use crate::seed;

/// Collapsed Gibbs sampler state.
///
/// Each token's topic is resampled with
/// p(z = k) ∝ (n_uk + α) · (n_kw + β) / (n_k + Vβ), counts excluding the token.
pub struct LdaSampler {
    cfg: LdaConfig,
    vocab: Vocab,
    units: Vec<Unit>,
    docs: Vec<Vec<u32>>,
    z: Vec<Vec<u32>>,
    topic_word: Vec<u32>,
    topic_totals: Vec<u64>,
    unit_topic: Vec<Vec<u32>>,
    rng: ChaCha8Rng,
    cumulative: Vec<f64>,
    sweeps: usize,
}

impl LdaSampler {
    /// Builds the vocabulary and draws a uniform initial assignment.
    pub fn new(units: &[Unit], cfg: &LdaConfig) -> Result<Self> {
        cfg.validate()?;
        if units.is_empty() {
            return Err(Error::config("cannot train a topic model on zero units"));
        }
        let k = cfg.k;
        let mut vocab = Vocab::default();
        let docs: Vec<Vec<u32>> = units
            .iter()
            .map(|u| u.bag.iter().map(|w| vocab.intern(w)).collect())
            .collect();
        let v = vocab.len();
        let mut rng = seed::rng(cfg.seed);
        let mut topic_word = vec![0u32; k * v];
        let mut topic_totals = vec![0u64; k];
        let mut unit_topic = vec![vec![0u32; k]; docs.len()];
        let mut z = Vec::with_capacity(docs.len());
        for (u, doc) in docs.iter().enumerate() {
            let zu: Vec<u32> = doc
                .iter()
                .map(|&w| {
                    let t = rng.random_range(0..k);
                    topic_word[t * v + w as usize] += 1;
                    topic_totals[t] += 1;
                    unit_topic[u][t] += 1;
                    t as u32
                })
                .collect();
            z.push(zu);
        }
        Ok(LdaSampler {
            cfg: cfg.clone(),
            vocab,
            units: units.to_vec(),
            docs,
            z,
            topic_word,
            topic_totals,
            unit_topic,
            rng,
            cumulative: vec![0.0; k],
            sweeps: 0,
        })
    }

    /// One full pass over every token.
    pub fn sweep(&mut self) {
        let k_topics = self.cfg.k;
        let v = self.vocab.len();
        let alpha = self.cfg.alpha;
        let beta = self.cfg.beta;
        let v_beta = v as f64 * beta;
        for u in 0..self.docs.len() {
            for i in 0..self.docs[u].len() {
                let w = self.docs[u][i] as usize;
                let old = self.z[u][i] as usize;
                self.topic_word[old * v + w] -= 1;
                self.topic_totals[old] -= 1;
                self.unit_topic[u][old] -= 1;

                let mut acc = 0.0;
                for k in 0..k_topics {
                    acc += (self.unit_topic[u][k] as f64 + alpha) * (self.topic_word[k * v + w] as f64 + beta)
                        / (self.topic_totals[k] as f64 + v_beta);
                    self.cumulative[k] = acc;
                }
                let r = self.rng.random::<f64>() * acc;
                let new = self.cumulative.partition_point(|&c| c <= r).min(k_topics - 1);

                self.topic_word[new * v + w] += 1;
                self.topic_totals[new] += 1;
                self.unit_topic[u][new] += 1;
                self.z[u][i] = new as u32;
            }
        }
        self.sweeps += 1;
    }

    pub fn sweeps_done(&self) -> usize {
        self.sweeps
    }

    /// Count-consistency check over the current state.
    pub fn check_invariants(&self) -> Result<()> {
        let v = self.vocab.len();
        for k in 0..self.cfg.k {
            let row: u64 = self.topic_word[k * v..(k + 1) * v].iter().map(|&c| u64::from(c)).sum();
            if row != self.topic_totals[k] {
                return Err(Error::Invariant(format!("topic {k}: Σ_w n_kw = {row}, n_k = {}", self.topic_totals[k])));
            }
        }
        for (u, row) in self.unit_topic.iter().enumerate() {
            let s: usize = row.iter().map(|&c| c as usize).sum();
            if s != self.docs[u].len() {
                return Err(Error::Invariant(format!("unit {u}: Σ_k n_uk = {s}, |bag| = {}", self.docs[u].len())));
            }
        }
        Ok(())
    }

    pub fn into_model(self) -> TopicModel {
        TopicModel {
            config: self.cfg,
            vocab: self.vocab,
            topic_word_counts: self.topic_word,
            topic_totals: self.topic_totals,
            unit_topic_counts: Some(self.unit_topic),
            unit_ids: Some(self.units.into_iter().map(|u| u.id).collect()),
        }
    }
}

/// Trains LDA with `cfg.iterations` collapsed Gibbs sweeps; the model keeps
/// the counts of the final sweep.
pub fn train_lda(units: &[Unit], cfg: &LdaConfig) -> Result<TopicModel> {
    let mut sampler = LdaSampler::new(units, cfg)?;
    for _ in 0..cfg.iterations {
        sampler.sweep();
    }
    Ok(sampler.into_model())
}
