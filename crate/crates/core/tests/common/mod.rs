#![allow(dead_code)]

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sectionmt::cache::{CacheSession, StopwordFilter, TopicCache};
use sectionmt::topics::{Unit, UnitId};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Units drawn from `classes` disjoint vocabularies of `vocab` words each.
/// Returns the units and their generating class.
pub fn class_units(n: usize, len: usize, classes: usize, vocab: usize, seed: u64) -> (Vec<Unit>, Vec<usize>) {
    let mut r = rng(seed);
    let mut units = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % classes;
        let bag = (0..len).map(|_| format!("c{c}v{}", r.random_range(0..vocab))).collect();
        units.push(Unit { id: UnitId::new(&format!("u{i}"), Some(0)), bag });
        labels.push(c);
    }
    (units, labels)
}

/// Best agreement between predicted and true labels over all relabelings.
pub fn purity(pred: &[usize], truth: &[usize], k: usize) -> f64 {
    let mut best = 0;
    for perm in permutations(k) {
        let hits = pred.iter().zip(truth).filter(|(p, t)| perm[**p] == **t).count();
        best = best.max(hits);
    }
    best as f64 / truth.len() as f64
}

pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// Label each predicted cluster with the true class it co-occurs with most.
pub fn majority_map(pred: &[usize], truth: &[usize], k_pred: usize, k_true: usize) -> Vec<Option<usize>> {
    let mut counts = vec![vec![0usize; k_true]; k_pred];
    for (&p, &t) in pred.iter().zip(truth) {
        counts[p][t] += 1;
    }
    counts
        .iter()
        .map(|row| {
            let total: usize = row.iter().sum();
            (total > 0).then(|| (0..k_true).max_by_key(|&t| (row[t], std::cmp::Reverse(t))).unwrap())
        })
        .collect()
}

/// Straightforward re-statement of the cache rules used as a test oracle.
pub struct CacheOracle {
    pub unit: Option<String>,
    pub topic: Vec<String>,
    pub dynamic: Vec<String>,
    pub capacity: usize,
}

impl CacheOracle {
    pub fn new(capacity: usize) -> Self {
        CacheOracle { unit: None, topic: Vec::new(), dynamic: Vec::new(), capacity }
    }

    pub fn begin(&mut self, unit: &str, topic_words: &[String]) -> Vec<String> {
        if self.unit.as_deref() != Some(unit) {
            self.unit = Some(unit.to_string());
            self.topic = topic_words.to_vec();
            self.dynamic.clear();
        }
        let mut out = self.topic.clone();
        for w in &self.dynamic {
            if !out.contains(w) {
                out.push(w.clone());
            }
        }
        out
    }

    pub fn complete(&mut self, tokens: &[String], is_content: impl Fn(&str) -> bool) {
        for t in tokens {
            if is_content(t) && !self.dynamic.contains(t) {
                self.dynamic.push(t.clone());
                if self.dynamic.len() > self.capacity {
                    self.dynamic.remove(0);
                }
            }
        }
    }
}

pub fn cache_filter() -> StopwordFilter {
    let stop: HashSet<String> = ["the", "of", "and", "she"].iter().map(|s| s.to_string()).collect();
    let keep: HashSet<String> = ["she"].iter().map(|s| s.to_string()).collect();
    StopwordFilter::new(stop, keep)
}

pub fn is_content(t: &str) -> bool {
    !matches!(t, "the" | "of" | "and")
}

fn topic_cache(entries: &[String], topic: usize) -> TopicCache {
    serde_json::from_value(serde_json::json!({ "entries": entries, "capacity": 4, "topic": topic })).unwrap()
}

/// One randomized session checked step by step against [`CacheOracle`].
pub fn cache_random_run(seed: u64) {
    let mut r = rng(seed);
    let cap = r.random_range(1..8);
    let words = ["the", "of", "and", "she", "a", "b", "c", "d", "e", "f", "g", "h", "i", "j"];
    let mut session = CacheSession::new(4, cap, cache_filter());
    let mut oracle = CacheOracle::new(cap);
    let mut unit = 0usize;
    let mut loads = 0usize;
    for _ in 0..r.random_range(1..30) {
        if r.random_bool(0.25) {
            unit = r.random_range(0..4);
        }
        // unit u's topic cache overlaps the sentence vocabulary
        let topic_words: Vec<String> = words[4 + unit..7 + unit].iter().map(|w| w.to_string()).collect();
        let topic = topic_cache(&topic_words, unit);
        let before = oracle.unit.clone();
        let seen = session
            .begin_sentence(&UnitId::new(&format!("u{unit}"), None), || {
                loads += 1;
                Ok(topic)
            })
            .unwrap();
        let expect = oracle.begin(&format!("u{unit}"), &topic_words);
        assert_eq!(seen, expect);
        if before.as_deref() != Some(format!("u{unit}").as_str()) {
            assert!(session.state().dynamic_cache.is_empty());
        }
        let toks: Vec<String> = (0..r.random_range(0..8)).map(|_| words[r.random_range(0..words.len())].to_string()).collect();
        session.complete_sentence(&toks).unwrap();
        oracle.complete(&toks, is_content);
        let got: Vec<String> = session.state().dynamic_cache.entries().cloned().collect();
        assert_eq!(got, oracle.dynamic);
        assert!(got.len() <= cap);
    }
    assert_eq!(loads, session.resets());
}

