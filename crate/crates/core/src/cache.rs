//! Topic cache and dynamic cache for one decoding session.
//!
//! The topic cache holds the BPE-segmented most probable words of the
//! projected target topic and is fixed for a unit. The dynamic cache collects
//! unique content tokens of the sentences already completed in the current
//! unit, evicting the oldest first. Both are cleared and reloaded when the
//! unit changes.

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::bpe::MergeTable;
use crate::error::{Error, Result};
use crate::lang;
use crate::topics::{TopicModel, UnitId};

pub const DEFAULT_CAPACITY: usize = 100;
pub const DUMP_FORMAT: &str = "sectionmt.cache-dump";

/// Passes a token iff it is not a stopword or it is a retained exception.
#[derive(Debug, Clone, Default)]
pub struct StopwordFilter {
    pub stopwords: HashSet<String>,
    pub retained_exceptions: HashSet<String>,
}

impl StopwordFilter {
    pub fn new(stopwords: HashSet<String>, retained_exceptions: HashSet<String>) -> Self {
        StopwordFilter { stopwords, retained_exceptions }
    }

    pub fn for_lang(lang: &str) -> Self {
        Self::new(lang::stopwords(lang), lang::retained_exceptions())
    }

    pub fn passes(&self, token: &str) -> bool {
        let t = token.to_lowercase();
        !self.stopwords.contains(&t) || self.retained_exceptions.contains(&t)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicCache {
    entries: Vec<String>,
    capacity: usize,
    topic: Option<usize>,
}

impl TopicCache {
    pub fn empty(capacity: usize) -> Self {
        TopicCache { entries: Vec::new(), capacity, topic: None }
    }

    pub fn entries(&self) -> &[String] {
        &self.entries
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn topic(&self) -> Option<usize> {
        self.topic
    }
}

/// Fills a topic cache with the segmented top words of `topic`, skipping
/// subwords already present, until `capacity` subwords are held.
pub fn load_topic_cache(model: &TopicModel, topic: usize, capacity: usize, merges: &MergeTable) -> Result<TopicCache> {
    if capacity == 0 {
        return Err(Error::config("topic cache capacity must be at least 1"));
    }
    let mut entries: Vec<String> = Vec::with_capacity(capacity);
    let mut seen = HashSet::new();
    'words: for (word, _) in model.top_words(topic, model.vocab_size())? {
        for sub in merges.apply(&word) {
            if entries.len() == capacity {
                break 'words;
            }
            if seen.insert(sub.clone()) {
                entries.push(sub);
            }
        }
        if entries.len() == capacity {
            break;
        }
    }
    Ok(TopicCache { entries, capacity, topic: Some(topic) })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DynamicCache {
    entries: VecDeque<String>,
    capacity: usize,
}

impl DynamicCache {
    pub fn new(capacity: usize) -> Self {
        DynamicCache { entries: VecDeque::with_capacity(capacity), capacity }
    }

    pub fn entries(&self) -> impl Iterator<Item = &String> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    /// Adds the content tokens of one completed sentence. Tokens already
    /// cached are skipped; the oldest entries are evicted past capacity.
    pub fn update<S: AsRef<str>>(&mut self, sentence_tokens: &[S], filter: &StopwordFilter) {
        for t in sentence_tokens {
            let t = t.as_ref();
            if !filter.passes(t) || self.entries.iter().any(|e| e == t) {
                continue;
            }
            self.entries.push_back(t.to_string());
            while self.entries.len() > self.capacity {
                self.entries.pop_front();
            }
        }
    }
}

/// Functional form of [`DynamicCache::update`].
pub fn update_dynamic<S: AsRef<str>>(cache: &DynamicCache, sentence_tokens: &[S], filter: &StopwordFilter) -> DynamicCache {
    let mut next = cache.clone();
    next.update(sentence_tokens, filter);
    next
}

/// Loads topic caches for a target model and merge table.
#[derive(Debug, Clone, Copy)]
pub struct TopicCacheLoader<'a> {
    pub model: &'a TopicModel,
    pub merges: &'a MergeTable,
    pub capacity: usize,
}

impl TopicCacheLoader<'_> {
    pub fn load(&self, topic: usize) -> Result<TopicCache> {
        load_topic_cache(self.model, topic, self.capacity, self.merges)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheState {
    pub topic_cache: TopicCache,
    pub dynamic_cache: DynamicCache,
    pub unit_id: Option<UnitId>,
}

impl CacheState {
    pub fn new(topic_capacity: usize, dynamic_capacity: usize) -> Self {
        CacheState {
            topic_cache: TopicCache::empty(topic_capacity),
            dynamic_cache: DynamicCache::new(dynamic_capacity),
            unit_id: None,
        }
    }

    /// Empties the dynamic cache and installs a fresh topic cache for `unit`.
    pub fn reset_for_unit(&mut self, unit: UnitId, topic_cache: TopicCache) {
        self.dynamic_cache.clear();
        self.topic_cache = topic_cache;
        self.unit_id = Some(unit);
    }

    /// Topic entries then dynamic entries; a token in both keeps only its
    /// topic-cache position.
    pub fn cache_words(&self) -> Vec<String> {
        let mut seen: HashSet<&str> = HashSet::new();
        let mut out = Vec::with_capacity(self.topic_cache.entries.len() + self.dynamic_cache.len());
        for t in self.topic_cache.entries.iter().chain(self.dynamic_cache.entries()) {
            if seen.insert(t.as_str()) {
                out.push(t.clone());
            }
        }
        out
    }
}

/// Functional form of [`CacheState::reset_for_unit`] that loads the topic
/// cache itself.
pub fn reset_for_unit(state: &CacheState, unit: UnitId, tgt_topic: usize, loader: &TopicCacheLoader<'_>) -> Result<CacheState> {
    let mut next = state.clone();
    next.reset_for_unit(unit, loader.load(tgt_topic)?);
    Ok(next)
}

pub fn cache_words(state: &CacheState) -> Vec<String> {
    state.cache_words()
}

/// One cache snapshot per sentence, taken before the sentence is decoded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheSnapshot {
    pub unit_id: String,
    pub topic_id: Option<usize>,
    pub topic_entries: Vec<String>,
    pub dynamic_entries: Vec<String>,
}

/// Drives a [`CacheState`] through a sequence of sentences.
///
/// [`CacheSession::begin_sentence`] resets the caches when the unit changes
/// and returns the words visible to the scorer; the dynamic cache only
/// changes in [`CacheSession::complete_sentence`], so the sentence being
/// decoded never sees its own tokens.
#[derive(Debug, Clone)]
pub struct CacheSession {
    state: CacheState,
    filter: StopwordFilter,
    in_sentence: bool,
    resets: usize,
}

impl CacheSession {
    pub fn new(topic_capacity: usize, dynamic_capacity: usize, filter: StopwordFilter) -> Self {
        CacheSession {
            state: CacheState::new(topic_capacity, dynamic_capacity),
            filter,
            in_sentence: false,
            resets: 0,
        }
    }

    pub fn state(&self) -> &CacheState {
        &self.state
    }

    /// Number of unit changes seen so far.
    pub fn resets(&self) -> usize {
        self.resets
    }

    /// Starts a sentence of `unit`. `load` is called for a new unit only.
    pub fn begin_sentence(&mut self, unit: &UnitId, load: impl FnOnce() -> Result<TopicCache>) -> Result<Vec<String>> {
        if self.in_sentence {
            return Err(Error::Invariant("previous sentence was not completed".into()));
        }
        if self.state.unit_id.as_ref() != Some(unit) {
            self.state.reset_for_unit(unit.clone(), load()?);
            self.resets += 1;
        }
        self.in_sentence = true;
        Ok(self.state.cache_words())
    }

    /// Feeds the finished sentence's target tokens to the dynamic cache.
    pub fn complete_sentence<S: AsRef<str>>(&mut self, tokens: &[S]) -> Result<()> {
        if !self.in_sentence {
            return Err(Error::Invariant("complete_sentence without begin_sentence".into()));
        }
        self.state.dynamic_cache.update(tokens, &self.filter);
        self.in_sentence = false;
        Ok(())
    }

    pub fn snapshot(&self) -> CacheSnapshot {
        CacheSnapshot {
            unit_id: self.state.unit_id.as_ref().map(|u| u.to_string()).unwrap_or_default(),
            topic_id: self.state.topic_cache.topic,
            topic_entries: self.state.topic_cache.entries.clone(),
            dynamic_entries: self.state.dynamic_cache.entries().cloned().collect(),
        }
    }
}
