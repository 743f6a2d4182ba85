//! Target-side decoding streams shared by scorer training and cache runs.

use std::collections::{BTreeSet, HashMap};

use crate::bpe::MergeTable;
use crate::cache::{load_topic_cache, CacheSession, CacheSnapshot, StopwordFilter, TopicCache};
use crate::corpus::io::LinkRecord;
use crate::corpus::Document;
use crate::seed::{derive, fnv1a};
use crate::topics::{dominant_topic, infer_topics, units_for, Granularity, InferConfig, TopicModel, Unit, UnitId};
use crate::xalign::{project_topic, TopicAlignment};
use crate::{Error, Result};

/// One target sentence (or merged bead span) to decode.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeSentence {
    pub unit: UnitId,
    pub src_unit: UnitId,
    pub doc_id: String,
    pub tgt_section: usize,
    pub tgt_span: (usize, usize),
    /// Lowercased, BPE-segmented target tokens.
    pub tokens: Vec<String>,
}

/// Lowercases tokens and segments them.
pub(crate) fn lower_bpe(tokens: &[String], merges: &MergeTable) -> Vec<String> {
    let lower: Vec<String> = tokens.iter().map(|t| t.to_lowercase()).collect();
    merges.apply_tokens(&lower)
}

fn unit_of(doc_id: &str, section: usize, granularity: Granularity) -> UnitId {
    match granularity {
        Granularity::Section => UnitId::new(doc_id, Some(section)),
        Granularity::Document => UnitId::new(doc_id, None),
    }
}

/// Target sides of the non-skip links, in link order.
pub(crate) fn decode_stream(
    tgt_docs: &[Document],
    links: &[LinkRecord],
    merges: &MergeTable,
    granularity: Granularity,
) -> Result<Vec<DecodeSentence>> {
    let by_id: HashMap<&str, &Document> = tgt_docs.iter().map(|d| (d.doc_id.as_str(), d)).collect();
    let mut out = Vec::new();
    for l in links {
        if l.src_span.0 == l.src_span.1 || l.tgt_span.0 == l.tgt_span.1 {
            continue;
        }
        let doc = by_id
            .get(l.doc_id.as_str())
            .ok_or_else(|| Error::input(format!("link refers to unknown target document {}", l.doc_id)))?;
        let sec = doc
            .sections
            .get(l.tgt_section)
            .ok_or_else(|| Error::input(format!("{} has no section {}", l.doc_id, l.tgt_section)))?;
        let sents = sec
            .sentences
            .get(l.tgt_span.0..l.tgt_span.1)
            .ok_or_else(|| Error::input(format!("target span {:?} out of range in {}", l.tgt_span, l.doc_id)))?;
        let raw: Vec<String> = sents.iter().flat_map(|s| s.tokens.iter().cloned()).collect();
        out.push(DecodeSentence {
            unit: unit_of(&l.doc_id, l.tgt_section, granularity),
            src_unit: unit_of(&l.doc_id, l.src_section, granularity),
            doc_id: l.doc_id.clone(),
            tgt_section: l.tgt_section,
            tgt_span: l.tgt_span,
            tokens: lower_bpe(&raw, merges),
        });
    }
    Ok(out)
}

/// Per-unit topic choices.
#[derive(Debug, Clone, Default)]
pub(crate) struct UnitTopics {
    pub gold: HashMap<UnitId, usize>,
    pub projected: HashMap<UnitId, usize>,
}

fn unit_seed(base: u64, side: u64, unit: &UnitId) -> u64 {
    derive(derive(base, side), fnv1a(unit.to_string().as_bytes()))
}

pub(crate) struct TopicInputs<'a> {
    pub src_units: &'a HashMap<UnitId, Unit>,
    pub tgt_units: &'a HashMap<UnitId, Unit>,
    pub src_model: &'a TopicModel,
    pub tgt_model: &'a TopicModel,
    pub alignment: &'a TopicAlignment,
    pub infer: InferConfig,
}

/// Gold (target-inferred) and projected (source-inferred, then mapped)
/// topics for every unit of the stream.
pub(crate) fn unit_topics(stream: &[DecodeSentence], inp: &TopicInputs<'_>) -> Result<UnitTopics> {
    let mut out = UnitTopics::default();
    let empty = |id: &UnitId| Unit { id: id.clone(), bag: Vec::new() };
    for s in stream {
        if out.gold.contains_key(&s.unit) {
            continue;
        }
        let tu = inp.tgt_units.get(&s.unit).cloned().unwrap_or_else(|| empty(&s.unit));
        let su = inp.src_units.get(&s.src_unit).cloned().unwrap_or_else(|| empty(&s.src_unit));
        let t_cfg = InferConfig { iterations: inp.infer.iterations, seed: unit_seed(inp.infer.seed, 1, &s.unit) };
        let s_cfg = InferConfig { iterations: inp.infer.iterations, seed: unit_seed(inp.infer.seed, 0, &s.src_unit) };
        let gold = dominant_topic(&infer_topics(inp.tgt_model, &tu, &t_cfg).probs);
        let src_topic = dominant_topic(&infer_topics(inp.src_model, &su, &s_cfg).probs);
        out.gold.insert(s.unit.clone(), gold);
        out.projected.insert(s.unit.clone(), project_topic(inp.alignment, src_topic)?);
    }
    Ok(out)
}

pub(crate) fn unit_map(docs: &[Document], granularity: Granularity, lang: &str) -> HashMap<UnitId, Unit> {
    units_for(docs, granularity, &crate::lang::stopwords(lang))
        .into_iter()
        .map(|u| (u.id.clone(), u))
        .collect()
}

/// Topic caches for every target topic.
pub(crate) fn all_topic_caches(model: &TopicModel, capacity: usize, merges: &MergeTable) -> Result<Vec<TopicCache>> {
    (0..model.k()).map(|t| load_topic_cache(model, t, capacity, merges)).collect()
}

/// Sorted vocabulary over the stream tokens and all topic-cache entries.
pub(crate) fn build_vocab(stream: &[DecodeSentence], caches: &[TopicCache]) -> Vec<String> {
    let mut set: BTreeSet<&str> = BTreeSet::new();
    for s in stream {
        set.extend(s.tokens.iter().map(String::as_str));
    }
    for c in caches {
        set.extend(c.entries().iter().map(String::as_str));
    }
    set.into_iter().map(str::to_string).collect()
}

pub(crate) fn index_of(vocab: &[String]) -> HashMap<&str, usize> {
    vocab.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect()
}

pub(crate) fn to_ids(tokens: &[String], index: &HashMap<&str, usize>) -> Result<Vec<usize>> {
    tokens
        .iter()
        .map(|t| index.get(t.as_str()).copied().ok_or_else(|| Error::input(format!("token {t:?} not in scorer vocabulary"))))
        .collect()
}

/// Walks the stream through a cache session. For each sentence, `decode`
/// receives the visible cache ids and returns the tokens that then enter
/// the dynamic cache.
pub(crate) fn replay(
    stream: &[DecodeSentence],
    topics: &HashMap<UnitId, usize>,
    caches: &[TopicCache],
    dynamic_capacity: usize,
    filter: StopwordFilter,
    index: &HashMap<&str, usize>,
    mut decode: impl FnMut(usize, &[usize], &CacheSnapshot) -> Result<Vec<String>>,
) -> Result<usize> {
    let topic_capacity = caches.first().map_or(1, TopicCache::capacity);
    let mut session = CacheSession::new(topic_capacity, dynamic_capacity, filter);
    for (i, s) in stream.iter().enumerate() {
        let topic = *topics
            .get(&s.unit)
            .ok_or_else(|| Error::Invariant(format!("no topic for unit {}", s.unit)))?;
        let words = session.begin_sentence(&s.unit, || {
            caches
                .get(topic)
                .cloned()
                .ok_or_else(|| Error::Invariant(format!("no topic cache for topic {topic}")))
        })?;
        let ids = to_ids(&words, index)?;
        let snap = session.snapshot();
        let produced = decode(i, &ids, &snap)?;
        session.complete_sentence(&produced)?;
    }
    Ok(session.resets())
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}
