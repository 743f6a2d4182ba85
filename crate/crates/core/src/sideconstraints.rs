//! Source-side topic tags.
//!
//! Each source sentence is prefixed with `<topicN> `, where N is the dominant
//! topic of the unit (section or document) the sentence belongs to.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::corpus::{Document, Sentence};
use crate::error::{Error, Result};
use crate::seed;
use crate::topics::{infer_topics, units_for, Granularity, InferConfig, TopicModel};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedSentence {
    pub topic: usize,
    pub text: String,
}

pub fn topic_tag(topic: usize) -> String {
    format!("<topic{topic}>")
}

/// `"<topicN> " + text`.
pub fn tag_sentence(sentence: &Sentence, topic: usize) -> TaggedSentence {
    tag_text(&sentence.text, topic)
}

pub fn tag_text(text: &str, topic: usize) -> TaggedSentence {
    TaggedSentence {
        topic,
        text: format!("<topic{topic}> {text}"),
    }
}

/// Splits a leading `<topicN> ` tag off `text`. Untagged or malformed input
/// comes back unchanged with no topic.
pub fn untag(text: &str) -> (Option<usize>, &str) {
    let parsed = text.strip_prefix("<topic").and_then(|rest| {
        let close = rest.find('>')?;
        let digits = &rest[..close];
        let payload = rest[close + 1..].strip_prefix(' ')?;
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        Some((digits.parse::<usize>().ok()?, payload))
    });
    match parsed {
        Some((topic, payload)) => (Some(topic), payload),
        None => (None, text),
    }
}

#[derive(Debug, Clone)]
pub struct TagConfig {
    pub granularity: Granularity,
    pub infer: InferConfig,
    pub stopwords: HashSet<String>,
}

/// A tagged source sentence with its corpus position.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggedRecord {
    pub doc_id: String,
    pub section_index: usize,
    pub sentence_index: usize,
    pub tagged: TaggedSentence,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TaggedCorpus {
    pub sentences: Vec<TaggedRecord>,
    pub warnings: Vec<String>,
}

/// Tags every sentence with the dominant topic of its unit.
///
/// Unit `i` (in corpus order) is inferred with seed stream `i` of
/// `cfg.infer.seed`. Units without known words fall back to the uniform
/// distribution, whose dominant topic is 0, and produce a warning.
pub fn tag_corpus(docs: &[Document], model: &TopicModel, cfg: &TagConfig) -> Result<TaggedCorpus> {
    if model.config.granularity != cfg.granularity {
        return Err(Error::config(format!(
            "model was trained on {} units but tagging requested {}",
            model.config.granularity, cfg.granularity
        )));
    }
    let units = units_for(docs, cfg.granularity, &cfg.stopwords);
    let mut out = TaggedCorpus::default();
    let mut next_unit = units.iter().enumerate();
    let mut infer_next = |warn: bool, warnings: &mut Vec<String>| -> usize {
        let (i, unit) = next_unit.next().expect("one unit per section or document");
        let icfg = InferConfig {
            iterations: cfg.infer.iterations,
            seed: seed::derive(cfg.infer.seed, i as u64),
        };
        let dist = infer_topics(model, unit, &icfg);
        if dist.flagged && warn {
            warnings.push(format!("unit {} has no known words; tagged with uniform topic", unit.id));
        }
        dist.dominant()
    };
    for d in docs {
        let doc_topic = match cfg.granularity {
            Granularity::Document => Some(infer_next(d.sentence_count() > 0, &mut out.warnings)),
            Granularity::Section => None,
        };
        for sec in &d.sections {
            let topic = match doc_topic {
                Some(t) => t,
                None => infer_next(!sec.sentences.is_empty(), &mut out.warnings),
            };
            for s in &sec.sentences {
                out.sentences.push(TaggedRecord {
                    doc_id: d.doc_id.clone(),
                    section_index: sec.section_index,
                    sentence_index: s.sentence_index,
                    tagged: tag_sentence(s, topic),
                });
            }
        }
    }
    Ok(out)
}
