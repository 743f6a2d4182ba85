//! Corpus, link and raw-document file formats.

use serde::{Deserialize, Serialize};

use super::{merge_sentences, AlignmentBead, Document, ParallelCorpus, Section, Sentence, SentencePair};
use crate::artifact::{from_jsonl, to_jsonl, Header};
use crate::error::{Error, Result};

pub const CORPUS_FORMAT: &str = "sectionmt.corpus";
pub const LINKS_FORMAT: &str = "sectionmt.links";
pub const RAW_FORMAT: &str = "sectionmt.raw";

/// One sentence per record; a document's records are contiguous and ordered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub doc_id: String,
    pub lang: String,
    pub section_index: usize,
    pub heading: String,
    pub sentence_index: usize,
    pub text: String,
}

/// One alignment bead between a source section and a target section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkRecord {
    pub doc_id: String,
    pub src_section: usize,
    pub src_span: (usize, usize),
    pub tgt_section: usize,
    pub tgt_span: (usize, usize),
    pub score: f64,
}

impl LinkRecord {
    pub fn from_bead(doc_id: &str, src_section: usize, tgt_section: usize, bead: &AlignmentBead) -> Self {
        LinkRecord {
            doc_id: doc_id.to_string(),
            src_section,
            src_span: (bead.src_span.start, bead.src_span.end),
            tgt_section,
            tgt_span: (bead.tgt_span.start, bead.tgt_span.end),
            score: bead.score,
        }
    }
}

/// Unparsed input article.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawDocument {
    pub doc_id: String,
    pub lang: String,
    #[serde(default)]
    pub categories: Vec<String>,
    pub text: String,
}

pub fn records(docs: &[Document]) -> Vec<SentenceRecord> {
    let mut out = Vec::new();
    for d in docs {
        for sec in &d.sections {
            for s in &sec.sentences {
                out.push(SentenceRecord {
                    doc_id: d.doc_id.clone(),
                    lang: d.lang.clone(),
                    section_index: sec.section_index,
                    heading: sec.heading.clone(),
                    sentence_index: s.sentence_index,
                    text: s.text.clone(),
                });
            }
        }
    }
    out
}

pub fn corpus_to_jsonl(docs: &[Document], config_hash: &str) -> Result<String> {
    to_jsonl(&Header::new(CORPUS_FORMAT, 1, config_hash), records(docs))
}

/// Rebuilds documents from sentence records. Sections without sentences are
/// restored as empty sections so indices stay contiguous.
pub fn documents_from_records(recs: Vec<SentenceRecord>, label: &str) -> Result<Vec<Document>> {
    let mut docs: Vec<Document> = Vec::new();
    for (i, r) in recs.into_iter().enumerate() {
        let line = i + 2;
        let new_doc = docs.last().is_none_or(|d| d.doc_id != r.doc_id);
        if new_doc {
            if docs.iter().any(|d| d.doc_id == r.doc_id) {
                return Err(Error::format(label, line, format!("records of {} are not contiguous", r.doc_id)));
            }
            docs.push(Document {
                doc_id: r.doc_id.clone(),
                lang: r.lang.clone(),
                categories: Vec::new(),
                sections: Vec::new(),
            });
        }
        let doc = docs.last_mut().expect("pushed above");
        let current = doc.sections.len().checked_sub(1);
        match current {
            Some(c) if r.section_index < c => {
                return Err(Error::format(label, line, "section_index decreases"));
            }
            Some(c) if r.section_index == c => {}
            _ => {
                while doc.sections.len() < r.section_index {
                    let idx = doc.sections.len();
                    doc.sections.push(Section { heading: String::new(), depth: 0, sentences: Vec::new(), section_index: idx });
                }
                doc.sections.push(Section {
                    heading: r.heading.clone(),
                    depth: 0,
                    sentences: Vec::new(),
                    section_index: r.section_index,
                });
            }
        }
        let sec = doc.sections.last_mut().expect("section exists");
        if r.sentence_index != sec.sentences.len() {
            return Err(Error::format(
                label,
                line,
                format!("expected sentence_index {}, found {}", sec.sentences.len(), r.sentence_index),
            ));
        }
        if r.text.trim().is_empty() {
            return Err(Error::format(label, line, "empty sentence text"));
        }
        sec.sentences.push(Sentence::new(r.text, r.doc_id, r.section_index, r.sentence_index));
    }
    Ok(docs)
}

pub fn corpus_from_jsonl(text: &str, label: &str) -> Result<Vec<Document>> {
    let (_, recs) = from_jsonl::<SentenceRecord>(text, label, CORPUS_FORMAT, 1)?;
    documents_from_records(recs, label)
}

pub fn links_to_jsonl(links: &[LinkRecord], config_hash: &str) -> Result<String> {
    to_jsonl(&Header::new(LINKS_FORMAT, 1, config_hash), links)
}

pub fn links_from_jsonl(text: &str, label: &str) -> Result<Vec<LinkRecord>> {
    Ok(from_jsonl(text, label, LINKS_FORMAT, 1)?.1)
}

pub fn raw_from_jsonl(text: &str, label: &str) -> Result<Vec<RawDocument>> {
    Ok(from_jsonl(text, label, RAW_FORMAT, 1)?.1)
}

pub fn raw_to_jsonl(docs: &[RawDocument], config_hash: &str) -> Result<String> {
    to_jsonl(&Header::new(RAW_FORMAT, 1, config_hash), docs)
}

fn section<'a>(docs: &'a [Document], doc_id: &str, idx: usize, side: &str) -> Result<&'a Section> {
    docs.iter()
        .find(|d| d.doc_id == doc_id)
        .ok_or_else(|| Error::input(format!("{side} corpus lacks document {doc_id}")))?
        .sections
        .get(idx)
        .ok_or_else(|| Error::input(format!("{side} document {doc_id} lacks section {idx}")))
}

/// Turns links into sentence pairs. Skip beads are dropped; multi-sentence
/// spans are merged.
pub fn materialize(src: &[Document], tgt: &[Document], links: &[LinkRecord]) -> Result<ParallelCorpus> {
    let mut pairs = Vec::new();
    for l in links {
        if l.src_span.0 == l.src_span.1 || l.tgt_span.0 == l.tgt_span.1 {
            continue;
        }
        let s = section(src, &l.doc_id, l.src_section, "source")?;
        let t = section(tgt, &l.doc_id, l.tgt_section, "target")?;
        let s_sents = s
            .sentences
            .get(l.src_span.0..l.src_span.1)
            .ok_or_else(|| Error::input(format!("source span {:?} out of range in {}", l.src_span, l.doc_id)))?;
        let t_sents = t
            .sentences
            .get(l.tgt_span.0..l.tgt_span.1)
            .ok_or_else(|| Error::input(format!("target span {:?} out of range in {}", l.tgt_span, l.doc_id)))?;
        pairs.push(SentencePair {
            src: merge_sentences(s_sents).expect("non-empty span"),
            tgt: merge_sentences(t_sents).expect("non-empty span"),
            src_span: l.src_span,
            tgt_span: l.tgt_span,
            score: l.score,
        });
    }
    Ok(ParallelCorpus { pairs })
}
