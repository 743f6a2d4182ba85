//! Structure-preserving corpora: documents made of flat sections of sentences.

mod align;
mod biography;
mod clean;
pub mod io;
mod split;
mod wikitext;

use serde::{Deserialize, Serialize};

pub use align::{align_sentences, total_score, AlignConfig, AlignmentBead, BeadKind, BleuSimilarity, Similarity};
pub use biography::{default_biography_keywords, is_biography};
pub use clean::{clean_parallel, CleanConfig};
pub use split::SentenceSplitter;
pub use wikitext::parse_wikitext_lite;

use crate::eval::tokenize_13a;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sentence {
    pub text: String,
    pub tokens: Vec<String>,
    pub doc_id: String,
    pub section_index: usize,
    /// Position within the section, starting at 0.
    pub sentence_index: usize,
}

impl Sentence {
    /// Builds a sentence and tokenises its text.
    pub fn new(text: impl Into<String>, doc_id: impl Into<String>, section_index: usize, sentence_index: usize) -> Self {
        let text = text.into();
        let tokens = tokenize_13a(&text);
        Sentence {
            text,
            tokens,
            doc_id: doc_id.into(),
            section_index,
            sentence_index,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section {
    /// Empty for the lead section.
    pub heading: String,
    /// Original heading depth (number of `=`); 0 for the lead. Not used by any logic.
    pub depth: u8,
    pub sentences: Vec<Sentence>,
    pub section_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub lang: String,
    pub categories: Vec<String>,
    pub sections: Vec<Section>,
}

impl Document {
    pub fn sentences(&self) -> impl Iterator<Item = &Sentence> {
        self.sections.iter().flat_map(|s| s.sentences.iter())
    }

    pub fn sentence_count(&self) -> usize {
        self.sections.iter().map(|s| s.sentences.len()).sum()
    }
}

/// A source/target sentence pair taken from one alignment bead. Multi-sentence
/// beads are merged into a single sentence on that side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentencePair {
    pub src: Sentence,
    pub tgt: Sentence,
    pub src_span: (usize, usize),
    pub tgt_span: (usize, usize),
    pub score: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParallelCorpus {
    pub pairs: Vec<SentencePair>,
}

/// Joins `sentences` into one sentence carrying the first one's position.
pub fn merge_sentences(sentences: &[Sentence]) -> Option<Sentence> {
    let first = sentences.first()?;
    let text = sentences.iter().map(|s| s.text.as_str()).collect::<Vec<_>>().join(" ");
    Some(Sentence {
        tokens: sentences.iter().flat_map(|s| s.tokens.iter().cloned()).collect(),
        text,
        doc_id: first.doc_id.clone(),
        section_index: first.section_index,
        sentence_index: first.sentence_index,
    })
}
