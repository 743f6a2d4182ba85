//! Seeded synthetic corpora with known section topics.

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::io::RawDocument;
use crate::corpus::{Document, Section, Sentence};
use crate::seed;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub k: usize,
    pub words_per_topic: usize,
    pub docs: usize,
    pub sections_per_doc: usize,
    pub sentences_per_section: usize,
    pub tokens_per_sentence: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            k: 5,
            words_per_topic: 20,
            docs: 40,
            sections_per_doc: 4,
            sentences_per_section: 4,
            tokens_per_sentence: 8,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("k", self.k),
            ("words_per_topic", self.words_per_topic),
            ("docs", self.docs),
            ("sections_per_doc", self.sections_per_doc),
            ("sentences_per_section", self.sentences_per_section),
            ("tokens_per_sentence", self.tokens_per_sentence),
        ];
        match fields.iter().find(|(_, v)| *v == 0) {
            Some((name, _)) => Err(Error::config(format!("synth.{name} must be positive"))),
            None => Ok(()),
        }
    }
}

/// Documents plus the generating topic of every section.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCorpus {
    pub docs: Vec<Document>,
    /// `topics[d][s]` is the topic of section `s` of document `d`.
    pub topics: Vec<Vec<usize>>,
}

impl LabeledCorpus {
    pub fn section_topics(&self) -> impl Iterator<Item = usize> + '_ {
        self.topics.iter().flatten().copied()
    }
}

/// Word `idx` of `topic` in language `lang`, e.g. `en3w7`. Vocabularies of
/// different topics and languages are disjoint.
pub fn synth_word(lang: &str, topic: usize, idx: usize) -> String {
    format!("{lang}{topic}w{idx}")
}

fn heading(section: usize) -> String {
    if section == 0 {
        String::new()
    } else {
        format!("Part {section}")
    }
}

fn sentence_text(rng: &mut impl Rng, vocab: &[String], n: usize) -> String {
    let mut words: Vec<&str> = (0..n).map(|_| vocab.choose(rng).expect("non-empty").as_str()).collect();
    let last = words.pop().unwrap_or_default();
    let mut text = words.join(" ");
    if !text.is_empty() {
        text.push(' ');
    }
    text.push_str(last);
    text.push('.');
    text
}

fn vocabularies(lang: &str, cfg: &SynthConfig) -> Vec<Vec<String>> {
    (0..cfg.k)
        .map(|t| (0..cfg.words_per_topic).map(|i| synth_word(lang, t, i)).collect())
        .collect()
}

fn build_doc(
    doc_id: &str,
    lang: &str,
    topics: &[usize],
    vocab: &[Vec<String>],
    cfg: &SynthConfig,
    rng: &mut impl Rng,
) -> Document {
    let sections = topics
        .iter()
        .enumerate()
        .map(|(si, &t)| Section {
            heading: heading(si),
            depth: if si == 0 { 0 } else { 2 },
            sentences: (0..cfg.sentences_per_section)
                .map(|j| Sentence::new(sentence_text(rng, &vocab[t], cfg.tokens_per_sentence), doc_id, si, j))
                .collect(),
            section_index: si,
        })
        .collect();
    Document {
        doc_id: doc_id.to_string(),
        lang: lang.to_string(),
        categories: Vec::new(),
        sections,
    }
}

/// Each section draws one topic uniformly and every token uniformly from
/// that topic's vocabulary.
pub fn monolingual(cfg: &SynthConfig, lang: &str) -> Result<LabeledCorpus> {
    cfg.validate()?;
    let vocab = vocabularies(lang, cfg);
    let mut rng = seed::rng_for(cfg.seed, 0);
    let mut docs = Vec::with_capacity(cfg.docs);
    let mut topics = Vec::with_capacity(cfg.docs);
    for d in 0..cfg.docs {
        let t: Vec<usize> = (0..cfg.sections_per_doc).map(|_| rng.random_range(0..cfg.k)).collect();
        docs.push(build_doc(&format!("doc{d:04}"), lang, &t, &vocab, cfg, &mut rng));
        topics.push(t);
    }
    Ok(LabeledCorpus { docs, topics })
}

/// Parallel documents: the target section of a source section with topic
/// `t` has topic `perm[t]` and the same number of sentences.
pub fn bilingual(cfg: &SynthConfig, src_lang: &str, tgt_lang: &str, perm: &[usize]) -> Result<(LabeledCorpus, LabeledCorpus)> {
    cfg.validate()?;
    let mut check = perm.to_vec();
    check.sort_unstable();
    if perm.len() != cfg.k || check.iter().enumerate().any(|(i, &p)| i != p) {
        return Err(Error::config(format!("{perm:?} is not a permutation of 0..{}", cfg.k)));
    }
    if src_lang == tgt_lang {
        return Err(Error::config("source and target languages must differ"));
    }
    let src = monolingual(cfg, src_lang)?;
    let vocab = vocabularies(tgt_lang, cfg);
    let mut rng = seed::rng_for(cfg.seed, 1);
    let mut docs = Vec::with_capacity(cfg.docs);
    let mut topics = Vec::with_capacity(cfg.docs);
    for (doc, st) in src.docs.iter().zip(&src.topics) {
        let t: Vec<usize> = st.iter().map(|&s| perm[s]).collect();
        docs.push(build_doc(&doc.doc_id, tgt_lang, &t, &vocab, cfg, &mut rng));
        topics.push(t);
    }
    Ok((src, LabeledCorpus { docs, topics }))
}

/// Renders a document as wikitext-lite: lead text, then `== heading ==`
/// lines before each later section.
pub fn to_wikitext(doc: &Document) -> String {
    let mut out = String::new();
    for sec in &doc.sections {
        if sec.section_index > 0 {
            out.push_str(&format!("== {} ==\n", sec.heading));
        }
        let body: Vec<&str> = sec.sentences.iter().map(|s| s.text.as_str()).collect();
        out.push_str(&body.join(" "));
        out.push('\n');
    }
    out
}

/// Raw documents for ingestion. Every `non_bio_every`-th document (if
/// non-zero) gets a non-biographical category.
pub fn to_raw(corpus: &LabeledCorpus, non_bio_every: usize) -> Vec<RawDocument> {
    corpus
        .docs
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let category = if non_bio_every > 0 && i % non_bio_every == non_bio_every - 1 {
                "Rivers of Synthland"
            } else {
                "Synthetic writers"
            };
            RawDocument {
                doc_id: d.doc_id.clone(),
                lang: d.lang.clone(),
                categories: vec![category.to_string()],
                text: to_wikitext(d),
            }
        })
        .collect()
}

const FR_MUSIC: &[&str] = &[
    "chanson", "album", "single", "musique", "concert", "scène", "groupe", "studio", "clip", "label", "tournée",
    "titre", "chanteuse", "disque",
];
const FR_FAMILY: &[&str] = &[
    "école", "université", "famille", "naissance", "enfance", "parents", "ville", "études", "diplôme", "mariage",
    "frère", "sœur", "village", "lycée",
];

/// A French article with a family lead section followed by a career
/// section, in the style of a short biography.
pub const FIGURE_FIXTURE: &str = "Elle naît dans une famille de musiciens et passe son enfance au village.\n\
Ses parents l'inscrivent à l'école puis au lycée de la ville.\n\
== Carrière ==\n\
Elle signe avec un label en 2012 et enregistre un premier single en studio.\n\
Son premier album sort au printemps avec un clip très remarqué.\n\
Elle part ensuite en tournée et donne un concert dans chaque grande ville.\n";

/// English counterpart of [`FIGURE_FIXTURE`], sentence for sentence.
pub const FIGURE_FIXTURE_EN: &str = "She was born into a family of musicians and grew up in the village.\n\
Her parents sent her to the school and then to the high school in town.\n\
== Career ==\n\
She signed with a label in 2012 and recorded a first single in the studio.\n\
Her first album came out in spring with a much noticed video.\n\
She then went on tour and played a concert in every major city.\n";

pub const FIGURE_DOC_ID: &str = "fig";

/// French training documents mixing a music topic and a family topic, for
/// training a two-topic model that separates the fixture's sections.
pub fn french_training(docs: usize, seed: u64) -> Vec<Document> {
    let vocab: Vec<Vec<String>> = [FR_FAMILY, FR_MUSIC]
        .iter()
        .map(|ws| ws.iter().map(|w| w.to_string()).collect())
        .collect();
    let cfg = SynthConfig {
        k: 2,
        words_per_topic: FR_MUSIC.len(),
        docs,
        sections_per_doc: 2,
        sentences_per_section: 4,
        tokens_per_sentence: 8,
        seed,
    };
    let mut rng = seed::rng_for(seed, 2);
    (0..docs)
        .map(|d| build_doc(&format!("fr{d:04}"), "fr", &[0, 1], &vocab, &cfg, &mut rng))
        .collect()
}

/// Parallel raw documents for the figure-style experiment: French training
/// articles with synthetic English counterparts, plus the fixture pair
/// under id [`FIGURE_DOC_ID`].
pub fn figure_corpus(docs: usize, seed: u64) -> (Vec<RawDocument>, Vec<RawDocument>) {
    let fr = french_training(docs, seed);
    let cfg = SynthConfig {
        k: 2,
        words_per_topic: FR_MUSIC.len(),
        docs,
        sections_per_doc: 2,
        sentences_per_section: 4,
        tokens_per_sentence: 8,
        seed,
    };
    let vocab = vocabularies("en", &cfg);
    let mut rng = seed::rng_for(seed, 3);
    let raw = |d: &Document| RawDocument {
        doc_id: d.doc_id.clone(),
        lang: d.lang.clone(),
        categories: vec!["Synthetic writers".into()],
        text: to_wikitext(d),
    };
    let mut src: Vec<RawDocument> = fr.iter().map(raw).collect();
    let mut tgt: Vec<RawDocument> = fr
        .iter()
        .map(|d| raw(&build_doc(&d.doc_id, "en", &[0, 1], &vocab, &cfg, &mut rng)))
        .collect();
    for (list, lang, text) in [(&mut src, "fr", FIGURE_FIXTURE), (&mut tgt, "en", FIGURE_FIXTURE_EN)] {
        list.push(RawDocument {
            doc_id: FIGURE_DOC_ID.into(),
            lang: lang.into(),
            categories: vec!["Synthetic singers".into()],
            text: text.into(),
        });
    }
    (src, tgt)
}
