//! Browser demo bindings. Every export takes plain values and returns a JSON
//! string: either the result object or `{"error": ...}`.

use std::collections::HashSet;

use serde::Serialize;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use sectionmt::corpus::{parse_wikitext_lite, Document};
use sectionmt::neural::{cache_distribution, combine, sigmoid};
use sectionmt::sideconstraints::{tag_corpus, TagConfig};
use sectionmt::synth::french_training;
use sectionmt::topics::{prepare_units, train_lda, Granularity, InferConfig, LdaConfig};
use sectionmt::{lang, Error, Result};

#[derive(Serialize)]
struct SectionView<'a> {
    index: usize,
    heading: &'a str,
    sentences: Vec<&'a str>,
}

fn sections(doc: &Document) -> Vec<SectionView<'_>> {
    doc.sections
        .iter()
        .map(|s| SectionView {
            index: s.section_index,
            heading: &s.heading,
            sentences: s.sentences.iter().map(|x| x.text.as_str()).collect(),
        })
        .collect()
}

fn respond(r: Result<Value>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

pub fn parse_value(raw: &str, lang: &str) -> Result<Value> {
    let doc = parse_wikitext_lite(raw, "input", lang);
    Ok(json!({ "sections": sections(&doc), "sentence_count": doc.sentence_count() }))
}

/// Sections and sentences of a wikitext-lite article.
#[wasm_bindgen]
pub fn parse(raw: &str, lang: &str) -> String {
    respond(parse_value(raw, lang))
}

#[derive(Debug, Clone, Copy)]
pub struct TagParams {
    pub k: usize,
    pub alpha: f64,
    pub iterations: usize,
    pub seed: u64,
    pub document_level: bool,
    /// Add the built-in French training articles (French input only).
    pub with_training: bool,
}

pub fn tag_value(raw: &str, lang: &str, p: TagParams) -> Result<Value> {
    if p.k == 0 || p.k > 50 || p.iterations == 0 || p.iterations > 2000 {
        return Err(Error::config("choose 1 ≤ K ≤ 50 and 1 ≤ iterations ≤ 2000"));
    }
    let doc = parse_wikitext_lite(raw, "input", lang);
    let granularity = if p.document_level { Granularity::Document } else { Granularity::Section };
    let mut corpus = if p.with_training && lang == "fr" { french_training(40, p.seed) } else { Vec::new() };
    corpus.push(doc.clone());
    let stopwords = lang::stopwords(lang);
    let units = prepare_units(&corpus, granularity, &stopwords);
    if units.is_empty() {
        return Err(Error::input("no content words to train on"));
    }
    let cfg = LdaConfig {
        k: p.k,
        alpha: p.alpha,
        iterations: p.iterations,
        seed: p.seed,
        granularity,
        ..LdaConfig::default()
    };
    let model = train_lda(&units, &cfg)?;
    let tagged = tag_corpus(
        std::slice::from_ref(&doc),
        &model,
        &TagConfig { granularity, infer: InferConfig { iterations: 100, seed: p.seed }, stopwords },
    )?;
    let used: HashSet<usize> = tagged.sentences.iter().map(|t| t.tagged.topic).collect();
    let mut topics = Vec::new();
    for t in 0..model.k() {
        if used.contains(&t) {
            let words: Vec<String> = model.top_words(t, 8)?.into_iter().map(|(w, _)| w).collect();
            topics.push(json!({ "topic": t, "top_words": words }));
        }
    }
    let lines: Vec<Value> = tagged
        .sentences
        .iter()
        .map(|t| json!({ "section": t.section_index, "topic": t.tagged.topic, "text": t.tagged.text }))
        .collect();
    Ok(json!({ "sentences": lines, "topics": topics, "warnings": tagged.warnings }))
}

/// Trains a small topic model and prefixes each sentence with its unit's tag.
#[wasm_bindgen]
pub fn tag(raw: &str, lang: &str, k: usize, alpha: f64, iterations: usize, seed: u32, document_level: bool, with_training: bool) -> String {
    respond(tag_value(
        raw,
        lang,
        TagParams { k, alpha, iterations, seed: u64::from(seed), document_level, with_training },
    ))
}

pub fn mix_value(p_nmt: &[f64], scores: &[f64], cache_ids: &[usize], gate_logit: f64) -> Result<Value> {
    if p_nmt.is_empty() || p_nmt.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::input("base distribution needs non-negative entries"));
    }
    if scores.len() != cache_ids.len() || scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::input("one finite score per cache word is required"));
    }
    let z: f64 = p_nmt.iter().sum();
    if z <= 0.0 {
        return Err(Error::input("base distribution sums to zero"));
    }
    let base: Vec<f64> = p_nmt.iter().map(|p| p / z).collect();
    let (g, p_cache) = if cache_ids.is_empty() {
        (1.0, Vec::new())
    } else {
        (sigmoid(gate_logit), cache_distribution(scores))
    };
    let mixed = combine(&base, &p_cache, cache_ids, g)?;
    Ok(json!({ "gate": g, "p_nmt": base, "p_cache": p_cache, "mixed": mixed, "sum": mixed.iter().sum::<f64>() }))
}

/// Interpolates a base distribution with a cache softmax under a gate.
#[wasm_bindgen]
pub fn mix(p_nmt: Vec<f64>, scores: Vec<f64>, cache_ids: Vec<u32>, gate_logit: f64) -> String {
    let ids: Vec<usize> = cache_ids.into_iter().map(|i| i as usize).collect();
    respond(mix_value(&p_nmt, &scores, &ids, gate_logit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use sectionmt::synth::FIGURE_FIXTURE;

    #[test]
    fn parse_reports_sections() {
        let v = parse_value("Intro. == Career == She sang.", "en").unwrap();
        assert_eq!(v["sections"].as_array().unwrap().len(), 2);
        assert_eq!(v["sections"][1]["heading"], "Career");
    }

    #[test]
    fn figure_tags_change_at_boundary() {
        let p = TagParams { k: 2, alpha: 0.001, iterations: 200, seed: 1, document_level: false, with_training: true };
        let v = tag_value(FIGURE_FIXTURE, "fr", p).unwrap();
        let s = v["sentences"].as_array().unwrap();
        let topic = |i: usize| s[i]["topic"].as_u64().unwrap();
        assert_eq!(topic(0), topic(1));
        assert_eq!(topic(2), topic(3));
        assert_eq!(topic(3), topic(4));
        assert_ne!(topic(1), topic(2));
        let d = tag_value(FIGURE_FIXTURE, "fr", TagParams { document_level: true, ..p }).unwrap();
        let s = d["sentences"].as_array().unwrap();
        assert!(s.iter().all(|x| x["topic"] == s[0]["topic"]));
    }

    #[test]
    fn mix_is_a_distribution() {
        let v = mix_value(&[1.0, 2.0, 3.0, 4.0], &[0.0, 0.0], &[2, 3], 0.0).unwrap();
        let m: Vec<f64> = v["mixed"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((m[2] - (0.5 * 0.3 + 0.25)).abs() < 1e-12);
        assert!(respond(mix_value(&[1.0], &[0.0, 1.0], &[0, 0], 0.0)).contains("error"));
    }
}
