mod common;

use std::collections::HashSet;

use proptest::prelude::*;
use rand::Rng;
use sectionmt::corpus::parse_wikitext_lite;
use sectionmt::lang;
use sectionmt::sideconstraints::{tag_corpus, tag_text, untag, TagConfig};
use sectionmt::synth::{self, SynthConfig};
use sectionmt::topics::{
    dominant_topic, infer_topics, prepare_units, train_lda, units_for, Granularity, InferConfig, LdaConfig,
    LdaSampler, TopicModel, Unit, UnitId,
};
use sectionmt::xalign::{build_alignment, project_topic, TopicAlignment};

fn cfg(k: usize, iterations: usize, seed: u64) -> LdaConfig {
    LdaConfig { k, iterations, seed, ..LdaConfig::default() }
}

fn dominants(m: &TopicModel) -> Vec<usize> {
    m.unit_distributions().unwrap().iter().map(|d| d.dominant()).collect()
}

#[test]
fn bag_sizes_match_recount() {
    let raw = "Marie Curie was born in Warsaw. She studied physics in Paris!\n\
               == Career ==\nShe won the Nobel prize, twice. It was 1911.\n\
               == Death ==\nShe died in 1934 .";
    let doc = parse_wikitext_lite(raw, "mc", "en");
    let stop = lang::stopwords("en");
    let units = prepare_units(std::slice::from_ref(&doc), Granularity::Section, &stop);
    // recount: lowercase 13a tokens, minus stopwords and punctuation
    let recount = |sec: usize| -> usize {
        doc.sections[sec]
            .sentences
            .iter()
            .flat_map(|s| s.text.split(|c: char| c.is_whitespace() || ".,!".contains(c)))
            .filter(|w| !w.is_empty() && !stop.contains(&w.to_lowercase()))
            .count()
    };
    assert_eq!(units.len(), 3);
    for (i, u) in units.iter().enumerate() {
        assert_eq!(u.bag.len(), recount(i), "section {i}: {:?}", u.bag);
    }
    let whole = prepare_units(std::slice::from_ref(&doc), Granularity::Document, &stop);
    assert_eq!(whole.len(), 1);
    assert_eq!(whole[0].bag.len(), (0..3).map(recount).sum::<usize>());
}

#[test]
fn disjoint_vocabularies_become_pure_topics() {
    let (units, labels) = common::class_units(400, 40, 2, 30, 11);
    let m = train_lda(&units, &cfg(2, 200, 3)).unwrap();
    assert!(common::purity(&dominants(&m), &labels, 2) >= 0.95);
}

#[test]
fn training_is_byte_deterministic() {
    let (units, _) = common::class_units(60, 20, 3, 10, 2);
    let a = train_lda(&units, &cfg(3, 50, 9)).unwrap().to_text("h").unwrap();
    let b = train_lda(&units, &cfg(3, 50, 9)).unwrap().to_text("h").unwrap();
    assert_eq!(a, b);
    let c = train_lda(&units, &cfg(3, 50, 10)).unwrap().to_text("h").unwrap();
    assert_ne!(a, c);
}

#[test]
fn pure_unit_infers_its_topic() {
    let (units, labels) = common::class_units(100, 30, 2, 20, 4);
    let m = train_lda(&units, &cfg(2, 100, 1)).unwrap();
    let map = common::majority_map(&dominants(&m), &labels, 2, 2);
    for class in 0..2 {
        let probe = Unit { id: UnitId::new("probe", None), bag: (0..20).map(|i| format!("c{class}v{i}")).collect() };
        let d = infer_topics(&m, &probe, &InferConfig { iterations: 100, seed: 5 });
        let top = d.dominant();
        assert_eq!(map[top], Some(class));
        assert!(d.probs[top] > 0.9, "{:?}", d.probs);
    }
}

#[test]
fn generator_heavy_word_ranks_first() {
    let mut r = common::rng(8);
    let units: Vec<Unit> = (0..50)
        .map(|i| {
            let bag = (0..30)
                .map(|_| if r.random_bool(0.5) { "married".to_string() } else { format!("w{}", r.random_range(0..40)) })
                .collect();
            Unit { id: UnitId::new(&format!("d{i}"), None), bag }
        })
        .collect();
    let m = train_lda(&units, &cfg(1, 10, 0)).unwrap();
    let top = m.top_words(0, 10).unwrap();
    assert_eq!(top[0].0, "married");
    assert!(top.windows(2).all(|w| w[0].1 >= w[1].1));
    assert!(m.top_words(0, 0).unwrap().is_empty());
    assert_eq!(m.top_words(0, 10_000).unwrap().len(), m.vocab_size());
}

#[test]
fn sparse_prior_lowers_entropy() {
    let (units, _) = common::class_units(200, 30, 2, 20, 21);
    let mean_entropy = |alpha: f64| {
        let m = train_lda(&units, &LdaConfig { alpha, ..cfg(2, 100, 7) }).unwrap();
        let d = m.unit_distributions().unwrap();
        d.iter().map(|x| x.entropy()).sum::<f64>() / d.len() as f64
    };
    assert!(mean_entropy(0.001) < mean_entropy(1.0));
}

#[test]
fn sampler_invariants_on_mixed_units() {
    let (units, _) = common::class_units(40, 15, 4, 8, 3);
    let mut s = LdaSampler::new(&units, &cfg(5, 30, 2)).unwrap();
    for _ in 0..30 {
        s.sweep();
        s.check_invariants().unwrap();
    }
    let sizes: Vec<usize> = units.iter().map(|u| u.bag.len()).collect();
    s.into_model().check_counts(Some(&sizes)).unwrap();
}

#[test]
fn projection_recovers_permutation() {
    let perm = [2usize, 0, 3, 1];
    let sc = SynthConfig { k: 4, docs: 30, sentences_per_section: 3, seed: 6, ..SynthConfig::default() };
    let (src, tgt) = synth::bilingual(&sc, "fr", "en", &perm).unwrap();
    let none = HashSet::new();
    let su = units_for(&src.docs, Granularity::Section, &none);
    let tu = units_for(&tgt.docs, Granularity::Section, &none);
    let sm = train_lda(&su, &cfg(4, 150, 1)).unwrap();
    let tm = train_lda(&tu, &cfg(4, 150, 2)).unwrap();
    let pairs: Vec<(Unit, Unit)> = su.iter().cloned().zip(tu.iter().cloned()).collect();
    let al = build_alignment(&pairs, &sm, &tm, &InferConfig { iterations: 30, seed: 3 }).unwrap();
    assert_eq!(al.total(), pairs.len() as u64);

    let truth_s: Vec<usize> = src.section_topics().collect();
    let truth_t: Vec<usize> = tgt.section_topics().collect();
    let s_map = common::majority_map(&dominants(&sm), &truth_s, 4, 4);
    let t_map = common::majority_map(&dominants(&tm), &truth_t, 4, 4);
    for s in 0..4 {
        if al.row_total(s) > 0 {
            let t = project_topic(&al, s).unwrap();
            assert_eq!(t_map[t].unwrap(), perm[s_map[s].unwrap()]);
        }
    }
    let again = build_alignment(&pairs, &sm, &tm, &InferConfig { iterations: 30, seed: 3 }).unwrap();
    assert_eq!(al.to_json("h").unwrap(), again.to_json("h").unwrap());
}

#[test]
fn projection_is_total_with_fallback() {
    let al = TopicAlignment::from_counts(3, 2, vec![0, 5, 0, 0, 2, 2]).unwrap();
    assert_eq!(project_topic(&al, 0).unwrap(), 1);
    assert_eq!(project_topic(&al, 1).unwrap(), al.fallback);
    assert_eq!(project_topic(&al, 2).unwrap(), 0);
    assert!(project_topic(&al, 3).is_err());
}

#[test]
fn section_tags_follow_generator_labels() {
    let sc = SynthConfig { k: 3, docs: 25, seed: 12, ..SynthConfig::default() };
    let corpus = synth::monolingual(&sc, "fr").unwrap();
    let none = HashSet::new();
    let units = prepare_units(&corpus.docs, Granularity::Section, &none);
    let m = train_lda(&units, &cfg(3, 150, 4)).unwrap();
    let tcfg = TagConfig { granularity: Granularity::Section, infer: InferConfig { iterations: 50, seed: 1 }, stopwords: none };
    let tagged = tag_corpus(&corpus.docs, &m, &tcfg).unwrap();
    let truth: Vec<usize> = tagged.sentences.iter().map(|r| corpus.topics[doc_index(&r.doc_id)][r.section_index]).collect();
    let pred: Vec<usize> = tagged.sentences.iter().map(|r| r.tagged.topic).collect();
    assert_eq!(common::purity(&pred, &truth, 3), 1.0);
}

fn doc_index(id: &str) -> usize {
    id.trim_start_matches("doc").parse().unwrap()
}

#[test]
fn document_tags_are_uniform_per_document() {
    let sc = SynthConfig { k: 3, docs: 10, seed: 2, ..SynthConfig::default() };
    let corpus = synth::monolingual(&sc, "fr").unwrap();
    let none = HashSet::new();
    let units = prepare_units(&corpus.docs, Granularity::Document, &none);
    let m = train_lda(&units, &LdaConfig { granularity: Granularity::Document, ..cfg(3, 50, 4) }).unwrap();
    let tcfg = TagConfig { granularity: Granularity::Document, infer: InferConfig::default(), stopwords: none };
    let tagged = tag_corpus(&corpus.docs, &m, &tcfg).unwrap();
    for d in &corpus.docs {
        let tags: HashSet<usize> = tagged.sentences.iter().filter(|r| r.doc_id == d.doc_id).map(|r| r.tagged.topic).collect();
        assert_eq!(tags.len(), 1);
    }
}

proptest! {
    #[test]
    fn inferred_distributions_are_normalized(bag in prop::collection::vec("[a-f]{1,2}", 0..30), seed in 0u64..50) {
        let units: Vec<Unit> = (0..6).map(|i| Unit { id: UnitId::new(&format!("d{i}"), None), bag: vec!["a".into(), "bb".into(), format!("c{i}")] }).collect();
        let m = train_lda(&units, &cfg(3, 5, 1)).unwrap();
        let d = infer_topics(&m, &Unit { id: UnitId::new("x", None), bag }, &InferConfig { iterations: 10, seed });
        prop_assert!((d.probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(d.probs.iter().all(|p| *p >= 0.0));
    }

    #[test]
    fn dominant_topic_ignores_positive_scale(scores in prop::collection::vec(0.0f64..10.0, 1..12), c in 0.01f64..100.0) {
        let scaled: Vec<f64> = scores.iter().map(|s| s * c).collect();
        prop_assert_eq!(dominant_topic(&scores), dominant_topic(&scaled));
    }

    #[test]
    fn tag_untag_round_trip(text in "\\PC{0,40}", topic in 0usize..100_000) {
        let t = tag_text(&text, topic);
        let (got, payload) = untag(&t.text);
        prop_assert_eq!(got, Some(topic));
        prop_assert_eq!(payload, text.as_str());
    }
}
