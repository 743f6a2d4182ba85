use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::rc::Rc;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::config::seed_offsets as off;
use super::decode::{
    all_topic_caches, argmax, build_vocab, decode_stream, index_of, lower_bpe, replay, to_ids, unit_map, unit_topics,
    DecodeSentence, TopicInputs, UnitTopics,
};
use super::{files, Pipeline, Stage, StageOutput};
use crate::artifact::{from_jsonl, text_header, to_jsonl, Header};
use crate::bpe::{learn_bpe, undo_bpe_tokens, MergeTable};
use crate::cache::{CacheSnapshot, StopwordFilter, DUMP_FORMAT};
use crate::corpus::io::{
    corpus_from_jsonl, corpus_to_jsonl, links_from_jsonl, links_to_jsonl, materialize, raw_from_jsonl, LinkRecord,
    SentenceRecord,
};
use crate::corpus::{align_sentences, is_biography, parse_wikitext_lite, BleuSimilarity, Document};
use crate::lang;
use crate::neural::{
    load_checkpoint, predict, save_checkpoint, topic_schedule, train_step, CacheScorerParams, MockBaseModel,
    TopicSource, TrainExample,
};
use crate::seed;
use crate::sideconstraints::{tag_corpus, tag_text, TagConfig};
use crate::topics::{prepare_units, train_lda, Granularity, TopicModel, Unit};
use crate::xalign::{build_alignment, TopicAlignment};
use crate::{Error, Result};

pub const TAGGED_FORMAT: &str = "sectionmt.tagged";
pub const VOCAB_FORMAT: &str = "sectionmt.scorer-vocab";
pub const CACHE_RUN_FORMAT: &str = "sectionmt.cache-run";

pub(crate) fn run(p: &Pipeline, stage: Stage) -> Result<StageOutput> {
    match stage {
        Stage::Ingest => ingest(p),
        Stage::AlignSents => align_sents(p),
        Stage::Clean => clean(p),
        Stage::LearnBpe => learn(p),
        Stage::TrainLda => train_topics(p),
        Stage::AlignTopics => align_topics(p),
        Stage::Tag => tag(p),
        Stage::TrainScorer => train_scorer(p),
        Stage::CacheRun => cache_run(p),
    }
}

fn parse_raw(path: &std::path::Path) -> Result<Vec<Document>> {
    let label = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| Error::config(format!("cannot read {label}: {e}")))?;
    let raw = raw_from_jsonl(&text, &label)?;
    let mut seen = HashSet::new();
    raw.into_iter()
        .map(|r| {
            if !seen.insert(r.doc_id.clone()) {
                return Err(Error::input(format!("{label}: duplicate document id {}", r.doc_id)));
            }
            let mut d = parse_wikitext_lite(&r.text, &r.doc_id, &r.lang);
            d.categories = r.categories;
            Ok(d)
        })
        .collect()
}

fn ingest(p: &Pipeline) -> Result<StageOutput> {
    let cfg = p.config();
    cfg.check_inputs()?;
    let src = parse_raw(&cfg.input.src_raw)?;
    let tgt = parse_raw(&cfg.input.tgt_raw)?;
    for (docs, want) in [(&src, &cfg.src_lang), (&tgt, &cfg.tgt_lang)] {
        if let Some(d) = docs.iter().find(|d| &d.lang != want) {
            log::warn!("document {} has language {:?}, config expects {want:?}", d.doc_id, d.lang);
        }
    }
    let tgt_by_id: HashMap<&str, &Document> = tgt.iter().map(|d| (d.doc_id.as_str(), d)).collect();
    let (mut kept_src, mut kept_tgt) = (Vec::new(), Vec::new());
    let (mut unpaired, mut non_bio) = (0usize, 0usize);
    for d in &src {
        let Some(t) = tgt_by_id.get(d.doc_id.as_str()) else {
            unpaired += 1;
            continue;
        };
        if cfg.input.filter_bio && !is_biography(d, &cfg.input.bio_keywords) && !is_biography(t, &cfg.input.bio_keywords) {
            non_bio += 1;
            continue;
        }
        kept_src.push(d.clone());
        kept_tgt.push((*t).clone());
    }
    let mut out = StageOutput::default();
    out.file(files::CORPUS_SRC, corpus_to_jsonl(&kept_src, p.config_hash())?);
    out.file(files::CORPUS_TGT, corpus_to_jsonl(&kept_tgt, p.config_hash())?);
    out.stat("src_documents", src.len());
    out.stat("tgt_documents", tgt.len());
    out.stat("kept_documents", kept_src.len());
    out.stat("dropped_unpaired", unpaired);
    out.stat("dropped_non_biography", non_bio);
    out.stat("src_sentences", kept_src.iter().map(Document::sentence_count).sum::<usize>());
    out.stat("tgt_sentences", kept_tgt.iter().map(Document::sentence_count).sum::<usize>());
    Ok(out)
}

fn load_corpora(p: &Pipeline) -> Result<(Vec<Document>, Vec<Document>)> {
    let src = corpus_from_jsonl(&p.read_text(files::CORPUS_SRC)?, files::CORPUS_SRC)?;
    let tgt = corpus_from_jsonl(&p.read_text(files::CORPUS_TGT)?, files::CORPUS_TGT)?;
    Ok((src, tgt))
}

fn align_sents(p: &Pipeline) -> Result<StageOutput> {
    let (src, tgt) = load_corpora(p)?;
    let tgt_by_id: HashMap<&str, &Document> = tgt.iter().map(|d| (d.doc_id.as_str(), d)).collect();
    let mut links = Vec::new();
    let mut kinds: BTreeMap<String, usize> = BTreeMap::new();
    let mut unmatched_sections = 0usize;
    for d in &src {
        let t = tgt_by_id
            .get(d.doc_id.as_str())
            .ok_or_else(|| Error::input(format!("document {} missing from target corpus", d.doc_id)))?;
        unmatched_sections += d.sections.len().abs_diff(t.sections.len());
        for (ss, ts) in d.sections.iter().zip(&t.sections) {
            for bead in align_sentences(&ss.sentences, &ts.sentences, &BleuSimilarity, &p.config().align) {
                *kinds.entry(format!("{:?}", bead.kind())).or_default() += 1;
                links.push(LinkRecord::from_bead(&d.doc_id, ss.section_index, ts.section_index, &bead));
            }
        }
    }
    let mut out = StageOutput::default();
    out.file(files::LINKS, links_to_jsonl(&links, p.config_hash())?);
    out.stat("beads", links.len());
    out.stat("unmatched_sections", unmatched_sections);
    for (k, v) in kinds {
        out.stat(&format!("beads_{k}"), v);
    }
    Ok(out)
}

fn load_links(p: &Pipeline, name: &str) -> Result<Vec<LinkRecord>> {
    links_from_jsonl(&p.read_text(name)?, name)
}

fn clean(p: &Pipeline) -> Result<StageOutput> {
    let (src, tgt) = load_corpora(p)?;
    let links = load_links(p, files::LINKS)?;
    let mut kept = Vec::new();
    for l in &links {
        let pair = materialize(&src, &tgt, std::slice::from_ref(l))?;
        if let Some(sp) = pair.pairs.first() {
            if p.config().clean.keeps(sp.src.tokens.len(), sp.tgt.tokens.len()) {
                kept.push(l.clone());
            }
        }
    }
    let mut out = StageOutput::default();
    out.file(files::LINKS_CLEAN, links_to_jsonl(&kept, p.config_hash())?);
    out.stat("links_in", links.len());
    out.stat("pairs_kept", kept.len());
    Ok(out)
}

fn learn(p: &Pipeline) -> Result<StageOutput> {
    let (src, tgt) = load_corpora(p)?;
    let links = load_links(p, files::LINKS_CLEAN)?;
    let corpus = materialize(&src, &tgt, &links)?;
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for pair in &corpus.pairs {
        for t in pair.src.tokens.iter().chain(&pair.tgt.tokens) {
            *counts.entry(t.to_lowercase()).or_default() += 1;
        }
    }
    let table = learn_bpe(&counts, p.config().bpe.merges)?;
    let mut out = StageOutput::default();
    out.file(files::BPE, table.to_text(p.config_hash()));
    out.stat("word_types", counts.len());
    out.stat("merges", table.len());
    Ok(out)
}

fn train_topics(p: &Pipeline) -> Result<StageOutput> {
    let cfg = p.config();
    let (src, tgt) = load_corpora(p)?;
    let mut out = StageOutput::default();
    for (docs, lang, offset, name, side) in [
        (&src, &cfg.src_lang, off::LDA_SRC, files::LDA_SRC, "src"),
        (&tgt, &cfg.tgt_lang, off::LDA_TGT, files::LDA_TGT, "tgt"),
    ] {
        let units = prepare_units(docs, cfg.lda.granularity, &lang::stopwords(lang));
        if units.is_empty() {
            return Err(Error::input(format!("{side} corpus has no non-empty units for topic training")));
        }
        let model = train_lda(&units, &cfg.lda_config(cfg.module_seed(offset)))?;
        model.check_counts(Some(&units.iter().map(|u| u.bag.len()).collect::<Vec<_>>()))?;
        out.file(name, model.to_text(p.config_hash())?);
        out.stat(&format!("{side}_units"), units.len());
        out.stat(&format!("{side}_vocab"), model.vocab_size());
    }
    Ok(out)
}

fn load_models(p: &Pipeline) -> Result<(TopicModel, TopicModel)> {
    let src = TopicModel::from_text(&p.read_text(files::LDA_SRC)?, files::LDA_SRC)?;
    let tgt = TopicModel::from_text(&p.read_text(files::LDA_TGT)?, files::LDA_TGT)?;
    Ok((src, tgt))
}

fn align_topics(p: &Pipeline) -> Result<StageOutput> {
    let cfg = p.config();
    let (src, tgt) = load_corpora(p)?;
    let (sm, tm) = load_models(p)?;
    let g = cfg.lda.granularity;
    let su = unit_map(&src, g, &cfg.src_lang);
    let tu = unit_map(&tgt, g, &cfg.tgt_lang);
    let tgt_by_id: HashMap<&str, &Document> = tgt.iter().map(|d| (d.doc_id.as_str(), d)).collect();
    let mut pairs: Vec<(Unit, Unit)> = Vec::new();
    let push = |pairs: &mut Vec<(Unit, Unit)>, a: Option<&Unit>, b: Option<&Unit>| {
        if let (Some(a), Some(b)) = (a, b) {
            if !a.bag.is_empty() && !b.bag.is_empty() {
                pairs.push((a.clone(), b.clone()));
            }
        }
    };
    for d in &src {
        let Some(t) = tgt_by_id.get(d.doc_id.as_str()) else { continue };
        match g {
            Granularity::Section => {
                for i in 0..d.sections.len().min(t.sections.len()) {
                    let id = crate::topics::UnitId::new(&d.doc_id, Some(i));
                    push(&mut pairs, su.get(&id), tu.get(&id));
                }
            }
            Granularity::Document => {
                let id = crate::topics::UnitId::new(&d.doc_id, None);
                push(&mut pairs, su.get(&id), tu.get(&id));
            }
        }
    }
    let alignment = build_alignment(&pairs, &sm, &tm, &cfg.infer_config(off::XALIGN))?;
    let mut out = StageOutput::default();
    out.file(files::TOPIC_ALIGNMENT, alignment.to_json(p.config_hash())?);
    out.stat("unit_pairs", pairs.len());
    out.stat("projection", alignment.projection.clone());
    Ok(out)
}

fn load_merges(p: &Pipeline) -> Result<MergeTable> {
    MergeTable::from_text(&p.read_text(files::BPE)?, files::BPE)
}

fn tag(p: &Pipeline) -> Result<StageOutput> {
    let cfg = p.config();
    let (src, _) = load_corpora(p)?;
    let (sm, _) = load_models(p)?;
    let merges = load_merges(p)?;
    let tcfg = TagConfig {
        granularity: cfg.lda.granularity,
        infer: cfg.infer_config(off::TAG),
        stopwords: lang::stopwords(&cfg.src_lang),
    };
    let tagged = tag_corpus(&src, &sm, &tcfg)?;
    for w in &tagged.warnings {
        log::warn!("{w}");
    }
    let sentences: Vec<_> = src
        .iter()
        .flat_map(|d| d.sections.iter().flat_map(move |s| s.sentences.iter().map(move |x| (d, s, x))))
        .collect();
    if sentences.len() != tagged.sentences.len() {
        return Err(Error::Invariant("tagged sentence count differs from corpus".into()));
    }
    let records: Vec<SentenceRecord> = sentences
        .iter()
        .zip(&tagged.sentences)
        .map(|((d, s, x), t)| SentenceRecord {
            doc_id: d.doc_id.clone(),
            lang: d.lang.clone(),
            section_index: s.section_index,
            heading: s.heading.clone(),
            sentence_index: x.sentence_index,
            text: tag_text(&lower_bpe(&x.tokens, &merges).join(" "), t.tagged.topic).text,
        })
        .collect();
    let distinct: HashSet<usize> = tagged.sentences.iter().map(|t| t.tagged.topic).collect();
    let mut out = StageOutput::default();
    out.file(
        files::TAGGED_SRC,
        to_jsonl(&Header::new(TAGGED_FORMAT, 1, p.config_hash()), &records)?,
    );
    out.stat("sentences", records.len());
    out.stat("distinct_tags", distinct.len());
    out.stat("warnings", tagged.warnings.len());
    Ok(out)
}

/// Everything the scorer stages derive from earlier artifacts.
struct ScorerData {
    stream: Vec<DecodeSentence>,
    ids: Vec<Vec<usize>>,
    vocab: Vec<String>,
    topics: UnitTopics,
    caches: Vec<crate::cache::TopicCache>,
    src_units: HashMap<crate::topics::UnitId, Unit>,
    mock: MockBaseModel,
    marker: String,
}

fn scorer_data(p: &Pipeline) -> Result<ScorerData> {
    let cfg = p.config();
    let (src, tgt) = load_corpora(p)?;
    let links = load_links(p, files::LINKS_CLEAN)?;
    let merges = load_merges(p)?;
    let (sm, tm) = load_models(p)?;
    let alignment = TopicAlignment::from_json(&p.read_text(files::TOPIC_ALIGNMENT)?, files::TOPIC_ALIGNMENT)?;
    let g = cfg.lda.granularity;
    let stream = decode_stream(&tgt, &links, &merges, g)?;
    if stream.is_empty() {
        return Err(Error::input("no aligned target sentences to decode"));
    }
    let src_units = unit_map(&src, g, &cfg.src_lang);
    let tgt_units = unit_map(&tgt, g, &cfg.tgt_lang);
    let topics = unit_topics(
        &stream,
        &TopicInputs {
            src_units: &src_units,
            tgt_units: &tgt_units,
            src_model: &sm,
            tgt_model: &tm,
            alignment: &alignment,
            infer: cfg.infer_config(off::INFER),
        },
    )?;
    let caches = all_topic_caches(&tm, cfg.cache.topic_capacity, &merges)?;
    let vocab = build_vocab(&stream, &caches);
    let index = index_of(&vocab);
    let ids = stream.iter().map(|s| to_ids(&s.tokens, &index)).collect::<Result<Vec<_>>>()?;
    let mock = MockBaseModel::fit(&ids, vocab.len(), cfg.scorer.dims.d, cfg.module_seed(off::SCORER_INIT))?;
    Ok(ScorerData {
        stream,
        ids,
        vocab,
        topics,
        caches,
        src_units,
        mock,
        marker: merges.marker().to_string(),
    })
}

impl ScorerData {
    fn src_bag(&self, i: usize) -> &[String] {
        self.src_units.get(&self.stream[i].src_unit).map_or(&[], |u| u.bag.as_slice())
    }

    fn units_in_order(&self) -> Vec<&crate::topics::UnitId> {
        let mut seen = HashSet::new();
        self.stream.iter().map(|s| &s.unit).filter(|u| seen.insert(*u)).collect()
    }

    fn example(&self, sentence: usize, pos: usize, cache_ids: &[usize]) -> TrainExample {
        let (ctx, p_nmt) = self.mock.step(&self.ids[sentence][..pos], self.src_bag(sentence));
        TrainExample {
            ctx,
            cache_ids: cache_ids.to_vec(),
            p_nmt,
            gold: self.ids[sentence][pos],
        }
    }
}

fn train_scorer(p: &Pipeline) -> Result<StageOutput> {
    let cfg = p.config();
    let data = scorer_data(p)?;
    let units = data.units_in_order();
    let schedule = topic_schedule(units.len(), cfg.scorer.schedule_ratio, cfg.module_seed(off::SCHEDULE))?;
    let mut chosen = HashMap::new();
    for (u, flag) in units.iter().zip(&schedule) {
        let t = match flag {
            TopicSource::Gold => data.topics.gold[*u],
            TopicSource::Projected => data.topics.projected[*u],
        };
        chosen.insert((*u).clone(), t);
    }
    let index = index_of(&data.vocab);
    let mut items: Vec<(usize, usize, Rc<Vec<usize>>)> = Vec::new();
    replay(
        &data.stream,
        &chosen,
        &data.caches,
        cfg.cache.dynamic_capacity,
        StopwordFilter::for_lang(&cfg.tgt_lang),
        &index,
        |i, cache_ids, _| {
            let ids = Rc::new(cache_ids.to_vec());
            items.extend((0..data.ids[i].len()).map(|pos| (i, pos, Rc::clone(&ids))));
            Ok(data.stream[i].tokens.clone())
        },
    )?;
    let mut params = CacheScorerParams::init(cfg.scorer.dims, data.vocab.len(), cfg.module_seed(off::SCORER_INIT))?;
    params.freeze_embeddings = cfg.scorer.freeze_embeddings;
    let mut order: Vec<usize> = (0..items.len()).collect();
    let mut last_loss = f64::NAN;
    for epoch in 0..cfg.scorer.epochs {
        order.shuffle(&mut seed::rng_for(cfg.module_seed(off::TRAIN_SHUFFLE), epoch as u64));
        let (mut total, mut n) = (0.0, 0usize);
        for chunk in order.chunks(cfg.scorer.batch_size) {
            let batch: Vec<TrainExample> = chunk
                .iter()
                .map(|&k| {
                    let (s, pos, ref ids) = items[k];
                    data.example(s, pos, ids)
                })
                .collect();
            total += train_step(&mut params, &batch, cfg.scorer.learning_rate)? * batch.len() as f64;
            n += batch.len();
        }
        last_loss = total / n.max(1) as f64;
        log::info!("train-scorer epoch {}: mean loss {last_loss:.5}", epoch + 1);
    }
    let gold_units = schedule.iter().filter(|&&f| f == TopicSource::Gold).count();
    let mut out = StageOutput::default();
    out.file(files::SCORER, save_checkpoint(&params, p.config_hash())?);
    out.file(
        files::SCORER_VOCAB,
        to_jsonl(&Header::new(VOCAB_FORMAT, 1, p.config_hash()), &data.vocab)?,
    );
    out.stat("examples", items.len());
    out.stat("units", units.len());
    out.stat("gold_topic_units", gold_units);
    out.stat("vocab", data.vocab.len());
    if last_loss.is_finite() {
        out.stat("final_epoch_loss", last_loss);
    }
    Ok(out)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CacheRunRecord {
    pub doc_id: String,
    pub tgt_section: usize,
    pub tgt_span: (usize, usize),
    pub unit_id: String,
    pub topic_id: Option<usize>,
    pub cache_size: usize,
    pub gold: Vec<String>,
    pub choices: Vec<String>,
    pub base_choices: Vec<String>,
    pub gates: Vec<f64>,
    pub gold_prob_base: Vec<f64>,
    pub gold_prob_cache: Vec<f64>,
}

fn cache_run(p: &Pipeline) -> Result<StageOutput> {
    let cfg = p.config();
    let data = scorer_data(p)?;
    let (params, _) = load_checkpoint(&p.read_artifact(files::SCORER)?)?;
    let (_, saved_vocab): (_, Vec<String>) = from_jsonl(&p.read_text(files::SCORER_VOCAB)?, files::SCORER_VOCAB, VOCAB_FORMAT, 1)?;
    if saved_vocab != data.vocab || params.vocab_size != data.vocab.len() || params.dims.d != cfg.scorer.dims.d {
        return Err(Error::config("scorer checkpoint does not match the current corpus; re-run train-scorer"));
    }
    let index = index_of(&data.vocab);
    let mut records = Vec::with_capacity(data.stream.len());
    let mut dumps: Vec<CacheSnapshot> = Vec::with_capacity(data.stream.len());
    let (mut nll_base, mut nll_cache, mut tokens) = (0.0f64, 0.0f64, 0usize);
    let resets = replay(
        &data.stream,
        &data.topics.projected,
        &data.caches,
        cfg.cache.dynamic_capacity,
        StopwordFilter::for_lang(&cfg.tgt_lang),
        &index,
        |i, cache_ids, snap| {
            let s = &data.stream[i];
            let mut rec = CacheRunRecord {
                doc_id: s.doc_id.clone(),
                tgt_section: s.tgt_section,
                tgt_span: s.tgt_span,
                unit_id: snap.unit_id.clone(),
                topic_id: snap.topic_id,
                cache_size: cache_ids.len(),
                gold: s.tokens.clone(),
                choices: Vec::new(),
                base_choices: Vec::new(),
                gates: Vec::new(),
                gold_prob_base: Vec::new(),
                gold_prob_cache: Vec::new(),
            };
            for pos in 0..data.ids[i].len() {
                let ex = data.example(i, pos, cache_ids);
                let pred = predict(&params, &ex.ctx, cache_ids, &ex.p_nmt)?;
                rec.choices.push(data.vocab[argmax(&pred.dist)].clone());
                rec.base_choices.push(data.vocab[argmax(&ex.p_nmt)].clone());
                rec.gates.push(pred.gate);
                rec.gold_prob_base.push(ex.p_nmt[ex.gold]);
                rec.gold_prob_cache.push(pred.dist[ex.gold]);
                nll_base -= ex.p_nmt[ex.gold].ln();
                nll_cache -= pred.dist[ex.gold].ln();
                tokens += 1;
            }
            dumps.push(snap.clone());
            let produced = rec.choices.clone();
            records.push(rec);
            Ok(produced)
        },
    )?;
    let hash = p.config_hash();
    let text = |pick: fn(&CacheRunRecord) -> &Vec<String>| {
        let mut s = text_header(hash);
        for r in &records {
            s.push_str(&undo_bpe_tokens(pick(r), &data.marker).join(" "));
            s.push('\n');
        }
        s
    };
    let mut out = StageOutput::default();
    out.file(files::HYP_CACHE, text(|r| &r.choices));
    out.file(files::HYP_BASE, text(|r| &r.base_choices));
    out.file(files::REF, text(|r| &r.gold));
    out.file(files::CACHE_RUN, to_jsonl(&Header::new(CACHE_RUN_FORMAT, 1, hash), &records)?);
    out.file(files::CACHE_DUMP, to_jsonl(&Header::new(DUMP_FORMAT, 1, hash), &dumps)?);
    out.stat("sentences", records.len());
    out.stat("tokens", tokens);
    out.stat("unit_resets", resets);
    if tokens > 0 {
        out.stat("nll_base", nll_base / tokens as f64);
        out.stat("nll_cache", nll_cache / tokens as f64);
    }
    Ok(out)
}

