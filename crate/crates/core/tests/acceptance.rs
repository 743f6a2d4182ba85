//! Acceptance criteria. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line.

mod common;

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;
use sectionmt::corpus::io::raw_to_jsonl;
use sectionmt::corpus::parse_wikitext_lite;
use sectionmt::eval::{bootstrap_significance, corpus_bleu};
use sectionmt::neural::{
    cache_distribution, combine, example_loss, loss_and_gradients, train_step, CacheScorerParams, DecoderContext,
    MockBaseModel, ScorerDims, TrainExample,
};
use sectionmt::pipeline::{Pipeline, PipelineConfig};
use sectionmt::sideconstraints::{tag_corpus, tag_text, untag, TagConfig};
use sectionmt::synth::{self, SynthConfig, FIGURE_FIXTURE};
use sectionmt::topics::{
    prepare_units, train_lda, units_for, Granularity, InferConfig, LdaConfig, LdaSampler, Unit,
};
use sectionmt::xalign::{build_alignment, project_topic};
use sectionmt::{lang, topics::TopicModel};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

// ---------------------------------------------------------------- 1

const CONFIG_SNAPSHOT: &str = include_str!("fixtures/default_config.toml");

fn strip_comments(s: &str) -> String {
    s.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n").trim().to_string()
}

fn default_parameters() -> Check {
    let cfg = PipelineConfig::default();
    ensure(cfg.lda.k == 100, "K")?;
    ensure(cfg.lda.alpha == 0.001 && cfg.lda.beta == 0.01, "alpha/beta")?;
    ensure(cfg.cache.topic_capacity == 100 && cfg.cache.dynamic_capacity == 100, "cache capacities")?;
    ensure(cfg.scorer.dims.score_hidden == [1000, 500], "score net dims")?;
    ensure(cfg.scorer.dims.gate_hidden == [500, 200], "gate net dims")?;
    let lda = LdaConfig::default();
    ensure(lda.k == 100 && lda.alpha == 0.001 && lda.beta == 0.01, "LdaConfig defaults")?;
    ensure(
        strip_comments(&cfg.to_toml().map_err(|e| e.to_string())?) == strip_comments(CONFIG_SNAPSHOT),
        "serialized defaults differ from snapshot",
    )?;
    Ok("K=100 alpha=0.001 beta=0.01 caches 100/100 ffn (1000,500)/(500,200)".into())
}

// ---------------------------------------------------------------- 2

fn lda_recovery() -> Check {
    let (units, labels) = common::class_units(400, 60, 2, 50, 2024);
    let cfg = LdaConfig { k: 2, iterations: 500, seed: 7, ..LdaConfig::default() };
    let mut s = LdaSampler::new(&units, &cfg).map_err(|e| e.to_string())?;
    s.check_invariants().map_err(|e| e.to_string())?;
    for i in 0..cfg.iterations {
        s.sweep();
        s.check_invariants().map_err(|e| format!("sweep {i}: {e}"))?;
    }
    let sizes: Vec<usize> = units.iter().map(|u| u.bag.len()).collect();
    let model = s.into_model();
    model.check_counts(Some(&sizes)).map_err(|e| e.to_string())?;
    let pred: Vec<usize> = model.unit_distributions().unwrap().iter().map(|d| d.dominant()).collect();
    let purity = common::purity(&pred, &labels, 2);
    ensure(purity >= 0.95, format!("purity {purity:.4} < 0.95"))?;
    Ok(format!("purity {purity:.4}, invariants held for 500 sweeps"))
}

// ---------------------------------------------------------------- 3

fn dominants(m: &TopicModel) -> Vec<usize> {
    m.unit_distributions().unwrap().iter().map(|d| d.dominant()).collect()
}

fn projection_recovery() -> Check {
    let perm = [3usize, 0, 4, 1, 2];
    let sc = SynthConfig { k: 5, docs: 150, seed: 31, ..SynthConfig::default() };
    let (src, tgt) = synth::bilingual(&sc, "fr", "en", &perm).map_err(|e| e.to_string())?;
    let none = HashSet::new();
    let su = units_for(&src.docs, Granularity::Section, &none);
    let tu = units_for(&tgt.docs, Granularity::Section, &none);
    let lda = |seed| LdaConfig { k: 5, iterations: 1000, seed, ..LdaConfig::default() };
    let sm = train_lda(&su, &lda(1)).map_err(|e| e.to_string())?;
    let tm = train_lda(&tu, &lda(2)).map_err(|e| e.to_string())?;
    let pairs: Vec<(Unit, Unit)> = su.into_iter().zip(tu).collect();
    let al = build_alignment(&pairs, &sm, &tm, &InferConfig { iterations: 50, seed: 4 }).map_err(|e| e.to_string())?;

    let truth_s: Vec<usize> = src.section_topics().collect();
    let truth_t: Vec<usize> = tgt.section_topics().collect();
    let s_map = common::majority_map(&dominants(&sm), &truth_s, 5, 5);
    let t_map = common::majority_map(&dominants(&tm), &truth_t, 5, 5);
    let mut checked = 0;
    let bijective = |m: &[Option<usize>]| m.iter().flatten().collect::<HashSet<_>>().len() == m.len();
    ensure(bijective(&s_map) && bijective(&t_map), format!("topic models did not separate the generator topics: {s_map:?} {t_map:?}"))?;
    for s in 0..5 {
        if al.row_total(s) < 10 {
            continue;
        }
        let t = project_topic(&al, s).map_err(|e| e.to_string())?;
        let (Some(gs), Some(gt)) = (s_map[s], t_map[t]) else {
            return Err(format!("topic {s} or {t} matches no generator topic"));
        };
        ensure(perm[gs] == gt, format!("source topic {s} (generator {gs}) projected to generator {gt}, want {}", perm[gs]))?;
        checked += 1;
    }
    ensure(checked == 5, format!("only {checked} source topics observed at least 10 times"))?;
    Ok(format!("projection matches the generator permutation on {checked}/5 topics"))
}

// ---------------------------------------------------------------- 4

fn cache_mechanics() -> Check {
    for seed in 0..1000 {
        catch_unwind(|| common::cache_random_run(10_000 + seed)).map_err(|_| format!("sequence {seed} diverged"))?;
    }
    Ok("1000 randomized sequences match the replay oracle".into())
}

// ---------------------------------------------------------------- 5

fn random_ctx(r: &mut impl Rng, d: usize) -> DecoderContext {
    let mut v = |_| (0..d).map(|_| r.random_range(-1.0..1.0)).collect::<Vec<f64>>();
    DecoderContext { h_t: v(0), c_e: v(1), y_prev: v(2) }
}

fn random_distribution(r: &mut impl Rng, v: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..v).map(|_| r.random_range(0.001..1.0)).collect();
    let z: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / z).collect()
}

fn gradient_check(seed: u64) -> Result<f64, String> {
    let mut r = common::rng(seed);
    let dims = ScorerDims {
        d: r.random_range(1..5),
        score_hidden: [r.random_range(1..6), r.random_range(1..5)],
        gate_hidden: [r.random_range(1..5), r.random_range(1..4)],
    };
    let v = r.random_range(2..8);
    let mut params = CacheScorerParams::init(dims, v, seed).map_err(|e| e.to_string())?;
    let batch: Vec<TrainExample> = (0..r.random_range(1..4))
        .map(|_| {
            let mut ids: Vec<usize> = (0..v).collect();
            ids.shuffle(&mut r);
            ids.truncate(r.random_range(1..=v));
            TrainExample {
                ctx: random_ctx(&mut r, dims.d),
                p_nmt: random_distribution(&mut r, v),
                gold: r.random_range(0..v),
                cache_ids: ids,
            }
        })
        .collect();
    let (_, grads) = loss_and_gradients(&params, &batch).map_err(|e| e.to_string())?;
    let analytic = grads.flatten(&params);
    let theta = params.flatten();
    let h = 1e-5;
    let mut worst = 0.0f64;
    for k in 0..theta.len() {
        let mut t = theta.clone();
        t[k] = theta[k] + h;
        params.load_flat(&t).unwrap();
        let lp = loss_and_gradients(&params, &batch).unwrap().0;
        t[k] = theta[k] - h;
        params.load_flat(&t).unwrap();
        let lm = loss_and_gradients(&params, &batch).unwrap().0;
        let num = (lp - lm) / (2.0 * h);
        let rel = (analytic[k] - num).abs() / (analytic[k].abs() + num.abs()).max(1e-6);
        worst = worst.max(rel);
    }
    Ok(worst)
}

fn scorer_math() -> Check {
    let mut r = common::rng(55);
    let mut max_err = 0.0f64;
    for _ in 0..10_000 {
        let v = r.random_range(1..60);
        let p = random_distribution(&mut r, v);
        let mut ids: Vec<usize> = (0..v).collect();
        ids.shuffle(&mut r);
        ids.truncate(r.random_range(1..=v));
        let scores: Vec<f64> = ids.iter().map(|_| r.random_range(-30.0..30.0)).collect();
        let pc = cache_distribution(&scores);
        let g = r.random_range(0.0..=1.0);
        let out = combine(&p, &pc, &ids, g).map_err(|e| e.to_string())?;
        max_err = max_err.max((out.iter().sum::<f64>() - 1.0).abs());
        let one = combine(&p, &pc, &ids, 1.0).unwrap();
        ensure(one == p, "g=1 differs from the base distribution")?;
        let zero = combine(&p, &pc, &ids, 0.0).unwrap();
        let mut scattered = vec![0.0; v];
        for (&id, &q) in ids.iter().zip(&pc) {
            scattered[id] = q;
        }
        ensure(zero == scattered, "g=0 differs from the scattered cache distribution")?;
    }
    ensure(max_err <= 1e-9, format!("combine sums off by {max_err:e}"))?;
    let mut worst = 0.0f64;
    for seed in 0..100 {
        worst = worst.max(gradient_check(seed)?);
    }
    ensure(worst < 1e-4, format!("worst gradient relative error {worst:e}"))?;
    Ok(format!("max |sum-1| {max_err:.1e}; worst gradient rel. error {worst:.1e} over 100 configs"))
}

// ---------------------------------------------------------------- 6

const TOPICS: usize = 4;
const TOPIC_WORDS: usize = 10;
const GENERAL: usize = 20;
const V: usize = TOPICS * TOPIC_WORDS + GENERAL;

/// Units of 20 tokens: with probability 0.7 a token is drawn from the unit's
/// topic words, otherwise from the shared general words.
fn toy_units(n: usize, r: &mut impl Rng) -> Vec<(usize, Vec<usize>)> {
    (0..n)
        .map(|_| {
            let t = r.random_range(0..TOPICS);
            let toks = (0..20)
                .map(|_| {
                    if r.random_bool(0.7) {
                        t * TOPIC_WORDS + r.random_range(0..TOPIC_WORDS)
                    } else {
                        TOPICS * TOPIC_WORDS + r.random_range(0..GENERAL)
                    }
                })
                .collect();
            (t, toks)
        })
        .collect()
}

fn toy_examples(units: &[(usize, Vec<usize>)], mock: &MockBaseModel) -> Vec<TrainExample> {
    // unigram base: the start row of a model fit on one-token sentences
    let p_nmt = mock.p_nmt(None);
    let mut out = Vec::new();
    for (t, toks) in units {
        let cache_ids: Vec<usize> = (t * TOPIC_WORDS..(t + 1) * TOPIC_WORDS).collect();
        for (i, &gold) in toks.iter().enumerate() {
            out.push(TrainExample { ctx: mock.context(&toks[..i], &[]), cache_ids: cache_ids.clone(), p_nmt: p_nmt.clone(), gold });
        }
    }
    out
}

fn synthetic_uplift() -> Check {
    let mut r = common::rng(606);
    let train = toy_units(300, &mut r);
    let held = toy_units(100, &mut r);
    let singles: Vec<Vec<usize>> = train.iter().flat_map(|(_, t)| t.iter().map(|&x| vec![x])).collect();
    let mock = MockBaseModel::fit(&singles, V, 8, 1).map_err(|e| e.to_string())?;
    let mut train_ex = toy_examples(&train, &mock);
    let held_ex = toy_examples(&held, &mock);
    let dims = ScorerDims { d: 8, score_hidden: [16, 8], gate_hidden: [8, 4] };
    let mut params = CacheScorerParams::init(dims, V, 3).map_err(|e| e.to_string())?;
    for _ in 0..5 {
        train_ex.shuffle(&mut r);
        for batch in train_ex.chunks(16) {
            train_step(&mut params, batch, 0.1).map_err(|e| e.to_string())?;
        }
    }
    let n = held_ex.len() as f64;
    let base: f64 = held_ex.iter().map(|e| -e.p_nmt[e.gold].ln()).sum::<f64>() / n;
    let mut model = 0.0;
    for e in &held_ex {
        model += example_loss(&params, e).map_err(|e| e.to_string())?;
    }
    model /= n;
    let reduction = 1.0 - model / base;
    ensure(reduction >= 0.10, format!("held-out NLL {model:.4} vs base {base:.4}: reduction {:.2}%", 100.0 * reduction))?;
    Ok(format!("held-out NLL {model:.4} vs base {base:.4} ({:.1}% lower)", 100.0 * reduction))
}

// ---------------------------------------------------------------- 7

fn bleu_oracle() -> Check {
    let hand = |m: [f64; 4], t: [f64; 4], h: f64, rl: f64| {
        let bp: f64 = if h >= rl { 1.0 } else { (1.0 - rl / h).exp() };
        100.0 * bp * ((0..4).map(|n| (m[n] / t[n]).ln()).sum::<f64>() / 4.0).exp()
    };
    let cases: [(&[&str], &[&str], f64); 3] = [
        (&["the cat sat on the red mat"], &["the cat sat on the mat"], hand([6., 4., 3., 2.], [7., 6., 5., 4.], 7., 6.)),
        (&["a b c d e f", "x y z w"], &["a b c d e g", "x y z w v u"], hand([9., 7., 5., 3.], [10., 8., 6., 4.], 10., 12.)),
        (
            &["the quick brown fox jumps", "over the lazy dog today."],
            &["the quick brown fox jumped", "over the lazy dog."],
            hand([9., 6., 4., 2.], [11., 9., 7., 5.], 11., 10.),
        ),
    ];
    for (i, (h, rf, want)) in cases.iter().enumerate() {
        let got = corpus_bleu(h, rf).map_err(|e| e.to_string())?.score;
        ensure((got - want).abs() < 1e-12, format!("toy case {}: {got} vs {want}", i + 1))?;
    }
    let refs: Vec<String> = (0..50).map(|i| format!("s{i} alpha beta gamma delta t{i}")).collect();
    ensure(corpus_bleu(&refs, &refs).unwrap().score == 100.0, "identity is not 100")?;
    let worse: Vec<String> = refs.iter().enumerate().map(|(i, s)| if i % 2 == 0 { s.replace("gamma", "zeta") } else { s.clone() }).collect();
    let dom = bootstrap_significance(&refs, &worse, &refs, 1000, 1).map_err(|e| e.to_string())?;
    ensure(dom.p_value < 0.01, format!("dominance p={}", dom.p_value))?;
    let same = bootstrap_significance(&refs, &refs, &refs, 1000, 1).map_err(|e| e.to_string())?;
    ensure(same.p_value == 1.0, format!("identity p={}", same.p_value))?;
    Ok(format!("3 toy cases exact; identity 100.0; p={} (dominance), p={} (identity)", dom.p_value, same.p_value))
}

// ---------------------------------------------------------------- 8

fn side_constraints() -> Check {
    let mut r = common::rng(88);
    let alphabet: Vec<char> = "ab <>topic0123456789 éà«»\t.".chars().collect();
    for _ in 0..10_000 {
        let text: String = (0..r.random_range(0..40)).map(|_| alphabet[r.random_range(0..alphabet.len())]).collect();
        let topic = r.random_range(0..1_000_000);
        let tagged = tag_text(&text, topic);
        let (t, payload) = untag(&tagged.text);
        ensure(t == Some(topic) && payload == text, format!("round trip failed for {text:?}"))?;
    }
    let doc = parse_wikitext_lite(FIGURE_FIXTURE, synth::FIGURE_DOC_ID, "fr");
    let mut corpus = synth::french_training(40, 3);
    corpus.push(doc.clone());
    let stop = lang::stopwords("fr");
    let tag = |g: Granularity| -> Result<Vec<(usize, usize)>, String> {
        let units = prepare_units(&corpus, g, &stop);
        let m = train_lda(&units, &LdaConfig { k: 2, iterations: 300, seed: 5, granularity: g, ..LdaConfig::default() })
            .map_err(|e| e.to_string())?;
        let cfg = TagConfig { granularity: g, infer: InferConfig { iterations: 100, seed: 9 }, stopwords: stop.clone() };
        let out = tag_corpus(std::slice::from_ref(&doc), &m, &cfg).map_err(|e| e.to_string())?;
        Ok(out.sentences.iter().map(|s| (s.section_index, s.tagged.topic)).collect())
    };
    let sec = tag(Granularity::Section)?;
    let within = |s: usize| sec.iter().filter(|x| x.0 == s).map(|x| x.1).collect::<HashSet<_>>();
    let (a, b) = (within(0), within(1));
    ensure(a.len() == 1 && b.len() == 1, format!("tags vary within a section: {sec:?}"))?;
    ensure(a != b, format!("tags equal across the boundary: {sec:?}"))?;
    let whole = tag(Granularity::Document)?;
    ensure(whole.iter().all(|x| x.1 == whole[0].1), format!("document tags differ: {whole:?}"))?;
    Ok(format!("10000 fuzz round trips; section tags {:?} | {:?}", a, b))
}

// ---------------------------------------------------------------- 9

fn pipeline_config(dir: &Path, work: &Path) -> PipelineConfig {
    let sc = SynthConfig { k: 3, docs: 16, seed: 9, ..SynthConfig::default() };
    let (s, t) = synth::bilingual(&sc, "fr", "en", &[2, 0, 1]).unwrap();
    fs::write(dir.join("src.raw.jsonl"), raw_to_jsonl(&synth::to_raw(&s, 6), "none").unwrap()).unwrap();
    fs::write(dir.join("tgt.raw.jsonl"), raw_to_jsonl(&synth::to_raw(&t, 0), "none").unwrap()).unwrap();
    let mut cfg = PipelineConfig::default();
    cfg.seed = 17;
    cfg.input.src_raw = dir.join("src.raw.jsonl");
    cfg.input.tgt_raw = dir.join("tgt.raw.jsonl");
    cfg.work_dir = work.to_path_buf();
    cfg.bpe.merges = 300;
    cfg.lda.k = 3;
    cfg.lda.iterations = 100;
    cfg.lda.infer_iterations = 30;
    cfg.scorer.dims = ScorerDims { d: 8, score_hidden: [12, 6], gate_hidden: [6, 3] };
    cfg.scorer.epochs = 1;
    cfg
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

fn determinism() -> Check {
    // shared inputs; only the work directory differs between runs
    let inputs = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut runs = Vec::new();
    for _ in 0..2 {
        let work = tempfile::tempdir().map_err(|e| e.to_string())?;
        let p = Pipeline::new(pipeline_config(inputs.path(), work.path())).map_err(|e| e.to_string())?;
        p.run_all(None).map_err(|e| e.to_string())?;
        runs.push(snapshot(p.work_dir()));
    }
    let names: Vec<&String> = runs[0].keys().collect();
    ensure(names == runs[1].keys().collect::<Vec<_>>(), "artifact sets differ")?;
    for name in &names {
        ensure(runs[0][*name] == runs[1][*name], format!("{name} differs between runs"))?;
    }
    Ok(format!("{} artifacts byte-identical across two runs", names.len()))
}

// ----------------------------------------------------------------

fn main() {
    let criteria: [(&str, Duration, fn() -> Check); 9] = [
        ("default parameters", Duration::from_secs(1), default_parameters),
        ("LDA recovery", Duration::from_secs(60), lda_recovery),
        ("topic projection recovery", Duration::from_secs(60), projection_recovery),
        ("cache mechanics", Duration::from_secs(10), cache_mechanics),
        ("scorer math", Duration::from_secs(60), scorer_math),
        ("synthetic cache uplift", Duration::from_secs(300), synthetic_uplift),
        ("BLEU oracle", Duration::from_secs(10), bleu_oracle),
        ("side constraints", Duration::from_secs(5), side_constraints),
        ("determinism", Duration::from_secs(600), determinism),
    ];
    let only: Option<usize> = std::env::args().nth(1).and_then(|a| a.parse().ok());
    let mut failed = 0;
    for (i, (name, budget, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if only.is_some_and(|o| o != n) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let result = result.and_then(|msg| {
            if took > *budget {
                Err(format!("{msg}; took {took:.2?}, budget {budget:?}"))
            } else {
                Ok(msg)
            }
        });
        match result {
            Ok(msg) => println!("criterion {n} [{name}]: PASS ({took:.2?}) {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {n} [{name}]: FAIL ({took:.2?}) {msg}");
            }
        }
    }
    if failed > 0 {
        println!("acceptance: {failed} criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
