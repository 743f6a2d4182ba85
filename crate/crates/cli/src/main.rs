mod args;

use std::fs;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, GlobalArgs, GranularityArg, SynthKind};
use sectionmt::artifact::{text_lines, to_jsonl, Header, NO_CONFIG};
use sectionmt::bpe::MergeTable;
use sectionmt::corpus::io::{corpus_from_jsonl, raw_from_jsonl, raw_to_jsonl, RawDocument};
use sectionmt::corpus::{default_biography_keywords, is_biography, parse_wikitext_lite};
use sectionmt::eval::{bootstrap_significance, corpus_bleu};
use sectionmt::pipeline::{seed_offsets, Pipeline, PipelineConfig, Stage, SEED_ENV};
use sectionmt::seed::derive;
use sectionmt::synth::{bilingual, figure_corpus, to_raw, SynthConfig};
use sectionmt::topics::{infer_topics, units_for, InferConfig, TopicModel};
use sectionmt::{lang, Error, Result};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = serde_json::json!({ "error": e.kind(), "code": e.exit_code(), "message": e.to_string() });
            eprintln!("{line}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_config(g: &GlobalArgs) -> Result<PipelineConfig> {
    let env_seed = std::env::var(SEED_ENV).ok();
    let mut overrides = Vec::new();
    for o in &g.overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| Error::config(format!("--set expects KEY=VALUE, got {o:?}")))?;
        overrides.push((k.trim().to_string(), v.trim().to_string()));
    }
    if let Some(s) = g.seed {
        overrides.push(("seed".into(), s.to_string()));
    }
    if let Some(gr) = g.granularity {
        let v = match gr {
            GranularityArg::Section => "\"section\"",
            GranularityArg::Document => "\"document\"",
        };
        overrides.push(("lda.granularity".into(), v.into()));
    }
    let mut cfg = PipelineConfig::load(g.config.as_deref(), env_seed.as_deref(), &overrides)?;
    if let Some(w) = &g.work_dir {
        cfg.work_dir = w.clone();
    }
    Ok(cfg)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::input(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    let mut staged = sectionmt::artifact::StagedFiles::new();
    staged.write(path, text.as_bytes())?;
    staged.commit()?;
    Ok(())
}

fn run_stage(g: &GlobalArgs, stage: Stage) -> Result<()> {
    let p = Pipeline::new(load_config(g)?)?;
    let rec = p.run_stage(stage)?;
    log::info!("{}: {}", rec.name, serde_json::to_string(&rec.summary)?);
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Ingest => run_stage(g, Stage::Ingest),
        Command::AlignSents => run_stage(g, Stage::AlignSents),
        Command::Clean => run_stage(g, Stage::Clean),
        Command::LearnBpe => run_stage(g, Stage::LearnBpe),
        Command::TrainLda => run_stage(g, Stage::TrainLda),
        Command::AlignTopics => run_stage(g, Stage::AlignTopics),
        Command::Tag => run_stage(g, Stage::Tag),
        Command::TrainScorer => run_stage(g, Stage::TrainScorer),
        Command::CacheRun => run_stage(g, Stage::CacheRun),
        Command::RunAll { until } => {
            let until = until.as_deref().map(str::parse::<Stage>).transpose()?;
            let p = Pipeline::new(load_config(g)?)?;
            for rec in p.run_all(until)? {
                log::info!("{}: {}", rec.name, serde_json::to_string(&rec.summary)?);
            }
            Ok(())
        }
        Command::ShowConfig => {
            let cfg = load_config(g)?;
            print!("# config_hash = {}\n{}", cfg.hash(), cfg.to_toml()?);
            Ok(())
        }
        Command::FilterBio { input, output, keywords } => filter_bio(input, output, keywords),
        Command::ApplyBpe { merges, input, output } => {
            let table = MergeTable::from_text(&read(merges)?, &merges.display().to_string())?;
            let mut out = String::new();
            for line in text_lines(&read(input)?) {
                let tokens: Vec<&str> = line.split_whitespace().collect();
                out.push_str(&table.apply_tokens(&tokens).join(" "));
                out.push('\n');
            }
            write(output, &out)
        }
        Command::InferTopics { model, corpus, output, iterations } => {
            infer(g, model, corpus, output, *iterations)
        }
        Command::Eval { hyp, reference } => {
            let (h, r) = (read(hyp)?, read(reference)?);
            let report = corpus_bleu(&text_lines(&h), &text_lines(&r))?;
            print!("{}", report.to_kv());
            Ok(())
        }
        Command::Significance { hyp_a, hyp_b, reference, resamples } => {
            let cfg = load_config(g)?;
            let (a, b, r) = (read(hyp_a)?, read(hyp_b)?, read(reference)?);
            let (a, b, r) = (text_lines(&a), text_lines(&b), text_lines(&r));
            let sig = bootstrap_significance(&a, &b, &r, *resamples, cfg.module_seed(seed_offsets::BOOTSTRAP))?;
            print!("{}", sig.to_kv());
            Ok(())
        }
        Command::Synth { out_dir, kind, docs, k } => synth(g, out_dir, *kind, *docs, *k),
    }
}

fn filter_bio(input: &Path, output: &Path, keywords: &[String]) -> Result<()> {
    let label = input.display().to_string();
    let raw = raw_from_jsonl(&read(input)?, &label)?;
    let keywords = if keywords.is_empty() { default_biography_keywords() } else { keywords.to_vec() };
    let kept: Vec<RawDocument> = raw
        .into_iter()
        .filter(|r| {
            let mut d = parse_wikitext_lite(&r.text, &r.doc_id, &r.lang);
            d.categories = r.categories.clone();
            is_biography(&d, &keywords)
        })
        .collect();
    log::info!("filter-bio: kept {} documents", kept.len());
    write(output, &raw_to_jsonl(&kept, NO_CONFIG)?)
}

fn infer(g: &GlobalArgs, model: &Path, corpus: &Path, output: &Path, iterations: usize) -> Result<()> {
    let cfg = load_config(g)?;
    let m = TopicModel::from_text(&read(model)?, &model.display().to_string())?;
    let docs = corpus_from_jsonl(&read(corpus)?, &corpus.display().to_string())?;
    let lang = docs.first().map_or("en", |d| d.lang.as_str()).to_string();
    let units = units_for(&docs, m.config.granularity, &lang::stopwords(&lang));
    let base = cfg.module_seed(seed_offsets::INFER);
    let records: Vec<serde_json::Value> = units
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let dist = infer_topics(&m, u, &InferConfig { iterations, seed: derive(base, i as u64) });
            serde_json::json!({
                "unit_id": u.id.to_string(),
                "dominant": dist.dominant(),
                "flagged": dist.flagged,
                "probs": dist.probs,
            })
        })
        .collect();
    write(output, &to_jsonl(&Header::new("sectionmt.topic-distributions", 1, NO_CONFIG), &records)?)
}

fn synth(g: &GlobalArgs, out_dir: &Path, kind: SynthKind, docs: usize, k: usize) -> Result<()> {
    let seed = g.seed.unwrap_or(0);
    let (src, tgt, k) = match kind {
        SynthKind::Bilingual => {
            let sc = SynthConfig { k, docs, seed, ..Default::default() };
            let perm: Vec<usize> = (0..k).map(|t| (t + 1) % k).collect();
            let (s, t) = bilingual(&sc, "fr", "en", &perm)?;
            (to_raw(&s, 10), to_raw(&t, 10), k)
        }
        SynthKind::Figure => {
            let (s, t) = figure_corpus(docs, seed);
            (s, t, 2)
        }
    };
    fs::create_dir_all(out_dir)?;
    write(&out_dir.join("src.raw.jsonl"), &raw_to_jsonl(&src, NO_CONFIG)?)?;
    write(&out_dir.join("tgt.raw.jsonl"), &raw_to_jsonl(&tgt, NO_CONFIG)?)?;
    let config = format!(
        "seed = {seed}\nwork_dir = \"work\"\n\n[input]\nsrc_raw = \"src.raw.jsonl\"\ntgt_raw = \"tgt.raw.jsonl\"\n\n\
         [bpe]\nmerges = 500\n\n[lda]\nk = {k}\niterations = 200\ninfer_iterations = 50\n\n\
         [scorer]\nepochs = 2\n\n[scorer.dims]\nd = 16\nscore_hidden = [32, 16]\ngate_hidden = [16, 8]\n"
    );
    write(&out_dir.join("config.toml"), &config)?;
    log::info!("synth: wrote {} documents per side to {}", src.len(), out_dir.display());
    Ok(())
}
