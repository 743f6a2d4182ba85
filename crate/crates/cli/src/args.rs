use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Structure-aware parallel corpus preparation, topic tagging and cache
/// scoring.
#[derive(Debug, Parser)]
#[command(name = "sectionmt", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Pipeline config file (TOML).
    #[arg(long, short = 'c', global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `work_dir`.
    #[arg(long, global = true)]
    pub work_dir: Option<PathBuf>,
    /// Global seed; overrides the config file and the environment.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Unit granularity for topic models; overrides `lda.granularity`.
    #[arg(long, global = true, value_enum)]
    pub granularity: Option<GranularityArg>,
    /// Override any config key, e.g. `--set lda.k=50`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    /// More log output on stderr (-v info, -vv debug).
    #[arg(long, short = 'v', action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GranularityArg {
    Section,
    Document,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SynthKind {
    /// Parallel corpus with a known topic permutation.
    Bilingual,
    /// French/English corpus with a two-section biography fixture.
    Figure,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse raw wikitext documents into sentence corpora.
    Ingest,
    /// Keep only biography documents of a raw document file.
    FilterBio {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Comma-separated category keywords (defaults to the built-in list).
        #[arg(long, value_delimiter = ',')]
        keywords: Vec<String>,
    },
    /// Align sentences within parallel sections.
    AlignSents,
    /// Drop aligned pairs with bad lengths or length ratios.
    Clean,
    /// Learn BPE merges on the cleaned parallel corpus.
    LearnBpe,
    /// Segment a plain-text file (one sentence per line) with a merge table.
    ApplyBpe {
        #[arg(long)]
        merges: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Train source and target topic models.
    TrainLda,
    /// Infer topic distributions for the units of a corpus file.
    InferTopics {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 100)]
        iterations: usize,
    },
    /// Align source topics to target topics.
    AlignTopics,
    /// Prefix source sentences with topic tags.
    Tag,
    /// Train the cache scorer against the mock base model.
    TrainScorer,
    /// Replay the corpus through the mock base model and cache scorer.
    CacheRun,
    /// Corpus BLEU of a hypothesis file against a reference file.
    Eval {
        #[arg(long)]
        hyp: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
    },
    /// Paired bootstrap significance of system A against system B.
    Significance {
        #[arg(long)]
        hyp_a: PathBuf,
        #[arg(long)]
        hyp_b: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long, default_value_t = 1000)]
        resamples: usize,
    },
    /// Run the pipeline stages in order.
    RunAll {
        /// Stop after this stage.
        #[arg(long)]
        until: Option<String>,
    },
    /// Write synthetic raw inputs and a matching config.
    Synth {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, value_enum, default_value_t = SynthKind::Bilingual)]
        kind: SynthKind,
        #[arg(long, default_value_t = 40)]
        docs: usize,
        #[arg(long, default_value_t = 5)]
        k: usize,
    },
    /// Print the effective config and its hash.
    ShowConfig,
}
