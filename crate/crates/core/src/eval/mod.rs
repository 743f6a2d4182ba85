//! Corpus BLEU with 13a tokenisation and paired bootstrap significance.

mod bleu;
mod bootstrap;
mod tok13a;

pub use bleu::{corpus_bleu, corpus_bleu_tokens, sentence_bleu_smoothed, BleuReport, BleuStats, MAX_ORDER};
pub use bootstrap::{
    bootstrap_significance, paired_bootstrap_with_indices, resample_indices, Orientation,
    Significance,
};
pub use tok13a::tokenize_13a;
