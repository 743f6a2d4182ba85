//! Sparse-prior LDA over sections or whole documents.

mod lda;
mod model;
mod units;

use serde::{Deserialize, Serialize};

pub use lda::{train_lda, LdaSampler};
pub use model::{dominant_topic, infer_topics, InferConfig, TopicDistribution, TopicModel, Vocab, MODEL_FORMAT};
pub use units::{bag_of_words, prepare_units, units_for, Unit, UnitId};

use crate::error::{Error, Result};

/// Text unit a topic model is trained and applied on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    #[default]
    Section,
    Document,
}

impl std::fmt::Display for Granularity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Granularity::Section => "section",
            Granularity::Document => "document",
        })
    }
}

impl std::str::FromStr for Granularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "section" => Ok(Granularity::Section),
            "document" => Ok(Granularity::Document),
            _ => Err(Error::config(format!("unknown granularity {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LdaConfig {
    /// Number of topics.
    pub k: usize,
    /// Unit–topic Dirichlet prior.
    pub alpha: f64,
    /// Topic–word Dirichlet prior.
    pub beta: f64,
    /// Full Gibbs sweeps; burn-in is included in this count.
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub granularity: Granularity,
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig {
            k: 100,
            alpha: 0.001,
            beta: 0.01,
            iterations: 1000,
            burn_in: 0,
            seed: 0,
            granularity: Granularity::Section,
        }
    }
}

impl LdaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::config("number of topics must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) || !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::config("alpha and beta must be positive"));
        }
        if self.burn_in > self.iterations {
            return Err(Error::config("burn_in cannot exceed iterations"));
        }
        Ok(())
    }
}
