//! Section-aware corpus preparation and topic conditioning for document-level
//! machine translation.
//!
//! The crate covers the whole offline toolchain:
//!
//! * [`corpus`]: wikitext-lite parsing into flat sections, biography filtering,
//!   length cleaning and monotone sentence alignment.
//! * [`bpe`]: byte-pair-encoding merge learning and segmentation.
//! * [`topics`]: sparse-prior LDA trained with collapsed Gibbs sampling over
//!   sections or whole documents.
//! * [`xalign`]: cross-lingual topic projection from parallel-section
//!   co-occurrence counts.
//! * [`sideconstraints`]: `<topicN>` source-side tagging.
//! * [`cache`]: topic cache and dynamic cache bookkeeping for a decoding session.
//! * [`neural`]: the cache scorer, its gate, interpolation with a base model
//!   distribution, and exact backpropagation.
//! * [`eval`]: 13a tokenisation, corpus BLEU and paired bootstrap resampling.
//! * [`pipeline`]: configuration, artifacts and the end-to-end stage runner.

pub mod artifact;
pub mod bpe;
pub mod cache;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod lang;
pub mod neural;
pub mod pipeline;
pub mod seed;
pub mod sideconstraints;
pub mod synth;
pub mod topics;
pub mod xalign;

pub use error::{Error, Result};
