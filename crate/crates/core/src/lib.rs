//! Synthesis and evaluation toolkit for Chinese grammatical error correction corpora.
//!
//! * [`text`]: tokens, tagged sentences, edits and the error taxonomy.
//! * [`tagging`]: lexicon segmentation, pre-tagged input and component identification.
//! * [`lm`]: character n-gram language model and perplexity filtering.
//! * [`rules`]: corruption rules for the 26 fine-grained error types.
//! * [`generator`]: corpus-scale pair generation and random augmentation.
//! * [`metrics`]: Levenshtein, MaxMatch scoring, corpus statistics and Fleiss' kappa.

mod error;
pub mod text;
pub mod tagging;
pub mod lm;
pub mod metrics;
pub mod rules;
pub mod generator;

pub use error::{Error, ErrorKind, Result};
