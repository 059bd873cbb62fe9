//! Style and semantic-relevance evaluation: language models for style
//! scoring, a bag-of-ngrams classifier, overlap metrics, surface style
//! attributes, and BM25 retrieval.

pub mod attrs;
pub mod bm25;
pub mod classifier;
pub mod gru_lm;
pub mod ngram;
pub mod overlap;

pub use attrs::{style_attributes, StyleAttributes};
pub use bm25::{analyze, Bm25Config, Bm25Index};
pub use classifier::{ClassifierConfig, StyleClassifier};
pub use gru_lm::{eval_gru_lm, gru_bits_per_word, train_gru_lm, GruLm, GruLmConfig};
pub use ngram::{NgramLm, NgramLmConfig};
pub use overlap::{bleu1, mean_term_coverage, rouge1, term_coverage};

use serde::{Deserialize, Serialize};

/// Everything the evaluate step can report, in a fixed field order so two
/// runs over the same inputs serialize byte-identically.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct EvalReport {
    pub ngram_bits: Option<f64>,
    pub gru_bits: Option<f64>,
    pub styled_fraction: Option<f64>,
    pub bleu1: Option<f64>,
    pub rouge1: Option<f64>,
    pub term_coverage: Option<f64>,
    pub attributes: Option<StyleAttributes>,
}
