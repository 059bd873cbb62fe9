//! Styled image captioning via semantic terms.
//!
//! The pipeline distills sentences (or image captions) into ordered semantic
//! term sequences — lemma/POS word terms plus frame abstractions for verbs —
//! then trains two models around that representation: a term generator that
//! maps image feature vectors to term sequences, and an attention-based
//! language generator that realizes term sequences as text in a requested
//! style. Style and semantic fidelity are scored by n-gram / GRU language
//! models, a binary style classifier, term precision/recall, and a BM25
//! retrieval check.
//!
//! Everything runs on CPU at desk scale: the numeric kernel in [`nncore`] is
//! a small hand-rolled tensor kit with explicit backward passes.

pub mod corpus;
pub mod error;
pub mod gradsuite;
pub mod langgen;
pub mod nncore;
pub mod possel;
pub mod styleval;
pub mod synth;
pub mod termgen;
pub mod termpipe;
pub mod text;
pub mod trainer;

pub use error::{Error, Result};
