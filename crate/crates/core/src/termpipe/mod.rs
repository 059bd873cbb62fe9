//! Sentence → semantic-term pipeline: POS tagging, lemmatization,
//! collocation merging, non-semantic-word filtering, and verb→frame
//! abstraction.

pub mod extract;
pub mod frames;
pub mod lemma;
pub mod tagger;

pub use extract::{extract_terms, merge_collocations, preprocess_sentence, TermConfig, TermMode};
pub use frames::{FrameLexicon, FrameLookup};
pub use lemma::Lemmatizer;
pub use tagger::TaggerModel;

use std::fmt;

/// Coarse part-of-speech classes. Fine Penn-style tags from the bundled
/// tagger collapse onto these; the mapping lives in [`coarse_of`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoarseTag {
    Noun,
    Verb,
    Adj,
    Adv,
    Pron,
    Det,
    Adp,
    Conj,
    Part,
    Num,
    Punct,
    Other,
}

impl fmt::Display for CoarseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CoarseTag::Noun => "NOUN",
            CoarseTag::Verb => "VERB",
            CoarseTag::Adj => "ADJ",
            CoarseTag::Adv => "ADV",
            CoarseTag::Pron => "PRON",
            CoarseTag::Det => "DET",
            CoarseTag::Adp => "ADP",
            CoarseTag::Conj => "CONJ",
            CoarseTag::Part => "PART",
            CoarseTag::Num => "NUM",
            CoarseTag::Punct => "PUNCT",
            CoarseTag::Other => "OTHER",
        };
        f.write_str(s)
    }
}

/// Fine → coarse tag mapping:
/// NN/NNS/NNP/NNPS → NOUN; VB/VBD/VBG/VBN/VBP/VBZ/MD → VERB;
/// JJ/JJR/JJS → ADJ; RB/RBR/RBS/WRB/EX → ADV; PRP/PRP$/WP/WP$ → PRON;
/// DT/WDT/PDT → DET; IN → ADP; CC → CONJ; TO/RP/POS → PART; CD → NUM;
/// `,`/`.` → PUNCT; everything else (UH, FW, SYM, …) → OTHER.
pub fn coarse_of(fine: &str) -> CoarseTag {
    match fine {
        "NN" | "NNS" | "NNP" | "NNPS" => CoarseTag::Noun,
        "VB" | "VBD" | "VBG" | "VBN" | "VBP" | "VBZ" | "MD" => CoarseTag::Verb,
        "JJ" | "JJR" | "JJS" => CoarseTag::Adj,
        "RB" | "RBR" | "RBS" | "WRB" | "EX" => CoarseTag::Adv,
        "PRP" | "PRP$" | "WP" | "WP$" => CoarseTag::Pron,
        "DT" | "WDT" | "PDT" => CoarseTag::Det,
        "IN" => CoarseTag::Adp,
        "CC" => CoarseTag::Conj,
        "TO" | "RP" | "POS" => CoarseTag::Part,
        "CD" => CoarseTag::Num,
        "," | "." => CoarseTag::Punct,
        _ => CoarseTag::Other,
    }
}

/// One analyzed token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub lemma: String,
    /// Fine Penn-style tag from the tagger (kept for tense analysis).
    pub fine: String,
    pub pos: CoarseTag,
}

/// One semantic term: a lemma/POS word term or a frame abstraction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SemanticTerm {
    Word { lemma: String, pos: CoarseTag },
    Frame { name: String },
}

impl SemanticTerm {
    /// Canonical rendering: `lemma_POS` or `Name_FRAME`.
    pub fn render(&self) -> String {
        match self {
            SemanticTerm::Word { lemma, pos } => format!("{lemma}_{pos}"),
            SemanticTerm::Frame { name } => format!("{name}_FRAME"),
        }
    }
}

impl fmt::Display for SemanticTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Ordered semantic terms distilled from one sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermSequence {
    pub terms: Vec<SemanticTerm>,
    /// Word count of the source sentence (n; terms length M ≤ n).
    pub source_len: usize,
}

impl TermSequence {
    pub fn rendered(&self) -> Vec<String> {
        self.terms.iter().map(SemanticTerm::render).collect()
    }

    pub fn joined(&self) -> String {
        self.rendered().join(" ")
    }
}
