//! Surface attributes that characterise a writing style: tense usage,
//! first-person narration, and verb variety. All computed from the bundled
//! tagger/lemmatizer, so they work on raw sentences.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::termpipe::extract::preprocess_sentence;

const FIRST_PERSON: [&str; 10] =
    ["i", "me", "my", "mine", "myself", "we", "us", "our", "ours", "ourselves"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleAttributes {
    /// Fraction of sentences containing a past-tense verb (VBD/VBN).
    pub past_tense: f64,
    /// Fraction containing a present-tense verb (VBG/VBP/VBZ).
    pub present_tense: f64,
    /// Fraction containing a first-person pronoun.
    pub first_person: f64,
    pub unique_verb_lemmas: usize,
    pub sentences: usize,
}

pub fn style_attributes(sentences: &[String]) -> Result<StyleAttributes> {
    if sentences.is_empty() {
        return Err(Error::Eval("no sentences to compute style attributes on".into()));
    }
    let mut past = 0usize;
    let mut present = 0usize;
    let mut first = 0usize;
    let mut verbs: HashSet<String> = HashSet::new();
    for sent in sentences {
        let tokens = preprocess_sentence(sent);
        let mut has_past = false;
        let mut has_present = false;
        let mut has_first = false;
        for tok in &tokens {
            match tok.fine.as_str() {
                "VBD" | "VBN" => has_past = true,
                "VBG" | "VBP" | "VBZ" => has_present = true,
                _ => {}
            }
            if tok.fine.starts_with("VB") {
                verbs.insert(tok.lemma.clone());
            }
            if FIRST_PERSON.contains(&tok.surface.as_str()) {
                has_first = true;
            }
        }
        past += has_past as usize;
        present += has_present as usize;
        first += has_first as usize;
    }
    let n = sentences.len() as f64;
    Ok(StyleAttributes {
        past_tense: past as f64 / n,
        present_tense: present as f64 / n,
        first_person: first as f64 / n,
        unique_verb_lemmas: verbs.len(),
        sentences: sentences.len(),
    })
}
