//! Rule A/B/C term extraction on top of the tagger, lemmatizer, collocation
//! list, and frame lexicon.

use std::sync::OnceLock;

use super::frames::{FrameLexicon, FrameLookup};
use super::lemma::Lemmatizer;
use super::tagger::{self, TaggerModel};
use super::{coarse_of, CoarseTag, SemanticTerm, TermSequence, Token};
use crate::text::{extra_stopwords, stopwords, tokenize};

/// Which representation the extractor emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermMode {
    /// Full pipeline: filtering, lemma/POS terms, verb→frame abstraction.
    Frames,
    /// Filtering and lemma/POS terms, but verbs stay `lemma_VERB`.
    LemPos,
    /// Filtering only; surviving surface words, no lemmas or tags.
    Words,
}

#[derive(Debug, Clone)]
pub struct TermConfig {
    pub mode: TermMode,
    /// POS classes removed by rule A.
    pub filtered_pos: Vec<CoarseTag>,
    pub merge_collocations: bool,
}

impl Default for TermConfig {
    fn default() -> Self {
        TermConfig {
            mode: TermMode::Frames,
            filtered_pos: vec![
                CoarseTag::Punct,
                CoarseTag::Adv,
                CoarseTag::Adj,
                CoarseTag::Pron,
                CoarseTag::Conj,
                CoarseTag::Det,
                CoarseTag::Adp,
                CoarseTag::Part,
                CoarseTag::Num,
            ],
            merge_collocations: true,
        }
    }
}

/// Tokenize, tag, and lemmatize one sentence with the bundled models.
pub fn preprocess_sentence(text: &str) -> Vec<Token> {
    preprocess_with(text, tagger::default_model(), Lemmatizer::bundled())
}

pub fn preprocess_with(text: &str, tagger: &TaggerModel, lemmatizer: &Lemmatizer) -> Vec<Token> {
    let words = tokenize(text);
    if words.is_empty() {
        return Vec::new();
    }
    let tags = tagger.tag(&words);
    words
        .into_iter()
        .zip(tags)
        .map(|(surface, fine)| {
            let lemma = lemmatizer.lemma(&surface, &fine);
            let pos = coarse_of(&fine);
            Token {
                surface,
                lemma,
                fine,
                pos,
            }
        })
        .collect()
}

/// The bundled collocation phrases, longest first.
pub fn bundled_collocations() -> &'static Vec<Vec<String>> {
    static CELL: OnceLock<Vec<Vec<String>>> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut phrases: Vec<Vec<String>> = include_str!("../../data/collocations.txt")
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| l.split_whitespace().map(str::to_string).collect())
            .collect();
        phrases.sort_by_key(|p: &Vec<String>| std::cmp::Reverse(p.len()));
        phrases
    })
}

/// Merge contiguous collocations into single NOUN tokens, longest match
/// first, scanning left to right. Phrase words match a token's surface or
/// lemma, so plural heads ("hot dogs") still merge; the merged lemma is the
/// canonical phrase.
pub fn merge_collocations(tokens: Vec<Token>, phrases: &[Vec<String>]) -> Vec<Token> {
    let mut out = Vec::with_capacity(tokens.len());
    let mut i = 0;
    'outer: while i < tokens.len() {
        for phrase in phrases {
            let n = phrase.len();
            if n < 2 || i + n > tokens.len() {
                continue;
            }
            let matches = phrase.iter().enumerate().all(|(k, word)| {
                let t = &tokens[i + k];
                t.surface == *word || t.lemma == *word
            });
            if matches {
                let surface = tokens[i..i + n]
                    .iter()
                    .map(|t| t.surface.as_str())
                    .collect::<Vec<_>>()
                    .join("_");
                let lemma = phrase.join("_");
                out.push(Token {
                    surface,
                    lemma,
                    fine: "NN".to_string(),
                    pos: CoarseTag::Noun,
                });
                i += n;
                continue 'outer;
            }
        }
        out.push(tokens[i].clone());
        i += 1;
    }
    out
}

/// Distill a sentence into its ordered semantic terms.
pub fn extract_terms(text: &str, lex: &FrameLexicon, cfg: &TermConfig) -> TermSequence {
    let tokens = preprocess_sentence(text);
    extract_terms_from_tokens(tokens, lex, cfg)
}

pub fn extract_terms_from_tokens(
    tokens: Vec<Token>,
    lex: &FrameLexicon,
    cfg: &TermConfig,
) -> TermSequence {
    let source_len = tokens.iter().filter(|t| t.pos != CoarseTag::Punct).count();
    let tokens = if cfg.merge_collocations {
        merge_collocations(tokens, bundled_collocations())
    } else {
        tokens
    };
    let stop = stopwords();
    let extra = extra_stopwords();
    let mut terms = Vec::new();
    for tok in tokens {
        // Rule A: drop non-semantic POS classes and stop-listed words.
        if cfg.filtered_pos.contains(&tok.pos) {
            continue;
        }
        if stop.contains(&tok.surface)
            || stop.contains(&tok.lemma)
            || extra.contains(&tok.surface)
            || extra.contains(&tok.lemma)
        {
            continue;
        }
        if cfg.mode == TermMode::Words {
            terms.push(SemanticTerm::Word {
                lemma: tok.surface,
                pos: tok.pos,
            });
            continue;
        }
        // Rule C: verbs abstract to frames (Frames mode); rule B otherwise.
        if tok.pos == CoarseTag::Verb && cfg.mode == TermMode::Frames {
            match lex.map_verb_to_frame(&tok.lemma) {
                FrameLookup::Frame(name) => terms.push(SemanticTerm::Frame { name }),
                FrameLookup::Filtered => {}
                FrameLookup::NoEntry => terms.push(SemanticTerm::Word {
                    lemma: tok.lemma,
                    pos: CoarseTag::Verb,
                }),
            }
        } else {
            terms.push(SemanticTerm::Word {
                lemma: tok.lemma,
                pos: tok.pos,
            });
        }
    }
    TermSequence { terms, source_len }
}

impl TermSequence {
    /// Mode-aware rendering: `Words` drops the POS suffixes.
    pub fn rendered_for(&self, mode: TermMode) -> Vec<String> {
        match mode {
            TermMode::Words => self
                .terms
                .iter()
                .map(|t| match t {
                    SemanticTerm::Word { lemma, .. } => lemma.clone(),
                    SemanticTerm::Frame { name } => format!("{name}_FRAME"),
                })
                .collect(),
            _ => self.rendered(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn terms_of(text: &str) -> Vec<String> {
        extract_terms(text, FrameLexicon::bundled(), &TermConfig::default()).rendered()
    }

    #[test]
    fn canonical_fixtures() {
        assert_eq!(
            terms_of("The dog bounded through the fresh grass."),
            vec!["dog_NOUN", "Self_motion_FRAME", "grass_NOUN"]
        );
        assert_eq!(
            terms_of("a train sitting in a station"),
            vec!["train_NOUN", "Placing_FRAME", "station_NOUN"]
        );
    }

    #[test]
    fn all_filtered_sentences_yield_empty_sequences() {
        assert!(terms_of("it is the").is_empty());
        assert!(terms_of("").is_empty());
    }

    #[test]
    fn collocations_merge_longest_first() {
        let toks = preprocess_sentence("a hot dog and a hot air balloon");
        let merged = merge_collocations(toks, bundled_collocations());
        let surfaces: Vec<&str> = merged.iter().map(|t| t.surface.as_str()).collect();
        assert!(surfaces.contains(&"hot_dog"));
        assert!(surfaces.contains(&"hot_air_balloon"));
    }

    #[test]
    fn collocations_match_plural_heads_via_lemma() {
        let toks = preprocess_sentence("two hot dogs on a plate");
        let merged = merge_collocations(toks, bundled_collocations());
        let lemmas: Vec<&str> = merged.iter().map(|t| t.lemma.as_str()).collect();
        assert!(lemmas.contains(&"hot_dog"), "lemmas: {lemmas:?}");
    }

    #[test]
    fn no_collocation_is_identity() {
        let toks = preprocess_sentence("a dog in the park");
        let merged = merge_collocations(toks.clone(), bundled_collocations());
        assert_eq!(toks, merged);
    }

    #[test]
    fn merged_collocations_survive_filtering_as_nouns() {
        // "hot" alone is an adjective and would be dropped by rule A; the
        // merged token must survive as one noun term.
        assert_eq!(
            terms_of("a man eating a hot dog"),
            vec!["man_NOUN", "Ingestion_FRAME", "hot_dog_NOUN"]
        );
    }

    #[test]
    fn style_words_are_stripped() {
        let seq = extract_terms(
            "she quickly watched the very big dog",
            FrameLexicon::bundled(),
            &TermConfig::default(),
        );
        for t in &seq.terms {
            if let SemanticTerm::Word { pos, .. } = t {
                assert!(
                    !matches!(
                        pos,
                        CoarseTag::Det
                            | CoarseTag::Adp
                            | CoarseTag::Pron
                            | CoarseTag::Adj
                            | CoarseTag::Adv
                            | CoarseTag::Conj
                            | CoarseTag::Punct
                    ),
                    "style word leaked: {t:?}"
                );
            }
        }
        assert_eq!(seq.rendered(), vec!["Perception_active_FRAME", "dog_NOUN"]);
    }

    #[test]
    fn unlisted_verbs_fall_back_to_word_terms() {
        assert_eq!(terms_of("she kissed the baby"), vec!["kiss_VERB", "baby_NOUN"]);
    }

    #[test]
    fn stop_listed_verbs_never_evoke_frames() {
        // "is"/"was" are stop words; they must not become frame terms even
        // though their lemma "be" could in principle carry one.
        assert!(terms_of("it is a").is_empty());
        assert_eq!(terms_of("the dog was in the park"), vec!["dog_NOUN", "park_NOUN"]);
    }

    #[test]
    fn term_order_follows_the_source() {
        assert_eq!(
            terms_of("she watched the dog run"),
            vec!["Perception_active_FRAME", "dog_NOUN", "Self_motion_FRAME"]
        );
    }

    #[test]
    fn source_len_counts_words_not_punctuation() {
        let seq = extract_terms(
            "The dog bounded through the fresh grass.",
            FrameLexicon::bundled(),
            &TermConfig::default(),
        );
        assert_eq!(seq.source_len, 7);
        assert!(seq.terms.len() <= seq.source_len);
    }

    #[test]
    fn lempos_mode_keeps_verbs_as_lemmas() {
        let cfg = TermConfig {
            mode: TermMode::LemPos,
            ..Default::default()
        };
        let seq = extract_terms("a train sitting in a station", FrameLexicon::bundled(), &cfg);
        assert_eq!(seq.rendered(), vec!["train_NOUN", "sit_VERB", "station_NOUN"]);
    }

    #[test]
    fn words_mode_keeps_surfaces() {
        let cfg = TermConfig {
            mode: TermMode::Words,
            ..Default::default()
        };
        let seq = extract_terms("a train sitting in a station", FrameLexicon::bundled(), &cfg);
        assert_eq!(seq.rendered_for(TermMode::Words), vec!["train", "sitting", "station"]);
    }

    #[test]
    fn extraction_is_deterministic() {
        let a = terms_of("a man riding a horse on a beach");
        let b = terms_of("a man riding a horse on a beach");
        assert_eq!(a, b);
    }
}
