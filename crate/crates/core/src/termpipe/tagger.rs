//! Averaged-perceptron POS tagger over a fixed fine tagset, trained offline
//! on the bundled hand-tagged corpus and shipped as a data file. Words seen
//! with only one tag in training are looked up directly; everything else is
//! scored feature-by-feature with greedy left-to-right decoding.

use std::collections::{BTreeMap, HashMap};
use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::text::NUM_TOKEN;

const START: [&str; 2] = ["-START-", "-START2-"];
const END: [&str; 2] = ["-END-", "-END2-"];

#[derive(Debug, Clone, PartialEq)]
pub struct TaggerModel {
    classes: Vec<String>,
    /// Unambiguous word → tag shortcut.
    lexicon: BTreeMap<String, String>,
    /// feature → sparse (class index, averaged weight) pairs.
    weights: BTreeMap<String, Vec<(usize, f64)>>,
}

/// Tokens whose tag is fixed by construction rather than learned.
fn forced_tag(word: &str) -> Option<&'static str> {
    match word {
        "," => Some(","),
        "." => Some("."),
        w if w == NUM_TOKEN => Some("CD"),
        _ => None,
    }
}

fn suffix(word: &str) -> &str {
    let n = word.len();
    if n <= 3 {
        word
    } else {
        &word[n - 3..]
    }
}

fn prefix(word: &str) -> &str {
    &word[..word.chars().next().map_or(0, char::len_utf8)]
}

/// Feature templates in a fixed order (scoring order matters for exact
/// reproducibility of the f64 sums).
fn features(words: &[String], i: usize, prev: &str, prev2: &str) -> Vec<String> {
    let w = words[i].as_str();
    let w_m1 = if i >= 1 { words[i - 1].as_str() } else { START[0] };
    let w_m2 = if i >= 2 { words[i - 2].as_str() } else { START[1] };
    let w_p1 = words.get(i + 1).map_or(END[0], |s| s.as_str());
    let w_p2 = words.get(i + 2).map_or(END[1], |s| s.as_str());
    vec![
        "bias".to_string(),
        format!("i suffix {}", suffix(w)),
        format!("i pref1 {}", prefix(w)),
        format!("i-1 tag {prev}"),
        format!("i-2 tag {prev2}"),
        format!("i-1 tag i-2 tag {prev} {prev2}"),
        format!("i word {w}"),
        format!("i-1 tag i word {prev} {w}"),
        format!("i-1 word {w_m1}"),
        format!("i-1 suffix {}", suffix(w_m1)),
        format!("i-2 word {w_m2}"),
        format!("i+1 word {w_p1}"),
        format!("i+1 suffix {}", suffix(w_p1)),
        format!("i+2 word {w_p2}"),
    ]
}

impl TaggerModel {
    /// Tag a normalized token sequence with fine tags.
    pub fn tag(&self, words: &[String]) -> Vec<String> {
        let mut out = Vec::with_capacity(words.len());
        let mut prev = START[0].to_string();
        let mut prev2 = START[1].to_string();
        for i in 0..words.len() {
            let w = words[i].as_str();
            let tag = if let Some(t) = forced_tag(w) {
                t.to_string()
            } else if let Some(t) = self.lexicon.get(w) {
                t.clone()
            } else {
                let feats = features(words, i, &prev, &prev2);
                self.classes[self.score_argmax(&feats)].clone()
            };
            prev2 = std::mem::replace(&mut prev, tag.clone());
            out.push(tag);
        }
        out
    }

    fn score_argmax(&self, feats: &[String]) -> usize {
        let mut scores = vec![0.0f64; self.classes.len()];
        for f in feats {
            if let Some(entries) = self.weights.get(f) {
                for (ci, w) in entries {
                    scores[*ci] += w;
                }
            }
        }
        let mut best = 0;
        for c in 1..scores.len() {
            if scores[c] > scores[best] {
                best = c;
            }
        }
        best
    }

    /// Serialize deterministically (sorted maps, shortest-round-trip floats).
    pub fn serialize(&self) -> String {
        let mut out = String::from("taggermodel v1\n");
        out.push_str("classes");
        for c in &self.classes {
            out.push(' ');
            out.push_str(c);
        }
        out.push('\n');
        for (word, tag) in &self.lexicon {
            out.push_str(&format!("L\t{word}\t{tag}\n"));
        }
        for (feat, entries) in &self.weights {
            out.push_str(&format!("W\t{feat}\t"));
            for (k, (ci, w)) in entries.iter().enumerate() {
                if k > 0 {
                    out.push(' ');
                }
                out.push_str(&format!("{ci}:{w}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<TaggerModel> {
        let mut lines = text.lines();
        match lines.next() {
            Some("taggermodel v1") => {}
            other => {
                return Err(Error::Lexicon(format!(
                    "bad tagger model header: {other:?}"
                )))
            }
        }
        let classes_line = lines
            .next()
            .ok_or_else(|| Error::Lexicon("missing classes line".into()))?;
        let classes: Vec<String> = classes_line
            .strip_prefix("classes")
            .ok_or_else(|| Error::Lexicon("missing classes prefix".into()))?
            .split_whitespace()
            .map(str::to_string)
            .collect();
        let mut lexicon = BTreeMap::new();
        let mut weights = BTreeMap::new();
        for line in lines {
            if line.is_empty() {
                continue;
            }
            let mut parts = line.splitn(3, '\t');
            match (parts.next(), parts.next(), parts.next()) {
                (Some("L"), Some(word), Some(tag)) => {
                    lexicon.insert(word.to_string(), tag.to_string());
                }
                (Some("W"), Some(feat), Some(rest)) => {
                    let mut entries = Vec::new();
                    for pair in rest.split(' ') {
                        let (ci, w) = pair
                            .split_once(':')
                            .ok_or_else(|| Error::Lexicon(format!("bad weight pair {pair}")))?;
                        let ci: usize = ci
                            .parse()
                            .map_err(|_| Error::Lexicon(format!("bad class index {ci}")))?;
                        let w: f64 = w
                            .parse()
                            .map_err(|_| Error::Lexicon(format!("bad weight {w}")))?;
                        entries.push((ci, w));
                    }
                    weights.insert(feat.to_string(), entries);
                }
                _ => return Err(Error::Lexicon(format!("bad model line: {line}"))),
            }
        }
        Ok(TaggerModel {
            classes,
            lexicon,
            weights,
        })
    }
}

/// Parse the `word_TAG word_TAG …` training corpus (`#` lines are comments).
pub fn parse_tagged_corpus(text: &str) -> Result<Vec<Vec<(String, String)>>> {
    let mut sentences = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut sent = Vec::new();
        for tok in line.split_whitespace() {
            let (word, tag) = tok.rsplit_once('_').ok_or_else(|| Error::Record {
                line: i + 1,
                msg: format!("token without tag: {tok}"),
            })?;
            sent.push((word.to_string(), tag.to_string()));
        }
        sentences.push(sent);
    }
    Ok(sentences)
}

struct TrainSlot {
    w: f64,
    total: f64,
    stamp: u64,
}

/// Train an averaged perceptron. Deterministic for fixed inputs: epoch
/// shuffles use seeded RNG streams, scoring iterates features in
/// construction order, and ties break toward the lower class index.
pub fn train(sentences: &[Vec<(String, String)>], epochs: usize, seed: u64) -> TaggerModel {
    // Class list and the unambiguous-word lexicon.
    let mut tag_sets: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    let mut classes: Vec<String> = Vec::new();
    for sent in sentences {
        for (w, t) in sent {
            if !classes.contains(t) {
                classes.push(t.clone());
            }
            *tag_sets.entry(w.clone()).or_default().entry(t.clone()).or_insert(0) += 1;
        }
    }
    classes.sort();
    let class_idx: HashMap<&str, usize> = classes
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();
    // Only frequent unambiguous words enter the lexicon; rarer ones keep
    // flowing through the perceptron so suffix/context features get trained.
    let lexicon: BTreeMap<String, String> = tag_sets
        .iter()
        .filter(|(w, tags)| {
            tags.len() == 1
                && tags.values().sum::<usize>() >= LEXICON_MIN_COUNT
                && forced_tag(w).is_none()
        })
        .map(|(w, tags)| (w.clone(), tags.keys().next().unwrap().clone()))
        .collect();

    let mut slots: HashMap<String, HashMap<usize, TrainSlot>> = HashMap::new();
    let mut q: u64 = 0;
    let update = |slots: &mut HashMap<String, HashMap<usize, TrainSlot>>,
                      q: u64,
                      feat: &str,
                      class: usize,
                      delta: f64| {
        let slot = slots
            .entry(feat.to_string())
            .or_default()
            .entry(class)
            .or_insert(TrainSlot {
                w: 0.0,
                total: 0.0,
                stamp: 0,
            });
        slot.total += slot.w * (q - slot.stamp) as f64;
        slot.stamp = q;
        slot.w += delta;
    };

    let mut order: Vec<usize> = (0..sentences.len()).collect();
    for epoch in 0..epochs {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(epoch as u64 + 1);
        order.shuffle(&mut rng);
        for &si in &order {
            let sent = &sentences[si];
            let words: Vec<String> = sent.iter().map(|(w, _)| w.clone()).collect();
            let mut prev = START[0].to_string();
            let mut prev2 = START[1].to_string();
            for (i, (w, truth)) in sent.iter().enumerate() {
                let guess = if let Some(t) = forced_tag(w) {
                    t.to_string()
                } else if let Some(t) = lexicon.get(w) {
                    t.clone()
                } else {
                    q += 1;
                    let feats = features(&words, i, &prev, &prev2);
                    // Score against current (non-averaged) weights.
                    let mut scores = vec![0.0f64; classes.len()];
                    for f in &feats {
                        if let Some(per_class) = slots.get(f) {
                            for (ci, slot) in per_class {
                                scores[*ci] += slot.w;
                            }
                        }
                    }
                    let mut best = 0;
                    for c in 1..scores.len() {
                        if scores[c] > scores[best] {
                            best = c;
                        }
                    }
                    let truth_idx = class_idx[truth.as_str()];
                    if best != truth_idx {
                        for f in &feats {
                            update(&mut slots, q, f, truth_idx, 1.0);
                            update(&mut slots, q, f, best, -1.0);
                        }
                    }
                    classes[best].clone()
                };
                // Context uses the produced tag, matching inference.
                prev2 = std::mem::replace(&mut prev, guess);
            }
        }
    }

    // Average the weights over all update steps.
    let mut weights: BTreeMap<String, Vec<(usize, f64)>> = BTreeMap::new();
    for (feat, per_class) in slots {
        let mut entries: Vec<(usize, f64)> = per_class
            .into_iter()
            .filter_map(|(ci, slot)| {
                let total = slot.total + slot.w * (q - slot.stamp) as f64;
                let avg = total / q as f64;
                (avg != 0.0).then_some((ci, avg))
            })
            .collect();
        entries.sort_by_key(|(ci, _)| *ci);
        if !entries.is_empty() {
            weights.insert(feat, entries);
        }
    }
    TaggerModel {
        classes,
        lexicon,
        weights,
    }
}

pub const TRAIN_EPOCHS: usize = 8;
pub const TRAIN_SEED: u64 = 1;
/// Minimum corpus count for a word to bypass the perceptron via the lexicon.
pub const LEXICON_MIN_COUNT: usize = 5;

/// The embedded training corpus.
pub fn bundled_corpus() -> &'static str {
    include_str!("../../data/tagger_train.txt")
}

/// The shipped pre-trained model.
pub fn default_model() -> &'static TaggerModel {
    static CELL: OnceLock<TaggerModel> = OnceLock::new();
    CELL.get_or_init(|| {
        TaggerModel::parse(include_str!("../../data/tagger.model"))
            .expect("bundled tagger model parses")
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        crate::text::tokenize(s)
    }

    fn train_bundled() -> TaggerModel {
        let corpus = parse_tagged_corpus(bundled_corpus()).unwrap();
        train(&corpus, TRAIN_EPOCHS, TRAIN_SEED)
    }

    #[test]
    fn shipped_model_is_byte_identical_to_retraining() {
        // Regenerate with: REGEN_TAGGER=1 cargo test -p semstyle-core
        //   shipped_model_is_byte_identical_to_retraining
        let model = train_bundled();
        let serialized = model.serialize();
        if std::env::var("REGEN_TAGGER").is_ok() {
            let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/tagger.model");
            std::fs::write(path, &serialized).unwrap();
            return;
        }
        let shipped = include_str!("../../data/tagger.model");
        assert_eq!(
            serialized, shipped,
            "tagger.model is stale; regenerate with REGEN_TAGGER=1"
        );
    }

    #[test]
    fn model_round_trips_through_serialization() {
        let model = train_bundled();
        let parsed = TaggerModel::parse(&model.serialize()).unwrap();
        assert_eq!(model, parsed);
    }

    #[test]
    fn training_accuracy_on_its_own_corpus_is_high() {
        let corpus = parse_tagged_corpus(bundled_corpus()).unwrap();
        let model = train(&corpus, TRAIN_EPOCHS, TRAIN_SEED);
        let mut right = 0usize;
        let mut total = 0usize;
        for sent in &corpus {
            let words: Vec<String> = sent.iter().map(|(w, _)| w.clone()).collect();
            let tags = model.tag(&words);
            for ((_, truth), got) in sent.iter().zip(&tags) {
                total += 1;
                if truth == got {
                    right += 1;
                }
            }
        }
        let acc = right as f64 / total as f64;
        assert!(acc > 0.97, "training-set accuracy {acc}");
    }

    #[test]
    fn rock_is_disambiguated_by_context() {
        let model = default_model();
        let noun = model.tag(&toks("the rock sat on the sand"));
        assert_eq!(noun[1], "NN", "tags: {noun:?}");
        let verb = model.tag(&toks("they rock the boat"));
        assert_eq!(verb[1], "VBP", "tags: {verb:?}");
    }

    #[test]
    fn forced_tokens_bypass_the_model() {
        let model = default_model();
        let tags = model.tag(&toks("3 dogs , 4 cats ."));
        assert_eq!(tags[0], "CD");
        assert_eq!(tags[2], ",");
        assert_eq!(tags[5], ".");
    }

    #[test]
    fn unseen_inflections_get_plausible_tags() {
        let model = default_model();
        // "strolling" is not in the seed corpus; suffix features carry it.
        let tags = model.tag(&toks("a man strolling in the park"));
        assert_eq!(tags[2], "VBG", "tags: {tags:?}");
    }

    #[test]
    fn corpus_parser_rejects_untagged_tokens() {
        assert!(parse_tagged_corpus("dog NN").is_err());
        assert!(parse_tagged_corpus("dog_NN cat_NN").is_ok());
    }
}
