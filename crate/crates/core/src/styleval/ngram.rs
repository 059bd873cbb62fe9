//! Count-based n-gram language model with interpolated Kneser-Ney smoothing.
//!
//! The highest order uses raw counts; every lower order uses continuation
//! counts (how many distinct words precede the gram). Probability mass
//! removed by the absolute discount is spread over the next-lower order,
//! bottoming out in a uniform term over the vocabulary, so every word in
//! the vocabulary (including `<unk>`) gets nonzero probability under KN.
//!
//! An MLE mode (no discounting, no interpolation, raw counts at every
//! order) is available for calibration fixtures; it can assign zero
//! probability, in which case bits come back infinite.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BOS_SYM: &str = "<s>";
pub const EOS_SYM: &str = "</s>";
pub const UNK_SYM: &str = "<unk>";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NgramLmConfig {
    pub order: usize,
    pub discount: f64,
    /// Append `</s>` to every sentence and score it like any other token.
    pub add_eos: bool,
    /// Maximum-likelihood mode: raw relative frequencies, no smoothing.
    pub mle: bool,
}

impl Default for NgramLmConfig {
    fn default() -> Self {
        NgramLmConfig { order: 4, discount: 0.75, add_eos: true, mle: false }
    }
}

type Gram = Vec<u32>;

/// `(total, distinct)` continuations observed after a context.
type CtxStats = (u64, u64);

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NgramLm {
    cfg: NgramLmConfig,
    /// Scoring vocabulary: `<unk>`, content words, then `</s>` when used.
    vocab: Vec<String>,
    #[serde(with = "map_entries")]
    index: HashMap<String, u32>,
    /// Per order k (index k-1), the counts the model scores with: raw
    /// counts at the top order (and everywhere in MLE mode), continuation
    /// counts below it.
    #[serde(with = "gram_tables")]
    counts: Vec<HashMap<Gram, u64>>,
    /// Context stats for each order >= 2, keyed by the (k-1)-gram history.
    #[serde(with = "ctx_tables")]
    ctx: Vec<HashMap<Gram, CtxStats>>,
    uni_total: u64,
    uni_distinct: u64,
}

const UNK_ID: u32 = 0;

impl NgramLm {
    pub fn train(sentences: &[Vec<String>], cfg: NgramLmConfig) -> Result<Self> {
        if cfg.order == 0 {
            return Err(Error::InvalidArg("ngram order must be at least 1".into()));
        }
        if !cfg.mle && !(cfg.discount > 0.0 && cfg.discount < 1.0) {
            return Err(Error::InvalidArg(format!(
                "discount must lie in (0, 1), got {}",
                cfg.discount
            )));
        }
        if sentences.iter().all(|s| s.is_empty()) {
            return Err(Error::Corpus("no tokens to train the ngram model on".into()));
        }

        let mut vocab = vec![UNK_SYM.to_string()];
        let mut index = HashMap::new();
        index.insert(UNK_SYM.to_string(), UNK_ID);
        for sent in sentences {
            for tok in sent {
                if !index.contains_key(tok) {
                    index.insert(tok.clone(), vocab.len() as u32);
                    vocab.push(tok.clone());
                }
            }
        }
        if cfg.add_eos {
            index.entry(EOS_SYM.to_string()).or_insert_with(|| {
                vocab.push(EOS_SYM.to_string());
                vocab.len() as u32 - 1
            });
        }
        // BOS lives outside the scoring vocabulary: context only.
        let bos = vocab.len() as u32;

        let n = cfg.order;
        let mut raw: Vec<HashMap<Gram, u64>> = vec![HashMap::new(); n];
        for sent in sentences {
            let mut ids: Vec<u32> = vec![bos; n.saturating_sub(1)];
            ids.extend(sent.iter().map(|t| index[t]));
            if cfg.add_eos {
                ids.push(index[EOS_SYM]);
            }
            let pad = n - 1;
            for k in 1..=n {
                // Grams never end on padding; `</s>` is a real token here.
                for end in (pad + 1).max(k)..=ids.len() {
                    *raw[k - 1].entry(ids[end - k..end].to_vec()).or_insert(0) += 1;
                }
            }
        }

        // Continuation counts for order k come from raw (k+1)-grams: the
        // number of distinct words seen immediately before the k-gram.
        let mut counts: Vec<HashMap<Gram, u64>> = Vec::with_capacity(n);
        for k in 1..=n {
            if k == n || cfg.mle {
                counts.push(raw[k - 1].clone());
            } else {
                let mut cont: HashMap<Gram, u64> = HashMap::new();
                for gram in raw[k].keys() {
                    *cont.entry(gram[1..].to_vec()).or_insert(0) += 1;
                }
                counts.push(cont);
            }
        }

        let mut ctx: Vec<HashMap<Gram, CtxStats>> = Vec::new();
        for k in 2..=n {
            let mut stats: HashMap<Gram, CtxStats> = HashMap::new();
            for (gram, &c) in &counts[k - 1] {
                let entry = stats.entry(gram[..k - 1].to_vec()).or_insert((0, 0));
                entry.0 += c;
                entry.1 += 1;
            }
            ctx.push(stats);
        }

        let uni_total: u64 = counts[0].values().sum();
        let uni_distinct = counts[0].len() as u64;
        if uni_total == 0 {
            return Err(Error::Corpus("no tokens to train the ngram model on".into()));
        }

        Ok(NgramLm { cfg, vocab, index, counts, ctx, uni_total, uni_distinct })
    }

    pub fn config(&self) -> &NgramLmConfig {
        &self.cfg
    }

    /// Scoring vocabulary size (`<unk>` and `</s>` included).
    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    fn bos_id(&self) -> u32 {
        self.vocab.len() as u32
    }

    fn lookup(&self, tok: &str) -> u32 {
        self.index.get(tok).copied().unwrap_or(UNK_ID)
    }

    /// P(word | context). The context is the preceding tokens in order;
    /// only the last `order - 1` matter, and missing positions are padded
    /// with `<s>` as at training time.
    pub fn prob(&self, context: &[String], word: &str) -> f64 {
        let n = self.cfg.order;
        let mut hist: Vec<u32> = Vec::with_capacity(n - 1);
        let take = (n - 1).min(context.len());
        hist.resize(n - 1 - take, self.bos_id());
        hist.extend(context[context.len() - take..].iter().map(|t| self.lookup(t)));
        self.prob_ids(&hist, self.lookup(word))
    }

    fn prob_ids(&self, hist: &[u32], word: u32) -> f64 {
        let k = hist.len() + 1;
        if k == 1 {
            let c = *self.counts[0].get(&vec![word]).unwrap_or(&0);
            let total = self.uni_total as f64;
            if self.cfg.mle {
                return c as f64 / total;
            }
            let d = self.cfg.discount;
            let base = 1.0 / self.vocab.len() as f64;
            return ((c as f64 - d).max(0.0)
                + d * self.uni_distinct as f64 * base)
                / total;
        }
        let (total, distinct) = self.ctx[k - 2].get(hist).copied().unwrap_or((0, 0));
        if total == 0 {
            return self.prob_ids(&hist[1..], word);
        }
        let mut gram = hist.to_vec();
        gram.push(word);
        let c = *self.counts[k - 1].get(&gram).unwrap_or(&0);
        if self.cfg.mle {
            return c as f64 / total as f64;
        }
        let d = self.cfg.discount;
        ((c as f64 - d).max(0.0)
            + d * distinct as f64 * self.prob_ids(&hist[1..], word))
            / total as f64
    }

    /// Total bits and number of scored positions for one sentence.
    pub fn sentence_bits(&self, tokens: &[String]) -> (f64, usize) {
        let mut ids: Vec<u32> = vec![self.bos_id(); self.cfg.order - 1];
        ids.extend(tokens.iter().map(|t| self.lookup(t)));
        if self.cfg.add_eos {
            ids.push(self.lookup(EOS_SYM));
        }
        let pad = self.cfg.order - 1;
        let mut bits = 0.0;
        for i in pad..ids.len() {
            let hist = &ids[i - pad..i];
            bits -= self.prob_ids(hist, ids[i]).log2();
        }
        (bits, ids.len() - pad)
    }

    /// Mean bits per scored token over a corpus (`</s>` counts when scored).
    pub fn corpus_bits(&self, sentences: &[Vec<String>]) -> Result<f64> {
        let mut bits = 0.0;
        let mut n = 0usize;
        for sent in sentences {
            let (b, c) = self.sentence_bits(sent);
            bits += b;
            n += c;
        }
        if n == 0 {
            return Err(Error::Eval("no scored tokens in evaluation corpus".into()));
        }
        Ok(bits / n as f64)
    }
}

/// serde helpers: hash tables dumped as key-sorted entry lists so the JSON
/// is deterministic and the keys need not be strings.
mod map_entries {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &HashMap<String, u32>, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut entries: Vec<(&String, &u32)> = m.iter().collect();
        entries.sort();
        serde::Serialize::serialize(&entries, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<HashMap<String, u32>, D::Error> {
        let entries: Vec<(String, u32)> = serde::Deserialize::deserialize(d)?;
        Ok(entries.into_iter().collect())
    }
}

mod gram_tables {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[HashMap<Gram, u64>], s: S) -> std::result::Result<S::Ok, S::Error> {
        let dumped: Vec<Vec<(&Gram, &u64)>> = v
            .iter()
            .map(|m| {
                let mut entries: Vec<_> = m.iter().collect();
                entries.sort();
                entries
            })
            .collect();
        serde::Serialize::serialize(&dumped, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<HashMap<Gram, u64>>, D::Error> {
        let dumped: Vec<Vec<(Gram, u64)>> = serde::Deserialize::deserialize(d)?;
        Ok(dumped.into_iter().map(|v| v.into_iter().collect()).collect())
    }
}

mod ctx_tables {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[HashMap<Gram, CtxStats>], s: S) -> std::result::Result<S::Ok, S::Error> {
        let dumped: Vec<Vec<(&Gram, &CtxStats)>> = v
            .iter()
            .map(|m| {
                let mut entries: Vec<_> = m.iter().collect();
                entries.sort();
                entries
            })
            .collect();
        serde::Serialize::serialize(&dumped, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<HashMap<Gram, CtxStats>>, D::Error> {
        let dumped: Vec<Vec<(Gram, CtxStats)>> = serde::Deserialize::deserialize(d)?;
        Ok(dumped.into_iter().map(|v| v.into_iter().collect()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sents(raw: &[&str]) -> Vec<Vec<String>> {
        raw.iter()
            .map(|s| s.split_whitespace().map(|t| t.to_string()).collect())
            .collect()
    }

    fn toks(raw: &str) -> Vec<String> {
        raw.split_whitespace().map(|t| t.to_string()).collect()
    }

    #[test]
    fn mle_unigram_matches_hand_probability() {
        let cfg = NgramLmConfig { order: 1, discount: 0.75, add_eos: false, mle: true };
        let lm = NgramLm::train(&sents(&["a a a b"]), cfg).unwrap();
        assert_eq!(lm.prob(&[], "a"), 0.75);
        assert_eq!(lm.prob(&[], "b"), 0.25);
        let bits = lm.corpus_bits(&[toks("a")]).unwrap();
        assert!((bits - 0.4150374992788438).abs() < 1e-12, "bits {bits}");
    }

    #[test]
    fn uniform_corpus_bits_are_exactly_log2_vocab() {
        let cfg = NgramLmConfig { order: 1, discount: 0.75, add_eos: false, mle: true };
        let lm = NgramLm::train(&sents(&["a b c d"]), cfg).unwrap();
        let bits = lm.corpus_bits(&sents(&["a b c d"])).unwrap();
        assert_eq!(bits, 2.0);
    }

    #[test]
    fn mle_mode_gives_unseen_words_zero_probability() {
        let cfg = NgramLmConfig { order: 1, discount: 0.75, add_eos: false, mle: true };
        let lm = NgramLm::train(&sents(&["a a a b"]), cfg).unwrap();
        assert_eq!(lm.prob(&[], "zebra"), 0.0);
        let bits = lm.corpus_bits(&[toks("zebra")]).unwrap();
        assert!(bits.is_infinite());
    }

    /// Bigram fixture computed by hand with exact fractions:
    /// corpus {a b, a c, b a}. Continuation counts cc = {a:2, b:2, c:1,
    /// </s>:3}, N = 8, |V| = 5 with <unk>.
    #[test]
    fn kn_bigram_matches_hand_computed_values() {
        let cfg = NgramLmConfig { order: 2, discount: 0.75, add_eos: true, mle: false };
        let lm = NgramLm::train(&sents(&["a b", "a c", "b a"]), cfg).unwrap();
        assert_eq!(lm.vocab_size(), 5);
        // p1(a) = (2 - .75)/8 + .75 * 4/8 * 1/5
        assert!((lm.prob(&[], "a") - 0.5322916666666667).abs() < 1e-12); // 511/960
        assert!((lm.prob(&toks("a"), "b") - 0.25677083333333334).abs() < 1e-12); // 493/1920
        assert!((lm.prob(&toks("b"), EOS_SYM) - 0.3921875).abs() < 1e-12); // 251/640
        let bits = lm.corpus_bits(&[toks("a b")]).unwrap();
        assert!((bits - 1.4071808049460313).abs() < 1e-12, "bits {bits}");
    }

    #[test]
    fn unseen_history_backs_off_to_lower_order() {
        let cfg = NgramLmConfig { order: 2, discount: 0.75, add_eos: true, mle: false };
        let lm = NgramLm::train(&sents(&["a b", "a c", "b a"]), cfg).unwrap();
        // "zebra" maps to <unk>, whose bigram context was never seen, so the
        // model falls through to the unigram estimate p1(a) = 0.23125.
        assert!((lm.prob(&toks("zebra"), "a") - 0.23125).abs() < 1e-12);
        // With an empty context the <s> history applies: it was seen, so
        // <unk> gets the backoff weight 0.75 * 2/3 times its unigram share
        // p1(<unk>) = 0.75 * 4/8 * 1/5 = 0.075.
        assert!((lm.prob(&[], "zebra") - 0.0375).abs() < 1e-12);
    }

    #[test]
    fn seen_continuation_outweighs_unseen() {
        let cfg = NgramLmConfig::default();
        let lm = NgramLm::train(&sents(&["the dog ran", "the dog slept", "a cat ran"]), cfg).unwrap();
        let seen = lm.prob(&toks("the"), "dog");
        let unseen = lm.prob(&toks("the"), "ran");
        assert!(seen > unseen, "seen {seen} <= unseen {unseen}");
        assert!(lm.prob(&toks("the dog"), "ran") > lm.prob(&toks("the dog"), "cat"));
    }

    #[test]
    fn longer_context_than_order_uses_only_the_tail() {
        let cfg = NgramLmConfig { order: 2, discount: 0.75, add_eos: true, mle: false };
        let lm = NgramLm::train(&sents(&["a b", "a c", "b a"]), cfg).unwrap();
        let long = lm.prob(&toks("c b a"), "b");
        let short = lm.prob(&toks("a"), "b");
        assert_eq!(long, short);
    }

    fn prob_mass(lm: &NgramLm, context: &[String]) -> f64 {
        let mut sum = 0.0;
        for w in &lm.vocab {
            sum += lm.prob(context, w);
        }
        sum
    }

    #[test]
    fn kn_distributions_sum_to_one() {
        let cfg = NgramLmConfig::default();
        let corpus = sents(&[
            "the dog ran fast",
            "the cat slept",
            "a dog slept here",
            "the dog ran",
        ]);
        let lm = NgramLm::train(&corpus, cfg).unwrap();
        for ctx in ["", "the", "the dog", "a dog slept", "zebra", "the zebra cat"] {
            let mass = prob_mass(&lm, &toks(ctx));
            assert!((mass - 1.0).abs() < 1e-9, "context {ctx:?}: mass {mass}");
        }
    }

    proptest! {
        #[test]
        fn kn_mass_is_one_for_random_corpora(
            corpus in prop::collection::vec(
                prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d", "e"]), 1..6),
                1..8,
            ),
            context in prop::collection::vec(prop::sample::select(vec!["a", "b", "e", "zzz"]), 0..5),
        ) {
            let corpus: Vec<Vec<String>> = corpus
                .into_iter()
                .map(|s| s.into_iter().map(String::from).collect())
                .collect();
            let context: Vec<String> = context.into_iter().map(String::from).collect();
            let lm = NgramLm::train(&corpus, NgramLmConfig::default()).unwrap();
            let mass = prob_mass(&lm, &context);
            prop_assert!((mass - 1.0).abs() < 1e-9, "mass {}", mass);
        }
    }

    #[test]
    fn serde_round_trip_preserves_probabilities() {
        let cfg = NgramLmConfig::default();
        let lm = NgramLm::train(&sents(&["the dog ran", "a cat slept"]), cfg).unwrap();
        let json = serde_json::to_string(&lm).unwrap();
        let back: NgramLm = serde_json::from_str(&json).unwrap();
        for ctx in ["", "the", "the dog"] {
            assert_eq!(lm.prob(&toks(ctx), "dog"), back.prob(&toks(ctx), "dog"));
        }
        assert_eq!(json, serde_json::to_string(&back).unwrap());
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        assert!(NgramLm::train(&[], NgramLmConfig::default()).is_err());
        assert!(NgramLm::train(&sents(&[""]), NgramLmConfig::default()).is_err());
        let bad = NgramLmConfig { order: 0, ..NgramLmConfig::default() };
        assert!(NgramLm::train(&sents(&["a b"]), bad).is_err());
        let bad = NgramLmConfig { discount: 1.5, ..NgramLmConfig::default() };
        assert!(NgramLm::train(&sents(&["a b"]), bad).is_err());
    }
}
