//! Data-driven ranking of word-class importance. A denoising sequence
//! model is trained to reconstruct sentences from a random subset of their
//! words; greedy forward selection then orders the coarse POS classes by
//! how cheaply their words can be removed, measured as held-out bits.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{
    make_epoch_batches, BatchMode, Vocabulary, BOS_TOKEN, EOS_TOKEN, PAD_TOKEN, STYLE_DESC_TOKEN,
    UNK_TOKEN,
};
use crate::error::{Error, Result};
use crate::langgen::{LangGen, LangGenConfig};
use crate::nncore::{Adam, Parameterized};
use crate::termpipe::extract::preprocess_sentence;
use crate::termpipe::CoarseTag;
use crate::trainer::{dropout_rng, split_indices, BestTracker, EpochStats, TrainConfig, TrainReport};

/// One word with its coarse tag; punctuation is excluded upstream.
pub type TaggedSentence = Vec<(String, CoarseTag)>;

/// Classes the ranking considers, in the deterministic (alphabetical)
/// order used to enumerate candidates and break ties.
pub const RANKABLE_CLASSES: [CoarseTag; 11] = [
    CoarseTag::Adj,
    CoarseTag::Adp,
    CoarseTag::Adv,
    CoarseTag::Conj,
    CoarseTag::Det,
    CoarseTag::Noun,
    CoarseTag::Num,
    CoarseTag::Other,
    CoarseTag::Part,
    CoarseTag::Pron,
    CoarseTag::Verb,
];

#[derive(Debug, Clone)]
pub struct PosselConfig {
    /// Fraction of words removed from each training input.
    pub drop_fraction: f64,
    /// Fraction of words the ranking policy retains.
    pub budget: f64,
    /// Bits differences below this count as ties (broken alphabetically).
    pub tie_bits: f64,
    /// Held-out fraction for ranking perplexities (and early stopping).
    pub val_fraction: f64,
    pub embed_dim: usize,
    pub enc_hidden: usize,
    pub vocab_cap: usize,
    pub train: TrainConfig,
}

impl Default for PosselConfig {
    fn default() -> Self {
        PosselConfig {
            drop_fraction: 0.66,
            budget: 0.33,
            tie_bits: 0.01,
            val_fraction: 0.1,
            embed_dim: 32,
            enc_hidden: 32,
            vocab_cap: 2000,
            train: TrainConfig::default(),
        }
    }
}

impl PosselConfig {
    fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.drop_fraction) {
            return Err(Error::InvalidArg(format!(
                "drop fraction must lie in [0, 1), got {}",
                self.drop_fraction
            )));
        }
        if !(self.budget > 0.0 && self.budget <= 1.0) {
            return Err(Error::InvalidArg(format!(
                "retention budget must lie in (0, 1], got {}",
                self.budget
            )));
        }
        if !(0.0..1.0).contains(&self.val_fraction) || self.tie_bits < 0.0 {
            return Err(Error::InvalidArg("possel config out of range".into()));
        }
        Ok(())
    }
}

/// Tag raw sentences with the bundled models, dropping punctuation.
pub fn tag_corpus(sentences: &[String]) -> Vec<TaggedSentence> {
    sentences
        .iter()
        .map(|s| {
            preprocess_sentence(s)
                .into_iter()
                .filter(|t| t.pos != CoarseTag::Punct)
                .map(|t| (t.surface, t.pos))
                .collect()
        })
        .collect()
}

/// A trained denoising reconstructor bundled with its vocabulary.
pub struct DenoisingModel {
    pub model: LangGen<f32>,
    pub vocab: Vocabulary,
    pub style_id: usize,
}

impl DenoisingModel {
    fn encode(&self, words: &[&str]) -> Vec<usize> {
        words
            .iter()
            .map(|w| self.vocab.id_of(w).unwrap_or_else(|| self.vocab.unk_id()))
            .collect()
    }

    /// Mean nats and scored-token count for reconstructing `sentence`
    /// from `kept`.
    fn sentence_loss(&self, kept: &[&str], sentence: &[&str]) -> Result<(f64, usize)> {
        let terms = self.encode(kept);
        let target = self.encode(sentence);
        let scored = target.len() + 1;
        let loss = self.model.loss(&terms, self.style_id, &target)? as f64;
        Ok((loss, scored))
    }
}

/// Keep `max(1, round((1 - drop) * n))` positions, chosen uniformly
/// without replacement, in their original order.
fn kept_positions(n: usize, drop: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let keep = (((1.0 - drop) * n as f64).round() as usize).clamp(1, n);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let mut kept = idx[..keep].to_vec();
    kept.sort_unstable();
    kept
}

fn noise_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6e6f_6973); // "nois"
    rng.set_stream(stream);
    rng
}

/// Train the reconstructor: inputs are a random surviving subset of each
/// sentence (resampled every epoch), targets the full sentence.
pub fn train_denoising_lm(
    corpus: &[TaggedSentence],
    cfg: &PosselConfig,
) -> Result<(DenoisingModel, TrainReport)> {
    cfg.validate()?;
    if corpus.is_empty() || corpus.iter().any(|s| s.is_empty()) {
        return Err(Error::InvalidArg("denoising corpus must be nonempty sentences".into()));
    }

    let vocab = Vocabulary::build(
        corpus.iter().flat_map(|s| s.iter().map(|(w, _)| w.as_str())),
        cfg.vocab_cap,
        1,
        &[PAD_TOKEN, UNK_TOKEN, BOS_TOKEN, EOS_TOKEN, STYLE_DESC_TOKEN],
    )?;
    let style_id = vocab
        .id_of(STYLE_DESC_TOKEN)
        .expect("style token is reserved");

    let lg_cfg = LangGenConfig {
        vocab_size: vocab.len(),
        embed_dim: cfg.embed_dim,
        enc_hidden: cfg.enc_hidden,
        ..LangGenConfig::new(vocab.len())
    };
    let mut init_rng = ChaCha8Rng::seed_from_u64(cfg.train.seed);
    let mut model = LangGen::<f32>::new(lg_cfg, &mut init_rng)?;

    let (train_idx, val_idx) = split_indices(corpus.len(), cfg.val_fraction, cfg.train.seed);
    let dm_words = |i: usize| -> Vec<&str> { corpus[i].iter().map(|(w, _)| w.as_str()).collect() };
    let encode = |vocab: &Vocabulary, words: &[&str]| -> Vec<usize> {
        words
            .iter()
            .map(|w| vocab.id_of(w).unwrap_or_else(|| vocab.unk_id()))
            .collect()
    };

    // Validation pairs are corrupted once, on their own stream, so the
    // early-stopping signal is stable across epochs.
    let mut val_rng = noise_rng(cfg.train.seed, 0);
    let val_pairs: Vec<(Vec<usize>, Vec<usize>)> = val_idx
        .iter()
        .map(|&i| {
            let words = dm_words(i);
            let kept = kept_positions(words.len(), cfg.drop_fraction, &mut val_rng);
            let kept_words: Vec<&str> = kept.iter().map(|&p| words[p]).collect();
            (encode(&vocab, &kept_words), encode(&vocab, &words))
        })
        .collect();

    let mut opt = Adam::new(&model, cfg.train.adam.clone());
    let mut tracker = BestTracker::new();
    let mut epochs = Vec::new();
    let mut stopped_early = false;

    for epoch in 0..cfg.train.max_epochs {
        let mut corrupt_rng = noise_rng(cfg.train.seed, epoch as u64 + 1);
        let pairs: Vec<(Vec<usize>, Vec<usize>)> = train_idx
            .iter()
            .map(|&i| {
                let words = dm_words(i);
                let kept = kept_positions(words.len(), cfg.drop_fraction, &mut corrupt_rng);
                let kept_words: Vec<&str> = kept.iter().map(|&p| words[p]).collect();
                (encode(&vocab, &kept_words), encode(&vocab, &words))
            })
            .collect();

        let plan = make_epoch_batches(
            pairs.len(),
            0,
            cfg.train.batch_size,
            BatchMode::SingleDesc,
            epoch as u64,
            cfg.train.seed,
        )?;
        let mut drop_rng = dropout_rng(cfg.train.seed, epoch);
        let mut total = 0.0;
        let mut count = 0usize;
        for (idx, _) in &plan.batches {
            let mut grads = model.zeros_like();
            let mut batch_loss = 0.0f64;
            for &i in idx {
                let (terms, sentence) = &pairs[i];
                let loss = if cfg.train.dropout > 0.0 {
                    model.loss_and_grads(
                        terms,
                        style_id,
                        sentence,
                        &mut grads,
                        cfg.train.dropout,
                        Some(&mut drop_rng),
                    )?
                } else {
                    model.loss_and_grads(terms, style_id, sentence, &mut grads, 0.0, None)?
                };
                batch_loss += loss as f64;
            }
            grads.scale_params(1.0 / idx.len() as f32);
            opt.update(&mut model, &grads)?;
            total += batch_loss;
            count += idx.len();
        }
        let train_loss = total / count.max(1) as f64;
        let val_loss = if val_pairs.is_empty() {
            0.0
        } else {
            let mut sum = 0.0;
            for (terms, sentence) in &val_pairs {
                sum += model.loss(terms, style_id, sentence)? as f64;
            }
            sum / val_pairs.len() as f64
        };
        epochs.push(EpochStats { epoch, train_loss, val_loss });
        if !val_pairs.is_empty() && tracker.observe(epoch, val_loss, &model, cfg.train.patience) {
            stopped_early = true;
            break;
        }
    }
    tracker.restore(&mut model)?;
    let report = TrainReport {
        best_epoch: if tracker.best_params.is_some() {
            tracker.best_epoch
        } else {
            epochs.len().saturating_sub(1)
        },
        best_val_loss: tracker.best_val,
        epochs,
        stopped_early,
    };
    Ok((DenoisingModel { model, vocab, style_id }, report))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankEnd {
    /// Committed to the least-important open rank: removed earliest.
    Least,
    /// Committed to the most-important open rank: removed only under
    /// budget pressure, after every pooled word.
    Most,
}

#[derive(Debug, Clone)]
pub struct RankStep {
    pub class: CoarseTag,
    pub end: RankEnd,
    pub bits: f64,
}

#[derive(Debug, Clone)]
pub struct PosRanking {
    /// Least important first, most important last.
    pub order: Vec<CoarseTag>,
    pub steps: Vec<RankStep>,
    /// Classes absent from the corpus, never ranked.
    pub skipped: Vec<CoarseTag>,
}

/// Mark words for removal: ranked-least classes first (partial random
/// removal inside the class that crosses the budget), then the unranked
/// pool uniformly at random, and only then the protected classes, newest
/// commitment first.
fn removal_flags(
    sentence: &TaggedSentence,
    remove_first: &[CoarseTag],
    pool: &[CoarseTag],
    protect: &[CoarseTag],
    budget: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<bool> {
    let n = sentence.len();
    let retain = ((budget * n as f64).round() as usize).clamp(1, n);
    let mut remaining = n - retain;
    let mut removed = vec![false; n];

    let take = |classes: &[CoarseTag], removed: &mut Vec<bool>, remaining: &mut usize,
                    rng: &mut ChaCha8Rng| {
        for class in classes {
            if *remaining == 0 {
                return;
            }
            let mut positions: Vec<usize> = sentence
                .iter()
                .enumerate()
                .filter(|(i, (_, tag))| tag == class && !removed[*i])
                .map(|(i, _)| i)
                .collect();
            if positions.len() <= *remaining {
                *remaining -= positions.len();
                for p in positions {
                    removed[p] = true;
                }
            } else {
                positions.shuffle(rng);
                for &p in &positions[..*remaining] {
                    removed[p] = true;
                }
                *remaining = 0;
            }
        }
    };

    take(remove_first, &mut removed, &mut remaining, rng);
    if remaining > 0 {
        // The pool is one shared rank: all its words compete uniformly.
        let pool_positions: Vec<usize> = sentence
            .iter()
            .enumerate()
            .filter(|(i, (_, tag))| pool.contains(tag) && !removed[*i])
            .map(|(i, _)| i)
            .collect();
        if pool_positions.len() <= remaining {
            remaining -= pool_positions.len();
            for p in pool_positions {
                removed[p] = true;
            }
        } else {
            let mut positions = pool_positions;
            positions.shuffle(rng);
            for &p in &positions[..remaining] {
                removed[p] = true;
            }
            remaining = 0;
        }
    }
    if remaining > 0 {
        take(protect, &mut removed, &mut remaining, rng);
    }
    removed
}

fn policy_bits(
    dm: &DenoisingModel,
    held: &[&TaggedSentence],
    remove_first: &[CoarseTag],
    pool: &[CoarseTag],
    protect: &[CoarseTag],
    budget: f64,
    step: usize,
    seed: u64,
) -> Result<f64> {
    let mut nats = 0.0f64;
    let mut scored = 0usize;
    for (i, sent) in held.iter().enumerate() {
        // Seeded per (step, sentence) so every candidate at a step sees
        // identical random fills: a paired comparison.
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x706f_7373); // "poss"
        rng.set_stream(((step as u64) << 32) ^ i as u64);
        let removed = removal_flags(sent, remove_first, pool, protect, budget, &mut rng);
        let kept: Vec<&str> = sent
            .iter()
            .enumerate()
            .filter(|(j, _)| !removed[*j])
            .map(|(_, (w, _))| w.as_str())
            .collect();
        let full: Vec<&str> = sent.iter().map(|(w, _)| w.as_str()).collect();
        let (loss, count) = dm.sentence_loss(&kept, &full)?;
        nats += loss * count as f64;
        scored += count;
    }
    if scored == 0 {
        return Err(Error::Eval("no held-out tokens to rank with".into()));
    }
    Ok(nats / scored as f64 / std::f64::consts::LN_2)
}

/// Pick the winning candidate: lowest bits, with differences below
/// `tie_bits` of the minimum treated as ties broken by class name, then
/// by preferring the least-important end.
pub(crate) fn select_candidate(
    cands: &[(CoarseTag, RankEnd, f64)],
    tie_bits: f64,
) -> (CoarseTag, RankEnd, f64) {
    let min = cands.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
    let mut tied: Vec<&(CoarseTag, RankEnd, f64)> =
        cands.iter().filter(|c| c.2 - min < tie_bits).collect();
    tied.sort_by(|a, b| {
        a.0.to_string()
            .cmp(&b.0.to_string())
            .then_with(|| match (a.1, b.1) {
                (RankEnd::Least, RankEnd::Most) => std::cmp::Ordering::Less,
                (RankEnd::Most, RankEnd::Least) => std::cmp::Ordering::Greater,
                _ => std::cmp::Ordering::Equal,
            })
    });
    *tied[0]
}

/// Greedy double-ended selection: each step tries every unranked class at
/// the least- and most-important open ranks and keeps whichever placement
/// gives the lowest held-out bits under the removal policy.
pub fn rank_word_classes(
    dm: &DenoisingModel,
    corpus: &[TaggedSentence],
    cfg: &PosselConfig,
) -> Result<PosRanking> {
    cfg.validate()?;
    if corpus.is_empty() {
        return Err(Error::InvalidArg("ranking corpus is empty".into()));
    }
    let (_, val_idx) = split_indices(corpus.len(), cfg.val_fraction, cfg.train.seed);
    let held: Vec<&TaggedSentence> = if val_idx.is_empty() {
        corpus.iter().collect()
    } else {
        val_idx.iter().map(|&i| &corpus[i]).collect()
    };

    let mut present: Vec<CoarseTag> = Vec::new();
    let mut skipped: Vec<CoarseTag> = Vec::new();
    for class in RANKABLE_CLASSES {
        if corpus.iter().any(|s| s.iter().any(|(_, t)| *t == class)) {
            present.push(class);
        } else {
            skipped.push(class);
        }
    }
    if present.is_empty() {
        return Err(Error::InvalidArg("no rankable word classes in corpus".into()));
    }

    let mut front: Vec<CoarseTag> = Vec::new(); // least important, removal order
    let mut back: Vec<CoarseTag> = Vec::new(); // most important, commitment order
    let mut steps: Vec<RankStep> = Vec::new();

    while front.len() + back.len() < present.len() {
        let unranked: Vec<CoarseTag> = present
            .iter()
            .copied()
            .filter(|c| !front.contains(c) && !back.contains(c))
            .collect();
        let step = steps.len();
        let mut cands: Vec<(CoarseTag, RankEnd, f64)> = Vec::new();
        for &c in &unranked {
            let pool: Vec<CoarseTag> = unranked.iter().copied().filter(|&u| u != c).collect();
            for end in [RankEnd::Least, RankEnd::Most] {
                let mut remove_first = front.clone();
                // Protected classes are forced out newest commitment first.
                let mut protect: Vec<CoarseTag> = back.iter().rev().copied().collect();
                match end {
                    RankEnd::Least => remove_first.push(c),
                    RankEnd::Most => protect.insert(0, c),
                }
                let bits =
                    policy_bits(dm, &held, &remove_first, &pool, &protect, cfg.budget, step, cfg.train.seed)?;
                cands.push((c, end, bits));
            }
        }
        let (class, end, bits) = select_candidate(&cands, cfg.tie_bits);
        match end {
            RankEnd::Least => front.push(class),
            RankEnd::Most => back.push(class),
        }
        steps.push(RankStep { class, end, bits });
    }

    let mut order = front;
    order.extend(back.iter().rev());
    Ok(PosRanking { order, steps, skipped })
}
