//! Training loops: seeded batching, teacher forcing, Adam, early stopping
//! on validation loss, and best-epoch parameter restore.

pub mod checkpoint;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{make_epoch_batches, BatchMode};
use crate::error::{Error, Result};
use crate::langgen::LangGen;
use crate::nncore::{AdamConfig, Adam, Parameterized, Tensor};
use crate::termgen::TermGen;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub adam: AdamConfig,
    /// Items per optimizer step; mixed-corpus batches take half from each.
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    /// Dropout rate on input embeddings.
    pub dropout: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            adam: AdamConfig::default(),
            batch_size: 128,
            max_epochs: 50,
            patience: 3,
            dropout: 0.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs: Vec<EpochStats>,
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub stopped_early: bool,
}

/// Deterministic train/validation split: seeded shuffle, the tail fraction
/// becomes validation (at least one item when the input has two or more).
pub fn split_indices(n: usize, val_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    let mut val_n = (n as f64 * val_fraction).round() as usize;
    if n >= 2 && val_n == 0 && val_fraction > 0.0 {
        val_n = 1;
    }
    if val_n >= n && n > 0 {
        val_n = n - 1;
    }
    let val = idx.split_off(n - val_n);
    (idx, val)
}

pub(crate) fn dropout_rng(seed: u64, epoch: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x64726f70); // "drop"
    rng.set_stream(epoch as u64 + 1);
    rng
}

/// Tracks the best validation loss and the parameters that produced it.
pub(crate) struct BestTracker {
    pub(crate) best_val: f64,
    pub(crate) best_epoch: usize,
    pub(crate) best_params: Option<Vec<Tensor<f32>>>,
    since_best: usize,
}

impl BestTracker {
    pub(crate) fn new() -> Self {
        BestTracker {
            best_val: f64::INFINITY,
            best_epoch: 0,
            best_params: None,
            since_best: 0,
        }
    }

    /// Record this epoch's validation loss; returns true when patience is
    /// exhausted.
    pub(crate) fn observe<P: Parameterized<f32>>(
        &mut self,
        epoch: usize,
        val_loss: f64,
        model: &P,
        patience: usize,
    ) -> bool {
        if val_loss < self.best_val {
            self.best_val = val_loss;
            self.best_epoch = epoch;
            self.best_params = Some(model.param_vec());
            self.since_best = 0;
            false
        } else {
            self.since_best += 1;
            self.since_best >= patience
        }
    }

    pub(crate) fn restore<P: Parameterized<f32>>(&self, model: &mut P) -> Result<()> {
        if let Some(params) = &self.best_params {
            model.load_param_vec(params)?;
        }
        Ok(())
    }
}

/// Train the term generator on (image feature, term ids) pairs.
pub fn train_termgen(
    model: &mut TermGen<f32>,
    train: &[(Vec<f32>, Vec<usize>)],
    val: &[(Vec<f32>, Vec<usize>)],
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    if train.is_empty() {
        return Err(Error::InvalidArg("term generator training set is empty".into()));
    }
    let mut opt = Adam::new(model, cfg.adam.clone());
    let mut tracker = BestTracker::new();
    let mut epochs = Vec::new();
    let mut stopped_early = false;

    for epoch in 0..cfg.max_epochs {
        let plan = make_epoch_batches(
            train.len(),
            0,
            cfg.batch_size,
            BatchMode::SingleDesc,
            epoch as u64,
            cfg.seed,
        )?;
        let mut rng = dropout_rng(cfg.seed, epoch);
        let mut total = 0.0;
        let mut count = 0usize;
        for (idx, _) in &plan.batches {
            let mut grads = model.zeros_like();
            let mut batch_loss = 0.0f64;
            for &i in idx {
                let (feature, terms) = &train[i];
                let loss = if cfg.dropout > 0.0 {
                    model.loss_and_grads(feature, terms, &mut grads, cfg.dropout, Some(&mut rng))?
                } else {
                    model.loss_and_grads(feature, terms, &mut grads, 0.0, None)?
                };
                batch_loss += loss as f64;
            }
            grads.scale_params(1.0 / idx.len() as f32);
            opt.update(model, &grads)?;
            total += batch_loss;
            count += idx.len();
        }
        let train_loss = total / count.max(1) as f64;
        let val_loss = eval_termgen(model, val)?;
        epochs.push(EpochStats {
            epoch,
            train_loss,
            val_loss,
        });
        if !val.is_empty() && tracker.observe(epoch, val_loss, model, cfg.patience) {
            stopped_early = true;
            break;
        }
    }
    tracker.restore(model)?;
    Ok(TrainReport {
        best_epoch: if tracker.best_params.is_some() {
            tracker.best_epoch
        } else {
            epochs.len().saturating_sub(1)
        },
        best_val_loss: tracker.best_val,
        epochs,
        stopped_early,
    })
}

/// Mean validation loss for the term generator (NaN-free; empty set gives 0).
pub fn eval_termgen(model: &TermGen<f32>, val: &[(Vec<f32>, Vec<usize>)]) -> Result<f64> {
    if val.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for (feature, terms) in val {
        total += model.loss(feature, terms)? as f64;
    }
    Ok(total / val.len() as f64)
}

/// One language-generator training pair: term ids in, sentence ids out.
pub type SeqPair = (Vec<usize>, Vec<usize>);

/// Train the styled language generator. `desc` pairs carry `desc_style`,
/// `styled` pairs carry `styled_style`; `mode` selects joint or
/// single-corpus epochs with per-epoch down-sampling handled by the batch
/// plan.
#[allow(clippy::too_many_arguments)]
pub fn train_langgen(
    model: &mut LangGen<f32>,
    desc_train: &[SeqPair],
    styled_train: &[SeqPair],
    desc_val: &[SeqPair],
    styled_val: &[SeqPair],
    desc_style: usize,
    styled_style: usize,
    mode: BatchMode,
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    let need_desc = !matches!(mode, BatchMode::SingleStyled);
    let need_styled = !matches!(mode, BatchMode::SingleDesc);
    if (need_desc && desc_train.is_empty()) || (need_styled && styled_train.is_empty()) {
        return Err(Error::InvalidArg(
            "language generator training corpus is empty for the chosen mode".into(),
        ));
    }

    let mut opt = Adam::new(model, cfg.adam.clone());
    let mut tracker = BestTracker::new();
    let mut epochs = Vec::new();
    let mut stopped_early = false;
    let have_val = !desc_val.is_empty() || !styled_val.is_empty();

    for epoch in 0..cfg.max_epochs {
        let plan = make_epoch_batches(
            desc_train.len(),
            styled_train.len(),
            cfg.batch_size,
            mode,
            epoch as u64,
            cfg.seed,
        )?;
        let mut rng = dropout_rng(cfg.seed, epoch);
        let mut total = 0.0;
        let mut count = 0usize;
        for (desc_idx, styled_idx) in &plan.batches {
            let mut grads = model.zeros_like();
            let mut batch_loss = 0.0f64;
            let items = desc_idx
                .iter()
                .map(|&i| (&desc_train[i], desc_style))
                .chain(styled_idx.iter().map(|&i| (&styled_train[i], styled_style)));
            let mut n = 0usize;
            for ((terms, sent), style) in items {
                let loss = if cfg.dropout > 0.0 {
                    model.loss_and_grads(terms, style, sent, &mut grads, cfg.dropout, Some(&mut rng))?
                } else {
                    model.loss_and_grads(terms, style, sent, &mut grads, 0.0, None)?
                };
                batch_loss += loss as f64;
                n += 1;
            }
            grads.scale_params(1.0 / n as f32);
            opt.update(model, &grads)?;
            total += batch_loss;
            count += n;
        }
        let train_loss = total / count.max(1) as f64;
        let val_loss = eval_langgen(model, desc_val, styled_val, desc_style, styled_style)?;
        epochs.push(EpochStats {
            epoch,
            train_loss,
            val_loss,
        });
        if have_val && tracker.observe(epoch, val_loss, model, cfg.patience) {
            stopped_early = true;
            break;
        }
    }
    tracker.restore(model)?;
    Ok(TrainReport {
        best_epoch: if tracker.best_params.is_some() {
            tracker.best_epoch
        } else {
            epochs.len().saturating_sub(1)
        },
        best_val_loss: tracker.best_val,
        epochs,
        stopped_early,
    })
}

/// Combined mean validation loss over both corpora.
pub fn eval_langgen(
    model: &LangGen<f32>,
    desc_val: &[SeqPair],
    styled_val: &[SeqPair],
    desc_style: usize,
    styled_style: usize,
) -> Result<f64> {
    let n = desc_val.len() + styled_val.len();
    if n == 0 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for (terms, sent) in desc_val {
        total += model.loss(terms, desc_style, sent)? as f64;
    }
    for (terms, sent) in styled_val {
        total += model.loss(terms, styled_style, sent)? as f64;
    }
    Ok(total / n as f64)
}
