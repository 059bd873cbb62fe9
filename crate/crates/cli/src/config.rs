//! Layered option resolution: built-in defaults, then the TOML config
//! file, then command-line flags. Every table and key is optional; unknown
//! keys are rejected so typos fail loudly.

use std::fs;
use std::path::Path;

use semstyle_core::nncore::AdamConfig;
use semstyle_core::trainer::TrainConfig;
use semstyle_core::{Error, Result};
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub termgen: TermGenSection,
    #[serde(default)]
    pub langgen: LangGenSection,
    #[serde(default)]
    pub lm: LmSection,
    #[serde(default)]
    pub clf: ClfSection,
    #[serde(default)]
    pub possel: PosselSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub lr: Option<f64>,
    pub batch_size: Option<usize>,
    pub max_epochs: Option<usize>,
    pub patience: Option<usize>,
    pub dropout: Option<f64>,
    pub val_fraction: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermGenSection {
    pub feature_dim: Option<usize>,
    pub embed_dim: Option<usize>,
    pub hidden_dim: Option<usize>,
    pub image_as_h0: Option<bool>,
    pub linear_projection: Option<bool>,
    pub init_scale: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LangGenSection {
    pub embed_dim: Option<usize>,
    pub enc_hidden: Option<usize>,
    pub zero_decoder_init: Option<bool>,
    pub init_scale: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LmSection {
    pub order: Option<usize>,
    pub discount: Option<f64>,
    pub embed_dim: Option<usize>,
    pub hidden_dim: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClfSection {
    pub l2: Option<f64>,
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub min_count: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosselSection {
    pub drop: Option<f64>,
    pub budget: Option<f64>,
    pub tie_bits: Option<f64>,
    pub val_fraction: Option<f64>,
    pub embed_dim: Option<usize>,
    pub enc_hidden: Option<usize>,
    pub vocab_cap: Option<usize>,
}

pub fn load(path: Option<&Path>) -> Result<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&raw)
        .map_err(|e| Error::InvalidArg(format!("config {}: {e}", path.display())))
}

/// Resolved global options shared by every command.
pub struct Context {
    pub cfg: FileConfig,
    pub seed: u64,
    pub threads: usize,
}

impl Context {
    pub fn new(cfg: FileConfig, seed_flag: Option<u64>, threads_flag: Option<usize>) -> Context {
        let seed = seed_flag.or(cfg.seed).unwrap_or(0);
        let threads = threads_flag.or(cfg.threads).unwrap_or(1);
        Context { cfg, seed, threads }
    }

    /// Shared optimizer/loop settings: defaults <- [train] <- flags.
    pub fn train_config(&self, flags: &TrainFlags) -> TrainConfig {
        let s = &self.cfg.train;
        let mut tc = TrainConfig {
            adam: AdamConfig::default(),
            ..TrainConfig::default()
        };
        tc.adam.lr = flags.lr.or(s.lr).unwrap_or(tc.adam.lr);
        tc.batch_size = flags.batch_size.or(s.batch_size).unwrap_or(tc.batch_size);
        tc.max_epochs = flags.max_epochs.or(s.max_epochs).unwrap_or(tc.max_epochs);
        tc.patience = flags.patience.or(s.patience).unwrap_or(tc.patience);
        tc.dropout = flags.dropout.or(s.dropout).unwrap_or(tc.dropout);
        tc.seed = self.seed;
        tc
    }

    pub fn val_fraction(&self, flags: &TrainFlags) -> f64 {
        flags
            .val_fraction
            .or(self.cfg.train.val_fraction)
            .unwrap_or(0.1)
    }
}

/// Training loop flags accepted by every train-* command.
#[derive(Debug, clap::Args)]
pub struct TrainFlags {
    /// Adam learning rate.
    #[arg(long, value_name = "LR")]
    pub lr: Option<f64>,
    /// Items per optimizer step.
    #[arg(long, value_name = "N")]
    pub batch_size: Option<usize>,
    /// Epoch cap.
    #[arg(long, value_name = "N")]
    pub max_epochs: Option<usize>,
    /// Epochs without validation improvement before stopping.
    #[arg(long, value_name = "N")]
    pub patience: Option<usize>,
    /// Dropout rate on input embeddings.
    #[arg(long, value_name = "P")]
    pub dropout: Option<f64>,
    /// Held-out fraction for early stopping (0 validates on the training set).
    #[arg(long, value_name = "F")]
    pub val_fraction: Option<f64>,
}
