//! Checkpoints written by the CLI embed the vocabulary next to the model
//! config, so decode and evaluate commands need nothing but the file. The
//! extra manifest keys are invisible to the library's typed loaders.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use semstyle_core::corpus::Vocabulary;
use semstyle_core::langgen::{LangGen, LangGenConfig};
use semstyle_core::styleval::{GruLm, GruLmConfig};
use semstyle_core::termgen::{TermGen, TermGenConfig};
use semstyle_core::trainer::checkpoint::{self, CheckpointError};
use serde::{Deserialize, Serialize};

use crate::util::CliResult;

#[derive(Serialize, Deserialize)]
struct TermGenCkpt {
    #[serde(flatten)]
    model: TermGenConfig,
    /// Term vocabulary in its file format (header line plus tokens).
    term_vocab: String,
}

#[derive(Serialize, Deserialize)]
struct LangGenCkpt {
    #[serde(flatten)]
    model: LangGenConfig,
    /// Joint term+word vocabulary in its file format.
    vocab: String,
}

#[derive(Serialize, Deserialize)]
struct GruLmCkpt {
    #[serde(flatten)]
    model: GruLmConfig,
    vocab: String,
}

fn manifest_err(e: impl std::fmt::Display) -> CheckpointError {
    CheckpointError::Manifest(format!("config: {e}"))
}

pub fn save_termgen(path: &Path, model: &TermGen<f32>, vocab: &Vocabulary) -> CliResult<()> {
    let cfg = TermGenCkpt {
        model: model.cfg.clone(),
        term_vocab: vocab.to_lines(),
    };
    Ok(checkpoint::save(path, "termgen", &cfg, model)?)
}

pub fn load_termgen(path: &Path) -> CliResult<(TermGen<f32>, Vocabulary)> {
    let (manifest, tensors) = checkpoint::load(path, "termgen")?;
    let cfg: TermGenCkpt =
        serde_json::from_value(manifest.config.clone()).map_err(manifest_err)?;
    let mut model = TermGen::new(cfg.model, &mut ChaCha8Rng::seed_from_u64(0))?;
    checkpoint::apply(&mut model, &manifest, &tensors)?;
    Ok((model, Vocabulary::from_lines(&cfg.term_vocab)?))
}

pub fn save_langgen(path: &Path, model: &LangGen<f32>, vocab: &Vocabulary) -> CliResult<()> {
    let cfg = LangGenCkpt {
        model: model.cfg.clone(),
        vocab: vocab.to_lines(),
    };
    Ok(checkpoint::save(path, "langgen", &cfg, model)?)
}

pub fn load_langgen(path: &Path) -> CliResult<(LangGen<f32>, Vocabulary)> {
    let (manifest, tensors) = checkpoint::load(path, "langgen")?;
    let cfg: LangGenCkpt =
        serde_json::from_value(manifest.config.clone()).map_err(manifest_err)?;
    let mut model = LangGen::new(cfg.model, &mut ChaCha8Rng::seed_from_u64(0))?;
    checkpoint::apply(&mut model, &manifest, &tensors)?;
    Ok((model, Vocabulary::from_lines(&cfg.vocab)?))
}

pub fn save_gru_lm(path: &Path, model: &GruLm<f32>, vocab: &Vocabulary) -> CliResult<()> {
    let cfg = GruLmCkpt {
        model: model.config().clone(),
        vocab: vocab.to_lines(),
    };
    Ok(checkpoint::save(path, "gru_lm", &cfg, model)?)
}

pub fn load_gru_lm(path: &Path) -> CliResult<(GruLm<f32>, Vocabulary)> {
    let (manifest, tensors) = checkpoint::load(path, "gru_lm")?;
    let cfg: GruLmCkpt = serde_json::from_value(manifest.config.clone()).map_err(manifest_err)?;
    let mut model = GruLm::new(cfg.model, &mut ChaCha8Rng::seed_from_u64(0))?;
    checkpoint::apply(&mut model, &manifest, &tensors)?;
    Ok((model, Vocabulary::from_lines(&cfg.vocab)?))
}
