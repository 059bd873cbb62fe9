//! Model checkpoints: `SEMSTYLE1` magic, a length-prefixed JSON manifest
//! (model kind, config, parameter names/shapes), then all parameters as
//! little-endian f32 in visit order. Writes go to a temp file in the target
//! directory and are renamed into place.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{CheckpointError, Error, Result};
use crate::nncore::{Parameterized, Tensor};

pub const MAGIC: &[u8; 9] = b"SEMSTYLE1";
pub const SUPPORTED_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamEntry {
    pub name: String,
    pub shape: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub kind: String,
    pub config: serde_json::Value,
    pub params: Vec<ParamEntry>,
}

fn manifest_of<P: Parameterized<f32>>(kind: &str, config: serde_json::Value, model: &P) -> Manifest {
    let mut params = Vec::new();
    model.visit(&mut |name, t| {
        params.push(ParamEntry {
            name: name.to_string(),
            shape: t.shape().to_vec(),
        });
    });
    Manifest {
        kind: kind.to_string(),
        config,
        params,
    }
}

/// Serialize `model` to `path`. The write is atomic: a sibling temp file is
/// renamed over the target.
pub fn save<P: Parameterized<f32>>(
    path: &Path,
    kind: &str,
    config: &impl Serialize,
    model: &P,
) -> Result<()> {
    let config = serde_json::to_value(config)
        .map_err(|e| CheckpointError::Manifest(e.to_string()))?;
    let manifest = manifest_of(kind, config, model);
    let manifest_bytes = serde_json::to_vec(&manifest)
        .map_err(|e| CheckpointError::Manifest(e.to_string()))?;

    let mut bytes = Vec::new();
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&(manifest_bytes.len() as u32).to_le_bytes());
    bytes.extend_from_slice(&manifest_bytes);
    model.visit(&mut |_, t| {
        for v in t.data() {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    });

    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(&bytes).map_err(|e| Error::io(&tmp, e))?;
        f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Read a checkpoint's manifest and raw parameter values.
pub fn load(path: &Path, expected_kind: &str) -> Result<(Manifest, Vec<Tensor<f32>>)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() < MAGIC.len() + 4 {
        return Err(CheckpointError::BadMagic {
            expected: String::from_utf8_lossy(MAGIC).into_owned(),
            found: String::from_utf8_lossy(&bytes).into_owned(),
        }
        .into());
    }
    let (magic, rest) = bytes.split_at(MAGIC.len());
    if &magic[..8] != &MAGIC[..8] {
        return Err(CheckpointError::BadMagic {
            expected: String::from_utf8_lossy(MAGIC).into_owned(),
            found: String::from_utf8_lossy(magic).into_owned(),
        }
        .into());
    }
    let version = (magic[8] as char).to_digit(10).unwrap_or(0);
    if version != SUPPORTED_VERSION {
        return Err(CheckpointError::VersionMismatch {
            found: version,
            supported: SUPPORTED_VERSION,
        }
        .into());
    }

    let (len_bytes, rest) = rest.split_at(4);
    let manifest_len = u32::from_le_bytes(len_bytes.try_into().unwrap()) as usize;
    if rest.len() < manifest_len {
        return Err(CheckpointError::Manifest(format!(
            "declared manifest of {manifest_len} bytes, file holds {}",
            rest.len()
        ))
        .into());
    }
    let (manifest_bytes, payload) = rest.split_at(manifest_len);
    let manifest: Manifest = serde_json::from_slice(manifest_bytes)
        .map_err(|e| CheckpointError::Manifest(e.to_string()))?;
    if manifest.kind != expected_kind {
        return Err(CheckpointError::ModelKind {
            expected: expected_kind.to_string(),
            found: manifest.kind,
        }
        .into());
    }

    let declared: usize = manifest
        .params
        .iter()
        .map(|p| p.shape.iter().product::<usize>())
        .sum();
    if payload.len() != declared * 4 {
        return Err(CheckpointError::PayloadLength {
            expected: declared,
            found: payload.len() / 4,
        }
        .into());
    }

    let mut tensors = Vec::with_capacity(manifest.params.len());
    let mut offset = 0;
    for entry in &manifest.params {
        let n: usize = entry.shape.iter().product();
        let data: Vec<f32> = payload[offset..offset + n * 4]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        offset += n * 4;
        tensors.push(Tensor::from_vec(&entry.shape, data));
    }
    Ok((manifest, tensors))
}

macro_rules! typed_loader {
    ($fn_name:ident, $kind:literal, $model:ty, $cfg:ty, $doc:literal) => {
        #[doc = $doc]
        pub fn $fn_name(path: &Path) -> Result<($model, $cfg)> {
            let (manifest, tensors) = load(path, $kind)?;
            let cfg: $cfg = serde_json::from_value(manifest.config.clone())
                .map_err(|e| CheckpointError::Manifest(format!("config: {e}")))?;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
            let mut model = <$model>::new(cfg.clone(), &mut rng)?;
            apply(&mut model, &manifest, &tensors)?;
            Ok((model, cfg))
        }
    };
}

typed_loader!(
    load_termgen,
    "termgen",
    crate::termgen::TermGen<f32>,
    crate::termgen::TermGenConfig,
    "Load a term-generator checkpoint, reconstructing the model from its manifest config."
);
typed_loader!(
    load_langgen,
    "langgen",
    crate::langgen::LangGen<f32>,
    crate::langgen::LangGenConfig,
    "Load a language-generator checkpoint, reconstructing the model from its manifest config."
);
typed_loader!(
    load_gru_lm,
    "gru_lm",
    crate::styleval::GruLm<f32>,
    crate::styleval::GruLmConfig,
    "Load a GRU language-model checkpoint, reconstructing the model from its manifest config."
);

/// Copy loaded tensors into a freshly constructed model, verifying names
/// and shapes against the manifest.
pub fn apply<P: Parameterized<f32>>(
    model: &mut P,
    manifest: &Manifest,
    tensors: &[Tensor<f32>],
) -> Result<()> {
    let names = model.param_names();
    if names.len() != manifest.params.len() {
        return Err(CheckpointError::Manifest(format!(
            "model has {} parameters, manifest lists {}",
            names.len(),
            manifest.params.len()
        ))
        .into());
    }
    for (name, entry) in names.iter().zip(&manifest.params) {
        if name != &entry.name {
            return Err(CheckpointError::Manifest(format!(
                "parameter order mismatch: model {name}, manifest {}",
                entry.name
            ))
            .into());
        }
    }
    model.load_param_vec(tensors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::termgen::{TermGen, TermGenConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tiny_model(seed: u64) -> TermGen<f32> {
        let cfg = TermGenConfig {
            vocab_size: 7,
            feature_dim: 4,
            embed_dim: 3,
            hidden_dim: 5,
            ..TermGenConfig::new(7)
        };
        TermGen::new(cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn round_trip_preserves_every_parameter() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        let model = tiny_model(1);
        save(&path, "termgen", &model.cfg, &model).unwrap();

        let (manifest, tensors) = load(&path, "termgen").unwrap();
        let cfg: TermGenConfig = serde_json::from_value(manifest.config.clone()).unwrap();
        let mut restored = TermGen::new(cfg, &mut ChaCha8Rng::seed_from_u64(99))
            .unwrap()
            .zeros_like();
        apply(&mut restored, &manifest, &tensors).unwrap();
        assert_eq!(model.param_vec(), restored.param_vec());
    }

    #[test]
    fn typed_loader_rebuilds_the_model_from_its_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ckpt");
        let model = tiny_model(8);
        save(&path, "termgen", &model.cfg, &model).unwrap();
        let (loaded, cfg) = load_termgen(&path).unwrap();
        assert_eq!(loaded.param_vec(), model.param_vec());
        assert_eq!(cfg.vocab_size, 7);
        assert!(load_langgen(&path).is_err(), "kind check must reject");
    }

    #[test]
    fn same_model_saves_byte_identical_files() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.ckpt");
        let b = dir.path().join("b.ckpt");
        let model = tiny_model(2);
        save(&a, "termgen", &model.cfg, &model).unwrap();
        save(&b, "termgen", &model.cfg, &model).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn bad_magic_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.ckpt");
        std::fs::write(&path, b"NOTAMODEL-------").unwrap();
        match load(&path, "termgen") {
            Err(Error::Checkpoint(CheckpointError::BadMagic { .. })) => {}
            other => panic!("expected BadMagic, got {other:?}"),
        }
    }

    #[test]
    fn future_version_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v2.ckpt");
        let model = tiny_model(3);
        save(&path, "termgen", &model.cfg, &model).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[8] = b'2';
        std::fs::write(&path, bytes).unwrap();
        match load(&path, "termgen") {
            Err(Error::Checkpoint(CheckpointError::VersionMismatch { found: 2, supported: 1 })) => {}
            other => panic!("expected VersionMismatch, got {other:?}"),
        }
    }

    #[test]
    fn truncated_payload_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("short.ckpt");
        let model = tiny_model(4);
        save(&path, "termgen", &model.cfg, &model).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 8]).unwrap();
        match load(&path, "termgen") {
            Err(Error::Checkpoint(CheckpointError::PayloadLength { .. })) => {}
            other => panic!("expected PayloadLength, got {other:?}"),
        }
    }

    #[test]
    fn wrong_kind_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("kind.ckpt");
        let model = tiny_model(5);
        save(&path, "termgen", &model.cfg, &model).unwrap();
        match load(&path, "langgen") {
            Err(Error::Checkpoint(CheckpointError::ModelKind { .. })) => {}
            other => panic!("expected ModelKind, got {other:?}"),
        }
    }

    #[test]
    fn no_temp_file_remains_after_save() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("clean.ckpt");
        let model = tiny_model(6);
        save(&path, "termgen", &model.cfg, &model).unwrap();
        let names: Vec<String> = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        assert_eq!(names, vec!["clean.ckpt".to_string()]);
    }
}
