//! Trained-model files: JSON holding the parameters, the optimizer state
//! and a hash of the vocabulary they were trained on.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::salience::LatentModel;
use crate::vae::AdamState;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    /// SHA-256 of the vocabulary, see [`Vocabulary::hash`].
    pub vocab_hash: String,
    pub vocab_size: usize,
    pub config: RunConfig,
    pub model: LatentModel,
    pub adam: AdamState,
}

impl Checkpoint {
    pub fn new(vocab: &Vocabulary, config: &RunConfig, model: &LatentModel, adam: &AdamState) -> Self {
        Checkpoint {
            format_version: FORMAT_VERSION,
            vocab_hash: vocab.hash(),
            vocab_size: vocab.len(),
            config: config.clone(),
            model: model.clone(),
            adam: adam.clone(),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, serde_json::to_vec(self)?)?;
        Ok(())
    }

    /// Reads a checkpoint and checks it against `vocab`.
    pub fn load(path: impl AsRef<Path>, vocab: &Vocabulary) -> Result<Self> {
        let path = path.as_ref();
        let ck: Checkpoint = serde_json::from_slice(&fs::read(path)?)?;
        if ck.format_version != FORMAT_VERSION {
            return Err(Error::invalid(format!(
                "{}: checkpoint format {} is not supported",
                path.display(),
                ck.format_version
            )));
        }
        if ck.vocab_hash != vocab.hash() {
            return Err(Error::invalid(format!(
                "{}: checkpoint was trained on a different vocabulary",
                path.display()
            )));
        }
        if ck.model.vae.vocab_size() != vocab.len() {
            return Err(Error::invalid("checkpoint parameter shapes do not match the vocabulary"));
        }
        Ok(ck)
    }
}
