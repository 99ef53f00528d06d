use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ilp::CooccurMode;

/// Every tunable of a pipeline run.
///
/// Loaded from a flat `key = value` file (TOML syntax); unknown keys are
/// rejected. Defaults reproduce the reference hyper-parameters
/// (m=5, d_h=500, K=100, λ_p=0.2, Adam at 0.001).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Number of latent aspect vectors.
    pub aspects: usize,
    pub hidden: usize,
    pub latent: usize,
    pub lambda_p: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    pub min_df: usize,
    pub word_limit: usize,
    /// Largest phrase count handed to the exact ILP solver.
    pub exact_cap: usize,
    /// Epochs between refreshes of the latent-space comment weights.
    pub rho_refresh: usize,
    /// Aspect terms used when turning sentence salience into phrase salience.
    pub top_k: usize,
    pub cosine_weights: bool,
    pub literal_alignment: bool,
    pub cooccur: CooccurMode,
    pub chunker_fallback: bool,
    pub stem: bool,
    pub no_comments: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            aspects: 5,
            hidden: 500,
            latent: 100,
            lambda_p: 0.2,
            learning_rate: 0.001,
            epochs: 300,
            seed: 0,
            min_df: 2,
            word_limit: 100,
            exact_cap: 25,
            rho_refresh: 10,
            top_k: 10,
            cosine_weights: false,
            literal_alignment: false,
            cooccur: CooccurMode::SameSentence,
            chunker_fallback: true,
            stem: true,
            no_comments: false,
        }
    }
}

impl RunConfig {
    /// Desk-scale network sizes (d_h=64, K=16); everything else default.
    pub fn desk() -> Self {
        RunConfig {
            hidden: 64,
            latent: 16,
            ..Self::default()
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(s).map_err(|e| Error::invalid(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path)?;
        Self::from_toml_str(&s).map_err(|e| match e {
            Error::InvalidInput(m) => Error::invalid(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("aspects", self.aspects),
            ("hidden", self.hidden),
            ("latent", self.latent),
            ("epochs", self.epochs),
            ("min_df", self.min_df),
            ("word_limit", self.word_limit),
            ("exact_cap", self.exact_cap),
            ("rho_refresh", self.rho_refresh),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::invalid(format!("{name} must be positive")));
            }
        }
        if !(0.0..=1.0).contains(&self.lambda_p) {
            return Err(Error::invalid("lambda_p must lie in [0, 1]"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid("learning_rate must be positive"));
        }
        Ok(())
    }
}
