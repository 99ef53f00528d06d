//! Aspect-based salience estimation.
//!
//! `m` latent aspect vectors `S_z` are decoded through the VAE decoder,
//! refined by attending over news and gated comment sentences (in hidden
//! and in term space), and asked to reconstruct every sentence as a linear
//! combination `A · S` in all three spaces. The norm of row `i` of the news
//! coefficients `A_d` is the salience of news sentence `i`.

mod align;
mod objective;

use ndarray::{Array1, Array2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use align::{align, align_hidden, align_output, gate, gate_backward, output_align, AlignMode, HiddenAlign, OutputAlign};
pub use objective::{
    backward, decode_aspects, forward, objective_and_gradient, reconstruction_loss, AspectBanks, Batch, Forward,
    LatentModel, Targets,
};

use crate::config::RunConfig;
use crate::corpus::{TopicMatrices, Vocabulary};
use crate::error::{Error, Result};
use crate::linalg::{cholesky_solve, row_norms};
use crate::vae::{adam_step, draw_noise, encode_batch, AdamState};
use crate::weights::{compute_comment_weights, space_weights, CommentWeights};

/// Generator streams derived from the run seed.
const STREAM_INIT: u64 = 0;
const STREAM_COMMENT_INIT: u64 = 1;
const STREAM_NEWS_NOISE: u64 = 2;
const STREAM_COMMENT_NOISE: u64 = 3;

pub(crate) fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceScore {
    pub doc_id: String,
    pub index: usize,
    pub score: f64,
}

/// Per-news-sentence salience, the comment gates and the ranked terms of
/// every aspect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SalienceResult {
    pub scores: Vec<SentenceScore>,
    pub weights: CommentWeights,
    pub aspect_terms: Vec<Vec<String>>,
}

impl SalienceResult {
    pub fn score_of(&self, doc_id: &str, index: usize) -> Option<f64> {
        self.scores
            .iter()
            .find(|s| s.doc_id == doc_id && s.index == index)
            .map(|s| s.score)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub objective: f64,
    pub bound: f64,
    pub recon: f64,
}

/// Knobs that only tests and diagnostics need.
#[derive(Debug, Clone, Default)]
pub struct TrainOptions {
    /// Use these gates for the whole run instead of computing them.
    pub fixed_rho: Option<Array1<f64>>,
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub model: LatentModel,
    pub adam: AdamState,
    pub result: SalienceResult,
    /// Final aligned aspect term vectors, m × |V|.
    pub s_x: Array2<f64>,
    pub history: Vec<EpochStats>,
}

/// For each row of `s_x`, the `k` terms with the largest values (ties by
/// term). `k` larger than the vocabulary is clamped.
pub fn top_terms(s_x: &Array2<f64>, vocab: &Vocabulary, k: usize) -> Vec<Vec<String>> {
    let v = vocab.len().min(s_x.ncols());
    if k > v {
        log::warn!("top_terms: k = {k} exceeds vocabulary size {v}, clamping");
    }
    let k = k.min(v);
    s_x.rows()
        .into_iter()
        .map(|row| {
            let mut idx: Vec<usize> = (0..v).collect();
            idx.sort_by(|&a, &b| {
                row[b]
                    .total_cmp(&row[a])
                    .then_with(|| vocab.term(a).cmp(vocab.term(b)))
            });
            idx.into_iter().take(k).map(|i| vocab.term(i).to_string()).collect()
        })
        .collect()
}

fn mean_weights(
    matrices: &TopicMatrices,
    model: &LatentModel,
    config: &RunConfig,
) -> Result<CommentWeights> {
    let x_d = matrices.news.data.view();
    let x_c = matrices.comments.data.view();
    let k = model.vae.latent_size();
    let mu_d = encode_batch(x_d, &model.vae, Array2::zeros((x_d.nrows(), k)))?.mu;
    let mu_c = encode_batch(x_c, &model.vae, Array2::zeros((x_c.nrows(), k)))?.mu;
    compute_comment_weights(x_d, x_c, mu_d.view(), mu_c.view(), config.lambda_p, config.cosine_weights)
}

/// Trains on one topic with default options.
pub fn train(matrices: &TopicMatrices, config: &RunConfig) -> Result<Trained> {
    train_with(matrices, config, &TrainOptions::default())
}

pub fn train_with(matrices: &TopicMatrices, config: &RunConfig, options: &TrainOptions) -> Result<Trained> {
    config.validate()?;
    let x_d = matrices.news.data.view();
    let x_c = matrices.comments.data.view();
    let (n_d, n_c) = (x_d.nrows(), x_c.nrows());
    if n_d == 0 {
        return Err(Error::invalid("topic has no vectorized news sentences"));
    }
    if let Some(r) = &options.fixed_rho {
        if r.len() != n_c {
            return Err(Error::invalid("fixed gates must match the comment count"));
        }
    }
    let mode = if config.literal_alignment {
        AlignMode::Literal
    } else {
        AlignMode::Renormalized
    };
    let sizes = (matrices.vocab.len(), config.hidden, config.latent, config.aspects);
    let mut model = LatentModel::init(
        sizes,
        n_d,
        n_c,
        &mut stream(config.seed, STREAM_INIT),
        &mut stream(config.seed, STREAM_COMMENT_INIT),
    );
    let mut adam = AdamState::new(&model, config.learning_rate);
    let mut news_rng = stream(config.seed, STREAM_NEWS_NOISE);
    let mut comment_rng = stream(config.seed, STREAM_COMMENT_NOISE);

    let term_gates = || -> Result<CommentWeights> {
        let rho_x = space_weights(x_d, x_c, config.cosine_weights)?;
        Ok(CommentWeights::term_only(rho_x, config.lambda_p))
    };
    let mut weights = term_gates()?;
    let gates = |w: &CommentWeights| options.fixed_rho.clone().unwrap_or_else(|| w.rho.clone());
    let mut rho = gates(&weights);

    let mut history = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        if epoch > 0 && config.rho_refresh > 0 && epoch % config.rho_refresh == 0 {
            weights = mean_weights(matrices, &model, config)?;
            rho = gates(&weights);
        }
        let eps_d = draw_noise(n_d, config.latent, &mut news_rng);
        let eps_c = draw_noise(n_c, config.latent, &mut comment_rng);
        let batch = Batch {
            x_d,
            x_c,
            eps_d: eps_d.view(),
            eps_c: eps_c.view(),
            rho: rho.view(),
            mode,
        };
        let step = objective_and_gradient(&model, &batch).and_then(|(fwd, grad)| {
            adam_step(&mut model, &grad, &mut adam)?;
            Ok(fwd)
        });
        let fwd = step.map_err(|e| match e {
            Error::Numeric(msg) => Error::numeric(format!("epoch {}: {msg}", epoch + 1)),
            other => other,
        })?;
        log::debug!(
            "epoch {}: J = {:.4} (bound {:.4}, L_A {:.4})",
            epoch + 1,
            fwd.objective,
            fwd.bound,
            fwd.recon
        );
        history.push(EpochStats {
            epoch: epoch + 1,
            objective: fwd.objective,
            bound: fwd.bound,
            recon: fwd.recon,
        });
    }

    let (result, s_x) = finalize(matrices, config, &mut model, options)?;
    Ok(Trained {
        model,
        adam,
        result,
        s_x,
        history,
    })
}

/// Final scoring of a trained model: gates from deterministic-mean
/// encodings, the ridge refit of `A_d`, row norms and aspect terms.
/// Replaces `model.a_d` with the refit. Returns the result and the final
/// aspect term vectors.
pub fn finalize(
    matrices: &TopicMatrices,
    config: &RunConfig,
    model: &mut LatentModel,
    options: &TrainOptions,
) -> Result<(SalienceResult, Array2<f64>)> {
    let x_c = matrices.comments.data.view();
    let mode = if config.literal_alignment {
        AlignMode::Literal
    } else {
        AlignMode::Renormalized
    };
    if model.a_c.nrows() != x_c.nrows() || model.a_d.nrows() != matrices.news.rows() {
        return Err(Error::invalid("model does not match the topic's sentence counts"));
    }
    let weights = if x_c.nrows() > 0 {
        mean_weights(matrices, model, config)?
    } else {
        CommentWeights::term_only(Array1::zeros(0), config.lambda_p)
    };
    let rho = options.fixed_rho.clone().unwrap_or_else(|| weights.rho.clone());
    let (a_d, s_x) = refit_news_coefficients(model, matrices, rho.view(), mode)?;
    model.a_d = a_d;
    let norms = row_norms(&model.a_d);
    let scores = matrices
        .news_ids
        .iter()
        .zip(norms.iter())
        .map(|((doc, idx), &score)| SentenceScore {
            doc_id: doc.clone(),
            index: *idx,
            score,
        })
        .collect();
    let aspect_terms = top_terms(&s_x, &matrices.vocab, config.top_k);
    Ok((
        SalienceResult {
            scores,
            weights,
            aspect_terms,
        },
        s_x,
    ))
}

/// Ridge strength of the final refit, relative to the mean squared norm of
/// the aspect banks.
pub const REFIT_RIDGE: f64 = 1.0;

/// Ridge least-squares `A_d` against deterministic-mean targets with
/// everything else frozen: `A_d = Y Bᵀ (B Bᵀ + λI)⁻¹`, `B = [S_z | s̃_h | S_x]`,
/// `Y = [μ_d | H_d | X_d]`. Identical sentences get identical rows.
/// Returns `(A_d, S_x)`.
pub fn refit_news_coefficients(
    model: &LatentModel,
    matrices: &TopicMatrices,
    rho: ndarray::ArrayView1<f64>,
    mode: AlignMode,
) -> Result<(Array2<f64>, Array2<f64>)> {
    let x_d = matrices.news.data.view();
    let x_c = matrices.comments.data.view();
    let k = model.vae.latent_size();
    let enc_d = encode_batch(x_d, &model.vae, Array2::zeros((x_d.nrows(), k)))?;
    let enc_c = encode_batch(x_c, &model.vae, Array2::zeros((x_c.nrows(), k)))?;
    let banks = objective::aspect_banks(model, enc_d.h.view(), enc_c.h.view(), x_d, x_c, rho, mode)?;
    let b = ndarray::concatenate(Axis(1), &[model.s_z.view(), banks.s_h().view(), banks.s_x().view()])
        .map_err(|e| Error::invalid(e.to_string()))?;
    let y = ndarray::concatenate(Axis(1), &[enc_d.mu.view(), enc_d.h.view(), x_d])
        .map_err(|e| Error::invalid(e.to_string()))?;
    let mut gram = b.dot(&b.t());
    let m = gram.nrows();
    let ridge = REFIT_RIDGE * (gram.diag().sum() / m.max(1) as f64).max(f64::MIN_POSITIVE);
    for i in 0..m {
        gram[[i, i]] += ridge;
    }
    let rhs = b.dot(&y.t());
    let a_t = cholesky_solve(&gram, &rhs).ok_or_else(|| Error::numeric("aspect Gram matrix is singular"))?;
    let a_d = a_t.t().as_standard_layout().to_owned();
    if !a_d.iter().all(|v| v.is_finite()) {
        return Err(Error::numeric("non-finite refit coefficients"));
    }
    Ok((a_d, banks.s_x().clone()))
}
