//! Bag-of-words variational auto-encoder with hand-written backward pass.
//!
//! Sentences are rows. For a batch `X` (n × |V|):
//!
//! ```text
//! H   = relu(X W_xh + b_xh)          encoder hidden, n × d_h
//! Mu  = H W_mu + b_mu                n × K
//! LV  = H W_logvar + b_logvar        log σ², n × K
//! Z   = Mu + exp(LV / 2) ⊙ E         E ~ N(0, I)
//! D   = relu(Z W_zh + b_zh)          decoder hidden
//! X'  = sigmoid(D W_hx + b_hx)       reconstruction
//! ```
//!
//! The per-sentence bound is the Bernoulli log-likelihood of `x` under
//! `x'` minus the KL divergence to the standard normal prior.

mod adam;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

pub use adam::{adam_step, AdamState, Parameters, DEFAULT_LEARNING_RATE};

use crate::error::{Error, Result};
use crate::linalg::{affine, all_finite, sigmoid};

/// Clamp applied to `x'` before taking logarithms.
pub const PROB_CLAMP: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VaeParams {
    pub w_xh: Array2<f64>,
    pub b_xh: Array1<f64>,
    pub w_mu: Array2<f64>,
    pub b_mu: Array1<f64>,
    pub w_logvar: Array2<f64>,
    pub b_logvar: Array1<f64>,
    pub w_zh: Array2<f64>,
    pub b_zh: Array1<f64>,
    pub w_hx: Array2<f64>,
    pub b_hx: Array1<f64>,
}

/// Uniform Glorot initialization.
pub fn glorot<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Array2<f64> {
    let limit = (6.0 / (rows + cols).max(1) as f64).sqrt();
    let dist = Uniform::new_inclusive(-limit, limit).expect("finite limit");
    Array2::from_shape_simple_fn((rows, cols), || dist.sample(rng))
}

impl VaeParams {
    pub fn zeros(vocab: usize, hidden: usize, latent: usize) -> Self {
        VaeParams {
            w_xh: Array2::zeros((vocab, hidden)),
            b_xh: Array1::zeros(hidden),
            w_mu: Array2::zeros((hidden, latent)),
            b_mu: Array1::zeros(latent),
            w_logvar: Array2::zeros((hidden, latent)),
            b_logvar: Array1::zeros(latent),
            w_zh: Array2::zeros((latent, hidden)),
            b_zh: Array1::zeros(hidden),
            w_hx: Array2::zeros((hidden, vocab)),
            b_hx: Array1::zeros(vocab),
        }
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init<R: Rng + ?Sized>(vocab: usize, hidden: usize, latent: usize, rng: &mut R) -> Self {
        let mut p = Self::zeros(vocab, hidden, latent);
        p.w_xh = glorot(vocab, hidden, rng);
        p.w_mu = glorot(hidden, latent, rng);
        p.w_logvar = glorot(hidden, latent, rng);
        p.w_zh = glorot(latent, hidden, rng);
        p.w_hx = glorot(hidden, vocab, rng);
        p
    }

    pub fn vocab_size(&self) -> usize {
        self.w_xh.nrows()
    }

    pub fn hidden_size(&self) -> usize {
        self.w_xh.ncols()
    }

    pub fn latent_size(&self) -> usize {
        self.w_mu.ncols()
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.vocab_size(), self.hidden_size(), self.latent_size())
    }

    fn check_shapes(&self) -> Result<()> {
        let (v, h, k) = (self.vocab_size(), self.hidden_size(), self.latent_size());
        let ok = self.b_xh.len() == h
            && self.w_mu.dim() == (h, k)
            && self.b_mu.len() == k
            && self.w_logvar.dim() == (h, k)
            && self.b_logvar.len() == k
            && self.w_zh.dim() == (k, h)
            && self.b_zh.len() == h
            && self.w_hx.dim() == (h, v)
            && self.b_hx.len() == v;
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("inconsistent VAE parameter shapes"))
        }
    }
}

impl Parameters for VaeParams {
    fn block_names(&self) -> Vec<&'static str> {
        vec![
            "w_xh", "b_xh", "w_mu", "b_mu", "w_logvar", "b_logvar", "w_zh", "b_zh", "w_hx", "b_hx",
        ]
    }

    fn blocks(&self) -> Vec<&[f64]> {
        vec![
            self.w_xh.as_slice().unwrap(),
            self.b_xh.as_slice().unwrap(),
            self.w_mu.as_slice().unwrap(),
            self.b_mu.as_slice().unwrap(),
            self.w_logvar.as_slice().unwrap(),
            self.b_logvar.as_slice().unwrap(),
            self.w_zh.as_slice().unwrap(),
            self.b_zh.as_slice().unwrap(),
            self.w_hx.as_slice().unwrap(),
            self.b_hx.as_slice().unwrap(),
        ]
    }

    fn blocks_mut(&mut self) -> Vec<&mut [f64]> {
        vec![
            self.w_xh.as_slice_mut().unwrap(),
            self.b_xh.as_slice_mut().unwrap(),
            self.w_mu.as_slice_mut().unwrap(),
            self.b_mu.as_slice_mut().unwrap(),
            self.w_logvar.as_slice_mut().unwrap(),
            self.b_logvar.as_slice_mut().unwrap(),
            self.w_zh.as_slice_mut().unwrap(),
            self.b_zh.as_slice_mut().unwrap(),
            self.w_hx.as_slice_mut().unwrap(),
            self.b_hx.as_slice_mut().unwrap(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodeResult {
    pub h_enc: Array1<f64>,
    pub mu: Array1<f64>,
    pub log_var: Array1<f64>,
    pub eps: Array1<f64>,
    pub z: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub h_dec: Array1<f64>,
    pub x_prime: Array1<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Elbo {
    pub recon: f64,
    pub kl: f64,
    pub bound: f64,
}

/// Standard-normal noise matrix, drawn row by row.
pub fn draw_noise<R: Rng + ?Sized>(rows: usize, latent: usize, rng: &mut R) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, latent), || StandardNormal.sample(rng))
}

fn check_finite<'a>(layer: &str, values: impl IntoIterator<Item = &'a f64>) -> Result<()> {
    if all_finite(values) {
        Ok(())
    } else {
        Err(Error::numeric(format!("non-finite values in layer {layer}")))
    }
}

/// Encodes one sentence. With `rng == None` the noise is zero and `z = μ`.
pub fn encode<R: Rng + ?Sized>(
    x: ArrayView1<f64>,
    params: &VaeParams,
    rng: Option<&mut R>,
) -> Result<EncodeResult> {
    let k = params.latent_size();
    let eps = match rng {
        Some(rng) => draw_noise(1, k, rng),
        None => Array2::zeros((1, k)),
    };
    let enc = encode_batch(x.insert_axis(Axis(0)), params, eps)?;
    Ok(EncodeResult {
        h_enc: enc.h.row(0).to_owned(),
        mu: enc.mu.row(0).to_owned(),
        log_var: enc.log_var.row(0).to_owned(),
        eps: enc.eps.row(0).to_owned(),
        z: enc.z.row(0).to_owned(),
    })
}

/// Deterministic-mean encoding (`ε = 0`).
pub fn encode_mean(x: ArrayView1<f64>, params: &VaeParams) -> Result<EncodeResult> {
    encode::<rand_chacha::ChaCha8Rng>(x, params, None)
}

pub fn decode(z: ArrayView1<f64>, params: &VaeParams) -> Result<DecodeResult> {
    check_finite("z", z.iter())?;
    let dec = decode_batch(z.insert_axis(Axis(0)), params)?;
    Ok(DecodeResult {
        h_dec: dec.h.row(0).to_owned(),
        x_prime: dec.x_prime.row(0).to_owned(),
    })
}

/// Batched encoder pass.
#[derive(Debug, Clone)]
pub struct EncoderPass {
    pub pre_h: Array2<f64>,
    pub h: Array2<f64>,
    pub mu: Array2<f64>,
    pub log_var: Array2<f64>,
    pub eps: Array2<f64>,
    pub z: Array2<f64>,
}

/// Batched decoder pass.
#[derive(Debug, Clone)]
pub struct DecoderPass {
    pub pre_h: Array2<f64>,
    pub h: Array2<f64>,
    pub logits: Array2<f64>,
    pub x_prime: Array2<f64>,
}

pub fn encode_batch(
    x: ArrayView2<f64>,
    params: &VaeParams,
    eps: Array2<f64>,
) -> Result<EncoderPass> {
    params.check_shapes()?;
    if x.ncols() != params.vocab_size() {
        return Err(Error::invalid(format!(
            "input has {} columns, vocabulary has {}",
            x.ncols(),
            params.vocab_size()
        )));
    }
    if eps.dim() != (x.nrows(), params.latent_size()) {
        return Err(Error::invalid("noise matrix shape mismatch"));
    }
    let pre_h = affine(&x, &params.w_xh, &params.b_xh);
    let h = pre_h.mapv(|v| v.max(0.0));
    check_finite("h_enc", h.iter())?;
    let mu = affine(&h.view(), &params.w_mu, &params.b_mu);
    check_finite("mu", mu.iter())?;
    let log_var = affine(&h.view(), &params.w_logvar, &params.b_logvar);
    check_finite("log_var", log_var.iter())?;
    let sigma = log_var.mapv(|v| (0.5 * v).exp());
    let z = &mu + &(&sigma * &eps);
    check_finite("z", z.iter())?;
    Ok(EncoderPass {
        pre_h,
        h,
        mu,
        log_var,
        eps,
        z,
    })
}

pub fn decode_batch(z: ArrayView2<f64>, params: &VaeParams) -> Result<DecoderPass> {
    params.check_shapes()?;
    let pre_h = affine(&z, &params.w_zh, &params.b_zh);
    let h = pre_h.mapv(|v| v.max(0.0));
    check_finite("h_dec", h.iter())?;
    let logits = affine(&h.view(), &params.w_hx, &params.b_hx);
    check_finite("x_prime", logits.iter())?;
    let x_prime = logits.mapv(sigmoid);
    Ok(DecoderPass {
        pre_h,
        h,
        logits,
        x_prime,
    })
}

fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
}

fn elbo_parts(
    x: ArrayView1<f64>,
    mu: ArrayView1<f64>,
    log_var: ArrayView1<f64>,
    x_prime: ArrayView1<f64>,
) -> Elbo {
    let recon: f64 = x
        .iter()
        .zip(x_prime)
        .map(|(&xi, &pi)| {
            let p = clamp_prob(pi);
            xi * p.ln() + (1.0 - xi) * (1.0 - p).ln()
        })
        .sum();
    let kl = kl_divergence(mu, log_var);
    Elbo {
        recon,
        kl,
        bound: recon - kl,
    }
}

/// Closed-form KL(N(μ, σ²) ‖ N(0, I)) from `log σ²`.
pub fn kl_divergence(mu: ArrayView1<f64>, log_var: ArrayView1<f64>) -> f64 {
    -0.5 * mu
        .iter()
        .zip(log_var)
        .map(|(&m, &lv)| 1.0 + lv - m * m - lv.exp())
        .sum::<f64>()
}

/// Variational lower bound of one sentence.
pub fn elbo(x: ArrayView1<f64>, enc: &EncodeResult, dec: &DecodeResult) -> Result<Elbo> {
    if x.len() != dec.x_prime.len() {
        return Err(Error::invalid("x and x' lengths differ"));
    }
    let e = elbo_parts(x, enc.mu.view(), enc.log_var.view(), dec.x_prime.view());
    if !e.bound.is_finite() {
        return Err(Error::numeric("non-finite lower bound"));
    }
    Ok(e)
}

/// Per-row bounds of a batch.
pub fn batch_bounds(x: ArrayView2<f64>, enc: &EncoderPass, dec: &DecoderPass) -> Vec<Elbo> {
    (0..x.nrows())
        .map(|i| elbo_parts(x.row(i), enc.mu.row(i), enc.log_var.row(i), dec.x_prime.row(i)))
        .collect()
}

/// Σ news bounds + Σ_j ρ_j · comment bound_j.
pub fn weighted_bound(news: &[f64], comments: &[f64], rho: &[f64]) -> Result<f64> {
    if comments.len() != rho.len() {
        return Err(Error::invalid(format!(
            "{} comment bounds but {} weights",
            comments.len(),
            rho.len()
        )));
    }
    let c: f64 = comments.iter().zip(rho).map(|(b, r)| r * b).sum();
    Ok(news.iter().sum::<f64>() + c)
}

/// Forward caches for one batch of rows.
#[derive(Debug, Clone)]
pub struct VaePass {
    pub x: Array2<f64>,
    pub enc: EncoderPass,
    pub dec: DecoderPass,
}

impl VaePass {
    pub fn run(x: Array2<f64>, params: &VaeParams, eps: Array2<f64>) -> Result<Self> {
        let enc = encode_batch(x.view(), params, eps)?;
        let dec = decode_batch(enc.z.view(), params)?;
        Ok(VaePass { x, enc, dec })
    }

    pub fn bounds(&self) -> Vec<Elbo> {
        batch_bounds(self.x.view(), &self.enc, &self.dec)
    }
}


/// Extra gradients flowing into a pass from downstream consumers of its
/// latent codes and encoder hidden states.
#[derive(Debug, Clone, Default)]
pub struct Upstream {
    pub dz: Option<Array2<f64>>,
    pub dh: Option<Array2<f64>>,
}

/// Accumulates into `grads` the gradient of `−Σ_i w_i · bound_i` for the
/// rows of `pass`, plus any `upstream` gradients on `z` and `h_enc`.
pub fn backward_into(
    params: &VaeParams,
    pass: &VaePass,
    row_weights: &[f64],
    upstream: &Upstream,
    grads: &mut VaeParams,
) -> Result<()> {
    let n = pass.x.nrows();
    if row_weights.len() != n
        || pass.enc.z.nrows() != n
        || pass.dec.x_prime.nrows() != n
        || pass.x.ncols() != params.vocab_size()
        || pass.enc.z.ncols() != params.latent_size()
    {
        return Err(Error::invalid("forward cache does not match parameters"));
    }
    if n == 0 {
        return Ok(());
    }
    let w = Array1::from(row_weights.to_vec()).insert_axis(Axis(1));

    // reconstruction: −w [x ln p + (1−x) ln(1−p)], p = clamp(sigmoid(l))
    let mut d_logits = &pass.dec.x_prime - &pass.x;
    ndarray::Zip::from(&mut d_logits)
        .and(&pass.dec.x_prime)
        .for_each(|d, &p| {
            if p <= PROB_CLAMP || p >= 1.0 - PROB_CLAMP {
                *d = 0.0;
            }
        });
    d_logits *= &w;
    grads.w_hx += &pass.dec.h.t().dot(&d_logits);
    grads.b_hx += &d_logits.sum_axis(Axis(0));
    let mut d_pre_dec = d_logits.dot(&params.w_hx.t());
    d_pre_dec.zip_mut_with(&pass.dec.pre_h, |d, &p| {
        if p <= 0.0 {
            *d = 0.0
        }
    });
    grads.w_zh += &pass.enc.z.t().dot(&d_pre_dec);
    grads.b_zh += &d_pre_dec.sum_axis(Axis(0));
    let mut dz = d_pre_dec.dot(&params.w_zh.t());
    if let Some(extra) = &upstream.dz {
        dz += extra;
    }

    // z = μ + exp(lv/2) ε ; KL term +w·kl with ∂kl/∂μ = μ, ∂kl/∂lv = (e^lv − 1)/2
    let sigma = pass.enc.log_var.mapv(|v| (0.5 * v).exp());
    let d_mu = &dz + &(&pass.enc.mu * &w);
    let mut d_lv = &dz * &pass.enc.eps * &sigma * 0.5;
    d_lv += &(pass.enc.log_var.mapv(|v| 0.5 * (v.exp() - 1.0)) * &w);
    grads.w_mu += &pass.enc.h.t().dot(&d_mu);
    grads.b_mu += &d_mu.sum_axis(Axis(0));
    grads.w_logvar += &pass.enc.h.t().dot(&d_lv);
    grads.b_logvar += &d_lv.sum_axis(Axis(0));
    let mut dh = d_mu.dot(&params.w_mu.t()) + d_lv.dot(&params.w_logvar.t());
    if let Some(extra) = &upstream.dh {
        dh += extra;
    }
    dh.zip_mut_with(&pass.enc.pre_h, |d, &p| {
        if p <= 0.0 {
            *d = 0.0
        }
    });
    grads.w_xh += &pass.x.t().dot(&dh);
    grads.b_xh += &dh.sum_axis(Axis(0));
    Ok(())
}

/// Gradient of `−(Σ news bounds + Σ ρ_j comment bounds)` with fixed noise.
pub fn backward(
    params: &VaeParams,
    news: &VaePass,
    comments: &VaePass,
    rho: &[f64],
) -> Result<VaeParams> {
    let mut grads = params.zeros_like();
    let ones = vec![1.0; news.x.nrows()];
    backward_into(params, news, &ones, &Upstream::default(), &mut grads)?;
    backward_into(params, comments, rho, &Upstream::default(), &mut grads)?;
    Ok(grads)
}
