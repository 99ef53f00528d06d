//! Parameters, forward pass and gradient of the joint objective
//! `J = −(Σ news bounds + Σ_j ρ_j comment bound_j) + L_A`.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::align::{align_hidden, align_output, gate_backward, softmax_back, AlignMode, HiddenAlign, OutputAlign};
use crate::error::{Error, Result};
use crate::linalg::{affine, all_finite, frobenius_sq};
use crate::vae::{backward_into, glorot, weighted_bound, Parameters, Upstream, VaeParams, VaePass};

/// Everything trained for one topic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentModel {
    pub vae: VaeParams,
    pub w_dh: Array2<f64>,
    pub w_ch: Array2<f64>,
    pub w_hh: Array2<f64>,
    /// Output-layer alignment weights, one per vocabulary term.
    pub u_d: Array1<f64>,
    pub u_c: Array1<f64>,
    pub u_s: Array1<f64>,
    /// Latent aspect vectors, m × K.
    pub s_z: Array2<f64>,
    /// News reconstruction coefficients, n_d × m.
    pub a_d: Array2<f64>,
    /// Comment reconstruction coefficients, n_c × m.
    pub a_c: Array2<f64>,
}

impl LatentModel {
    pub fn zeros(vocab: usize, hidden: usize, latent: usize, aspects: usize, n_d: usize, n_c: usize) -> Self {
        LatentModel {
            vae: VaeParams::zeros(vocab, hidden, latent),
            w_dh: Array2::zeros((hidden, hidden)),
            w_ch: Array2::zeros((hidden, hidden)),
            w_hh: Array2::zeros((hidden, hidden)),
            u_d: Array1::zeros(vocab),
            u_c: Array1::zeros(vocab),
            u_s: Array1::zeros(vocab),
            s_z: Array2::zeros((aspects, latent)),
            a_d: Array2::zeros((n_d, aspects)),
            a_c: Array2::zeros((n_c, aspects)),
        }
    }

    /// Random initialization. `A_c` comes from its own generator so that the
    /// draws for every other block do not depend on the comment count.
    pub fn init<R: Rng + ?Sized, Q: Rng + ?Sized>(
        sizes: (usize, usize, usize, usize),
        n_d: usize,
        n_c: usize,
        rng: &mut R,
        comment_rng: &mut Q,
    ) -> Self {
        let (vocab, hidden, latent, aspects) = sizes;
        let mut m = Self::zeros(vocab, hidden, latent, aspects, n_d, n_c);
        m.vae = VaeParams::init(vocab, hidden, latent, rng);
        m.w_dh = glorot(hidden, hidden, rng);
        m.w_ch = glorot(hidden, hidden, rng);
        m.w_hh = glorot(hidden, hidden, rng);
        m.s_z = glorot(aspects, latent, rng);
        m.a_d = glorot(n_d, aspects, rng);
        m.a_c = glorot(n_c, aspects, comment_rng);
        m
    }

    pub fn aspects(&self) -> usize {
        self.s_z.nrows()
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = Self::zeros(
            self.vae.vocab_size(),
            self.vae.hidden_size(),
            self.vae.latent_size(),
            self.aspects(),
            self.a_d.nrows(),
            self.a_c.nrows(),
        );
        z.vae = self.vae.zeros_like();
        z
    }

    fn check_shapes(&self, n_d: usize, n_c: usize) -> Result<()> {
        let (v, h, k, m) = (
            self.vae.vocab_size(),
            self.vae.hidden_size(),
            self.vae.latent_size(),
            self.aspects(),
        );
        let ok = [&self.w_dh, &self.w_ch, &self.w_hh].iter().all(|w| w.dim() == (h, h))
            && [&self.u_d, &self.u_c, &self.u_s].iter().all(|u| u.len() == v)
            && self.s_z.ncols() == k
            && self.a_d.dim() == (n_d, m)
            && self.a_c.dim() == (n_c, m);
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("model shapes do not match the topic"))
        }
    }
}

impl Parameters for LatentModel {
    fn block_names(&self) -> Vec<&'static str> {
        let mut names = self.vae.block_names();
        names.extend(["w_dh", "w_ch", "w_hh", "u_d", "u_c", "u_s", "s_z", "a_d", "a_c"]);
        names
    }

    fn blocks(&self) -> Vec<&[f64]> {
        let mut b = self.vae.blocks();
        b.extend([
            self.w_dh.as_slice().unwrap(),
            self.w_ch.as_slice().unwrap(),
            self.w_hh.as_slice().unwrap(),
            self.u_d.as_slice().unwrap(),
            self.u_c.as_slice().unwrap(),
            self.u_s.as_slice().unwrap(),
            self.s_z.as_slice().unwrap(),
            self.a_d.as_slice().unwrap(),
            self.a_c.as_slice().unwrap(),
        ]);
        b
    }

    fn blocks_mut(&mut self) -> Vec<&mut [f64]> {
        let mut b = self.vae.blocks_mut();
        b.extend([
            self.w_dh.as_slice_mut().unwrap(),
            self.w_ch.as_slice_mut().unwrap(),
            self.w_hh.as_slice_mut().unwrap(),
            self.u_d.as_slice_mut().unwrap(),
            self.u_c.as_slice_mut().unwrap(),
            self.u_s.as_slice_mut().unwrap(),
            self.s_z.as_slice_mut().unwrap(),
            self.a_d.as_slice_mut().unwrap(),
            self.a_c.as_slice_mut().unwrap(),
        ]);
        b
    }
}

/// Aspect banks after decoding and both alignment steps.
#[derive(Debug, Clone)]
pub struct AspectBanks {
    pub pre_h: Array2<f64>,
    /// `relu(S_z W_zh + b_zh)` before alignment.
    pub s_h0: Array2<f64>,
    pub hidden: HiddenAlign,
    pub logits: Array2<f64>,
    /// `sigmoid(logits)` before output alignment.
    pub s_x0: Array2<f64>,
    pub output: OutputAlign,
}

impl AspectBanks {
    /// Aligned hidden aspects `s̃_h`.
    pub fn s_h(&self) -> &Array2<f64> {
        &self.hidden.s_h
    }

    /// Aligned term aspects.
    pub fn s_x(&self) -> &Array2<f64> {
        &self.output.s_x
    }
}

/// Row-wise VAE decoder applied to the aspect vectors: `(S_h, S_x)`.
pub fn decode_aspects(s_z: ArrayView2<f64>, vae: &VaeParams) -> Result<(Array2<f64>, Array2<f64>)> {
    if !all_finite(s_z.iter()) {
        return Err(Error::numeric("non-finite aspect vectors"));
    }
    let dec = crate::vae::decode_batch(s_z, vae)?;
    Ok((dec.h, dec.x_prime))
}

pub(crate) fn aspect_banks(
    model: &LatentModel,
    h_d: ArrayView2<f64>,
    h_c: ArrayView2<f64>,
    x_d: ArrayView2<f64>,
    x_c: ArrayView2<f64>,
    rho: ArrayView1<f64>,
    mode: AlignMode,
) -> Result<AspectBanks> {
    if !all_finite(model.s_z.iter()) {
        return Err(Error::numeric("non-finite aspect vectors"));
    }
    let vae = &model.vae;
    let pre_h = affine(&model.s_z.view(), &vae.w_zh, &vae.b_zh);
    let s_h0 = pre_h.mapv(|v| v.max(0.0));
    let hidden = align_hidden(
        s_h0.view(),
        h_d,
        h_c,
        rho,
        (&model.w_dh, &model.w_ch, &model.w_hh),
        mode,
    )?;
    let logits = affine(&hidden.s_h.view(), &vae.w_hx, &vae.b_hx);
    let s_x0 = logits.mapv(crate::linalg::sigmoid);
    let output = align_output(&logits, &s_x0, x_d, x_c, rho, (&model.u_d, &model.u_c, &model.u_s), mode)?;
    if !all_finite(output.s_x.iter()) {
        return Err(Error::numeric("non-finite aspect term vectors"));
    }
    Ok(AspectBanks {
        pre_h,
        s_h0,
        hidden,
        logits,
        s_x0,
        output,
    })
}

/// Reconstruction targets of one side (news or comments).
#[derive(Debug, Clone, Copy)]
pub struct Targets<'a> {
    pub z: ArrayView2<'a, f64>,
    pub h: ArrayView2<'a, f64>,
    pub x: ArrayView2<'a, f64>,
}

fn consistent(t: &Targets, s_z: ArrayView2<f64>, s_h: ArrayView2<f64>, s_x: ArrayView2<f64>) -> bool {
    t.z.nrows() == t.h.nrows()
        && t.h.nrows() == t.x.nrows()
        && t.z.ncols() == s_z.ncols()
        && t.h.ncols() == s_h.ncols()
        && t.x.ncols() == s_x.ncols()
}

/// `L_A` with the comment terms weighted per row by `ρ`.
#[allow(clippy::too_many_arguments)]
pub fn reconstruction_loss(
    news: Targets<'_>,
    comments: Targets<'_>,
    a_d: ArrayView2<f64>,
    a_c: ArrayView2<f64>,
    s_z: ArrayView2<f64>,
    s_h: ArrayView2<f64>,
    s_x: ArrayView2<f64>,
    rho: ArrayView1<f64>,
) -> Result<f64> {
    let m = s_z.nrows();
    let shapes_ok = s_h.nrows() == m
        && s_x.nrows() == m
        && a_d.ncols() == m
        && a_c.ncols() == m
        && a_d.nrows() == news.z.nrows()
        && a_c.nrows() == comments.z.nrows()
        && rho.len() == comments.z.nrows()
        && consistent(&news, s_z, s_h, s_x)
        && consistent(&comments, s_z, s_h, s_x);
    if !shapes_ok {
        return Err(Error::invalid("reconstruction shapes are inconsistent"));
    }
    let news_loss = frobenius_sq(&(&news.z - &a_d.dot(&s_z)))
        + frobenius_sq(&(&news.h - &a_d.dot(&s_h)))
        + frobenius_sq(&(&news.x - &a_d.dot(&s_x)));
    let rz = &comments.z - &a_c.dot(&s_z);
    let rh = &comments.h - &a_c.dot(&s_h);
    let rx = &comments.x - &a_c.dot(&s_x);
    let comment_loss: f64 = (0..rho.len())
        .map(|j| {
            let sq = |r: &Array2<f64>| r.row(j).dot(&r.row(j));
            rho[j] * (sq(&rz) + sq(&rh) + sq(&rx))
        })
        .sum();
    Ok(news_loss + comment_loss)
}

/// Inputs of one objective evaluation.
#[derive(Debug, Clone, Copy)]
pub struct Batch<'a> {
    pub x_d: ArrayView2<'a, f64>,
    pub x_c: ArrayView2<'a, f64>,
    pub eps_d: ArrayView2<'a, f64>,
    pub eps_c: ArrayView2<'a, f64>,
    pub rho: ArrayView1<'a, f64>,
    pub mode: AlignMode,
}

/// Forward caches of one objective evaluation.
#[derive(Debug, Clone)]
pub struct Forward {
    pub news: VaePass,
    pub comments: VaePass,
    pub banks: AspectBanks,
    /// `Σ news bounds + Σ_j ρ_j comment bound_j`.
    pub bound: f64,
    pub recon: f64,
    pub objective: f64,
}

pub fn forward(model: &LatentModel, batch: &Batch) -> Result<Forward> {
    model.check_shapes(batch.x_d.nrows(), batch.x_c.nrows())?;
    if batch.rho.len() != batch.x_c.nrows() {
        return Err(Error::invalid("one gate per comment sentence required"));
    }
    let news = VaePass::run(batch.x_d.to_owned(), &model.vae, batch.eps_d.to_owned())?;
    let comments = VaePass::run(batch.x_c.to_owned(), &model.vae, batch.eps_c.to_owned())?;
    let nb: Vec<f64> = news.bounds().iter().map(|e| e.bound).collect();
    let cb: Vec<f64> = comments.bounds().iter().map(|e| e.bound).collect();
    let bound = weighted_bound(&nb, &cb, batch.rho.as_slice().unwrap_or(&batch.rho.to_vec()))?;
    let banks = aspect_banks(
        model,
        news.enc.h.view(),
        comments.enc.h.view(),
        batch.x_d,
        batch.x_c,
        batch.rho,
        batch.mode,
    )?;
    let recon = reconstruction_loss(
        Targets {
            z: news.enc.z.view(),
            h: news.enc.h.view(),
            x: batch.x_d,
        },
        Targets {
            z: comments.enc.z.view(),
            h: comments.enc.h.view(),
            x: batch.x_c,
        },
        model.a_d.view(),
        model.a_c.view(),
        model.s_z.view(),
        banks.s_h().view(),
        banks.s_x().view(),
        batch.rho,
    )?;
    let objective = recon - bound;
    if !objective.is_finite() {
        return Err(Error::numeric("non-finite objective"));
    }
    Ok(Forward {
        news,
        comments,
        banks,
        bound,
        recon,
        objective,
    })
}

fn relu_mask(d: &mut Array2<f64>, pre: &Array2<f64>) {
    d.zip_mut_with(pre, |g, &p| {
        if p <= 0.0 {
            *g = 0.0
        }
    });
}

/// Gradient of the objective with respect to every block of `model`.
pub fn backward(model: &LatentModel, batch: &Batch, fwd: &Forward) -> Result<LatentModel> {
    let mut g = model.zeros_like();
    let vae = &model.vae;
    let rho_col = batch.rho.to_owned().insert_axis(Axis(1));
    let banks = &fwd.banks;
    let (news, comments) = (&fwd.news, &fwd.comments);
    let s_h = banks.s_h();
    let s_x = banks.s_x();

    // L_A residual gradients, G = ∂L_A/∂(A S) = −2 R (row-weighted by ρ for comments)
    let g_zd = (&model.a_d.dot(&model.s_z) - &news.enc.z) * 2.0;
    let g_hd = (&model.a_d.dot(s_h) - &news.enc.h) * 2.0;
    let g_xd = (&model.a_d.dot(s_x) - &batch.x_d) * 2.0;
    let g_zc = (&model.a_c.dot(&model.s_z) - &comments.enc.z) * 2.0 * &rho_col;
    let g_hc = (&model.a_c.dot(s_h) - &comments.enc.h) * 2.0 * &rho_col;
    let g_xc = (&model.a_c.dot(s_x) - &batch.x_c) * 2.0 * &rho_col;

    g.a_d = g_zd.dot(&model.s_z.t()) + g_hd.dot(&s_h.t()) + g_xd.dot(&s_x.t());
    g.a_c = g_zc.dot(&model.s_z.t()) + g_hc.dot(&s_h.t()) + g_xc.dot(&s_x.t());
    let mut d_sz = model.a_d.t().dot(&g_zd) + model.a_c.t().dot(&g_zc);
    let mut d_sh = model.a_d.t().dot(&g_hd) + model.a_c.t().dot(&g_hc);
    let d_sx = model.a_d.t().dot(&g_xd) + model.a_c.t().dot(&g_xc);
    let dz_d = -&g_zd;
    let mut dh_d = -&g_hd;
    let dz_c = -&g_zc;
    let mut dh_c = -&g_hc;

    // output alignment
    let out = &banks.output;
    let d_pre_out = &d_sx * &out.s_x.mapv(|p| p * (1.0 - p));
    let mut d_logits = d_pre_out.clone();
    let dq = &d_pre_out * &out.mix.mapv(|t| 1.0 - t * t);
    g.u_d = (&dq * &out.cx_d).sum_axis(Axis(0));
    g.u_c = (&dq * &out.cx_c).sum_axis(Axis(0));
    g.u_s = (&dq * &banks.s_x0).sum_axis(Axis(0));
    let d_cxd = &dq * &model.u_d;
    let d_cxc = &dq * &model.u_c;
    let mut d_sx0 = &dq * &model.u_s;
    let d_bd = d_cxd.dot(&batch.x_d.t());
    let d_gated = d_cxc.dot(&batch.x_c.t());
    let d_bc = gate_backward(&out.b_c, batch.rho, &out.gated_c, &d_gated, batch.mode);
    d_sx0 += &softmax_back(&out.b_d, &d_bd).dot(&batch.x_d);
    d_sx0 += &softmax_back(&out.b_c, &d_bc).dot(&batch.x_c);
    d_logits += &(&d_sx0 * &banks.s_x0.mapv(|p| p * (1.0 - p)));
    g.vae.w_hx += &s_h.t().dot(&d_logits);
    g.vae.b_hx += &d_logits.sum_axis(Axis(0));
    d_sh += &d_logits.dot(&vae.w_hx.t());

    // hidden alignment
    let ha = &banks.hidden;
    let d_p = &d_sh * &ha.s_h.mapv(|t| 1.0 - t * t);
    g.w_dh = ha.c_d.t().dot(&d_p);
    g.w_ch = ha.c_c.t().dot(&d_p);
    g.w_hh = banks.s_h0.t().dot(&d_p);
    let d_cd = d_p.dot(&model.w_dh.t());
    let d_cc = d_p.dot(&model.w_ch.t());
    let mut d_sh0 = d_p.dot(&model.w_hh.t());
    let h_d = &news.enc.h;
    let h_c = &comments.enc.h;
    dh_d += &ha.a_d.t().dot(&d_cd);
    dh_c += &ha.gated_c.t().dot(&d_cc);
    let d_ad = d_cd.dot(&h_d.t());
    let d_gated = d_cc.dot(&h_c.t());
    let d_ac = gate_backward(&ha.a_c, batch.rho, &ha.gated_c, &d_gated, batch.mode);
    let ds_d = softmax_back(&ha.a_d, &d_ad);
    let ds_c = softmax_back(&ha.a_c, &d_ac);
    d_sh0 += &ds_d.dot(h_d);
    d_sh0 += &ds_c.dot(h_c);
    dh_d += &ds_d.t().dot(&banks.s_h0);
    dh_c += &ds_c.t().dot(&banks.s_h0);

    // aspect decoder layer
    let mut d_pre = d_sh0;
    relu_mask(&mut d_pre, &banks.pre_h);
    g.vae.w_zh += &model.s_z.t().dot(&d_pre);
    g.vae.b_zh += &d_pre.sum_axis(Axis(0));
    d_sz += &d_pre.dot(&vae.w_zh.t());
    g.s_z = d_sz;

    // VAE bounds plus the upstream gradients on z and h_enc
    let ones = vec![1.0; news.x.nrows()];
    let rho: Vec<f64> = batch.rho.to_vec();
    let up_d = Upstream {
        dz: Some(dz_d),
        dh: Some(dh_d),
    };
    backward_into(vae, news, &ones, &up_d, &mut g.vae)?;
    let up_c = Upstream {
        dz: Some(dz_c),
        dh: Some(dh_c),
    };
    backward_into(vae, comments, &rho, &up_c, &mut g.vae)?;
    Ok(g)
}

/// Objective value and gradient in one call.
pub fn objective_and_gradient(model: &LatentModel, batch: &Batch) -> Result<(Forward, LatentModel)> {
    let fwd = forward(model, batch)?;
    let grad = backward(model, batch, &fwd)?;
    Ok((fwd, grad))
}
