//! Comment-gated attention between aspect vectors and sentence states.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sigmoid, softmax_rows, softmax_rows_backward};

/// How comment attention weights are combined with the gates ρ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlignMode {
    /// `ã = a ⊙ ρ`, rows renormalized to sum to one (all-zero rows stay zero).
    #[default]
    Renormalized,
    /// `ã = a ⊙ ρ` as is.
    Literal,
}

/// Multiplies every row of `a` by `rho` (per column) and renormalizes.
pub fn gate(a: &Array2<f64>, rho: ArrayView1<f64>, mode: AlignMode) -> Array2<f64> {
    let mut out = a * &rho;
    if mode == AlignMode::Renormalized {
        for mut row in out.rows_mut() {
            let s = row.sum();
            if s > 0.0 {
                row /= s;
            } else {
                row.fill(0.0);
            }
        }
    }
    out
}

/// Gradient of [`gate`] with respect to `a`.
pub fn gate_backward(
    a: &Array2<f64>,
    rho: ArrayView1<f64>,
    gated: &Array2<f64>,
    d_gated: &Array2<f64>,
    mode: AlignMode,
) -> Array2<f64> {
    match mode {
        AlignMode::Literal => d_gated * &rho,
        AlignMode::Renormalized => {
            let mut d_a = Array2::zeros(a.dim());
            for i in 0..a.nrows() {
                let s: f64 = a.row(i).iter().zip(rho).map(|(x, r)| x * r).sum();
                if s <= 0.0 {
                    continue;
                }
                let dot = d_gated.row(i).dot(&gated.row(i));
                for j in 0..a.ncols() {
                    d_a[[i, j]] = (d_gated[[i, j]] - dot) / s * rho[j];
                }
            }
            d_a
        }
    }
}

/// Hidden-space alignment of all aspects at once.
#[derive(Debug, Clone)]
pub struct HiddenAlign {
    pub a_d: Array2<f64>,
    pub a_c: Array2<f64>,
    pub gated_c: Array2<f64>,
    pub c_d: Array2<f64>,
    pub c_c: Array2<f64>,
    /// `s̃_h = tanh(c_d W_dh + c_c W_ch + s_h W_hh)`.
    pub s_h: Array2<f64>,
}

pub fn align_hidden(
    s_h: ArrayView2<f64>,
    h_d: ArrayView2<f64>,
    h_c: ArrayView2<f64>,
    rho: ArrayView1<f64>,
    w: (&Array2<f64>, &Array2<f64>, &Array2<f64>),
    mode: AlignMode,
) -> Result<HiddenAlign> {
    if h_d.nrows() == 0 {
        return Err(Error::invalid("alignment needs at least one news sentence"));
    }
    if h_c.nrows() != rho.len() {
        return Err(Error::invalid("one gate per comment sentence required"));
    }
    let (w_dh, w_ch, w_hh) = w;
    let a_d = softmax_rows(&s_h.dot(&h_d.t()));
    let a_c = softmax_rows(&s_h.dot(&h_c.t()));
    let gated_c = gate(&a_c, rho, mode);
    let c_d = a_d.dot(&h_d);
    let c_c = gated_c.dot(&h_c);
    let pre = c_d.dot(w_dh) + c_c.dot(w_ch) + s_h.dot(w_hh);
    Ok(HiddenAlign {
        a_d,
        a_c,
        gated_c,
        c_d,
        c_c,
        s_h: pre.mapv(f64::tanh),
    })
}

/// Term-space alignment of all aspects at once.
#[derive(Debug, Clone)]
pub struct OutputAlign {
    pub b_d: Array2<f64>,
    pub b_c: Array2<f64>,
    pub gated_c: Array2<f64>,
    pub cx_d: Array2<f64>,
    pub cx_c: Array2<f64>,
    /// `tanh(u_d ⊙ cx_d + u_c ⊙ cx_c + u_s ⊙ s_x)`.
    pub mix: Array2<f64>,
    /// `sigmoid(logit(s_x) + mix)`.
    pub s_x: Array2<f64>,
}

/// Output-layer weights (diagonal: one scale per vocabulary term).
pub type OutputWeights<'a> = (&'a Array1<f64>, &'a Array1<f64>, &'a Array1<f64>);

/// `logits` are the pre-sigmoid values of `s_x`.
pub fn align_output(
    logits: &Array2<f64>,
    s_x: &Array2<f64>,
    x_d: ArrayView2<f64>,
    x_c: ArrayView2<f64>,
    rho: ArrayView1<f64>,
    u: OutputWeights,
    mode: AlignMode,
) -> Result<OutputAlign> {
    if x_d.nrows() == 0 {
        return Err(Error::invalid("alignment needs at least one news sentence"));
    }
    if x_c.nrows() != rho.len() {
        return Err(Error::invalid("one gate per comment sentence required"));
    }
    let (u_d, u_c, u_s) = u;
    let b_d = softmax_rows(&s_x.dot(&x_d.t()));
    let b_c = softmax_rows(&s_x.dot(&x_c.t()));
    let gated_c = gate(&b_c, rho, mode);
    let cx_d = b_d.dot(&x_d);
    let cx_c = gated_c.dot(&x_c);
    let pre = &cx_d * u_d + &cx_c * u_c + s_x * u_s;
    let mix = pre.mapv(f64::tanh);
    let s_x = (logits + &mix).mapv(sigmoid);
    Ok(OutputAlign {
        b_d,
        b_c,
        gated_c,
        cx_d,
        cx_c,
        mix,
        s_x,
    })
}

/// Single-aspect form of [`align_hidden`]: returns `(c_d, c_c, s̃_h)`.
pub fn align(
    s_h: ArrayView1<f64>,
    h_d: ArrayView2<f64>,
    h_c: ArrayView2<f64>,
    rho: ArrayView1<f64>,
    w: (&Array2<f64>, &Array2<f64>, &Array2<f64>),
    mode: AlignMode,
) -> Result<(Array1<f64>, Array1<f64>, Array1<f64>)> {
    let r = align_hidden(s_h.insert_axis(Axis(0)), h_d, h_c, rho, w, mode)?;
    Ok((
        r.c_d.row(0).to_owned(),
        r.c_c.row(0).to_owned(),
        r.s_h.row(0).to_owned(),
    ))
}

/// Single-aspect form of [`align_output`] taking the probabilities only.
pub fn output_align(
    s_x: ArrayView1<f64>,
    x_d: ArrayView2<f64>,
    x_c: ArrayView2<f64>,
    rho: ArrayView1<f64>,
    u: OutputWeights,
    mode: AlignMode,
) -> Result<Array1<f64>> {
    let s = s_x.insert_axis(Axis(0)).to_owned();
    let logits = s.mapv(|p| (p / (1.0 - p)).ln());
    let r = align_output(&logits, &s, x_d, x_c, rho, u, mode)?;
    Ok(r.s_x.row(0).to_owned())
}

pub(crate) fn softmax_back(p: &Array2<f64>, dp: &Array2<f64>) -> Array2<f64> {
    if p.is_empty() {
        return p.clone();
    }
    softmax_rows_backward(p, dp)
}
