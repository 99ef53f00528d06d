//! Per-comment-sentence gates ρ ∈ (0,1).
//!
//! A comment sentence that shares more content with the news is considered
//! less noisy. The relation matrix `R = X_d X_cᵀ` is mean-pooled over news
//! sentences (one value per comment sentence) and squashed by a sigmoid.
//! This is done in term space and in latent space and the two are blended
//! with `λ_p`.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::sigmoid;

/// Gates are kept inside `[RHO_MARGIN, 1 - RHO_MARGIN]`.
pub const RHO_MARGIN: f64 = 1e-12;

pub const DEFAULT_LAMBDA_P: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommentWeights {
    pub rho: Array1<f64>,
    pub rho_x: Array1<f64>,
    pub rho_z: Array1<f64>,
    pub lambda_p: f64,
}

impl CommentWeights {
    /// Weights before any latent space exists: `ρ_z := ρ_x`.
    pub fn term_only(rho_x: Array1<f64>, lambda_p: f64) -> Self {
        CommentWeights {
            rho: rho_x.clone(),
            rho_z: rho_x.clone(),
            rho_x,
            lambda_p,
        }
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }
}

fn clamp_gate(v: f64) -> f64 {
    v.clamp(RHO_MARGIN, 1.0 - RHO_MARGIN)
}

/// `R = X_d · X_cᵀ`.
pub fn relation_matrix(x_d: ArrayView2<f64>, x_c: ArrayView2<f64>) -> Result<Array2<f64>> {
    if x_d.ncols() != x_c.ncols() {
        return Err(Error::invalid(format!(
            "relation matrix: {} vs {} columns",
            x_d.ncols(),
            x_c.ncols()
        )));
    }
    Ok(x_d.dot(&x_c.t()))
}

/// Column means of `R` (one per comment sentence) through a sigmoid.
pub fn pool_and_squash(r: &Array2<f64>) -> Array1<f64> {
    let n_d = r.nrows().max(1) as f64;
    r.sum_axis(Axis(0)).mapv(|s| clamp_gate(sigmoid(s / n_d)))
}

/// `ρ = λ_p ρ_z + (1 − λ_p) ρ_x`.
pub fn merge_weights(rho_z: &Array1<f64>, rho_x: &Array1<f64>, lambda_p: f64) -> Result<Array1<f64>> {
    if rho_z.len() != rho_x.len() {
        return Err(Error::invalid("ρ_z and ρ_x lengths differ"));
    }
    if !(0.0..=1.0).contains(&lambda_p) {
        return Err(Error::invalid("λ_p must lie in [0, 1]"));
    }
    Ok(ndarray::Zip::from(rho_z)
        .and(rho_x)
        .map_collect(|&z, &x| clamp_gate(lambda_p * clamp_gate(z) + (1.0 - lambda_p) * clamp_gate(x))))
}

fn unit_rows(m: ArrayView2<f64>) -> Array2<f64> {
    let mut out = m.to_owned();
    for mut row in out.rows_mut() {
        let n = row.dot(&row).sqrt();
        if n > 0.0 {
            row /= n;
        }
    }
    out
}

/// One space's gate vector; `cosine` row-normalizes both inputs first.
pub fn space_weights(a: ArrayView2<f64>, b: ArrayView2<f64>, cosine: bool) -> Result<Array1<f64>> {
    let r = if cosine {
        relation_matrix(unit_rows(a).view(), unit_rows(b).view())?
    } else {
        relation_matrix(a, b)?
    };
    Ok(pool_and_squash(&r))
}

/// Full gate computation from term vectors and deterministic latent codes.
pub fn compute_comment_weights(
    x_d: ArrayView2<f64>,
    x_c: ArrayView2<f64>,
    z_d: ArrayView2<f64>,
    z_c: ArrayView2<f64>,
    lambda_p: f64,
    cosine: bool,
) -> Result<CommentWeights> {
    if x_d.nrows() != z_d.nrows() || x_c.nrows() != z_c.nrows() {
        return Err(Error::invalid("term and latent row counts differ"));
    }
    let rho_x = space_weights(x_d, x_c, cosine)?;
    let rho_z = space_weights(z_d, z_c, cosine)?;
    let rho = merge_weights(&rho_z, &rho_x, lambda_p)?;
    Ok(CommentWeights {
        rho,
        rho_x,
        rho_z,
        lambda_p,
    })
}
