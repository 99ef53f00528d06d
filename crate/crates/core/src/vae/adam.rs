use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A set of named dense parameter blocks.
///
/// Every block is a contiguous `f64` slice; gradients share the type of
/// the parameters they belong to, so the two lists always line up.
pub trait Parameters {
    fn block_names(&self) -> Vec<&'static str>;
    fn blocks(&self) -> Vec<&[f64]>;
    fn blocks_mut(&mut self) -> Vec<&mut [f64]>;

    fn num_params(&self) -> usize {
        self.blocks().iter().map(|b| b.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub step: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
}

pub const DEFAULT_LEARNING_RATE: f64 = 0.001;

impl AdamState {
    /// Zero moments shaped like `params`, with β1=0.9, β2=0.999, ε=1e-8.
    pub fn new<P: Parameters + ?Sized>(params: &P, learning_rate: f64) -> Self {
        let zeros: Vec<Vec<f64>> = params.blocks().iter().map(|b| vec![0.0; b.len()]).collect();
        AdamState {
            step: 0,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            first: zeros.clone(),
            second: zeros,
        }
    }

    fn matches<P: Parameters + ?Sized>(&self, params: &P) -> bool {
        let blocks = params.blocks();
        blocks.len() == self.first.len()
            && blocks.iter().zip(&self.first).all(|(b, m)| b.len() == m.len())
    }
}

/// One bias-corrected Adam update of `params` along `grads`.
pub fn adam_step<P: Parameters + ?Sized>(
    params: &mut P,
    grads: &P,
    state: &mut AdamState,
) -> Result<()> {
    if !state.matches(params) || !state.matches(grads) {
        return Err(Error::invalid("Adam state does not match parameter shapes"));
    }
    for (name, g) in grads.block_names().iter().zip(grads.blocks()) {
        if !g.iter().all(|v| v.is_finite()) {
            return Err(Error::numeric(format!("non-finite gradient in {name}")));
        }
    }
    state.step += 1;
    let t = state.step as i32;
    let (b1, b2) = (state.beta1, state.beta2);
    let c1 = 1.0 - b1.powi(t);
    let c2 = 1.0 - b2.powi(t);
    let lr = state.learning_rate;
    let eps = state.epsilon;
    for (((p, g), m), v) in params
        .blocks_mut()
        .into_iter()
        .zip(grads.blocks())
        .zip(state.first.iter_mut())
        .zip(state.second.iter_mut())
    {
        for i in 0..p.len() {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}
