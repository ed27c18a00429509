use serde::{Deserialize, Serialize};

use super::{GradStore, NnError, ParamStore, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdamConfig {
    pub learning_rate: f32,
    pub beta1: f32,
    pub beta2: f32,
    pub epsilon: f32,
    /// Global gradient-norm ceiling; `None` disables clipping.
    pub clip_norm: Option<f32>,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { learning_rate: 1e-3, beta1: 0.9, beta2: 0.999, epsilon: 1e-8, clip_norm: Some(5.0) }
    }
}

#[derive(Debug, Clone)]
pub struct AdamState {
    pub config: AdamConfig,
    m: Vec<Tensor>,
    v: Vec<Tensor>,
    step: u64,
}

/// Rescales `grads` in place so its global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
pub fn clip_global_norm(grads: &mut GradStore, max_norm: f32) -> f32 {
    let norm = grads.global_norm();
    if norm > max_norm && norm > 0.0 {
        grads.scale(max_norm / norm);
    }
    norm
}

impl AdamState {
    pub fn new(store: &ParamStore, config: AdamConfig) -> Self {
        let zeros = || store.iter().map(|(_, t)| Tensor::zeros(t.shape())).collect();
        AdamState { config, m: zeros(), v: zeros(), step: 0 }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// Clips, then applies one bias-corrected Adam update. Returns the pre-clip norm.
    /// A non-finite gradient leaves the parameters untouched.
    pub fn step(&mut self, store: &mut ParamStore, grads: &mut GradStore) -> Result<f32, NnError> {
        if grads.tensors().len() != self.m.len() {
            return Err(NnError::shape(&[self.m.len()], &[grads.tensors().len()]));
        }
        for (g, m) in grads.tensors().iter().zip(&self.m) {
            if g.shape() != m.shape() {
                return Err(NnError::shape(m.shape(), g.shape()));
            }
        }
        let norm = match self.config.clip_norm {
            Some(c) => clip_global_norm(grads, c),
            None => grads.global_norm(),
        };
        if !norm.is_finite() {
            return Err(NnError::NonFinite("gradient norm".into()));
        }
        self.step += 1;
        let AdamConfig { learning_rate, beta1, beta2, epsilon, .. } = self.config;
        let bc1 = 1.0 - f64::from(beta1).powi(self.step as i32);
        let bc2 = 1.0 - f64::from(beta2).powi(self.step as i32);
        let step_size = (f64::from(learning_rate) / bc1) as f32;
        let inv_bc2 = (1.0 / bc2) as f32;
        for (((p, g), m), v) in store
            .tensors_mut()
            .iter_mut()
            .zip(grads.tensors())
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            for (((pi, &gi), mi), vi) in p
                .data_mut()
                .iter_mut()
                .zip(g.data())
                .zip(m.data_mut())
                .zip(v.data_mut())
            {
                *mi = beta1 * *mi + (1.0 - beta1) * gi;
                *vi = beta2 * *vi + (1.0 - beta2) * gi * gi;
                *pi -= step_size * *mi / ((*vi * inv_bc2).sqrt() + epsilon);
            }
        }
        Ok(norm)
    }
}
