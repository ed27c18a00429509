//! Small neural kernel library with explicit per-layer backward passes.
//!
//! Parameters live in a [`ParamStore`]; layers only keep [`ParamId`]s. A
//! forward pass borrows the store immutably and returns an activation cache,
//! and the matching backward pass accumulates into a [`GradStore`]. Keeping
//! gradients outside the model lets several examples be differentiated
//! concurrently against one frozen parameter set.

mod adam;
mod gradcheck;
pub mod kernels;
mod layers;
mod loss;
mod lstm;
mod params;
mod tensor;

pub use adam::{clip_global_norm, AdamConfig, AdamState};
pub use gradcheck::{grad_check, relative_error, Coordinates, GradCheckReport, KINK_TOLERANCE, RELATIVE_FLOOR};
pub use layers::{
    concat, mean_pool, mean_pool_backward, relu, relu_backward, Embedding, FeedForward,
    FeedForwardCache, Linear,
};
pub use loss::{argmax, softmax, softmax_cross_entropy, CrossEntropy};
pub use lstm::{BiLstm, BiLstmCache, LstmCell, LstmRun, LstmStepCache};
pub use params::{GradStore, ParamId, ParamStore};
pub use tensor::Tensor;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NnError {
    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch { expected: Vec<usize>, got: Vec<usize> },
    #[error("empty sequence")]
    EmptySequence,
    #[error("index {index} out of range for length {len}")]
    BadIndex { index: usize, len: usize },
    #[error("parameter set mismatch: {0}")]
    ParamMismatch(String),
    #[error("non-finite {0}")]
    NonFinite(String),
}

impl NnError {
    pub(crate) fn shape(expected: &[usize], got: &[usize]) -> Self {
        NnError::ShapeMismatch { expected: expected.to_vec(), got: got.to_vec() }
    }
}

/// Debug-build guard for the no-NaN/Inf post-condition.
#[inline]
pub(crate) fn check_finite(values: &[f32]) {
    debug_assert!(values.iter().all(|v| v.is_finite()), "non-finite activation");
}
