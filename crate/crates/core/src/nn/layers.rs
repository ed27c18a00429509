use rand::Rng;

use super::kernels::{axpy, matvec_acc, outer_acc, vecmat_acc};
use super::{check_finite, GradStore, NnError, ParamId, ParamStore, Tensor};

/// Affine map `y = x W + b` with `W` stored `[in, out]`.
#[derive(Debug, Clone, Copy)]
pub struct Linear {
    pub w: ParamId,
    pub b: ParamId,
    pub input_dim: usize,
    pub output_dim: usize,
}

impl Linear {
    pub fn new<R: Rng + ?Sized>(store: &mut ParamStore, name: &str, input_dim: usize, output_dim: usize, rng: &mut R) -> Self {
        let w = store.add_glorot(format!("{name}.w"), input_dim, output_dim, rng);
        let b = store.add(format!("{name}.b"), Tensor::zeros(&[output_dim]));
        Linear { w, b, input_dim, output_dim }
    }

    pub fn forward(&self, store: &ParamStore, x: &[f32]) -> Result<Vec<f32>, NnError> {
        if x.len() != self.input_dim {
            return Err(NnError::shape(&[self.input_dim], &[x.len()]));
        }
        let mut y = store.get(self.b).data().to_vec();
        vecmat_acc(x, store.get(self.w).data(), &mut y);
        check_finite(&y);
        Ok(y)
    }

    /// Accumulates parameter gradients and returns `dL/dx`.
    pub fn backward(&self, store: &ParamStore, grads: &mut GradStore, x: &[f32], dy: &[f32]) -> Vec<f32> {
        debug_assert_eq!(dy.len(), self.output_dim);
        outer_acc(x, dy, grads.get_mut(self.w).data_mut());
        super::kernels::add_into(dy, grads.get_mut(self.b).data_mut());
        let mut dx = vec![0.0; self.input_dim];
        matvec_acc(store.get(self.w).data(), dy, &mut dx);
        dx
    }
}

/// Lookup table of shape `[vocab, dim]`.
#[derive(Debug, Clone, Copy)]
pub struct Embedding {
    pub table: ParamId,
    pub vocab_size: usize,
    pub dim: usize,
}

impl Embedding {
    pub fn new<R: Rng + ?Sized>(store: &mut ParamStore, name: &str, vocab_size: usize, dim: usize, rng: &mut R) -> Self {
        let table = store.add_uniform(format!("{name}.table"), &[vocab_size, dim], 0.1, rng);
        Embedding { table, vocab_size, dim }
    }

    pub fn lookup<'a>(&self, store: &'a ParamStore, id: usize) -> Result<&'a [f32], NnError> {
        if id >= self.vocab_size {
            return Err(NnError::BadIndex { index: id, len: self.vocab_size });
        }
        Ok(store.get(self.table).row(id))
    }

    pub fn backward(&self, grads: &mut GradStore, id: usize, dy: &[f32]) {
        axpy(1.0, dy, grads.get_mut(self.table).row_mut(id));
    }
}

pub fn relu(x: &[f32]) -> Vec<f32> {
    x.iter().map(|&v| v.max(0.0)).collect()
}

/// Gradient through ReLU given the pre-activation; the subgradient at 0 is 0.
pub fn relu_backward(pre: &[f32], dy: &[f32]) -> Vec<f32> {
    pre.iter().zip(dy).map(|(&p, &d)| if p > 0.0 { d } else { 0.0 }).collect()
}

pub fn concat(a: &[f32], b: &[f32]) -> Vec<f32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    out.extend_from_slice(a);
    out.extend_from_slice(b);
    out
}

/// Arithmetic mean over the rows of a `[T, K]` sequence.
pub fn mean_pool(seq: &Tensor) -> Result<Vec<f32>, NnError> {
    let t = seq.rows();
    if seq.is_empty() || t == 0 {
        return Err(NnError::EmptySequence);
    }
    let mut out = vec![0.0; seq.cols()];
    for i in 0..t {
        super::kernels::add_into(seq.row(i), &mut out);
    }
    let inv = 1.0 / t as f32;
    out.iter_mut().for_each(|v| *v *= inv);
    Ok(out)
}

pub fn mean_pool_backward(rows: usize, dy: &[f32]) -> Tensor {
    let inv = 1.0 / rows as f32;
    let row: Vec<f32> = dy.iter().map(|v| v * inv).collect();
    let mut out = Tensor::zeros(&[rows, dy.len()]);
    for i in 0..rows {
        out.row_mut(i).copy_from_slice(&row);
    }
    out
}

/// Hidden ReLU layers followed by a linear output projection.
#[derive(Debug, Clone)]
pub struct FeedForward {
    pub hidden: Vec<Linear>,
    pub output: Linear,
}

/// Activations retained for [`FeedForward::backward`].
#[derive(Debug, Clone)]
pub struct FeedForwardCache {
    inputs: Vec<Vec<f32>>,
    pre: Vec<Vec<f32>>,
}

impl FeedForward {
    pub fn new<R: Rng + ?Sized>(
        store: &mut ParamStore,
        name: &str,
        input_dim: usize,
        hidden_dims: &[usize],
        output_dim: usize,
        rng: &mut R,
    ) -> Self {
        let mut hidden = Vec::new();
        let mut d = input_dim;
        for (i, &h) in hidden_dims.iter().enumerate() {
            hidden.push(Linear::new(store, &format!("{name}.hidden{i}"), d, h, rng));
            d = h;
        }
        let output = Linear::new(store, &format!("{name}.out"), d, output_dim, rng);
        FeedForward { hidden, output }
    }

    pub fn forward(&self, store: &ParamStore, x: &[f32]) -> Result<(Vec<f32>, FeedForwardCache), NnError> {
        let mut inputs = Vec::with_capacity(self.hidden.len() + 1);
        let mut pre = Vec::with_capacity(self.hidden.len());
        let mut h = x.to_vec();
        for layer in &self.hidden {
            let z = layer.forward(store, &h)?;
            let a = relu(&z);
            inputs.push(std::mem::replace(&mut h, a));
            pre.push(z);
        }
        let logits = self.output.forward(store, &h)?;
        inputs.push(h);
        Ok((logits, FeedForwardCache { inputs, pre }))
    }

    pub fn backward(&self, store: &ParamStore, grads: &mut GradStore, cache: &FeedForwardCache, dlogits: &[f32]) -> Vec<f32> {
        let n = self.hidden.len();
        let mut d = self.output.backward(store, grads, &cache.inputs[n], dlogits);
        for i in (0..n).rev() {
            let dz = relu_backward(&cache.pre[i], &d);
            d = self.hidden[i].backward(store, grads, &cache.inputs[i], &dz);
        }
        d
    }
}
