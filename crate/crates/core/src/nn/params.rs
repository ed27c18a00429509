use rand::Rng;

use super::{NnError, Tensor};

/// Index of a tensor inside a [`ParamStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParamId(pub(crate) usize);

impl ParamId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Named trainable tensors of one model. Layers hold [`ParamId`]s into it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamStore {
    names: Vec<String>,
    tensors: Vec<Tensor>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, tensor: Tensor) -> ParamId {
        let name = name.into();
        assert!(!self.names.contains(&name), "duplicate parameter name {name}");
        self.names.push(name);
        self.tensors.push(tensor);
        ParamId(self.tensors.len() - 1)
    }

    /// Glorot-uniform matrix of shape `[fan_in, fan_out]`.
    pub fn add_glorot<R: Rng + ?Sized>(
        &mut self,
        name: impl Into<String>,
        fan_in: usize,
        fan_out: usize,
        rng: &mut R,
    ) -> ParamId {
        let r = (6.0 / (fan_in + fan_out) as f64).sqrt() as f32;
        self.add_uniform(name, &[fan_in, fan_out], r, rng)
    }

    pub fn add_uniform<R: Rng + ?Sized>(
        &mut self,
        name: impl Into<String>,
        shape: &[usize],
        range: f32,
        rng: &mut R,
    ) -> ParamId {
        let n = shape.iter().product();
        let data = (0..n).map(|_| rng.gen_range(-range..=range)).collect();
        self.add(name, Tensor::from_vec(shape, data).unwrap())
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.tensors[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.tensors[id.0]
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.names.iter().position(|n| n == name).map(ParamId)
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.tensors.len()).map(ParamId)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.names.iter().map(String::as_str).zip(&self.tensors)
    }

    pub fn tensors_mut(&mut self) -> &mut [Tensor] {
        &mut self.tensors
    }

    pub fn num_scalars(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }

    pub fn zero_grads(&self) -> GradStore {
        GradStore { tensors: self.tensors.iter().map(|t| Tensor::zeros(t.shape())).collect() }
    }

    /// Replaces every tensor with the same-named one from `other`, all or nothing.
    pub fn assign_from(&mut self, other: &ParamStore) -> Result<(), NnError> {
        if other.names != self.names {
            return Err(NnError::ParamMismatch(format!(
                "expected {} named tensors, got {}",
                self.names.len(),
                other.names.len()
            )));
        }
        for (name, (mine, theirs)) in self.names.iter().zip(self.tensors.iter().zip(&other.tensors)) {
            if mine.shape() != theirs.shape() {
                return Err(NnError::ParamMismatch(format!(
                    "{name}: expected shape {:?}, got {:?}",
                    mine.shape(),
                    theirs.shape()
                )));
            }
        }
        self.tensors.clone_from(&other.tensors);
        Ok(())
    }
}

/// Gradient buffers mirroring a [`ParamStore`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradStore {
    tensors: Vec<Tensor>,
}

impl GradStore {
    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.tensors[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.tensors[id.0]
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Tensor] {
        &mut self.tensors
    }

    pub fn zero(&mut self) {
        self.tensors.iter_mut().for_each(|t| t.fill(0.0));
    }

    pub fn add_assign(&mut self, other: &GradStore) {
        for (a, b) in self.tensors.iter_mut().zip(&other.tensors) {
            super::kernels::add_into(b.data(), a.data_mut());
        }
    }

    pub fn scale(&mut self, s: f32) {
        for t in &mut self.tensors {
            t.data_mut().iter_mut().for_each(|v| *v *= s);
        }
    }

    pub fn global_norm(&self) -> f32 {
        self.tensors.iter().map(Tensor::sum_squares).sum::<f64>().sqrt() as f32
    }
}
