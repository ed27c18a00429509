//! LSTM cell, unrolled single-direction LSTM and the bidirectional wrapper.
//!
//! Gate order inside every `4H` block is input, forget, cell candidate,
//! output. Input weights are stored `[D, 4H]` and recurrent weights
//! `[H, 4H]` so the forward pass accumulates rows.

use rand::Rng;

use super::kernels::{add_into, matvec_acc, outer_acc, sigmoid, vecmat_acc};
use super::{check_finite, GradStore, NnError, ParamId, ParamStore, Tensor};

#[derive(Debug, Clone, Copy)]
pub struct LstmCell {
    pub w: ParamId,
    pub u: ParamId,
    pub b: ParamId,
    pub input_dim: usize,
    pub hidden_dim: usize,
}

/// Everything one step needs for its backward pass.
#[derive(Debug, Clone)]
pub struct LstmStepCache {
    x: Vec<f32>,
    h_prev: Vec<f32>,
    c_prev: Vec<f32>,
    gates: Vec<f32>,
    tanh_c: Vec<f32>,
}

impl LstmCell {
    pub fn new<R: Rng + ?Sized>(store: &mut ParamStore, name: &str, input_dim: usize, hidden_dim: usize, rng: &mut R) -> Self {
        let h4 = 4 * hidden_dim;
        let w = store.add_glorot(format!("{name}.w"), input_dim, h4, rng);
        let u = store.add_glorot(format!("{name}.u"), hidden_dim, h4, rng);
        let mut bias = Tensor::zeros(&[h4]);
        bias.data_mut()[hidden_dim..2 * hidden_dim].fill(1.0);
        let b = store.add(format!("{name}.b"), bias);
        LstmCell { w, u, b, input_dim, hidden_dim }
    }

    /// One gated update. Returns `(h', c')` and the activation cache.
    pub fn step(&self, store: &ParamStore, x: &[f32], h: &[f32], c: &[f32]) -> Result<(Vec<f32>, Vec<f32>, LstmStepCache), NnError> {
        let hd = self.hidden_dim;
        if x.len() != self.input_dim {
            return Err(NnError::shape(&[self.input_dim], &[x.len()]));
        }
        if h.len() != hd || c.len() != hd {
            return Err(NnError::shape(&[hd, hd], &[h.len(), c.len()]));
        }
        let mut gates = vec![0.0; 4 * hd];
        let mut h_new = vec![0.0; hd];
        let mut c_new = vec![0.0; hd];
        let mut tanh_c = vec![0.0; hd];
        self.forward_into(store, x, h, c, &mut gates, &mut h_new, &mut c_new, &mut tanh_c);
        let cache = LstmStepCache { x: x.to_vec(), h_prev: h.to_vec(), c_prev: c.to_vec(), gates, tanh_c };
        Ok((h_new, c_new, cache))
    }

    /// Backward through one step given upstream `dh'` and `dc'`.
    /// Returns `(dx, dh, dc)` for the step inputs.
    pub fn step_backward(
        &self,
        store: &ParamStore,
        grads: &mut GradStore,
        cache: &LstmStepCache,
        dh: &[f32],
        dc: &[f32],
    ) -> (Vec<f32>, Vec<f32>, Vec<f32>) {
        let hd = self.hidden_dim;
        let mut dx = vec![0.0; self.input_dim];
        let mut dh_prev = vec![0.0; hd];
        let mut dc_prev = dc.to_vec();
        let mut dgates = vec![0.0; 4 * hd];
        self.backward_into(
            store,
            grads,
            &cache.x,
            &cache.h_prev,
            &cache.c_prev,
            &cache.gates,
            &cache.tanh_c,
            dh,
            &mut dc_prev,
            &mut dgates,
            &mut dx,
            &mut dh_prev,
        );
        (dx, dh_prev, dc_prev)
    }

    #[allow(clippy::too_many_arguments)]
    fn forward_into(
        &self,
        store: &ParamStore,
        x: &[f32],
        h: &[f32],
        c: &[f32],
        gates: &mut [f32],
        h_new: &mut [f32],
        c_new: &mut [f32],
        tanh_c: &mut [f32],
    ) {
        let hd = self.hidden_dim;
        gates.copy_from_slice(store.get(self.b).data());
        vecmat_acc(x, store.get(self.w).data(), gates);
        vecmat_acc(h, store.get(self.u).data(), gates);
        let (ig, rest) = gates.split_at_mut(hd);
        let (fg, rest) = rest.split_at_mut(hd);
        let (gg, og) = rest.split_at_mut(hd);
        for k in 0..hd {
            ig[k] = sigmoid(ig[k]);
            fg[k] = sigmoid(fg[k]);
            gg[k] = gg[k].tanh();
            og[k] = sigmoid(og[k]);
            c_new[k] = fg[k] * c[k] + ig[k] * gg[k];
            tanh_c[k] = c_new[k].tanh();
            h_new[k] = og[k] * tanh_c[k];
        }
        check_finite(c_new);
    }

    /// `dc` carries the upstream cell gradient in and the `c_prev` gradient out.
    #[allow(clippy::too_many_arguments)]
    fn backward_into(
        &self,
        store: &ParamStore,
        grads: &mut GradStore,
        x: &[f32],
        h_prev: &[f32],
        c_prev: &[f32],
        gates: &[f32],
        tanh_c: &[f32],
        dh: &[f32],
        dc: &mut [f32],
        dgates: &mut [f32],
        dx: &mut [f32],
        dh_prev: &mut [f32],
    ) {
        let hd = self.hidden_dim;
        let (ig, rest) = gates.split_at(hd);
        let (fg, rest) = rest.split_at(hd);
        let (gg, og) = rest.split_at(hd);
        for k in 0..hd {
            let t = tanh_c[k];
            let d_o = dh[k] * t;
            let dct = dc[k] + dh[k] * og[k] * (1.0 - t * t);
            let d_i = dct * gg[k];
            let d_g = dct * ig[k];
            let d_f = dct * c_prev[k];
            dc[k] = dct * fg[k];
            dgates[k] = d_i * ig[k] * (1.0 - ig[k]);
            dgates[hd + k] = d_f * fg[k] * (1.0 - fg[k]);
            dgates[2 * hd + k] = d_g * (1.0 - gg[k] * gg[k]);
            dgates[3 * hd + k] = d_o * og[k] * (1.0 - og[k]);
        }
        outer_acc(x, dgates, grads.get_mut(self.w).data_mut());
        outer_acc(h_prev, dgates, grads.get_mut(self.u).data_mut());
        add_into(dgates, grads.get_mut(self.b).data_mut());
        matvec_acc(store.get(self.w).data(), dgates, dx);
        matvec_acc(store.get(self.u).data(), dgates, dh_prev);
    }

    /// Runs the cell over `seq` (`[T, D]`) from zero state, optionally in
    /// reverse time order. Output row `t` is the state after reading input `t`.
    pub fn run(&self, store: &ParamStore, seq: &Tensor, reverse: bool) -> Result<LstmRun, NnError> {
        let t_len = seq.rows();
        if t_len == 0 || seq.is_empty() {
            return Err(NnError::EmptySequence);
        }
        if seq.cols() != self.input_dim {
            return Err(NnError::shape(&[t_len, self.input_dim], seq.shape()));
        }
        let hd = self.hidden_dim;
        let mut hs = Tensor::zeros(&[t_len, hd]);
        let mut cs = Tensor::zeros(&[t_len, hd]);
        let mut gates = Tensor::zeros(&[t_len, 4 * hd]);
        let mut tanh_c = Tensor::zeros(&[t_len, hd]);
        let zeros = vec![0.0; hd];
        let mut prev: Option<usize> = None;
        for step in 0..t_len {
            let t = if reverse { t_len - 1 - step } else { step };
            let (h_prev, c_prev) = match prev {
                Some(p) => (hs.row(p).to_vec(), cs.row(p).to_vec()),
                None => (zeros.clone(), zeros.clone()),
            };
            let mut h_new = vec![0.0; hd];
            let mut c_new = vec![0.0; hd];
            self.forward_into(store, seq.row(t), &h_prev, &c_prev, gates.row_mut(t), &mut h_new, &mut c_new, tanh_c.row_mut(t));
            hs.row_mut(t).copy_from_slice(&h_new);
            cs.row_mut(t).copy_from_slice(&c_new);
            prev = Some(t);
        }
        Ok(LstmRun { reverse, hs, cs, gates, tanh_c })
    }

    /// Backpropagates `d_outputs` (`[T, H]`) through a previous [`run`](Self::run).
    pub fn run_backward(&self, store: &ParamStore, grads: &mut GradStore, seq: &Tensor, run: &LstmRun, d_outputs: &Tensor) -> Tensor {
        let t_len = seq.rows();
        let hd = self.hidden_dim;
        let mut dseq = Tensor::zeros(&[t_len, self.input_dim]);
        let mut dh_next = vec![0.0; hd];
        let mut dc = vec![0.0; hd];
        let mut dgates = vec![0.0; 4 * hd];
        let zeros = vec![0.0; hd];
        for step in (0..t_len).rev() {
            let t = if run.reverse { t_len - 1 - step } else { step };
            let prev = if step == 0 {
                None
            } else if run.reverse {
                Some(t + 1)
            } else {
                Some(t - 1)
            };
            let (h_prev, c_prev) = match prev {
                Some(p) => (run.hs.row(p), run.cs.row(p)),
                None => (zeros.as_slice(), zeros.as_slice()),
            };
            let mut dh = d_outputs.row(t).to_vec();
            add_into(&dh_next, &mut dh);
            let mut dh_prev = vec![0.0; hd];
            self.backward_into(
                store,
                grads,
                seq.row(t),
                h_prev,
                c_prev,
                run.gates.row(t),
                run.tanh_c.row(t),
                &dh,
                &mut dc,
                &mut dgates,
                dseq.row_mut(t),
                &mut dh_prev,
            );
            dh_next = dh_prev;
        }
        dseq
    }
}

/// Activations of one unrolled direction.
#[derive(Debug, Clone)]
pub struct LstmRun {
    reverse: bool,
    hs: Tensor,
    cs: Tensor,
    gates: Tensor,
    tanh_c: Tensor,
}

impl LstmRun {
    pub fn outputs(&self) -> &Tensor {
        &self.hs
    }
}

/// Forward and backward LSTMs over the same sequence.
#[derive(Debug, Clone, Copy)]
pub struct BiLstm {
    pub fwd: LstmCell,
    pub bwd: LstmCell,
}

#[derive(Debug, Clone)]
pub struct BiLstmCache {
    fwd: LstmRun,
    bwd: LstmRun,
}

impl BiLstm {
    pub fn new<R: Rng + ?Sized>(store: &mut ParamStore, name: &str, input_dim: usize, hidden_dim: usize, rng: &mut R) -> Self {
        BiLstm {
            fwd: LstmCell::new(store, &format!("{name}.fwd"), input_dim, hidden_dim, rng),
            bwd: LstmCell::new(store, &format!("{name}.bwd"), input_dim, hidden_dim, rng),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.fwd.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.fwd.hidden_dim + self.bwd.hidden_dim
    }

    /// Output row `t` is `[forward state at t; backward state at t]`.
    pub fn forward(&self, store: &ParamStore, seq: &Tensor) -> Result<(Tensor, BiLstmCache), NnError> {
        let fwd = self.fwd.run(store, seq, false)?;
        let bwd = self.bwd.run(store, seq, true)?;
        let t_len = seq.rows();
        let mut out = Tensor::zeros(&[t_len, self.output_dim()]);
        let hf = self.fwd.hidden_dim;
        for t in 0..t_len {
            let row = out.row_mut(t);
            row[..hf].copy_from_slice(fwd.hs.row(t));
            row[hf..].copy_from_slice(bwd.hs.row(t));
        }
        Ok((out, BiLstmCache { fwd, bwd }))
    }

    pub fn backward(&self, store: &ParamStore, grads: &mut GradStore, seq: &Tensor, cache: &BiLstmCache, d_out: &Tensor) -> Tensor {
        let t_len = seq.rows();
        let hf = self.fwd.hidden_dim;
        let mut d_fwd = Tensor::zeros(&[t_len, hf]);
        let mut d_bwd = Tensor::zeros(&[t_len, self.bwd.hidden_dim]);
        for t in 0..t_len {
            let row = d_out.row(t);
            d_fwd.row_mut(t).copy_from_slice(&row[..hf]);
            d_bwd.row_mut(t).copy_from_slice(&row[hf..]);
        }
        let mut dseq = self.fwd.run_backward(store, grads, seq, &cache.fwd, &d_fwd);
        let d2 = self.bwd.run_backward(store, grads, seq, &cache.bwd, &d_bwd);
        add_into(d2.data(), dseq.data_mut());
        dseq
    }
}
