//! Finite-difference checks of every explicit backward pass, and
//! subsampled checks of both full models.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempo_core::dataset::{generate_event_corpus, generate_timex_pairs, SyntheticEventCorpusConfig};
use tempo_core::event_model::{EventModel, EventModelConfig, TimexMode};
use tempo_core::nn::*;
use tempo_core::timex_model::{TimexModel, TimexModelConfig};

pub const EPS: f32 = 1e-3;
pub const LAYER_TOL: f64 = 1e-3;
pub const MODEL_TOL: f64 = 5e-3;
pub const MODEL_COORDS: usize = 300;

fn random_vec(rng: &mut ChaCha8Rng, n: usize, scale: f32) -> Vec<f32> {
    (0..n).map(|_| rng.gen_range(-scale..scale)).collect()
}

/// Scalar probe `sum_i r_i y_i` accumulated in f64.
fn project(y: &[f32], r: &[f32]) -> f64 {
    y.iter().zip(r).map(|(a, b)| f64::from(*a) * f64::from(*b)).sum()
}

pub fn linear_check() -> Vec<(String, GradCheckReport)> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut store = ParamStore::new();
    let layer = Linear::new(&mut store, "lin", 5, 4, &mut rng);
    let x = store.add("x", Tensor::from_vec(&[5], random_vec(&mut rng, 5, 1.0)).unwrap());
    let r = random_vec(&mut rng, 4, 1.0);
    let report = grad_check(
        &mut store,
        |s, g| {
            let xv = s.get(x).data().to_vec();
            let y = layer.forward(s, &xv).unwrap();
            if let Some(g) = g {
                let dx = layer.backward(s, g, &xv, &r);
                kernels::add_into(&dx, g.get_mut(x).data_mut());
            }
            project(&y, &r)
        },
        EPS,
        Coordinates::All,
    );
    vec![("linear".to_string(), report)]
}

pub fn relu_check() -> Vec<(String, GradCheckReport)> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut store = ParamStore::new();
    // keep inputs away from the kink so central differences are valid
    let xs: Vec<f32> = (0..8)
        .map(|_| {
            let v: f32 = rng.gen_range(0.05..1.0);
            if rng.gen_bool(0.5) { v } else { -v }
        })
        .collect();
    let x = store.add("x", Tensor::from_vec(&[8], xs).unwrap());
    let r = random_vec(&mut rng, 8, 1.0);
    let report = grad_check(
        &mut store,
        |s, g| {
            let xv = s.get(x).data();
            let y = relu(xv);
            if let Some(g) = g {
                let dx = relu_backward(xv, &r);
                kernels::add_into(&dx, g.get_mut(x).data_mut());
            }
            project(&y, &r)
        },
        EPS,
        Coordinates::All,
    );
    vec![("relu".to_string(), report)]
}

pub fn mean_pool_check() -> Vec<(String, GradCheckReport)> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut store = ParamStore::new();
    let x = store.add("seq", Tensor::from_vec(&[5, 3], random_vec(&mut rng, 15, 1.0)).unwrap());
    let r = random_vec(&mut rng, 3, 1.0);
    let report = grad_check(
        &mut store,
        |s, g| {
            let y = mean_pool(s.get(x)).unwrap();
            if let Some(g) = g {
                let d = mean_pool_backward(5, &r);
                kernels::add_into(d.data(), g.get_mut(x).data_mut());
            }
            project(&y, &r)
        },
        EPS,
        Coordinates::All,
    );
    vec![("mean_pool".to_string(), report)]
}

pub fn softmax_cross_entropy_check() -> Vec<(String, GradCheckReport)> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut out = Vec::new();
    for k in [2usize, 3, 4, 7] {
        let mut store = ParamStore::new();
        let logits = store.add("logits", Tensor::from_vec(&[k], random_vec(&mut rng, k, 3.0)).unwrap());
        let gold = rng.gen_range(0..k);
        let report = grad_check(
            &mut store,
            |s, g| {
                let ce = softmax_cross_entropy(s.get(logits).data(), gold).unwrap();
                if let Some(g) = g {
                    kernels::add_into(&ce.dlogits, g.get_mut(logits).data_mut());
                }
                ce.loss
            },
            EPS,
            Coordinates::All,
        );
        out.push((format!("softmax_ce k={k}"), report));
    }
    out
}

pub fn lstm_cell_check() -> Vec<(String, GradCheckReport)> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut store = ParamStore::new();
    let cell = LstmCell::new(&mut store, "cell", 3, 4, &mut rng);
    let x = store.add("x", Tensor::from_vec(&[3], random_vec(&mut rng, 3, 1.0)).unwrap());
    let h = store.add("h", Tensor::from_vec(&[4], random_vec(&mut rng, 4, 0.8)).unwrap());
    let c = store.add("c", Tensor::from_vec(&[4], random_vec(&mut rng, 4, 1.0)).unwrap());
    let rh = random_vec(&mut rng, 4, 1.0);
    let rc = random_vec(&mut rng, 4, 1.0);
    let report = grad_check(
        &mut store,
        |s, g| {
            let (xv, hv, cv) = (s.get(x).data(), s.get(h).data(), s.get(c).data());
            let (h2, c2, cache) = cell.step(s, xv, hv, cv).unwrap();
            if let Some(g) = g {
                let (dx, dh, dc) = cell.step_backward(s, g, &cache, &rh, &rc);
                kernels::add_into(&dx, g.get_mut(x).data_mut());
                kernels::add_into(&dh, g.get_mut(h).data_mut());
                kernels::add_into(&dc, g.get_mut(c).data_mut());
            }
            project(&h2, &rh) + project(&c2, &rc)
        },
        EPS,
        Coordinates::All,
    );
    vec![("lstm_cell".to_string(), report)]
}

pub fn bilstm_unrolled_check() -> Vec<(String, GradCheckReport)> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut store = ParamStore::new();
    let bi = BiLstm::new(&mut store, "bi", 3, 4, &mut rng);
    let seq = store.add("seq", Tensor::from_vec(&[5, 3], random_vec(&mut rng, 15, 1.0)).unwrap());
    let r = random_vec(&mut rng, 5 * 8, 1.0);
    let report = grad_check(
        &mut store,
        |s, g| {
            let input = s.get(seq).clone();
            let (out, cache) = bi.forward(s, &input).unwrap();
            if let Some(g) = g {
                let d_out = Tensor::from_vec(&[5, 8], r.clone()).unwrap();
                let dseq = bi.backward(s, g, &input, &cache, &d_out);
                kernels::add_into(dseq.data(), g.get_mut(seq).data_mut());
            }
            project(out.data(), &r)
        },
        EPS,
        Coordinates::All,
    );
    vec![("bilstm T=5".to_string(), report)]
}

pub fn feedforward_check() -> Vec<(String, GradCheckReport)> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut store = ParamStore::new();
    let ff = FeedForward::new(&mut store, "ff", 6, &[5, 4], 3, &mut rng);
    let x = store.add("x", Tensor::from_vec(&[6], random_vec(&mut rng, 6, 1.0)).unwrap());
    let report = grad_check(
        &mut store,
        |s, g| {
            let xv = s.get(x).data().to_vec();
            let (logits, cache) = ff.forward(s, &xv).unwrap();
            let ce = softmax_cross_entropy(&logits, 1).unwrap();
            if let Some(g) = g {
                let dx = ff.backward(s, g, &cache, &ce.dlogits);
                kernels::add_into(&dx, g.get_mut(x).data_mut());
            }
            ce.loss
        },
        EPS,
        Coordinates::All,
    );
    vec![("feedforward".to_string(), report)]
}

/// Every layer-level check, in a fixed order.
pub fn all_layers() -> Vec<(String, GradCheckReport)> {
    [linear_check, relu_check, mean_pool_check, softmax_cross_entropy_check, lstm_cell_check, bilstm_unrolled_check, feedforward_check].iter().flat_map(|f| f()).collect()
}

/// Loss of single examples under a small timex model, `MODEL_COORDS` sampled coordinates each.
pub fn timex_model() -> Vec<(String, GradCheckReport)> {
    let model = TimexModel::new(TimexModelConfig { hidden_dim: 16, char_emb_dim: 12, ff_dims: vec![24, 16], ..Default::default() }).unwrap();
    generate_timex_pairs(3, 44, 0.5)
        .iter()
        .map(|ex| {
            let pair = model.encode_pair(ex).unwrap();
            let mut store = model.params().clone();
            let report = grad_check(
                &mut store,
                |s, g| model.loss(s, &pair, g).unwrap().0,
                EPS,
                Coordinates::Sample { count: MODEL_COORDS, seed: 7 },
            );
            (format!("timex model {:?} / {:?}", ex.t1.surface, ex.t2.surface), report)
        })
        .collect()
}

/// Loss of one pair per document under a small event model, in each input mode and the baseline.
pub fn event_model() -> Vec<(String, GradCheckReport)> {
    let docs = generate_event_corpus(&SyntheticEventCorpusConfig { n_examples: 4, seed: 51, ..Default::default() }).unwrap();
    let timex = Arc::new(
        TimexModel::new(TimexModelConfig { char_emb_dim: 8, hidden_dim: 8, ff_dims: vec![16, 8], seed: 1, ..Default::default() }).unwrap(),
    );
    let mut out = Vec::new();
    for (mode, baseline) in [(TimexMode::WithTimex, false), (TimexMode::MaskedTimex, false), (TimexMode::WithoutTimex, true)] {
        let cfg = EventModelConfig {
            word_emb_dim: 16,
            pos_emb_dim: 4,
            lower_hidden: 12,
            upper_hidden: 12,
            ff_dims: vec![16, 8],
            mode,
            baseline_no_lower_bilstm: baseline,
            ..Default::default()
        };
        let model = EventModel::new(cfg, &docs, Some(timex.clone())).unwrap();
        for doc in &docs {
            let prep = model.prepare(doc).unwrap();
            let mut store = model.params().clone();
            let report = grad_check(
                &mut store,
                |s, g| model.loss(s, &prep, 0, g).unwrap().0,
                EPS,
                Coordinates::Sample { count: MODEL_COORDS, seed: 11 },
            );
            out.push((format!("event model {} baseline={baseline} {}", mode.name(), doc.doc_id), report));
        }
    }
    out
}

/// Within tolerance, with at least 200 compared coordinates and few kink skips when sampling.
pub fn passes(report: &GradCheckReport, tol: f64, min_checked: usize) -> bool {
    report.max_rel_error < tol && report.checked >= min_checked && report.skipped_kinks * 10 <= report.checked
}

pub fn describe(name: &str, r: &GradCheckReport) -> String {
    format!(
        "{name}: max rel error {:.3e} over {} coords, {} kink skips (worst {:?}: analytic {:.6e}, numeric {:.6e})",
        r.max_rel_error, r.checked, r.skipped_kinks, r.worst, r.analytic_at_worst, r.numeric_at_worst
    )
}
