//! Central finite-difference gradient checking.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{GradStore, ParamStore};

/// Gradients smaller than this are compared absolutely: single-precision
/// central differences carry roughly 5e-5 of rounding noise at eps = 1e-3.
pub const RELATIVE_FLOOR: f64 = 0.1;

/// Coordinates whose central differences at `eps` and `eps / 2` disagree by
/// more than this are treated as straddling a ReLU kink and skipped.
pub const KINK_TOLERANCE: f64 = 1e-2;

#[derive(Debug, Clone, Copy)]
pub enum Coordinates {
    All,
    /// A fixed-seed uniform sample of `count` scalar coordinates across all tensors.
    Sample { count: usize, seed: u64 },
}

#[derive(Debug, Clone, Default)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub checked: usize,
    /// Coordinates left out because the loss is not smooth within the stencil.
    pub skipped_kinks: usize,
    /// Parameter name and flat index of the worst coordinate.
    pub worst: Option<(String, usize)>,
    pub analytic_at_worst: f64,
    pub numeric_at_worst: f64,
}

/// `|a - n| / max(|a|, |n|, RELATIVE_FLOOR)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let denom = analytic.abs().max(numeric.abs()).max(RELATIVE_FLOOR);
    (analytic - numeric).abs() / denom
}

/// Compares analytic gradients of `loss` against central differences.
///
/// `loss` must return the scalar loss and, when given a gradient buffer,
/// accumulate `dL/dθ` into it. Every stored tensor is perturbed in place
/// and restored afterwards.
pub fn grad_check<F>(store: &mut ParamStore, loss: F, eps: f32, coords: Coordinates) -> GradCheckReport
where
    F: Fn(&ParamStore, Option<&mut GradStore>) -> f64,
{
    let mut grads = store.zero_grads();
    loss(store, Some(&mut grads));

    let sizes: Vec<usize> = store.iter().map(|(_, t)| t.len()).collect();
    let total: usize = sizes.iter().sum();
    let flat: Vec<usize> = match coords {
        Coordinates::All => (0..total).collect(),
        Coordinates::Sample { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut picked = sample(&mut rng, total, count.min(total)).into_vec();
            picked.sort_unstable();
            picked
        }
    };

    let mut report = GradCheckReport::default();
    let ids: Vec<_> = store.ids().collect();
    let mut offsets = Vec::with_capacity(sizes.len());
    let mut acc = 0;
    for s in &sizes {
        offsets.push(acc);
        acc += s;
    }
    for f in flat {
        let which = offsets.partition_point(|&o| o <= f) - 1;
        let idx = f - offsets[which];
        let id = ids[which];
        let numeric = central_difference(store, &loss, id, idx, eps);
        let half = central_difference(store, &loss, id, idx, eps / 2.0);
        if relative_error(numeric, half) > KINK_TOLERANCE {
            report.skipped_kinks += 1;
            continue;
        }
        let analytic = f64::from(grads.get(id).data()[idx]);
        let err = relative_error(analytic, numeric);
        report.checked += 1;
        if report.worst.is_none() || err > report.max_rel_error {
            report.max_rel_error = err;
            report.worst = Some((store.name(id).to_string(), idx));
            report.analytic_at_worst = analytic;
            report.numeric_at_worst = numeric;
        }
    }
    report
}

fn central_difference<F>(store: &mut ParamStore, loss: &F, id: super::ParamId, idx: usize, eps: f32) -> f64
where
    F: Fn(&ParamStore, Option<&mut GradStore>) -> f64,
{
    let original = store.get(id).data()[idx];
    store.get_mut(id).data_mut()[idx] = original + eps;
    let plus = loss(store, None);
    store.get_mut(id).data_mut()[idx] = original - eps;
    let minus = loss(store, None);
    store.get_mut(id).data_mut()[idx] = original;
    // the perturbation actually applied after f32 rounding
    let h = f64::from(original + eps) - f64::from(original - eps);
    (plus - minus) / h
}
