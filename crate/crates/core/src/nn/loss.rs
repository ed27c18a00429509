use super::NnError;

#[derive(Debug, Clone, PartialEq)]
pub struct CrossEntropy {
    /// Accumulated in f64 from the f32 logits.
    pub loss: f64,
    pub probs: Vec<f32>,
    pub dlogits: Vec<f32>,
}

pub fn softmax(logits: &[f32]) -> Vec<f32> {
    let max = logits.iter().copied().fold(f32::NEG_INFINITY, f32::max);
    let exps: Vec<f32> = logits.iter().map(|&l| (l - max).exp()).collect();
    let z: f32 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

/// Softmax followed by negative log-likelihood of `gold`, max-shifted for stability.
pub fn softmax_cross_entropy(logits: &[f32], gold: usize) -> Result<CrossEntropy, NnError> {
    if logits.len() < 2 {
        return Err(NnError::shape(&[2], &[logits.len()]));
    }
    if gold >= logits.len() {
        return Err(NnError::BadIndex { index: gold, len: logits.len() });
    }
    let max = f64::from(logits.iter().copied().fold(f32::NEG_INFINITY, f32::max));
    let shifted: Vec<f64> = logits.iter().map(|&l| f64::from(l) - max).collect();
    let log_z = shifted.iter().map(|&s| s.exp()).sum::<f64>().ln();
    let probs: Vec<f32> = shifted.iter().map(|&s| (s - log_z).exp() as f32).collect();
    let loss = log_z - shifted[gold];
    let mut dlogits = probs.clone();
    dlogits[gold] -= 1.0;
    Ok(CrossEntropy { loss, probs, dlogits })
}

pub fn argmax(v: &[f32]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_logits() {
        let ce = softmax_cross_entropy(&[0.0, 0.0, 0.0], 1).unwrap();
        assert!((ce.loss - 3f64.ln()).abs() < 1e-12);
        assert!((ce.probs.iter().sum::<f32>() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn large_logits_do_not_overflow() {
        let ce = softmax_cross_entropy(&[1000.0, 0.0, 0.0], 0).unwrap();
        assert!(ce.loss.abs() < 1e-6);
        assert!(ce.probs.iter().all(|p| p.is_finite()));
        let ce = softmax_cross_entropy(&[1000.0, 0.0, 0.0], 2).unwrap();
        assert!((ce.loss - 1000.0).abs() < 1e-3);
    }

    #[test]
    fn bad_inputs() {
        assert!(matches!(softmax_cross_entropy(&[0.0, 1.0], 2), Err(NnError::BadIndex { .. })));
        assert!(matches!(softmax_cross_entropy(&[0.0], 0), Err(NnError::ShapeMismatch { .. })));
    }

    #[test]
    fn argmax_prefers_first_tie() {
        assert_eq!(argmax(&[0.2, 0.5, 0.5]), 1);
    }
}
