use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub dev_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub n: usize,
    pub accuracy: f64,
    pub labels: Vec<String>,
    /// `confusion[gold][pred]`.
    pub confusion: Vec<Vec<usize>>,
    pub per_class: Vec<ClassMetrics>,
}

impl ClassificationReport {
    /// Panics if `gold` and `pred` differ in length or hold an index outside `labels`.
    pub fn from_predictions(labels: Vec<String>, gold: &[usize], pred: &[usize]) -> Self {
        assert_eq!(gold.len(), pred.len(), "gold and predictions must align");
        let k = labels.len();
        let mut confusion = vec![vec![0usize; k]; k];
        for (&g, &p) in gold.iter().zip(pred) {
            confusion[g][p] += 1;
        }
        let n = gold.len();
        let correct: usize = (0..k).map(|i| confusion[i][i]).sum();
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let per_class = labels
            .iter()
            .enumerate()
            .map(|(i, label)| {
                let tp = confusion[i][i];
                let support: usize = confusion[i].iter().sum();
                let predicted: usize = confusion.iter().map(|row| row[i]).sum();
                let precision = ratio(tp, predicted);
                let recall = ratio(tp, support);
                let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
                ClassMetrics { label: label.clone(), precision, recall, f1, support }
            })
            .collect();
        ClassificationReport { n, accuracy: ratio(correct, n), labels, confusion, per_class }
    }
}

pub fn accuracy(gold: &[usize], pred: &[usize]) -> f64 {
    assert_eq!(gold.len(), pred.len(), "gold and predictions must align");
    if gold.is_empty() {
        return 0.0;
    }
    gold.iter().zip(pred).filter(|(g, p)| g == p).count() as f64 / gold.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names() -> Vec<String> {
        ["a", "b", "c"].iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn perfect_predictions() {
        let gold = [0, 1, 2, 2, 1];
        let r = ClassificationReport::from_predictions(names(), &gold, &gold);
        assert_eq!(r.accuracy, 1.0);
        assert!(r.per_class.iter().all(|c| c.f1 == 1.0));
    }

    #[test]
    fn constant_predictor_on_balanced_set() {
        let gold: Vec<usize> = (0..300).map(|i| i % 3).collect();
        let pred = vec![1; 300];
        let r = ClassificationReport::from_predictions(names(), &gold, &pred);
        assert!((r.accuracy - 1.0 / 3.0).abs() < 1e-12);
        for (i, row) in r.confusion.iter().enumerate() {
            assert_eq!(row.iter().sum::<usize>(), r.per_class[i].support);
        }
        assert_eq!(r.per_class[0].f1, 0.0);
        assert!((r.per_class[1].precision - 1.0 / 3.0).abs() < 1e-12);
    }
}
