//! Significance testing, learning curves and run bookkeeping.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus_io::{self, CorpusError};
use crate::dataset::shard_rng;
use crate::document::AnnotatedDocument;
use crate::event_model::{evaluate_events, train_events, EventModelConfig, EventModelError, TimexMode};
use crate::parallel;
use crate::timex_model::TimexModel;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("length mismatch: {a} predictions for system a, {b} for system b, {gold} gold labels")]
    LengthMismatch { a: usize, b: usize, gold: usize },
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error(transparent)]
    Event(#[from] EventModelError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

pub const DEFAULT_RESAMPLES: usize = 10_000;
const RESAMPLE_BLOCK: usize = 500;

/// One-sided paired bootstrap: the share of resamples in which system `a` is
/// not more accurate than `b`, counting exact ties as one half.
pub fn bootstrap_compare(
    preds_a: &[usize],
    preds_b: &[usize],
    gold: &[usize],
    n_resamples: usize,
    seed: u64,
) -> Result<f64, ExperimentError> {
    let n = gold.len();
    if preds_a.len() != n || preds_b.len() != n || n == 0 {
        return Err(ExperimentError::LengthMismatch { a: preds_a.len(), b: preds_b.len(), gold: n });
    }
    if n_resamples == 0 {
        return Err(ExperimentError::ConfigInvalid("n_resamples must be positive".into()));
    }
    let delta: Vec<i32> = (0..n)
        .map(|i| i32::from(preds_a[i] == gold[i]) - i32::from(preds_b[i] == gold[i]))
        .collect();
    let blocks = n_resamples.div_ceil(RESAMPLE_BLOCK);
    let halves: u64 = parallel::map_range(blocks, |blk| {
        let mut rng = shard_rng(seed, blk as u64);
        let count = RESAMPLE_BLOCK.min(n_resamples - blk * RESAMPLE_BLOCK);
        let mut h = 0u64;
        for _ in 0..count {
            let diff: i64 = (0..n).map(|_| i64::from(delta[rng.gen_range(0..n)])).sum();
            h += match diff {
                d if d < 0 => 2,
                0 => 1,
                _ => 0,
            };
        }
        h
    })
    .into_iter()
    .sum();
    Ok(halves as f64 / (2 * n_resamples) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LearningCurveConfig {
    pub sizes: Vec<usize>,
    pub modes: Vec<TimexMode>,
    pub seeds: Vec<u64>,
    pub event: EventModelConfig,
}

impl Default for LearningCurveConfig {
    fn default() -> Self {
        LearningCurveConfig {
            sizes: vec![2000, 3000, 4000],
            modes: TimexMode::ALL.to_vec(),
            seeds: vec![0, 1, 2],
            event: EventModelConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveCell {
    pub size: usize,
    pub mode: TimexMode,
    pub per_seed: Vec<f64>,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub sizes: Vec<usize>,
    pub modes: Vec<TimexMode>,
    pub seeds: Vec<u64>,
    pub cells: Vec<CurveCell>,
}

impl LearningCurve {
    pub fn cell(&self, size: usize, mode: TimexMode) -> Option<&CurveCell> {
        self.cells.iter().find(|c| c.size == size && c.mode == mode)
    }

    /// Mean test accuracy (percent) with one row per mode and one column per train size.
    pub fn to_table(&self) -> String {
        let mut out = String::from("| mode |");
        for s in &self.sizes {
            let _ = write!(out, " {s} |");
        }
        out.push_str("\n|---|");
        out.push_str(&"---|".repeat(self.sizes.len()));
        out.push('\n');
        for &m in &self.modes {
            let _ = write!(out, "| {} |", m.name());
            for &s in &self.sizes {
                match self.cell(s, m) {
                    Some(c) => {
                        let _ = write!(out, " {:.1} |", 100.0 * c.mean);
                    }
                    None => out.push_str(" - |"),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Trains one model per (size, mode, seed) on the first `size` documents of
/// `pool` and scores it on `test`. The timex model is only consulted in `with` mode.
pub fn learning_curve(
    config: &LearningCurveConfig,
    pool: &[AnnotatedDocument],
    dev: &[AnnotatedDocument],
    test: &[AnnotatedDocument],
    timex: Option<Arc<TimexModel>>,
    mut on_cell: impl FnMut(&CurveCell),
) -> Result<LearningCurve, ExperimentError> {
    if config.sizes.is_empty() || config.modes.is_empty() || config.seeds.is_empty() {
        return Err(ExperimentError::ConfigInvalid("sizes, modes and seeds must be nonempty".into()));
    }
    if let Some(&max) = config.sizes.iter().max().filter(|&&m| m > pool.len()) {
        return Err(ExperimentError::ConfigInvalid(format!("size {max} exceeds the {} training documents", pool.len())));
    }
    let mut cells = Vec::new();
    for &size in &config.sizes {
        for &mode in &config.modes {
            let mut per_seed = Vec::with_capacity(config.seeds.len());
            for &seed in &config.seeds {
                let cfg = EventModelConfig { mode, seed, ..config.event.clone() };
                let (model, _) = train_events(&pool[..size], dev, &cfg, timex.clone())?;
                per_seed.push(evaluate_events(&model, test)?.accuracy);
            }
            let mean = per_seed.iter().sum::<f64>() / per_seed.len() as f64;
            let cell = CurveCell { size, mode, per_seed, mean };
            on_cell(&cell);
            cells.push(cell);
        }
    }
    Ok(LearningCurve { sizes: config.sizes.clone(), modes: config.modes.clone(), seeds: config.seeds.clone(), cells })
}

/// Echo of a run's parameters written beside its artifacts, usually as `config.json` in the output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEcho<T> {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub config: T,
}

pub fn write_run_echo<T: Serialize>(path: &Path, command: &str, seed: u64, config: &T, force: bool) -> Result<(), ExperimentError> {
    let echo = RunEcho { command: command.to_string(), version: crate::VERSION.to_string(), seed, config };
    let json = serde_json::to_string_pretty(&echo).expect("config serializes") + "\n";
    corpus_io::write_atomic(path, json.as_bytes(), force)?;
    Ok(())
}
