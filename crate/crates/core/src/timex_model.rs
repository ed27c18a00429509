//! Character-level biLSTM timex pair classifier.
//!
//! Both timexes pass through one shared character biLSTM; each sequence of
//! `2H` outputs is mean pooled into a timex embedding, the two embeddings are
//! concatenated and classified as before/after/simultaneous by a ReLU
//! feed-forward stack.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus_io::{self, CorpusError};
use crate::grammar::{TimexLabel, TimexPairExample};
use crate::metrics::{ClassificationReport, EpochMetrics};
use crate::nn::{
    argmax, mean_pool, mean_pool_backward, softmax, softmax_cross_entropy, AdamConfig, AdamState,
    BiLstm, BiLstmCache, Embedding, FeedForward, GradStore, NnError, ParamStore, Tensor,
};
use crate::parallel;

#[derive(Debug, Error)]
pub enum TimexModelError {
    #[error("empty timex string")]
    EmptyString,
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("sidecar {path}: {message}")]
    Sidecar { path: PathBuf, message: String },
}

/// Characters the grammar can emit.
pub const DEFAULT_ALPHABET: &str =
    " ',-./0123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ";

/// Ordered character set; id 0 is UNK and character `i` of the alphabet is id `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharVocab {
    alphabet: Vec<char>,
}

impl Default for CharVocab {
    fn default() -> Self {
        CharVocab::new(DEFAULT_ALPHABET)
    }
}

impl CharVocab {
    pub const UNK: usize = 0;

    pub fn new(alphabet: &str) -> Self {
        let mut chars: Vec<char> = Vec::new();
        for c in alphabet.chars() {
            if !chars.contains(&c) {
                chars.push(c);
            }
        }
        CharVocab { alphabet: chars }
    }

    pub fn len(&self) -> usize {
        self.alphabet.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn id(&self, c: char) -> usize {
        self.alphabet.iter().position(|&a| a == c).map_or(Self::UNK, |i| i + 1)
    }

    pub fn alphabet(&self) -> String {
        self.alphabet.iter().collect()
    }
}

pub fn encode_chars(surface: &str, vocab: &CharVocab) -> Result<Vec<usize>, TimexModelError> {
    if surface.is_empty() {
        return Err(TimexModelError::EmptyString);
    }
    Ok(surface.chars().map(|c| vocab.id(c)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TimexModelConfig {
    pub alphabet: String,
    pub char_emb_dim: usize,
    pub hidden_dim: usize,
    pub ff_dims: Vec<usize>,
    pub n_labels: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub optimizer: AdamConfig,
}

impl Default for TimexModelConfig {
    fn default() -> Self {
        TimexModelConfig {
            alphabet: DEFAULT_ALPHABET.to_string(),
            char_emb_dim: 32,
            hidden_dim: 64,
            ff_dims: vec![128, 64],
            n_labels: 3,
            epochs: 10,
            batch_size: 32,
            seed: 0,
            optimizer: AdamConfig::default(),
        }
    }
}

impl TimexModelConfig {
    pub fn validate(&self) -> Result<(), TimexModelError> {
        let bad = |m: &str| Err(TimexModelError::ConfigInvalid(m.to_string()));
        if self.n_labels != TimexLabel::ALL.len() {
            return bad("n_labels must be 3");
        }
        if self.char_emb_dim == 0 || self.hidden_dim == 0 || self.ff_dims.contains(&0) {
            return bad("layer dimensions must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if self.alphabet.is_empty() {
            return bad("alphabet must be nonempty");
        }
        Ok(())
    }

    pub fn embedding_dim(&self) -> usize {
        2 * self.hidden_dim
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimexEmbedding {
    pub vector: Vec<f32>,
    pub source_surface: String,
}

#[derive(Debug, Clone)]
pub struct TimexModel {
    config: TimexModelConfig,
    vocab: CharVocab,
    store: ParamStore,
    emb: Embedding,
    bilstm: BiLstm,
    ff: FeedForward,
}

struct EncodeCache {
    ids: Vec<usize>,
    chars: Tensor,
    lstm: BiLstmCache,
}

/// Character ids of both members plus the gold class.
#[derive(Debug, Clone)]
pub struct EncodedPair {
    pub t1: Vec<usize>,
    pub t2: Vec<usize>,
    pub label: usize,
}

impl TimexModel {
    pub fn new(config: TimexModelConfig) -> Result<Self, TimexModelError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let vocab = CharVocab::new(&config.alphabet);
        let mut store = ParamStore::new();
        let emb = Embedding::new(&mut store, "timex.char_emb", vocab.len(), config.char_emb_dim, &mut rng);
        let bilstm = BiLstm::new(&mut store, "timex.bilstm", config.char_emb_dim, config.hidden_dim, &mut rng);
        let ff = FeedForward::new(
            &mut store,
            "timex.ff",
            2 * config.embedding_dim(),
            &config.ff_dims,
            config.n_labels,
            &mut rng,
        );
        Ok(TimexModel { config, vocab, store, emb, bilstm, ff })
    }

    pub fn config(&self) -> &TimexModelConfig {
        &self.config
    }

    pub fn vocab(&self) -> &CharVocab {
        &self.vocab
    }

    pub fn params(&self) -> &ParamStore {
        &self.store
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    pub fn embedding_dim(&self) -> usize {
        self.config.embedding_dim()
    }

    /// The output projection of the classifier head.
    pub fn output_layer(&self) -> crate::nn::Linear {
        self.ff.output
    }

    pub fn encode_pair(&self, ex: &TimexPairExample) -> Result<EncodedPair, TimexModelError> {
        Ok(EncodedPair {
            t1: encode_chars(&ex.t1.surface, &self.vocab)?,
            t2: encode_chars(&ex.t2.surface, &self.vocab)?,
            label: ex.label.index(),
        })
    }

    fn encode(&self, store: &ParamStore, ids: &[usize]) -> Result<(Vec<f32>, EncodeCache), TimexModelError> {
        if ids.is_empty() {
            return Err(TimexModelError::EmptyString);
        }
        let d = self.emb.dim;
        let mut chars = Tensor::zeros(&[ids.len(), d]);
        for (t, &id) in ids.iter().enumerate() {
            chars.row_mut(t).copy_from_slice(self.emb.lookup(store, id)?);
        }
        let (out, lstm) = self.bilstm.forward(store, &chars)?;
        let pooled = mean_pool(&out)?;
        Ok((pooled, EncodeCache { ids: ids.to_vec(), chars, lstm }))
    }

    fn encode_backward(&self, store: &ParamStore, grads: &mut GradStore, cache: &EncodeCache, d_pooled: &[f32]) {
        let d_out = mean_pool_backward(cache.ids.len(), d_pooled);
        let d_chars = self.bilstm.backward(store, grads, &cache.chars, &cache.lstm, &d_out);
        for (t, &id) in cache.ids.iter().enumerate() {
            self.emb.backward(grads, id, d_chars.row(t));
        }
    }

    /// Mean of the biLSTM outputs over character positions.
    pub fn embed(&self, surface: &str) -> Result<TimexEmbedding, TimexModelError> {
        let ids = encode_chars(surface, &self.vocab)?;
        let (vector, _) = self.encode(&self.store, &ids)?;
        Ok(TimexEmbedding { vector, source_surface: surface.to_string() })
    }

    fn logits(&self, store: &ParamStore, t1: &[usize], t2: &[usize]) -> Result<Vec<f32>, TimexModelError> {
        let (h1, _) = self.encode(store, t1)?;
        let (h2, _) = self.encode(store, t2)?;
        let (logits, _) = self.ff.forward(store, &[h1, h2].concat())?;
        Ok(logits)
    }

    /// Probabilities over before/after/simultaneous for `(t1, t2)`.
    pub fn classify_pair(&self, t1: &str, t2: &str) -> Result<Vec<f32>, TimexModelError> {
        let a = encode_chars(t1, &self.vocab)?;
        let b = encode_chars(t2, &self.vocab)?;
        Ok(softmax(&self.logits(&self.store, &a, &b)?))
    }

    pub fn predict_encoded(&self, pair: &EncodedPair) -> Result<usize, TimexModelError> {
        Ok(argmax(&self.logits(&self.store, &pair.t1, &pair.t2)?))
    }

    /// Cross-entropy of one example against `store`, accumulating gradients when asked.
    /// Returns the loss and the predicted class.
    pub fn loss(&self, store: &ParamStore, pair: &EncodedPair, grads: Option<&mut GradStore>) -> Result<(f64, usize), TimexModelError> {
        let (h1, c1) = self.encode(store, &pair.t1)?;
        let (h2, c2) = self.encode(store, &pair.t2)?;
        let z = [h1, h2].concat();
        let (logits, ff_cache) = self.ff.forward(store, &z)?;
        let ce = softmax_cross_entropy(&logits, pair.label)?;
        if let Some(grads) = grads {
            let dz = self.ff.backward(store, grads, &ff_cache, &ce.dlogits);
            let half = self.embedding_dim();
            self.encode_backward(store, grads, &c1, &dz[..half]);
            self.encode_backward(store, grads, &c2, &dz[half..]);
        }
        Ok((ce.loss, argmax(&ce.probs)))
    }
}

/// Configuration echo stored beside a timex checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimexSidecar {
    pub config: TimexModelConfig,
    pub vocab: CharVocab,
    pub labels: Vec<String>,
    pub version: String,
}

/// `<checkpoint>.json`.
pub fn sidecar_path(checkpoint: &Path) -> PathBuf {
    let mut s = checkpoint.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

impl TimexModel {
    pub fn sidecar(&self) -> TimexSidecar {
        TimexSidecar {
            config: self.config.clone(),
            vocab: self.vocab.clone(),
            labels: TimexLabel::ALL.iter().map(|l| l.name().to_string()).collect(),
            version: crate::VERSION.to_string(),
        }
    }

    /// Writes the checkpoint and its JSON sidecar.
    pub fn save(&self, checkpoint: &Path, force: bool) -> Result<(), TimexModelError> {
        let json = serde_json::to_string_pretty(&self.sidecar()).expect("sidecar serializes") + "\n";
        corpus_io::save_checkpoint(checkpoint, &self.store, force)?;
        corpus_io::write_atomic(&sidecar_path(checkpoint), json.as_bytes(), force)?;
        Ok(())
    }

    /// Rebuilds the model from its sidecar and loads the checkpoint weights.
    pub fn load(checkpoint: &Path) -> Result<Self, TimexModelError> {
        let side = sidecar_path(checkpoint);
        let text = std::fs::read_to_string(&side)
            .map_err(|e| TimexModelError::Sidecar { path: side.clone(), message: e.to_string() })?;
        let sidecar: TimexSidecar = serde_json::from_str(&text)
            .map_err(|e| TimexModelError::Sidecar { path: side.clone(), message: e.to_string() })?;
        let mut model = TimexModel::new(sidecar.config)?;
        corpus_io::load_checkpoint_into(checkpoint, &mut model.store)?;
        Ok(model)
    }
}

/// Splits a minibatch into fixed chunks, differentiates each chunk on its own
/// gradient buffer and sums chunk results in order.
pub(crate) fn batch_gradients<T, F>(store: &ParamStore, batch: &[&T], chunk: usize, f: F) -> (GradStore, f64, usize)
where
    T: Sync,
    F: Fn(&T, &mut GradStore) -> (f64, bool) + Sync + Send,
{
    let parts = parallel::map_chunks(batch, chunk, |items| {
        let mut grads = store.zero_grads();
        let mut loss = 0.0;
        let mut correct = 0;
        for item in items {
            let (l, ok) = f(item, &mut grads);
            loss += l;
            correct += usize::from(ok);
        }
        (grads, loss, correct)
    });
    let mut iter = parts.into_iter();
    let (mut total, mut loss, mut correct) = iter.next().expect("nonempty batch");
    for (g, l, c) in iter {
        total.add_assign(&g);
        loss += l;
        correct += c;
    }
    (total, loss, correct)
}

pub(crate) const GRAD_CHUNK: usize = 4;

pub fn train_timex(
    train: &[TimexPairExample],
    dev: &[TimexPairExample],
    config: &TimexModelConfig,
) -> Result<(TimexModel, Vec<EpochMetrics>), TimexModelError> {
    train_timex_with(train, dev, config, |_| {})
}

/// Trains with minibatch gradient accumulation and keeps the best-dev parameters.
pub fn train_timex_with(
    train: &[TimexPairExample],
    dev: &[TimexPairExample],
    config: &TimexModelConfig,
    mut on_epoch: impl FnMut(&EpochMetrics),
) -> Result<(TimexModel, Vec<EpochMetrics>), TimexModelError> {
    if train.is_empty() || dev.is_empty() {
        return Err(TimexModelError::ConfigInvalid("train and dev sets must be nonempty".into()));
    }
    let mut model = TimexModel::new(config.clone())?;
    let train_enc: Vec<EncodedPair> = train.iter().map(|e| model.encode_pair(e)).collect::<Result<_, _>>()?;
    let dev_enc: Vec<EncodedPair> = dev.iter().map(|e| model.encode_pair(e)).collect::<Result<_, _>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x5eed));
    let mut adam = AdamState::new(&model.store, config.optimizer);
    let mut order: Vec<usize> = (0..train_enc.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, ParamStore)> = None;

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut epoch_correct = 0;
        for batch_idx in order.chunks(config.batch_size) {
            let batch: Vec<&EncodedPair> = batch_idx.iter().map(|&i| &train_enc[i]).collect();
            let frozen = &model;
            let (mut grads, loss, correct) = batch_gradients(&model.store, &batch, GRAD_CHUNK, |pair, g| {
                let (l, pred) = frozen.loss(&frozen.store, pair, Some(g)).expect("encoded pairs are valid");
                (l, pred == pair.label)
            });
            grads.scale(1.0 / batch.len() as f32);
            adam.step(&mut model.store, &mut grads)?;
            epoch_loss += loss;
            epoch_correct += correct;
        }
        let dev_accuracy = accuracy_encoded(&model, &dev_enc)?;
        let metrics = EpochMetrics {
            epoch,
            train_loss: epoch_loss / train_enc.len() as f64,
            train_accuracy: epoch_correct as f64 / train_enc.len() as f64,
            dev_accuracy,
        };
        on_epoch(&metrics);
        history.push(metrics);
        if best.as_ref().is_none_or(|(b, _)| dev_accuracy > *b) {
            best = Some((dev_accuracy, model.store.clone()));
        }
    }
    if let Some((_, store)) = best {
        model.store = store;
    }
    Ok((model, history))
}

fn accuracy_encoded(model: &TimexModel, data: &[EncodedPair]) -> Result<f64, TimexModelError> {
    let preds = parallel::map(data, |p| model.predict_encoded(p));
    let mut correct = 0;
    for (p, ex) in preds.into_iter().zip(data) {
        correct += usize::from(p? == ex.label);
    }
    Ok(correct as f64 / data.len() as f64)
}

/// Accuracy and confusion matrix over before/after/simultaneous.
pub fn evaluate_timex(model: &TimexModel, test: &[TimexPairExample]) -> Result<ClassificationReport, TimexModelError> {
    let preds = predict_pairs(model, test)?;
    let gold: Vec<usize> = test.iter().map(|e| e.label.index()).collect();
    let names = TimexLabel::ALL.iter().map(|l| l.name().to_string()).collect();
    Ok(ClassificationReport::from_predictions(names, &gold, &preds))
}

pub fn predict_pairs(model: &TimexModel, data: &[TimexPairExample]) -> Result<Vec<usize>, TimexModelError> {
    parallel::map(data, |ex| model.predict_encoded(&model.encode_pair(ex)?)).into_iter().collect()
}

/// Fraction of before/after test pairs whose prediction flips when the arguments are swapped.
pub fn label_swap_consistency(model: &TimexModel, test: &[TimexPairExample]) -> Result<f64, TimexModelError> {
    let ordered: Vec<&TimexPairExample> = test.iter().filter(|e| e.label != TimexLabel::Simultaneous).collect();
    if ordered.is_empty() {
        return Ok(1.0);
    }
    let flips = parallel::map(&ordered, |ex| -> Result<bool, TimexModelError> {
        let fwd = model.predict_encoded(&model.encode_pair(ex)?)?;
        let swapped = TimexPairExample { t1: ex.t2.clone(), t2: ex.t1.clone(), label: ex.label.swapped() };
        let bwd = model.predict_encoded(&model.encode_pair(&swapped)?)?;
        let fwd = TimexLabel::from_index(fwd).unwrap();
        Ok(fwd != TimexLabel::Simultaneous && TimexLabel::from_index(bwd) == Some(fwd.swapped()))
    });
    let mut n = 0;
    for f in flips {
        n += usize::from(f?);
    }
    Ok(n as f64 / ordered.len() as f64)
}

pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| f64::from(*x) * f64::from(*y)).sum();
    let na: f64 = a.iter().map(|x| f64::from(*x).powi(2)).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| f64::from(*x).powi(2)).sum::<f64>().sqrt();
    dot / (na * nb).max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> TimexModelConfig {
        TimexModelConfig { char_emb_dim: 4, hidden_dim: 3, ff_dims: vec![5, 4], ..Default::default() }
    }

    #[test]
    fn encode_chars_contract() {
        let vocab = CharVocab::default();
        let ids = encode_chars("1992", &vocab).unwrap();
        assert_eq!(ids.len(), 4);
        assert_eq!(ids, vec![vocab.id('1'), vocab.id('9'), vocab.id('9'), vocab.id('2')]);
        assert_eq!(ids[0] + 8, ids[1]);
        assert!(matches!(encode_chars("", &vocab), Err(TimexModelError::EmptyString)));
        assert_eq!(encode_chars("é", &vocab).unwrap(), vec![CharVocab::UNK]);
    }

    #[test]
    fn single_character_embedding_is_that_output() {
        let model = TimexModel::new(small_config()).unwrap();
        let e = model.embed("5").unwrap();
        let ids = encode_chars("5", &model.vocab).unwrap();
        let mut chars = Tensor::zeros(&[1, 4]);
        chars.row_mut(0).copy_from_slice(model.emb.lookup(&model.store, ids[0]).unwrap());
        let (out, _) = model.bilstm.forward(&model.store, &chars).unwrap();
        assert_eq!(e.vector, out.row(0));
        assert_eq!(model.embed("5").unwrap(), e);
    }

    #[test]
    fn zero_output_layer_is_uniform() {
        let mut model = TimexModel::new(small_config()).unwrap();
        let out = model.output_layer();
        model.store.get_mut(out.w).fill(0.0);
        model.store.get_mut(out.b).fill(0.0);
        let p = model.classify_pair("1992", "3 weeks ago").unwrap();
        assert_eq!(p, vec![1.0 / 3.0; 3]);
    }

    #[test]
    fn probabilities_form_a_simplex() {
        let model = TimexModel::new(small_config()).unwrap();
        let p = model.classify_pair("Sept. 12, 1993", "'63").unwrap();
        assert!(p.iter().all(|&v| v >= 0.0));
        assert!((p.iter().sum::<f32>() - 1.0).abs() < 1e-6);
        assert!(matches!(model.classify_pair("", "1990"), Err(TimexModelError::EmptyString)));
    }

    #[test]
    fn config_validation() {
        let bad = TimexModelConfig { n_labels: 4, ..Default::default() };
        assert!(matches!(TimexModel::new(bad), Err(TimexModelError::ConfigInvalid(_))));
        assert!(matches!(
            train_timex(&[], &[], &TimexModelConfig::default()),
            Err(TimexModelError::ConfigInvalid(_))
        ));
    }
}
