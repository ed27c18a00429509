//! Dependency-path event ordering network.
//!
//! Per sentence each token becomes `[v_w; v_p; v_t]` (word, POS and, in
//! `with_timex` mode, a broadcast timex embedding). A lower biLSTM
//! contextualizes the sentence, the states along each event's dependency path
//! feed a shared upper biLSTM, and the final upper outputs of both events are
//! concatenated and classified into four labels by a ReLU feed-forward stack.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus_io::{self, CorpusError, PredictionRecord};
use crate::document::{AnnotatedDocument, DocumentError, EventLabel, Sentence, TimexSpan};
use crate::metrics::{ClassificationReport, EpochMetrics};
use crate::nn::{
    argmax, softmax_cross_entropy, AdamConfig, AdamState, BiLstm, BiLstmCache, Embedding,
    FeedForward, GradStore, NnError, ParamStore, Tensor,
};
use crate::parallel;
use crate::timex_model::{batch_gradients, sidecar_path, TimexModel, TimexModelError, GRAD_CHUNK};

#[derive(Debug, Error)]
pub enum EventModelError {
    #[error("timex span {index} out of bounds for a sentence of {len} tokens")]
    SpanOutOfBounds { index: usize, len: usize },
    #[error(transparent)]
    Document(#[from] DocumentError),
    #[error("with_timex mode needs a timex model")]
    ModeMismatch,
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Timex(#[from] TimexModelError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },
}

/// Relations a timex may hang from on its way up to the event it modifies.
pub const BROADCAST_RELATIONS: [&str; 6] = ["tmod", "nmod", "obl", "advmod", "nmod:tmod", "obl:tmod"];
pub const MAX_BROADCAST_HOPS: usize = 2;

fn check_span(sentence: &Sentence, index: usize, span: &TimexSpan) -> Result<(), EventModelError> {
    let len = sentence.len();
    if span.start >= span.end || span.end > len || !(span.start..span.end).contains(&span.head) {
        return Err(EventModelError::SpanOutOfBounds { index, len });
    }
    Ok(())
}

/// Verb reached from the span head by at most two broadcast-relation edges,
/// with the number of edges climbed.
pub fn broadcast_governor(sentence: &Sentence, span: &TimexSpan) -> Option<(usize, usize)> {
    let mut cur = span.head;
    for hop in 1..=MAX_BROADCAST_HOPS {
        if !BROADCAST_RELATIONS.contains(&sentence.tokens[cur].deprel.as_str()) {
            return None;
        }
        cur = sentence.parent(cur)?;
        if sentence.tokens[cur].is_verb() {
            return Some((cur, hop));
        }
    }
    None
}

pub fn broadcast_target(sentence: &Sentence, span: &TimexSpan) -> Option<usize> {
    broadcast_governor(sentence, span).map(|(t, _)| t)
}

/// For every token, the index of the timex span whose embedding it carries.
/// Span tokens carry their own span; a broadcast target carries the first span that reaches it.
pub fn broadcast_assignment(sentence: &Sentence) -> Result<Vec<Option<usize>>, EventModelError> {
    let mut out = vec![None; sentence.len()];
    for (k, span) in sentence.timex_spans.iter().enumerate() {
        check_span(sentence, k, span)?;
        for slot in &mut out[span.start..span.end] {
            slot.get_or_insert(k);
        }
    }
    for (k, span) in sentence.timex_spans.iter().enumerate() {
        if let Some(t) = broadcast_target(sentence, span) {
            out[t].get_or_insert(k);
        }
    }
    Ok(out)
}

/// Per-token timex vectors (`T x 2H`), zero rows where no timex applies.
pub fn broadcast_timex(sentence: &Sentence, timex: &TimexModel) -> Result<Tensor, EventModelError> {
    let assign = broadcast_assignment(sentence)?;
    let dim = timex.embedding_dim();
    let vectors = sentence
        .timex_spans
        .iter()
        .map(|s| timex.embed(&sentence.span_text(s)).map(|e| e.vector))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = Tensor::zeros(&[sentence.len(), dim]);
    for (t, a) in assign.iter().enumerate() {
        if let Some(k) = a {
            out.row_mut(t).copy_from_slice(&vectors[*k]);
        }
    }
    Ok(out)
}

/// Path from `event` up to the lowest common ancestor with `other` (inclusive),
/// or up to the sentence root when `other` is `None`. Ordered event first.
pub fn dep_path(sentence: &Sentence, event: usize, other: Option<usize>) -> Result<Vec<usize>, EventModelError> {
    sentence.check_tree(0)?;
    let n = sentence.len();
    for idx in std::iter::once(event).chain(other) {
        if idx >= n {
            return Err(NnError::BadIndex { index: idx, len: n }.into());
        }
    }
    let mut stop = vec![false; n];
    if let Some(o) = other {
        let mut cur = Some(o);
        while let Some(c) = cur {
            stop[c] = true;
            cur = sentence.parent(c);
        }
    }
    let mut path = vec![event];
    let mut cur = event;
    while !stop[cur] {
        match sentence.parent(cur) {
            Some(p) => {
                path.push(p);
                cur = p;
            }
            None => break,
        }
    }
    Ok(path)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimexMode {
    WithTimex,
    WithoutTimex,
    MaskedTimex,
}

impl TimexMode {
    pub const ALL: [TimexMode; 3] = [TimexMode::WithoutTimex, TimexMode::MaskedTimex, TimexMode::WithTimex];

    pub fn name(self) -> &'static str {
        match self {
            TimexMode::WithTimex => "with",
            TimexMode::WithoutTimex => "without",
            TimexMode::MaskedTimex => "masked",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "with" | "with_timex" => Some(TimexMode::WithTimex),
            "without" | "without_timex" => Some(TimexMode::WithoutTimex),
            "masked" | "masked_timex" => Some(TimexMode::MaskedTimex),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EventModelConfig {
    pub word_emb_dim: usize,
    pub pos_emb_dim: usize,
    pub lower_hidden: usize,
    pub upper_hidden: usize,
    pub ff_dims: Vec<usize>,
    pub mode: TimexMode,
    pub baseline_no_lower_bilstm: bool,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub optimizer: AdamConfig,
    /// Checkpoint of the frozen timex model used in `with_timex` mode.
    pub timex_checkpoint: Option<PathBuf>,
    /// Optional plain-text word vectors (`word v1 .. vD` per line) used to initialise matching rows.
    pub word_vectors: Option<PathBuf>,
}

impl Default for EventModelConfig {
    fn default() -> Self {
        EventModelConfig {
            word_emb_dim: 100,
            pos_emb_dim: 16,
            lower_hidden: 64,
            upper_hidden: 64,
            ff_dims: vec![128, 64],
            mode: TimexMode::WithTimex,
            baseline_no_lower_bilstm: false,
            epochs: 10,
            batch_size: 32,
            seed: 0,
            optimizer: AdamConfig::default(),
            timex_checkpoint: None,
            word_vectors: None,
        }
    }
}

impl EventModelConfig {
    pub fn validate(&self) -> Result<(), EventModelError> {
        let bad = |m: &str| Err(EventModelError::ConfigInvalid(m.to_string()));
        if self.word_emb_dim == 0 || self.pos_emb_dim == 0 || self.lower_hidden == 0 || self.upper_hidden == 0 {
            return bad("layer dimensions must be positive");
        }
        if self.ff_dims.contains(&0) {
            return bad("ff_dims must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        Ok(())
    }
}

/// String to id map with UNK at 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocab {
    items: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl Vocab {
    pub const UNK: usize = 0;
    pub const UNK_TOKEN: &'static str = "<unk>";

    /// Every distinct item in first-seen order, UNK first.
    pub fn build<'a>(items: impl IntoIterator<Item = &'a str>) -> Self {
        let mut v = Vocab { items: vec![Self::UNK_TOKEN.to_string()], index: HashMap::new() };
        v.index.insert(Self::UNK_TOKEN.to_string(), 0);
        for it in items {
            if !v.index.contains_key(it) {
                v.index.insert(it.to_string(), v.items.len());
                v.items.push(it.to_string());
            }
        }
        v
    }

    fn reindex(&mut self) {
        self.index = self.items.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
    }

    pub fn id(&self, item: &str) -> usize {
        self.index.get(item).copied().unwrap_or(Self::UNK)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }
}

/// Token ids and fixed timex features of one sentence.
#[derive(Debug, Clone)]
pub struct PreparedSentence {
    pub words: Vec<usize>,
    pub pos: Vec<usize>,
    pub timex: Option<Tensor>,
}

#[derive(Debug, Clone)]
pub struct PreparedPair {
    pub s1: usize,
    pub s2: usize,
    pub path1: Vec<usize>,
    pub path2: Vec<usize>,
    pub label: usize,
}

#[derive(Debug, Clone)]
pub struct PreparedDoc {
    pub sentences: Vec<PreparedSentence>,
    pub pairs: Vec<PreparedPair>,
}

#[derive(Debug, Clone)]
pub struct EventModel {
    config: EventModelConfig,
    words: Vocab,
    tags: Vocab,
    store: ParamStore,
    word_emb: Embedding,
    pos_emb: Embedding,
    lower: Option<BiLstm>,
    upper: BiLstm,
    ff: FeedForward,
    timex: Option<Arc<TimexModel>>,
    timex_dim: usize,
}

struct SentenceCache {
    input: Tensor,
    lower: Option<BiLstmCache>,
    states: Tensor,
}

impl EventModel {
    pub const N_LABELS: usize = 4;

    /// Builds vocabularies from `train` and initialises parameters.
    pub fn new(config: EventModelConfig, train: &[AnnotatedDocument], timex: Option<Arc<TimexModel>>) -> Result<Self, EventModelError> {
        let tokens = || train.iter().flat_map(|d| &d.sentences).flat_map(|s| &s.tokens);
        let words = Vocab::build(tokens().map(|t| t.word.as_str()));
        let tags = Vocab::build(tokens().map(|t| t.pos.as_str()));
        Self::with_vocabs(config, words, tags, timex)
    }

    fn with_vocabs(config: EventModelConfig, words: Vocab, tags: Vocab, timex: Option<Arc<TimexModel>>) -> Result<Self, EventModelError> {
        config.validate()?;
        let timex = match config.mode {
            TimexMode::WithTimex => Some(timex.ok_or(EventModelError::ModeMismatch)?),
            _ => None,
        };
        let timex_dim = timex.as_ref().map_or(0, |t| t.embedding_dim());
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut store = ParamStore::new();
        let word_emb = Embedding::new(&mut store, "event.word_emb", words.len(), config.word_emb_dim, &mut rng);
        let pos_emb = Embedding::new(&mut store, "event.pos_emb", tags.len(), config.pos_emb_dim, &mut rng);
        let input_dim = config.word_emb_dim + config.pos_emb_dim + timex_dim;
        let (lower, upper_in) = if config.baseline_no_lower_bilstm {
            (None, input_dim)
        } else {
            let l = BiLstm::new(&mut store, "event.lower", input_dim, config.lower_hidden, &mut rng);
            (Some(l), l.output_dim())
        };
        let upper = BiLstm::new(&mut store, "event.upper", upper_in, config.upper_hidden, &mut rng);
        let ff = FeedForward::new(&mut store, "event.ff", 2 * upper.output_dim(), &config.ff_dims, Self::N_LABELS, &mut rng);
        let mut model = EventModel { config, words, tags, store, word_emb, pos_emb, lower, upper, ff, timex, timex_dim };
        if let Some(path) = model.config.word_vectors.clone() {
            model.load_word_vectors(&path)?;
        }
        Ok(model)
    }

    pub fn config(&self) -> &EventModelConfig {
        &self.config
    }

    pub fn params(&self) -> &ParamStore {
        &self.store
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    pub fn input_dim(&self) -> usize {
        self.config.word_emb_dim + self.config.pos_emb_dim + self.timex_dim
    }

    pub fn word_vocab(&self) -> &Vocab {
        &self.words
    }

    /// Overwrites embedding rows of in-vocabulary words from a whitespace-separated text file.
    pub fn load_word_vectors(&mut self, path: &Path) -> Result<usize, EventModelError> {
        let file_err = |message: String| EventModelError::File { path: path.to_path_buf(), message };
        let text = std::fs::read_to_string(path).map_err(|e| file_err(e.to_string()))?;
        let dim = self.config.word_emb_dim;
        let mut loaded = 0;
        for (i, line) in text.lines().enumerate() {
            let mut parts = line.split_whitespace();
            let Some(word) = parts.next() else { continue };
            let values: Vec<f32> = parts
                .map(|p| p.parse::<f32>().map_err(|e| file_err(format!("line {}: {e}", i + 1))))
                .collect::<Result<_, _>>()?;
            if values.len() != dim {
                return Err(file_err(format!("line {}: expected {dim} values, got {}", i + 1, values.len())));
            }
            let id = self.words.id(word);
            if id != Vocab::UNK {
                self.store.get_mut(self.word_emb.table).row_mut(id).copy_from_slice(&values);
                loaded += 1;
            }
        }
        Ok(loaded)
    }

    fn prepare_sentence(&self, s: &Sentence, cache: &mut HashMap<String, Vec<f32>>) -> Result<PreparedSentence, EventModelError> {
        let mut words: Vec<usize> = s.tokens.iter().map(|t| self.words.id(&t.word)).collect();
        let pos = s.tokens.iter().map(|t| self.tags.id(&t.pos)).collect();
        for (k, span) in s.timex_spans.iter().enumerate() {
            check_span(s, k, span)?;
        }
        if self.config.mode == TimexMode::MaskedTimex {
            for span in &s.timex_spans {
                words[span.start..span.end].fill(Vocab::UNK);
            }
        }
        let timex = match &self.timex {
            Some(tm) => {
                let assign = broadcast_assignment(s)?;
                let mut vectors = Vec::with_capacity(s.timex_spans.len());
                for span in &s.timex_spans {
                    let text = s.span_text(span);
                    if !cache.contains_key(&text) {
                        let v = tm.embed(&text)?.vector;
                        cache.insert(text.clone(), v);
                    }
                    vectors.push(cache[&text].clone());
                }
                let mut t = Tensor::zeros(&[s.len(), self.timex_dim]);
                for (i, a) in assign.iter().enumerate() {
                    if let Some(k) = a {
                        t.row_mut(i).copy_from_slice(&vectors[*k]);
                    }
                }
                Some(t)
            }
            None => None,
        };
        Ok(PreparedSentence { words, pos, timex })
    }

    /// Resolves ids, timex features and dependency paths for every pair of `doc`.
    pub fn prepare(&self, doc: &AnnotatedDocument) -> Result<PreparedDoc, EventModelError> {
        doc.validate()?;
        let mut cache = HashMap::new();
        let sentences = doc.sentences.iter().map(|s| self.prepare_sentence(s, &mut cache)).collect::<Result<_, _>>()?;
        let mut pairs = Vec::with_capacity(doc.pairs.len());
        for p in &doc.pairs {
            let (path1, path2) = if p.e1.sentence == p.e2.sentence {
                let s = &doc.sentences[p.e1.sentence];
                (dep_path(s, p.e1.token, Some(p.e2.token))?, dep_path(s, p.e2.token, Some(p.e1.token))?)
            } else {
                (
                    dep_path(&doc.sentences[p.e1.sentence], p.e1.token, None)?,
                    dep_path(&doc.sentences[p.e2.sentence], p.e2.token, None)?,
                )
            };
            pairs.push(PreparedPair { s1: p.e1.sentence, s2: p.e2.sentence, path1, path2, label: p.label.index() });
        }
        Ok(PreparedDoc { sentences, pairs })
    }

    pub fn prepare_all(&self, docs: &[AnnotatedDocument]) -> Result<Vec<PreparedDoc>, EventModelError> {
        parallel::map(docs, |d| self.prepare(d)).into_iter().collect()
    }

    /// The `[v_w; v_p; v_t]` rows of one sentence.
    pub fn input_features(&self, store: &ParamStore, s: &PreparedSentence) -> Result<Tensor, EventModelError> {
        let (dw, dp) = (self.config.word_emb_dim, self.config.pos_emb_dim);
        let mut x = Tensor::zeros(&[s.words.len(), self.input_dim()]);
        for t in 0..s.words.len() {
            let row = x.row_mut(t);
            row[..dw].copy_from_slice(self.word_emb.lookup(store, s.words[t])?);
            row[dw..dw + dp].copy_from_slice(self.pos_emb.lookup(store, s.pos[t])?);
            if let Some(tx) = &s.timex {
                row[dw + dp..].copy_from_slice(tx.row(t));
            }
        }
        Ok(x)
    }

    fn encode_sentence(&self, store: &ParamStore, s: &PreparedSentence) -> Result<SentenceCache, EventModelError> {
        let input = self.input_features(store, s)?;
        match &self.lower {
            Some(l) => {
                let (states, cache) = l.forward(store, &input)?;
                Ok(SentenceCache { input, lower: Some(cache), states })
            }
            None => Ok(SentenceCache { states: input.clone(), input, lower: None }),
        }
    }

    fn backward_sentence(&self, store: &ParamStore, grads: &mut GradStore, s: &PreparedSentence, cache: &SentenceCache, d_states: &Tensor) {
        let d_input = match (&self.lower, &cache.lower) {
            (Some(l), Some(c)) => l.backward(store, grads, &cache.input, c, d_states),
            _ => d_states.clone(),
        };
        let (dw, dp) = (self.config.word_emb_dim, self.config.pos_emb_dim);
        for t in 0..s.words.len() {
            let row = d_input.row(t);
            self.word_emb.backward(grads, s.words[t], &row[..dw]);
            self.pos_emb.backward(grads, s.pos[t], &row[dw..dw + dp]);
        }
    }

    fn gather(states: &Tensor, path: &[usize]) -> Tensor {
        let mut out = Tensor::zeros(&[path.len(), states.cols()]);
        for (i, &k) in path.iter().enumerate() {
            out.row_mut(i).copy_from_slice(states.row(k));
        }
        out
    }

    /// Loss of one pair against `store`, accumulating gradients when asked. Returns loss and probabilities.
    pub fn loss(
        &self,
        store: &ParamStore,
        doc: &PreparedDoc,
        pair: usize,
        grads: Option<&mut GradStore>,
    ) -> Result<(f64, Vec<f32>), EventModelError> {
        let p = &doc.pairs[pair];
        let c1 = self.encode_sentence(store, &doc.sentences[p.s1])?;
        let c2 = if p.s2 == p.s1 { None } else { Some(self.encode_sentence(store, &doc.sentences[p.s2])?) };
        let states2 = c2.as_ref().map_or(&c1.states, |c| &c.states);
        let path1 = Self::gather(&c1.states, &p.path1);
        let path2 = Self::gather(states2, &p.path2);
        let (u1, uc1) = self.upper.forward(store, &path1)?;
        let (u2, uc2) = self.upper.forward(store, &path2)?;
        let h1 = u1.row(u1.rows() - 1);
        let h2 = u2.row(u2.rows() - 1);
        let z = [h1, h2].concat();
        let (logits, ff_cache) = self.ff.forward(store, &z)?;
        let ce = softmax_cross_entropy(&logits, p.label)?;
        if let Some(grads) = grads {
            let dz = self.ff.backward(store, grads, &ff_cache, &ce.dlogits);
            let half = self.upper.output_dim();
            let mut d_states1 = Tensor::zeros(c1.states.shape());
            let mut d_states2 = c2.as_ref().map(|c| Tensor::zeros(c.states.shape()));
            for (which, (path, u, uc, dh)) in
                [(&p.path1, &u1, &uc1, &dz[..half]), (&p.path2, &u2, &uc2, &dz[half..])].into_iter().enumerate()
            {
                let mut d_u = Tensor::zeros(u.shape());
                d_u.row_mut(u.rows() - 1).copy_from_slice(dh);
                let input = if which == 0 { &path1 } else { &path2 };
                let d_path = self.upper.backward(store, grads, input, uc, &d_u);
                let target = match (which, d_states2.as_mut()) {
                    (1, Some(d2)) => d2,
                    _ => &mut d_states1,
                };
                for (i, &k) in path.iter().enumerate() {
                    crate::nn::kernels::add_into(d_path.row(i), target.row_mut(k));
                }
            }
            self.backward_sentence(store, grads, &doc.sentences[p.s1], &c1, &d_states1);
            if let (Some(c2), Some(d2)) = (&c2, &d_states2) {
                self.backward_sentence(store, grads, &doc.sentences[p.s2], c2, d2);
            }
        }
        Ok((ce.loss, ce.probs))
    }

    /// Label probabilities for pair `pair` of a prepared document.
    pub fn forward(&self, doc: &PreparedDoc, pair: usize) -> Result<Vec<f32>, EventModelError> {
        let (_, probs) = self.loss(&self.store, doc, pair, None)?;
        Ok(probs)
    }

    pub fn classify(&self, doc: &AnnotatedDocument, pair: usize) -> Result<Vec<f32>, EventModelError> {
        let prepared = self.prepare(doc)?;
        if pair >= prepared.pairs.len() {
            return Err(NnError::BadIndex { index: pair, len: prepared.pairs.len() }.into());
        }
        self.forward(&prepared, pair)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSidecar {
    pub config: EventModelConfig,
    pub words: Vec<String>,
    pub tags: Vec<String>,
    pub labels: Vec<String>,
    pub version: String,
}

impl EventModel {
    pub fn sidecar(&self) -> EventSidecar {
        EventSidecar {
            config: self.config.clone(),
            words: self.words.items.clone(),
            tags: self.tags.items.clone(),
            labels: EventLabel::ALL.iter().map(|l| l.name().to_string()).collect(),
            version: crate::VERSION.to_string(),
        }
    }

    pub fn save(&self, checkpoint: &Path, force: bool) -> Result<(), EventModelError> {
        let json = serde_json::to_string_pretty(&self.sidecar()).expect("sidecar serializes") + "\n";
        corpus_io::save_checkpoint(checkpoint, &self.store, force)?;
        corpus_io::write_atomic(&sidecar_path(checkpoint), json.as_bytes(), force)?;
        Ok(())
    }

    /// Restores a model from checkpoint and sidecar. `with_timex` models need the frozen timex model.
    pub fn load(checkpoint: &Path, timex: Option<Arc<TimexModel>>) -> Result<Self, EventModelError> {
        let side = sidecar_path(checkpoint);
        let file_err = |message: String| EventModelError::File { path: side.clone(), message };
        let text = std::fs::read_to_string(&side).map_err(|e| file_err(e.to_string()))?;
        let sc: EventSidecar = serde_json::from_str(&text).map_err(|e| file_err(e.to_string()))?;
        let mut words = Vocab { items: sc.words, index: HashMap::new() };
        let mut tags = Vocab { items: sc.tags, index: HashMap::new() };
        words.reindex();
        tags.reindex();
        let mut config = sc.config;
        config.word_vectors = None;
        let mut model = Self::with_vocabs(config, words, tags, timex)?;
        corpus_io::load_checkpoint_into(checkpoint, &mut model.store)?;
        Ok(model)
    }
}

/// Trains on every pair of `train`, keeping the parameters with the best dev accuracy.
/// The timex model, when present, stays frozen.
pub fn train_events(
    train: &[AnnotatedDocument],
    dev: &[AnnotatedDocument],
    config: &EventModelConfig,
    timex: Option<Arc<TimexModel>>,
) -> Result<(EventModel, Vec<EpochMetrics>), EventModelError> {
    train_events_with(train, dev, config, timex, |_| {})
}

pub fn train_events_with(
    train: &[AnnotatedDocument],
    dev: &[AnnotatedDocument],
    config: &EventModelConfig,
    timex: Option<Arc<TimexModel>>,
    mut on_epoch: impl FnMut(&EpochMetrics),
) -> Result<(EventModel, Vec<EpochMetrics>), EventModelError> {
    let mut model = EventModel::new(config.clone(), train, timex)?;
    let train_prep = model.prepare_all(train)?;
    let dev_prep = model.prepare_all(dev)?;
    let examples: Vec<(usize, usize)> =
        train_prep.iter().enumerate().flat_map(|(d, doc)| (0..doc.pairs.len()).map(move |p| (d, p))).collect();
    let dev_count: usize = dev_prep.iter().map(|d| d.pairs.len()).sum();
    if examples.is_empty() || dev_count == 0 {
        return Err(EventModelError::ConfigInvalid("train and dev sets need at least one pair".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x5eed));
    let mut adam = AdamState::new(&model.store, config.optimizer);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, ParamStore)> = None;
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let (mut epoch_loss, mut epoch_correct) = (0.0, 0);
        for batch_idx in order.chunks(config.batch_size) {
            let batch: Vec<&(usize, usize)> = batch_idx.iter().map(|&i| &examples[i]).collect();
            let frozen = &model;
            let (mut grads, loss, correct) = batch_gradients(&model.store, &batch, GRAD_CHUNK, |&(d, p), g| {
                let (l, probs) = frozen.loss(&frozen.store, &train_prep[d], p, Some(g)).expect("prepared pairs are valid");
                (l, argmax(&probs) == train_prep[d].pairs[p].label)
            });
            grads.scale(1.0 / batch.len() as f32);
            adam.step(&mut model.store, &mut grads)?;
            epoch_loss += loss;
            epoch_correct += correct;
        }
        let (gold, pred, _) = predict_prepared(&model, &dev_prep)?;
        let metrics = EpochMetrics {
            epoch,
            train_loss: epoch_loss / examples.len() as f64,
            train_accuracy: epoch_correct as f64 / examples.len() as f64,
            dev_accuracy: crate::metrics::accuracy(&gold, &pred),
        };
        on_epoch(&metrics);
        if best.as_ref().is_none_or(|(b, _)| metrics.dev_accuracy > *b) {
            best = Some((metrics.dev_accuracy, model.store.clone()));
        }
        history.push(metrics);
    }
    if let Some((_, store)) = best {
        model.store = store;
    }
    Ok((model, history))
}

type Predictions = (Vec<usize>, Vec<usize>, Vec<Vec<f32>>);

fn predict_prepared(model: &EventModel, docs: &[PreparedDoc]) -> Result<Predictions, EventModelError> {
    let per_doc = parallel::map(docs, |d| -> Result<Vec<(usize, Vec<f32>)>, EventModelError> {
        (0..d.pairs.len()).map(|p| Ok((d.pairs[p].label, model.forward(d, p)?))).collect()
    });
    let (mut gold, mut pred, mut probs) = (Vec::new(), Vec::new(), Vec::new());
    for r in per_doc {
        for (g, pr) in r? {
            gold.push(g);
            pred.push(argmax(&pr));
            probs.push(pr);
        }
    }
    Ok((gold, pred, probs))
}

/// Gold and predicted label indices plus probabilities over every pair, in document order.
pub fn predict_events(model: &EventModel, docs: &[AnnotatedDocument]) -> Result<Predictions, EventModelError> {
    predict_prepared(model, &model.prepare_all(docs)?)
}

pub fn evaluate_events(model: &EventModel, docs: &[AnnotatedDocument]) -> Result<ClassificationReport, EventModelError> {
    let (gold, pred, _) = predict_events(model, docs)?;
    let names = EventLabel::ALL.iter().map(|l| l.name().to_string()).collect();
    Ok(ClassificationReport::from_predictions(names, &gold, &pred))
}

/// One record per pair; ids are `<doc_id>:<pair index>`.
pub fn prediction_records(model: &EventModel, docs: &[AnnotatedDocument]) -> Result<Vec<PredictionRecord>, EventModelError> {
    let (gold, pred, probs) = predict_events(model, docs)?;
    let ids = docs.iter().flat_map(|d| (0..d.pairs.len()).map(move |k| format!("{}:{k}", d.doc_id)));
    Ok(ids
        .zip(gold.into_iter().zip(pred).zip(probs))
        .map(|(pair_id, ((g, p), probs))| PredictionRecord {
            pair_id,
            gold: EventLabel::ALL[g].name().to_string(),
            pred: EventLabel::ALL[p].name().to_string(),
            probs,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::{AnnotatedToken, ROOT};

    fn tok(word: &str, pos: &str, head: i32, rel: &str) -> AnnotatedToken {
        AnnotatedToken::new(word, pos, head, rel)
    }

    /// "He remained there for the whole of 1997 ."
    fn remained() -> Sentence {
        Sentence {
            tokens: vec![
                tok("He", "PRP", 1, "nsubj"),
                tok("remained", "VBD", ROOT, "root"),
                tok("there", "RB", 1, "advmod"),
                tok("for", "IN", 5, "case"),
                tok("the", "DT", 5, "det"),
                tok("whole", "NN", 1, "obl"),
                tok("of", "IN", 7, "case"),
                tok("1997", "CD", 5, "nmod"),
                tok(".", ".", 1, "punct"),
            ],
            timex_spans: vec![TimexSpan { start: 7, end: 8, head: 7 }],
            events: vec![1],
        }
    }

    #[test]
    fn broadcast_reaches_governing_verb() {
        let s = remained();
        assert_eq!(broadcast_target(&s, &s.timex_spans[0]), Some(1));
        let a = broadcast_assignment(&s).unwrap();
        assert_eq!(a[1], Some(0));
        assert_eq!(a[7], Some(0));
        assert_eq!(a.iter().filter(|x| x.is_some()).count(), 2);
    }

    #[test]
    fn broadcast_without_verb_stays_on_span() {
        let mut s = remained();
        s.tokens[1].pos = "NN".into();
        assert_eq!(broadcast_target(&s, &s.timex_spans[0]), None);
        let a = broadcast_assignment(&s).unwrap();
        assert_eq!(a.iter().filter(|x| x.is_some()).count(), 1);
        s.timex_spans.clear();
        assert!(broadcast_assignment(&s).unwrap().iter().all(Option::is_none));
    }

    #[test]
    fn bad_span_rejected() {
        let mut s = remained();
        s.timex_spans[0] = TimexSpan { start: 7, end: 12, head: 7 };
        assert!(matches!(broadcast_assignment(&s), Err(EventModelError::SpanOutOfBounds { .. })));
    }

    #[test]
    fn paths() {
        let s = remained();
        assert_eq!(dep_path(&s, 1, Some(7)).unwrap(), vec![1]);
        assert_eq!(dep_path(&s, 7, Some(1)).unwrap(), vec![7, 5, 1]);
        assert_eq!(dep_path(&s, 7, None).unwrap(), vec![7, 5, 1]);
        assert_eq!(dep_path(&s, 3, Some(7)).unwrap(), vec![3, 5]);
        let mut cyclic = s.clone();
        cyclic.tokens[1].head = 5;
        assert!(matches!(dep_path(&cyclic, 7, None), Err(EventModelError::Document(DocumentError::MalformedTree { .. }))));
    }

    #[test]
    fn with_timex_needs_model() {
        let cfg = EventModelConfig { mode: TimexMode::WithTimex, ..Default::default() };
        assert!(matches!(EventModel::new(cfg, &[], None), Err(EventModelError::ModeMismatch)));
        let cfg = EventModelConfig { mode: TimexMode::MaskedTimex, ..Default::default() };
        assert!(EventModel::new(cfg, &[], None).is_ok());
    }
}
