//! Dataset materialization: synthetic timex pairs and the synthetic event corpus.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::document::{AnnotatedDocument, AnnotatedToken, EventLabel, EventRef, PairRecord, Sentence, TimexSpan, ROOT};
use crate::grammar::{TimexGrammar, TimexLabel, TimexPairExample, TimexSample};
use crate::normalize::{Granularity, ReferenceAnchor};
use crate::parallel;

/// Examples generated per independent random stream.
pub const SHARD_SIZE: usize = 1024;

/// Generator for shard `shard` of a run seeded with `seed`; independent of thread count.
pub fn shard_rng(seed: u64, shard: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    rng
}

pub fn generate_timex_pairs(n: usize, seed: u64, explicit_fraction: f64) -> Vec<TimexPairExample> {
    generate_timex_pairs_with(&TimexGrammar::default(), n, seed, explicit_fraction)
}

pub fn generate_timex_pairs_with(
    grammar: &TimexGrammar,
    n: usize,
    seed: u64,
    explicit_fraction: f64,
) -> Vec<TimexPairExample> {
    assert!((0.0..=1.0).contains(&explicit_fraction), "explicit_fraction must lie in [0, 1]");
    let shards = n.div_ceil(SHARD_SIZE);
    parallel::map_range(shards, |s| {
        let mut rng = shard_rng(seed, s as u64);
        let len = SHARD_SIZE.min(n - s * SHARD_SIZE);
        (0..len).map(|_| grammar.sample_pair(&mut rng, explicit_fraction)).collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassBalance {
    pub before: usize,
    pub after: usize,
    pub simultaneous: usize,
}

impl ClassBalance {
    pub fn of(pairs: &[TimexPairExample]) -> Self {
        let mut b = ClassBalance { before: 0, after: 0, simultaneous: 0 };
        for p in pairs {
            match p.label {
                TimexLabel::Before => b.before += 1,
                TimexLabel::After => b.after += 1,
                TimexLabel::Simultaneous => b.simultaneous += 1,
            }
        }
        b
    }

    pub fn total(&self) -> usize {
        self.before + self.after + self.simultaneous
    }
}

/// Generation anchor shared by all synthetic data.
pub fn default_anchor() -> ReferenceAnchor {
    ReferenceAnchor::default()
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DatasetError {
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
}

/// Word lists the event corpus draws from. Multi-word entries are split on
/// whitespace; the last word heads the phrase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventVocab {
    pub subjects: Vec<String>,
    pub verbs: Vec<String>,
    pub objects: Vec<String>,
    /// Nouns governing a timex in "during the <noun> of <timex>".
    pub frame_nouns: Vec<String>,
}

fn words(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

impl Default for EventVocab {
    fn default() -> Self {
        EventVocab {
            subjects: words(&[
                "the ministry", "the company", "the government", "the council", "the union", "the bank",
                "the army", "the court", "the board", "the agency", "the committee", "the president",
                "the mayor", "the team", "the group", "Israel", "Japan", "Brazil", "Reuters", "he", "she",
                "they",
            ]),
            verbs: words(&[
                "suspended", "restored", "visited", "opened", "closed", "signed", "launched", "cancelled",
                "announced", "approved", "rejected", "acquired", "sold", "built", "expanded", "reduced",
                "raised", "ended", "started", "won", "lost", "watched", "freed", "arrested",
            ]),
            objects: words(&[
                "aid", "talks", "the plant", "the deal", "the border", "the office", "the program",
                "the contract", "the embassy", "the factory", "the project", "the plan", "the policy",
                "the mine", "the route", "the museum", "the bridge", "the airport", "its stake", "the tax",
            ]),
            frame_nouns: words(&["crisis", "war", "election", "summit", "strike", "boom", "recession"]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticEventCorpusConfig {
    pub n_examples: usize,
    pub vocab: EventVocab,
    /// Share of documents whose two events sit in adjacent sentences.
    pub cross_sentence_fraction: f64,
    /// Must be 1.0: every label is decided by the two timexes.
    pub timex_fraction_determining: f64,
    pub seed: u64,
    pub anchor: ReferenceAnchor,
}

impl Default for SyntheticEventCorpusConfig {
    fn default() -> Self {
        SyntheticEventCorpusConfig {
            n_examples: 4000,
            vocab: EventVocab::default(),
            cross_sentence_fraction: 0.5,
            timex_fraction_determining: 1.0,
            seed: 0,
            anchor: ReferenceAnchor::default(),
        }
    }
}

impl SyntheticEventCorpusConfig {
    pub fn validate(&self) -> Result<(), DatasetError> {
        let bad = |m: &str| Err(DatasetError::ConfigInvalid(m.to_string()));
        if self.timex_fraction_determining != 1.0 {
            return bad("timex_fraction_determining must be 1.0");
        }
        if !(0.0..=1.0).contains(&self.cross_sentence_fraction) {
            return bad("cross_sentence_fraction must lie in [0, 1]");
        }
        let v = &self.vocab;
        let lists = [&v.subjects, &v.verbs, &v.objects, &v.frame_nouns];
        if lists.iter().any(|l| l.is_empty() || l.iter().any(|w| w.split_whitespace().next().is_none())) {
            return bad("vocabulary lists must be nonempty and contain no blank entries");
        }
        Ok(())
    }
}

/// Splits a rendered timex into tokens, detaching commas. Returns the tokens
/// and the offset of the head token (the month name when present).
pub fn tokenize_timex(surface: &str) -> (Vec<String>, usize) {
    let mut toks = Vec::new();
    for w in surface.split_whitespace() {
        match w.strip_suffix(',') {
            Some(stem) if !stem.is_empty() => {
                toks.push(stem.to_string());
                toks.push(",".to_string());
            }
            _ => toks.push(w.to_string()),
        }
    }
    let head = toks.iter().position(|t| t.starts_with(|c: char| c.is_ascii_alphabetic())).unwrap_or(0);
    (toks, head)
}

struct SentenceBuilder {
    tokens: Vec<AnnotatedToken>,
    spans: Vec<TimexSpan>,
}

impl SentenceBuilder {
    fn new() -> Self {
        SentenceBuilder { tokens: Vec::new(), spans: Vec::new() }
    }

    fn push(&mut self, word: &str, pos: &str, deprel: &str) -> usize {
        self.tokens.push(AnnotatedToken::new(word, pos, ROOT, deprel));
        self.tokens.len() - 1
    }

    fn attach(&mut self, child: usize, head: usize) {
        self.tokens[child].head = head as i32;
    }

    /// Pushes a noun phrase; returns its head index.
    fn phrase(&mut self, text: &str, deprel: &str) -> usize {
        let ws: Vec<&str> = text.split_whitespace().collect();
        let mut mods = Vec::new();
        for w in &ws[..ws.len() - 1] {
            let pos = if matches!(w.to_ascii_lowercase().as_str(), "the" | "a" | "an") {
                "DT"
            } else if *w == "its" {
                "PRP$"
            } else {
                "JJ"
            };
            let rel = match pos {
                "DT" => "det",
                "PRP$" => "nmod:poss",
                _ => "amod",
            };
            mods.push(self.push(w, pos, rel));
        }
        let last = ws[ws.len() - 1];
        let pos = if matches!(last, "he" | "she" | "they" | "it") {
            "PRP"
        } else if last.starts_with(|c: char| c.is_ascii_uppercase()) {
            "NNP"
        } else {
            "NN"
        };
        let head = self.push(last, pos, deprel);
        for m in mods {
            self.attach(m, head);
        }
        head
    }

    /// Pushes the timex tokens; returns the head index.
    fn timex(&mut self, sample: &TimexSample, deprel: &str) -> usize {
        let (toks, head_off) = tokenize_timex(&sample.surface);
        let start = self.tokens.len();
        for (k, t) in toks.iter().enumerate() {
            let pos = if t == "," {
                ","
            } else if t.starts_with(|c: char| c.is_ascii_alphabetic()) {
                "NNP"
            } else {
                "CD"
            };
            let rel = if k == head_off {
                deprel
            } else if t == "," {
                "punct"
            } else {
                "nummod"
            };
            self.push(t, pos, rel);
        }
        let head = start + head_off;
        for k in start..self.tokens.len() {
            if k != head {
                self.attach(k, head);
            }
        }
        self.spans.push(TimexSpan { start, end: self.tokens.len(), head });
        head
    }

    fn finish(self, events: Vec<usize>) -> Sentence {
        Sentence { tokens: self.tokens, timex_spans: self.spans, events }
    }
}

/// How a timex hangs off its clause verb.
#[derive(Clone, Copy)]
enum Attachment {
    /// "in 1990": timex head is an `obl` dependent of the verb.
    Direct,
    /// "during the crisis of 1990": timex head is `nmod` of a noun that is `obl` of the verb.
    Framed,
}

struct ClauseSpec<'a> {
    subject: Option<&'a str>,
    verb: &'a str,
    object: &'a str,
    timex: &'a TimexSample,
    attachment: Attachment,
    frame_noun: &'a str,
    fronted: bool,
}

fn preposition(sample: &TimexSample) -> &'static str {
    match sample.interval.granularity {
        Granularity::Day => "on",
        _ => "in",
    }
}

/// Pushes the timex phrase and returns the token that must attach to the verb.
fn timex_phrase(b: &mut SentenceBuilder, c: &ClauseSpec) -> usize {
    match c.attachment {
        Attachment::Direct => {
            let case = b.push(preposition(c.timex), "IN", "case");
            let head = b.timex(c.timex, "obl");
            b.attach(case, head);
            head
        }
        Attachment::Framed => {
            let during = b.push("during", "IN", "case");
            let det = b.push("the", "DT", "det");
            let noun = b.push(c.frame_noun, "NN", "obl");
            let of = b.push("of", "IN", "case");
            let head = b.timex(c.timex, "nmod");
            b.attach(during, noun);
            b.attach(det, noun);
            b.attach(of, head);
            b.attach(head, noun);
            noun
        }
    }
}

/// Emits one clause and returns its verb index; `mark` is pushed before the subject.
fn clause(b: &mut SentenceBuilder, c: &ClauseSpec, mark: Option<(&str, &str, &str)>) -> usize {
    let mut pending = Vec::new();
    if let Some((w, pos, rel)) = mark {
        pending.push(b.push(w, pos, rel));
    }
    if c.fronted {
        pending.push(timex_phrase(b, c));
        pending.push(b.push(",", ",", "punct"));
    }
    if let Some(s) = c.subject {
        pending.push(b.phrase(s, "nsubj"));
    }
    let verb = b.push(c.verb, "VBD", "root");
    for p in pending {
        b.attach(p, verb);
    }
    let obj = b.phrase(c.object, "obj");
    b.attach(obj, verb);
    if !c.fronted {
        let t = timex_phrase(b, c);
        b.attach(t, verb);
    }
    verb
}

fn pick<'a, R: Rng + ?Sized>(rng: &mut R, list: &'a [String]) -> &'a str {
    list.choose(rng).expect("validated nonempty")
}

/// Lexical choices for one clause, drawn independently of the label.
struct ClauseDraw {
    subject: String,
    verb: String,
    object: String,
    attachment: Attachment,
    frame_noun: String,
    fronted: bool,
}

impl ClauseDraw {
    fn sample<R: Rng + ?Sized>(rng: &mut R, v: &EventVocab) -> Self {
        ClauseDraw {
            subject: pick(rng, &v.subjects).to_string(),
            verb: pick(rng, &v.verbs).to_string(),
            object: pick(rng, &v.objects).to_string(),
            attachment: if rng.gen_bool(0.25) { Attachment::Framed } else { Attachment::Direct },
            frame_noun: pick(rng, &v.frame_nouns).to_string(),
            fronted: rng.gen_bool(0.2),
        }
    }

    fn spec<'a>(&'a self, timex: &'a TimexSample, subject: Option<&'a str>, fronted: bool) -> ClauseSpec<'a> {
        ClauseSpec {
            subject,
            verb: &self.verb,
            object: &self.object,
            timex,
            attachment: self.attachment,
            frame_noun: &self.frame_noun,
            fronted,
        }
    }
}

fn sample_document<R: Rng + ?Sized>(
    rng: &mut R,
    grammar: &TimexGrammar,
    cfg: &SyntheticEventCorpusConfig,
    doc_id: String,
) -> AnnotatedDocument {
    let pair = loop {
        let p = grammar.sample_pair(rng, 1.0);
        if p.label != TimexLabel::Simultaneous {
            break p;
        }
    };
    let label = if pair.label == TimexLabel::Before { EventLabel::Before } else { EventLabel::After };
    let c1 = ClauseDraw::sample(rng, &cfg.vocab);
    let c2 = ClauseDraw::sample(rng, &cfg.vocab);

    let sentences = if rng.gen_bool(cfg.cross_sentence_fraction) {
        [(&c1, &pair.t1), (&c2, &pair.t2)]
            .into_iter()
            .map(|(c, t)| {
                let mut b = SentenceBuilder::new();
                let verb = clause(&mut b, &c.spec(t, Some(&c.subject), c.fronted), None);
                let p = b.push(".", ".", "punct");
                b.attach(p, verb);
                b.finish(vec![verb])
            })
            .collect()
    } else {
        let mut b = SentenceBuilder::new();
        let v1 = clause(&mut b, &c1.spec(&pair.t1, Some(&c1.subject), c1.fronted), None);
        let (v2, rel) = match rng.gen_range(0..3) {
            // "... and restored talks in 1994"
            0 => (clause(&mut b, &c2.spec(&pair.t2, None, false), Some(("and", "CC", "cc"))), "conj"),
            // "... , but it restored talks in 1994"
            1 => {
                let comma = b.push(",", ",", "punct");
                let v2 = clause(&mut b, &c2.spec(&pair.t2, Some("it"), false), Some(("but", "CC", "cc")));
                b.attach(comma, v2);
                (v2, "conj")
            }
            // "... when the court freed aid in 1994"
            _ => (clause(&mut b, &c2.spec(&pair.t2, Some(&c2.subject), false), Some(("when", "WRB", "mark"))), "advcl"),
        };
        b.tokens[v2].deprel = rel.to_string();
        b.attach(v2, v1);
        let p = b.push(".", ".", "punct");
        b.attach(p, v1);
        vec![b.finish(vec![v1, v2])]
    };
    let last = sentences.len() - 1;
    let e1 = EventRef { sentence: 0, token: sentences[0].events[0] };
    let e2 = EventRef { sentence: last, token: *sentences[last].events.last().expect("two events") };
    AnnotatedDocument { doc_id, sentences, pairs: vec![PairRecord { e1, e2, label }] }
}

/// Documents with one or two sentences and a single timex-decided event pair each.
pub fn generate_event_corpus(config: &SyntheticEventCorpusConfig) -> Result<Vec<AnnotatedDocument>, DatasetError> {
    config.validate()?;
    let grammar = TimexGrammar::new(config.anchor);
    let n = config.n_examples;
    let shards = n.div_ceil(SHARD_SIZE);
    Ok(parallel::map_range(shards, |s| {
        let mut rng = shard_rng(config.seed, s as u64);
        let len = SHARD_SIZE.min(n - s * SHARD_SIZE);
        (0..len)
            .map(|k| sample_document(&mut rng, &grammar, config, format!("doc{:06}", s * SHARD_SIZE + k)))
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect())
}
