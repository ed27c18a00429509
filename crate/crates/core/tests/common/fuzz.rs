//! Random records for serialization round trips.

use rand::seq::SliceRandom;
use rand::Rng;
use tempo_core::corpus_io::PredictionRecord;
use tempo_core::document::{AnnotatedDocument, AnnotatedToken, EventLabel, EventRef, PairRecord, Sentence, TimexSpan, ROOT};

const ALPHABET: &[char] = &['a', 'Z', '9', ' ', '"', '\\', '\n', '\t', '/', 'é', 'ß', '中', '🙂', '\u{7f}', '\u{1}', ','];

pub fn random_string<R: Rng>(rng: &mut R, max: usize) -> String {
    let n = rng.gen_range(0..=max);
    (0..n).map(|_| *ALPHABET.choose(rng).unwrap()).collect()
}

/// Parent array of a random rooted tree on `n` nodes.
pub fn random_tree<R: Rng>(rng: &mut R, n: usize) -> Vec<i32> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut heads = vec![ROOT; n];
    for k in 1..n {
        heads[order[k]] = order[rng.gen_range(0..k)] as i32;
    }
    heads
}

pub fn random_sentence<R: Rng>(rng: &mut R) -> Sentence {
    let n = rng.gen_range(1..25);
    let heads = random_tree(rng, n);
    let tokens = heads
        .iter()
        .map(|&h| AnnotatedToken {
            word: random_string(rng, 8),
            pos: ["VBD", "NN", "CD", "IN", "VERB", "x"].choose(rng).unwrap().to_string(),
            head: h,
            deprel: random_string(rng, 5),
        })
        .collect();
    let mut timex_spans = Vec::new();
    for _ in 0..rng.gen_range(0..3) {
        let start = rng.gen_range(0..n);
        let end = rng.gen_range(start + 1..=n);
        timex_spans.push(TimexSpan { start, end, head: rng.gen_range(start..end) });
    }
    let events = (0..rng.gen_range(0..3)).map(|_| rng.gen_range(0..n)).collect();
    Sentence { tokens, timex_spans, events }
}

pub fn random_document<R: Rng>(rng: &mut R, id: usize) -> AnnotatedDocument {
    let sentences: Vec<Sentence> = (0..rng.gen_range(1..4)).map(|_| random_sentence(rng)).collect();
    let mut pairs = Vec::new();
    for _ in 0..rng.gen_range(0..3) {
        let s1 = rng.gen_range(0..sentences.len());
        let s2 = (s1 + rng.gen_range(0..2)).min(sentences.len() - 1);
        let e = |rng: &mut R, s: usize| EventRef { sentence: s, token: rng.gen_range(0..sentences[s].len()) };
        let (e1, e2) = (e(rng, s1), e(rng, s2));
        pairs.push(PairRecord { e1, e2, label: *EventLabel::ALL.choose(rng).unwrap() });
    }
    AnnotatedDocument { doc_id: format!("{id}-{}", random_string(rng, 6)), sentences, pairs }
}

pub fn random_prediction<R: Rng>(rng: &mut R) -> PredictionRecord {
    let probs = (0..4)
        .map(|_| match rng.gen_range(0..4) {
            0 => f32::from_bits(rng.gen_range(1..0x0080_0000)),
            1 => 0.0,
            _ => rng.gen::<f32>() * 10f32.powi(rng.gen_range(-30..30)),
        })
        .collect();
    PredictionRecord {
        pair_id: random_string(rng, 12),
        gold: random_string(rng, 6),
        pred: random_string(rng, 6),
        probs,
    }
}
