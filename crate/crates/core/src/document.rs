//! Annotated documents: tokens with a dependency parse, timex spans, event
//! mentions and labelled event pairs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const ROOT: i32 = -1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DocumentError {
    #[error("{field}: {detail}")]
    Invalid { field: String, detail: String },
    #[error("malformed dependency tree in sentence {sentence}: {detail}")]
    MalformedTree { sentence: usize, detail: String },
}

fn invalid(field: impl Into<String>, detail: impl Into<String>) -> DocumentError {
    DocumentError::Invalid { field: field.into(), detail: detail.into() }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedToken {
    pub word: String,
    pub pos: String,
    /// 0-based index of the governing token, or [`ROOT`].
    pub head: i32,
    pub deprel: String,
}

impl AnnotatedToken {
    pub fn new(word: &str, pos: &str, head: i32, deprel: &str) -> Self {
        AnnotatedToken { word: word.into(), pos: pos.into(), head, deprel: deprel.into() }
    }

    pub fn is_verb(&self) -> bool {
        is_verb_pos(&self.pos)
    }
}

/// Penn `VB*` tags or the universal `VERB` tag.
pub fn is_verb_pos(pos: &str) -> bool {
    pos.starts_with("VB") || pos == "VERB"
}

/// Token range `[start, end)` of one timex; `head` is a sentence token index inside the range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimexSpan {
    pub start: usize,
    pub end: usize,
    pub head: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub tokens: Vec<AnnotatedToken>,
    #[serde(default)]
    pub timex_spans: Vec<TimexSpan>,
    /// Token indices of event mentions.
    #[serde(default)]
    pub events: Vec<usize>,
}

impl Sentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn span_text(&self, span: &TimexSpan) -> String {
        detokenize(self.tokens[span.start..span.end].iter().map(|t| t.word.as_str()))
    }

    pub fn text(&self) -> String {
        detokenize(self.tokens.iter().map(|t| t.word.as_str()))
    }

    /// Parent of token `i`, `None` at the root.
    pub fn parent(&self, i: usize) -> Option<usize> {
        usize::try_from(self.tokens[i].head).ok()
    }

    /// Checks the dependency tree is single rooted, acyclic and in bounds.
    pub fn check_tree(&self, sentence: usize) -> Result<(), DocumentError> {
        let malformed = |detail: String| DocumentError::MalformedTree { sentence, detail };
        let n = self.tokens.len();
        if n == 0 {
            return Err(malformed("empty sentence".into()));
        }
        let mut roots = 0;
        for (i, t) in self.tokens.iter().enumerate() {
            if t.head == ROOT {
                roots += 1;
            } else if t.head < 0 || t.head as usize >= n {
                return Err(malformed(format!("token {i} has head {} outside the sentence", t.head)));
            } else if t.head as usize == i {
                return Err(malformed(format!("token {i} heads itself")));
            }
        }
        if roots != 1 {
            return Err(malformed(format!("{roots} root tokens")));
        }
        for start in 0..n {
            let mut cur = start;
            let mut steps = 0;
            while let Some(p) = self.parent(cur) {
                cur = p;
                steps += 1;
                if steps > n {
                    return Err(malformed(format!("cycle through token {start}")));
                }
            }
        }
        Ok(())
    }
}

/// Joins tokens with single spaces, attaching commas to the preceding token.
pub fn detokenize<'a>(words: impl IntoIterator<Item = &'a str>) -> String {
    let mut out = String::new();
    for w in words {
        if !out.is_empty() && w != "," {
            out.push(' ');
        }
        out.push_str(w);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EventRef {
    pub sentence: usize,
    pub token: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventLabel {
    Before,
    After,
    Vague,
    Simultaneous,
}

impl EventLabel {
    pub const ALL: [EventLabel; 4] = [EventLabel::Before, EventLabel::After, EventLabel::Vague, EventLabel::Simultaneous];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            EventLabel::Before => "before",
            EventLabel::After => "after",
            EventLabel::Vague => "vague",
            EventLabel::Simultaneous => "simultaneous",
        }
    }

    pub fn swapped(self) -> Self {
        match self {
            EventLabel::Before => EventLabel::After,
            EventLabel::After => EventLabel::Before,
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord {
    pub e1: EventRef,
    pub e2: EventRef,
    pub label: EventLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedDocument {
    pub doc_id: String,
    pub sentences: Vec<Sentence>,
    #[serde(default)]
    pub pairs: Vec<PairRecord>,
}

impl AnnotatedDocument {
    pub fn token(&self, e: EventRef) -> &AnnotatedToken {
        &self.sentences[e.sentence].tokens[e.token]
    }

    /// Checks trees, span and event bounds, and that paired events sit in the same or adjacent sentences.
    pub fn validate(&self) -> Result<(), DocumentError> {
        for (si, s) in self.sentences.iter().enumerate() {
            s.check_tree(si)?;
            for (k, span) in s.timex_spans.iter().enumerate() {
                let field = || format!("sentences[{si}].timex_spans[{k}]");
                if span.start >= span.end || span.end > s.len() {
                    return Err(invalid(field(), format!("range {}..{} invalid for {} tokens", span.start, span.end, s.len())));
                }
                if !(span.start..span.end).contains(&span.head) {
                    return Err(invalid(field(), format!("head {} outside its range", span.head)));
                }
            }
            for (k, &e) in s.events.iter().enumerate() {
                if e >= s.len() {
                    return Err(invalid(format!("sentences[{si}].events[{k}]"), format!("token {e} out of range")));
                }
            }
        }
        for (k, p) in self.pairs.iter().enumerate() {
            for (which, e) in [("e1", p.e1), ("e2", p.e2)] {
                let field = || format!("pairs[{k}].{which}");
                let Some(s) = self.sentences.get(e.sentence) else {
                    return Err(invalid(field(), format!("sentence {} out of range", e.sentence)));
                };
                if e.token >= s.len() {
                    return Err(invalid(field(), format!("token {} out of range", e.token)));
                }
            }
            if p.e1.sentence.abs_diff(p.e2.sentence) > 1 {
                return Err(invalid(format!("pairs[{k}]"), "events must share or neighbour a sentence"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tok(word: &str, head: i32) -> AnnotatedToken {
        AnnotatedToken::new(word, "NN", head, "dep")
    }

    #[test]
    fn tree_checks() {
        let ok = Sentence { tokens: vec![tok("a", 1), tok("b", ROOT), tok("c", 1)], timex_spans: vec![], events: vec![] };
        assert!(ok.check_tree(0).is_ok());
        let two_roots = Sentence { tokens: vec![tok("a", ROOT), tok("b", ROOT)], ..ok.clone() };
        assert!(matches!(two_roots.check_tree(0), Err(DocumentError::MalformedTree { .. })));
        let cycle = Sentence { tokens: vec![tok("a", 1), tok("b", 0), tok("c", ROOT)], ..ok.clone() };
        assert!(matches!(cycle.check_tree(0), Err(DocumentError::MalformedTree { .. })));
        let out = Sentence { tokens: vec![tok("a", 5), tok("b", ROOT)], ..ok };
        assert!(out.check_tree(0).is_err());
    }

    #[test]
    fn detokenize_attaches_commas() {
        assert_eq!(detokenize(["Sept.", "12", ",", "1993"]), "Sept. 12, 1993");
    }

    #[test]
    fn label_json_names() {
        assert_eq!(serde_json::to_string(&EventLabel::Vague).unwrap(), "\"vague\"");
        assert_eq!(EventLabel::from_index(3), Some(EventLabel::Simultaneous));
    }
}
