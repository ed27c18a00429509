//! Rule-based distant labelling of event pairs.
//!
//! Events are anchored to the timexes that modify them in the dependency
//! tree, timexes are ordered by the normalizer, and the two steps compose
//! into before/after event pairs.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::document::{AnnotatedDocument, EventLabel, EventRef, PairRecord};
use crate::event_model::broadcast_governor;
use crate::normalize::{compare, parse_timex, NormalizeError, ReferenceAnchor, Relation, TimeInterval};
use crate::parallel;

/// The only event-timex relation the anchoring rules produce.
pub const IS_INCLUDED: &str = "IS_INCLUDED";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventAnchor {
    pub event: EventRef,
    pub interval: TimeInterval,
    /// `direct` for a timex depending on the verb, `two_hop` for one reached through a noun.
    pub rule_id: String,
    pub relation: String,
}

/// Anchors every verb that a parseable timex attaches to, ordered by event position then timex order.
pub fn anchor_events(doc: &AnnotatedDocument, anchor: ReferenceAnchor) -> Vec<EventAnchor> {
    let mut out = Vec::new();
    for (si, s) in doc.sentences.iter().enumerate() {
        for span in &s.timex_spans {
            if span.start >= span.end || span.end > s.len() || !(span.start..span.end).contains(&span.head) {
                continue;
            }
            let Some((verb, hops)) = broadcast_governor(s, span) else { continue };
            let Ok(interval) = parse_timex(&s.span_text(span), anchor) else { continue };
            let event = EventRef { sentence: si, token: verb };
            if out.iter().any(|a: &EventAnchor| a.event == event && a.interval == interval) {
                continue;
            }
            out.push(EventAnchor {
                event,
                interval,
                rule_id: if hops == 1 { "direct" } else { "two_hop" }.to_string(),
                relation: IS_INCLUDED.to_string(),
            });
        }
    }
    out.sort_by_key(|a| a.event);
    out
}

/// Orders two timex surfaces; overlapping intervals come back as `Ambiguous`.
pub fn timex_timex(a: &str, b: &str, anchor: ReferenceAnchor) -> Result<Relation, NormalizeError> {
    Ok(compare(&parse_timex(a, anchor)?, &parse_timex(b, anchor)?))
}

/// Pairs anchors `i < j` in input order whose events share or neighbour a
/// sentence, keeping only before/after comparisons. An event pair seen twice
/// keeps its first label; a conflicting later label removes the pair.
pub fn compose(anchors: &[EventAnchor]) -> Vec<PairRecord> {
    let mut out: Vec<Option<PairRecord>> = Vec::new();
    let mut seen: HashMap<(EventRef, EventRef), usize> = HashMap::new();
    for (i, a) in anchors.iter().enumerate() {
        for b in &anchors[i + 1..] {
            if a.event == b.event || a.event.sentence.abs_diff(b.event.sentence) > 1 {
                continue;
            }
            let label = match compare(&a.interval, &b.interval) {
                Relation::Before => EventLabel::Before,
                Relation::After => EventLabel::After,
                Relation::Simultaneous | Relation::Ambiguous => continue,
            };
            let key = if a.event < b.event { (a.event, b.event) } else { (b.event, a.event) };
            let oriented = if a.event < b.event { label } else { label.swapped() };
            match seen.get(&key) {
                None => {
                    seen.insert(key, out.len());
                    out.push(Some(PairRecord { e1: a.event, e2: b.event, label }));
                }
                Some(&k) => {
                    if let Some(prev) = &out[k] {
                        let prev_oriented = if prev.e1 < prev.e2 { prev.label } else { prev.label.swapped() };
                        if prev_oriented != oriented {
                            out[k] = None;
                        }
                    }
                }
            }
        }
    }
    out.into_iter().flatten().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistantStats {
    pub documents: usize,
    pub documents_with_pairs: usize,
    pub anchors: usize,
    pub pairs: usize,
    pub before: usize,
    pub after: usize,
    pub pairs_per_document: f64,
}

/// Replaces each document's pairs with the distantly labelled ones.
pub fn build_distant_dataset(docs: &[AnnotatedDocument], anchor: ReferenceAnchor) -> (Vec<AnnotatedDocument>, DistantStats) {
    let labelled = parallel::map(docs, |d| {
        let anchors = anchor_events(d, anchor);
        let pairs = compose(&anchors);
        (AnnotatedDocument { doc_id: d.doc_id.clone(), sentences: d.sentences.clone(), pairs }, anchors.len())
    });
    let mut stats = DistantStats {
        documents: docs.len(),
        documents_with_pairs: 0,
        anchors: 0,
        pairs: 0,
        before: 0,
        after: 0,
        pairs_per_document: 0.0,
    };
    let mut out = Vec::with_capacity(docs.len());
    for (doc, n_anchors) in labelled {
        stats.anchors += n_anchors;
        stats.pairs += doc.pairs.len();
        stats.documents_with_pairs += usize::from(!doc.pairs.is_empty());
        for p in &doc.pairs {
            match p.label {
                EventLabel::Before => stats.before += 1,
                _ => stats.after += 1,
            }
        }
        out.push(doc);
    }
    if stats.documents > 0 {
        stats.pairs_per_document = stats.pairs as f64 / stats.documents as f64;
    }
    (out, stats)
}
