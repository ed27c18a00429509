//! Temporal reasoning toolkit: a timex template grammar with a calendar
//! normalizer, a character-level biLSTM timex pair classifier whose pooled
//! states serve as timex embeddings, a dependency-path event ordering model
//! that consumes those embeddings, and a rule-based distant labeler.

pub mod calendar;
pub mod corpus_io;
pub mod dataset;
pub mod distant;
pub mod document;
pub mod event_model;
pub mod experiments;
pub mod grammar;
pub mod metrics;
pub mod nn;
pub mod normalize;
pub mod parallel;
pub mod timex_model;

/// Crate version echoed into run artifacts.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use calendar::Date;
pub use grammar::{
    list_templates, TimexCategory, TimexGrammar, TimexLabel, TimexPairExample, TimexSample,
    TimexTemplate,
};
pub use normalize::{compare, parse_timex, resolve_two_digit_year, ReferenceAnchor, Relation, TimeInterval};
