//! Error classes and their exit codes.

use std::fmt;

use tempo_core::corpus_io::CorpusError;
use tempo_core::dataset::DatasetError;
use tempo_core::event_model::EventModelError;
use tempo_core::experiments::ExperimentError;
use tempo_core::nn::NnError;
use tempo_core::normalize::NormalizeError;
use tempo_core::timex_model::TimexModelError;

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(String),
    Numeric(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        Failure::Usage(msg.into())
    }

    pub fn data(msg: impl fmt::Display) -> Self {
        Failure::Data(msg.to_string())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Data(m) => write!(f, "data error: {m}"),
            Failure::Numeric(m) => write!(f, "numeric failure: {m}"),
        }
    }
}

fn nn(e: &NnError) -> Failure {
    match e {
        NnError::NonFinite(_) => Failure::Numeric(e.to_string()),
        _ => Failure::data(e),
    }
}

impl From<NnError> for Failure {
    fn from(e: NnError) -> Self {
        nn(&e)
    }
}

impl From<CorpusError> for Failure {
    fn from(e: CorpusError) -> Self {
        match &e {
            CorpusError::Params(inner) => nn(inner),
            _ => Failure::data(e),
        }
    }
}

impl From<TimexModelError> for Failure {
    fn from(e: TimexModelError) -> Self {
        match e {
            TimexModelError::Nn(inner) => inner.into(),
            TimexModelError::Corpus(inner) => inner.into(),
            other => Failure::data(other),
        }
    }
}

impl From<EventModelError> for Failure {
    fn from(e: EventModelError) -> Self {
        match e {
            EventModelError::Nn(inner) => inner.into(),
            EventModelError::Timex(inner) => inner.into(),
            EventModelError::Corpus(inner) => inner.into(),
            EventModelError::ModeMismatch => Failure::usage("with_timex mode needs --timex <checkpoint>"),
            other => Failure::data(other),
        }
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Event(inner) => inner.into(),
            ExperimentError::Corpus(inner) => inner.into(),
            other => Failure::data(other),
        }
    }
}

impl From<DatasetError> for Failure {
    fn from(e: DatasetError) -> Self {
        Failure::data(e)
    }
}

impl From<NormalizeError> for Failure {
    fn from(e: NormalizeError) -> Self {
        Failure::data(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::data(e)
    }
}
