//! Screening, annotation, and metric stress-testing for critical machine
//! translation errors in labeled mental-health corpora.
//!
//! Metric and report code is generic over [`Score`] (f32 or f64); the
//! aliases at the crate root fix it to `f64`.

pub mod corpus;
pub mod metrics;
pub mod pipeline;
pub mod report;
pub mod review;
pub mod scalar;
pub mod textnorm;

pub use corpus::{
    load_corpus, save_corpus, taxonomy_frequencies, ClassifierLabel, Corpus, CorpusError, ErrorGroup, ErrorType,
    RecordFields, SegmentRecord, SourceLabel,
};
pub use scalar::Score;
pub use textnorm::{normalize, tokenize, NormConfig, TokenSequence};

pub type MetricVector = metrics::MetricVector<f64>;
pub type EmbeddingSet = metrics::EmbeddingSet<f64>;
pub type Scorer = metrics::Scorer<f64>;
pub type ScoredRecord = metrics::ScoredRecord<f64>;
pub type ScoreFile = metrics::ScoreFile<f64>;
