//! From-scratch MT quality metrics over [`TokenSequence`]s.

pub mod bertscore;
pub mod meteor;
pub mod ngram;
pub mod rouge;
pub mod sidecar;
pub mod ter;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::SegmentRecord;
use crate::scalar::Score;
use crate::textnorm::{metric_tokens, NormConfig, TokenSequence};

pub use bertscore::{bertscore, rescale, BertScore, EmbeddingSet};
pub use meteor::{meteor, ExactMatcher, Meteor, StageMatcher, StemMatcher, SynonymTable};
pub use ngram::{bleu, corpus_bleu, google_bleu, ngram_precision_recall, BleuConfig, BleuStats, Smoothing};
pub use rouge::{lcs_len, rouge_l};
pub use sidecar::{EmbeddingPair, EmbeddingSidecar, SidecarError};
pub use ter::{levenshtein, ter, ter_stats, TerStats};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MetricError {
    #[error("at least one reference is required")]
    NoReferences,
    #[error("reference is empty")]
    EmptyReference,
    #[error("embedding sets must be non-empty")]
    EmptyEmbeddings,
    #[error("{vectors} vectors for {tokens} tokens")]
    EmbeddingCount { vectors: usize, tokens: usize },
    #[error("vector {index} has dimension {found}, expected {expected}")]
    EmbeddingDimension { expected: usize, found: usize, index: usize },
    #[error("vector {index} has zero or non-finite norm")]
    ZeroNorm { index: usize },
    #[error("rescale baseline must be below 1, got {0}")]
    BadBaseline(f64),
    #[error("record {id:?} has no reference_text")]
    MissingReference { id: String },
    #[error("record {id:?}: reference tokenizes to nothing")]
    EmptyRecordReference { id: String },
    #[error("invalid metric configuration: {0}")]
    InvalidConfig(String),
}

/// Metric names in reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[serde(rename = "sacrebleu")]
    SacreBleu,
    Meteor,
    RougeL,
    #[serde(rename = "bertscore")]
    BertScore,
    #[serde(rename = "bertscore_rescaled")]
    BertScoreRescaled,
    Ter,
    GoogleBleu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    HigherBetter,
    LowerBetter,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::HigherBetter => "higher_better",
            Direction::LowerBetter => "lower_better",
        }
    }
}

impl Metric {
    pub const ALL: [Metric; 7] = [
        Metric::SacreBleu,
        Metric::Meteor,
        Metric::RougeL,
        Metric::BertScore,
        Metric::BertScoreRescaled,
        Metric::Ter,
        Metric::GoogleBleu,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::SacreBleu => "sacrebleu",
            Metric::Meteor => "meteor",
            Metric::RougeL => "rouge_l",
            Metric::BertScore => "bertscore",
            Metric::BertScoreRescaled => "bertscore_rescaled",
            Metric::Ter => "ter",
            Metric::GoogleBleu => "google_bleu",
        }
    }

    /// Display name used in text tables.
    pub fn display_name(self) -> &'static str {
        match self {
            Metric::SacreBleu => "SacreBLEU",
            Metric::Meteor => "Meteor",
            Metric::RougeL => "RougeL",
            Metric::BertScore => "BERTScore",
            Metric::BertScoreRescaled => "BERTScore_sc",
            Metric::Ter => "TER",
            Metric::GoogleBleu => "Google_BLEU",
        }
    }

    pub fn direction(self) -> Direction {
        match self {
            Metric::Ter => Direction::LowerBetter,
            _ => Direction::HigherBetter,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL.into_iter().find(|m| m.as_str() == s).ok_or_else(|| format!("unknown metric {s:?}"))
    }
}

/// All metric scores for one record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Score")]
pub struct MetricVector<T> {
    pub sacrebleu: T,
    pub meteor: T,
    pub rouge_l: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bertscore: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bertscore_rescaled: Option<T>,
    pub ter: T,
    pub google_bleu: T,
}

impl<T: Score> MetricVector<T> {
    pub fn get(&self, metric: Metric) -> Option<T> {
        match metric {
            Metric::SacreBleu => Some(self.sacrebleu),
            Metric::Meteor => Some(self.meteor),
            Metric::RougeL => Some(self.rouge_l),
            Metric::BertScore => self.bertscore,
            Metric::BertScoreRescaled => self.bertscore_rescaled,
            Metric::Ter => Some(self.ter),
            Metric::GoogleBleu => Some(self.google_bleu),
        }
    }

    /// Range check: every score non-negative except rescaled BERTScore,
    /// and every score at most 1 except TER and rescaled BERTScore.
    pub fn in_bounds(&self) -> bool {
        let unit = |x: T| x >= T::zero() && x <= T::one();
        unit(self.sacrebleu)
            && unit(self.meteor)
            && unit(self.rouge_l)
            && unit(self.google_bleu)
            && self.bertscore.is_none_or(unit)
            && self.bertscore_rescaled.is_none_or(|x| x <= T::one())
            && self.ter >= T::zero()
    }
}

/// A record id with its scores and the taxonomy fields the report needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Score")]
pub struct ScoredRecord<T> {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_type: Option<crate::corpus::ErrorType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub critical: Option<bool>,
    pub scores: MetricVector<T>,
}

/// Everything that determines the scores besides the text itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorerSettings {
    pub normalization: String,
    pub tokenizer: String,
    pub bleu: BleuConfig,
    pub meteor_stages: Vec<String>,
    pub bertscore_baseline: Option<f64>,
}

impl ScorerSettings {
    /// Short content hash of the settings.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(self).expect("settings serialize");
        hex::encode(&Sha256::digest(json.as_bytes())[..8])
    }
}

/// Computes [`MetricVector`]s for records.
pub struct Scorer<T> {
    norm: NormConfig,
    bleu: BleuConfig,
    meteor: Meteor,
    baseline: Option<T>,
}

impl<T: Score> Default for Scorer<T> {
    fn default() -> Self {
        Scorer { norm: NormConfig::METRIC, bleu: BleuConfig::default(), meteor: Meteor::default(), baseline: None }
    }
}

impl<T: Score> Scorer<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_normalization(mut self, norm: NormConfig) -> Self {
        self.norm = norm;
        self
    }

    pub fn with_bleu(mut self, bleu: BleuConfig) -> Self {
        self.bleu = bleu;
        self
    }

    pub fn with_meteor(mut self, meteor: Meteor) -> Self {
        self.meteor = meteor;
        self
    }

    /// Baseline for rescaled BERTScore; without one, the rescaled field is
    /// left empty.
    pub fn with_baseline(mut self, baseline: Option<T>) -> Result<Self, MetricError> {
        if let Some(b) = baseline {
            rescale(T::one(), b)?;
        }
        self.baseline = baseline;
        Ok(self)
    }

    pub fn settings(&self) -> ScorerSettings {
        ScorerSettings {
            normalization: self.norm.describe(),
            tokenizer: "punctuation-separating".into(),
            bleu: self.bleu,
            meteor_stages: self.meteor.stage_names().into_iter().map(String::from).collect(),
            bertscore_baseline: self.baseline.and_then(|b| b.to_f64()),
        }
    }

    pub fn tokens(&self, text: &str) -> TokenSequence {
        metric_tokens(text, self.norm)
    }

    /// Scores one hypothesis against one reference. `reference` must
    /// tokenize to at least one token.
    pub fn score_texts(
        &self,
        hyp_text: &str,
        ref_text: &str,
        embeddings: Option<(&EmbeddingSet<T>, &EmbeddingSet<T>)>,
    ) -> Result<MetricVector<T>, MetricError> {
        let hyp = self.tokens(hyp_text);
        let reference = self.tokens(ref_text);
        let (bert, bert_rescaled) = match embeddings {
            Some((h, r)) => {
                let f1 = bertscore(h, r)?.f1;
                let scaled = self.baseline.map(|b| rescale(f1, b)).transpose()?;
                (Some(f1), scaled)
            }
            None => (None, None),
        };
        Ok(MetricVector {
            sacrebleu: bleu(&hyp, std::slice::from_ref(&reference), &self.bleu)?,
            meteor: self.meteor.score(&hyp, &reference),
            rouge_l: rouge_l(&hyp, &reference),
            bertscore: bert,
            bertscore_rescaled: bert_rescaled,
            ter: ter(&hyp, &reference)?,
            google_bleu: google_bleu(&hyp, &reference),
        })
    }

    /// Scores a record's MT output against its corrected reference.
    pub fn score_record(
        &self,
        record: &SegmentRecord,
        embeddings: Option<(&EmbeddingSet<T>, &EmbeddingSet<T>)>,
    ) -> Result<MetricVector<T>, MetricError> {
        let reference =
            record.reference_text().ok_or_else(|| MetricError::MissingReference { id: record.id().to_string() })?;
        self.score_texts(record.mt_text(), reference, embeddings).map_err(|e| match e {
            MetricError::EmptyReference => MetricError::EmptyRecordReference { id: record.id().to_string() },
            other => other,
        })
    }

    /// Scores records in parallel; output is sorted by record id.
    pub fn score_records(
        &self,
        records: &[SegmentRecord],
        sidecar: Option<&EmbeddingSidecar<T>>,
    ) -> Result<Vec<ScoredRecord<T>>, MetricError> {
        let mut out = records
            .par_iter()
            .map(|r| {
                let emb = sidecar.and_then(|s| s.get(r.id()));
                self.score_record(r, emb).map(|scores| ScoredRecord {
                    id: r.id().to_string(),
                    error_type: r.error_type(),
                    critical: r.critical(),
                    scores,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        out.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(out)
    }
}

/// Contents of a score file: the scorer settings and one entry per record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Score")]
pub struct ScoreFile<T> {
    pub settings: ScorerSettings,
    pub fingerprint: String,
    pub records: Vec<ScoredRecord<T>>,
}

impl<T: Score> ScoreFile<T> {
    pub fn new(settings: ScorerSettings, records: Vec<ScoredRecord<T>>) -> Self {
        ScoreFile { fingerprint: settings.fingerprint(), settings, records }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{ErrorType, RecordFields, SourceLabel};

    fn record(id: &str, mt: &str, reference: Option<&str>) -> SegmentRecord {
        let mut f = RecordFields::new(id, "src", SourceLabel::Depression);
        f.mt_text = mt.into();
        f.reference_text = reference.map(String::from);
        SegmentRecord::try_from(f).unwrap()
    }

    #[test]
    fn identical_texts_score_perfectly() {
        let s = Scorer::<f64>::new();
        let v = s.score_record(&record("a", "I want to die now", Some("I want to die now")), None).unwrap();
        assert_eq!((v.sacrebleu, v.rouge_l, v.google_bleu, v.ter), (1.0, 1.0, 1.0, 0.0));
        assert!(v.bertscore.is_none() && v.bertscore_rescaled.is_none());
        assert!(v.in_bounds());
    }

    #[test]
    fn missing_or_empty_reference() {
        let s = Scorer::<f64>::new();
        assert_eq!(
            s.score_record(&record("x", "hi", None), None),
            Err(MetricError::MissingReference { id: "x".into() })
        );
        assert_eq!(
            s.score_record(&record("y", "hi", Some("  ")), None),
            Err(MetricError::EmptyRecordReference { id: "y".into() })
        );
    }

    #[test]
    fn bertscore_fields_follow_embeddings_and_baseline() {
        let e = EmbeddingSet::new(TokenSequence::from_words("a"), vec![vec![1.0, 0.0]]).unwrap();
        let s = Scorer::<f64>::new();
        let v = s.score_texts("a", "a", Some((&e, &e))).unwrap();
        assert_eq!(v.bertscore, Some(1.0));
        assert_eq!(v.bertscore_rescaled, None);
        let s = s.with_baseline(Some(0.5)).unwrap();
        let v = s.score_texts("a", "a", Some((&e, &e))).unwrap();
        assert_eq!(v.bertscore_rescaled, Some(1.0));
        assert!(Scorer::<f64>::new().with_baseline(Some(1.0)).is_err());
    }

    #[test]
    fn score_records_sorted_by_id() {
        let s = Scorer::<f64>::new();
        let recs = vec![record("b", "x y", Some("x y")), record("a", "x", Some("x y"))];
        let out = s.score_records(&recs, None).unwrap();
        assert_eq!(out.iter().map(|r| r.id.as_str()).collect::<Vec<_>>(), ["a", "b"]);
    }

    #[test]
    fn metric_names_round_trip() {
        for m in Metric::ALL {
            assert_eq!(m.as_str().parse::<Metric>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.as_str()));
        }
        assert_eq!(Metric::Ter.direction(), Direction::LowerBetter);
    }

    #[test]
    fn score_file_serializes_with_optional_fields_omitted() {
        let s = Scorer::<f64>::new();
        let mut f = RecordFields::new("v1", "احس بضيق", SourceLabel::Depression);
        f.mt_text = "I feel tight".into();
        f.reference_text = Some("I have anxiety".into());
        f.critical = Some(true);
        f.error_type = Some(ErrorType::Vocabulary);
        let recs = s.score_records(&[SegmentRecord::try_from(f).unwrap()], None).unwrap();
        let file = ScoreFile::new(s.settings(), recs);
        let json = serde_json::to_string(&file).unwrap();
        assert!(!json.contains("bertscore\""));
        let back: ScoreFile<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, file);
    }
}
