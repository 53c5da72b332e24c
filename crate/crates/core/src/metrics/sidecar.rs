//! Precomputed embeddings, one JSON object per line.
//!
//! The first line is a header `{"dim": D, "baseline": B}` (`baseline`
//! optional, used for rescaled BERTScore). Every following line holds one
//! record:
//!
//! ```text
//! {"id": "t1", "hyp_tokens": ["i", "feel"], "hyp": [[...D numbers], [...]],
//!  "ref_tokens": ["i", "have"], "ref": [[...], [...]]}
//! ```
//!
//! Tokens are whatever the embedding model used; they only need to pair
//! one-to-one with the vectors.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::bertscore::EmbeddingSet;
use super::MetricError;
use crate::scalar::Score;
use crate::textnorm::TokenSequence;

#[derive(Debug, Error)]
pub enum SidecarError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing header line")]
    MissingHeader,
    #[error("line {line}: vector dimension {found} does not match header dimension {expected}")]
    Dimension { line: usize, expected: usize, found: usize },
    #[error("line {line}: duplicate id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: {source}")]
    Invalid {
        line: usize,
        #[source]
        source: MetricError,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Score")]
struct Header<T> {
    dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    baseline: Option<T>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Score")]
struct Entry<T> {
    id: String,
    hyp_tokens: Vec<String>,
    hyp: Vec<Vec<T>>,
    ref_tokens: Vec<String>,
    #[serde(rename = "ref")]
    reference: Vec<Vec<T>>,
}

/// Hypothesis and reference embeddings for one record.
pub type EmbeddingPair<T> = (EmbeddingSet<T>, EmbeddingSet<T>);

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSidecar<T> {
    pub dim: usize,
    pub baseline: Option<T>,
    pub entries: BTreeMap<String, EmbeddingPair<T>>,
}

impl<T: Score> EmbeddingSidecar<T> {
    pub fn parse(text: &str) -> Result<Self, SidecarError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header_line) = lines.next().ok_or(SidecarError::MissingHeader)?;
        let header: Header<T> =
            serde_json::from_str(header_line).map_err(|e| SidecarError::Parse { line: 1, message: e.to_string() })?;
        if header.dim == 0 {
            return Err(SidecarError::Parse { line: 1, message: "dim must be at least 1".into() });
        }
        let mut entries = BTreeMap::new();
        for (idx, raw) in lines {
            let line = idx + 1;
            let e: Entry<T> =
                serde_json::from_str(raw).map_err(|e| SidecarError::Parse { line, message: e.to_string() })?;
            for v in e.hyp.iter().chain(&e.reference) {
                if v.len() != header.dim {
                    return Err(SidecarError::Dimension { line, expected: header.dim, found: v.len() });
                }
            }
            let build = |tokens: Vec<String>, vectors: Vec<Vec<T>>| {
                TokenSequence::new(tokens)
                    .map_err(|t| MetricError::InvalidConfig(t.to_string()))
                    .and_then(|t| EmbeddingSet::new(t, vectors))
                    .map_err(|source| SidecarError::Invalid { line, source })
            };
            let hyp = build(e.hyp_tokens, e.hyp)?;
            let reference = build(e.ref_tokens, e.reference)?;
            if entries.insert(e.id.clone(), (hyp, reference)).is_some() {
                return Err(SidecarError::DuplicateId { line, id: e.id });
            }
        }
        Ok(EmbeddingSidecar { dim: header.dim, baseline: header.baseline, entries })
    }

    pub fn load(path: &Path) -> Result<Self, SidecarError> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn render(&self) -> String {
        let header = Header { dim: self.dim, baseline: self.baseline };
        let mut out = serde_json::to_string(&header).expect("header serializes");
        out.push('\n');
        for (id, (h, r)) in &self.entries {
            let e = Entry {
                id: id.clone(),
                hyp_tokens: h.tokens().tokens().to_vec(),
                hyp: h.vectors().to_vec(),
                ref_tokens: r.tokens().tokens().to_vec(),
                reference: r.vectors().to_vec(),
            };
            out.push_str(&serde_json::to_string(&e).expect("entry serializes"));
            out.push('\n');
        }
        out
    }

    pub fn get(&self, id: &str) -> Option<(&EmbeddingSet<T>, &EmbeddingSet<T>)> {
        self.entries.get(id).map(|(h, r)| (h, r))
    }
}
