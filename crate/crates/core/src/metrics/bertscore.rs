use super::MetricError;
use crate::scalar::Score;
use crate::textnorm::TokenSequence;

/// Tokens with one embedding vector each, all of the same dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet<T> {
    tokens: TokenSequence,
    vectors: Vec<Vec<T>>,
}

impl<T: Score> EmbeddingSet<T> {
    pub fn new(tokens: TokenSequence, vectors: Vec<Vec<T>>) -> Result<Self, MetricError> {
        if vectors.len() != tokens.len() {
            return Err(MetricError::EmbeddingCount { vectors: vectors.len(), tokens: tokens.len() });
        }
        let dim = vectors.first().map_or(0, Vec::len);
        if !vectors.is_empty() && dim == 0 {
            return Err(MetricError::EmbeddingDimension { expected: 1, found: 0, index: 0 });
        }
        for (index, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(MetricError::EmbeddingDimension { expected: dim, found: v.len(), index });
            }
            if norm(v) == T::zero() || !v.iter().all(|x| x.is_finite()) {
                return Err(MetricError::ZeroNorm { index });
            }
        }
        Ok(EmbeddingSet { tokens, vectors })
    }

    pub fn tokens(&self) -> &TokenSequence {
        &self.tokens
    }

    pub fn vectors(&self) -> &[Vec<T>] {
        &self.vectors
    }

    /// Vector dimension, or `None` for an empty set.
    pub fn dim(&self) -> Option<usize> {
        self.vectors.first().map(Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

fn norm<T: Score>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
}

/// Cosine similarity clamped to [0, 1].
fn clamped_cosine<T: Score>(a: &[T], b: &[T]) -> T {
    let dot = a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y);
    (dot / (norm(a) * norm(b))).max(T::zero()).min(T::one())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BertScore<T> {
    pub precision: T,
    pub recall: T,
    pub f1: T,
}

/// Greedy matching by cosine similarity: each token takes its best match
/// on the other side.
pub fn bertscore<T: Score>(hyp: &EmbeddingSet<T>, reference: &EmbeddingSet<T>) -> Result<BertScore<T>, MetricError> {
    if hyp.is_empty() || reference.is_empty() {
        return Err(MetricError::EmptyEmbeddings);
    }
    let (dh, dr) = (hyp.dim().unwrap_or(0), reference.dim().unwrap_or(0));
    if dh != dr {
        return Err(MetricError::EmbeddingDimension { expected: dh, found: dr, index: 0 });
    }
    let sims: Vec<Vec<T>> =
        hyp.vectors.iter().map(|h| reference.vectors.iter().map(|r| clamped_cosine(h, r)).collect()).collect();
    let mean = |xs: Vec<T>| {
        let n = xs.len();
        xs.into_iter().fold(T::zero(), |a, b| a + b) / T::of(n as f64)
    };
    let precision = mean(sims.iter().map(|row| row.iter().copied().fold(T::zero(), T::max)).collect());
    let recall =
        mean((0..reference.vectors.len()).map(|j| sims.iter().map(|row| row[j]).fold(T::zero(), T::max)).collect());
    let f1 = if precision + recall == T::zero() {
        T::zero()
    } else {
        T::of(2.0) * precision * recall / (precision + recall)
    };
    Ok(BertScore { precision, recall, f1 })
}

/// Linear rescaling against a baseline score: (raw − b) / (1 − b).
pub fn rescale<T: Score>(raw: T, baseline: T) -> Result<T, MetricError> {
    if baseline.is_nan() || baseline >= T::one() {
        return Err(MetricError::BadBaseline(baseline.to_f64().unwrap_or(f64::NAN)));
    }
    Ok((raw - baseline) / (T::one() - baseline))
}
