use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::MetricError;
use crate::scalar::Score;
use crate::textnorm::TokenSequence;

/// Counts of every contiguous n-gram of order `n`.
pub fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if n == 0 {
        return counts;
    }
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Sum over n-gram types of `min(hyp count, max ref count)`.
fn clipped(hyp: &HashMap<&[String], usize>, refs: &[HashMap<&[String], usize>]) -> usize {
    hyp.iter()
        .map(|(gram, &c)| {
            let max_ref = refs.iter().map(|r| r.get(gram).copied().unwrap_or(0)).max().unwrap_or(0);
            c.min(max_ref)
        })
        .sum()
}

fn total(tokens: &[String], n: usize) -> usize {
    (tokens.len() + 1).saturating_sub(n)
}

/// Clipped n-gram precision and recall of order `n`. A component whose
/// denominator is zero is 0.
pub fn ngram_precision_recall<T: Score>(hyp: &TokenSequence, reference: &TokenSequence, n: usize) -> (T, T) {
    let (h, r) = (hyp.tokens(), reference.tokens());
    let matches = clipped(&ngram_counts(h, n), &[ngram_counts(r, n)]);
    let part = |den: usize| if den == 0 || n == 0 { T::zero() } else { T::ratio(matches, den) };
    (part(total(h, n)), part(total(r, n)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothing {
    None,
    /// For orders ≥ 2, a zero clipped count becomes (0 + 1) / (total + 1).
    AddOneOnZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BleuConfig {
    max_n: usize,
    smoothing: Smoothing,
}

impl Default for BleuConfig {
    fn default() -> Self {
        BleuConfig { max_n: 4, smoothing: Smoothing::AddOneOnZero }
    }
}

impl BleuConfig {
    pub fn new(max_n: usize, smoothing: Smoothing) -> Result<Self, MetricError> {
        if !(1..=4).contains(&max_n) {
            return Err(MetricError::InvalidConfig(format!("BLEU max_n must be in 1..=4, got {max_n}")));
        }
        Ok(BleuConfig { max_n, smoothing })
    }

    pub fn max_n(&self) -> usize {
        self.max_n
    }

    pub fn smoothing(&self) -> Smoothing {
        self.smoothing
    }
}

/// Sufficient statistics for BLEU; segment stats add up to corpus stats.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BleuStats {
    pub matches: [usize; 4],
    pub totals: [usize; 4],
    pub hyp_len: usize,
    pub ref_len: usize,
}

/// Reference length closest to `hyp_len`, ties going to the shorter one.
fn closest_ref_len(hyp_len: usize, refs: &[TokenSequence]) -> usize {
    refs.iter().map(TokenSequence::len).min_by_key(|&r| (r.abs_diff(hyp_len), r)).unwrap_or(0)
}

impl BleuStats {
    pub fn segment(hyp: &TokenSequence, refs: &[TokenSequence]) -> Result<Self, MetricError> {
        if refs.is_empty() {
            return Err(MetricError::NoReferences);
        }
        let mut stats =
            BleuStats { hyp_len: hyp.len(), ref_len: closest_ref_len(hyp.len(), refs), ..BleuStats::default() };
        for n in 1..=4 {
            let ref_counts: Vec<_> = refs.iter().map(|r| ngram_counts(r.tokens(), n)).collect();
            stats.matches[n - 1] = clipped(&ngram_counts(hyp.tokens(), n), &ref_counts);
            stats.totals[n - 1] = total(hyp.tokens(), n);
        }
        Ok(stats)
    }

    pub fn accumulate(&mut self, other: &BleuStats) {
        for i in 0..4 {
            self.matches[i] += other.matches[i];
            self.totals[i] += other.totals[i];
        }
        self.hyp_len += other.hyp_len;
        self.ref_len += other.ref_len;
    }

    /// Geometric mean of the (smoothed) clipped precisions times the
    /// brevity penalty.
    pub fn score<T: Score>(&self, config: &BleuConfig) -> T {
        if self.hyp_len == 0 {
            return T::zero();
        }
        let mut log_sum = T::zero();
        for i in 0..config.max_n {
            let (mut m, mut t) = (self.matches[i], self.totals[i]);
            if m == 0 && i >= 1 && config.smoothing == Smoothing::AddOneOnZero {
                m += 1;
                t += 1;
            }
            if m == 0 || t == 0 {
                return T::zero();
            }
            log_sum = log_sum + T::ratio(m, t).ln();
        }
        let precision = (log_sum / T::of(config.max_n as f64)).exp();
        let bp = if self.hyp_len >= self.ref_len {
            T::one()
        } else {
            (T::one() - T::ratio(self.ref_len, self.hyp_len)).exp()
        };
        precision * bp
    }
}

/// Sentence BLEU against one or more references.
pub fn bleu<T: Score>(hyp: &TokenSequence, refs: &[TokenSequence], config: &BleuConfig) -> Result<T, MetricError> {
    Ok(BleuStats::segment(hyp, refs)?.score(config))
}

/// Corpus BLEU: statistics are summed over segments before the mean.
pub fn corpus_bleu<T: Score>(
    segments: &[(TokenSequence, Vec<TokenSequence>)],
    config: &BleuConfig,
) -> Result<T, MetricError> {
    let mut stats = BleuStats::default();
    for (hyp, refs) in segments {
        stats.accumulate(&BleuStats::segment(hyp, refs)?);
    }
    Ok(stats.score(config))
}

/// Minimum of precision and recall over all n-grams of orders 1 to 4.
pub fn google_bleu<T: Score>(hyp: &TokenSequence, reference: &TokenSequence) -> T {
    match (hyp.is_empty(), reference.is_empty()) {
        (true, true) => return T::one(),
        (true, false) | (false, true) => return T::zero(),
        _ => {}
    }
    let (h, r) = (hyp.tokens(), reference.tokens());
    let (mut matches, mut hyp_total, mut ref_total) = (0, 0, 0);
    for n in 1..=4 {
        matches += clipped(&ngram_counts(h, n), &[ngram_counts(r, n)]);
        hyp_total += total(h, n);
        ref_total += total(r, n);
    }
    T::ratio(matches, hyp_total).min(T::ratio(matches, ref_total))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(s: &str) -> TokenSequence {
        TokenSequence::from_words(s)
    }

    #[test]
    fn precision_recall_identity_and_disjoint() {
        let (p, r): (f64, f64) = ngram_precision_recall(&seq("the cat sat"), &seq("the cat sat"), 1);
        assert_eq!((p, r), (1.0, 1.0));
        let (p, r): (f64, f64) = ngram_precision_recall(&seq("a b"), &seq("c d"), 1);
        assert_eq!((p, r), (0.0, 0.0));
        let (p, r): (f64, f64) = ngram_precision_recall(&seq("a"), &seq("a b"), 2);
        assert_eq!((p, r), (0.0, 0.0));
    }

    #[test]
    fn clipped_unigram_precision() {
        let (p, r): (f64, f64) =
            ngram_precision_recall(&seq("the the the the the the the"), &seq("the cat is on the mat"), 1);
        assert!((p - 2.0 / 7.0).abs() < 1e-12);
        assert!((r - 2.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn bleu_identity_and_empty() {
        let s = seq("the cat sat on the mat");
        let cfg = BleuConfig::default();
        assert_eq!(bleu::<f64>(&s, std::slice::from_ref(&s), &cfg).unwrap(), 1.0);
        assert_eq!(bleu::<f64>(&seq(""), std::slice::from_ref(&s), &cfg).unwrap(), 0.0);
        assert!(matches!(bleu::<f64>(&s, &[], &cfg), Err(MetricError::NoReferences)));
    }

    #[test]
    fn bleu_brevity_penalty_case() {
        let cfg = BleuConfig::new(2, Smoothing::None).unwrap();
        let got: f64 = bleu(&seq("the cat"), &[seq("the cat sat")], &cfg).unwrap();
        assert!((got - (-0.5f64).exp()).abs() < 1e-12);
        assert!((got - 0.6065).abs() < 1e-4);
    }

    #[test]
    fn bleu_smoothing_only_above_unigrams() {
        let r = seq("a b c d");
        let none = BleuConfig::new(4, Smoothing::None).unwrap();
        let add = BleuConfig::default();
        // no bigram matches at all
        let hyp = seq("d c b a");
        assert_eq!(bleu::<f64>(&hyp, std::slice::from_ref(&r), &none).unwrap(), 0.0);
        let smoothed: f64 = bleu(&hyp, std::slice::from_ref(&r), &add).unwrap();
        let want = (1.0f64 * (1.0 / 4.0) * (1.0 / 3.0) * (1.0 / 2.0)).powf(0.25);
        assert!((smoothed - want).abs() < 1e-12);
        // zero unigram matches stays zero
        assert_eq!(bleu::<f64>(&seq("x y z w"), &[r], &add).unwrap(), 0.0);
    }

    #[test]
    fn bleu_closest_reference_length_ties_shorter() {
        assert_eq!(closest_ref_len(3, &[seq("a b"), seq("a b c d")]), 2);
        assert_eq!(closest_ref_len(3, &[seq("a b c d e"), seq("a b c d")]), 4);
    }

    #[test]
    fn bleu_multi_reference_clips_to_max() {
        let cfg = BleuConfig::new(1, Smoothing::None).unwrap();
        let got: f64 = bleu(&seq("a a"), &[seq("a b"), seq("a a")], &cfg).unwrap();
        assert_eq!(got, 1.0);
    }

    #[test]
    fn bleu_config_bounds() {
        assert!(BleuConfig::new(0, Smoothing::None).is_err());
        assert!(BleuConfig::new(5, Smoothing::None).is_err());
    }

    #[test]
    fn corpus_bleu_single_segment_matches_sentence() {
        let hyp = seq("the cat sat on a mat");
        let refs = vec![seq("the cat sat on the mat")];
        let cfg = BleuConfig::default();
        let sentence: f64 = bleu(&hyp, &refs, &cfg).unwrap();
        let corpus: f64 = corpus_bleu(&[(hyp, refs)], &cfg).unwrap();
        assert_eq!(sentence, corpus);
    }

    #[test]
    fn google_bleu_cases() {
        assert_eq!(google_bleu::<f64>(&seq("a b c"), &seq("a b c")), 1.0);
        assert_eq!(google_bleu::<f64>(&seq("a b"), &seq("a b c")), 0.5);
        assert_eq!(google_bleu::<f64>(&seq("a b"), &seq("c d")), 0.0);
        assert_eq!(google_bleu::<f64>(&seq(""), &seq("")), 1.0);
        assert_eq!(google_bleu::<f64>(&seq("a"), &seq("")), 0.0);
    }

    #[test]
    fn works_in_f32() {
        let got: f32 = google_bleu(&seq("a b"), &seq("a b c"));
        assert_eq!(got, 0.5f32);
    }
}
