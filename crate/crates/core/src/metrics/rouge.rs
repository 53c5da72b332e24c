use crate::scalar::Score;
use crate::textnorm::TokenSequence;

/// Longest common subsequence length, O(|a|·|b|) time and O(|b|) memory.
pub fn lcs_len<S: PartialEq>(a: &[S], b: &[S]) -> usize {
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let above = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { above.max(row[j]) };
            diag = above;
        }
    }
    row[b.len()]
}

/// ROUGE-L F1 (β = 1) from the token-level LCS.
pub fn rouge_l<T: Score>(hyp: &TokenSequence, reference: &TokenSequence) -> T {
    let l = lcs_len(hyp.tokens(), reference.tokens());
    if l == 0 {
        return T::zero();
    }
    let p = T::ratio(l, hyp.len());
    let r = T::ratio(l, reference.len());
    T::of(2.0) * p * r / (p + r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(s: &str) -> TokenSequence {
        TokenSequence::from_words(s)
    }

    #[test]
    fn cases() {
        assert_eq!(rouge_l::<f64>(&seq("a b c d"), &seq("a b c d")), 1.0);
        assert_eq!(rouge_l::<f64>(&seq("a b c d"), &seq("a c b d")), 0.75);
        assert_eq!(rouge_l::<f64>(&seq("a b"), &seq("c d")), 0.0);
        assert_eq!(rouge_l::<f64>(&seq(""), &seq("c d")), 0.0);
    }

    #[test]
    fn lcs_unequal_lengths() {
        assert_eq!(lcs_len(&["a", "x", "b", "y", "c"], &["a", "b", "c"]), 3);
        assert_eq!(lcs_len(&["b", "a"], &["a", "b", "a"]), 2);
    }
}
