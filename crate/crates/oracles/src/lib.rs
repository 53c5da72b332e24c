//! Brute-force reference implementations for cross-checking the metrics.
//!
//! Nothing here shares code with `critmt-core`. Every routine enumerates
//! instead of using dynamic programming, and inputs are capped small so the
//! enumeration stays tractable.

pub mod fixtures;
pub mod recompute;
pub mod scores;

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

/// Longest sequence accepted by [`lcs_bruteforce`].
pub const LCS_MAX_LEN: usize = 12;
/// Longest sequence accepted by [`ter_bruteforce`].
pub const TER_MAX_LEN: usize = 6;
/// Shift depth explored by [`ter_bruteforce`].
pub const TER_MAX_SHIFTS: usize = 2;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("input of length {len} exceeds oracle bound {max}")]
    TooLong { len: usize, max: usize },
    #[error("reference is empty")]
    EmptyReference,
    #[error("n-gram order must be at least 1")]
    ZeroOrder,
}

/// Length of the longest common subsequence, found by trying every
/// subsequence of the shorter input.
pub fn lcs_bruteforce<T: PartialEq>(a: &[T], b: &[T]) -> Result<usize, OracleError> {
    for s in [a, b] {
        if s.len() > LCS_MAX_LEN {
            return Err(OracleError::TooLong { len: s.len(), max: LCS_MAX_LEN });
        }
    }
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut best = 0;
    for mask in 0u32..(1u32 << short.len()) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        let picked: Vec<&T> = (0..short.len()).filter(|i| mask & (1 << i) != 0).map(|i| &short[i]).collect();
        if is_subsequence(&picked, long) {
            best = size;
        }
    }
    Ok(best)
}

fn is_subsequence<T: PartialEq>(needle: &[&T], hay: &[T]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|n| it.any(|h| h == *n))
}

/// Every n-gram window of `s`, counted.
pub fn ngram_count_naive<T: Clone + Ord>(s: &[T], n: usize) -> Result<BTreeMap<Vec<T>, usize>, OracleError> {
    if n == 0 {
        return Err(OracleError::ZeroOrder);
    }
    let mut out = BTreeMap::new();
    if s.len() < n {
        return Ok(out);
    }
    for start in 0..=(s.len() - n) {
        *out.entry(s[start..start + n].to_vec()).or_insert(0) += 1;
    }
    Ok(out)
}

/// Clipped match count between two n-gram multisets.
pub fn clipped_matches<T: Clone + Ord>(hyp: &[T], reference: &[T], n: usize) -> Result<usize, OracleError> {
    let h = ngram_count_naive(hyp, n)?;
    let r = ngram_count_naive(reference, n)?;
    Ok(h.iter().map(|(g, c)| (*c).min(r.get(g).copied().unwrap_or(0))).sum())
}

/// Word-level edit distance by memoised recursion over suffixes.
pub fn levenshtein_recursive<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    fn go<T: PartialEq>(a: &[T], b: &[T], memo: &mut HashMap<(usize, usize), usize>) -> usize {
        if a.is_empty() {
            return b.len();
        }
        if b.is_empty() {
            return a.len();
        }
        let key = (a.len(), b.len());
        if let Some(&v) = memo.get(&key) {
            return v;
        }
        let v = if a[0] == b[0] {
            go(&a[1..], &b[1..], memo)
        } else {
            1 + go(&a[1..], b, memo).min(go(a, &b[1..], memo)).min(go(&a[1..], &b[1..], memo))
        };
        memo.insert(key, v);
        v
    }
    go(a, b, &mut HashMap::new())
}

/// All sequences reachable from `s` by moving one contiguous block to a
/// different position.
pub fn all_single_shifts<T: Clone + PartialEq>(s: &[T]) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    let n = s.len();
    for start in 0..n {
        for len in 1..=(n - start) {
            let block = &s[start..start + len];
            let mut rest: Vec<T> = s[..start].to_vec();
            rest.extend_from_slice(&s[start + len..]);
            for dest in 0..=rest.len() {
                if dest == start {
                    continue;
                }
                let mut moved = rest[..dest].to_vec();
                moved.extend_from_slice(block);
                moved.extend_from_slice(&rest[dest..]);
                if moved.as_slice() != s {
                    out.push(moved);
                }
            }
        }
    }
    out
}

/// Minimum edits (shifts plus insertions, deletions, substitutions) over
/// every sequence of at most [`TER_MAX_SHIFTS`] unrestricted block moves,
/// divided by the reference length.
pub fn ter_bruteforce<T: Clone + PartialEq>(hyp: &[T], reference: &[T]) -> Result<f64, OracleError> {
    if reference.is_empty() {
        return Err(OracleError::EmptyReference);
    }
    for s in [hyp, reference] {
        if s.len() > TER_MAX_LEN {
            return Err(OracleError::TooLong { len: s.len(), max: TER_MAX_LEN });
        }
    }
    Ok(ter_edits_bruteforce(hyp, reference) as f64 / reference.len() as f64)
}

/// Edit count behind [`ter_bruteforce`], without the bounds check.
pub fn ter_edits_bruteforce<T: Clone + PartialEq>(hyp: &[T], reference: &[T]) -> usize {
    let mut best = levenshtein_recursive(hyp, reference);
    let mut frontier = vec![hyp.to_vec()];
    for depth in 1..=TER_MAX_SHIFTS {
        let mut next = Vec::new();
        for s in &frontier {
            for shifted in all_single_shifts(s) {
                best = best.min(depth + levenshtein_recursive(&shifted, reference));
                next.push(shifted);
            }
        }
        frontier = next;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn lcs_cases() {
        assert_eq!(lcs_bruteforce(&toks("a b c d"), &toks("a c b d")), Ok(3));
        assert_eq!(lcs_bruteforce(&toks("x y z"), &toks("x y z")), Ok(3));
        assert_eq!(lcs_bruteforce(&toks("a b"), &toks("c d")), Ok(0));
        assert_eq!(lcs_bruteforce::<&str>(&[], &toks("c d")), Ok(0));
        let long = vec!["a"; 13];
        assert_eq!(lcs_bruteforce(&long, &toks("a")), Err(OracleError::TooLong { len: 13, max: 12 }));
    }

    #[test]
    fn ter_cases() {
        assert_eq!(ter_bruteforce(&toks("c a b d"), &toks("a b c d")), Ok(0.25));
        assert_eq!(ter_bruteforce(&toks("a b c"), &toks("a b c")), Ok(0.0));
        assert_eq!(ter_bruteforce(&toks("x"), &toks("a b")), Ok(1.0));
        assert_eq!(ter_bruteforce(&toks("a b d"), &toks("a b c d")), Ok(0.25));
        assert_eq!(ter_bruteforce(&toks("a"), &[]), Err(OracleError::EmptyReference));
        assert!(ter_bruteforce(&toks("a b c d e f g"), &toks("a")).is_err());
    }

    #[test]
    fn ngram_cases() {
        let got = ngram_count_naive(&toks("a b c"), 2).unwrap();
        assert_eq!(got.len(), 2);
        assert_eq!(got[&vec!["a", "b"]], 1);
        assert_eq!(got[&vec!["b", "c"]], 1);
        let got = ngram_count_naive(&toks("a a a"), 1).unwrap();
        assert_eq!(got[&vec!["a"]], 3);
        assert!(ngram_count_naive(&toks("a b"), 3).unwrap().is_empty());
        assert_eq!(ngram_count_naive(&toks("a"), 0), Err(OracleError::ZeroOrder));
    }

    #[test]
    fn clipped_unigrams() {
        let hyp = toks("the the the the the the the");
        let r = toks("the cat is on the mat");
        assert_eq!(clipped_matches(&hyp, &r, 1), Ok(2));
    }

    #[test]
    fn levenshtein_small() {
        assert_eq!(levenshtein_recursive(&toks("a b d"), &toks("a b c d")), 1);
        assert_eq!(levenshtein_recursive(&toks("c a b d"), &toks("a b c d")), 2);
        assert_eq!(levenshtein_recursive::<&str>(&[], &toks("a b")), 2);
    }

    #[test]
    fn single_shifts_exclude_identity() {
        let s = toks("a b c");
        let shifts = all_single_shifts(&s);
        assert!(shifts.iter().all(|v| v != &s));
        assert!(shifts.contains(&toks("b c a")));
        assert!(shifts.contains(&toks("c a b")));
    }
}
