use super::MetricError;
use crate::scalar::Score;
use crate::textnorm::TokenSequence;

/// Longest block a single shift may move.
pub const MAX_SHIFT_LEN: usize = 10;

/// Word-level Levenshtein distance (unit costs), two-row DP.
pub fn levenshtein<S: PartialEq>(a: &[S], b: &[S]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Edit breakdown behind a TER score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TerStats {
    pub shifts: usize,
    /// Insertions, deletions, and substitutions left after shifting.
    pub edit_distance: usize,
    pub ref_len: usize,
}

impl TerStats {
    pub fn edits(&self) -> usize {
        self.shifts + self.edit_distance
    }

    pub fn score<T: Score>(&self) -> T {
        T::ratio(self.edits(), self.ref_len)
    }
}

fn contains_block<S: PartialEq>(hay: &[S], block: &[S]) -> bool {
    hay.windows(block.len()).any(|w| w == block)
}

fn apply_shift<S: Clone>(s: &[S], start: usize, len: usize, dest: usize) -> Vec<S> {
    let mut rest: Vec<S> = Vec::with_capacity(s.len());
    rest.extend_from_slice(&s[..start]);
    rest.extend_from_slice(&s[start + len..]);
    let mut out = Vec::with_capacity(s.len());
    out.extend_from_slice(&rest[..dest]);
    out.extend_from_slice(&s[start..start + len]);
    out.extend_from_slice(&rest[dest..]);
    out
}

/// Hypotheses up to this length get a two-shift lookahead over unrestricted
/// blocks at every step.
pub const LOOKAHEAD_MAX_LEN: usize = 8;

/// Every sequence one block move away from `cur`. With `restrict`, blocks
/// are at most [`MAX_SHIFT_LEN`] long and must occur verbatim in the
/// reference.
fn shifted<S: Clone + PartialEq>(cur: &[S], reference: &[S], restrict: bool) -> Vec<Vec<S>> {
    let mut out = Vec::new();
    for start in 0..cur.len() {
        let max_len = if restrict { MAX_SHIFT_LEN.min(cur.len() - start) } else { cur.len() - start };
        for len in 1..=max_len {
            if restrict && !contains_block(reference, &cur[start..start + len]) {
                // any longer block from this start contains this one
                break;
            }
            for dest in 0..=(cur.len() - len) {
                if dest != start {
                    out.push(apply_shift(cur, start, len, dest));
                }
            }
        }
    }
    out
}

/// Best move from `cur`: (sequence, distance after, shifts used). Earlier
/// candidates win ties.
fn best_move<S: Clone + PartialEq>(cur: &[S], reference: &[S]) -> Option<(Vec<S>, usize, usize)> {
    let lookahead = cur.len() <= LOOKAHEAD_MAX_LEN;
    let mut best: Option<(Vec<S>, usize, usize)> = None;
    let mut consider = |seq: Vec<S>, shifts: usize| {
        let d = levenshtein(&seq, reference);
        if best.as_ref().is_none_or(|b| d + shifts < b.1 + b.2) {
            best = Some((seq, d, shifts));
        }
    };
    for first in shifted(cur, reference, !lookahead) {
        if lookahead {
            for second in shifted(&first, reference, false) {
                consider(second, 2);
            }
        }
        consider(first, 1);
    }
    best
}

/// Greedy shift search followed by Levenshtein distance. Each step takes
/// the move with the lowest shifts-plus-distance total and is applied only
/// if it lowers that total. Short hypotheses consider pairs of shifts per
/// step; longer ones consider single constrained shifts.
pub fn ter_stats<S: Clone + PartialEq>(hyp: &[S], reference: &[S]) -> Result<TerStats, MetricError> {
    if reference.is_empty() {
        return Err(MetricError::EmptyReference);
    }
    let mut cur = hyp.to_vec();
    let mut dist = levenshtein(&cur, reference);
    let mut shifts = 0;
    while dist > 1 {
        match best_move(&cur, reference) {
            Some((seq, d, k)) if d + k < dist => {
                cur = seq;
                dist = d;
                shifts += k;
            }
            _ => break,
        }
    }
    Ok(TerStats { shifts, edit_distance: dist, ref_len: reference.len() })
}

/// Translation edit rate: (shifts + insertions + deletions + substitutions)
/// divided by the reference length. Lower is better.
pub fn ter<T: Score>(hyp: &TokenSequence, reference: &TokenSequence) -> Result<T, MetricError> {
    Ok(ter_stats(hyp.tokens(), reference.tokens())?.score())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(s: &str) -> TokenSequence {
        TokenSequence::from_words(s)
    }

    #[test]
    fn identity_insertion_and_shift() {
        assert_eq!(ter::<f64>(&seq("a b c d"), &seq("a b c d")).unwrap(), 0.0);
        assert_eq!(ter::<f64>(&seq("a b d"), &seq("a b c d")).unwrap(), 0.25);
        let stats = ter_stats(seq("c a b d").tokens(), seq("a b c d").tokens()).unwrap();
        assert_eq!((stats.shifts, stats.edit_distance), (1, 0));
        assert_eq!(stats.score::<f64>(), 0.25);
    }

    #[test]
    fn empty_reference_is_an_error() {
        assert!(matches!(ter::<f64>(&seq("a"), &seq("")), Err(MetricError::EmptyReference)));
    }

    #[test]
    fn empty_hypothesis_deletes_everything() {
        assert_eq!(ter::<f64>(&seq(""), &seq("a b")).unwrap(), 1.0);
    }

    #[test]
    fn can_exceed_one() {
        assert_eq!(ter::<f64>(&seq("x y z"), &seq("a")).unwrap(), 3.0);
    }

    #[test]
    fn block_shift() {
        // moving "c d" as one block costs a single edit
        let stats = ter_stats(seq("c d a b e").tokens(), seq("a b c d e").tokens()).unwrap();
        assert_eq!(stats.edits(), 1);
    }

    #[test]
    fn long_hypothesis_uses_constrained_greedy() {
        let r = seq("a b c d e f g h i j k l");
        let h = seq("i j k l a b c d e f g h");
        let stats = ter_stats(h.tokens(), r.tokens()).unwrap();
        assert_eq!((stats.shifts, stats.edit_distance), (1, 0));
    }

    #[test]
    fn two_shift_lookahead_on_short_input() {
        // no single shift helps enough on its own here, a pair does
        let h = ["a", "d", "b", "a"];
        let r = ["c", "a", "a", "c"];
        let stats = ter_stats(&h, &r).unwrap();
        assert_eq!(stats.edits(), critmt_oracles::ter_edits_bruteforce(&h, &r));
    }

    #[test]
    fn levenshtein_basics() {
        assert_eq!(levenshtein(&["a", "b"], &["a", "b"]), 0);
        assert_eq!(levenshtein::<&str>(&[], &["a", "b"]), 2);
        assert_eq!(levenshtein(&["k", "i", "t"], &["s", "i", "t", "s"]), 2);
    }
}
