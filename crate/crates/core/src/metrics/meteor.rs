//! Unigram alignment score with staged matchers and a fragmentation penalty.
//!
//! Stages run in order (exact, stem, synonym by default). Each stage only
//! sees tokens left unmatched by earlier stages and matches one-to-one.
//! Within a stage, among the maximum matchings the one producing the fewest
//! chunks (given earlier stages) is kept; when there are too many
//! candidates to enumerate, occurrences are paired in order instead.
//!
//! With `m` matches: P = m/|hyp|, R = m/|ref|, Fmean = 10PR/(R + 9P),
//! penalty = 0.5·(chunks/m)³, score = Fmean·(1 − penalty).

use std::borrow::Cow;
use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::scalar::Score;
use crate::textnorm::{Lemmatizer, SuffixStemmer, TokenSequence};

/// Upper bound on alignments enumerated per stage.
const MAX_CANDIDATES: usize = 4096;

/// One matching stage: two tokens match when both map to the same key.
pub trait StageMatcher: Send + Sync {
    fn name(&self) -> &str;
    fn key<'a>(&self, token: &'a str) -> Option<Cow<'a, str>>;
}

pub struct ExactMatcher;

impl StageMatcher for ExactMatcher {
    fn name(&self) -> &str {
        "exact"
    }
    fn key<'a>(&self, token: &'a str) -> Option<Cow<'a, str>> {
        Some(Cow::Borrowed(token))
    }
}

pub struct StemMatcher<L = SuffixStemmer> {
    stemmer: L,
}

impl<L: Lemmatizer> StemMatcher<L> {
    pub fn new(stemmer: L) -> Self {
        StemMatcher { stemmer }
    }
}

impl<L: Lemmatizer> StageMatcher for StemMatcher<L> {
    fn name(&self) -> &str {
        "stem"
    }
    fn key<'a>(&self, token: &'a str) -> Option<Cow<'a, str>> {
        Some(Cow::Owned(self.stemmer.lemmatize(token)))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SynonymTableError {
    #[error("line {line}: word {word:?} already belongs to the set on line {first}")]
    Overlap { line: usize, word: String, first: usize },
}

/// Synonym sets, one per line, words separated by whitespace; `#` starts a
/// comment line. A word may appear in only one set. The empty table
/// disables the stage.
#[derive(Debug, Clone, Default)]
pub struct SynonymTable {
    group: HashMap<String, usize>,
}

impl SynonymTable {
    pub fn parse(text: &str) -> Result<Self, SynonymTableError> {
        let mut group = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
                continue;
            }
            for word in raw.split_whitespace() {
                let word = word.to_lowercase();
                match group.get(&word) {
                    Some(&first) if first != line => {
                        return Err(SynonymTableError::Overlap { line, word, first });
                    }
                    _ => {
                        group.insert(word, line);
                    }
                }
            }
        }
        Ok(SynonymTable { group })
    }

    pub fn is_empty(&self) -> bool {
        self.group.is_empty()
    }
}

impl StageMatcher for SynonymTable {
    fn name(&self) -> &str {
        "synonym"
    }
    fn key<'a>(&self, token: &'a str) -> Option<Cow<'a, str>> {
        self.group.get(token).map(|g| Cow::Owned(g.to_string()))
    }
}

/// Ordered matcher stages.
pub struct Meteor {
    stages: Vec<Box<dyn StageMatcher>>,
}

impl Default for Meteor {
    /// Exact, then stem with [`SuffixStemmer`], then an empty synonym table.
    fn default() -> Self {
        Meteor::new(vec![
            Box::new(ExactMatcher),
            Box::new(StemMatcher::new(SuffixStemmer)),
            Box::new(SynonymTable::default()),
        ])
    }
}

/// Result of aligning a hypothesis to a reference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    /// (hyp index, ref index), sorted by hyp index.
    pub pairs: Vec<(usize, usize)>,
    pub chunks: usize,
}

fn count_chunks(sorted: &[(usize, usize)]) -> usize {
    if sorted.is_empty() {
        return 0;
    }
    1 + sorted.windows(2).filter(|w| !(w[1].0 == w[0].0 + 1 && w[1].1 == w[0].1 + 1)).count()
}

fn chunks_with(fixed: &[(usize, usize)], extra: &[(usize, usize)]) -> usize {
    let mut all: Vec<_> = fixed.iter().chain(extra).copied().collect();
    all.sort_unstable();
    count_chunks(&all)
}

/// Every injective pairing of the smaller side into the larger, in
/// lexicographic order (in-order pairing first).
fn class_matchings(hyp: &[usize], refs: &[usize]) -> Vec<Vec<(usize, usize)>> {
    fn rec(
        small: &[usize],
        large: &[usize],
        used: &mut Vec<bool>,
        cur: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if cur.len() == small.len() {
            out.push(cur.clone());
            return;
        }
        let s = small[cur.len()];
        for (j, &l) in large.iter().enumerate() {
            if !used[j] {
                used[j] = true;
                cur.push((s, l));
                rec(small, large, used, cur, out);
                cur.pop();
                used[j] = false;
            }
        }
    }
    let swap = hyp.len() > refs.len();
    let (small, large) = if swap { (refs, hyp) } else { (hyp, refs) };
    let mut out = Vec::new();
    rec(small, large, &mut vec![false; large.len()], &mut Vec::new(), &mut out);
    if swap {
        for m in &mut out {
            for p in m.iter_mut() {
                *p = (p.1, p.0);
            }
        }
    }
    out
}

fn permutations(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i))
}

impl Meteor {
    pub fn new(stages: Vec<Box<dyn StageMatcher>>) -> Self {
        Meteor { stages }
    }

    pub fn stage_names(&self) -> Vec<&str> {
        self.stages.iter().map(|s| s.name()).collect()
    }

    pub fn align(&self, hyp: &[String], reference: &[String]) -> Alignment {
        let mut hyp_used = vec![false; hyp.len()];
        let mut ref_used = vec![false; reference.len()];
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for stage in &self.stages {
            let mut classes: BTreeMap<String, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
            for (i, t) in hyp.iter().enumerate() {
                if !hyp_used[i] {
                    if let Some(k) = stage.key(t) {
                        classes.entry(k.into_owned()).or_default().0.push(i);
                    }
                }
            }
            for (j, t) in reference.iter().enumerate() {
                if !ref_used[j] {
                    if let Some(k) = stage.key(t) {
                        if let Some(entry) = classes.get_mut(k.as_ref()) {
                            entry.1.push(j);
                        }
                    }
                }
            }
            let classes: Vec<_> = classes.into_values().filter(|(h, r)| !h.is_empty() && !r.is_empty()).collect();
            let total = classes.iter().fold(1usize, |acc, (h, r)| {
                let (big, small) = if h.len() >= r.len() { (h.len(), r.len()) } else { (r.len(), h.len()) };
                acc.saturating_mul(permutations(big, small))
            });
            let chosen: Vec<(usize, usize)> = if total <= MAX_CANDIDATES {
                let per_class: Vec<_> = classes.iter().map(|(h, r)| class_matchings(h, r)).collect();
                let mut best: Option<(usize, Vec<(usize, usize)>)> = None;
                let mut idx = vec![0usize; per_class.len()];
                'outer: loop {
                    let candidate: Vec<(usize, usize)> =
                        idx.iter().zip(&per_class).flat_map(|(&i, opts)| opts[i].iter().copied()).collect();
                    let c = chunks_with(&pairs, &candidate);
                    if best.as_ref().is_none_or(|(b, _)| c < *b) {
                        best = Some((c, candidate));
                    }
                    let mut k = per_class.len();
                    loop {
                        if k == 0 {
                            break 'outer;
                        }
                        k -= 1;
                        idx[k] += 1;
                        if idx[k] < per_class[k].len() {
                            continue 'outer;
                        }
                        idx[k] = 0;
                    }
                }
                best.map(|(_, c)| c).unwrap_or_default()
            } else {
                classes.iter().flat_map(|(h, r)| h.iter().copied().zip(r.iter().copied())).collect()
            };
            for &(h, r) in &chosen {
                hyp_used[h] = true;
                ref_used[r] = true;
            }
            pairs.extend(chosen);
        }
        pairs.sort_unstable();
        let chunks = count_chunks(&pairs);
        Alignment { pairs, chunks }
    }

    pub fn score<T: Score>(&self, hyp: &TokenSequence, reference: &TokenSequence) -> T {
        let alignment = self.align(hyp.tokens(), reference.tokens());
        let m = alignment.pairs.len();
        if m == 0 {
            return T::zero();
        }
        let p = T::ratio(m, hyp.len());
        let r = T::ratio(m, reference.len());
        let fmean = T::of(10.0) * p * r / (r + T::of(9.0) * p);
        let frag = T::ratio(alignment.chunks, m);
        let penalty = T::of(0.5) * frag * frag * frag;
        fmean * (T::one() - penalty)
    }
}

/// Score with the given matcher stages.
pub fn meteor<T: Score>(hyp: &TokenSequence, reference: &TokenSequence, matchers: &Meteor) -> T {
    matchers.score(hyp, reference)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(s: &str) -> TokenSequence {
        TokenSequence::from_words(s)
    }

    #[test]
    fn identity_four_tokens() {
        let m = Meteor::default();
        assert_eq!(meteor::<f64>(&seq("a b c d"), &seq("a b c d"), &m), 0.9921875);
    }

    #[test]
    fn stem_stage_matches_plural() {
        let m = Meteor::default();
        assert_eq!(meteor::<f64>(&seq("cats"), &seq("cat"), &m), 0.5);
        let exact_only = Meteor::new(vec![Box::new(ExactMatcher)]);
        assert_eq!(meteor::<f64>(&seq("cats"), &seq("cat"), &exact_only), 0.0);
    }

    #[test]
    fn disjoint_is_zero() {
        assert_eq!(meteor::<f64>(&seq("a b"), &seq("c d"), &Meteor::default()), 0.0);
        assert_eq!(meteor::<f64>(&seq(""), &seq("c d"), &Meteor::default()), 0.0);
    }

    #[test]
    fn synonym_stage() {
        let table = SynonymTable::parse("# sets\nsad unhappy\nglad happy\n").unwrap();
        let m = Meteor::new(vec![Box::new(ExactMatcher), Box::new(table)]);
        let a = m.align(&["i".into(), "am".into(), "unhappy".into()], &["i".into(), "am".into(), "sad".into()]);
        assert_eq!(a.pairs, vec![(0, 0), (1, 1), (2, 2)]);
        assert_eq!(a.chunks, 1);
    }

    #[test]
    fn synonym_table_rejects_overlap() {
        assert!(matches!(SynonymTable::parse("a b\nb c\n"), Err(SynonymTableError::Overlap { line: 2, .. })));
    }

    #[test]
    fn repeated_tokens_pick_fewest_chunks() {
        // greedy left-to-right would pair hyp "the"@0 with ref "the"@0 and
        // break the run "the cat"
        let m = Meteor::new(vec![Box::new(ExactMatcher)]);
        let hyp: Vec<String> = "the cat".split(' ').map(String::from).collect();
        let r: Vec<String> = "the dog the cat".split(' ').map(String::from).collect();
        let a = m.align(&hyp, &r);
        assert_eq!(a.pairs, vec![(0, 2), (1, 3)]);
        assert_eq!(a.chunks, 1);
    }

    #[test]
    fn fragmentation_penalty() {
        // "a b c d" vs "c d a b": 4 matches in 2 chunks
        let m = Meteor::default();
        let got: f64 = meteor(&seq("a b c d"), &seq("c d a b"), &m);
        let want = 1.0 * (1.0 - 0.5 * (2.0f64 / 4.0).powi(3));
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn chunk_counting() {
        assert_eq!(count_chunks(&[]), 0);
        assert_eq!(count_chunks(&[(0, 0), (1, 1), (2, 3)]), 2);
        assert_eq!(count_chunks(&[(0, 1), (1, 0)]), 2);
    }

    #[test]
    fn large_ambiguity_falls_back_to_in_order() {
        let hyp: Vec<String> = vec!["a".into(); 9];
        let m = Meteor::default();
        let a = m.align(&hyp, &hyp);
        assert_eq!(a.chunks, 1);
        assert_eq!(a.pairs.len(), 9);
    }
}
