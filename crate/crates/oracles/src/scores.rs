//! Metric formulas written out directly from their definitions, on top of
//! the enumerating primitives in the crate root.

use crate::{clipped_matches, lcs_bruteforce, OracleError};

/// Longest sequence accepted by [`meteor_bruteforce`].
pub const METEOR_MAX_LEN: usize = 6;

fn check_len(len: usize, max: usize) -> Result<(), OracleError> {
    if len > max {
        return Err(OracleError::TooLong { len, max });
    }
    Ok(())
}

fn windows(len: usize, n: usize) -> usize {
    (len + 1).saturating_sub(n)
}

/// Sentence BLEU against one reference: product of clipped precisions,
/// then the `max_n`-th root, then the brevity penalty. With `smooth`,
/// orders 2 and up that have no matches count as one match out of one
/// more candidate.
pub fn bleu_naive<T: Clone + Ord>(hyp: &[T], reference: &[T], max_n: usize, smooth: bool) -> Result<f64, OracleError> {
    if max_n == 0 {
        return Err(OracleError::ZeroOrder);
    }
    if hyp.is_empty() {
        return Ok(0.0);
    }
    let mut product = 1.0;
    for n in 1..=max_n {
        let mut m = clipped_matches(hyp, reference, n)? as f64;
        let mut t = windows(hyp.len(), n) as f64;
        if smooth && n >= 2 && m == 0.0 {
            m += 1.0;
            t += 1.0;
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        product *= m / t;
    }
    let c = hyp.len() as f64;
    let r = reference.len() as f64;
    let bp = if c < r { (1.0 - r / c).exp() } else { 1.0 };
    Ok(product.powf(1.0 / max_n as f64) * bp)
}

/// Clipped n-gram precision and recall for one order.
pub fn precision_recall_naive<T: Clone + Ord>(hyp: &[T], reference: &[T], n: usize) -> Result<(f64, f64), OracleError> {
    let m = clipped_matches(hyp, reference, n)? as f64;
    let ratio = |d: usize| if d == 0 { 0.0 } else { m / d as f64 };
    Ok((ratio(windows(hyp.len(), n)), ratio(windows(reference.len(), n))))
}

/// Minimum of pooled precision and recall over orders 1 to 4.
pub fn google_bleu_naive<T: Clone + Ord>(hyp: &[T], reference: &[T]) -> f64 {
    if hyp.is_empty() || reference.is_empty() {
        return if hyp.len() == reference.len() { 1.0 } else { 0.0 };
    }
    let mut matches = 0;
    let mut hyp_total = 0;
    let mut ref_total = 0;
    for n in 1..=4 {
        matches += clipped_matches(hyp, reference, n).expect("order is positive");
        hyp_total += windows(hyp.len(), n);
        ref_total += windows(reference.len(), n);
    }
    let p = matches as f64 / hyp_total as f64;
    let r = matches as f64 / ref_total as f64;
    p.min(r)
}

/// ROUGE-L F1 from the enumerated LCS.
pub fn rouge_l_naive<T: PartialEq>(hyp: &[T], reference: &[T]) -> Result<f64, OracleError> {
    let l = lcs_bruteforce(hyp, reference)? as f64;
    if l == 0.0 {
        return Ok(0.0);
    }
    let p = l / hyp.len() as f64;
    let r = l / reference.len() as f64;
    Ok(2.0 * p * r / (p + r))
}

/// METEOR over every one-to-one matching allowed by `related`: the
/// matching size is maximised first, then the chunk count minimised.
pub fn meteor_bruteforce<T>(hyp: &[T], reference: &[T], related: impl Fn(&T, &T) -> bool) -> Result<f64, OracleError> {
    check_len(hyp.len(), METEOR_MAX_LEN)?;
    check_len(reference.len(), METEOR_MAX_LEN)?;
    let mut best: Option<(usize, usize)> = None;
    let mut used = vec![false; reference.len()];
    let mut assign: Vec<Option<usize>> = Vec::with_capacity(hyp.len());
    search(hyp, reference, &related, &mut used, &mut assign, &mut best);
    let (m, chunks) = best.unwrap_or((0, 0));
    if m == 0 {
        return Ok(0.0);
    }
    let p = m as f64 / hyp.len() as f64;
    let r = m as f64 / reference.len() as f64;
    let fmean = 10.0 * p * r / (r + 9.0 * p);
    let frag = chunks as f64 / m as f64;
    Ok(fmean * (1.0 - 0.5 * frag.powi(3)))
}

fn search<T>(
    hyp: &[T],
    reference: &[T],
    related: &impl Fn(&T, &T) -> bool,
    used: &mut Vec<bool>,
    assign: &mut Vec<Option<usize>>,
    best: &mut Option<(usize, usize)>,
) {
    let i = assign.len();
    if i == hyp.len() {
        let m = assign.iter().flatten().count();
        let c = chunk_count(assign);
        // larger matchings first, then fewer chunks
        if best.is_none_or(|(bm, bc)| m > bm || (m == bm && c < bc)) {
            *best = Some((m, c));
        }
        return;
    }
    assign.push(None);
    search(hyp, reference, related, used, assign, best);
    assign.pop();
    for j in 0..reference.len() {
        if !used[j] && related(&hyp[i], &reference[j]) {
            used[j] = true;
            assign.push(Some(j));
            search(hyp, reference, related, used, assign, best);
            assign.pop();
            used[j] = false;
        }
    }
}

/// Runs of matched hypothesis positions whose reference positions are
/// also consecutive.
fn chunk_count(assign: &[Option<usize>]) -> usize {
    let mut chunks = 0;
    let mut prev: Option<(usize, usize)> = None;
    for (i, a) in assign.iter().enumerate() {
        if let Some(j) = *a {
            let continues = matches!(prev, Some((pi, pj)) if pi + 1 == i && pj + 1 == j);
            if !continues {
                chunks += 1;
            }
            prev = Some((i, j));
        }
    }
    chunks
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    (dot / (na * nb)).clamp(0.0, 1.0)
}

/// Greedy cosine matching: (precision, recall, f1).
pub fn bertscore_naive(hyp: &[Vec<f64>], reference: &[Vec<f64>]) -> (f64, f64, f64) {
    let best = |from: &[Vec<f64>], to: &[Vec<f64>]| {
        from.iter().map(|a| to.iter().map(|b| cosine(a, b)).fold(0.0, f64::max)).sum::<f64>() / from.len() as f64
    };
    let p = best(hyp, reference);
    let r = best(reference, hyp);
    let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (p, r, f)
}

pub fn rescale_naive(raw: f64, baseline: f64) -> f64 {
    (raw - baseline) / (1.0 - baseline)
}
