//! Hand-checkable metric cases with expected values computed by the
//! oracles in this crate. `critmt gen-fixtures` writes them out; the
//! metrics test suite reads them back.

use serde::{Deserialize, Serialize};

use crate::scores::{
    bertscore_naive, bleu_naive, google_bleu_naive, meteor_bruteforce, precision_recall_naive, rescale_naive,
    rouge_l_naive,
};
use crate::ter_bruteforce;

/// One metric evaluation and its oracle value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub name: String,
    /// One of `ngram_precision`, `sacrebleu`, `google_bleu`, `rouge_l`,
    /// `meteor`, `ter`, `bertscore`, `rescale`.
    pub metric: String,
    #[serde(default)]
    pub hyp: Vec<String>,
    #[serde(default, rename = "ref")]
    pub reference: Vec<String>,
    /// BLEU order, or the n-gram order for `ngram_precision`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smoothing: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hyp_vectors: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ref_vectors: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<f64>,
    pub expected: f64,
}

impl Fixture {
    fn text(name: &str, metric: &str, hyp: &str, reference: &str) -> Self {
        let words = |s: &str| s.split_whitespace().map(String::from).collect();
        Fixture {
            name: name.into(),
            metric: metric.into(),
            hyp: words(hyp),
            reference: words(reference),
            max_n: None,
            smoothing: None,
            hyp_vectors: None,
            ref_vectors: None,
            raw: None,
            baseline: None,
            expected: f64::NAN,
        }
    }

    fn expect(mut self, value: f64) -> Self {
        self.expected = value;
        self
    }
}

/// Tokens of the corrected-reference regression record, after metric
/// normalization.
pub const FEEL_TIGHT: (&str, &str) = ("i feel tight", "i have anxiety");

/// Every fixture, expected values filled in by the oracles.
pub fn derived_fixtures() -> Vec<Fixture> {
    let exact = |a: &String, b: &String| a == b;
    let mut out = Vec::new();

    let mut f = Fixture::text(
        "clipped_unigram_precision",
        "ngram_precision",
        "the the the the the the the",
        "the cat is on the mat",
    );
    f.max_n = Some(1);
    let p = precision_recall_naive(&f.hyp, &f.reference, 1).expect("order 1").0;
    out.push(f.expect(p));

    let mut f = Fixture::text("brevity_penalty", "sacrebleu", "the cat", "the cat sat");
    f.max_n = Some(2);
    f.smoothing = Some(false);
    let v = bleu_naive(&f.hyp, &f.reference, 2, false).expect("order 2");
    out.push(f.expect(v));

    let f = Fixture::text("google_bleu_min", "google_bleu", "a b", "a b c");
    let v = google_bleu_naive(&f.hyp, &f.reference);
    out.push(f.expect(v));

    let f = Fixture::text("rouge_l_swap", "rouge_l", "a b c d", "a c b d");
    let v = rouge_l_naive(&f.hyp, &f.reference).expect("short input");
    out.push(f.expect(v));

    let f = Fixture::text("meteor_identity", "meteor", "a b c d", "a b c d");
    let v = meteor_bruteforce(&f.hyp, &f.reference, exact).expect("short input");
    out.push(f.expect(v));

    // the stem stage pairs "cats" with "cat"
    let f = Fixture::text("meteor_stem", "meteor", "cats", "cat");
    let v = meteor_bruteforce(&f.hyp, &f.reference, |a: &String, b: &String| {
        a.trim_end_matches('s') == b.trim_end_matches('s')
    })
    .expect("short input");
    out.push(f.expect(v));

    let f = Fixture::text("ter_shift", "ter", "c a b d", "a b c d");
    let v = ter_bruteforce(&f.hyp, &f.reference).expect("short input");
    out.push(f.expect(v));

    let f = Fixture::text("ter_insertion", "ter", "a b d", "a b c d");
    let v = ter_bruteforce(&f.hyp, &f.reference).expect("short input");
    out.push(f.expect(v));

    let s3 = 3f64.sqrt() / 2.0;
    let mut f = Fixture::text("bertscore_sixty_degrees", "bertscore", "x y", "u v");
    f.hyp_vectors = Some(vec![vec![1.0, 0.0], vec![-1.0, 0.0]]);
    f.ref_vectors = Some(vec![vec![0.5, s3], vec![-0.5, s3]]);
    let v = bertscore_naive(f.hyp_vectors.as_ref().unwrap(), f.ref_vectors.as_ref().unwrap()).2;
    out.push(f.expect(v));

    let mut f = Fixture::text("rescale", "rescale", "", "");
    f.raw = Some(0.91);
    f.baseline = Some(0.82);
    out.push(f.expect(rescale_naive(0.91, 0.82)));

    let (h, r) = FEEL_TIGHT;
    let mut f = Fixture::text("feel_tight_sacrebleu", "sacrebleu", h, r);
    f.max_n = Some(4);
    f.smoothing = Some(true);
    let v = bleu_naive(&f.hyp, &f.reference, 4, true).expect("order 4");
    out.push(f.expect(v));
    let f = Fixture::text("feel_tight_meteor", "meteor", h, r);
    let v = meteor_bruteforce(&f.hyp, &f.reference, exact).expect("short input");
    out.push(f.expect(v));
    let f = Fixture::text("feel_tight_rouge_l", "rouge_l", h, r);
    let v = rouge_l_naive(&f.hyp, &f.reference).expect("short input");
    out.push(f.expect(v));
    let f = Fixture::text("feel_tight_ter", "ter", h, r);
    let v = ter_bruteforce(&f.hyp, &f.reference).expect("short input");
    out.push(f.expect(v));
    let f = Fixture::text("feel_tight_google_bleu", "google_bleu", h, r);
    let v = google_bleu_naive(&f.hyp, &f.reference);
    out.push(f.expect(v));

    out
}

/// Fixtures as pretty-printed JSON with a trailing newline.
pub fn render_fixtures(fixtures: &[Fixture]) -> String {
    let mut s = serde_json::to_string_pretty(fixtures).expect("fixtures serialize");
    s.push('\n');
    s
}

pub fn parse_fixtures(text: &str) -> Result<Vec<Fixture>, serde_json::Error> {
    serde_json::from_str(text)
}
