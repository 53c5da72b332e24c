//! Oracle-derived fixtures, replayed against the production metrics.

use critmt_core::corpus::MINI_CORPUS;
use critmt_core::metrics::{
    bertscore, bleu, google_bleu, ngram_precision_recall, rescale, rouge_l, ter, BleuConfig, EmbeddingSet, Meteor,
    Scorer, Smoothing,
};
use critmt_core::{Corpus, TokenSequence};
use critmt_oracles::fixtures::{derived_fixtures, parse_fixtures, render_fixtures, Fixture};

const COMMITTED: &str = include_str!("data/derived_fixtures.json");

fn production_value(f: &Fixture) -> f64 {
    let h = TokenSequence::new(f.hyp.clone()).unwrap();
    let r = TokenSequence::new(f.reference.clone()).unwrap();
    match f.metric.as_str() {
        "ngram_precision" => ngram_precision_recall::<f64>(&h, &r, f.max_n.unwrap()).0,
        "sacrebleu" => {
            let smoothing = if f.smoothing.unwrap() { Smoothing::AddOneOnZero } else { Smoothing::None };
            bleu(&h, &[r], &BleuConfig::new(f.max_n.unwrap(), smoothing).unwrap()).unwrap()
        }
        "google_bleu" => google_bleu(&h, &r),
        "rouge_l" => rouge_l(&h, &r),
        "meteor" => Meteor::default().score(&h, &r),
        "ter" => ter(&h, &r).unwrap(),
        "bertscore" => {
            let hs = EmbeddingSet::new(h, f.hyp_vectors.clone().unwrap()).unwrap();
            let rs = EmbeddingSet::new(r, f.ref_vectors.clone().unwrap()).unwrap();
            bertscore(&hs, &rs).unwrap().f1
        }
        "rescale" => rescale(f.raw.unwrap(), f.baseline.unwrap()).unwrap(),
        other => panic!("unknown fixture metric {other}"),
    }
}

#[test]
fn committed_file_is_current() {
    assert_eq!(COMMITTED, render_fixtures(&derived_fixtures()));
}

#[test]
fn production_matches_every_fixture() {
    let fixtures = parse_fixtures(COMMITTED).unwrap();
    assert!(fixtures.len() >= 15);
    for f in &fixtures {
        let got = production_value(f);
        assert!((got - f.expected).abs() <= 1e-9, "{}: got {got}, expected {}", f.name, f.expected);
    }
}

#[test]
fn feel_tight_record_vector() {
    let corpus: Corpus = critmt_core::corpus::parse_corpus(MINI_CORPUS).unwrap();
    let record = corpus.records().iter().find(|r| r.mt_text() == "I feel tight").unwrap();
    let v = Scorer::<f64>::new().score_record(record, None).unwrap();
    let fixtures = derived_fixtures();
    let want = |name: &str| fixtures.iter().find(|f| f.name == name).unwrap().expected;
    assert!((v.sacrebleu - want("feel_tight_sacrebleu")).abs() <= 1e-9);
    assert!((v.meteor - want("feel_tight_meteor")).abs() <= 1e-9);
    assert!((v.rouge_l - want("feel_tight_rouge_l")).abs() <= 1e-9);
    assert!((v.ter - want("feel_tight_ter")).abs() <= 1e-9);
    assert!((v.google_bleu - want("feel_tight_google_bleu")).abs() <= 1e-9);
    assert!(v.bertscore.is_none());
}
