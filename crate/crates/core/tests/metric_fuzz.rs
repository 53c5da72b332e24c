//! Identity and range properties of every metric on random sequences.

mod support;

use critmt_core::metrics::{
    bertscore, bleu, corpus_bleu, google_bleu, meteor, rescale, rouge_l, ter, BleuConfig, EmbeddingSet, Meteor,
};
use critmt_core::TokenSequence;
use critmt_oracles::clipped_matches;
use proptest::prelude::*;
use support::{nonempty, seq, tokens, SMALL, WIDE};

fn unit(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

fn vectors(dim: usize, max_len: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    let v = prop::collection::vec(-1.0f64..1.0, dim).prop_filter("non-zero", |v| v.iter().any(|x| x.abs() > 1e-3));
    prop::collection::vec(v, 1..=max_len)
}

fn embed(v: Vec<Vec<f64>>) -> EmbeddingSet<f64> {
    let words = (0..v.len()).map(|i| format!("t{i}")).collect();
    EmbeddingSet::new(TokenSequence::new(words).unwrap(), v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn bleu_identity_and_bounds(s in nonempty(WIDE, 16), h in tokens(WIDE, 16), r in nonempty(WIDE, 16)) {
        let c = BleuConfig::default();
        let same: f64 = bleu(&seq(&s), &[seq(&s)], &c).unwrap();
        prop_assert!((same - 1.0).abs() < 1e-12, "{}", same);
        let v: f64 = bleu(&seq(&h), &[seq(&r)], &c).unwrap();
        prop_assert!(unit(v));
    }

    #[test]
    fn corpus_of_one_equals_sentence(h in tokens(WIDE, 12), r in nonempty(WIDE, 12)) {
        let c = BleuConfig::default();
        let sentence: f64 = bleu(&seq(&h), &[seq(&r)], &c).unwrap();
        let corpus: f64 = corpus_bleu(&[(seq(&h), vec![seq(&r)])], &c).unwrap();
        prop_assert_eq!(sentence, corpus);
    }

    #[test]
    fn google_bleu_identity_bounds_and_min(s in nonempty(SMALL, 12), h in tokens(SMALL, 12), r in tokens(SMALL, 12)) {
        prop_assert_eq!(google_bleu::<f64>(&seq(&s), &seq(&s)), 1.0);
        let v: f64 = google_bleu(&seq(&h), &seq(&r));
        prop_assert!(unit(v));
        if !h.is_empty() && !r.is_empty() {
            let (mut m, mut ht, mut rt) = (0usize, 0usize, 0usize);
            for n in 1..=4 {
                m += clipped_matches(&h, &r, n).unwrap();
                ht += (h.len() + 1).saturating_sub(n);
                rt += (r.len() + 1).saturating_sub(n);
            }
            prop_assert!(v <= m as f64 / ht as f64);
            prop_assert!(v <= m as f64 / rt as f64);
        }
    }

    #[test]
    fn rouge_l_identity_and_bounds(s in nonempty(WIDE, 16), h in tokens(WIDE, 16), r in tokens(WIDE, 16)) {
        prop_assert_eq!(rouge_l::<f64>(&seq(&s), &seq(&s)), 1.0);
        prop_assert!(unit(rouge_l(&seq(&h), &seq(&r))));
    }

    #[test]
    fn meteor_identity_and_bounds(s in nonempty(SMALL, 14), h in tokens(WIDE, 14), r in tokens(WIDE, 14)) {
        let m = Meteor::default();
        let got: f64 = meteor(&seq(&s), &seq(&s), &m);
        let want = 1.0 - 0.5 / (s.len() as f64).powi(3);
        prop_assert!((got - want).abs() < 1e-12, "{} vs {}", got, want);
        prop_assert!(unit(meteor(&seq(&h), &seq(&r), &m)));
    }

    #[test]
    fn ter_identity_and_bounds(s in nonempty(WIDE, 16), h in tokens(WIDE, 16), r in nonempty(WIDE, 16)) {
        prop_assert_eq!(ter::<f64>(&seq(&s), &seq(&s)).unwrap(), 0.0);
        prop_assert!(ter::<f64>(&seq(&h), &seq(&r)).unwrap() >= 0.0);
    }

    #[test]
    fn bertscore_identity_bounds_and_permutation(
        (h, r, perm) in (1usize..=6).prop_flat_map(|dim| (vectors(dim, 6), vectors(dim, 6)))
            .prop_flat_map(|(h, r)| { let n = h.len(); (Just(h), Just(r), Just((0..n).collect::<Vec<_>>()).prop_shuffle()) })
    ) {
        let hs = embed(h.clone());
        let rs = embed(r);
        let same = bertscore(&hs, &hs).unwrap();
        for v in [same.precision, same.recall, same.f1] {
            prop_assert!((v - 1.0).abs() < 1e-9);
        }
        let s = bertscore(&hs, &rs).unwrap();
        prop_assert!(unit(s.precision) && unit(s.recall) && unit(s.f1));
        let shuffled = embed(perm.iter().map(|&i| h[i].clone()).collect());
        let t = bertscore(&shuffled, &rs).unwrap();
        prop_assert!((t.precision - s.precision).abs() < 1e-12);
        prop_assert!((t.recall - s.recall).abs() < 1e-12);
        prop_assert!((t.f1 - s.f1).abs() < 1e-12);
    }

    #[test]
    fn rescale_fixed_points(raw in 0.0f64..=1.0, b in -1.0f64..0.999) {
        prop_assert!((rescale(b, b).unwrap() - 0.0f64).abs() < 1e-12);
        prop_assert!((rescale(1.0, b).unwrap() - 1.0f64).abs() < 1e-12);
        prop_assert!(rescale(raw, b).unwrap() <= 1.0 + 1e-12);
    }
}

#[test]
fn single_precision_identity() {
    let s = TokenSequence::from_words("i do not want to live");
    assert_eq!(bleu::<f32>(&s, std::slice::from_ref(&s), &BleuConfig::default()).unwrap(), 1.0);
    assert_eq!(rouge_l::<f32>(&s, &s), 1.0);
    assert_eq!(ter::<f32>(&s, &s).unwrap(), 0.0);
    assert_eq!(google_bleu::<f32>(&s, &s), 1.0);
}
