#![allow(dead_code)]

use critmt_core::TokenSequence;
use proptest::prelude::*;

/// Token sequences over a small vocabulary, so n-grams collide often.
pub fn tokens(vocab: &'static [&'static str], max_len: usize) -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(vocab).prop_map(String::from), 0..=max_len)
}

pub fn nonempty(vocab: &'static [&'static str], max_len: usize) -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(vocab).prop_map(String::from), 1..=max_len)
}

pub fn seq(words: &[String]) -> TokenSequence {
    TokenSequence::new(words.to_vec()).expect("generated tokens are non-empty")
}

pub const SMALL: &[&str] = &["a", "b", "c", "d"];
pub const WIDE: &[&str] = &["the", "cat", "sat", "on", "mat", "dog", "ran", "a", "i", "feel"];
