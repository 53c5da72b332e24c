//! Text normalization and tokenization shared by the classifier input path
//! and the string metrics.

use std::collections::HashMap;
use std::sync::OnceLock;

use thiserror::Error;
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;
use unicode_segmentation::UnicodeSegmentation;

/// Independent normalization switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct NormConfig {
    pub lowercase: bool,
    pub strip_punctuation: bool,
    pub map_emoji: bool,
    pub lemmatize: bool,
}

impl NormConfig {
    /// Everything off: normalization reduces to NFC.
    pub const NONE: NormConfig =
        NormConfig { lowercase: false, strip_punctuation: false, map_emoji: false, lemmatize: false };

    /// Classifier input: lowercase, punctuation and symbols removed, emoji
    /// mapped to words, lemmatized.
    pub const CLASSIFIER: NormConfig =
        NormConfig { lowercase: true, strip_punctuation: true, map_emoji: true, lemmatize: true };

    /// Metric input: lowercase only; tokenization separates punctuation.
    pub const METRIC: NormConfig =
        NormConfig { lowercase: true, strip_punctuation: false, map_emoji: false, lemmatize: false };

    /// Short stable description, recorded in report metadata.
    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        if self.lowercase {
            parts.push("lowercase");
        }
        if self.strip_punctuation {
            parts.push("strip_punctuation");
        }
        if self.map_emoji {
            parts.push("map_emoji");
        }
        if self.lemmatize {
            parts.push("lemmatize");
        }
        if parts.is_empty() {
            "nfc".to_string()
        } else {
            format!("nfc+{}", parts.join("+"))
        }
    }
}

/// Word-level lemmatizer slot. Implementations should be idempotent so that
/// normalization stays idempotent.
pub trait Lemmatizer: Send + Sync {
    fn lemmatize(&self, word: &str) -> String;
}

/// Light English suffix stripper (s/es/ies/ed/ing) with a short-stem guard,
/// applied until no rule fires. Only all-lowercase ASCII words are touched.
#[derive(Debug, Clone, Copy, Default)]
pub struct SuffixStemmer;

const MIN_STEM: usize = 3;

fn has_vowel(s: &str) -> bool {
    s.bytes().any(|b| matches!(b, b'a' | b'e' | b'i' | b'o' | b'u' | b'y'))
}

impl SuffixStemmer {
    fn strip_once(w: &str) -> Option<String> {
        let n = w.len();
        if let Some(stem) = w.strip_suffix("sses") {
            return Some(format!("{stem}ss"));
        }
        if let Some(stem) = w.strip_suffix("ies") {
            if stem.len() >= 2 {
                return Some(format!("{stem}y"));
            }
        }
        if let Some(stem) = w.strip_suffix("es") {
            let sibilant = ["s", "x", "z", "ch", "sh"].iter().any(|s| stem.ends_with(s));
            if sibilant && stem.len() >= MIN_STEM {
                return Some(stem.to_string());
            }
        }
        if w.ends_with('s') && !["ss", "us", "is"].iter().any(|s| w.ends_with(s)) && n > MIN_STEM {
            return Some(w[..n - 1].to_string());
        }
        if let Some(stem) = w.strip_suffix("ing") {
            if stem.len() >= MIN_STEM && has_vowel(stem) {
                return Some(stem.to_string());
            }
        }
        if let Some(stem) = w.strip_suffix("ed") {
            if stem.len() >= MIN_STEM && has_vowel(stem) && !stem.ends_with('e') {
                return Some(stem.to_string());
            }
        }
        None
    }
}

impl Lemmatizer for SuffixStemmer {
    fn lemmatize(&self, word: &str) -> String {
        if word.is_empty() || !word.bytes().all(|b| b.is_ascii_lowercase()) {
            return word.to_string();
        }
        let mut cur = word.to_string();
        while let Some(next) = Self::strip_once(&cur) {
            cur = next;
        }
        cur
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LexiconError {
    #[error("line {line}: expected `emoji<TAB>word`")]
    Malformed { line: usize },
    #[error("line {line}: key {key:?} is not a single grapheme cluster")]
    NotSingleGrapheme { line: usize, key: String },
    #[error("line {line}: word {word:?} must be non-empty and contain no whitespace")]
    BadWord { line: usize, word: String },
    #[error("line {line}: duplicate key {key:?} (first on line {first})")]
    DuplicateKey { line: usize, key: String, first: usize },
}

const VS16: char = '\u{FE0F}';

/// Emoji to word table.
#[derive(Debug, Clone, Default)]
pub struct EmojiLexicon {
    map: HashMap<String, String>,
}

impl EmojiLexicon {
    /// Parses the two-column TSV format; `#` starts a comment line.
    pub fn parse_tsv(text: &str) -> Result<Self, LexiconError> {
        let mut map = HashMap::new();
        let mut first_line: HashMap<String, usize> = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            if raw.trim().is_empty() || raw.starts_with('#') {
                continue;
            }
            let (key, word) = raw.split_once('\t').ok_or(LexiconError::Malformed { line })?;
            let key: String = key.nfc().filter(|&c| c != VS16).collect();
            let word = word.trim_end_matches('\r');
            if key.graphemes(true).count() != 1 {
                return Err(LexiconError::NotSingleGrapheme { line, key });
            }
            if word.is_empty() || word.chars().any(char::is_whitespace) {
                return Err(LexiconError::BadWord { line, word: word.to_string() });
            }
            if let Some(&first) = first_line.get(&key) {
                return Err(LexiconError::DuplicateKey { line, key, first });
            }
            first_line.insert(key.clone(), line);
            map.insert(key, word.nfc().collect());
        }
        Ok(EmojiLexicon { map })
    }

    /// The table bundled with the crate.
    pub fn bundled() -> &'static EmojiLexicon {
        static LEXICON: OnceLock<EmojiLexicon> = OnceLock::new();
        LEXICON.get_or_init(|| {
            EmojiLexicon::parse_tsv(include_str!("../data/emoji_lexicon.tsv")).expect("bundled emoji table is valid")
        })
    }

    /// Looks up one grapheme cluster, ignoring emoji-presentation selectors.
    pub fn lookup(&self, emoji: &str) -> Option<&str> {
        if let Some(w) = self.map.get(emoji) {
            return Some(w);
        }
        if emoji.contains(VS16) {
            let bare: String = emoji.chars().filter(|&c| c != VS16).collect();
            return self.map.get(&bare).map(String::as_str);
        }
        None
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Word for an emoji in the bundled table.
pub fn emoji_lexicon(emoji: &str) -> Option<String> {
    EmojiLexicon::bundled().lookup(emoji).map(str::to_string)
}

/// A configured normalization pass with its emoji table and lemmatizer.
pub struct Normalizer<'a> {
    config: NormConfig,
    lexicon: &'a EmojiLexicon,
    lemmatizer: Box<dyn Lemmatizer + 'a>,
}

impl<'a> Normalizer<'a> {
    pub fn new(config: NormConfig) -> Normalizer<'static> {
        Normalizer { config, lexicon: EmojiLexicon::bundled(), lemmatizer: Box::new(SuffixStemmer) }
    }

    pub fn with_lexicon<'b>(self, lexicon: &'b EmojiLexicon) -> Normalizer<'b>
    where
        'a: 'b,
    {
        Normalizer { config: self.config, lexicon, lemmatizer: self.lemmatizer }
    }

    pub fn with_lemmatizer(mut self, lemmatizer: impl Lemmatizer + 'a) -> Self {
        self.lemmatizer = Box::new(lemmatizer);
        self
    }

    pub fn config(&self) -> NormConfig {
        self.config
    }

    pub fn normalize(&self, text: &str) -> String {
        let mut s: String = text.nfc().collect();
        if self.config.map_emoji {
            s = map_emoji(&s, self.lexicon);
        }
        if self.config.lowercase {
            s = s.to_lowercase();
        }
        if self.config.strip_punctuation {
            s = strip_punctuation(&s);
        }
        if self.config.lemmatize {
            s = lemmatize_words(&s, self.lemmatizer.as_ref());
        }
        s.nfc().collect()
    }
}

/// Normalizes with the bundled emoji table and the default stemmer.
pub fn normalize(text: &str, config: NormConfig) -> String {
    Normalizer::new(config).normalize(text)
}

fn map_emoji(s: &str, lexicon: &EmojiLexicon) -> String {
    let mut out = String::with_capacity(s.len());
    let mut pad_next = false;
    for g in s.graphemes(true) {
        let starts_with_space = g.chars().next().is_some_and(char::is_whitespace);
        if let Some(word) = lexicon.lookup(g) {
            if out.chars().last().is_some_and(|c| !c.is_whitespace()) {
                out.push(' ');
            }
            out.push_str(word);
            pad_next = true;
        } else {
            if pad_next && !starts_with_space {
                out.push(' ');
            }
            out.push_str(g);
            pad_next = false;
        }
    }
    out
}

fn keeps(c: char) -> bool {
    c.is_alphanumeric() || c.is_whitespace() || is_combining_mark(c)
}

fn strip_punctuation(s: &str) -> String {
    let spaced: String = s.chars().map(|c| if keeps(c) { c } else { ' ' }).collect();
    spaced.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn lemmatize_words(s: &str, lemmatizer: &dyn Lemmatizer) -> String {
    let mut out = String::with_capacity(s.len());
    let mut word = String::new();
    for c in s.chars() {
        if c.is_alphabetic() {
            word.push(c);
        } else {
            if !word.is_empty() {
                out.push_str(&lemmatizer.lemmatize(&word));
                word.clear();
            }
            out.push(c);
        }
    }
    if !word.is_empty() {
        out.push_str(&lemmatizer.lemmatize(&word));
    }
    out
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TokenError {
    #[error("token {index} is empty")]
    EmptyToken { index: usize },
    #[error("span count {spans} does not match token count {tokens}")]
    SpanCount { spans: usize, tokens: usize },
    #[error("span {index} is empty, overlaps its predecessor, or runs backwards")]
    BadSpan { index: usize },
}

/// Ordered non-empty tokens, optionally with byte spans into the text they
/// came from.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenSequence {
    tokens: Vec<String>,
    spans: Option<Vec<(usize, usize)>>,
}

impl TokenSequence {
    pub fn new(tokens: Vec<String>) -> Result<Self, TokenError> {
        if let Some(index) = tokens.iter().position(String::is_empty) {
            return Err(TokenError::EmptyToken { index });
        }
        Ok(TokenSequence { tokens, spans: None })
    }

    pub fn with_spans(tokens: Vec<String>, spans: Vec<(usize, usize)>) -> Result<Self, TokenError> {
        let mut seq = TokenSequence::new(tokens)?;
        if spans.len() != seq.tokens.len() {
            return Err(TokenError::SpanCount { spans: spans.len(), tokens: seq.tokens.len() });
        }
        let mut prev_end = 0;
        for (index, &(start, end)) in spans.iter().enumerate() {
            if start >= end || start < prev_end {
                return Err(TokenError::BadSpan { index });
            }
            prev_end = end;
        }
        seq.spans = Some(spans);
        Ok(seq)
    }

    /// Splits on whitespace only. Handy for building fixtures.
    pub fn from_words(text: &str) -> Self {
        TokenSequence { tokens: text.split_whitespace().map(str::to_string).collect(), spans: None }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn spans(&self) -> Option<&[(usize, usize)]> {
        self.spans.as_deref()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn join(&self) -> String {
        self.tokens.join(" ")
    }
}

enum Pending {
    None,
    Word(usize),
    Punct(usize),
}

/// Splits on whitespace and separates every punctuation or symbol character
/// into its own token. Runs of letters and digits form word tokens;
/// combining marks stay attached to the token before them.
pub fn tokenize(text: &str) -> TokenSequence {
    let mut tokens = Vec::new();
    let mut spans = Vec::new();
    let mut pending = Pending::None;
    let flush = |pending: &mut Pending, end: usize, tokens: &mut Vec<String>, spans: &mut Vec<(usize, usize)>| {
        if let Pending::Word(start) | Pending::Punct(start) = *pending {
            tokens.push(text[start..end].to_string());
            spans.push((start, end));
        }
        *pending = Pending::None;
    };
    for (i, c) in text.char_indices() {
        if c.is_whitespace() {
            flush(&mut pending, i, &mut tokens, &mut spans);
        } else if is_combining_mark(c) {
            if let Pending::None = pending {
                pending = Pending::Word(i);
            }
        } else if c.is_alphanumeric() {
            match pending {
                Pending::Word(_) => {}
                _ => {
                    flush(&mut pending, i, &mut tokens, &mut spans);
                    pending = Pending::Word(i);
                }
            }
        } else {
            flush(&mut pending, i, &mut tokens, &mut spans);
            pending = Pending::Punct(i);
        }
    }
    flush(&mut pending, text.len(), &mut tokens, &mut spans);
    TokenSequence { tokens, spans: Some(spans) }
}

/// Tokens a metric sees for `text` under `config`.
pub fn metric_tokens(text: &str, config: NormConfig) -> TokenSequence {
    let normalized = normalize(text, config);
    let seq = tokenize(&normalized);
    TokenSequence { tokens: seq.tokens, spans: None }
}
