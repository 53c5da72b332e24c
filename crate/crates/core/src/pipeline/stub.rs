//! Deterministic in-process clients for tests and offline runs.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use super::{ClassifierClient, ClientError, TranslatorClient};

/// Looks the source text up in a table; a miss returns the fallback, or
/// echoes the input when there is none.
pub struct StubTranslator {
    id: String,
    table: HashMap<String, String>,
    fallback: Option<String>,
}

impl StubTranslator {
    pub fn constant(output: impl Into<String>) -> Self {
        StubTranslator { id: "stub-constant".into(), table: HashMap::new(), fallback: Some(output.into()) }
    }

    pub fn table(table: HashMap<String, String>) -> Self {
        StubTranslator { id: "stub-table".into(), table, fallback: None }
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }
}

impl TranslatorClient for StubTranslator {
    fn id(&self) -> &str {
        &self.id
    }

    fn translate(&self, text: &str) -> Result<String, ClientError> {
        Ok(self.table.get(text).or(self.fallback.as_ref()).cloned().unwrap_or_else(|| text.to_string()))
    }
}

/// Returns the label of the first rule whose keyword occurs in the
/// (already normalized) text, else the default. Labels are raw strings so
/// tests can make it break the label contract.
pub struct KeywordClassifier {
    id: String,
    rules: Vec<(String, String)>,
    default: String,
}

impl KeywordClassifier {
    pub fn new(rules: Vec<(String, String)>, default: impl Into<String>) -> Self {
        KeywordClassifier { id: "stub-keyword".into(), rules, default: default.into() }
    }

    pub fn constant(label: impl Into<String>) -> Self {
        KeywordClassifier::new(Vec::new(), label)
    }

    /// `depress` maps to depression, `anxious` to anxiety, anything else
    /// is non_mental.
    pub fn standard() -> Self {
        KeywordClassifier::new(
            vec![("depress".into(), "depression".into()), ("anxious".into(), "anxiety".into())],
            "non_mental",
        )
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }
}

impl ClassifierClient for KeywordClassifier {
    fn id(&self) -> &str {
        &self.id
    }

    fn classify(&self, text: &str) -> Result<String, ClientError> {
        Ok(self.rules.iter().find(|(k, _)| text.contains(k.as_str())).map_or(&self.default, |(_, label)| label).clone())
    }
}

/// Fails the first `failures` calls for each distinct input with a
/// transport error, then delegates.
pub struct Flaky<C> {
    inner: C,
    failures: usize,
    seen: Mutex<HashMap<String, usize>>,
}

impl<C> Flaky<C> {
    pub fn new(inner: C, failures: usize) -> Self {
        Flaky { inner, failures, seen: Mutex::new(HashMap::new()) }
    }

    fn should_fail(&self, text: &str) -> bool {
        let mut seen = self.seen.lock().unwrap_or_else(|e| e.into_inner());
        let n = seen.entry(text.to_string()).or_insert(0);
        *n += 1;
        *n <= self.failures
    }
}

impl<C: TranslatorClient> TranslatorClient for Flaky<C> {
    fn id(&self) -> &str {
        self.inner.id()
    }
    fn translate(&self, text: &str) -> Result<String, ClientError> {
        if self.should_fail(text) {
            return Err(ClientError::Transport("simulated outage".into()));
        }
        self.inner.translate(text)
    }
}

impl<C: ClassifierClient> ClassifierClient for Flaky<C> {
    fn id(&self) -> &str {
        self.inner.id()
    }
    fn classify(&self, text: &str) -> Result<String, ClientError> {
        if self.should_fail(text) {
            return Err(ClientError::Transport("simulated outage".into()));
        }
        self.inner.classify(text)
    }
}

/// Counts calls that reach the wrapped client.
pub struct Counted<C> {
    inner: C,
    calls: AtomicUsize,
}

impl<C> Counted<C> {
    pub fn new(inner: C) -> Self {
        Counted { inner, calls: AtomicUsize::new(0) }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn reset(&self) {
        self.calls.store(0, Ordering::SeqCst);
    }
}

impl<C: TranslatorClient> TranslatorClient for Counted<C> {
    fn id(&self) -> &str {
        self.inner.id()
    }
    fn translate(&self, text: &str) -> Result<String, ClientError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.translate(text)
    }
}

impl<C: ClassifierClient> ClassifierClient for Counted<C> {
    fn id(&self) -> &str {
        self.inner.id()
    }
    fn classify(&self, text: &str) -> Result<String, ClientError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.classify(text)
    }
}
