//! Translate, classify, and screen a corpus for label discrepancies.
//!
//! External services sit behind [`TranslatorClient`] and
//! [`ClassifierClient`]. Every response is cached on disk, so rerunning a
//! stage after an interruption only calls the client for records it has not
//! seen. Records whose calls keep failing are reported as failed and left
//! out of the output corpus; none are silently dropped.

pub mod cache;
pub mod http;
pub mod stub;

use std::collections::BTreeSet;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{ClassifierLabel, Corpus, CorpusError, SegmentRecord, SourceLabel};
use crate::textnorm::{NormConfig, Normalizer};

pub use cache::ResponseCache;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ClientError {
    /// Network trouble or a temporary server fault; worth retrying.
    #[error("transport error: {0}")]
    Transport(String),
    /// The service answered with something outside its contract.
    #[error("contract violation: {0}")]
    Contract(String),
}

impl ClientError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, ClientError::Transport(_))
    }
}

pub trait TranslatorClient: Send + Sync {
    /// Stable identifier, used to namespace cached responses.
    fn id(&self) -> &str;

    fn translate(&self, text: &str) -> Result<String, ClientError>;

    /// Translates several texts; results come back in input order.
    fn translate_batch(&self, texts: &[String]) -> Vec<Result<String, ClientError>> {
        texts.iter().map(|t| self.translate(t)).collect()
    }
}

pub trait ClassifierClient: Send + Sync {
    fn id(&self) -> &str;

    /// Raw label text; the pipeline checks it against [`ClassifierLabel`].
    fn classify(&self, text: &str) -> Result<String, ClientError>;
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("record {id:?} has empty source_text")]
    EmptySource { id: String },
    #[error("record {id:?} has empty mt_text; translate it first")]
    EmptyMtText { id: String },
    #[error("record {id:?} has no predicted_label; classify it first")]
    MissingPrediction { id: String },
    #[error("invalid discrepancy rule: {0}")]
    InvalidRule(String),
    #[error("worker count must be at least 1")]
    NoWorkers,
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("run log: {0}")]
    Io(#[from] std::io::Error),
}

/// Exponential backoff: attempt `k` (1-based) that fails waits
/// `base_delay * 2^(k-1)`, capped at `max_delay`, before the next try.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { max_attempts: 4, base_delay: Duration::from_millis(500), max_delay: Duration::from_secs(8) }
    }
}

impl RetryPolicy {
    /// No waiting between attempts.
    pub fn immediate(max_attempts: u32) -> Self {
        RetryPolicy { max_attempts, base_delay: Duration::ZERO, max_delay: Duration::ZERO }
    }

    pub fn delay_after(&self, attempt: u32) -> Duration {
        let factor = 1u32.checked_shl(attempt.saturating_sub(1)).unwrap_or(u32::MAX);
        self.base_delay.saturating_mul(factor).min(self.max_delay)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Translate,
    Classify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Ok,
    Cached,
    Skipped,
    TransportError,
    ContractViolation,
    Failed,
}

/// One line of the run log. `attempt` is 0 for events that made no call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunEvent {
    pub record_id: String,
    pub action: Action,
    pub attempt: u32,
    pub outcome: Outcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunLog {
    pub events: Vec<RunEvent>,
}

impl RunLog {
    pub fn to_jsonl(&self) -> String {
        self.events.iter().map(|e| serde_json::to_string(e).expect("event serializes") + "\n").collect()
    }

    /// Appends the events to a line-delimited log file.
    pub fn append_to(&self, path: &Path) -> std::io::Result<()> {
        let mut f = OpenOptions::new().create(true).append(true).open(path)?;
        f.write_all(self.to_jsonl().as_bytes())?;
        f.sync_all()
    }

    /// Failed attempts that were followed by another try.
    pub fn retries(&self, record_id: &str) -> usize {
        let attempts: Vec<_> = self.events.iter().filter(|e| e.record_id == record_id && e.attempt > 0).collect();
        attempts.windows(2).filter(|w| w[0].outcome != Outcome::Ok && w[1].attempt == w[0].attempt + 1).count()
    }

    pub fn failed_ids(&self) -> Vec<&str> {
        self.events.iter().filter(|e| e.outcome == Outcome::Failed).map(|e| e.record_id.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FailedRecord {
    pub id: String,
    pub error: ClientError,
}

/// Result of a translate or classify stage.
#[derive(Debug)]
pub struct StageOutput {
    /// Every record that did not fail, in input order.
    pub corpus: Corpus,
    pub failed: Vec<FailedRecord>,
    pub log: RunLog,
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub workers: usize,
    /// Redo records whose output field is already filled.
    pub force: bool,
    pub retry: RetryPolicy,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { workers: 4, force: false, retry: RetryPolicy::default() }
    }
}

fn call_with_retry(
    record_id: &str,
    action: Action,
    policy: &RetryPolicy,
    events: &mut Vec<RunEvent>,
    mut call: impl FnMut() -> Result<String, ClientError>,
) -> Result<String, ClientError> {
    let max = policy.max_attempts.max(1);
    let mut attempt = 1;
    loop {
        let result = call();
        let (outcome, detail) = match &result {
            Ok(_) => (Outcome::Ok, None),
            Err(e @ ClientError::Transport(_)) => (Outcome::TransportError, Some(e.to_string())),
            Err(e @ ClientError::Contract(_)) => (Outcome::ContractViolation, Some(e.to_string())),
        };
        events.push(RunEvent { record_id: record_id.to_string(), action, attempt, outcome, detail });
        match result {
            Err(e) if e.is_retryable() && attempt < max => {
                std::thread::sleep(policy.delay_after(attempt));
                attempt += 1;
            }
            other => return other,
        }
    }
}

type Processed = (Result<SegmentRecord, FailedRecord>, Vec<RunEvent>);

/// Runs `work` over the records on at most `workers` threads and returns
/// the results in input order.
fn fan_out(
    records: &[SegmentRecord],
    workers: usize,
    work: impl Fn(&SegmentRecord) -> Processed + Sync,
) -> Vec<Processed> {
    let slots: Vec<Mutex<Option<Processed>>> = records.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..workers.min(records.len()).max(1) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= records.len() {
                    break;
                }
                let out = work(&records[i]);
                *slots[i].lock().unwrap_or_else(|e| e.into_inner()) = Some(out);
            });
        }
    });
    slots.into_iter().map(|m| m.into_inner().unwrap_or_else(|e| e.into_inner()).expect("every slot filled")).collect()
}

fn assemble(input: &Corpus, processed: Vec<Processed>) -> Result<StageOutput, PipelineError> {
    let mut records = Vec::new();
    let mut failed = Vec::new();
    let mut log = RunLog::default();
    for (result, events) in processed {
        log.events.extend(events);
        match result {
            Ok(r) => records.push(r),
            Err(f) => failed.push(f),
        }
    }
    Ok(StageOutput { corpus: input.with_records(records)?, failed, log })
}

fn event(record_id: &str, action: Action, outcome: Outcome, detail: Option<String>) -> RunEvent {
    RunEvent { record_id: record_id.to_string(), action, attempt: 0, outcome, detail }
}

/// Shared per-record flow: skip, cache lookup, client call with retry,
/// validation, cache store.
#[allow(clippy::too_many_arguments)]
fn process_one<V>(
    record: &SegmentRecord,
    action: Action,
    already_done: bool,
    input: &str,
    client_id: &str,
    cache: Option<&ResponseCache>,
    options: &RunOptions,
    call: impl Fn(&str) -> Result<String, ClientError>,
    validate: impl Fn(&str) -> Result<V, ClientError>,
    apply: impl Fn(SegmentRecord, V) -> Result<SegmentRecord, CorpusError>,
) -> Processed {
    let id = record.id();
    if already_done && !options.force {
        return (Ok(record.clone()), vec![event(id, action, Outcome::Skipped, None)]);
    }
    let action_key = match action {
        Action::Translate => "translate",
        Action::Classify => "classify",
    };
    let mut events = Vec::new();
    let cached = cache.and_then(|c| c.get(client_id, action_key, input)).and_then(|raw| validate(&raw).ok());
    let value = match cached {
        Some(v) => {
            events.push(event(id, action, Outcome::Cached, None));
            Ok(v)
        }
        None => call_with_retry(id, action, &options.retry, &mut events, || call(input)).and_then(|raw| {
            let v = validate(&raw)?;
            if let Some(c) = cache {
                c.put(client_id, action_key, input, &raw)
                    .map_err(|e| ClientError::Transport(format!("cache write failed: {e}")))?;
            }
            Ok(v)
        }),
    };
    let result = value.and_then(|v| {
        apply(record.clone(), v).map_err(|e| ClientError::Contract(format!("response breaks a record invariant: {e}")))
    });
    match result {
        Ok(r) => (Ok(r), events),
        Err(error) => {
            let attempts = events.iter().map(|e| e.attempt).max().unwrap_or(0);
            events.push(RunEvent {
                record_id: id.to_string(),
                action,
                attempt: attempts,
                outcome: Outcome::Failed,
                detail: Some(error.to_string()),
            });
            (Err(FailedRecord { id: id.to_string(), error }), events)
        }
    }
}

/// Fills `mt_text` on every record. Records that already have MT output
/// are kept as they are unless `options.force` is set.
pub fn translate_corpus(
    corpus: &Corpus,
    client: &dyn TranslatorClient,
    cache: Option<&ResponseCache>,
    options: &RunOptions,
) -> Result<StageOutput, PipelineError> {
    if options.workers == 0 {
        return Err(PipelineError::NoWorkers);
    }
    if let Some(r) = corpus.records().iter().find(|r| r.source_text().trim().is_empty()) {
        return Err(PipelineError::EmptySource { id: r.id().to_string() });
    }
    let processed = fan_out(corpus.records(), options.workers, |r| {
        process_one(
            r,
            Action::Translate,
            !r.mt_text().is_empty(),
            r.source_text(),
            client.id(),
            cache,
            options,
            |text| client.translate(text),
            |raw| Ok(raw.to_string()),
            |rec, mt| rec.with_mt_text(mt),
        )
    });
    assemble(corpus, processed)
}

/// Fills `predicted_label` on every record. The classifier sees `mt_text`
/// after normalization with [`NormConfig::CLASSIFIER`].
pub fn classify_corpus(
    corpus: &Corpus,
    client: &dyn ClassifierClient,
    cache: Option<&ResponseCache>,
    options: &RunOptions,
) -> Result<StageOutput, PipelineError> {
    classify_corpus_with(corpus, client, cache, options, &Normalizer::new(NormConfig::CLASSIFIER))
}

/// [`classify_corpus`] with a caller-supplied normalizer.
pub fn classify_corpus_with(
    corpus: &Corpus,
    client: &dyn ClassifierClient,
    cache: Option<&ResponseCache>,
    options: &RunOptions,
    normalizer: &Normalizer<'_>,
) -> Result<StageOutput, PipelineError> {
    if options.workers == 0 {
        return Err(PipelineError::NoWorkers);
    }
    if let Some(r) = corpus.records().iter().find(|r| r.mt_text().trim().is_empty()) {
        return Err(PipelineError::EmptyMtText { id: r.id().to_string() });
    }
    // normalize up front: the normalizer is not shared across threads
    let inputs: Vec<String> = corpus.records().iter().map(|r| normalizer.normalize(r.mt_text())).collect();
    let index: std::collections::HashMap<&str, usize> =
        corpus.records().iter().enumerate().map(|(i, r)| (r.id(), i)).collect();
    let processed = fan_out(corpus.records(), options.workers, |r| {
        process_one(
            r,
            Action::Classify,
            r.predicted_label().is_some(),
            &inputs[index[r.id()]],
            client.id(),
            cache,
            options,
            |text| client.classify(text),
            |raw| {
                raw.trim()
                    .parse::<ClassifierLabel>()
                    .map_err(|e| ClientError::Contract(format!("classifier returned {e}")))
            },
            |rec, label| rec.with_predicted_label(label),
        )
    });
    assemble(corpus, processed)
}

/// Which gold/predicted label combinations count as a discrepancy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscrepancyRule {
    gold_trigger: BTreeSet<SourceLabel>,
    predicted_trigger: ClassifierLabel,
}

impl Default for DiscrepancyRule {
    /// Depressed or suicidal source posts whose translation is classified
    /// non-mental.
    fn default() -> Self {
        DiscrepancyRule {
            gold_trigger: [SourceLabel::Depression, SourceLabel::DepressionSuicidal].into(),
            predicted_trigger: ClassifierLabel::NonMental,
        }
    }
}

impl DiscrepancyRule {
    pub fn new(gold_trigger: BTreeSet<SourceLabel>, predicted_trigger: ClassifierLabel) -> Result<Self, PipelineError> {
        if gold_trigger.is_empty() {
            return Err(PipelineError::InvalidRule("gold trigger set is empty".into()));
        }
        Ok(DiscrepancyRule { gold_trigger, predicted_trigger })
    }

    pub fn gold_trigger(&self) -> &BTreeSet<SourceLabel> {
        &self.gold_trigger
    }

    pub fn predicted_trigger(&self) -> ClassifierLabel {
        self.predicted_trigger
    }

    pub fn matches(&self, record: &SegmentRecord) -> Result<bool, PipelineError> {
        let predicted =
            record.predicted_label().ok_or_else(|| PipelineError::MissingPrediction { id: record.id().to_string() })?;
        Ok(self.gold_trigger.contains(&record.gold_label()) && predicted == self.predicted_trigger)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("rule serializes")
    }
}

/// Metadata key under which [`extract_discrepancies`] records its rule.
pub const RULE_METADATA_KEY: &str = "discrepancy_rule";

/// Sub-corpus of records matching `rule`, in input order. The rule is
/// stored in the output metadata.
pub fn extract_discrepancies(corpus: &Corpus, rule: &DiscrepancyRule) -> Result<Corpus, PipelineError> {
    let mut kept = Vec::new();
    for r in corpus.records() {
        if rule.matches(r)? {
            kept.push(r.clone());
        }
    }
    let mut metadata = corpus.metadata().clone();
    metadata.insert(RULE_METADATA_KEY.into(), rule.to_json());
    Ok(Corpus::new(kept, metadata)?)
}

#[cfg(test)]
mod tests {
    use super::stub::{Counted, Flaky, KeywordClassifier, StubTranslator};
    use super::*;
    use crate::corpus::{parse_corpus, RecordFields, MINI_CORPUS};

    fn untranslated(n: usize) -> Corpus {
        let records = (0..n)
            .map(|i| {
                SegmentRecord::try_from(RecordFields::new(format!("r{i}"), format!("نص {i}"), SourceLabel::Depression))
                    .unwrap()
            })
            .collect();
        Corpus::from_records(records).unwrap()
    }

    fn fast() -> RunOptions {
        RunOptions { retry: RetryPolicy::immediate(3), ..RunOptions::default() }
    }

    #[test]
    fn stub_translation_fills_every_record() {
        let out = translate_corpus(&untranslated(3), &StubTranslator::constant("X"), None, &fast()).unwrap();
        assert!(out.failed.is_empty());
        assert!(out.corpus.records().iter().all(|r| r.mt_text() == "X"));
        assert_eq!(out.corpus.records().iter().map(|r| r.id()).collect::<Vec<_>>(), ["r0", "r1", "r2"]);
    }

    #[test]
    fn translated_records_are_skipped_unless_forced() {
        let corpus = parse_corpus(MINI_CORPUS).unwrap();
        let client = Counted::new(StubTranslator::constant("X"));
        let out = translate_corpus(&corpus, &client, None, &fast()).unwrap();
        assert_eq!(client.calls(), 0);
        assert_eq!(out.corpus, corpus);
        let forced = RunOptions { force: true, ..fast() };
        let out = translate_corpus(&corpus, &client, None, &forced).unwrap();
        assert_eq!(client.calls(), corpus.len());
        assert!(out.corpus.records().iter().all(|r| r.mt_text() == "X"));
    }

    #[test]
    fn transient_failures_are_retried() {
        let client = Flaky::new(StubTranslator::constant("X"), 2);
        let out = translate_corpus(&untranslated(1), &client, None, &fast()).unwrap();
        assert_eq!(out.corpus.records()[0].mt_text(), "X");
        assert_eq!(out.log.retries("r0"), 2);
        let outcomes: Vec<_> = out.log.events.iter().map(|e| (e.attempt, e.outcome)).collect();
        assert_eq!(outcomes, [(1, Outcome::TransportError), (2, Outcome::TransportError), (3, Outcome::Ok)]);
    }

    #[test]
    fn exhausted_retries_mark_the_record_failed() {
        let client = Flaky::new(StubTranslator::constant("X"), 10);
        let corpus = untranslated(3);
        let out = translate_corpus(&corpus, &client, None, &fast()).unwrap();
        assert_eq!(out.corpus.len() + out.failed.len(), corpus.len());
        assert_eq!(out.failed.len(), 3);
        assert_eq!(out.log.failed_ids(), ["r0", "r1", "r2"]);
    }

    #[test]
    fn warm_cache_makes_no_calls() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ResponseCache::open(dir.path()).unwrap();
        let client = Counted::new(StubTranslator::constant("X"));
        let corpus = untranslated(5);
        translate_corpus(&corpus, &client, Some(&cache), &fast()).unwrap();
        assert_eq!(client.calls(), 5);
        client.reset();
        let again = translate_corpus(&corpus, &client, Some(&cache), &fast()).unwrap();
        assert_eq!(client.calls(), 0);
        assert!(again.log.events.iter().all(|e| e.outcome == Outcome::Cached));
    }

    #[test]
    fn classify_with_stub() {
        let corpus =
            translate_corpus(&untranslated(3), &StubTranslator::constant("I am fine"), None, &fast()).unwrap().corpus;
        let out = classify_corpus(&corpus, &KeywordClassifier::constant("non_mental"), None, &fast()).unwrap();
        assert!(out.corpus.records().iter().all(|r| r.predicted_label() == Some(ClassifierLabel::NonMental)));
    }

    #[test]
    fn classify_requires_mt_text() {
        let err = classify_corpus(&untranslated(2), &KeywordClassifier::standard(), None, &fast()).unwrap_err();
        assert!(matches!(err, PipelineError::EmptyMtText { ref id } if id == "r0"));
    }

    #[test]
    fn out_of_set_label_is_a_contract_violation() {
        let corpus = translate_corpus(&untranslated(1), &StubTranslator::constant("hi"), None, &fast()).unwrap().corpus;
        let client = Counted::new(KeywordClassifier::constant("happy"));
        let out = classify_corpus(&corpus, &client, None, &fast()).unwrap();
        assert_eq!(client.calls(), 1, "contract violations are not retried");
        assert!(out.corpus.is_empty());
        assert!(matches!(out.failed[0].error, ClientError::Contract(_)));
    }

    #[test]
    fn classifier_sees_normalized_text() {
        let corpus = translate_corpus(&untranslated(1), &StubTranslator::constant("So DEPRESSED!!! 😞"), None, &fast())
            .unwrap()
            .corpus;
        struct Echo(Mutex<Vec<String>>);
        impl ClassifierClient for Echo {
            fn id(&self) -> &str {
                "echo"
            }
            fn classify(&self, text: &str) -> Result<String, ClientError> {
                self.0.lock().unwrap().push(text.to_string());
                Ok("depression".into())
            }
        }
        let echo = Echo(Mutex::new(Vec::new()));
        classify_corpus(&corpus, &echo, None, &fast()).unwrap();
        assert_eq!(echo.0.lock().unwrap().as_slice(), ["so depress dislike"]);
    }

    #[test]
    fn default_rule_cases() {
        let rule = DiscrepancyRule::default();
        let rec = |gold, predicted| {
            let mut f = RecordFields::new("x", "s", gold);
            f.predicted_label = Some(predicted);
            SegmentRecord::try_from(f).unwrap()
        };
        assert!(rule.matches(&rec(SourceLabel::DepressionSuicidal, ClassifierLabel::NonMental)).unwrap());
        assert!(!rule.matches(&rec(SourceLabel::NonDepression, ClassifierLabel::NonMental)).unwrap());
        assert!(!rule.matches(&rec(SourceLabel::Depression, ClassifierLabel::Depression)).unwrap());
        assert!(!rule.matches(&rec(SourceLabel::Depression, ClassifierLabel::Anxiety)).unwrap());
        assert!(DiscrepancyRule::new(BTreeSet::new(), ClassifierLabel::NonMental).is_err());
    }

    #[test]
    fn extraction_requires_predictions_and_records_rule() {
        let corpus = parse_corpus(MINI_CORPUS).unwrap();
        assert!(matches!(
            extract_discrepancies(&corpus, &DiscrepancyRule::default()),
            Err(PipelineError::MissingPrediction { .. })
        ));
        let classified = classify_corpus(&corpus, &KeywordClassifier::standard(), None, &fast()).unwrap().corpus;
        let flagged = extract_discrepancies(&classified, &DiscrepancyRule::default()).unwrap();
        assert!(flagged.metadata().contains_key(RULE_METADATA_KEY));
    }

    #[test]
    fn backoff_doubles_and_caps() {
        let p = RetryPolicy {
            max_attempts: 10,
            base_delay: Duration::from_millis(100),
            max_delay: Duration::from_millis(500),
        };
        let delays: Vec<_> = (1..=5).map(|a| p.delay_after(a).as_millis()).collect();
        assert_eq!(delays, [100, 200, 400, 500, 500]);
    }

    #[test]
    fn batch_preserves_order() {
        let t = StubTranslator::table([("a".to_string(), "A".to_string())].into());
        let out: Vec<_> = t.translate_batch(&["b".into(), "a".into()]).into_iter().map(Result::unwrap).collect();
        assert_eq!(out, ["b", "A"]);
    }
}
