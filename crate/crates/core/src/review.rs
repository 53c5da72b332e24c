//! Annotation queue state and its append-only decision log.
//!
//! Every accepted decision is appended to the log and synced to disk
//! before the caller hears about it. The queue's pending and done sets are
//! derived from the log, so a restarted service replays the log and picks
//! up where it stopped. Locks are in-memory only and are simply gone after
//! a restart.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

pub use chrono::Duration;
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::corpus::{Corpus, CorpusError, ErrorType, SegmentRecord};

/// One annotator decision. `error_type` and `corrected_reference` are
/// present exactly when `critical` is true.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationEvent {
    pub record_id: String,
    pub critical: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_type: Option<ErrorType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrected_reference: Option<String>,
    pub annotator_id: String,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    fn new(field: &str, message: impl Into<String>) -> Self {
        FieldError { field: field.into(), message: message.into() }
    }
}

/// A decision as submitted, before the server stamps it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Submission {
    pub record_id: String,
    pub critical: bool,
    pub error_type: Option<ErrorType>,
    pub corrected_reference: Option<String>,
    pub annotator_id: String,
}

impl Submission {
    /// Reads a submission from a JSON object, collecting every problem
    /// instead of stopping at the first.
    pub fn from_json(body: &Value) -> Result<Self, Vec<FieldError>> {
        let mut errors = Vec::new();
        let Some(obj) = body.as_object() else {
            return Err(vec![FieldError::new("body", "expected a JSON object")]);
        };
        let text = |name: &str, errors: &mut Vec<FieldError>| -> Option<String> {
            match obj.get(name) {
                None | Some(Value::Null) => None,
                Some(Value::String(s)) => Some(s.clone()),
                Some(_) => {
                    errors.push(FieldError::new(name, "must be a string"));
                    None
                }
            }
        };
        let record_id = text("record_id", &mut errors);
        let annotator_id = text("annotator_id", &mut errors);
        let corrected_reference = text("corrected_reference", &mut errors);
        let error_type = text("error_type", &mut errors).and_then(|s| match s.parse::<ErrorType>() {
            Ok(e) => Some(e),
            Err(e) => {
                errors.push(FieldError::new("error_type", e.to_string()));
                None
            }
        });
        let critical = match obj.get("critical") {
            Some(Value::Bool(b)) => Some(*b),
            None | Some(Value::Null) => {
                errors.push(FieldError::new("critical", "is required"));
                None
            }
            Some(_) => {
                errors.push(FieldError::new("critical", "must be true or false"));
                None
            }
        };
        let had_type_error = errors.iter().any(|e| e.field == "error_type");
        let sub = Submission {
            record_id: record_id.unwrap_or_default(),
            critical: critical.unwrap_or(false),
            error_type,
            corrected_reference,
            annotator_id: annotator_id.unwrap_or_default(),
        };
        let mut rest = sub.problems();
        if critical.is_none() {
            rest.retain(|e| e.field != "error_type" && e.field != "corrected_reference");
        }
        if had_type_error {
            rest.retain(|e| e.field != "error_type");
        }
        errors.extend(rest);
        if errors.is_empty() {
            Ok(sub)
        } else {
            Err(errors)
        }
    }

    /// Every rule the submission breaks.
    pub fn problems(&self) -> Vec<FieldError> {
        let mut errors = Vec::new();
        if self.record_id.trim().is_empty() {
            errors.push(FieldError::new("record_id", "is required"));
        }
        if self.annotator_id.trim().is_empty() {
            errors.push(FieldError::new("annotator_id", "is required"));
        }
        let has_reference = self.corrected_reference.as_deref().is_some_and(|r| !r.trim().is_empty());
        if self.critical {
            if self.error_type.is_none() {
                errors.push(FieldError::new("error_type", "is required for a critical error"));
            }
            if !has_reference {
                errors.push(FieldError::new("corrected_reference", "is required for a critical error"));
            }
        } else {
            if self.error_type.is_some() {
                errors.push(FieldError::new("error_type", "must be absent when the error is not critical"));
            }
            if self.corrected_reference.is_some() {
                errors.push(FieldError::new("corrected_reference", "must be absent when the error is not critical"));
            }
        }
        errors
    }

    pub fn stamp(self, timestamp: DateTime<Utc>) -> AnnotationEvent {
        AnnotationEvent {
            record_id: self.record_id,
            critical: self.critical,
            error_type: self.error_type,
            corrected_reference: self.corrected_reference,
            annotator_id: self.annotator_id,
            timestamp,
        }
    }
}

impl AnnotationEvent {
    pub fn problems(&self) -> Vec<FieldError> {
        Submission {
            record_id: self.record_id.clone(),
            critical: self.critical,
            error_type: self.error_type,
            corrected_reference: self.corrected_reference.clone(),
            annotator_id: self.annotator_id.clone(),
        }
        .problems()
    }
}

#[derive(Debug, Error)]
pub enum ReviewError {
    #[error("unknown annotator {0:?}")]
    UnknownAnnotator(String),
    #[error("record {record_id:?} is not assigned to {annotator_id:?}")]
    Conflict { record_id: String, annotator_id: String },
    #[error("invalid annotation: {}", .0.iter().map(|e| format!("{} {}", e.field, e.message)).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<FieldError>),
    #[error("annotation log line {line}: {message}")]
    Log { line: usize, message: String },
    #[error("annotation log {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
}

pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

/// Clock that only moves when told to.
pub struct ManualClock(Mutex<DateTime<Utc>>);

impl ManualClock {
    pub fn new(start: DateTime<Utc>) -> Self {
        ManualClock(Mutex::new(start))
    }

    pub fn advance(&self, by: Duration) {
        let mut t = self.0.lock().unwrap_or_else(|e| e.into_inner());
        *t += by;
    }
}

impl Clock for ManualClock {
    fn now(&self) -> DateTime<Utc> {
        *self.0.lock().unwrap_or_else(|e| e.into_inner())
    }
}

/// Reads a log file. A final line without its newline is a write cut short
/// by a crash and is ignored; any other unreadable line is an error.
pub fn read_log(path: &Path) -> Result<Vec<AnnotationEvent>, ReviewError> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(source) => return Err(ReviewError::Io { path: path.to_path_buf(), source }),
    };
    parse_log(&text)
}

pub fn parse_log(text: &str) -> Result<Vec<AnnotationEvent>, ReviewError> {
    let complete = text.ends_with('\n');
    let lines: Vec<&str> = text.lines().collect();
    let mut events = Vec::new();
    for (idx, raw) in lines.iter().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<AnnotationEvent>(raw) {
            Ok(e) => events.push(e),
            Err(_) if idx + 1 == lines.len() && !complete => break,
            Err(e) => return Err(ReviewError::Log { line: idx + 1, message: e.to_string() }),
        }
    }
    Ok(events)
}

/// Append-only, fsync-per-event log file.
pub struct AnnotationLog {
    path: PathBuf,
    file: File,
}

impl AnnotationLog {
    /// Opens (creating if needed) the log and returns the events already in
    /// it. A torn final line is cut off so new events start on a clean line.
    pub fn open(path: &Path) -> Result<(Self, Vec<AnnotationEvent>), ReviewError> {
        let io = |source| ReviewError::Io { path: path.to_path_buf(), source };
        let events = read_log(path)?;
        if let Ok(text) = fs::read_to_string(path) {
            if !text.is_empty() && !text.ends_with('\n') {
                let keep = text.rfind('\n').map_or(0, |i| i + 1);
                OpenOptions::new().write(true).open(path).and_then(|f| f.set_len(keep as u64)).map_err(io)?;
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
        Ok((AnnotationLog { path: path.to_path_buf(), file }, events))
    }

    pub fn append(&mut self, event: &AnnotationEvent) -> Result<(), ReviewError> {
        let mut line = serde_json::to_string(event).expect("event serializes");
        line.push('\n');
        self.file
            .write_all(line.as_bytes())
            .and_then(|_| self.file.sync_data())
            .map_err(|source| ReviewError::Io { path: self.path.clone(), source })
    }
}

/// Queue bookkeeping. Pending ids keep corpus order; an id is never both
/// pending and done; a record is locked by at most one annotator.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct QueueState {
    pub pending: Vec<String>,
    pub done: BTreeSet<String>,
    /// annotator id to (record id, lock time)
    pub assignments: BTreeMap<String, (String, DateTime<Utc>)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    /// Pending and not locked by anyone.
    pub pending: usize,
    pub done: usize,
    pub assigned: usize,
}

impl QueueState {
    /// Queue over `corpus` with every record named in `events` already done.
    pub fn replay(corpus: &Corpus, events: &[AnnotationEvent]) -> Self {
        let touched: BTreeSet<&str> = events.iter().map(|e| e.record_id.as_str()).collect();
        let mut state = QueueState::default();
        for r in corpus.records() {
            if touched.contains(r.id()) {
                state.done.insert(r.id().to_string());
            } else {
                state.pending.push(r.id().to_string());
            }
        }
        state
    }

    pub fn progress(&self) -> Progress {
        let assigned = self.assignments.len();
        Progress { pending: self.pending.len() - assigned, done: self.done.len(), assigned }
    }

    /// Same pending and done sets, no locks.
    pub fn without_locks(&self) -> QueueState {
        QueueState { pending: self.pending.clone(), done: self.done.clone(), assignments: BTreeMap::new() }
    }
}

pub struct ReviewConfig {
    /// A lock older than this may be handed to someone else.
    pub lock_timeout: Duration,
    /// When set, only these annotator ids are served.
    pub annotators: Option<BTreeSet<String>>,
}

impl Default for ReviewConfig {
    fn default() -> Self {
        ReviewConfig { lock_timeout: Duration::minutes(30), annotators: None }
    }
}

struct Inner {
    state: QueueState,
    log: AnnotationLog,
    events: Vec<AnnotationEvent>,
}

/// The queue, its log, and the single writer that serializes mutations.
pub struct ReviewService {
    corpus: Corpus,
    index: HashMap<String, usize>,
    config: ReviewConfig,
    clock: Box<dyn Clock>,
    inner: RwLock<Inner>,
}

impl ReviewService {
    pub fn open(
        corpus: Corpus,
        log_path: &Path,
        config: ReviewConfig,
        clock: Box<dyn Clock>,
    ) -> Result<Self, ReviewError> {
        let (log, events) = AnnotationLog::open(log_path)?;
        let state = QueueState::replay(&corpus, &events);
        let index = corpus.records().iter().enumerate().map(|(i, r)| (r.id().to_string(), i)).collect();
        Ok(ReviewService { corpus, index, config, clock, inner: RwLock::new(Inner { state, log, events }) })
    }

    fn write(&self) -> std::sync::RwLockWriteGuard<'_, Inner> {
        self.inner.write().unwrap_or_else(|e| e.into_inner())
    }

    fn read(&self) -> std::sync::RwLockReadGuard<'_, Inner> {
        self.inner.read().unwrap_or_else(|e| e.into_inner())
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    fn check_annotator(&self, annotator_id: &str) -> Result<(), ReviewError> {
        match &self.config.annotators {
            Some(known) if !known.contains(annotator_id) => {
                Err(ReviewError::UnknownAnnotator(annotator_id.to_string()))
            }
            _ if annotator_id.trim().is_empty() => Err(ReviewError::UnknownAnnotator(annotator_id.to_string())),
            _ => Ok(()),
        }
    }

    /// Locks and returns the first pending record nobody else holds a live
    /// lock on. An annotator who already holds a lock gets the same record
    /// back with the lock renewed.
    pub fn next_item(&self, annotator_id: &str) -> Result<Option<SegmentRecord>, ReviewError> {
        self.check_annotator(annotator_id)?;
        let now = self.clock.now();
        let mut inner = self.write();
        let state = &mut inner.state;
        if let Some((rid, _)) = state.assignments.get(annotator_id).cloned() {
            state.assignments.insert(annotator_id.to_string(), (rid.clone(), now));
            return Ok(Some(self.corpus.records()[self.index[&rid]].clone()));
        }
        let timeout = self.config.lock_timeout;
        let held: HashMap<&str, (&str, DateTime<Utc>)> =
            state.assignments.iter().map(|(a, (r, t))| (r.as_str(), (a.as_str(), *t))).collect();
        let pick = state.pending.iter().find(|id| match held.get(id.as_str()) {
            None => true,
            Some((_, locked_at)) => now - *locked_at >= timeout,
        });
        let Some(rid) = pick.cloned() else {
            return Ok(None);
        };
        let stale: Vec<String> =
            state.assignments.iter().filter(|(_, (r, _))| *r == rid).map(|(a, _)| a.clone()).collect();
        for a in stale {
            state.assignments.remove(&a);
        }
        state.assignments.insert(annotator_id.to_string(), (rid.clone(), now));
        Ok(Some(self.corpus.records()[self.index[&rid]].clone()))
    }

    /// Validates, stamps, durably appends, then marks the record done.
    pub fn submit(&self, submission: Submission) -> Result<AnnotationEvent, ReviewError> {
        let problems = submission.problems();
        if !problems.is_empty() {
            return Err(ReviewError::Invalid(problems));
        }
        let mut inner = self.write();
        let holds =
            inner.state.assignments.get(&submission.annotator_id).is_some_and(|(r, _)| *r == submission.record_id);
        if !holds {
            return Err(ReviewError::Conflict {
                record_id: submission.record_id,
                annotator_id: submission.annotator_id,
            });
        }
        let event = submission.stamp(self.clock.now());
        inner.log.append(&event)?;
        let state = &mut inner.state;
        state.assignments.remove(&event.annotator_id);
        state.pending.retain(|id| *id != event.record_id);
        state.done.insert(event.record_id.clone());
        inner.events.push(event.clone());
        Ok(event)
    }

    pub fn progress(&self) -> Progress {
        self.read().state.progress()
    }

    pub fn state(&self) -> QueueState {
        self.read().state.clone()
    }

    pub fn events(&self) -> Vec<AnnotationEvent> {
        self.read().events.clone()
    }

    pub fn export(&self) -> Result<ExportResult, ReviewError> {
        export_annotated(&self.corpus, &self.read().events)
    }
}

/// Events whose record id is not in the corpus.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ExportExceptions {
    pub unknown_records: Vec<AnnotationEvent>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExportResult {
    pub corpus: Corpus,
    pub exceptions: ExportExceptions,
}

/// Latest event per record (by timestamp, later log position breaking
/// ties) merged into the record's annotation fields. Records without
/// events pass through unchanged.
pub fn export_annotated(corpus: &Corpus, events: &[AnnotationEvent]) -> Result<ExportResult, ReviewError> {
    let ids: BTreeSet<&str> = corpus.records().iter().map(|r| r.id()).collect();
    let mut latest: HashMap<&str, &AnnotationEvent> = HashMap::new();
    let mut exceptions = ExportExceptions::default();
    for e in events {
        if !ids.contains(e.record_id.as_str()) {
            exceptions.unknown_records.push(e.clone());
            continue;
        }
        let slot = latest.entry(e.record_id.as_str()).or_insert(e);
        if e.timestamp >= slot.timestamp {
            *slot = e;
        }
    }
    let mut records = Vec::with_capacity(corpus.len());
    for r in corpus.records() {
        let Some(e) = latest.get(r.id()) else {
            records.push(r.clone());
            continue;
        };
        let mut f = r.clone().into_fields();
        f.critical = Some(e.critical);
        f.error_type = e.error_type;
        if let Some(reference) = &e.corrected_reference {
            f.reference_text = Some(reference.clone());
        }
        f.annotator_id = Some(e.annotator_id.clone());
        records.push(SegmentRecord::try_from(f)?);
    }
    Ok(ExportResult { corpus: corpus.with_records(records)?, exceptions })
}

/// JSON shape of one taxonomy entry for annotation clients.
pub fn taxonomy_json() -> Value {
    Value::Array(
        ErrorType::ALL
            .iter()
            .map(|e| {
                let ex = e.example();
                let mut m = Map::new();
                m.insert("value".into(), e.as_str().into());
                m.insert("label".into(), e.label().into());
                m.insert("group".into(), e.group().as_str().into());
                m.insert(
                    "example".into(),
                    serde_json::json!({
                        "source_text": ex.source_text,
                        "mt_text": ex.mt_text,
                        "reference_text": ex.reference_text,
                    }),
                );
                Value::Object(m)
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_corpus, MINI_CORPUS};
    use chrono::TimeZone;

    fn clock() -> std::sync::Arc<ManualClock> {
        std::sync::Arc::new(ManualClock::new(Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap()))
    }

    struct Shared(std::sync::Arc<ManualClock>);
    impl Clock for Shared {
        fn now(&self) -> DateTime<Utc> {
            self.0.now()
        }
    }

    fn two_records() -> Corpus {
        let c = parse_corpus(MINI_CORPUS).unwrap();
        c.with_records(c.records()[..2].to_vec()).unwrap()
    }

    fn critical(record: &str, annotator: &str) -> Submission {
        Submission {
            record_id: record.into(),
            critical: true,
            error_type: Some(ErrorType::Dialectical),
            corrected_reference: Some("I want to die now".into()),
            annotator_id: annotator.into(),
        }
    }

    fn service(corpus: Corpus, dir: &Path, c: std::sync::Arc<ManualClock>) -> ReviewService {
        ReviewService::open(corpus, &dir.join("log.jsonl"), ReviewConfig::default(), Box::new(Shared(c))).unwrap()
    }

    #[test]
    fn queue_hands_out_records_in_order() {
        let dir = tempfile::tempdir().unwrap();
        let s = service(two_records(), dir.path(), clock());
        assert_eq!(s.next_item("ann1").unwrap().unwrap().id(), "m01");
        assert_eq!(s.progress(), Progress { pending: 1, done: 0, assigned: 1 });
        assert_eq!(s.next_item("ann2").unwrap().unwrap().id(), "m02");
        assert!(s.next_item("ann3").unwrap().is_none());
        assert_eq!(s.next_item("ann1").unwrap().unwrap().id(), "m01", "lock holder gets the same record");
    }

    #[test]
    fn submit_rules() {
        let dir = tempfile::tempdir().unwrap();
        let s = service(two_records(), dir.path(), clock());
        s.next_item("ann1").unwrap();
        let mut missing = critical("m01", "ann1");
        missing.corrected_reference = None;
        match s.submit(missing) {
            Err(ReviewError::Invalid(errs)) => assert_eq!(errs[0].field, "corrected_reference"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(s.submit(critical("m01", "ann2")), Err(ReviewError::Conflict { .. })));
        s.submit(critical("m01", "ann1")).unwrap();
        assert_eq!(s.progress(), Progress { pending: 1, done: 1, assigned: 0 });
        assert!(matches!(s.submit(critical("m01", "ann1")), Err(ReviewError::Conflict { .. })));
    }

    #[test]
    fn expired_lock_moves_to_the_next_annotator() {
        let dir = tempfile::tempdir().unwrap();
        let c = clock();
        let s = service(two_records(), dir.path(), c.clone());
        s.next_item("ann1").unwrap();
        s.next_item("ann2").unwrap();
        c.advance(Duration::minutes(31));
        assert_eq!(s.next_item("ann3").unwrap().unwrap().id(), "m01");
        assert!(matches!(s.submit(critical("m01", "ann1")), Err(ReviewError::Conflict { .. })));
        s.submit(critical("m01", "ann3")).unwrap();
    }

    #[test]
    fn registry_mode_rejects_strangers() {
        let dir = tempfile::tempdir().unwrap();
        let config = ReviewConfig { annotators: Some(["ann1".to_string()].into()), ..ReviewConfig::default() };
        let s = ReviewService::open(two_records(), &dir.path().join("l"), config, Box::new(SystemClock)).unwrap();
        assert!(matches!(s.next_item("eve"), Err(ReviewError::UnknownAnnotator(_))));
        assert!(s.next_item("ann1").unwrap().is_some());
    }

    #[test]
    fn restart_replays_the_log() {
        let dir = tempfile::tempdir().unwrap();
        let c = clock();
        let s = service(two_records(), dir.path(), c.clone());
        s.next_item("ann1").unwrap();
        s.submit(critical("m01", "ann1")).unwrap();
        let before = s.state();
        let export = s.export().unwrap();
        drop(s);
        let again = service(two_records(), dir.path(), c);
        assert_eq!(again.state(), before.without_locks());
        assert_eq!(again.export().unwrap(), export);
    }

    #[test]
    fn torn_last_line_is_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("log.jsonl");
        let c = clock();
        let s = service(two_records(), dir.path(), c.clone());
        s.next_item("a").unwrap();
        s.submit(critical("m01", "a")).unwrap();
        drop(s);
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(b"{\"record_id\":\"m02\",\"crit").unwrap();
        drop(f);
        let s = service(two_records(), dir.path(), c);
        assert_eq!(s.events().len(), 1);
        s.next_item("a").unwrap();
        s.submit(critical("m02", "a")).unwrap();
        assert_eq!(read_log(&path).unwrap().len(), 2);
        fs::write(&path, "garbage\n").unwrap();
        assert!(matches!(read_log(&path), Err(ReviewError::Log { line: 1, .. })));
    }

    #[test]
    fn export_merges_latest_event() {
        let corpus = parse_corpus(MINI_CORPUS).unwrap();
        let corpus = corpus.with_records(corpus.records()[11..14].to_vec()).unwrap();
        let t0 = Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap();
        let ev = |id: &str, critical: bool, secs: i64| {
            let mut s = critical_sub(id, critical);
            s.annotator_id = format!("a{secs}");
            s.stamp(t0 + Duration::seconds(secs))
        };
        fn critical_sub(id: &str, critical: bool) -> Submission {
            Submission {
                record_id: id.into(),
                critical,
                error_type: critical.then_some(ErrorType::Vocabulary),
                corrected_reference: critical.then(|| "fixed".to_string()),
                annotator_id: String::new(),
            }
        }
        let one = export_annotated(&corpus, &[ev("f01", true, 1)]).unwrap();
        let changed: Vec<_> = one.corpus.records().iter().zip(corpus.records()).filter(|(a, b)| a != b).collect();
        assert_eq!(changed.len(), 1);
        assert_eq!(changed[0].0.reference_text(), Some("fixed"));
        // later timestamp wins even when it comes first in the log
        let two = export_annotated(&corpus, &[ev("f01", false, 5), ev("f01", true, 2)]).unwrap();
        let r = two.corpus.get("f01").unwrap();
        assert_eq!((r.critical(), r.error_type(), r.annotator_id()), (Some(false), None, Some("a5")));
        let unknown = export_annotated(&corpus, &[ev("zzz", true, 1)]).unwrap();
        assert_eq!(unknown.exceptions.unknown_records.len(), 1);
        assert_eq!(unknown.corpus, corpus);
        let again = export_annotated(&one.corpus, &[ev("f01", true, 1)]).unwrap();
        assert_eq!(again.corpus, one.corpus, "export is idempotent");
    }

    #[test]
    fn submission_parsing_lists_every_problem() {
        let errs = Submission::from_json(&serde_json::json!({"critical": true, "error_type": "sad"})).unwrap_err();
        let fields: BTreeSet<_> = errs.iter().map(|e| e.field.as_str()).collect();
        assert_eq!(fields, ["annotator_id", "corrected_reference", "error_type", "record_id"].into());
        let errs = Submission::from_json(&serde_json::json!({
            "record_id": "x", "annotator_id": "a", "critical": false, "error_type": "deletion"
        }))
        .unwrap_err();
        assert_eq!(errs.len(), 1);
        assert!(Submission::from_json(&serde_json::json!({"record_id": "x", "annotator_id": "a", "critical": false}))
            .is_ok());
        assert!(Submission::from_json(&serde_json::json!([1])).is_err());
    }

    #[test]
    fn taxonomy_has_every_type() {
        let t = taxonomy_json();
        assert_eq!(t.as_array().unwrap().len(), 8);
        assert_eq!(t[0]["value"], "dialectical");
        assert!(t[0]["example"]["mt_text"].as_str().is_some());
    }
}
