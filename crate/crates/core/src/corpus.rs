//! Record model, label sets, error taxonomy, and line-delimited persistence.
//!
//! A corpus file holds one JSON object per line with the fields `id`,
//! `source_text`, `mt_text`, `reference_text`, `gold_label`,
//! `predicted_label`, `error_type`, `critical`, `annotator_id` in that order.
//! Absent optional fields are omitted. Fields outside that set are kept per
//! record and written back after the canonical ones, sorted by key.
//!
//! Corpus-level metadata, when non-empty, lives next to the corpus file in
//! `<file>.meta.json`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: missing required field `{field}`")]
    MissingField { line: usize, field: &'static str },
    #[error("line {line}: unknown value {value:?} for field `{field}`")]
    UnknownEnum { line: usize, field: &'static str, value: String },
    #[error("duplicate id {id:?} on lines {first_line} and {second_line}")]
    DuplicateIdLines { id: String, first_line: usize, second_line: usize },
    #[error("duplicate id {id:?} in corpus")]
    DuplicateId { id: String },
    #[error("record {id:?}: {violation}")]
    Invariant { id: String, violation: &'static str },
    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<CorpusError>,
    },
    #[error("no critical records with an error type")]
    NoCriticalRecords,
}

/// Error raised when a string is not a member of one of the closed label sets.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("unknown {kind} {value:?}")]
pub struct UnknownLabel {
    pub kind: &'static str,
    pub value: String,
}

macro_rules! closed_enum {
    ($(#[$meta:meta])* $name:ident, $kind:literal { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $text)] $variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl FromStr for $name {
            type Err = UnknownLabel;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => Err(UnknownLabel { kind: $kind, value: s.to_string() }),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

closed_enum!(
    /// Human-assigned label of the source-language post.
    SourceLabel, "source label" {
        Depression => "depression",
        DepressionSuicidal => "depression_suicidal",
        NonDepression => "non_depression",
    }
);

closed_enum!(
    /// Label produced by the target-language classifier.
    ClassifierLabel, "classifier label" {
        Anxiety => "anxiety",
        Bipolar => "bipolar",
        Depression => "depression",
        NonMental => "non_mental",
    }
);

closed_enum!(
    /// Critical-error taxonomy, stored at full granularity.
    ErrorType, "error type" {
        Dialectical => "dialectical",
        GrammarNegation => "grammar_negation",
        GrammarPreposition => "grammar_preposition",
        GrammarSubject => "grammar_subject",
        Orthographic => "orthographic",
        Diacritic => "diacritic",
        Vocabulary => "vocabulary",
        Deletion => "deletion",
    }
);

closed_enum!(
    /// Reporting granularity of [`ErrorType`]; variants are declared in
    /// alphabetical order so `Ord` gives report ordering.
    ErrorGroup, "error group" {
        Deletion => "deletion",
        Diacritic => "diacritic",
        Dialectical => "dialectical",
        Grammar => "grammar",
        Orthographic => "orthographic",
        Vocabulary => "vocabulary",
    }
);

/// One worked example of an error category: source post, faulty output, and
/// the corrected reference.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TaxonomyExample {
    pub source_text: &'static str,
    pub mt_text: &'static str,
    pub reference_text: &'static str,
}

impl ErrorType {
    pub fn group(self) -> ErrorGroup {
        match self {
            ErrorType::Dialectical => ErrorGroup::Dialectical,
            ErrorType::GrammarNegation | ErrorType::GrammarPreposition | ErrorType::GrammarSubject => {
                ErrorGroup::Grammar
            }
            ErrorType::Orthographic => ErrorGroup::Orthographic,
            ErrorType::Diacritic => ErrorGroup::Diacritic,
            ErrorType::Vocabulary => ErrorGroup::Vocabulary,
            ErrorType::Deletion => ErrorGroup::Deletion,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ErrorType::Dialectical => "Dialectical language",
            ErrorType::GrammarNegation => "Grammar: negation",
            ErrorType::GrammarPreposition => "Grammar: preposition",
            ErrorType::GrammarSubject => "Grammar: subject of the verb",
            ErrorType::Orthographic => "Orthographic (non-standard spelling or punctuation)",
            ErrorType::Diacritic => "Missing diacritics",
            ErrorType::Vocabulary => "Mistranslation of vocabulary",
            ErrorType::Deletion => "Deletion",
        }
    }

    pub fn example(self) -> TaxonomyExample {
        let (source_text, mt_text, reference_text) = match self {
            ErrorType::Dialectical => ("ابي الان اموت", "My father is now dead", "I want to die now"),
            ErrorType::GrammarNegation => {
                ("لا عايز انتحر بجد", "I really don't want to commit suicide", "I really want to commit suicide")
            }
            ErrorType::GrammarPreposition => {
                ("ابغي اعيش لحالي", "I want to live for myself", "I want to live by myself")
            }
            ErrorType::GrammarSubject => (
                "بكمل يومين مو ماكله شي وفوق مو مشتهيه اكل",
                "For two days, he didn't eat anything, and he didn't crave food",
                "For two days, I didn't eat anything, I didn't crave food",
            ),
            ErrorType::Orthographic => {
                ("ي اخي عاوز انتحر", "My brother wants to commit suicide", "Oh Brother. I want to commit suicide")
            }
            ErrorType::Diacritic => (
                "حتي الاكل مالي نفس اكل",
                "Even the food is not the same as eating",
                "Even the food I don't have any appetite",
            ),
            ErrorType::Vocabulary => ("احس بضيق", "I feel tight", "I have anxiety"),
            ErrorType::Deletion => ("نفسي اقتل حالي", "I kill myself", "I wish to kill myself"),
        };
        TaxonomyExample { source_text, mt_text, reference_text }
    }
}

fn nfc(s: &str) -> String {
    s.nfc().collect()
}

/// Plain, unvalidated view of a record. Convert with
/// [`SegmentRecord::try_from`] to get a checked record.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordFields {
    pub id: String,
    pub source_text: String,
    pub mt_text: String,
    pub reference_text: Option<String>,
    pub gold_label: SourceLabel,
    pub predicted_label: Option<ClassifierLabel>,
    pub error_type: Option<ErrorType>,
    pub critical: Option<bool>,
    pub annotator_id: Option<String>,
    pub extra: BTreeMap<String, Value>,
}

impl RecordFields {
    pub fn new(id: impl Into<String>, source_text: impl Into<String>, gold_label: SourceLabel) -> Self {
        RecordFields {
            id: id.into(),
            source_text: source_text.into(),
            mt_text: String::new(),
            reference_text: None,
            gold_label,
            predicted_label: None,
            error_type: None,
            critical: None,
            annotator_id: None,
            extra: BTreeMap::new(),
        }
    }
}

/// One bilingual record. All text is NFC-normalized and the record
/// invariants are checked on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentRecord {
    fields: RecordFields,
}

impl TryFrom<RecordFields> for SegmentRecord {
    type Error = CorpusError;

    fn try_from(mut f: RecordFields) -> Result<Self, Self::Error> {
        f.id = nfc(&f.id);
        f.source_text = nfc(&f.source_text);
        f.mt_text = nfc(&f.mt_text);
        f.reference_text = f.reference_text.as_deref().map(nfc);
        f.annotator_id = f.annotator_id.as_deref().map(nfc);
        let violation = if f.id.is_empty() {
            Some("id must be non-empty")
        } else if f.error_type.is_some() && f.critical.is_none() {
            Some("error_type requires a criticality decision")
        } else if f.critical == Some(true) && f.reference_text.is_none() {
            Some("critical record requires reference_text")
        } else {
            None
        };
        match violation {
            Some(violation) => Err(CorpusError::Invariant { id: f.id, violation }),
            None => Ok(SegmentRecord { fields: f }),
        }
    }
}

impl SegmentRecord {
    pub fn id(&self) -> &str {
        &self.fields.id
    }
    pub fn source_text(&self) -> &str {
        &self.fields.source_text
    }
    pub fn mt_text(&self) -> &str {
        &self.fields.mt_text
    }
    pub fn reference_text(&self) -> Option<&str> {
        self.fields.reference_text.as_deref()
    }
    pub fn gold_label(&self) -> SourceLabel {
        self.fields.gold_label
    }
    pub fn predicted_label(&self) -> Option<ClassifierLabel> {
        self.fields.predicted_label
    }
    pub fn error_type(&self) -> Option<ErrorType> {
        self.fields.error_type
    }
    pub fn critical(&self) -> Option<bool> {
        self.fields.critical
    }
    pub fn annotator_id(&self) -> Option<&str> {
        self.fields.annotator_id.as_deref()
    }
    pub fn extra(&self) -> &BTreeMap<String, Value> {
        &self.fields.extra
    }

    pub fn fields(&self) -> &RecordFields {
        &self.fields
    }

    pub fn into_fields(self) -> RecordFields {
        self.fields
    }

    pub fn with_mt_text(self, mt_text: impl Into<String>) -> Result<Self, CorpusError> {
        let mut f = self.fields;
        f.mt_text = mt_text.into();
        SegmentRecord::try_from(f)
    }

    pub fn with_predicted_label(self, label: ClassifierLabel) -> Result<Self, CorpusError> {
        let mut f = self.fields;
        f.predicted_label = Some(label);
        SegmentRecord::try_from(f)
    }

    /// JSON object in canonical field order.
    pub fn to_json(&self) -> Map<String, Value> {
        let f = &self.fields;
        let mut m = Map::new();
        m.insert("id".into(), Value::String(f.id.clone()));
        m.insert("source_text".into(), Value::String(f.source_text.clone()));
        m.insert("mt_text".into(), Value::String(f.mt_text.clone()));
        if let Some(r) = &f.reference_text {
            m.insert("reference_text".into(), Value::String(r.clone()));
        }
        m.insert("gold_label".into(), f.gold_label.as_str().into());
        if let Some(p) = f.predicted_label {
            m.insert("predicted_label".into(), p.as_str().into());
        }
        if let Some(e) = f.error_type {
            m.insert("error_type".into(), e.as_str().into());
        }
        if let Some(c) = f.critical {
            m.insert("critical".into(), Value::Bool(c));
        }
        if let Some(a) = &f.annotator_id {
            m.insert("annotator_id".into(), Value::String(a.clone()));
        }
        for (k, v) in &f.extra {
            m.insert(k.clone(), v.clone());
        }
        m
    }

    /// Parses one record object. `line` is used only for error messages.
    pub fn from_json(obj: Map<String, Value>, line: usize) -> Result<Self, CorpusError> {
        let mut obj = obj;
        let id = take_string(&mut obj, "id", line)?.ok_or(CorpusError::MissingField { line, field: "id" })?;
        let source_text = take_string(&mut obj, "source_text", line)?
            .ok_or(CorpusError::MissingField { line, field: "source_text" })?;
        let mt_text = take_string(&mut obj, "mt_text", line)?.unwrap_or_default();
        let reference_text = take_string(&mut obj, "reference_text", line)?;
        let gold_label = take_enum::<SourceLabel>(&mut obj, "gold_label", line)?
            .ok_or(CorpusError::MissingField { line, field: "gold_label" })?;
        let predicted_label = take_enum::<ClassifierLabel>(&mut obj, "predicted_label", line)?;
        let error_type = take_enum::<ErrorType>(&mut obj, "error_type", line)?;
        let critical = match obj.remove("critical") {
            None | Some(Value::Null) => None,
            Some(Value::Bool(b)) => Some(b),
            Some(other) => {
                return Err(CorpusError::Parse {
                    line,
                    message: format!("field `critical` must be a boolean, got {other}"),
                })
            }
        };
        let annotator_id = take_string(&mut obj, "annotator_id", line)?;
        let fields = RecordFields {
            id,
            source_text,
            mt_text,
            reference_text,
            gold_label,
            predicted_label,
            error_type,
            critical,
            annotator_id,
            extra: obj.into_iter().collect(),
        };
        SegmentRecord::try_from(fields).map_err(|e| CorpusError::AtLine { line, source: Box::new(e) })
    }
}

impl Serialize for SegmentRecord {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SegmentRecord {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let obj = Map::<String, Value>::deserialize(deserializer)?;
        SegmentRecord::from_json(obj, 0).map_err(serde::de::Error::custom)
    }
}

fn take_string(obj: &mut Map<String, Value>, field: &'static str, line: usize) -> Result<Option<String>, CorpusError> {
    match obj.remove(field) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s)),
        Some(other) => {
            Err(CorpusError::Parse { line, message: format!("field `{field}` must be a string, got {other}") })
        }
    }
}

fn take_enum<E: FromStr>(
    obj: &mut Map<String, Value>,
    field: &'static str,
    line: usize,
) -> Result<Option<E>, CorpusError> {
    match take_string(obj, field, line)? {
        None => Ok(None),
        Some(s) => s.parse().map(Some).map_err(|_| CorpusError::UnknownEnum { line, field, value: s }),
    }
}

/// Ordered records with unique ids plus free-form metadata.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    records: Vec<SegmentRecord>,
    metadata: BTreeMap<String, String>,
}

impl Corpus {
    pub fn new(records: Vec<SegmentRecord>, metadata: BTreeMap<String, String>) -> Result<Self, CorpusError> {
        let mut seen = std::collections::HashSet::new();
        for r in &records {
            if !seen.insert(r.id()) {
                return Err(CorpusError::DuplicateId { id: r.id().to_string() });
            }
        }
        Ok(Corpus { records, metadata })
    }

    pub fn from_records(records: Vec<SegmentRecord>) -> Result<Self, CorpusError> {
        Corpus::new(records, BTreeMap::new())
    }

    pub fn records(&self) -> &[SegmentRecord] {
        &self.records
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }

    pub fn get(&self, id: &str) -> Option<&SegmentRecord> {
        self.records.iter().find(|r| r.id() == id)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn into_parts(self) -> (Vec<SegmentRecord>, BTreeMap<String, String>) {
        (self.records, self.metadata)
    }

    /// Same metadata, new records.
    pub fn with_records(&self, records: Vec<SegmentRecord>) -> Result<Self, CorpusError> {
        Corpus::new(records, self.metadata.clone())
    }
}

/// Parses the line-delimited record format. Blank lines are skipped.
pub fn parse_corpus(text: &str) -> Result<Corpus, CorpusError> {
    let mut records = Vec::new();
    let mut first_seen: HashMap<String, usize> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let obj: Map<String, Value> =
            serde_json::from_str(raw).map_err(|e| CorpusError::Parse { line, message: e.to_string() })?;
        let rec = SegmentRecord::from_json(obj, line)?;
        if let Some(&first_line) = first_seen.get(rec.id()) {
            return Err(CorpusError::DuplicateIdLines { id: rec.id().to_string(), first_line, second_line: line });
        }
        first_seen.insert(rec.id().to_string(), line);
        records.push(rec);
    }
    Corpus::from_records(records)
}

/// Renders records in canonical form, one per line, each newline-terminated.
pub fn render_corpus(corpus: &Corpus) -> String {
    let mut out = String::new();
    for r in &corpus.records {
        out.push_str(&serde_json::to_string(&r.to_json()).expect("record serializes"));
        out.push('\n');
    }
    out
}

fn meta_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".meta.json");
    path.with_file_name(name)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io { path: path.to_path_buf(), source }
}

pub fn load_corpus(path: &Path) -> Result<Corpus, CorpusError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let corpus = parse_corpus(&text)?;
    let mp = meta_path(path);
    if mp.exists() {
        let raw = fs::read_to_string(&mp).map_err(io_err(&mp))?;
        let metadata: BTreeMap<String, String> =
            serde_json::from_str(&raw).map_err(|e| CorpusError::Parse { line: 1, message: e.to_string() })?;
        return Corpus::new(corpus.records, metadata);
    }
    Ok(corpus)
}

pub fn save_corpus(corpus: &Corpus, path: &Path) -> Result<(), CorpusError> {
    // Records are validated on construction; re-check here in case the
    // caller assembled the corpus through `RecordFields` edits.
    for r in &corpus.records {
        SegmentRecord::try_from(r.fields.clone())?;
    }
    fs::write(path, render_corpus(corpus)).map_err(io_err(path))?;
    let mp = meta_path(path);
    if corpus.metadata.is_empty() {
        if mp.exists() {
            fs::remove_file(&mp).map_err(io_err(&mp))?;
        }
    } else {
        let json = serde_json::to_string_pretty(&corpus.metadata).expect("metadata serializes");
        fs::write(&mp, json + "\n").map_err(io_err(&mp))?;
    }
    Ok(())
}

/// Share of each error group among critical records that carry an error type.
pub fn taxonomy_frequencies(corpus: &Corpus) -> Result<BTreeMap<ErrorGroup, f64>, CorpusError> {
    let mut counts: BTreeMap<ErrorGroup, usize> = BTreeMap::new();
    for r in corpus.records() {
        if let (Some(true), Some(e)) = (r.critical(), r.error_type()) {
            *counts.entry(e.group()).or_insert(0) += 1;
        }
    }
    let total: usize = counts.values().sum();
    if total == 0 {
        return Err(CorpusError::NoCriticalRecords);
    }
    Ok(counts.into_iter().map(|(g, c)| (g, c as f64 / total as f64)).collect())
}

/// The small bundled corpus of worked examples plus non-critical fillers.
pub const MINI_CORPUS: &str = include_str!("../data/mini_corpus.jsonl");
