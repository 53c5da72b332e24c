//! TOML run configuration. Every section is optional.
//!
//! ```toml
//! workers = 4
//! cache_dir = "cache"
//!
//! [translator]            # kind: echo | constant | table | http
//! kind = "http"
//! base_url = "https://mt.example.org"
//! path = "/v1/translate"
//! response_field = "data.translation"
//! auth_env = "MT_API_KEY"
//!
//! [classifier]            # kind: keyword | constant | http
//! kind = "keyword"
//! rules = [["depress", "depression"], ["anxious", "anxiety"]]
//! default = "non_mental"
//!
//! [retry]
//! max_attempts = 4
//! base_delay_ms = 500
//! max_delay_ms = 8000
//!
//! [rule]
//! gold_trigger = ["depression", "depression_suicidal"]
//! predicted_trigger = "non_mental"
//!
//! [metrics]
//! normalization = { lowercase = true }
//! bleu_max_n = 4
//! bleu_smoothing = "add_one_on_zero"
//! synonyms = "synonyms.txt"
//! ```
//!
//! Secrets never live here; `auth_env` names the variable that holds them.

use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::time::Duration;

use critmt_core::metrics::{BleuConfig, ExactMatcher, Meteor, Scorer, Smoothing, StemMatcher, SynonymTable};
use critmt_core::pipeline::http::{HttpClassifier, HttpClientConfig, HttpEndpoint, HttpTranslator};
use critmt_core::pipeline::stub::{KeywordClassifier, StubTranslator};
use critmt_core::pipeline::{ClassifierClient, DiscrepancyRule, RetryPolicy, TranslatorClient};
use critmt_core::textnorm::{NormConfig, SuffixStemmer};
use critmt_core::{ClassifierLabel, SourceLabel};
use serde::Deserialize;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub workers: Option<usize>,
    pub cache_dir: Option<PathBuf>,
    #[serde(default)]
    pub translator: TranslatorConfig,
    #[serde(default)]
    pub classifier: ClassifierConfig,
    pub retry: Option<RetryConfig>,
    pub rule: Option<RuleConfig>,
    #[serde(default)]
    pub metrics: MetricsConfig,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TranslatorConfig {
    /// Returns the source text unchanged.
    #[default]
    Echo,
    Constant {
        output: String,
    },
    /// Source text to translation; misses echo.
    Table {
        entries: HashMap<String, String>,
    },
    Http(HttpClientConfig),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierConfig {
    /// First keyword found in the normalized text decides the label.
    /// Without rules, the built-in depress/anxious rules apply.
    #[default]
    Keyword,
    KeywordRules {
        rules: Vec<(String, String)>,
        default: String,
    },
    Constant {
        label: String,
    },
    Http(HttpClientConfig),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetryConfig {
    pub max_attempts: u32,
    pub base_delay_ms: u64,
    pub max_delay_ms: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleConfig {
    pub gold_trigger: BTreeSet<SourceLabel>,
    pub predicted_trigger: ClassifierLabel,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsConfig {
    /// Replaces the default metric normalization (lowercase only) as a whole.
    pub normalization: Option<NormConfig>,
    pub bleu_max_n: Option<usize>,
    pub bleu_smoothing: Option<Smoothing>,
    /// Synonym sets for METEOR, one set per line.
    pub synonyms: Option<PathBuf>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn translator(&self) -> Box<dyn TranslatorClient> {
        match &self.translator {
            TranslatorConfig::Echo => Box::new(StubTranslator::table(HashMap::new()).with_id("echo")),
            TranslatorConfig::Constant { output } => Box::new(StubTranslator::constant(output.clone())),
            TranslatorConfig::Table { entries } => Box::new(StubTranslator::table(entries.clone())),
            TranslatorConfig::Http(c) => Box::new(HttpTranslator(HttpEndpoint::new(c.clone()))),
        }
    }

    pub fn classifier(&self) -> Box<dyn ClassifierClient> {
        match &self.classifier {
            ClassifierConfig::Keyword => Box::new(KeywordClassifier::standard()),
            ClassifierConfig::KeywordRules { rules, default } => {
                Box::new(KeywordClassifier::new(rules.clone(), default.clone()))
            }
            ClassifierConfig::Constant { label } => Box::new(KeywordClassifier::constant(label.clone())),
            ClassifierConfig::Http(c) => Box::new(HttpClassifier(HttpEndpoint::new(c.clone()))),
        }
    }

    pub fn retry(&self) -> RetryPolicy {
        match &self.retry {
            Some(r) => RetryPolicy {
                max_attempts: r.max_attempts.max(1),
                base_delay: Duration::from_millis(r.base_delay_ms),
                max_delay: Duration::from_millis(r.max_delay_ms),
            },
            None => RetryPolicy::default(),
        }
    }

    pub fn rule(&self) -> Result<DiscrepancyRule, String> {
        match &self.rule {
            Some(r) => DiscrepancyRule::new(r.gold_trigger.clone(), r.predicted_trigger).map_err(|e| e.to_string()),
            None => Ok(DiscrepancyRule::default()),
        }
    }

    pub fn scorer(&self) -> Result<Scorer<f64>, String> {
        let m = &self.metrics;
        let mut scorer = Scorer::new();
        if let Some(norm) = m.normalization {
            scorer = scorer.with_normalization(norm);
        }
        if m.bleu_max_n.is_some() || m.bleu_smoothing.is_some() {
            let d = BleuConfig::default();
            let bleu = BleuConfig::new(m.bleu_max_n.unwrap_or(d.max_n()), m.bleu_smoothing.unwrap_or(d.smoothing()))
                .map_err(|e| e.to_string())?;
            scorer = scorer.with_bleu(bleu);
        }
        if let Some(path) = &m.synonyms {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            let table = SynonymTable::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?;
            scorer = scorer.with_meteor(Meteor::new(vec![
                Box::new(ExactMatcher),
                Box::new(StemMatcher::new(SuffixStemmer)),
                Box::new(table),
            ]));
        }
        Ok(scorer)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_uses_offline_defaults() {
        let c = Config::parse("").unwrap();
        assert_eq!(c.translator().id(), "echo");
        assert_eq!(c.translator().translate("x").unwrap(), "x");
        assert_eq!(c.classifier().classify("i feel depressed").unwrap(), "depression");
        assert_eq!(c.rule().unwrap(), DiscrepancyRule::default());
        assert_eq!(c.retry(), RetryPolicy::default());
    }

    #[test]
    fn full_config_parses() {
        let c = Config::parse(
            r#"
workers = 2
cache_dir = "c"
[translator]
kind = "http"
base_url = "http://localhost:1"
response_field = "out"
[classifier]
kind = "keyword_rules"
rules = [["sad", "depression"]]
default = "non_mental"
[retry]
max_attempts = 2
base_delay_ms = 1
max_delay_ms = 2
[rule]
gold_trigger = ["depression"]
predicted_trigger = "anxiety"
[metrics]
normalization = { lowercase = false }
bleu_max_n = 2
"#,
        )
        .unwrap();
        assert_eq!(c.workers, Some(2));
        assert_eq!(c.classifier().classify("so sad").unwrap(), "depression");
        assert_eq!(c.rule().unwrap().predicted_trigger(), ClassifierLabel::Anxiety);
        let settings = c.scorer().unwrap().settings();
        assert_eq!(settings.bleu.max_n(), 2);
        assert_ne!(settings.fingerprint(), Scorer::<f64>::new().settings().fingerprint());
    }

    #[test]
    fn unknown_keys_and_kinds_are_rejected() {
        assert!(Config::parse("wrokers = 2").is_err());
        assert!(Config::parse("[translator]\nkind = \"magic\"").is_err());
        assert!(Config::parse("[rule]\ngold_trigger = []\npredicted_trigger = \"non_mental\"")
            .unwrap()
            .rule()
            .is_err());
    }
}
