//! Per-metric means overall and per error group, and their export formats.
//!
//! Means are plain arithmetic means over records. Sums run in input order
//! (the score file's order), so any recomputation that adds in the same
//! order reproduces the values bit for bit.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::ErrorGroup;
use crate::metrics::{Metric, ScoredRecord};
use crate::scalar::Score;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no scored records to aggregate")]
    Empty,
    #[error("record {id:?} is not marked critical")]
    NotCritical { id: String },
    #[error("record {id:?} has no error_type")]
    MissingErrorType { id: String },
    #[error("{metric}: overall mean {overall} differs from weighted group mean {weighted}")]
    Inconsistent { metric: Metric, overall: f64, weighted: f64 },
    #[error("csv line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

/// Mean of one metric over the records that have it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Score")]
pub struct Cell<T> {
    /// `None` when no record carried the metric.
    pub mean: Option<T>,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Score")]
pub struct StratifiedReport<T> {
    pub overall: BTreeMap<Metric, Cell<T>>,
    pub by_group: BTreeMap<ErrorGroup, BTreeMap<Metric, Cell<T>>>,
    /// Records per group.
    pub counts: BTreeMap<ErrorGroup, usize>,
    /// Records left out of a metric's mean because they lacked it.
    pub exclusions: BTreeMap<Metric, usize>,
    pub config_fingerprint: String,
}

#[derive(Clone, Copy)]
struct Acc<T> {
    sum: T,
    n: usize,
}

impl<T: Score> Acc<T> {
    fn new() -> Self {
        Acc { sum: T::zero(), n: 0 }
    }
    fn add(&mut self, x: T) {
        self.sum = self.sum + x;
        self.n += 1;
    }
    fn cell(&self) -> Cell<T> {
        Cell { mean: (self.n > 0).then(|| self.sum / T::of(self.n as f64)), n: self.n }
    }
}

fn cells<T: Score>(accs: &[Acc<T>; 7]) -> BTreeMap<Metric, Cell<T>> {
    Metric::ALL.iter().zip(accs).map(|(&m, a)| (m, a.cell())).collect()
}

/// Aggregates critical, typed records into overall and per-group means.
pub fn aggregate<T: Score>(
    records: &[ScoredRecord<T>],
    config_fingerprint: &str,
) -> Result<StratifiedReport<T>, ReportError> {
    if records.is_empty() {
        return Err(ReportError::Empty);
    }
    let mut overall = [Acc::new(); 7];
    let mut groups: BTreeMap<ErrorGroup, [Acc<T>; 7]> = BTreeMap::new();
    let mut counts = BTreeMap::new();
    let mut exclusions: BTreeMap<Metric, usize> = Metric::ALL.iter().map(|&m| (m, 0)).collect();
    for r in records {
        if r.critical != Some(true) {
            return Err(ReportError::NotCritical { id: r.id.clone() });
        }
        let group = r.error_type.ok_or_else(|| ReportError::MissingErrorType { id: r.id.clone() })?.group();
        *counts.entry(group).or_insert(0) += 1;
        let g = groups.entry(group).or_insert([Acc::new(); 7]);
        for (i, &m) in Metric::ALL.iter().enumerate() {
            match r.scores.get(m) {
                Some(x) => {
                    overall[i].add(x);
                    g[i].add(x);
                }
                None => *exclusions.get_mut(&m).expect("all metrics present") += 1,
            }
        }
    }
    Ok(StratifiedReport {
        overall: cells(&overall),
        by_group: groups.iter().map(|(&g, accs)| (g, cells(accs))).collect(),
        counts,
        exclusions,
        config_fingerprint: config_fingerprint.to_string(),
    })
}

impl<T: Score> StratifiedReport<T> {
    /// Checks that each overall mean equals the count-weighted mean of the
    /// group means, within `tolerance`.
    pub fn check_consistency(&self, tolerance: f64) -> Result<(), ReportError> {
        for &m in Metric::ALL.iter() {
            let (mut weighted, mut n) = (0.0, 0usize);
            for cells in self.by_group.values() {
                let c = cells[&m];
                if let Some(mean) = c.mean {
                    weighted += mean.to_f64().unwrap_or(f64::NAN) * c.n as f64;
                    n += c.n;
                }
            }
            let overall = self.overall[&m];
            let ok = match overall.mean {
                None => n == 0,
                Some(o) => {
                    let o = o.to_f64().unwrap_or(f64::NAN);
                    let w = weighted / n as f64;
                    n == overall.n && (o - w).abs() <= tolerance
                }
            };
            if !ok {
                return Err(ReportError::Inconsistent {
                    metric: m,
                    overall: overall.mean.and_then(|x| x.to_f64()).unwrap_or(f64::NAN),
                    weighted: weighted / n as f64,
                });
            }
        }
        Ok(())
    }

    /// One row per (group, metric), groups alphabetical, then the overall
    /// rows; metrics in reporting order. Empty cells leave `mean` blank.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("scope,group,metric,mean,n,direction\n");
        let mut row = |scope: &str, group: &str, m: Metric, c: &Cell<T>| {
            let mean = c.mean.map(|x| x.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{scope},{group},{},{mean},{},{}", m.as_str(), c.n, m.direction().as_str());
        };
        for (g, cells) in &self.by_group {
            for m in Metric::ALL {
                row("group", g.as_str(), m, &cells[&m]);
            }
        }
        for m in Metric::ALL {
            row("overall", "", m, &self.overall[&m]);
        }
        out
    }

    /// Human-readable table: one row per metric, the overall column first.
    pub fn to_table_text(&self) -> String {
        let mut header = vec!["metric".to_string(), "overall".to_string()];
        header.extend(self.by_group.keys().map(|g| g.as_str().to_string()));
        let fmt = |c: &Cell<T>| c.mean.and_then(|x| x.to_f64()).map_or("-".to_string(), |x| format!("{x:.4}"));
        let mut rows = vec![header];
        let mut counts = vec!["n".to_string(), self.counts.values().sum::<usize>().to_string()];
        counts.extend(self.counts.values().map(usize::to_string));
        rows.push(counts);
        for m in Metric::ALL {
            let mut r = vec![m.display_name().to_string(), fmt(&self.overall[&m])];
            r.extend(self.by_group.values().map(|cells| fmt(&cells[&m])));
            rows.push(r);
        }
        let widths: Vec<usize> =
            (0..rows[0].len()).map(|i| rows.iter().map(|r| r[i].chars().count()).max().unwrap_or(0)).collect();
        let mut out = String::new();
        for r in &rows {
            let line: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        let _ = writeln!(out, "\nconfig {}; TER is lower-is-better", self.config_fingerprint);
        out
    }

    /// One JSON object per bar `{group, metric, value}`: groups alphabetical,
    /// metrics in reporting order, empty cells skipped.
    pub fn to_plot_data(&self) -> String {
        let mut out = String::new();
        for (g, cells) in &self.by_group {
            for m in Metric::ALL {
                if let Some(v) = cells[&m].mean {
                    let obj = serde_json::json!({"group": g.as_str(), "metric": m.as_str(), "value": v.to_f64()});
                    out.push_str(&obj.to_string());
                    out.push('\n');
                }
            }
        }
        out
    }

    pub fn render(&self, format: ExportFormat) -> String {
        match format {
            ExportFormat::Csv => self.to_csv(),
            ExportFormat::TableText => self.to_table_text(),
            ExportFormat::PlotData => self.to_plot_data(),
            ExportFormat::Json => serde_json::to_string_pretty(self).expect("report serializes") + "\n",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    TableText,
    PlotData,
    Json,
}

impl FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ExportFormat::Csv),
            "table-text" => Ok(ExportFormat::TableText),
            "plot-data" => Ok(ExportFormat::PlotData),
            "json" => Ok(ExportFormat::Json),
            _ => Err(format!("unknown report format {s:?} (csv, table-text, plot-data, json)")),
        }
    }
}

pub fn export_report<T: Score>(
    report: &StratifiedReport<T>,
    format: ExportFormat,
    path: &Path,
) -> Result<(), ReportError> {
    fs::write(path, report.render(format))?;
    Ok(())
}

/// Values read back from a report csv.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvReport<T> {
    pub overall: BTreeMap<Metric, Cell<T>>,
    pub by_group: BTreeMap<ErrorGroup, BTreeMap<Metric, Cell<T>>>,
}

pub fn parse_report_csv<T: Score>(text: &str) -> Result<CsvReport<T>, ReportError> {
    let err = |line: usize, message: String| ReportError::Csv { line, message };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "scope,group,metric,mean,n,direction")) => {}
        _ => return Err(err(1, "missing header".into())),
    }
    let mut out = CsvReport { overall: BTreeMap::new(), by_group: BTreeMap::new() };
    for (idx, raw) in lines {
        let line = idx + 1;
        let cols: Vec<&str> = raw.split(',').collect();
        let [scope, group, metric, mean, n, direction] = cols[..] else {
            return Err(err(line, format!("expected 6 columns, got {}", cols.len())));
        };
        let metric: Metric = metric.parse().map_err(|e| err(line, e))?;
        if direction != metric.direction().as_str() {
            return Err(err(line, format!("direction {direction:?} does not match {metric}")));
        }
        let mean = if mean.is_empty() {
            None
        } else {
            Some(mean.parse::<T>().map_err(|_| err(line, format!("bad mean {mean:?}")))?)
        };
        let n = n.parse().map_err(|_| err(line, format!("bad count {n:?}")))?;
        let cell = Cell { mean, n };
        match scope {
            "overall" => {
                out.overall.insert(metric, cell);
            }
            "group" => {
                let g: ErrorGroup = group.parse().map_err(|e: crate::corpus::UnknownLabel| err(line, e.to_string()))?;
                out.by_group.entry(g).or_default().insert(metric, cell);
            }
            other => return Err(err(line, format!("unknown scope {other:?}"))),
        }
    }
    Ok(out)
}
