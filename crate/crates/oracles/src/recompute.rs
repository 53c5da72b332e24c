//! Spreadsheet-style recomputation of the stratified report csv straight
//! from a score file's JSON, without touching any production types.

use std::collections::BTreeMap;

use serde_json::Value;

/// (column name in the score file, higher or lower is better), in
/// reporting order.
const METRICS: [(&str, &str); 7] = [
    ("sacrebleu", "higher_better"),
    ("meteor", "higher_better"),
    ("rouge_l", "higher_better"),
    ("bertscore", "higher_better"),
    ("bertscore_rescaled", "higher_better"),
    ("ter", "lower_better"),
    ("google_bleu", "higher_better"),
];

fn group_of(error_type: &str) -> &str {
    if error_type.starts_with("grammar_") {
        "grammar"
    } else {
        error_type
    }
}

#[derive(Default, Clone, Copy)]
struct Column {
    sum: f64,
    n: usize,
}

fn cell(c: &Column) -> (String, usize) {
    let mean = if c.n == 0 { String::new() } else { (c.sum / c.n as f64).to_string() };
    (mean, c.n)
}

/// Report csv for a score file: per-group rows (groups sorted by name),
/// then overall rows. Sums accumulate in record order.
pub fn recompute_report_csv(score_file_json: &str) -> Result<String, String> {
    let doc: Value = serde_json::from_str(score_file_json).map_err(|e| e.to_string())?;
    let records = doc["records"].as_array().ok_or("score file has no records array")?;
    let mut groups: BTreeMap<String, [Column; 7]> = BTreeMap::new();
    let mut overall = [Column::default(); 7];
    for r in records {
        let et = r["error_type"].as_str().ok_or("record without error_type")?;
        if r["critical"] != Value::Bool(true) {
            return Err("record not critical".into());
        }
        let cols = groups.entry(group_of(et).to_string()).or_insert([Column::default(); 7]);
        for (i, (name, _)) in METRICS.iter().enumerate() {
            if let Some(x) = r["scores"][*name].as_f64() {
                cols[i].sum += x;
                cols[i].n += 1;
                overall[i].sum += x;
                overall[i].n += 1;
            }
        }
    }
    let mut out = String::from("scope,group,metric,mean,n,direction\n");
    for (g, cols) in &groups {
        for (i, (name, dir)) in METRICS.iter().enumerate() {
            let (mean, n) = cell(&cols[i]);
            out.push_str(&format!("group,{g},{name},{mean},{n},{dir}\n"));
        }
    }
    for (i, (name, dir)) in METRICS.iter().enumerate() {
        let (mean, n) = cell(&overall[i]);
        out.push_str(&format!("overall,,{name},{mean},{n},{dir}\n"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_example() {
        let doc = r#"{"records":[
            {"id":"a","error_type":"grammar_negation","critical":true,"scores":{"sacrebleu":0.2,"meteor":1,"rouge_l":1,"ter":0,"google_bleu":1}},
            {"id":"b","error_type":"grammar_subject","critical":true,"scores":{"sacrebleu":0.4,"meteor":1,"rouge_l":1,"ter":0.5,"google_bleu":1}}
        ]}"#;
        let csv = recompute_report_csv(doc).unwrap();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 15);
        assert!(lines[1].starts_with("group,grammar,sacrebleu,0.30000000000000004,2,"));
        assert_eq!(lines[4], "group,grammar,bertscore,,0,higher_better");
        assert_eq!(lines[13], "overall,,ter,0.25,2,lower_better");
    }
}
