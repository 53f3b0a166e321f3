use std::path::Path;

use serde::{Deserialize, Serialize};

use super::cv::{Stat, Summary};
use super::metrics::Metrics;
use crate::dataset::Label;
use crate::error::{Error, Result};

/// One method's line of a comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub method: String,
    pub acc: Stat,
    pub prec: Stat,
    pub auc: Option<Stat>,
    pub n_rules: Option<Stat>,
    pub terms_per_rule: Option<Stat>,
    pub eta: Option<Stat>,
}

impl TableRow {
    pub fn from_summary(method: &str, s: &Summary) -> Self {
        TableRow {
            method: method.to_string(),
            acc: s.acc,
            prec: s.prec,
            auc: s.auc,
            n_rules: s.n_rules,
            terms_per_rule: s.terms_per_rule,
            eta: s.eta,
        }
    }

    pub fn from_metrics(method: &str, m: &Metrics) -> Self {
        let one = |v: f64| Stat { mean: v, std: 0.0, n: 1 };
        TableRow {
            method: method.to_string(),
            acc: one(m.acc),
            prec: one(m.prec),
            auc: m.auc.map(one),
            n_rules: m.n_rules.map(one),
            terms_per_rule: m.terms_per_rule.map(one),
            eta: m.eta.map(one),
        }
    }

    /// Cells as printed: Acc and Prec means in percent with the deviation as
    /// a fraction, AUC and eta as fractions, #T/R without deviation.
    pub fn cells(&self) -> [String; 7] {
        const NONE: &str = "-";
        let pct = |s: Stat| format!("{:.2}±{:.4}", 100.0 * s.mean, s.std);
        let frac = |s: Option<Stat>| s.map_or(NONE.into(), |s| format!("{:.4}±{:.4}", s.mean, s.std));
        [
            self.method.clone(),
            pct(self.acc),
            pct(self.prec),
            frac(self.auc),
            self.n_rules.map_or(NONE.into(), |s| format!("{:.1}±{:.2}", s.mean, s.std)),
            self.terms_per_rule.map_or(NONE.into(), |s| format!("{:.2}", s.mean)),
            frac(self.eta),
        ]
    }
}

const HEADER: [&str; 7] = ["Method", "Acc (%)", "Prec (%)", "AUC", "#R", "#T/R", "eta"];

/// Aligned plain-text table and its CSV twin.
pub fn comparison_table(rows: &[TableRow]) -> (String, String) {
    let cells: Vec<[String; 7]> = rows.iter().map(TableRow::cells).collect();
    let mut width: Vec<usize> = HEADER.iter().map(|h| h.chars().count()).collect();
    for r in &cells {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |r: &[String]| {
        let padded: Vec<String> = r
            .iter()
            .zip(&width)
            .map(|(c, &w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let header: Vec<String> = HEADER.iter().map(|s| s.to_string()).collect();
    let mut text = line(&header);
    let mut csv = HEADER.join(",") + "\n";
    for r in &cells {
        text.push_str(&line(r));
        csv.push_str(&(r.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(",") + "\n"));
    }
    (text, csv)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Reads an external baseline file with `score` and `label` columns; scores
/// are oriented toward `+1`.
pub fn read_scored_csv(path: &Path) -> Result<(Vec<f64>, Vec<Label>)> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let (si, li) = (col("score")?, col("label")?);
    let (mut scores, mut labels) = (Vec::new(), Vec::new());
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = i as u64 + 2;
        let raw = rec.get(si).unwrap_or("");
        let s: f64 = raw.parse().map_err(|_| Error::NonNumeric {
            line,
            column: "score".into(),
            value: raw.to_string(),
        })?;
        let raw = rec.get(li).unwrap_or("");
        let l = raw
            .parse::<i64>()
            .ok()
            .and_then(Label::from_i64)
            .ok_or_else(|| Error::InvalidLabel {
                line,
                value: raw.to_string(),
            })?;
        scores.push(s);
        labels.push(l);
    }
    if scores.is_empty() {
        return Err(Error::EmptyFile { path: path.to_path_buf() });
    }
    Ok((scores, labels))
}

/// Table row for an external method; predictions threshold scores at 0.
pub fn external_row(method: &str, path: &Path, positive: Label) -> Result<TableRow> {
    let (scores, labels) = read_scored_csv(path)?;
    let preds: Vec<Label> = scores.iter().map(|&s| Label::from_score(s)).collect();
    Ok(TableRow::from_metrics(method, &Metrics::compute(&preds, &scores, &labels, positive, None)?))
}
