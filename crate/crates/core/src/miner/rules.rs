use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::Term;
use crate::dataset::{DiscretizedDataset, Discretizer, Label, Standardizer};
use crate::eval::ConfusionCounts;

/// Conjunctive rule. `counts` are measured on the cases the rule was mined
/// from, with the consequent as the positive class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub antecedent: Vec<Term>,
    pub consequent: Label,
    pub quality: f64,
    pub counts: ConfusionCounts,
}

impl Rule {
    pub fn matches(&self, row: &[u16]) -> bool {
        self.antecedent.iter().all(|t| t.matches(row))
    }

    /// Cases covered on the mining set, `TP + FP`.
    pub fn cover(&self) -> usize {
        self.counts.tp + self.counts.fp
    }

    pub(crate) fn key(&self) -> (Vec<Term>, Label) {
        let mut terms = self.antecedent.clone();
        terms.sort_unstable();
        (terms, self.consequent)
    }
}

/// Ordered rule list with first-match semantics and a default class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleList {
    pub rules: Vec<Rule>,
    pub default_class: Label,
    /// Class counts `[-1, +1]` of the residual cases behind the default rule.
    pub default_counts: [usize; 2],
}

impl RuleList {
    pub fn default_only(counts: [usize; 2]) -> Self {
        RuleList {
            rules: Vec::new(),
            default_class: crate::dataset::majority(counts),
            default_counts: counts,
        }
    }

    pub fn n_rules(&self) -> usize {
        self.rules.len()
    }

    /// Mean antecedent length; 0 for a default-only list.
    pub fn terms_per_rule(&self) -> f64 {
        if self.rules.is_empty() {
            0.0
        } else {
            self.rules.iter().map(|r| r.antecedent.len()).sum::<usize>() as f64 / self.rules.len() as f64
        }
    }

    pub fn classify(&self, row: &[u16]) -> (Label, Option<usize>) {
        classify(self, row)
    }

    pub fn score(&self, row: &[u16]) -> f64 {
        rule_score(self, row)
    }

    pub fn predictions(&self, data: &DiscretizedDataset) -> Vec<Label> {
        data.bins.iter().map(|r| classify(self, r).0).collect()
    }

    pub fn scores(&self, data: &DiscretizedDataset) -> Vec<f64> {
        data.bins.iter().map(|r| rule_score(self, r)).collect()
    }
}

/// First matching rule's class and index; `None` when the default fires.
pub fn classify(list: &RuleList, row: &[u16]) -> (Label, Option<usize>) {
    list.rules
        .iter()
        .position(|r| r.matches(row))
        .map_or((list.default_class, None), |i| (list.rules[i].consequent, Some(i)))
}

fn laplace(class: Label, tp: usize, fp: usize) -> f64 {
    class.as_f64() * (tp as f64 + 1.0) / (tp as f64 + fp as f64 + 2.0)
}

/// Signed Laplace confidence of the rule that fires on `row`.
pub fn rule_score(list: &RuleList, row: &[u16]) -> f64 {
    match classify(list, row).1 {
        Some(i) => {
            let r = &list.rules[i];
            laplace(r.consequent, r.counts.tp, r.counts.fp)
        }
        None => {
            let c = list.default_class;
            laplace(c, list.default_counts[c.index()], list.default_counts[c.other().index()])
        }
    }
}

/// Renders rule lists in the one-rule-per-line text format, with bins shown
/// as real-valued intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleFormatter {
    names: Vec<String>,
    edges: Vec<Vec<f64>>,
}

impl RuleFormatter {
    pub fn new(names: Vec<String>, edges: Vec<Vec<f64>>) -> Self {
        RuleFormatter { names, edges }
    }

    /// Edges of `disc`, mapped back through `standardizer` when given.
    pub fn from_discretizer(disc: &Discretizer, standardizer: Option<&Standardizer>) -> Self {
        let edges = disc
            .edges
            .iter()
            .enumerate()
            .map(|(i, e)| match standardizer {
                Some(st) => e.iter().map(|&z| st.invert(i, z)).collect(),
                None => e.clone(),
            })
            .collect();
        RuleFormatter::new(disc.feature_names.clone(), edges)
    }

    pub fn from_dataset(data: &DiscretizedDataset) -> Self {
        RuleFormatter::new(
            data.feature_names(),
            data.specs.iter().map(|s| s.bin_edges.clone()).collect(),
        )
    }

    fn interval(&self, t: Term) -> String {
        let e = &self.edges[t.attribute];
        let v = usize::from(t.value);
        let lo = if v == 0 { "-inf".to_string() } else { fmt_edge(e[v - 1]) };
        let hi = if v >= e.len() { "inf".to_string() } else { fmt_edge(e[v]) };
        format!("{} in [{lo},{hi})", self.names[t.attribute])
    }

    pub fn render_rule(&self, r: &Rule) -> String {
        let cond = if r.antecedent.is_empty() {
            "TRUE".to_string()
        } else {
            r.antecedent
                .iter()
                .map(|&t| self.interval(t))
                .collect::<Vec<_>>()
                .join(" AND ")
        };
        format!(
            "IF {cond} THEN class={} (Q={:.4}, cover={})",
            r.consequent,
            r.quality,
            r.cover()
        )
    }

    pub fn render(&self, list: &RuleList) -> String {
        let mut out = String::new();
        for r in &list.rules {
            let _ = writeln!(out, "{}", self.render_rule(r));
        }
        let _ = writeln!(out, "DEFAULT class={}", list.default_class);
        out
    }
}

fn fmt_edge(v: f64) -> String {
    let s = format!("{v:.4}");
    if s == "-0.0000" {
        "0.0000".into()
    } else {
        s
    }
}
