use serde::{Deserialize, Serialize};

use super::roc::roc_auc_for;
use crate::dataset::Label;
use crate::error::{Error, Result};
use crate::miner::RuleList;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// Counts with `positive` as the positive class.
pub fn confusion(predictions: &[Label], labels: &[Label], positive: Label) -> Result<ConfusionCounts> {
    if predictions.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            found: predictions.len(),
        });
    }
    if labels.is_empty() {
        return Err(Error::InvalidConfig("confusion counts need at least one sample".into()));
    }
    let mut c = ConfusionCounts::default();
    for (&p, &l) in predictions.iter().zip(labels) {
        match (p == positive, l == positive) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

pub fn accuracy(c: &ConfusionCounts) -> f64 {
    (c.tp + c.tn) as f64 / c.total() as f64
}

/// `TP / (TP + FP)`, or 0 when nothing was predicted positive (see
/// [`precision_defined`]).
pub fn precision(c: &ConfusionCounts) -> f64 {
    if precision_defined(c) {
        c.tp as f64 / (c.tp + c.fp) as f64
    } else {
        0.0
    }
}

pub fn precision_defined(c: &ConfusionCounts) -> bool {
    c.tp + c.fp > 0
}

/// Mean of accuracy, precision and AUC.
pub fn composite_eta(acc: f64, prec: f64, auc: f64) -> f64 {
    (acc + prec + auc) / 3.0
}

/// Evaluation of one classifier on one sample set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub acc: f64,
    pub prec: f64,
    /// `None` when the labels hold a single class.
    pub auc: Option<f64>,
    #[serde(rename = "n_rules")]
    pub n_rules: Option<f64>,
    pub terms_per_rule: Option<f64>,
    pub eta: Option<f64>,
    pub counts: ConfusionCounts,
    /// Set when precision fell back to 0 because nothing was predicted positive.
    pub precision_undefined: bool,
}

impl Metrics {
    pub fn compute(
        predictions: &[Label],
        scores: &[f64],
        labels: &[Label],
        positive: Label,
        rules: Option<&RuleList>,
    ) -> Result<Metrics> {
        let counts = confusion(predictions, labels, positive)?;
        let acc = accuracy(&counts);
        let prec = precision(&counts);
        let auc = match roc_auc_for(scores, labels, positive) {
            Ok(roc) => Some(roc.auc),
            Err(Error::DegenerateRoc) => None,
            Err(e) => return Err(e),
        };
        Ok(Metrics {
            acc,
            prec,
            auc,
            n_rules: rules.map(|r| r.n_rules() as f64),
            terms_per_rule: rules.map(RuleList::terms_per_rule),
            eta: auc.map(|a| composite_eta(acc, prec, a)),
            counts,
            precision_undefined: !precision_defined(&counts),
        })
    }
}
