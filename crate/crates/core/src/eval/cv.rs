use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::Metrics;
use super::roc::{roc_auc_for, RocCurve};
use crate::dataset::{stratified_kfold, Dataset, Discretizer, Fold, Label, Standardizer};
use crate::elm::{self, ElmConfig, ElmModel};
use crate::error::{Error, Result};
use crate::extraction::{extract, ExtractionConfig, SamplingConfig};
use crate::miner::{mine, RuleList};
use crate::seed;

/// Which classifier a cross-validation run evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PipelineMode {
    /// ELM followed by rule extraction; the rules are evaluated.
    #[default]
    ElmRules,
    /// The ELM alone.
    Elm,
    /// The miner applied directly to the discretized training data.
    Rules,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineSpec {
    pub mode: PipelineMode,
    pub elm: ElmConfig,
    pub extraction: ExtractionConfig,
    /// Class treated as positive by precision and AUC.
    pub positive_class: Label,
}

impl Default for PipelineSpec {
    fn default() -> Self {
        PipelineSpec {
            mode: PipelineMode::ElmRules,
            elm: ElmConfig::default(),
            extraction: ExtractionConfig::default(),
            positive_class: Label::Negative,
        }
    }
}

impl PipelineSpec {
    pub fn validate(&self) -> Result<()> {
        self.elm.validate()?;
        self.extraction.validate()
    }
}

/// Sample mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl Stat {
    /// `None` for an empty sample; the deviation of a single value is 0.
    pub fn of(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(Stat { mean, std, n })
    }
}

/// Aggregates over folds, in the column order Acc, Prec, AUC, #R, #T/R, η.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub acc: Stat,
    pub prec: Stat,
    pub auc: Option<Stat>,
    pub n_rules: Option<Stat>,
    pub terms_per_rule: Option<Stat>,
    pub eta: Option<Stat>,
}

impl Summary {
    pub fn of(metrics: &[&Metrics]) -> Result<Summary> {
        let pick = |f: &dyn Fn(&Metrics) -> Option<f64>| {
            Stat::of(&metrics.iter().filter_map(|m| f(m)).collect::<Vec<_>>())
        };
        let missing = || Error::InvalidConfig("no folds to summarize".into());
        Ok(Summary {
            acc: pick(&|m| Some(m.acc)).ok_or_else(missing)?,
            prec: pick(&|m| Some(m.prec)).ok_or_else(missing)?,
            auc: pick(&|m| m.auc),
            n_rules: pick(&|m| m.n_rules),
            terms_per_rule: pick(&|m| m.terms_per_rule),
            eta: pick(&|m| m.eta),
        })
    }

    /// `(column header, value)` pairs in table order.
    pub fn columns(&self) -> [(&'static str, Option<Stat>); 6] {
        [
            ("Acc", Some(self.acc)),
            ("Prec", Some(self.prec)),
            ("AUC", self.auc),
            ("#R", self.n_rules),
            ("#T/R", self.terms_per_rule),
            ("eta", self.eta),
        ]
    }
}

/// Per-fold outcome as stored in a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub train_size: usize,
    pub validation_size: usize,
    pub dropped_features: Vec<String>,
    /// Validation metrics of the evaluated classifier.
    pub metrics: Metrics,
    /// Validation metrics of the ELM itself, when one was trained.
    pub elm_metrics: Option<Metrics>,
    /// Rule/ELM agreement on the extraction probe set.
    pub fidelity: Option<f64>,
    /// Error name when AUC could not be computed on this fold.
    pub auc_error: Option<String>,
}

/// Everything fitted on a fold's training part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldArtifacts {
    pub standardizer: Standardizer,
    pub model: Option<ElmModel>,
    pub rules: Option<RuleList>,
    pub discretizer: Option<Discretizer>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldOutcome {
    pub result: FoldResult,
    pub artifacts: FoldArtifacts,
    /// Validation scores oriented toward `+1`, with the true labels.
    pub scores: Vec<f64>,
    pub labels: Vec<Label>,
}

/// Fits on `fold.train` and evaluates on `fold.validation`. Validation rows
/// are touched only after every artifact is fitted.
pub fn run_fold(spec: &PipelineSpec, ds: &Dataset, fold: &Fold, index: usize, seed: u64) -> Result<FoldOutcome> {
    let (train, dropped) = ds.subset(&fold.train)?.drop_constant_features()?;
    let standardizer = Standardizer::fit(&train)?;
    let train = standardizer.apply(&train)?;

    let mut extraction = spec.extraction.clone();
    extraction.miner.seed = seed::mix(seed, &[index as u64, 3]);
    let mut artifacts = FoldArtifacts {
        standardizer: standardizer.clone(),
        model: None,
        rules: None,
        discretizer: None,
    };
    let mut fidelity = None;
    match spec.mode {
        PipelineMode::Elm | PipelineMode::ElmRules => {
            let mut model = elm::train(&train, &spec.elm, seed::mix(seed, &[index as u64, 1]))?;
            model.preprocessing = Some(standardizer.clone());
            if spec.mode == PipelineMode::ElmRules {
                let sampling = SamplingConfig::from_training(&train, &extraction, seed::mix(seed, &[index as u64, 2]));
                let r = extract(&model, &train, &sampling, &extraction)?;
                fidelity = Some(r.fidelity);
                artifacts.rules = Some(r.rules);
                artifacts.discretizer = Some(r.discretizer);
            }
            artifacts.model = Some(model);
        }
        PipelineMode::Rules => {
            let disc = Discretizer::fit(&train, extraction.bins_per_feature, extraction.strategy)?;
            artifacts.rules = Some(mine(&disc.transform(&train)?, &extraction.miner)?);
            artifacts.discretizer = Some(disc);
        }
    }

    let validation = standardizer.apply(&ds.subset(&fold.validation)?)?;
    let labels = validation.labels().to_vec();
    let positive = spec.positive_class;
    let elm_eval = match &artifacts.model {
        Some(m) => {
            let scores = m.decisions(validation.rows())?;
            let preds: Vec<Label> = scores.iter().map(|&s| Label::from_score(s)).collect();
            Some((Metrics::compute(&preds, &scores, &labels, positive, None)?, scores))
        }
        None => None,
    };
    let (metrics, scores) = match (&artifacts.rules, &artifacts.discretizer) {
        (Some(rules), Some(disc)) => {
            let bins: Vec<Vec<u16>> = validation.rows().iter().map(|r| disc.bin_row(r)).collect();
            let preds: Vec<Label> = bins.iter().map(|b| rules.classify(b).0).collect();
            let scores: Vec<f64> = bins.iter().map(|b| rules.score(b)).collect();
            (Metrics::compute(&preds, &scores, &labels, positive, Some(rules))?, scores)
        }
        _ => elm_eval.clone().expect("ELM mode trains a model"),
    };
    let auc_error = metrics.auc.is_none().then(|| Error::DegenerateRoc.name().to_string());
    Ok(FoldOutcome {
        result: FoldResult {
            fold: index,
            train_size: fold.train.len(),
            validation_size: fold.validation.len(),
            dropped_features: dropped,
            metrics,
            elm_metrics: elm_eval.map(|(m, _)| m),
            fidelity,
            auc_error,
        },
        artifacts,
        scores,
        labels,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub k: usize,
    pub seed: u64,
    pub mode: PipelineMode,
    pub positive_class: Label,
    pub folds: Vec<FoldResult>,
    pub summary: Summary,
    /// ELM validation summary when the pipeline trains one.
    pub elm_summary: Option<Summary>,
    pub fidelity: Option<Stat>,
    /// ROC over all validation scores pooled across folds.
    pub roc: Option<RocCurve>,
}

/// Stratified `k`-fold cross-validation of the pipeline in `spec`.
pub fn cross_validate(spec: &PipelineSpec, ds: &Dataset, k: usize, seed: u64) -> Result<CvReport> {
    spec.validate()?;
    let folds = stratified_kfold(ds.labels(), k, seed)?;
    let outcomes = folds
        .par_iter()
        .enumerate()
        .map(|(i, f)| run_fold(spec, ds, f, i, seed))
        .collect::<Result<Vec<_>>>()?;

    let metrics: Vec<&Metrics> = outcomes.iter().map(|o| &o.result.metrics).collect();
    let elm: Vec<&Metrics> = outcomes.iter().filter_map(|o| o.result.elm_metrics.as_ref()).collect();
    let fid: Vec<f64> = outcomes.iter().filter_map(|o| o.result.fidelity).collect();
    let scores: Vec<f64> = outcomes.iter().flat_map(|o| o.scores.iter().copied()).collect();
    let labels: Vec<Label> = outcomes.iter().flat_map(|o| o.labels.iter().copied()).collect();
    let roc = match roc_auc_for(&scores, &labels, spec.positive_class) {
        Ok(r) => Some(r),
        Err(Error::DegenerateRoc) => None,
        Err(e) => return Err(e),
    };
    Ok(CvReport {
        k,
        seed,
        mode: spec.mode,
        positive_class: spec.positive_class,
        summary: Summary::of(&metrics)?,
        elm_summary: if elm.is_empty() { None } else { Some(Summary::of(&elm)?) },
        fidelity: Stat::of(&fid),
        roc,
        folds: outcomes.into_iter().map(|o| o.result).collect(),
    })
}
