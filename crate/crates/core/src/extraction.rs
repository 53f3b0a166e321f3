//! Pedagogical rule extraction: the trained ELM labels synthetic inputs and
//! the miner learns a rule list from those labels. Fidelity is always
//! measured on probe sets drawn independently of the mining set.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{class_counts, majority, Dataset, DiscretizeStrategy, DiscretizedDataset, Discretizer, Label};
use crate::elm::ElmModel;
use crate::error::{Error, Result};
use crate::eval::Metrics;
use crate::miner::{mine_with, rule_quality, MineStats, MinerConfig, Rule, RuleList, Term};
use crate::seed;

const MAX_DEFAULT_EXAMPLES: usize = 20_000;

/// Options of the extraction stage. `None` sizes resolve against the
/// training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractionConfig {
    /// Size of the synthetic mining set; default `10 * |train|` capped at 20,000.
    pub n_examples: Option<usize>,
    /// Size of each probe set; default `|train|`.
    pub probe_size: Option<usize>,
    /// A rule is kept when list fidelity stays at or above this fraction of
    /// the previous fidelity, or improves.
    pub fidelity_threshold: f64,
    pub bins_per_feature: usize,
    pub strategy: DiscretizeStrategy,
    /// Offer rules for pure groups of identical binned rows before mining.
    pub exact_match_prepass: bool,
    /// Consecutive rejected rules after which the list is closed.
    pub max_rejections: usize,
    pub miner: MinerConfig,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig {
            n_examples: None,
            probe_size: None,
            fidelity_threshold: 0.95,
            bins_per_feature: 6,
            strategy: DiscretizeStrategy::EqualFrequency,
            exact_match_prepass: false,
            max_rejections: 5,
            miner: MinerConfig::default(),
        }
    }
}

impl ExtractionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.fidelity_threshold >= 0.0 && self.fidelity_threshold <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "fidelity_threshold must lie in [0, 1], got {}",
                self.fidelity_threshold
            )));
        }
        if self.bins_per_feature < 2 {
            return Err(Error::InvalidConfig("bins_per_feature must be >= 2".into()));
        }
        if self.max_rejections == 0 {
            return Err(Error::InvalidConfig("max_rejections must be >= 1".into()));
        }
        self.miner.validate()
    }
}

/// Concrete sampling parameters for one extraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub n_examples: usize,
    /// Per-feature `[min, max]` of the (standardized) training inputs.
    pub ranges: Vec<(f64, f64)>,
    pub seed: u64,
    pub fidelity_threshold: f64,
    pub probe_size: usize,
}

impl SamplingConfig {
    pub fn from_training(train: &Dataset, cfg: &ExtractionConfig, seed: u64) -> Self {
        let n = train.n_samples();
        SamplingConfig {
            n_examples: cfg
                .n_examples
                .unwrap_or_else(|| (10 * n).min(MAX_DEFAULT_EXAMPLES)),
            ranges: train.specs().iter().map(|s| (s.min, s.max)).collect(),
            seed,
            fidelity_threshold: cfg.fidelity_threshold,
            probe_size: cfg.probe_size.unwrap_or(n),
        }
    }

    fn validate(&self) -> Result<()> {
        if self
            .ranges
            .iter()
            .any(|&(lo, hi)| !lo.is_finite() || !hi.is_finite() || lo > hi)
        {
            return Err(Error::InvalidConfig("sampling ranges must be finite with min <= max".into()));
        }
        if self.probe_size == 0 {
            return Err(Error::InvalidConfig("probe_size must be >= 1".into()));
        }
        Ok(())
    }
}

/// Independent uniform draws on each feature's range.
pub fn generate_inputs(ranges: &[(f64, f64)], n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = seed::rng(seed);
    (0..n)
        .map(|_| {
            ranges
                .iter()
                .map(|&(lo, hi)| if hi > lo { rng.gen_range(lo..=hi) } else { lo })
                .collect()
        })
        .collect()
}

/// Joins `rows` with the model's predicted labels.
pub fn label_with_model(model: &ElmModel, names: &[String], rows: Vec<Vec<f64>>) -> Result<Dataset> {
    let labels = rows
        .par_iter()
        .map(|r| model.predict(r))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(names.to_vec(), rows, labels)
}

/// Agreement between the rule list and the model on `probe` rows.
pub fn fidelity(rules: &RuleList, model: &ElmModel, probe: &[Vec<f64>], discretizer: &Discretizer) -> Result<f64> {
    if probe.is_empty() {
        return Err(Error::InvalidConfig("fidelity needs a nonempty probe set".into()));
    }
    let agree = probe
        .par_iter()
        .map(|r| Ok((rules.classify(&discretizer.bin_row(r)).0 == model.predict(r)?) as usize))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum::<usize>();
    Ok(agree as f64 / probe.len() as f64)
}

fn binned_fidelity(rules: &RuleList, bins: &[Vec<u16>], labels: &[Label]) -> f64 {
    let agree = bins
        .iter()
        .zip(labels)
        .filter(|(b, &l)| rules.classify(b).0 == l)
        .count();
    agree as f64 / labels.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionResult {
    pub fidelity: f64,
    pub n_rules: usize,
    pub terms_per_rule: f64,
    pub rules: RuleList,
    /// Fitted on the synthetic mining set, in the model's input units.
    pub discretizer: Discretizer,
    /// Rules against model labels on the mining set.
    pub train_metrics: Metrics,
    /// Rules against model labels on the reporting probe set.
    pub probe_metrics: Metrics,
    pub n_examples: usize,
    pub probe_size: usize,
    pub stats: MineStats,
}

/// Pure groups of identical binned rows, largest first, as full-length rules.
fn exact_match_rules(data: &DiscretizedDataset, rows: &[usize], min_cases: usize) -> Vec<Rule> {
    let mut groups: BTreeMap<&[u16], [usize; 2]> = BTreeMap::new();
    for &i in rows {
        groups.entry(&data.bins[i]).or_default()[data.labels[i].index()] += 1;
    }
    let totals = class_counts(rows.iter().map(|&i| &data.labels[i]));
    let mut out: Vec<Rule> = groups
        .into_iter()
        .filter_map(|(key, c)| {
            let class = if c[0] == 0 {
                Label::Positive
            } else if c[1] == 0 {
                Label::Negative
            } else {
                return None;
            };
            let tp = c[class.index()];
            if tp < min_cases {
                return None;
            }
            let counts = crate::eval::ConfusionCounts {
                tp,
                fp: 0,
                fn_: totals[class.index()] - tp,
                tn: totals[class.other().index()],
            };
            Some(Rule {
                antecedent: key.iter().enumerate().map(|(a, &v)| Term::new(a, v)).collect(),
                consequent: class,
                quality: rule_quality(&counts),
                counts,
            })
        })
        .collect();
    out.sort_by_key(|r| std::cmp::Reverse(r.cover()));
    out
}

/// Runs the full extraction for a model trained on `train`.
pub fn extract(
    model: &ElmModel,
    train: &Dataset,
    sampling: &SamplingConfig,
    cfg: &ExtractionConfig,
) -> Result<ExtractionResult> {
    cfg.validate()?;
    sampling.validate()?;
    if train.n_features() != model.n || sampling.ranges.len() != model.n {
        return Err(Error::DimensionMismatch {
            expected: model.n,
            found: train.n_features(),
        });
    }
    let names = train.feature_names();

    let mining = label_with_model(
        model,
        &names,
        generate_inputs(&sampling.ranges, sampling.n_examples.max(1), seed::mix(sampling.seed, &[1])),
    )?;
    let discretizer = Discretizer::fit(&mining, cfg.bins_per_feature, cfg.strategy)?;
    let binned = discretizer.transform(&mining)?;

    let check_rows = generate_inputs(&sampling.ranges, sampling.probe_size, seed::mix(sampling.seed, &[2]));
    let check_labels = model.predictions(&check_rows)?;
    let check_bins: Vec<Vec<u16>> = check_rows.iter().map(|r| discretizer.bin_row(r)).collect();

    let mut previous = binned_fidelity(&RuleList::default_only(class_counts(&binned.labels)), &check_bins, &check_labels);
    let threshold = sampling.fidelity_threshold;
    let mut accept = |candidate: &RuleList| {
        let f = binned_fidelity(candidate, &check_bins, &check_labels);
        let ok = f >= threshold * previous || f > previous;
        if ok {
            previous = f;
        }
        ok
    };

    let mut remaining: Vec<usize> = (0..binned.n_samples()).collect();
    let mut prepass_rules: Vec<Rule> = Vec::new();
    if cfg.exact_match_prepass {
        for rule in exact_match_rules(&binned, &remaining, cfg.miner.min_cases_per_rule) {
            let (_, rest): (Vec<usize>, Vec<usize>) =
                remaining.iter().partition(|&&i| rule.matches(&binned.bins[i]));
            let counts = class_counts(rest.iter().map(|&i| &binned.labels[i]));
            let mut candidate = RuleList {
                rules: prepass_rules.clone(),
                default_class: majority(counts),
                default_counts: counts,
            };
            candidate.rules.push(rule.clone());
            if accept(&candidate) {
                prepass_rules.push(rule);
                remaining = rest;
            }
        }
    }

    let mining_set = binned.subset(&remaining);
    let (mut rules, stats) = if prepass_rules.is_empty() {
        mine_with(&mining_set, &cfg.miner, cfg.max_rejections, &mut accept)?
    } else {
        let prefix = prepass_rules.clone();
        let mut wrapped = |candidate: &RuleList| {
            let mut full = candidate.clone();
            full.rules.splice(0..0, prefix.iter().cloned());
            accept(&full)
        };
        mine_with(&mining_set, &cfg.miner, cfg.max_rejections, &mut wrapped)?
    };
    if !prepass_rules.is_empty() {
        rules.rules.splice(0..0, prepass_rules);
    }

    let report_rows = generate_inputs(&sampling.ranges, sampling.probe_size, seed::mix(sampling.seed, &[3]));
    let report_labels = model.predictions(&report_rows)?;
    let report = DiscretizedDataset {
        specs: binned.specs.clone(),
        bins: report_rows.iter().map(|r| discretizer.bin_row(r)).collect(),
        b: binned.b.clone(),
        labels: report_labels,
    };
    let positive = Label::Negative;
    let train_metrics = Metrics::compute(&rules.predictions(&binned), &rules.scores(&binned), &binned.labels, positive, Some(&rules))?;
    let probe_metrics = Metrics::compute(&rules.predictions(&report), &rules.scores(&report), &report.labels, positive, Some(&rules))?;

    Ok(ExtractionResult {
        fidelity: probe_metrics.acc,
        n_rules: rules.n_rules(),
        terms_per_rule: rules.terms_per_rule(),
        rules,
        discretizer,
        train_metrics,
        probe_metrics,
        n_examples: binned.n_samples(),
        probe_size: sampling.probe_size,
        stats,
    })
}
