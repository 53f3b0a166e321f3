use std::collections::HashSet;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bits::BitSet;
use super::heuristic::heuristic_table;
use super::pheromone::{adapt_evaporation, init_pheromone, term_probability, PheromoneTable};
use super::{HeuristicKind, MinerConfig, Rule, RuleList, Term, TermSpace};
use crate::dataset::{majority, DiscretizedDataset, Label};
use crate::error::{Error, Result};
use crate::eval::ConfusionCounts;
use crate::seed;

/// `Q = TP/(TP+FN) * TN/(TN+FP)`; an undefined factor counts as 0.
pub fn rule_quality(c: &ConfusionCounts) -> f64 {
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    ratio(c.tp, c.tp + c.fn_) * ratio(c.tn, c.tn + c.fp)
}

/// Counters collected while mining.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MineStats {
    pub rounds: usize,
    pub iterations: usize,
    pub ants: u64,
    pub rejected: usize,
    /// Floating-point operations spent evaluating the heuristic function.
    pub heuristic_ops: u64,
}

type RuleKey = (Vec<Term>, Label);

/// The training cases of one covering round, indexed compactly as bit sets.
struct Round {
    space: TermSpace,
    attr_of: Vec<usize>,
    n: usize,
    term_bits: Vec<BitSet>,
    pos: BitSet,
    totals: [usize; 2],
    eta: Vec<f64>,
    min_cases: usize,
}

impl Round {
    fn new(data: &DiscretizedDataset, rows: &[usize], kind: HeuristicKind, min_cases: usize) -> Result<(Round, u64)> {
        let space = TermSpace::new(data.b.clone())?;
        let n = rows.len();
        let total = space.total_terms();
        let mut term_bits = vec![BitSet::empty(n); total];
        let mut freq = vec![[0usize; 2]; total];
        let mut pos = BitSet::empty(n);
        let mut totals = [0usize; 2];
        for (p, &r) in rows.iter().enumerate() {
            let label = data.labels[r];
            totals[label.index()] += 1;
            if label == Label::Positive {
                pos.insert(p);
            }
            for (attribute, &value) in data.bins[r].iter().enumerate() {
                let id = space.id(Term::new(attribute, value));
                term_bits[id].insert(p);
                freq[id][label.index()] += 1;
            }
        }
        let (eta, ops) = heuristic_table(kind, &freq, n.max(1));
        let attr_of = (0..total).map(|id| space.term(id).attribute).collect();
        Ok((
            Round {
                space,
                attr_of,
                n,
                term_bits,
                pos,
                totals,
                eta,
                min_cases,
            },
            ops,
        ))
    }

    fn covered(&self, ids: &[usize]) -> BitSet {
        match ids.split_first() {
            None => BitSet::full(self.n),
            Some((&first, rest)) => {
                let mut c = self.term_bits[first].clone();
                for &id in rest {
                    c.and_assign(&self.term_bits[id]);
                }
                c
            }
        }
    }

    fn counts(&self, covered: &BitSet) -> (Label, ConfusionCounts) {
        let cov = covered.count();
        let pos = covered.and_count(&self.pos);
        let class = majority([cov - pos, pos]);
        let tp = if class == Label::Positive { pos } else { cov - pos };
        let fp = cov - tp;
        let class_total = self.totals[class.index()];
        let counts = ConfusionCounts {
            tp,
            fp,
            fn_: class_total - tp,
            tn: (self.n - class_total) - fp,
        };
        (class, counts)
    }

    fn quality(&self, ids: &[usize]) -> f64 {
        rule_quality(&self.counts(&self.covered(ids)).1)
    }

    fn construct<R: Rng>(&self, tau: &PheromoneTable, rng: &mut R) -> Vec<usize> {
        let mut covered = BitSet::full(self.n);
        let mut cov_count = self.n;
        let mut used = vec![false; self.space.attributes()];
        let mut ids = Vec::new();
        loop {
            let eligible: Vec<usize> = (0..self.term_bits.len())
                .filter(|&id| !used[self.attr_of[id]])
                .filter(|&id| {
                    let c = covered.and_count(&self.term_bits[id]);
                    // the term must refine the rule and keep the coverage floor
                    c >= self.min_cases && c < cov_count
                })
                .collect();
            let Ok(p) = term_probability(tau, &self.eta, &eligible) else {
                break;
            };
            let weights: Vec<f64> = eligible.iter().map(|&id| p[id]).collect();
            let Ok(dist) = WeightedIndex::new(&weights) else {
                break;
            };
            let id = eligible[dist.sample(rng)];
            covered.and_assign(&self.term_bits[id]);
            cov_count = covered.count();
            used[self.attr_of[id]] = true;
            ids.push(id);
        }
        ids
    }

    fn prune(&self, mut ids: Vec<usize>) -> Vec<usize> {
        let mut q = self.quality(&ids);
        while ids.len() > 1 {
            let mut best: Option<(usize, f64)> = None;
            for skip in 0..ids.len() {
                let cand: Vec<usize> = ids
                    .iter()
                    .enumerate()
                    .filter_map(|(i, &id)| (i != skip).then_some(id))
                    .collect();
                let qc = self.quality(&cand);
                if best.is_none_or(|(_, bq)| qc > bq) {
                    best = Some((skip, qc));
                }
            }
            match best {
                Some((skip, qc)) if qc > q => {
                    ids.remove(skip);
                    q = qc;
                }
                _ => break,
            }
        }
        ids
    }

    fn to_rule(&self, ids: &[usize]) -> Rule {
        let (consequent, counts) = self.counts(&self.covered(ids));
        let mut antecedent: Vec<Term> = ids.iter().map(|&id| self.space.term(id)).collect();
        antecedent.sort_unstable();
        Rule {
            antecedent,
            consequent,
            quality: rule_quality(&counts),
            counts,
        }
    }

    fn ids_of(&self, rule: &Rule) -> Vec<usize> {
        rule.antecedent.iter().map(|&t| self.space.id(t)).collect()
    }
}

/// One ant's walk over `data` at the current pheromone levels (no pruning).
pub fn construct_rule<R: Rng>(
    data: &DiscretizedDataset,
    tau: &PheromoneTable,
    config: &MinerConfig,
    rng: &mut R,
) -> Result<Rule> {
    if data.n_samples() == 0 {
        return Err(Error::InvalidConfig("cannot construct a rule on empty data".into()));
    }
    let rows: Vec<usize> = (0..data.n_samples()).collect();
    let (round, _) = Round::new(data, &rows, config.heuristic, config.min_cases_per_rule)?;
    let ids = round.construct(tau, rng);
    Ok(round.to_rule(&ids))
}

/// Greedy backward elimination: drops the term whose removal gives the
/// largest quality while that strictly improves on the current rule.
pub fn prune_rule(rule: &Rule, data: &DiscretizedDataset) -> Result<Rule> {
    let rows: Vec<usize> = (0..data.n_samples()).collect();
    let (round, _) = Round::new(data, &rows, HeuristicKind::Density, 1)?;
    let ids = round.prune(round.ids_of(rule));
    Ok(round.to_rule(&ids))
}

struct Colony<'a> {
    round: Round,
    config: &'a MinerConfig,
    round_index: u64,
}

impl Colony<'_> {
    /// Best rule over all iterations of this round, skipping `forbidden`.
    fn search(
        &self,
        tau: &mut PheromoneTable,
        policy: &mut super::EvaporationPolicy,
        forbidden: &HashSet<RuleKey>,
        stats: &mut MineStats,
    ) -> Option<Rule> {
        let cfg = self.config;
        let mut best: Option<Rule> = None;
        let mut last_key: Option<RuleKey> = None;
        let mut streak = 0usize;
        for it in 0..cfg.max_iterations {
            stats.iterations += 1;
            stats.ants += cfg.n_ants as u64;
            let snapshot = &*tau;
            let ants: Vec<Rule> = (0..cfg.n_ants as u64)
                .into_par_iter()
                .map(|a| {
                    let mut rng = seed::rng_for(cfg.seed, &[self.round_index, it as u64, a]);
                    let ids = self.round.construct(snapshot, &mut rng);
                    self.round.to_rule(&self.round.prune(ids))
                })
                .collect();
            let iter_best = ants
                .into_iter()
                .filter(|r| !forbidden.contains(&r.key()))
                .fold(None::<Rule>, |b, r| match b {
                    Some(b) if b.quality >= r.quality => Some(b),
                    _ => Some(r),
                });
            match &iter_best {
                Some(r) => tau.update(&r.antecedent, r.quality, policy),
                None => tau.update(&[], 0.0, policy),
            }
            if cfg.normalize_pheromone {
                tau.normalize();
            }
            *policy = adapt_evaporation(*policy);
            let Some(r) = iter_best else { continue };
            let key = r.key();
            if last_key.as_ref() == Some(&key) {
                streak += 1;
            } else {
                streak = 1;
                last_key = Some(key);
            }
            if best.as_ref().is_none_or(|b| r.quality > b.quality) {
                best = Some(r);
            }
            if streak >= cfg.convergence_window {
                break;
            }
        }
        best
    }
}

/// Sequential-covering rule induction.
pub fn mine(data: &DiscretizedDataset, config: &MinerConfig) -> Result<RuleList> {
    mine_with(data, config, usize::MAX, &mut |_| true).map(|(list, _)| list)
}

/// Sequential covering with an acceptance hook.
///
/// Each round's best rule is offered to `accept` as the last rule of a
/// candidate list (default class from the cases it would leave uncovered).
/// Accepted rules are kept and their cases removed; rejected rules are barred
/// from later rounds and the cases stay. Mining stops after `max_rejections`
/// consecutive rejections.
pub fn mine_with(
    data: &DiscretizedDataset,
    config: &MinerConfig,
    max_rejections: usize,
    accept: &mut dyn FnMut(&RuleList) -> bool,
) -> Result<(RuleList, MineStats)> {
    config.validate()?;
    let all_counts = crate::dataset::class_counts(&data.labels);
    let mut stats = MineStats::default();
    let mut rules: Vec<Rule> = Vec::new();
    if data.n_samples() == 0 {
        return Ok((RuleList::default_only(all_counts), stats));
    }
    let space = TermSpace::new(data.b.clone())?;
    let mut remaining: Vec<usize> = (0..data.n_samples()).collect();
    let mut forbidden: HashSet<RuleKey> = HashSet::new();
    let mut tau = init_pheromone(&space);
    let mut policy = config.evaporation;
    let mut rejections = 0usize;
    let residual = |rows: &[usize]| {
        if rows.is_empty() {
            all_counts
        } else {
            crate::dataset::class_counts(rows.iter().map(|&i| &data.labels[i]))
        }
    };

    loop {
        let counts = residual(&remaining);
        let both_classes = counts[0] > 0 && counts[1] > 0;
        if remaining.len() <= config.max_uncovered || !both_classes {
            break;
        }
        if config.reinit_pheromone && stats.rounds > 0 {
            tau = init_pheromone(&space);
            policy = config.evaporation;
        }
        let (round, ops) = Round::new(data, &remaining, config.heuristic, config.min_cases_per_rule)?;
        stats.heuristic_ops += ops;
        let colony = Colony {
            round,
            config,
            round_index: stats.rounds as u64,
        };
        stats.rounds += 1;
        let Some(best) = colony.search(&mut tau, &mut policy, &forbidden, &mut stats) else {
            break;
        };
        if best.antecedent.is_empty() {
            break;
        }
        let (covered, rest): (Vec<usize>, Vec<usize>) =
            remaining.iter().partition(|&&i| best.matches(&data.bins[i]));
        debug_assert_eq!(covered.len(), best.cover());
        let rest_counts = residual(&rest);
        let mut candidate = RuleList {
            rules: std::mem::take(&mut rules),
            default_class: majority(rest_counts),
            default_counts: rest_counts,
        };
        candidate.rules.push(best);
        if accept(&candidate) {
            rules = candidate.rules;
            remaining = rest;
            rejections = 0;
        } else {
            let rejected = candidate.rules.pop().expect("candidate has a rule");
            rules = candidate.rules;
            forbidden.insert(rejected.key());
            stats.rejected += 1;
            rejections += 1;
            if rejections >= max_rejections {
                break;
            }
        }
    }
    let counts = residual(&remaining);
    Ok((
        RuleList {
            rules,
            default_class: majority(counts),
            default_counts: counts,
        },
        stats,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Label;

    fn planted(n: usize, seed: u64) -> DiscretizedDataset {
        // label -1 iff A0 = 2
        let mut rng = seed::rng(seed);
        let bins: Vec<Vec<u16>> = (0..n)
            .map(|_| (0..3).map(|_| rng.gen_range(0..3)).collect())
            .collect();
        let labels = bins
            .iter()
            .map(|r| if r[0] == 2 { Label::Negative } else { Label::Positive })
            .collect();
        DiscretizedDataset::from_bins(vec!["a".into(), "b".into(), "c".into()], vec![3, 3, 3], bins, labels)
            .unwrap()
    }

    fn small_cfg() -> MinerConfig {
        MinerConfig {
            n_ants: 40,
            max_iterations: 20,
            convergence_window: 5,
            ..MinerConfig::default()
        }
    }

    #[test]
    fn quality_examples() {
        let q = rule_quality(&ConfusionCounts { tp: 8, fn_: 2, tn: 9, fp: 1 });
        assert!((q - 0.72).abs() < 1e-15);
        assert_eq!(rule_quality(&ConfusionCounts { tp: 5, fn_: 0, tn: 7, fp: 0 }), 1.0);
        assert_eq!(rule_quality(&ConfusionCounts { tp: 5, fn_: 0, tn: 0, fp: 7 }), 0.0);
    }

    #[test]
    fn min_cases_equal_n_gives_empty_rule() {
        let d = planted(60, 1);
        let cfg = MinerConfig {
            min_cases_per_rule: 60,
            ..small_cfg()
        };
        let tau = init_pheromone(&TermSpace::new(d.b.clone()).unwrap());
        let r = construct_rule(&d, &tau, &cfg, &mut seed::rng(0)).unwrap();
        assert!(r.antecedent.is_empty());
        let c = crate::dataset::class_counts(&d.labels);
        assert_eq!(r.consequent, majority(c));
        assert_eq!(r.cover(), 60);
    }

    #[test]
    fn construction_is_seeded() {
        let d = planted(80, 2);
        let cfg = small_cfg();
        let tau = init_pheromone(&TermSpace::new(d.b.clone()).unwrap());
        let a: Vec<Rule> = (0..5)
            .map(|s| construct_rule(&d, &tau, &cfg, &mut seed::rng(s)).unwrap())
            .collect();
        let b: Vec<Rule> = (0..5)
            .map(|s| construct_rule(&d, &tau, &cfg, &mut seed::rng(s)).unwrap())
            .collect();
        assert_eq!(a, b);
        for r in &a {
            let mut attrs: Vec<usize> = r.antecedent.iter().map(|t| t.attribute).collect();
            attrs.dedup();
            assert_eq!(attrs.len(), r.antecedent.len());
            assert!(r.cover() >= cfg.min_cases_per_rule);
            assert_eq!(r.quality, rule_quality(&r.counts));
        }
    }

    #[test]
    fn entropy_ants_find_separating_term() {
        use super::super::entropy_heuristic;
        let d = planted(150, 6);
        let space = TermSpace::new(d.b.clone()).unwrap();
        let tau = init_pheromone(&space);
        // every value of the separating attribute is pure, so the maximizers
        // of tau * eta at t = 0 are exactly the three terms on attribute 0
        let score: Vec<(Term, f64)> = (0..3)
            .flat_map(|a| (0..3).map(move |v| Term::new(a, v)))
            .map(|t| (t, tau.get(t) * entropy_heuristic(t, &d)))
            .collect();
        let top = score.iter().map(|s| s.1).fold(f64::MIN, f64::max);
        let argmax: Vec<Term> = score.iter().filter(|s| s.1 == top).map(|s| s.0).collect();
        assert_eq!(argmax, vec![Term::new(0, 0), Term::new(0, 1), Term::new(0, 2)]);

        let cfg = MinerConfig {
            heuristic: HeuristicKind::Entropy,
            ..MinerConfig::default()
        };
        let misses = (0..100u64)
            .filter(|&s| {
                let best = (0..cfg.n_ants as u64)
                    .map(|a| construct_rule(&d, &tau, &cfg, &mut seed::rng_for(s, &[a])).unwrap())
                    // ants are scored after pruning, as in the colony
                    .map(|r| prune_rule(&r, &d).unwrap())
                    .fold(None::<Rule>, |b, r| match b {
                        Some(b) if b.quality >= r.quality => Some(b),
                        _ => Some(r),
                    })
                    .unwrap();
                !best.antecedent.contains(&Term::new(0, 2))
            })
            .count();
        assert!(misses <= 1, "{misses} of 100 colonies missed the term");
    }

    #[test]
    fn pruning_drops_noise_term() {
        let d = planted(90, 3);
        let rule = Rule {
            antecedent: vec![Term::new(0, 2), Term::new(1, 0)],
            consequent: Label::Negative,
            quality: 0.0,
            counts: ConfusionCounts::default(),
        };
        let pruned = prune_rule(&rule, &d).unwrap();
        assert_eq!(pruned.antecedent, vec![Term::new(0, 2)]);
        assert_eq!(pruned.quality, 1.0);

        let single = Rule {
            antecedent: vec![Term::new(1, 1)],
            ..rule.clone()
        };
        assert_eq!(prune_rule(&single, &d).unwrap().antecedent, single.antecedent);

        let exact = Rule {
            antecedent: vec![Term::new(0, 2)],
            ..rule
        };
        assert_eq!(prune_rule(&exact, &d).unwrap().antecedent, exact.antecedent);
    }

    #[test]
    fn mines_planted_rule() {
        let d = planted(150, 4);
        let list = mine(&d, &small_cfg()).unwrap();
        let first = &list.rules[0];
        assert!(first.antecedent.iter().all(|t| *t == Term::new(0, 2)));
        let acc = list
            .predictions(&d)
            .iter()
            .zip(&d.labels)
            .filter(|(p, l)| p == l)
            .count();
        assert_eq!(acc, d.n_samples());
    }

    #[test]
    fn max_uncovered_at_least_n_gives_default_only() {
        let d = planted(50, 5);
        let cfg = MinerConfig {
            max_uncovered: 50,
            ..small_cfg()
        };
        let list = mine(&d, &cfg).unwrap();
        assert!(list.rules.is_empty());
        assert_eq!(list.default_class, majority(crate::dataset::class_counts(&d.labels)));
    }

    #[test]
    fn single_class_data_gives_default_only() {
        let d = planted(40, 6);
        let pure = DiscretizedDataset {
            labels: vec![Label::Positive; 40],
            ..d
        };
        let list = mine(&pure, &small_cfg()).unwrap();
        assert!(list.rules.is_empty());
        assert_eq!(list.default_class, Label::Positive);
    }

    #[test]
    fn rejecting_everything_yields_default_only() {
        let d = planted(60, 7);
        let (list, stats) = mine_with(&d, &small_cfg(), 3, &mut |_| false).unwrap();
        assert!(list.rules.is_empty());
        assert_eq!(stats.rejected, 3);
    }
}
