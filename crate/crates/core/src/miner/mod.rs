//! Ant-colony induction of ordered classification rule lists.
//!
//! Classic Ant-Miner uses the entropy heuristic with a fixed evaporation rate.
//! The improved variant swaps in the coverage-density heuristic and shrinks the
//! retention factor `1 - rho` geometrically after every iteration. Both are
//! selected through [`MinerConfig`].

mod bits;
mod colony;
mod heuristic;
mod pheromone;
mod rules;

pub use colony::{construct_rule, mine, mine_with, prune_rule, rule_quality, MineStats};
pub use heuristic::{density_heuristic, entropy_heuristic, HeuristicKind};
pub use pheromone::{
    adapt_evaporation, init_pheromone, term_probability, EvaporationMode, EvaporationPolicy,
    PheromoneTable,
};
pub use rules::{classify, rule_score, Rule, RuleFormatter, RuleList};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Condition `A_attribute = V_value` over a binned attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Term {
    pub attribute: usize,
    pub value: u16,
}

impl Term {
    pub fn new(attribute: usize, value: u16) -> Self {
        Term { attribute, value }
    }

    pub fn matches(&self, row: &[u16]) -> bool {
        row[self.attribute] == self.value
    }
}

/// Enumerated universe of terms; term ids are laid out attribute-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermSpace {
    b: Vec<usize>,
    offsets: Vec<usize>,
}

impl TermSpace {
    pub fn new(b: Vec<usize>) -> Result<Self> {
        if b.is_empty() || b.contains(&0) {
            return Err(Error::InvalidConfig(
                "term space needs at least one attribute and every b_i >= 1".into(),
            ));
        }
        let offsets = b
            .iter()
            .scan(0, |acc, &bi| {
                let o = *acc;
                *acc += bi;
                Some(o)
            })
            .collect();
        Ok(TermSpace { b, offsets })
    }

    pub fn attributes(&self) -> usize {
        self.b.len()
    }

    pub fn values(&self, attribute: usize) -> usize {
        self.b[attribute]
    }

    pub fn total_terms(&self) -> usize {
        self.b.iter().sum()
    }

    pub fn id(&self, term: Term) -> usize {
        self.offsets[term.attribute] + usize::from(term.value)
    }

    pub fn term(&self, id: usize) -> Term {
        let attribute = self.offsets.partition_point(|&o| o <= id) - 1;
        Term::new(attribute, (id - self.offsets[attribute]) as u16)
    }

    pub fn terms(&self) -> impl Iterator<Item = Term> + '_ {
        (0..self.total_terms()).map(|id| self.term(id))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MinerConfig {
    pub n_ants: usize,
    /// Covering stops once this many cases or fewer remain.
    pub max_uncovered: usize,
    pub min_cases_per_rule: usize,
    pub max_iterations: usize,
    /// Identical iteration-best rules in a row that end a covering round.
    pub convergence_window: usize,
    pub heuristic: HeuristicKind,
    pub evaporation: EvaporationPolicy,
    /// Rescale pheromone to sum to one after every update.
    pub normalize_pheromone: bool,
    /// Reset pheromone and evaporation at the start of every covering round.
    pub reinit_pheromone: bool,
    pub seed: u64,
}

impl Default for MinerConfig {
    fn default() -> Self {
        MinerConfig {
            n_ants: 400,
            max_uncovered: 10,
            min_cases_per_rule: 5,
            max_iterations: 100,
            convergence_window: 10,
            heuristic: HeuristicKind::Density,
            evaporation: EvaporationPolicy::default(),
            normalize_pheromone: false,
            reinit_pheromone: true,
            seed: 0,
        }
    }
}

impl MinerConfig {
    /// Original Ant-Miner: entropy heuristic and a fixed evaporation rate.
    pub fn classic() -> Self {
        MinerConfig {
            heuristic: HeuristicKind::Entropy,
            evaporation: EvaporationPolicy {
                mode: EvaporationMode::Fixed,
                ..EvaporationPolicy::default()
            },
            ..MinerConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("n_ants", self.n_ants),
            ("min_cases_per_rule", self.min_cases_per_rule),
            ("max_iterations", self.max_iterations),
            ("convergence_window", self.convergence_window),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::InvalidConfig(format!("{name} must be positive")));
        }
        self.evaporation.validate()
    }
}
