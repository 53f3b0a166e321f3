use serde::{Deserialize, Serialize};

use super::{Term, TermSpace};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvaporationMode {
    Fixed,
    #[default]
    Adaptive,
}

/// Evaporation rate `rho`. In adaptive mode the retention factor `1 - rho`
/// shrinks by 5% per iteration and is clipped at `rho_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaporationPolicy {
    pub mode: EvaporationMode,
    pub rho: f64,
    pub rho_min: f64,
}

impl Default for EvaporationPolicy {
    fn default() -> Self {
        EvaporationPolicy {
            mode: EvaporationMode::Adaptive,
            rho: 0.85,
            rho_min: 0.05,
        }
    }
}

impl EvaporationPolicy {
    pub fn fixed(rho: f64) -> Self {
        EvaporationPolicy {
            mode: EvaporationMode::Fixed,
            rho,
            ..Default::default()
        }
    }

    pub fn retention(&self) -> f64 {
        1.0 - self.rho
    }

    pub fn validate(&self) -> Result<()> {
        let in_unit = |v: f64| v > 0.0 && v < 1.0;
        if !in_unit(self.rho) || !in_unit(self.rho_min) {
            return Err(Error::InvalidConfig(format!(
                "rho ({}) and rho_min ({}) must lie in (0, 1)",
                self.rho, self.rho_min
            )));
        }
        if self.mode == EvaporationMode::Adaptive && self.retention() < self.rho_min {
            return Err(Error::InvalidConfig(format!(
                "adaptive evaporation needs 1 - rho >= rho_min, got {} < {}",
                self.retention(),
                self.rho_min
            )));
        }
        Ok(())
    }
}

/// One adaptive step: `1 - rho <- max-clip(0.95 (1 - rho), rho_min)`.
/// Fixed policies are returned unchanged.
pub fn adapt_evaporation(policy: EvaporationPolicy) -> EvaporationPolicy {
    if policy.mode == EvaporationMode::Fixed {
        return policy;
    }
    let shrunk = 0.95 * policy.retention();
    let retention = if shrunk >= policy.rho_min {
        shrunk
    } else {
        policy.rho_min
    };
    EvaporationPolicy {
        rho: 1.0 - retention,
        ..policy
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PheromoneTable {
    space: TermSpace,
    tau: Vec<f64>,
    t: usize,
}

/// Uniform start `tau = 1 / sum(b_i)`.
pub fn init_pheromone(space: &TermSpace) -> PheromoneTable {
    let total = space.total_terms();
    PheromoneTable {
        space: space.clone(),
        tau: vec![1.0 / total as f64; total],
        t: 0,
    }
}

impl PheromoneTable {
    pub fn space(&self) -> &TermSpace {
        &self.space
    }

    pub fn levels(&self) -> &[f64] {
        &self.tau
    }

    pub fn get(&self, term: Term) -> f64 {
        self.tau[self.space.id(term)]
    }

    pub fn set(&mut self, term: Term, value: f64) {
        let id = self.space.id(term);
        self.tau[id] = value;
    }

    pub fn iteration(&self) -> usize {
        self.t
    }

    /// Evaporates every term by `1 - rho` and reinforces the terms on `path`
    /// by `Q / (1 + Q)` of their current level. Levels are not renormalized.
    pub fn update(&mut self, path: &[Term], quality: f64, policy: &EvaporationPolicy) {
        let keep = policy.retention();
        let reinforce = quality / (1.0 + quality);
        let mut on_path = vec![false; self.tau.len()];
        for &t in path {
            on_path[self.space.id(t)] = true;
        }
        for (tau, &on) in self.tau.iter_mut().zip(&on_path) {
            let next = if on {
                keep * *tau + reinforce * *tau
            } else {
                keep * *tau
            };
            // positive floor so long runs cannot underflow to zero
            *tau = next.max(f64::MIN_POSITIVE);
        }
        self.t += 1;
    }

    pub fn normalize(&mut self) {
        let sum: f64 = self.tau.iter().sum();
        for tau in &mut self.tau {
            *tau /= sum;
        }
    }
}

/// `P_ij = tau_ij eta_ij / sum_eligible(tau eta)`, zero outside `eligible`.
///
/// `eta` and the result are indexed by term id.
pub fn term_probability(tau: &PheromoneTable, eta: &[f64], eligible: &[usize]) -> Result<Vec<f64>> {
    let mut p = vec![0.0; tau.tau.len()];
    let mut total = 0.0;
    for &id in eligible {
        let w = tau.tau[id] * eta[id];
        p[id] = w;
        total += w;
    }
    if eligible.is_empty() || total.is_nan() || total <= 0.0 {
        return Err(Error::NoEligibleTerm);
    }
    for &id in eligible {
        p[id] /= total;
    }
    Ok(p)
}
