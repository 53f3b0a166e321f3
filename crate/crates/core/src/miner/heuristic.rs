use serde::{Deserialize, Serialize};

use super::Term;
use crate::dataset::DiscretizedDataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeuristicKind {
    /// Information gain of the term's partition.
    Entropy,
    /// Covered fraction of the remaining cases.
    #[default]
    Density,
}

const CLASSES: f64 = 2.0;

/// `log2(k) - InfoT` for a partition with the given class frequencies.
/// An empty partition scores 0.
pub(crate) fn entropy_value(freq: [usize; 2], ops: &mut u64) -> f64 {
    let size: usize = freq.iter().sum();
    if size == 0 {
        return 0.0;
    }
    let mut info = 0.0;
    for f in freq {
        if f > 0 {
            let p = f as f64 / size as f64;
            info -= p * p.log2();
            *ops += 4;
        }
    }
    *ops += 1;
    CLASSES.log2() - info
}

pub(crate) fn density_value(covered: usize, total: usize, ops: &mut u64) -> f64 {
    *ops += 1;
    covered as f64 / total as f64
}

/// Heuristic values for every term id given per-term class frequencies over
/// the current training cases. Also returns the floating-point operation
/// count spent on the heuristic arithmetic itself (tallies excluded).
pub(crate) fn heuristic_table(kind: HeuristicKind, freq: &[[usize; 2]], total: usize) -> (Vec<f64>, u64) {
    let mut ops = 0u64;
    let eta = match kind {
        HeuristicKind::Entropy => {
            let raw: Vec<f64> = freq.iter().map(|&f| entropy_value(f, &mut ops)).collect();
            // normalization over all terms; empty partitions contribute 0
            let sum: f64 = raw.iter().sum();
            ops += raw.len() as u64;
            if sum > 0.0 {
                ops += raw.len() as u64;
                raw.into_iter().map(|v| v / sum).collect()
            } else {
                raw
            }
        }
        HeuristicKind::Density => freq
            .iter()
            .map(|f| density_value(f[0] + f[1], total, &mut ops))
            .collect(),
    };
    (eta, ops)
}

fn partition_freq(term: Term, data: &DiscretizedDataset) -> [usize; 2] {
    let mut freq = [0usize; 2];
    for (row, label) in data.bins.iter().zip(&data.labels) {
        if term.matches(row) {
            freq[label.index()] += 1;
        }
    }
    freq
}

/// Unnormalized entropy heuristic of `term` over `data`.
pub fn entropy_heuristic(term: Term, data: &DiscretizedDataset) -> f64 {
    entropy_value(partition_freq(term, data), &mut 0)
}

/// `|T_ij| / |Ts|`: fraction of `data` covered by `term`.
pub fn density_heuristic(term: Term, data: &DiscretizedDataset) -> f64 {
    let f = partition_freq(term, data);
    density_value(f[0] + f[1], data.n_samples().max(1), &mut 0)
}
