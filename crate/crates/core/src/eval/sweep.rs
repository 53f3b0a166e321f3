use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cv::{cross_validate, PipelineSpec};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::miner::EvaporationPolicy;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub rho: f64,
    pub n_ants: usize,
    pub acc: f64,
}

/// Cross-validated accuracy over a `(rho, n_ants)` grid, row-major in `rho`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSurface {
    pub rho_grid: Vec<f64>,
    pub ants_grid: Vec<usize>,
    pub cells: Vec<SweepCell>,
}

impl SweepSurface {
    pub fn get(&self, rho_index: usize, ants_index: usize) -> &SweepCell {
        &self.cells[rho_index * self.ants_grid.len() + ants_index]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("rho,n_ants,acc\n");
        for c in &self.cells {
            out.push_str(&format!("{},{},{}\n", c.rho, c.n_ants, c.acc));
        }
        out
    }
}

/// Runs [`cross_validate`] for every grid cell with the same fold seed, so
/// cells differ only in the swept parameters.
pub fn parameter_sweep(
    spec: &PipelineSpec,
    ds: &Dataset,
    rho_grid: &[f64],
    ants_grid: &[usize],
    k: usize,
    seed: u64,
) -> Result<SweepSurface> {
    if rho_grid.is_empty() || ants_grid.is_empty() {
        return Err(Error::InvalidConfig("sweep grids must be nonempty".into()));
    }
    let jobs: Vec<(f64, usize)> = rho_grid
        .iter()
        .flat_map(|&r| ants_grid.iter().map(move |&a| (r, a)))
        .collect();
    let cells = jobs
        .par_iter()
        .map(|&(rho, n_ants)| {
            let mut s = spec.clone();
            s.extraction.miner.n_ants = n_ants;
            s.extraction.miner.evaporation = EvaporationPolicy {
                rho,
                ..s.extraction.miner.evaporation
            };
            let report = cross_validate(&s, ds, k, seed)?;
            Ok(SweepCell {
                rho,
                n_ants,
                acc: report.summary.acc.mean,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepSurface {
        rho_grid: rho_grid.to_vec(),
        ants_grid: ants_grid.to_vec(),
        cells,
    })
}
