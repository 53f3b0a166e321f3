//! Extreme learning machine: a single hidden layer with random input weights
//! and output weights solved as the minimal-norm least-squares solution.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Label, Standardizer};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Sigmoid,
    Tanh,
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Tanh => z.tanh(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElmConfig {
    pub hidden_nodes: usize,
    pub activation: Activation,
    /// Singular values below `rank_tol * sigma_max` are treated as zero.
    pub rank_tol: f64,
}

impl Default for ElmConfig {
    fn default() -> Self {
        ElmConfig {
            hidden_nodes: 50,
            activation: Activation::Sigmoid,
            rank_tol: 1e-10,
        }
    }
}

impl ElmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_nodes == 0 {
            return Err(Error::InvalidConfig("hidden_nodes must be >= 1".into()));
        }
        if !(self.rank_tol >= 0.0 && self.rank_tol < 1.0) {
            return Err(Error::InvalidConfig("rank_tol must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Trained network. Field names follow the JSON model format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElmModel {
    /// Hidden input weights, `L` rows of length `n`.
    #[serde(rename = "W")]
    pub w: Vec<Vec<f64>>,
    /// Hidden thresholds, length `L`.
    pub d: Vec<f64>,
    /// Output weights, `L` rows of length `m`.
    pub beta: Vec<Vec<f64>>,
    pub activation: Activation,
    #[serde(rename = "L")]
    pub hidden_nodes: usize,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    /// Preprocessing the model expects its inputs to have passed through.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preprocessing: Option<Standardizer>,
}

impl ElmModel {
    /// Draws `W` and `d` uniformly on `[-1, 1]`; `beta` starts at zero.
    pub fn random(n: usize, hidden_nodes: usize, activation: Activation, seed: u64) -> Self {
        let mut rng = seed::rng(seed);
        let w = (0..hidden_nodes)
            .map(|_| (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect())
            .collect();
        let d = (0..hidden_nodes).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        ElmModel {
            w,
            d,
            beta: vec![vec![0.0]; hidden_nodes],
            activation,
            hidden_nodes,
            n,
            m: 1,
            seed,
            preprocessing: None,
        }
    }

    /// Checks shapes and finiteness, e.g. after loading from JSON.
    pub fn validate(&self) -> Result<()> {
        let l = self.hidden_nodes;
        let shape_ok = self.w.len() == l
            && self.d.len() == l
            && self.beta.len() == l
            && self.w.iter().all(|r| r.len() == self.n)
            && self.beta.iter().all(|r| r.len() == self.m);
        if !shape_ok {
            return Err(Error::InvalidConfig("ELM model shapes are inconsistent".into()));
        }
        if self.beta.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("output weights"));
        }
        Ok(())
    }

    fn hidden_row(&self, x: &[f64]) -> Vec<f64> {
        self.w
            .iter()
            .zip(&self.d)
            .map(|(wi, di)| {
                let z: f64 = wi.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + di;
                self.activation.apply(z)
            })
            .collect()
    }

    /// Real-valued output of the first output node.
    pub fn decision(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: x.len(),
            });
        }
        Ok(self
            .hidden_row(x)
            .iter()
            .zip(&self.beta)
            .map(|(h, b)| h * b[0])
            .sum())
    }

    /// `+1` iff the decision score is strictly positive.
    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        self.decision(x).map(Label::from_score)
    }

    pub fn decisions(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        rows.iter().map(|r| self.decision(r)).collect()
    }

    pub fn predictions(&self, rows: &[Vec<f64>]) -> Result<Vec<Label>> {
        rows.iter().map(|r| self.predict(r)).collect()
    }
}

/// `H[j][i] = G(w_i . x_j + d_i)`.
pub fn hidden_matrix(model: &ElmModel, rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let mut h = DMatrix::zeros(rows.len(), model.hidden_nodes);
    for (j, x) in rows.iter().enumerate() {
        if x.len() != model.n {
            return Err(Error::DimensionMismatch {
                expected: model.n,
                found: x.len(),
            });
        }
        for (i, v) in model.hidden_row(x).into_iter().enumerate() {
            h[(j, i)] = v;
        }
    }
    Ok(h)
}

/// Minimal-norm least-squares solution `H^+ Y` through a thin SVD.
pub fn min_norm_lstsq(h: &DMatrix<f64>, y: &DMatrix<f64>, rank_tol: f64) -> Result<DMatrix<f64>> {
    if h.nrows() != y.nrows() {
        return Err(Error::DimensionMismatch {
            expected: h.nrows(),
            found: y.nrows(),
        });
    }
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("hidden layer matrix"));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("targets"));
    }
    if h.is_empty() {
        return Ok(DMatrix::zeros(h.ncols(), y.ncols()));
    }
    let svd = h.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let s = &svd.singular_values;
    let cutoff = rank_tol * s.max();
    let inv: DVector<f64> = s.map(|x| if x > cutoff && x > 0.0 { 1.0 / x } else { 0.0 });
    // beta = V * diag(inv) * U^T * Y
    let mut uty = u.transpose() * y;
    for (mut row, &k) in uty.row_iter_mut().zip(inv.iter()) {
        row *= k;
    }
    let beta = v_t.transpose() * uty;
    if beta.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("output weights"));
    }
    Ok(beta)
}

/// Trains on a standardized dataset with targets `y = label as real`.
pub fn train(ds: &Dataset, cfg: &ElmConfig, seed: u64) -> Result<ElmModel> {
    cfg.validate()?;
    let mut model = ElmModel::random(ds.n_features(), cfg.hidden_nodes, cfg.activation, seed);
    let h = hidden_matrix(&model, ds.rows())?;
    let y = DMatrix::from_iterator(ds.n_samples(), 1, ds.labels().iter().map(|l| l.as_f64()));
    let beta = min_norm_lstsq(&h, &y, cfg.rank_tol)?;
    model.beta = beta.row_iter().map(|r| r.iter().copied().collect()).collect();
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn mat(rows: &[&[f64]]) -> DMatrix<f64> {
        DMatrix::from_row_iterator(rows.len(), rows[0].len(), rows.iter().flat_map(|r| r.iter().copied()))
    }

    #[test]
    fn hidden_matrix_examples() {
        let mut m = ElmModel::random(3, 4, Activation::Sigmoid, 0);
        m.w = vec![vec![0.0; 3]; 4];
        m.d = vec![0.0; 4];
        let h = hidden_matrix(&m, &[vec![1.0, 2.0, 3.0], vec![-5.0, 0.0, 9.0]]).unwrap();
        assert!(h.iter().all(|&v| v == 0.5));

        let mut t = ElmModel::random(2, 1, Activation::Tanh, 0);
        t.w = vec![vec![1.0, -1.0]];
        t.d = vec![0.0];
        let h = hidden_matrix(&t, &[vec![0.3, 0.3]]).unwrap();
        assert_eq!(h[(0, 0)], 0.0);

        let r = ElmModel::random(2, 8, Activation::Sigmoid, 3);
        let h = hidden_matrix(&r, &[vec![8.0, -8.0], vec![0.1, 0.2]]).unwrap();
        assert!(h.iter().all(|&v| v > 0.0 && v < 1.0));

        assert!(matches!(
            hidden_matrix(&r, &[vec![1.0]]),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn lstsq_examples() {
        let b = min_norm_lstsq(&mat(&[&[1.0, 0.0], &[0.0, 1.0]]), &mat(&[&[1.0], &[-1.0]]), 1e-10).unwrap();
        assert_abs_diff_eq!(b[(0, 0)], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b[(1, 0)], -1.0, epsilon = 1e-14);

        let b = min_norm_lstsq(&mat(&[&[1.0], &[1.0]]), &mat(&[&[1.0], &[3.0]]), 1e-10).unwrap();
        assert_abs_diff_eq!(b[(0, 0)], 2.0, epsilon = 1e-14);

        let b = min_norm_lstsq(&mat(&[&[1.0, 1.0], &[1.0, 1.0]]), &mat(&[&[2.0], &[2.0]]), 1e-10).unwrap();
        assert_abs_diff_eq!(b[(0, 0)], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b[(1, 0)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn lstsq_rejects_non_finite() {
        let r = min_norm_lstsq(&mat(&[&[f64::NAN]]), &mat(&[&[1.0]]), 1e-10);
        assert!(matches!(r, Err(Error::NonFinite(_))));
        let r = min_norm_lstsq(&mat(&[&[1.0]]), &mat(&[&[f64::INFINITY]]), 1e-10);
        assert!(matches!(r, Err(Error::NonFinite(_))));
    }

    #[test]
    fn predict_sign_rule() {
        assert_eq!(Label::from_score(0.7), Label::Positive);
        assert_eq!(Label::from_score(-0.2), Label::Negative);
        assert_eq!(Label::from_score(0.0), Label::Negative);
    }

    #[test]
    fn zero_beta_scores_zero() {
        let m = ElmModel::random(2, 5, Activation::Sigmoid, 1);
        assert_eq!(m.decision(&[0.4, -0.3]).unwrap(), 0.0);
        assert_eq!(m.predict(&[0.4, -0.3]).unwrap(), Label::Negative);
    }

    #[test]
    fn json_uses_documented_keys() {
        let m = ElmModel::random(2, 3, Activation::Tanh, 9);
        let v = serde_json::to_value(&m).unwrap();
        for key in ["W", "d", "beta", "activation", "L", "seed"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        let back: ElmModel = serde_json::from_value(v).unwrap();
        assert_eq!(back, m);
    }
}
