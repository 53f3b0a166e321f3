use nalgebra::DMatrix;
use rand::Rng;
use tsarules::elm::{hidden_matrix, min_norm_lstsq, train};
use tsarules::seed::rng_for;
use tsarules::{Activation, Dataset, ElmConfig, ElmModel, Label};

fn random_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = rng_for(seed, &[77]);
    DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

fn inputs(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng_for(seed, &[5]);
    (0..n).map(|_| (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect()
}

/// Ridge solution from the normal equations, solved by Cholesky.
fn ridge(h: &DMatrix<f64>, y: &DMatrix<f64>, lambda: f64) -> DMatrix<f64> {
    let a = h.transpose() * h + DMatrix::identity(h.ncols(), h.ncols()) * lambda;
    a.cholesky().expect("ridge system is SPD").solve(&(h.transpose() * y))
}

#[test]
fn interpolates_square_systems() {
    let mut failures = Vec::new();
    for seed in 0..100u64 {
        let rows = inputs(10, 10, seed);
        let model = ElmModel::random(10, 10, Activation::Sigmoid, seed);
        let h = hidden_matrix(&model, &rows).unwrap();
        let y = random_matrix(10, 1, seed);
        let beta = min_norm_lstsq(&h, &y, 1e-10).unwrap();
        let r = &h * &beta - &y;
        let rmse = (r.norm_squared() / 10.0).sqrt();
        if rmse > 1e-6 {
            failures.push((seed, rmse));
        }
    }
    assert!(failures.len() <= 1, "{failures:?}");
}

#[test]
fn trained_residual_is_orthogonal_to_hidden_columns() {
    for seed in 0..10u64 {
        let rows = inputs(200, 4, seed);
        let labels = rows
            .iter()
            .map(|r| if r[0] * r[1] > 0.2 { Label::Positive } else { Label::Negative })
            .collect();
        let ds = Dataset::new((0..4).map(|i| format!("x{i}")).collect(), rows, labels).unwrap();
        let model = train(&ds, &ElmConfig::default(), seed).unwrap();
        let h = hidden_matrix(&model, ds.rows()).unwrap();
        let beta = DMatrix::from_iterator(model.hidden_nodes, 1, model.beta.iter().map(|b| b[0]));
        let y = DMatrix::from_iterator(200, 1, ds.labels().iter().map(|l| l.as_f64()));
        let g = h.transpose() * (&h * beta - y);
        assert!(g.amax() <= 1e-8, "seed {seed}: {}", g.amax());
    }
}

#[test]
fn least_norm_among_exact_solutions() {
    for seed in 0..20u64 {
        let h = random_matrix(12, 30, seed);
        let x0 = random_matrix(30, 1, seed + 1000);
        let y = &h * x0;
        let beta = min_norm_lstsq(&h, &y, 1e-10).unwrap();
        assert!((&h * &beta - &y).amax() < 1e-10);

        // Oracle: H^T (H H^T)^-1 Y.
        let direct = h.transpose() * (&h * h.transpose()).cholesky().unwrap().solve(&y);
        assert!((&beta - &direct).amax() < 1e-9);

        // Adding any null-space component grows the norm.
        let z = random_matrix(30, 1, seed + 2000);
        let pinv = h.clone().pseudo_inverse(1e-12).unwrap();
        let null = &z - &pinv * (&h * &z);
        assert!((&h * &null).amax() < 1e-10);
        assert!(beta.norm() < (&beta + &null).norm());
    }
}

#[test]
fn ridge_oracle_converges_to_min_norm() {
    for seed in 0..20u64 {
        let h = random_matrix(12, 30, seed);
        let y = &h * random_matrix(30, 1, seed + 1000);
        let beta = min_norm_lstsq(&h, &y, 1e-10).unwrap();
        let mut prev_gap = f64::INFINITY;
        for lambda in [1e-2, 1e-4, 1e-6] {
            let r = ridge(&h, &y, lambda);
            // Shrinkage: the ridge norm sits at or below the min-norm solution.
            assert!(r.norm() <= beta.norm() + 1e-12);
            let gap = (&r - &beta).norm();
            assert!(gap < prev_gap);
            prev_gap = gap;
        }
        assert!(prev_gap < 1e-4);
    }
}

#[test]
fn training_is_deterministic_and_constant_labels_fit() {
    let rows = inputs(60, 3, 4);
    let ds = Dataset::new(vec!["a".into(), "b".into(), "c".into()], rows, vec![Label::Positive; 60]).unwrap();
    let a = train(&ds, &ElmConfig::default(), 11).unwrap();
    let b = train(&ds, &ElmConfig::default(), 11).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    for s in a.decisions(ds.rows()).unwrap() {
        assert!((s - 1.0).abs() < 1e-4, "{s}");
    }
}
