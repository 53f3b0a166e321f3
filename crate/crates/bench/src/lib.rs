//! Synthetic workloads shared by the benchmarks and the acceptance suite.

use rand::Rng;
use tsarules::dataset::zscore_fit_apply;
use tsarules::seed::rng_for;
use tsarules::{elm, Dataset, DiscretizedDataset, ElmConfig, ElmModel, Label};

/// `n` rows of 4 nominal attributes with 3 values each, labeled `-1` iff
/// `A0 = 2 and A1 = 0`.
pub fn planted_rule_data(n: usize, seed: u64) -> DiscretizedDataset {
    let mut rng = rng_for(seed, &[0]);
    let bins: Vec<Vec<u16>> = (0..n)
        .map(|_| (0..4).map(|_| rng.gen_range(0..3u16)).collect())
        .collect();
    let labels = bins
        .iter()
        .map(|r| if r[0] == 2 && r[1] == 0 { Label::Negative } else { Label::Positive })
        .collect();
    DiscretizedDataset::from_bins((0..4).map(|i| format!("A{i}")).collect(), vec![3; 4], bins, labels)
        .expect("valid bins")
}

/// Three uniform features on `[0, 6)`; `-1` iff the first is at least 4,
/// i.e. a one-term rule over its third 2-wide bin and above.
pub fn threshold_data(n: usize, seed: u64) -> Dataset {
    let mut rng = rng_for(seed, &[1]);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..3).map(|_| rng.gen_range(0.0..6.0)).collect())
        .collect();
    let labels = rows
        .iter()
        .map(|r| if r[0] >= 4.0 { Label::Negative } else { Label::Positive })
        .collect();
    Dataset::new(vec!["a".into(), "b".into(), "c".into()], rows, labels).expect("valid rows")
}

/// An ELM fitted to [`threshold_data`] labels, with the standardized training
/// set it saw. 5000 samples and 200 hidden nodes make the network a sharp
/// step along the first feature.
pub fn rule_generated_elm(seed: u64) -> (ElmModel, Dataset) {
    let (train, standardizer) = zscore_fit_apply(&threshold_data(5000, seed)).expect("nonconstant data");
    let cfg = ElmConfig {
        hidden_nodes: 200,
        ..ElmConfig::default()
    };
    let mut model = elm::train(&train, &cfg, seed).expect("training succeeds");
    model.preprocessing = Some(standardizer);
    (model, train)
}
