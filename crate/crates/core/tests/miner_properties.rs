use proptest::prelude::*;
use tsarules::dataset::class_counts;
use tsarules::miner::{construct_rule, init_pheromone, mine, prune_rule};
use tsarules::seed::rng_for;
use tsarules::{DiscretizedDataset, Label, MinerConfig, TermSpace};

/// Small random discretized data with a noisy dependence on the first two
/// attributes so the miner has something to find.
fn dataset() -> impl Strategy<Value = DiscretizedDataset> {
    (prop::collection::vec(2usize..5, 2..5), 20usize..80, any::<u64>(), 0.0f64..0.4).prop_map(|(b, n, seed, noise)| {
        use rand::Rng;
        let mut rng = rng_for(seed, &[]);
        let bins: Vec<Vec<u16>> = (0..n)
            .map(|_| b.iter().map(|&bi| rng.gen_range(0..bi as u16)).collect())
            .collect();
        let labels = bins
            .iter()
            .map(|r| {
                let planted = r[0] == 0 || r[1] == 1;
                if planted ^ rng.gen_bool(noise) {
                    Label::Negative
                } else {
                    Label::Positive
                }
            })
            .collect();
        let names = (0..b.len()).map(|i| format!("A{i}")).collect();
        DiscretizedDataset::from_bins(names, b, bins, labels).unwrap()
    })
}

fn small_config(seed: u64) -> MinerConfig {
    MinerConfig {
        n_ants: 20,
        max_iterations: 20,
        seed,
        ..MinerConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pruning_never_hurts(data in dataset(), seed in any::<u64>()) {
        let tau = init_pheromone(&TermSpace::new(data.b.clone()).unwrap());
        let cfg = small_config(seed);
        let mut rng = rng_for(seed, &[1]);
        let rule = construct_rule(&data, &tau, &cfg, &mut rng).unwrap();
        let pruned = prune_rule(&rule, &data).unwrap();
        prop_assert!(pruned.quality >= rule.quality);
        prop_assert!(pruned.antecedent.len() <= rule.antecedent.len());
    }

    #[test]
    fn mining_is_deterministic(data in dataset(), seed in any::<u64>()) {
        let cfg = small_config(seed);
        prop_assert_eq!(mine(&data, &cfg).unwrap(), mine(&data, &cfg).unwrap());
    }

    #[test]
    fn rules_cover_enough_cases(data in dataset(), seed in any::<u64>()) {
        let cfg = small_config(seed);
        let list = mine(&data, &cfg).unwrap();
        let mut remaining: Vec<&Vec<u16>> = data.bins.iter().collect();
        for rule in &list.rules {
            let covered = remaining.iter().filter(|r| rule.matches(r)).count();
            prop_assert_eq!(covered, rule.cover());
            prop_assert!(
                rule.antecedent.is_empty() || covered >= cfg.min_cases_per_rule.min(remaining.len()),
                "rule covers {} of {}", covered, remaining.len()
            );
            remaining.retain(|r| !rule.matches(r));
        }
    }

    #[test]
    fn training_accuracy_beats_majority(data in dataset(), seed in any::<u64>()) {
        let list = mine(&data, &small_config(seed)).unwrap();
        let n = data.n_samples() as f64;
        let acc = list.predictions(&data).iter().zip(&data.labels).filter(|(p, l)| p == l).count() as f64 / n;
        let majority = *class_counts(&data.labels).iter().max().unwrap() as f64 / n;
        prop_assert!(acc >= majority, "acc {} < majority {}", acc, majority);
    }
}
