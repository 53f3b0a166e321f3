use criterion::{criterion_group, criterion_main, Criterion};
use tsarules::extraction::extract;
use tsarules::miner::mine;
use tsarules::swinggen::{generate_dataset, Fixture, GeneratorConfig};
use tsarules::{ExtractionConfig, HeuristicKind, MinerConfig, SamplingConfig};
use tsarules_bench::{planted_rule_data, rule_generated_elm};

fn miner(c: &mut Criterion) {
    let data = planted_rule_data(200, 0);
    let mut g = c.benchmark_group("mine_planted_200");
    for (name, heuristic) in [("density", HeuristicKind::Density), ("entropy", HeuristicKind::Entropy)] {
        let cfg = MinerConfig {
            heuristic,
            n_ants: 100,
            ..MinerConfig::default()
        };
        g.bench_function(name, |b| b.iter(|| mine(&data, &cfg).unwrap()));
    }
    g.finish();
}

fn extraction(c: &mut Criterion) {
    let (model, train) = rule_generated_elm(0);
    let cfg = ExtractionConfig {
        n_examples: Some(2000),
        probe_size: Some(1000),
        miner: MinerConfig {
            n_ants: 100,
            ..MinerConfig::default()
        },
        ..ExtractionConfig::default()
    };
    let sampling = SamplingConfig::from_training(&train, &cfg, 1);
    let mut g = c.benchmark_group("extract");
    g.sample_size(10);
    g.bench_function("threshold_elm", |b| b.iter(|| extract(&model, &train, &sampling, &cfg).unwrap()));
    g.finish();
}

fn simulation(c: &mut Criterion) {
    let fixture = Fixture::bundled();
    let cfg = GeneratorConfig {
        n_samples: 50,
        ..GeneratorConfig::default()
    };
    let mut g = c.benchmark_group("swinggen");
    g.sample_size(10);
    g.bench_function("generate_50", |b| b.iter(|| generate_dataset(&fixture, &cfg, 3).unwrap()));
    g.finish();
}

criterion_group!(benches, miner, extraction, simulation);
criterion_main!(benches);
