//! Acceptance criteria 1-9. Runs every criterion, prints one PASS/FAIL line
//! each and exits nonzero when any fails. Pass criterion numbers as
//! arguments to run a subset, e.g. `cargo test --test acceptance -- 3 7`.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode, Output};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::Rng;
use tsarules::dataset::{stratified_kfold, zscore_fit_apply};
use tsarules::elm::{hidden_matrix, min_norm_lstsq};
use tsarules::eval::{composite_eta, cross_validate, roc_auc, PipelineSpec};
use tsarules::extraction::extract;
use tsarules::miner::{adapt_evaporation, init_pheromone, mine, mine_with, rule_quality, MineStats};
use tsarules::seed::{self, rng_for};
use tsarules::swinggen::{
    equilibrium, generate_dataset, label, simulate, simulate_from, Fixture, GeneratorConfig, Scenario,
    StabilityCriterion,
};
use tsarules::{
    elm, Activation, ConfusionCounts, Dataset, DiscretizedDataset, ElmConfig, ElmModel, EvaporationMode,
    EvaporationPolicy, ExtractionConfig, HeuristicKind, Label, MinerConfig, SamplingConfig, Term, TermSpace,
};
use tsarules_bench::{planted_rule_data, rule_generated_elm, threshold_data};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// The default 2000-sample swinggen dataset, generated once.
fn swing_dataset() -> &'static Dataset {
    static DS: OnceLock<Dataset> = OnceLock::new();
    DS.get_or_init(|| {
        generate_dataset(&Fixture::bundled(), &GeneratorConfig::default(), seed::derive(0, "gen"))
            .expect("default generation succeeds")
            .dataset
    })
}

// 1. Arithmetic anchors.
fn criterion_1() -> Outcome {
    let eta = composite_eta(0.9710, 0.9424, 0.9794);
    let mut notes = vec![format!("eta = {eta:.6}")];
    let mut ok = (eta - 0.9643).abs() <= 1e-4;

    let space = TermSpace::new(vec![3, 2]).unwrap();
    let on = Term::new(0, 0);
    let off = Term::new(1, 1);
    let policy = EvaporationPolicy::fixed(0.15);
    for (q, expect_on) in [(0.72, 0.85 * 0.2 + 0.72 / 1.72 * 0.2), (0.0, 0.17)] {
        let mut tau = init_pheromone(&space);
        tau.update(&[on], q, &policy);
        let (a, b) = (tau.get(on), tau.get(off));
        ok &= (a - expect_on).abs() <= 1e-12 && (b - 0.17).abs() <= 1e-12;
        notes.push(format!("Q={q}: on {a:.10}, off {b:.10}"));
    }
    ok &= (0.85 * 0.2 + 0.72 / 1.72 * 0.2 - 0.253_720_930_232_558_1_f64).abs() <= 1e-12;

    for (retention, expect) in [(0.15, 0.1425), (0.05, 0.05), (0.052, 0.05)] {
        let p = adapt_evaporation(EvaporationPolicy {
            mode: EvaporationMode::Adaptive,
            rho: 1.0 - retention,
            rho_min: 0.05,
        });
        let got = p.retention();
        ok &= (got - expect).abs() <= 1e-12;
        notes.push(format!("1-rho {retention} -> {got:.6}"));
    }
    check(ok, notes.join("; "))
}

// 2. ELM properties.
fn random_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = rng_for(seed, &[77]);
    DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

fn criterion_2() -> Outcome {
    let mut notes = Vec::new();

    let mut misses = 0;
    for s in 0..100u64 {
        let mut rng = rng_for(s, &[5]);
        let rows: Vec<Vec<f64>> = (0..10).map(|_| (0..10).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let model = ElmModel::random(10, 10, Activation::Sigmoid, s);
        let h = hidden_matrix(&model, &rows).unwrap();
        let y = random_matrix(10, 1, s);
        let beta = min_norm_lstsq(&h, &y, 1e-10).unwrap();
        let rmse = ((&h * &beta - &y).norm_squared() / 10.0).sqrt();
        if rmse > 1e-6 {
            misses += 1;
        }
    }
    let interp = misses <= 1;
    notes.push(format!("interpolation misses {misses}/100"));

    let (train, _) = zscore_fit_apply(&threshold_data(400, 2)).unwrap();
    let model = elm::train(&train, &ElmConfig::default(), 3).unwrap();
    let h = hidden_matrix(&model, train.rows()).unwrap();
    let beta = DMatrix::from_iterator(model.hidden_nodes, 1, model.beta.iter().map(|b| b[0]));
    let y = DMatrix::from_iterator(train.n_samples(), 1, train.labels().iter().map(|l| l.as_f64()));
    let grad = (h.transpose() * (&h * beta - y)).amax();
    let orth = grad <= 1e-8;
    notes.push(format!("max |H^T r| = {grad:.2e}"));

    // Ridge oracle from the normal equations, compared literally.
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut exact_min_norm = true;
    for s in 0..20u64 {
        let h = random_matrix(12, 30, s);
        let y = &h * random_matrix(30, 1, s + 1000);
        let b = min_norm_lstsq(&h, &y, 1e-10).unwrap();
        let direct = h.transpose() * (&h * h.transpose()).cholesky().unwrap().solve(&y);
        exact_min_norm &= (&b - &direct).amax() < 1e-9;
        for lambda in [1e-2, 1e-4] {
            let a = h.transpose() * &h + DMatrix::identity(30, 30) * lambda;
            let ridge = a.cholesky().unwrap().solve(&(h.transpose() * &y));
            worst = worst.max(b.norm() - ridge.norm());
        }
    }
    let dominance = worst <= 1e-9;
    notes.push(format!(
        "beta equals H^T(HH^T)^-1 Y: {exact_min_norm}; max(|b_svd| - |b_ridge|) = {worst:.3e} (needs <= 1e-9)"
    ));
    check(interp && orth && dominance && exact_min_norm, notes.join("; "))
}

// 3. Miner vs exhaustive enumeration.
fn counts_for(terms: &[(usize, u16)], class: Label, data: &DiscretizedDataset) -> ConfusionCounts {
    let mut c = ConfusionCounts { tp: 0, fp: 0, fn_: 0, tn: 0 };
    for (row, &l) in data.bins.iter().zip(&data.labels) {
        let covered = terms.iter().all(|&(a, v)| row[a] == v);
        match (covered, l == class) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    c
}

fn q_oracle(c: &ConfusionCounts) -> f64 {
    if c.tp + c.fn_ == 0 || c.tn + c.fp == 0 {
        return 0.0;
    }
    (c.tp as f64 / (c.tp + c.fn_) as f64) * (c.tn as f64 / (c.tn + c.fp) as f64)
}

fn criterion_3() -> Outcome {
    let data = planted_rule_data(200, 0);
    let mut best = 0.0f64;
    for a in 0..4 {
        for v in 0..3u16 {
            let mut candidates = vec![vec![(a, v)]];
            for b in a + 1..4 {
                for w in 0..3u16 {
                    candidates.push(vec![(a, v), (b, w)]);
                }
            }
            for t in &candidates {
                for class in [Label::Negative, Label::Positive] {
                    best = best.max(q_oracle(&counts_for(t, class, &data)));
                }
            }
        }
    }
    let start = Instant::now();
    let list = mine(&data, &MinerConfig::default()).unwrap();
    let took = start.elapsed();
    let first = &list.rules[0];
    let terms: Vec<(usize, u16)> = first.antecedent.iter().map(|t| (t.attribute, t.value)).collect();
    let q = q_oracle(&counts_for(&terms, first.consequent, &data));
    let train_acc = list.predictions(&data).iter().zip(&data.labels).filter(|(a, b)| a == b).count() as f64 / 200.0;
    let ok = (q - best).abs() <= 1e-12
        && (first.quality - rule_quality(&first.counts)).abs() <= 1e-12
        && train_acc == 1.0
        && took < Duration::from_secs(60);
    check(
        ok,
        format!(
            "exhaustive max Q {best}, first rule Q {q} ({} terms), training acc {train_acc}, {:.2}s with 400 ants",
            terms.len(),
            took.as_secs_f64()
        ),
    )
}

// 4. Density heuristic vs entropy heuristic.
fn cv_accuracy(data: &DiscretizedDataset, cfg: &MinerConfig) -> f64 {
    let folds = stratified_kfold(&data.labels, 5, 11).unwrap();
    let mut correct = 0;
    for (i, f) in folds.iter().enumerate() {
        let train = data.subset(&f.train);
        let val = data.subset(&f.validation);
        let list = mine(&train, &MinerConfig { seed: i as u64, ..*cfg }).unwrap();
        correct += list.predictions(&val).iter().zip(&val.labels).filter(|(a, b)| a == b).count();
    }
    correct as f64 / data.n_samples() as f64
}

fn criterion_4() -> Outcome {
    let data = planted_rule_data(200, 0);
    let iam = MinerConfig::default();
    let classic = MinerConfig {
        heuristic: HeuristicKind::Entropy,
        ..MinerConfig::default()
    };
    let (a_iam, a_classic) = (cv_accuracy(&data, &iam), cv_accuracy(&data, &classic));
    let per_iter = |cfg: &MinerConfig| {
        let (_, s): (_, MineStats) = mine_with(&data, cfg, usize::MAX, &mut |_| true).unwrap();
        s.heuristic_ops as f64 / s.iterations as f64
    };
    let (ops_iam, ops_classic) = (per_iter(&iam), per_iter(&classic));
    check(
        (a_iam - a_classic).abs() <= 0.02 && ops_iam < ops_classic,
        format!(
            "CV acc density {a_iam:.4} vs entropy {a_classic:.4}; heuristic ops/iteration {ops_iam:.0} vs {ops_classic:.0}"
        ),
    )
}

// 5. Extraction fidelity.
fn criterion_5() -> Outcome {
    // ELM fitted to labels of the rule "a >= 4 -> -1" on uniform inputs.
    let (model, train) = rule_generated_elm(0);
    let cfg = ExtractionConfig::default();
    let r = extract(&model, &train, &SamplingConfig::from_training(&train, &cfg, 1), &cfg).unwrap();
    let rule_fid = r.fidelity;

    let (train, _) = zscore_fit_apply(swing_dataset()).unwrap();
    let model = elm::train(&train, &ElmConfig::default(), seed::derive(0, "train")).unwrap();
    let s = seed::derive(0, "extract");
    let mut cfg = ExtractionConfig::default();
    cfg.miner.seed = seed::mix(s, &[3]);
    let r = extract(&model, &train, &SamplingConfig::from_training(&train, &cfg, s), &cfg).unwrap();
    check(
        rule_fid >= 0.99 && r.fidelity >= 0.90,
        format!(
            "rule-generated ELM fidelity {rule_fid:.4} (>= 0.99); swinggen ELM fidelity {:.4} (>= 0.90), {} rules",
            r.fidelity, r.n_rules
        ),
    )
}

// 6. Metrics.
fn criterion_6() -> Outcome {
    let labels = [Label::Negative, Label::Negative, Label::Positive, Label::Positive, Label::Positive];
    let separated = roc_auc(&[-2.0, -1.0, 0.5, 1.0, 3.0], &labels).unwrap().auc;
    let constant = roc_auc(&[0.3; 5], &labels).unwrap().auc;

    let mut rng = rng_for(4, &[]);
    let n = 300;
    let labels: Vec<Label> = (0..n).map(|i| if i % 3 == 0 { Label::Negative } else { Label::Positive }).collect();
    let scores: Vec<f64> = labels.iter().map(|l| l.as_f64() * 0.4 + rng.gen_range(-1.0..1.0)).collect();
    let base = roc_auc(&scores, &labels).unwrap().auc;
    let transformed: Vec<f64> = scores.iter().map(|s| (2.0 * s).exp() + s.powi(3) + 5.0).collect();
    let moved = roc_auc(&transformed, &labels).unwrap().auc;

    let mut spec = PipelineSpec::default();
    spec.extraction.miner.n_ants = 50;
    let report = cross_validate(&spec, &threshold_data(300, 5), 5, 1).unwrap();
    let cols = report.summary.columns();
    let names: Vec<&str> = cols.iter().map(|c| c.0).collect();
    let complete = cols.iter().all(|c| c.1.is_some_and(|s| s.n == 5 && s.mean.is_finite() && s.std.is_finite()));
    let ok = separated == 1.0
        && constant == 0.5
        && (base - moved).abs() <= 1e-12
        && names == ["Acc", "Prec", "AUC", "#R", "#T/R", "eta"]
        && complete;
    check(
        ok,
        format!(
            "AUC separated {separated}, constant {constant}, monotone shift {:.1e}; columns {names:?} complete: {complete}",
            (base - moved).abs()
        ),
    )
}

// 7. swinggen physics.
fn criterion_7() -> Outcome {
    let f = Fixture::bundled();
    let net = f.network();
    let sc = |tcl: f64, t_end: f64, dt: f64| Scenario {
        t0: 0.1,
        tcl,
        t_end,
        dt,
        ..Scenario::default()
    };

    let (_, traj) = simulate(&f.machines, net, &sc(0.1, 3.0, 1e-3)).unwrap();
    let still = traj
        .delta
        .iter()
        .flat_map(|d| d.iter().zip(&traj.delta[0]).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);

    let (balanced, d0) = equilibrium(&f.machines, &net.prefault).unwrap();
    let end = |dt: f64| {
        let t = simulate_from(&balanced, net, &sc(0.2, 1.0, dt), &d0).unwrap();
        let k = t.len() - 1;
        t.delta[k].iter().chain(&t.omega[k]).copied().collect::<Vec<f64>>()
    };
    let reference = end(0.02 / 64.0);
    let err = |dt: f64| end(dt).iter().zip(&reference).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let (e1, e2) = (err(0.01), err(0.005));
    let ratio = e1 / e2;

    let (_, traj) = simulate(&f.machines, net, &sc(0.25, 3.0, 1e-3)).unwrap();
    let coi = (0..traj.len())
        .map(|k| {
            let c = traj.coi_angle(k);
            traj.delta[k].iter().zip(&traj.inertia).map(|(d, m)| m * (d - c)).sum::<f64>().abs()
        })
        .fold(0.0, f64::max);

    let labels: Vec<Label> = (0..=100)
        .map(|i| {
            let (_, t) = simulate(&f.machines, net, &sc(0.1 + 0.005 * i as f64, 3.0, 1e-3)).unwrap();
            label(&t, StabilityCriterion::Pairwise)
        })
        .collect();
    let switches = labels.windows(2).filter(|w| w[0] != w[1]).count();
    let cct = labels.iter().position(|&l| l == Label::Negative).map(|i| 0.005 * i as f64);
    let unique = switches == 1 && labels[0] == Label::Positive;

    let [unstable, stable] = swing_dataset().class_counts();
    let frac = unstable as f64 / (unstable + stable) as f64;

    let ok = still <= 1e-9 && (8.0..=32.0).contains(&ratio) && coi <= 1e-10 && unique && (0.1..=0.9).contains(&frac);
    check(
        ok,
        format!(
            "zero-fault drift {still:.1e} rad; halving ratio {ratio:.2}; COI residual {coi:.1e}; \
             {switches} label switch(es), CCT ~ {cct:?} s after inception; unstable fraction {frac:.3}"
        ),
    )
}

// 8 and 9 drive the binary.
fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_tsarules")
}

fn run(args: &[&str], cwd: &Path) -> Output {
    let out = Command::new(bin()).args(args).current_dir(cwd).output().expect("binary runs");
    if !out.status.success() {
        eprintln!("{}", String::from_utf8_lossy(&out.stderr));
    }
    out
}

fn only_run_dir(root: &Path) -> PathBuf {
    let dirs: Vec<PathBuf> = fs::read_dir(root)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_dir())
        .collect();
    assert_eq!(dirs.len(), 1, "{dirs:?}");
    dirs.into_iter().next().unwrap()
}

fn criterion_8() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("small.json");
    fs::write(
        &cfg,
        r#"{"generator": {"n_samples": 400}, "pipeline": {"extraction": {"miner": {"n_ants": 100}}}}"#,
    )
    .unwrap();
    let mut dirs = Vec::new();
    for (i, jobs) in ["1", "1", "3"].iter().enumerate() {
        let root = tmp.path().join(format!("r{i}"));
        let out = run(
            &["--seed", "11", "--jobs", jobs, "--out-dir", root.to_str().unwrap(), "pipeline", "--config", cfg.to_str().unwrap()],
            tmp.path(),
        );
        if !out.status.success() {
            return Err(format!("pipeline run {i} exited with {}", out.status));
        }
        dirs.push(only_run_dir(&root));
    }
    let files = ["rules.txt", "rules.json", "metrics.json", "roc.csv", "data.csv", "model.json"];
    let mut differing = Vec::new();
    for f in files {
        let a = fs::read(dirs[0].join(f)).unwrap();
        for d in &dirs[1..] {
            if fs::read(d.join(f)).unwrap() != a {
                differing.push(format!("{f} ({})", d.file_name().unwrap().to_string_lossy()));
            }
        }
    }
    check(
        differing.is_empty(),
        format!("compared {files:?} across 2 serial runs and a --jobs 3 run; differing: {differing:?}"),
    )
}

fn criterion_9() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path();
    let start = Instant::now();
    let step = |args: &[&str]| -> Result<(), String> {
        let out = run(args, p);
        if out.status.success() {
            Ok(())
        } else {
            Err(format!("{args:?} exited with {}", out.status))
        }
    };
    step(&["--seed", "5", "--out-dir", "gen", "gen", "--out", "data.csv"])?;
    step(&["--seed", "5", "--out-dir", "train", "train", "--data", "data.csv"])?;
    let model = only_run_dir(&p.join("train")).join("model.json");
    step(&["--seed", "5", "--out-dir", "extract", "extract", "--model", model.to_str().unwrap(), "--data", "data.csv"])?;
    step(&["--seed", "5", "--out-dir", "eval", "eval", "--data", "data.csv", "--k", "5"])?;
    let took = start.elapsed();
    let rows = fs::read_to_string(p.join("data.csv")).unwrap().lines().count() - 1;
    let table = fs::read_to_string(only_run_dir(&p.join("eval")).join("table.txt")).unwrap();
    let row = table.lines().nth(1).unwrap_or("").to_string();
    check(
        rows == 2000 && took < Duration::from_secs(600),
        format!("gen {rows} samples -> train -> extract (400 ants) -> 5-fold eval in {:.1}s; {row}", took.as_secs_f64()),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("arithmetic anchors", criterion_1),
        ("ELM properties", criterion_2),
        ("miner oracle equivalence", criterion_3),
        ("IAM vs classic heuristic", criterion_4),
        ("extraction fidelity", criterion_5),
        ("metrics", criterion_6),
        ("swinggen physics", criterion_7),
        ("determinism", criterion_8),
        ("end-to-end desk-scale run", criterion_9),
    ];
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !wanted.is_empty() && !wanted.contains(&n) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {n} ({name}): PASS [{secs:.1}s] {d}"),
            Err(d) => {
                failed += 1;
                println!("criterion {n} ({name}): FAIL [{secs:.1}s] {d}");
            }
        }
    }
    println!("acceptance: {}/{ran} criteria passed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
