use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use tsarules::dataset::zscore_fit_apply;
use tsarules::eval::{comparison_table, cross_validate, external_row, parameter_sweep, TableRow};
use tsarules::extraction::extract;
use tsarules::miner::{mine, RuleFormatter};
use tsarules::swinggen::{generate_dataset, GeneratorConfig};
use tsarules::{
    elm, seed, CvReport, Dataset, Discretizer, ElmConfig, ElmModel, Error, ExtractionConfig, ExtractionResult, Label,
    Metrics, PipelineMode, PipelineSpec, RuleList, SamplingConfig, Standardizer,
};

use crate::config::{self, require_file, Baseline, FixtureSource};
use crate::rundir::{write_atomic, RunDir};
use crate::{CliError, ExtractArgs, GenArgs, Globals, PipelineArgs, SweepArgs, TrainArgs, EvalArgs};

type Result<T> = std::result::Result<T, CliError>;

/// Checks that run before any work; every failure is a config error.
fn precheck(r: tsarules::Result<()>) -> Result<()> {
    r.map_err(|e| CliError::Config(format!("{}: {e}", e.name())))
}

fn check_k(k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::BadFoldSpec(format!("k = {k}, need k >= 2")).into());
    }
    Ok(())
}

fn method_name(mode: PipelineMode) -> &'static str {
    match mode {
        PipelineMode::ElmRules => "ELM-rules",
        PipelineMode::Elm => "ELM",
        PipelineMode::Rules => "IAM",
    }
}

fn csv_bytes(ds: &Dataset) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    ds.write_csv(&mut buf)?;
    Ok(buf)
}

fn generate(fixture: Option<&FixtureSource>, cfg: &GeneratorConfig, seed: u64) -> Result<(Dataset, serde_json::Value)> {
    let fixture = FixtureSource::load(fixture)?;
    eprintln!("gen: simulating {} scenarios", cfg.n_samples);
    let g = generate_dataset(&fixture, cfg, seed::derive(seed, "gen"))?;
    let [unstable, stable] = g.dataset.class_counts();
    let summary = json!({
        "n_samples": g.dataset.n_samples(),
        "features": g.dataset.feature_names(),
        "stable": stable,
        "unstable": unstable,
        "attempts": g.attempts,
        "rejected": g.rejected,
    });
    Ok((g.dataset, summary))
}

pub fn gen(g: &Globals, args: &GenArgs) -> Result<()> {
    let mut cfg = config::load_gen(args.config.as_deref())?;
    if args.out.is_some() {
        cfg.out = args.out.clone();
    }
    let seed = g.seed.or(cfg.seed).unwrap_or(0);
    cfg.seed = Some(seed);
    precheck(cfg.generator.validate())?;

    let run = RunDir::create(&g.out_dir, "gen", seed)?;
    run.write_json("config.resolved.json", &cfg)?;
    let (ds, summary) = generate(cfg.fixture.as_ref(), &cfg.generator, seed)?;
    let csv = csv_bytes(&ds)?;
    run.write("data.csv", &csv)?;
    run.write_json("summary.json", &summary)?;
    if let Some(out) = &cfg.out {
        write_atomic(out, &csv)?;
    }
    let dir = run.commit()?;
    println!(
        "gen: {} samples ({} stable, {} unstable, {} rejected draws) -> {}",
        summary["n_samples"],
        summary["stable"],
        summary["unstable"],
        summary["rejected"],
        cfg.out.as_deref().unwrap_or(&dir.join("data.csv")).display()
    );
    Ok(())
}

fn train_model(ds: &Dataset, cfg: &ElmConfig, seed: u64) -> Result<(ElmModel, Metrics)> {
    let (train, standardizer) = zscore_fit_apply(ds)?;
    eprintln!("train: {} samples, L = {}", train.n_samples(), cfg.hidden_nodes);
    let mut model = elm::train(&train, cfg, seed::derive(seed, "train"))?;
    let scores = model.decisions(train.rows())?;
    let preds: Vec<Label> = scores.iter().map(|&s| Label::from_score(s)).collect();
    let metrics = Metrics::compute(&preds, &scores, train.labels(), Label::Negative, None)?;
    model.preprocessing = Some(standardizer);
    Ok((model, metrics))
}

pub fn train(g: &Globals, args: &TrainArgs) -> Result<()> {
    let mut cfg: config::TrainConfig = config::load(args.config.as_deref())?;
    if args.data.is_some() {
        cfg.data = args.data.clone();
    }
    if let Some(l) = args.hidden_nodes {
        cfg.elm.hidden_nodes = l;
    }
    let seed = g.seed.or(cfg.seed).unwrap_or(0);
    cfg.seed = Some(seed);
    precheck(cfg.elm.validate())?;
    let data = require_file("data", cfg.data.as_ref())?;
    cfg.data = Some(data.clone());

    let run = RunDir::create(&g.out_dir, "train", seed)?;
    run.write_json("config.resolved.json", &cfg)?;
    let ds = Dataset::load_csv(&data)?;
    let (model, metrics) = train_model(&ds, &cfg.elm, seed)?;
    run.write_json("model.json", &model)?;
    run.write_json("train_metrics.json", &metrics)?;
    let dir = run.commit()?;
    println!(
        "train: L = {}, training accuracy {:.4} -> {}",
        model.hidden_nodes,
        metrics.acc,
        dir.join("model.json").display()
    );
    Ok(())
}

#[derive(Serialize)]
struct RulesFile<'a> {
    rules: &'a RuleList,
    discretizer: &'a Discretizer,
    standardizer: Option<&'a Standardizer>,
}

fn write_rules(run: &RunDir, rules: &RuleList, disc: &Discretizer, standardizer: Option<&Standardizer>) -> Result<()> {
    run.write("rules.txt", RuleFormatter::from_discretizer(disc, standardizer).render(rules))?;
    run.write_json(
        "rules.json",
        &RulesFile {
            rules,
            discretizer: disc,
            standardizer,
        },
    )?;
    Ok(())
}

fn extract_rules(model: &ElmModel, ds: &Dataset, cfg: &ExtractionConfig, seed: u64) -> Result<ExtractionResult> {
    if ds.n_features() != model.n {
        return Err(Error::DimensionMismatch {
            expected: model.n,
            found: ds.n_features(),
        }
        .into());
    }
    let train = match &model.preprocessing {
        Some(s) => s.apply(ds)?,
        None => ds.clone(),
    };
    let s = seed::derive(seed, "extract");
    let mut cfg = cfg.clone();
    cfg.miner.seed = seed::mix(s, &[3]);
    let sampling = SamplingConfig::from_training(&train, &cfg, s);
    eprintln!(
        "extract: {} synthetic examples, {} probe rows, {} ants",
        sampling.n_examples, sampling.probe_size, cfg.miner.n_ants
    );
    Ok(extract(model, &train, &sampling, &cfg)?)
}

fn read_model(path: &Path) -> Result<ElmModel> {
    let model: ElmModel = serde_json::from_str(&fs::read_to_string(path)?).map_err(Error::from)?;
    model.validate()?;
    Ok(model)
}

pub fn extract_cmd(g: &Globals, args: &ExtractArgs) -> Result<()> {
    let mut cfg: config::ExtractConfig = config::load(args.config.as_deref())?;
    if args.data.is_some() {
        cfg.data = args.data.clone();
    }
    if args.model.is_some() {
        cfg.model = args.model.clone();
    }
    let seed = g.seed.or(cfg.seed).unwrap_or(0);
    cfg.seed = Some(seed);
    precheck(cfg.extraction.validate())?;
    let data = require_file("data", cfg.data.as_ref())?;
    let model_path = require_file("model", cfg.model.as_ref())?;
    cfg.data = Some(data.clone());
    cfg.model = Some(model_path.clone());

    let run = RunDir::create(&g.out_dir, "extract", seed)?;
    run.write_json("config.resolved.json", &cfg)?;
    let model = read_model(&model_path)?;
    let ds = Dataset::load_csv(&data)?;
    let r = extract_rules(&model, &ds, &cfg.extraction, seed)?;
    write_rules(&run, &r.rules, &r.discretizer, model.preprocessing.as_ref())?;
    run.write_json("result.json", &r)?;
    let dir = run.commit()?;
    println!(
        "extract: {} rules, {:.2} terms/rule, fidelity {:.4} -> {}",
        r.n_rules,
        r.terms_per_rule,
        r.fidelity,
        dir.display()
    );
    Ok(())
}

fn baseline_paths(baselines: &mut [Baseline]) -> Result<()> {
    for b in baselines {
        b.path = require_file(&format!("baseline {}", b.method), Some(&b.path))?;
    }
    Ok(())
}

fn evaluate(ds: &Dataset, spec: &PipelineSpec, k: usize, seed: u64, baselines: &[Baseline]) -> Result<(CvReport, Vec<TableRow>)> {
    eprintln!("eval: {k}-fold cross-validation, mode {}", method_name(spec.mode));
    let report = cross_validate(spec, ds, k, seed::derive(seed, "eval"))?;
    let mut rows = vec![TableRow::from_summary(method_name(spec.mode), &report.summary)];
    if let Some(s) = &report.elm_summary {
        if spec.mode == PipelineMode::ElmRules {
            rows.push(TableRow::from_summary("ELM", s));
        }
    }
    for b in baselines {
        rows.push(external_row(&b.method, &b.path, spec.positive_class)?);
    }
    Ok((report, rows))
}

fn write_eval(run: &RunDir, report: &CvReport, rows: &[TableRow]) -> Result<String> {
    run.write_json("metrics.json", report)?;
    if let Some(roc) = &report.roc {
        run.write("roc.csv", roc.to_csv())?;
    }
    let (text, csv) = comparison_table(rows);
    run.write("table.txt", &text)?;
    run.write("table.csv", &csv)?;
    Ok(text)
}

pub fn eval(g: &Globals, args: &EvalArgs) -> Result<()> {
    let mut cfg: config::EvalConfig = config::load(args.config.as_deref())?;
    if args.data.is_some() {
        cfg.data = args.data.clone();
    }
    if let Some(k) = args.k {
        cfg.k = k;
    }
    let seed = g.seed.or(cfg.seed).unwrap_or(0);
    cfg.seed = Some(seed);
    check_k(cfg.k)?;
    precheck(cfg.pipeline.validate())?;
    let data = require_file("data", cfg.data.as_ref())?;
    cfg.data = Some(data.clone());
    baseline_paths(&mut cfg.baselines)?;

    let run = RunDir::create(&g.out_dir, "eval", seed)?;
    run.write_json("config.resolved.json", &cfg)?;
    let ds = Dataset::load_csv(&data)?;
    let (report, rows) = evaluate(&ds, &cfg.pipeline, cfg.k, seed, &cfg.baselines)?;
    let text = write_eval(&run, &report, &rows)?;
    let dir = run.commit()?;
    print!("{text}");
    eprintln!("eval: results in {}", dir.display());
    Ok(())
}

pub fn sweep(g: &Globals, args: &SweepArgs) -> Result<()> {
    let mut cfg: config::SweepConfig = config::load(args.config.as_deref())?;
    if args.data.is_some() {
        cfg.data = args.data.clone();
    }
    let seed = g.seed.or(cfg.seed).unwrap_or(0);
    cfg.seed = Some(seed);
    check_k(cfg.k)?;
    precheck(cfg.pipeline.validate())?;
    if cfg.rho_grid.is_empty() || cfg.ants_grid.is_empty() {
        return Err(CliError::Config("rho_grid and ants_grid must be nonempty".into()));
    }
    if cfg.rho_grid.iter().any(|r| !(r.is_finite() && *r > 0.0 && *r < 1.0)) || cfg.ants_grid.contains(&0) {
        return Err(CliError::Config("rho values must lie in (0, 1) and ant counts be >= 1".into()));
    }
    let data = require_file("data", cfg.data.as_ref())?;
    cfg.data = Some(data.clone());

    let run = RunDir::create(&g.out_dir, "sweep", seed)?;
    run.write_json("config.resolved.json", &cfg)?;
    let ds = Dataset::load_csv(&data)?;
    eprintln!(
        "sweep: {} x {} grid, {}-fold each",
        cfg.rho_grid.len(),
        cfg.ants_grid.len(),
        cfg.k
    );
    let surface = parameter_sweep(&cfg.pipeline, &ds, &cfg.rho_grid, &cfg.ants_grid, cfg.k, seed::derive(seed, "sweep"))?;
    run.write("surface.csv", surface.to_csv())?;
    run.write_json("surface.json", &surface)?;
    let dir = run.commit()?;
    let best = surface
        .cells
        .iter()
        .max_by(|a, b| a.acc.total_cmp(&b.acc))
        .expect("grid is nonempty");
    println!(
        "sweep: best acc {:.4} at rho = {}, n_ants = {} -> {}",
        best.acc,
        best.rho,
        best.n_ants,
        dir.join("surface.csv").display()
    );
    Ok(())
}

pub fn pipeline(g: &Globals, args: &PipelineArgs) -> Result<()> {
    let mut cfg: config::PipelineConfig = config::load(args.config.as_deref())?;
    if args.data.is_some() {
        cfg.data = args.data.clone();
    }
    let seed = g.seed.or(cfg.seed).unwrap_or(0);
    cfg.seed = Some(seed);
    check_k(cfg.k)?;
    precheck(cfg.pipeline.validate())?;
    let data: Option<PathBuf> = match &cfg.data {
        Some(_) => Some(require_file("data", cfg.data.as_ref())?),
        None => {
            precheck(cfg.generator.validate())?;
            None
        }
    };
    cfg.data = data.clone();

    let run = RunDir::create(&g.out_dir, "pipeline", seed)?;
    run.write_json("config.resolved.json", &cfg)?;
    let ds = match &data {
        Some(p) => Dataset::load_csv(p)?,
        None => {
            let (ds, summary) = generate(cfg.fixture.as_ref(), &cfg.generator, seed)?;
            run.write("data.csv", csv_bytes(&ds)?)?;
            run.write_json("gen_summary.json", &summary)?;
            ds
        }
    };

    let spec = &cfg.pipeline;
    match spec.mode {
        PipelineMode::Elm | PipelineMode::ElmRules => {
            let (model, metrics) = train_model(&ds, &spec.elm, seed)?;
            run.write_json("model.json", &model)?;
            run.write_json("train_metrics.json", &metrics)?;
            if spec.mode == PipelineMode::ElmRules {
                let r = extract_rules(&model, &ds, &spec.extraction, seed)?;
                write_rules(&run, &r.rules, &r.discretizer, model.preprocessing.as_ref())?;
                run.write_json("result.json", &r)?;
                eprintln!("extract: {} rules, fidelity {:.4}", r.n_rules, r.fidelity);
            }
        }
        PipelineMode::Rules => {
            let (train, standardizer) = zscore_fit_apply(&ds)?;
            let disc = Discretizer::fit(&train, spec.extraction.bins_per_feature, spec.extraction.strategy)?;
            let mut miner = spec.extraction.miner;
            miner.seed = seed::mix(seed::derive(seed, "extract"), &[3]);
            let rules = mine(&disc.transform(&train)?, &miner)?;
            write_rules(&run, &rules, &disc, Some(&standardizer))?;
        }
    }

    let (report, rows) = evaluate(&ds, spec, cfg.k, seed, &[])?;
    let text = write_eval(&run, &report, &rows)?;
    let dir = run.commit()?;
    print!("{text}");
    eprintln!("pipeline: results in {}", dir.display());
    Ok(())
}
