//! Command-line pipeline for medication-response detection from
//! smartphone active-test recordings.
//!
//! Subcommands mirror the pipeline stages: `ingest` validates and
//! normalizes raw instance files, `pair` matches same-day pre/post-dose
//! sessions, `extract` produces the feature matrix, `train` fits the
//! forest, `evaluate` runs repeated cross-validation against the random
//! null, `led` computes daily levodopa-equivalent doses (optionally with
//! the accuracy-vs-LED quadratic), and `simulate` emits a synthetic
//! cohort. Exit codes: 0 success, 2 input-format error, 3 contract
//! violation, 4 internal invariant failure.

mod config;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use medresponse_core::cv::{repeated_cv, CvConfig};
use medresponse_core::extract::{
    extract_instances, read_matrix_csv, write_matrix_csv, ExtractOptions,
};
use medresponse_core::forest::{train, ForestConfig};
use medresponse_core::led::{
    accuracy_vs_led, daily_led, read_regimens_csv, LedAccuracyPoint, LedTable,
    DEFAULT_MIN_INSTANCES,
};
use medresponse_core::pairing::{pair_instances, DEFAULT_WINDOW_MAX, DEFAULT_WINDOW_MIN};
use medresponse_core::registry::Registry;
use medresponse_core::report::{
    compute_feature_diffs, importance_ranking, labeled_dataset, read_report_json,
    write_diffs_csv, write_importance_csv, write_metrics_csv, write_participants_csv,
    write_report_json, DatasetSummary, EvaluationReport,
};
use medresponse_core::synth::{generate_cohort, EffectProfile, ResponseCurve};
use medresponse_core::{jsonl, Error};

use config::FileConfig;

#[derive(Parser)]
#[command(
    name = "medresponse",
    about = "Detect medication response from smartphone active tests",
    version
)]
struct Cli {
    /// Optional JSON config file; flags override it, it overrides defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (default: all cores). Results never depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate and normalize raw instance files into one JSONL file.
    Ingest(IngestArgs),
    /// Pair same-day baseline/treatment instances.
    Pair(PairArgs),
    /// Extract the feature matrix from instances.
    Extract(ExtractArgs),
    /// Train a random forest on a feature matrix.
    Train(TrainArgs),
    /// Repeated cross-validation with metrics, importance, and the
    /// random-classifier null.
    Evaluate(EvaluateArgs),
    /// Daily levodopa-equivalent doses, optionally with the
    /// accuracy-vs-LED quadratic fit.
    Led(LedArgs),
    /// Generate a synthetic cohort.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct IngestArgs {
    /// Input JSONL files.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

#[derive(Args)]
struct PairArgs {
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    /// Pairing window in minutes, "MIN:MAX".
    #[arg(long, value_name = "MIN:MAX")]
    window: Option<String>,
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Also write the feature registry manifest here.
    #[arg(long, value_name = "PATH")]
    registry: Option<PathBuf>,
    /// Keep instances with missing tests (0.0 sentinel + flag).
    #[arg(long)]
    allow_missing: bool,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, value_name = "PATH")]
    features: PathBuf,
    #[arg(long)]
    trees: Option<usize>,
    #[arg(long)]
    mtry: Option<usize>,
    #[arg(long)]
    min_split: Option<usize>,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_name = "PATH")]
    model: PathBuf,
    /// How many top features to print.
    #[arg(long, default_value_t = 10)]
    top_k: usize,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long, value_name = "PATH")]
    features: PathBuf,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    trees: Option<usize>,
    #[arg(long)]
    mtry: Option<usize>,
    #[arg(long)]
    min_split: Option<usize>,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Stratify folds by class.
    #[arg(long)]
    stratified: bool,
    /// Keep each participant-day pair within one fold.
    #[arg(long)]
    group_pairs: bool,
    #[arg(long, value_name = "PATH")]
    report: PathBuf,
    /// Also write per-pair feature differences (long CSV).
    #[arg(long, value_name = "PATH")]
    diffs_csv: Option<PathBuf>,
}

#[derive(Args)]
struct LedArgs {
    #[arg(long, value_name = "PATH")]
    regimens: PathBuf,
    /// Conversion table CSV; defaults to the built-in table.
    #[arg(long, value_name = "PATH")]
    table: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Fit the accuracy-vs-LED quadratic (needs --report).
    #[arg(long)]
    fit_quadratic: bool,
    /// Evaluation report to read per-participant accuracy from; the fit
    /// is appended back into it.
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
    /// Participants below this instance count are excluded from the fit.
    #[arg(long, default_value_t = DEFAULT_MIN_INSTANCES)]
    min_instances: usize,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    participants: usize,
    /// Instances per participant (two per simulated day).
    #[arg(long)]
    instances: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Effect profile JSON; defaults to the built-in medication effect.
    #[arg(long, value_name = "PATH")]
    effect: Option<PathBuf>,
    /// LED range in mg, "MIN:MAX".
    #[arg(long, value_name = "MIN:MAX")]
    led_range: Option<String>,
    /// Output directory (instances.jsonl, manifest.json, regimens.csv).
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

const DEFAULT_SEED: u64 = 42;

fn parse_range(s: &str, what: &str) -> Result<(f64, f64), Error> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| Error::Input(format!("{what} must look like MIN:MAX, got '{s}'")))?;
    let lo: f64 = lo.parse().map_err(|_| Error::Input(format!("{what}: bad number '{lo}'")))?;
    let hi: f64 = hi.parse().map_err(|_| Error::Input(format!("{what}: bad number '{hi}'")))?;
    Ok((lo, hi))
}

fn run_ingest(args: &IngestArgs) -> Result<(), Error> {
    let mut all = Vec::new();
    let mut rejected = 0usize;
    for file in &args.files {
        let (instances, rejections) = jsonl::read_instances_file(file)?;
        for r in &rejections {
            eprintln!("{}:{}: rejected: {}", file.display(), r.line, r.reason);
        }
        rejected += rejections.len();
        all.extend(instances);
    }
    if all.is_empty() {
        return Err(Error::Input(format!(
            "no valid instances across {} file(s) ({rejected} rejected)",
            args.files.len()
        )));
    }
    jsonl::write_instances_file(&args.out, &all)?;
    println!(
        "ingested {} instances ({} rejected) -> {}",
        all.len(),
        rejected,
        args.out.display()
    );
    Ok(())
}

fn run_pair(args: &PairArgs, cfg: &FileConfig) -> Result<(), Error> {
    let (window_min, window_max) = match &args.window {
        Some(s) => parse_range(s, "--window")?,
        None => (
            cfg.pair.window_min.unwrap_or(DEFAULT_WINDOW_MIN),
            cfg.pair.window_max.unwrap_or(DEFAULT_WINDOW_MAX),
        ),
    };
    let (instances, rejections) = jsonl::read_instances_file(&args.input)?;
    for r in &rejections {
        eprintln!("{}:{}: rejected: {}", args.input.display(), r.line, r.reason);
    }
    let pairs = pair_instances(&instances, window_min, window_max)?;
    let mut out = Vec::with_capacity(pairs.len() * 2);
    for (base, treat) in pairs {
        out.push(base);
        out.push(treat);
    }
    jsonl::write_instances_file(&args.out, &out)?;
    println!(
        "paired {} of {} instances ({} pairs, window {window_min}:{window_max} min) -> {}",
        out.len(),
        instances.len(),
        out.len() / 2,
        args.out.display()
    );
    Ok(())
}

fn run_extract(args: &ExtractArgs, cfg: &FileConfig) -> Result<(), Error> {
    let allow_missing = args.allow_missing || cfg.extract.allow_missing.unwrap_or(false);
    let registry = Registry::standard();
    let (instances, rejections) = jsonl::read_instances_file(&args.input)?;
    for r in &rejections {
        eprintln!("{}:{}: rejected: {}", args.input.display(), r.line, r.reason);
    }
    let options = ExtractOptions { require_all_tests: !allow_missing };
    let (rows, failures) = extract_instances(&instances, &registry, options);
    for f in &failures {
        eprintln!(
            "instance {} (participant {}): not extracted: {}",
            f.index, f.participant_id, f.reason
        );
    }
    if rows.is_empty() {
        return Err(Error::Contract("no instances could be extracted".to_string()));
    }
    write_matrix_csv(&args.out, &registry, &rows)?;
    if let Some(reg_path) = &args.registry {
        std::fs::write(reg_path, registry.manifest_json())?;
    }
    println!(
        "extracted {} instances x {} features ({} failed) -> {}",
        rows.len(),
        registry.len(),
        failures.len(),
        args.out.display()
    );
    Ok(())
}

fn run_train(args: &TrainArgs, cfg: &FileConfig) -> Result<(), Error> {
    let registry = Registry::standard();
    let rows = read_matrix_csv(&args.features, &registry)?;
    let data = labeled_dataset(&rows, &registry)?;
    let forest_config = ForestConfig {
        n_trees: args.trees.or(cfg.train.trees).unwrap_or(500),
        mtry: args.mtry.or(cfg.train.mtry),
        min_split: args.min_split.or(cfg.train.min_split).unwrap_or(2),
        max_depth: args.max_depth.or(cfg.train.max_depth),
        seed: args.seed.or(cfg.train.seed).unwrap_or(DEFAULT_SEED),
    };
    let mut forest = train(&data.dataset, &forest_config)?;
    forest.registry_hash = Some(registry.hash());
    forest.save_json(&args.model)?;

    let (n0, n1) = data.dataset.class_counts();
    println!(
        "trained {} trees on {} instances ({} baseline / {} treatment), oob accuracy {}",
        forest_config.n_trees,
        data.dataset.n_rows(),
        n0,
        n1,
        forest.oob_accuracy.map(|a| format!("{a:.3}")).unwrap_or_else(|| "n/a".into())
    );
    println!("top {} features by importance:", args.top_k);
    for entry in importance_ranking(&registry, &forest.importance).iter().take(args.top_k) {
        println!(
            "  {:>2}. {:<22} {:<9} {:.5}  {}",
            entry.rank, entry.feature_id, entry.test, entry.importance, entry.description
        );
    }
    println!("model -> {}", args.model.display());
    Ok(())
}

fn stem_sibling(report: &Path, suffix: &str) -> PathBuf {
    let stem = report.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    report.with_file_name(format!("{stem}_{suffix}"))
}

fn run_evaluate(args: &EvaluateArgs, cfg: &FileConfig) -> Result<(), Error> {
    let registry = Registry::standard();
    let rows = read_matrix_csv(&args.features, &registry)?;
    let data = labeled_dataset(&rows, &registry)?;
    let cv_config = CvConfig {
        folds: args.folds.or(cfg.evaluate.folds).unwrap_or(10),
        repetitions: args.reps.or(cfg.evaluate.repetitions).unwrap_or(100),
        seed: args.seed.or(cfg.evaluate.seed).unwrap_or(DEFAULT_SEED),
        n_trees: args.trees.or(cfg.evaluate.trees).unwrap_or(500),
        mtry: args.mtry.or(cfg.evaluate.mtry),
        min_split: args.min_split.or(cfg.evaluate.min_split).unwrap_or(2),
        max_depth: args.max_depth.or(cfg.evaluate.max_depth),
        stratified: args.stratified || cfg.evaluate.stratified.unwrap_or(false),
        group_pairs: args.group_pairs || cfg.evaluate.group_pairs.unwrap_or(false),
    };

    let cv = repeated_cv(
        &data.dataset,
        Some(&data.participants),
        Some(&data.groups),
        &cv_config,
    )?;

    let diffs = compute_feature_diffs(&rows, &registry);
    let (n0, n1) = data.dataset.class_counts();
    let report = EvaluationReport {
        schema_version: 1,
        config: serde_json::to_value(&cv_config)
            .map_err(|e| Error::Internal(e.to_string()))?,
        registry_hash: registry.hash(),
        dataset: DatasetSummary {
            n_instances: data.dataset.n_rows(),
            n_features: registry.len(),
            n_baseline: n0,
            n_treatment: n1,
            skipped_unlabeled: data.skipped_unlabeled,
        },
        importance_ranking: importance_ranking(&registry, &cv.importance),
        feature_diff_medians: Some(diffs.medians.clone()),
        led_fit: None,
        cv,
    };

    write_report_json(&args.report, &report)?;
    write_metrics_csv(&stem_sibling(&args.report, "metrics.csv"), &report.cv)?;
    write_importance_csv(
        &stem_sibling(&args.report, "importance.csv"),
        &report.importance_ranking,
    )?;
    write_participants_csv(&stem_sibling(&args.report, "participants.csv"), &report.cv, None)?;
    if let Some(diffs_path) = &args.diffs_csv {
        write_diffs_csv(diffs_path, &registry, &diffs)?;
    }

    println!(
        "{} folds x {} repetitions on {} instances ({} baseline / {} treatment)",
        report.cv.folds,
        report.cv.repetitions,
        report.dataset.n_instances,
        n0,
        n1
    );
    println!(
        "forest   sensitivity {:.3} +/- {:.3}  specificity {:.3} +/- {:.3}  accuracy {:.3} +/- {:.3}",
        report.cv.sensitivity.mean,
        report.cv.sensitivity.std,
        report.cv.specificity.mean,
        report.cv.specificity.std,
        report.cv.accuracy.mean,
        report.cv.accuracy.std
    );
    println!(
        "random   accuracy {:.3} +/- {:.3}",
        report.cv.random_aggregate.mean, report.cv.random_aggregate.std
    );
    println!(
        "forest vs random: KS D = {:.4}, p = {:.3e}",
        report.cv.ks_forest_vs_random.d, report.cv.ks_forest_vs_random.p
    );
    println!("top 10 features by importance:");
    for entry in report.importance_ranking.iter().take(10) {
        println!(
            "  {:>2}. {:<22} {:<9} {:.5}  {}",
            entry.rank, entry.feature_id, entry.test, entry.importance, entry.description
        );
    }
    println!("report -> {}", args.report.display());
    Ok(())
}

fn run_led(args: &LedArgs) -> Result<(), Error> {
    let table = match &args.table {
        Some(path) => LedTable::from_csv(path)?,
        None => LedTable::default_table(),
    };
    let regimens = read_regimens_csv(&args.regimens)?;
    let mut led_by_participant: BTreeMap<String, f64> = BTreeMap::new();
    for (pid, regimen) in &regimens {
        led_by_participant.insert(pid.clone(), daily_led(regimen, &table)?);
    }

    let mut w = csv::Writer::from_path(&args.out).map_err(|e| Error::Input(e.to_string()))?;
    w.write_record(["participant_id", "daily_led_mg"])
        .map_err(|e| Error::Input(e.to_string()))?;
    for (pid, led) in &led_by_participant {
        w.write_record([pid.clone(), led.to_string()])
            .map_err(|e| Error::Input(e.to_string()))?;
    }
    w.flush()?;
    println!("daily LED for {} participants -> {}", led_by_participant.len(), args.out.display());

    if args.fit_quadratic {
        let report_path = args.report.as_ref().ok_or_else(|| {
            Error::Contract("--fit-quadratic needs --report to read accuracies from".to_string())
        })?;
        let mut report = read_report_json(report_path)?;
        let points: Vec<LedAccuracyPoint> = report
            .cv
            .per_participant
            .iter()
            .filter_map(|p| {
                led_by_participant.get(&p.participant_id).map(|&led_mg| LedAccuracyPoint {
                    led_mg,
                    accuracy: p.accuracy,
                    n_instances: p.n_instances,
                })
            })
            .collect();
        let fit = accuracy_vs_led(&points, args.min_instances)?;
        println!(
            "accuracy ~ {:.4} + {:.3e} led + {:.3e} led^2  (n = {}, led {:.0}..{:.0} mg)",
            fit.c0, fit.c1, fit.c2, fit.n_points, fit.led_min, fit.led_max
        );
        match fit.vertex_mg {
            Some(v) => println!("vertex at {v:.0} mg"),
            None => println!("fit is degenerate (no vertex)"),
        }
        report.led_fit = Some(fit);
        write_report_json(report_path, &report)?;
        write_participants_csv(
            &stem_sibling(report_path, "participants.csv"),
            &report.cv,
            Some(&led_by_participant),
        )?;
        println!("fit appended -> {}", report_path.display());
    }
    Ok(())
}

#[derive(serde::Serialize, serde::Deserialize)]
struct EffectSpec {
    #[serde(flatten)]
    profile: EffectProfile,
    #[serde(default)]
    response_curve: Option<ResponseCurve>,
}

fn run_simulate(args: &SimulateArgs, cfg: &FileConfig) -> Result<(), Error> {
    let seed = args.seed.or(cfg.simulate.seed).unwrap_or(DEFAULT_SEED);
    let led_range = match &args.led_range {
        Some(s) => parse_range(s, "--led-range")?,
        None => (
            cfg.simulate.led_min.unwrap_or(100.0),
            cfg.simulate.led_max.unwrap_or(3000.0),
        ),
    };
    let (profile, curve) = match &args.effect {
        None => (EffectProfile::default_effect(), ResponseCurve::default_mid_peak()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
            let spec: EffectSpec = serde_json::from_str(&text)
                .map_err(|e| Error::Input(format!("invalid effect profile: {e}")))?;
            (spec.profile, spec.response_curve.unwrap_or_else(ResponseCurve::default_mid_peak))
        }
    };

    let cohort =
        generate_cohort(args.participants, args.instances, led_range, &profile, &curve, seed)?;
    std::fs::create_dir_all(&args.out)?;
    jsonl::write_instances_file(&args.out.join("instances.jsonl"), &cohort.instances)?;
    std::fs::write(
        args.out.join("manifest.json"),
        serde_json::to_string_pretty(&cohort.manifest).map_err(|e| Error::Internal(e.to_string()))?,
    )?;
    let mut w = csv::Writer::from_path(args.out.join("regimens.csv"))
        .map_err(|e| Error::Input(e.to_string()))?;
    w.write_record(["participant_id", "drug", "dose_mg", "times_per_day"])
        .map_err(|e| Error::Input(e.to_string()))?;
    for rec in &cohort.led_records {
        for entry in &rec.regimen {
            w.write_record([
                rec.participant_id.clone(),
                entry.drug.clone(),
                entry.dose_mg.to_string(),
                entry.times_per_day.to_string(),
            ])
            .map_err(|e| Error::Input(e.to_string()))?;
        }
    }
    w.flush()?;
    println!(
        "simulated {} participants x {} instances (seed {seed}) -> {}",
        args.participants,
        args.instances,
        args.out.display()
    );
    println!(
        "{}",
        json!({ "effect": profile, "response_curve": curve })
    );
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Error> {
    let cfg = FileConfig::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Ingest(args) => run_ingest(args),
        Command::Pair(args) => run_pair(args, &cfg),
        Command::Extract(args) => run_extract(args, &cfg),
        Command::Train(args) => run_train(args, &cfg),
        Command::Evaluate(args) => run_evaluate(args, &cfg),
        Command::Led(args) => run_led(args),
        Command::Simulate(args) => run_simulate(args, &cfg),
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.threads {
        None => run(&cli),
        Some(n) => {
            if n == 0 {
                Err(Error::Contract("--threads must be at least 1".to_string()))
            } else {
                match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                    Ok(pool) => pool.install(|| run(&cli)),
                    Err(e) => Err(Error::Internal(format!("thread pool: {e}"))),
                }
            }
        }
    };
    if let Err(e) = result {
        let (code, tag) = match &e {
            Error::Input(_) | Error::Io(_) => (2, "E_INPUT"),
            Error::Contract(_) => (3, "E_CONTRACT"),
            Error::Internal(_) => (4, "E_INTERNAL"),
        };
        eprintln!("[{tag}] {e}");
        std::process::exit(code);
    }
}
