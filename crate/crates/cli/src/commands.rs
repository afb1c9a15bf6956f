//! Subcommand implementations. Every command writes its outputs plus a
//! resolved config, and prints a short summary to stdout.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use respclass::evaluation::{
    bootstrap_ci, estimate_losses, policy_value, run_replications, summarize, with_pool, worker_count,
    BootstrapConfig, ExperimentSpec, ReplicationRecord,
};
use respclass::io::{read_dataset, read_ground_truth, write_dataset, write_ground_truth, CsvOptions};
use respclass::learners::{fit, model_io, Classify, FitReport, LearnerConfig, LearnerKind, TrainConfig};
use respclass::synthetic::{generate, ScenarioKind, ScenarioSpec};
use respclass::{Dataset, Error, ThetaMode};

use crate::args::{
    BenchmarkArgs, BootstrapArgs, EvaluateArgs, InputArgs, KernelArg, OptimizerArgs, SimulateArgs, TrainArgs,
};
use crate::config::{ConfigFile, ConfigWriter};

fn usage(message: impl Into<String>) -> anyhow::Error {
    Error::InvalidConfig(message.into()).into()
}

/// Where a command records its resolved settings, next to its main output.
pub fn resolved_path(out: &Path) -> PathBuf {
    out.with_extension("resolved.cfg")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(Error::from).with_context(|| format!("creating {}", dir.display()))?;
    }
    let file = File::create(path).map_err(Error::from).with_context(|| format!("writing {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes()).map_err(Error::from).with_context(|| format!("writing {}", path.display()))?;
    w.flush().map_err(Error::from)?;
    Ok(())
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(Error::from).with_context(|| format!("reading {}", path.display()))
}

fn read_data(path: &Path, input: &InputArgs) -> Result<Dataset> {
    let opts = CsvOptions { zero_one_labels: input.zero_one_labels, default_propensity: input.propensity };
    read_dataset(open(path)?, &opts).with_context(|| format!("reading {}", path.display()))
}

fn record_input(w: &mut ConfigWriter, input: &InputArgs) {
    w.set("zero_one_labels", input.zero_one_labels).set("propensity", input.propensity);
}

fn apply_optimizer(train: &mut TrainConfig, opt: &OptimizerArgs) {
    if let Some(e) = opt.epochs {
        train.epochs = e;
    }
    if let Some(lr) = opt.learning_rate {
        train.learning_rate = lr;
    }
    if let Some(b) = opt.batch_size {
        train.batch_size = (b > 0).then_some(b);
    }
    if let Some(l2) = opt.l2 {
        train.l2 = l2;
    }
}

fn record_optimizer(w: &mut ConfigWriter, train: &TrainConfig) {
    w.set("epochs", train.epochs)
        .set("learning_rate", train.learning_rate)
        .set("batch_size", train.batch_size.unwrap_or(0))
        .set("l2", train.l2);
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(create(path)?))
}

fn finish_csv(mut w: csv::Writer<BufWriter<File>>, path: &Path) -> Result<()> {
    w.flush().map_err(Error::from).with_context(|| format!("writing {}", path.display()))
}

fn csv_err(e: csv::Error) -> anyhow::Error {
    Error::from(e).into()
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let kind: ScenarioKind = args.scenario.parse()?;
    let spec = ScenarioSpec::new(kind, args.d, args.n, args.seed)?;
    let truth_out = args.truth_out.clone().unwrap_or_else(|| args.out.with_extension("truth.csv"));
    let (ds, truth) = generate(&spec)?;

    let mut w = create(&args.out)?;
    write_dataset(&mut w, &ds)?;
    w.flush().map_err(Error::from)?;
    let mut w = create(&truth_out)?;
    write_ground_truth(&mut w, &truth)?;
    w.flush().map_err(Error::from)?;

    let mut cfg = ConfigWriter::new("simulate");
    cfg.set("scenario", kind.name())
        .set("d", args.d)
        .set("n", args.n)
        .set("seed", args.seed)
        .set("out", args.out.display())
        .set("truth_out", truth_out.display());
    write_text(&resolved_path(&args.out), cfg.finish())?;
    println!("wrote {} rows to {} and {}", ds.len(), args.out.display(), truth_out.display());
    Ok(())
}

/// Maps `--learner`/`--kernel` to a learner, accepting `respsvm` as a
/// shorthand whose kernel defaults to RBF.
pub fn resolve_learner(name: &str, kernel: Option<KernelArg>) -> Result<LearnerKind> {
    let from_kernel = |k: KernelArg| match k {
        KernelArg::Linear => LearnerKind::RespSvmLinear,
        KernelArg::Rbf => LearnerKind::RespSvmRbf,
    };
    if name == "respsvm" {
        return Ok(from_kernel(kernel.unwrap_or(KernelArg::Rbf)));
    }
    let kind: LearnerKind = name.parse()?;
    match kernel {
        Some(_) if !kind.is_svm() => Err(usage(format!("--kernel applies only to SVM learners, not {kind}"))),
        Some(k) if from_kernel(k) != kind => Err(usage(format!("--kernel contradicts learner {kind}"))),
        _ => Ok(kind),
    }
}

fn training_log(report: &FitReport, mode: ThetaMode, folds: usize) -> String {
    let mut log = String::new();
    let _ = writeln!(log, "learner = {}", report.learner);
    let origin = match mode {
        ThetaMode::Balanced => "balanced estimate",
        ThetaMode::Fixed(_) => "fixed",
    };
    let _ = writeln!(log, "theta = {} ({origin})", report.theta.value());
    let _ = writeln!(log, "final_loss = {}", report.final_loss);
    let _ = writeln!(log, "converged = {}", report.converged);
    if let Some(cv) = &report.cv {
        let _ = writeln!(log, "cross-validation: {folds} folds, held-out L'_theta (lower is better)");
        let _ = write!(log, "  setting");
        for f in 0..cv.fold_scores.first().map_or(0, Vec::len) {
            let _ = write!(log, "\tfold{}", f + 1);
        }
        let _ = writeln!(log, "\tmean");
        for ((setting, scores), mean) in cv.settings.iter().zip(&cv.fold_scores).zip(&cv.mean_scores) {
            let _ = write!(log, "  {setting}");
            for s in scores {
                let _ = write!(log, "\t{s}");
            }
            let _ = writeln!(log, "\t{mean}");
        }
    }
    if let Some(selected) = &report.selected {
        let _ = writeln!(log, "selected = {selected}");
    }
    for note in &report.notes {
        let _ = writeln!(log, "note: {note}");
    }
    log
}

pub fn train(args: &TrainArgs) -> Result<()> {
    let kind = resolve_learner(&args.learner, args.kernel)?;
    let mode: ThetaMode = args.theta.parse()?;
    let mut cfg = LearnerConfig::default();
    apply_optimizer(&mut cfg.train, &args.optimizer);
    if !args.c.is_empty() {
        cfg.c_grid = args.c.clone();
    }
    if !args.gamma.is_empty() {
        if kind != LearnerKind::RespSvmRbf {
            return Err(usage("--gamma applies only to the RBF SVM"));
        }
        cfg.gamma_grid = Some(args.gamma.clone());
    }
    cfg.folds = args.cv;
    if let Some(tol) = args.tol {
        cfg.svm.tol = tol;
    }
    cfg.svm.max_iter = args.max_iter;
    if let Some(mb) = args.cache_mb {
        cfg.svm.cache_bytes = mb << 20;
    }

    let ds = read_data(&args.data, &args.input)?;
    let theta = mode.resolve(&ds)?;
    let report = fit(kind, &ds, theta, &cfg, args.seed)?;

    let mut w = create(&args.out)?;
    model_io::save(&mut w, &report.classifier)?;
    w.flush().map_err(Error::from)?;
    let log = training_log(&report, mode, cfg.folds);
    write_text(&args.out.with_extension("log"), &log)?;

    let mut rc = ConfigWriter::new("train");
    rc.set("data", args.data.display())
        .set("learner", kind)
        .set("theta", mode)
        .set("theta_resolved", theta.value())
        .set("seed", args.seed);
    record_optimizer(&mut rc, &cfg.train);
    if kind.is_svm() {
        rc.set_all("c", &cfg.c_grid);
        if kind == LearnerKind::RespSvmRbf {
            rc.set_all("gamma", cfg.gammas(ds.dim()));
        }
        rc.set("folds", cfg.folds).set("svm_tol", cfg.svm.tol);
        if let Some(m) = cfg.svm.max_iter {
            rc.set("svm_max_iter", m);
        }
    }
    record_input(&mut rc, &args.input);
    rc.set("out", args.out.display());
    write_text(&resolved_path(&args.out), rc.finish())?;
    print!("{log}");
    Ok(())
}

pub fn evaluate(args: &EvaluateArgs) -> Result<()> {
    let mode: ThetaMode = args.theta.parse()?;
    let scenario = match (&args.ground_truth, &args.scenario) {
        (Some(_), None) => return Err(usage("--ground-truth needs --scenario to compute the Bayes rule")),
        (_, Some(s)) => Some(s.parse::<ScenarioKind>()?),
        (None, None) => None,
    };
    let clf = model_io::load(open(&args.model)?).with_context(|| format!("reading {}", args.model.display()))?;
    let ds = read_data(&args.data, &args.input)?;
    let theta = mode.resolve(&ds)?;
    let report = estimate_losses(&clf, &ds, theta)?;
    let value = policy_value(&clf, &ds, theta)?;

    let mut header = vec!["n", "theta", "l_theta_hat", "l_prime_hat", "fp_hat", "fn_hat", "policy_value"];
    let mut row = vec![
        report.n.to_string(),
        theta.value().to_string(),
        report.l_theta_hat.to_string(),
        report.l_prime_hat.to_string(),
        report.fp_hat.to_string(),
        report.fn_hat.to_string(),
        value.to_string(),
    ];
    if let (Some(path), Some(kind)) = (&args.ground_truth, scenario) {
        let truth = read_ground_truth(open(path)?).with_context(|| format!("reading {}", path.display()))?;
        let d = truth.first().map_or(ds.dim(), |u| u.x.len());
        let spec = ScenarioSpec::new(kind, d, truth.len().max(1), 0)?;
        let xs: Vec<&[f64]> = truth.iter().map(|u| u.x.as_slice()).collect();
        let bayes = respclass::evaluation::accuracy_vs_bayes(&clf, &xs, &spec, theta)?;
        let responders = truth.iter().filter(|u| clf.classify(&u.x) == u.r).count() as f64 / truth.len() as f64;
        header.extend(["bayes_accuracy", "responder_accuracy"]);
        row.extend([bayes.to_string(), responders.to_string()]);
    }
    let mut w = csv_writer(&args.out)?;
    w.write_record(&header).map_err(csv_err)?;
    w.write_record(&row).map_err(csv_err)?;
    finish_csv(w, &args.out)?;

    let mut rc = ConfigWriter::new("evaluate");
    rc.set("model", args.model.display()).set("data", args.data.display()).set("theta", mode);
    rc.set("theta_resolved", theta.value());
    if let Some(p) = &args.ground_truth {
        rc.set("ground_truth", p.display());
    }
    if let Some(k) = scenario {
        rc.set("scenario", k.name());
    }
    record_input(&mut rc, &args.input);
    rc.set("out", args.out.display());
    write_text(&resolved_path(&args.out), rc.finish())?;
    for (h, v) in header.iter().zip(&row) {
        println!("{h} = {v}");
    }
    Ok(())
}

/// Keys understood by `benchmark` config files.
pub const BENCHMARK_KEYS: &[&str] = &[
    "scenario",
    "d",
    "n",
    "learner",
    "replications",
    "seed",
    "test_size",
    "theta",
    "epochs",
    "learning_rate",
    "batch_size",
    "l2",
    "c",
    "gamma",
    "folds",
    "svm_tol",
    "svm_max_iter",
    "gram_limit",
];

fn required<T>(value: Option<T>, key: &str) -> Result<T> {
    value.ok_or_else(|| usage(format!("config is missing `{key}`")))
}

/// Builds an experiment from a parsed benchmark config.
pub fn experiment_from_config(cfg: &ConfigFile) -> Result<ExperimentSpec> {
    cfg.check_keys(BENCHMARK_KEYS)?;
    let scenario: ScenarioKind = required(cfg.get::<String>("scenario")?, "scenario")?.parse()?;
    let d = required(cfg.get("d")?, "d")?;
    let n_grid: Vec<usize> = cfg.get_all("n")?;
    let learners = cfg
        .get_all::<String>("learner")?
        .iter()
        .map(|s| s.parse::<LearnerKind>())
        .collect::<respclass::Result<Vec<_>>>()?;
    if n_grid.is_empty() {
        return Err(usage("config is missing `n`"));
    }
    if learners.is_empty() {
        return Err(usage("config is missing `learner`"));
    }
    let mut spec = ExperimentSpec::new(scenario, d, learners, n_grid, 20, 0);
    if let Some(r) = cfg.get("replications")? {
        spec.replications = r;
    }
    if let Some(s) = cfg.get("seed")? {
        spec.seed = s;
    }
    if let Some(t) = cfg.get("test_size")? {
        spec.test_size = t;
    }
    if let Some(t) = cfg.get::<String>("theta")? {
        spec.theta = t.parse()?;
    }
    let opt = OptimizerArgs {
        epochs: cfg.get("epochs")?,
        learning_rate: cfg.get("learning_rate")?,
        batch_size: cfg.get("batch_size")?,
        l2: cfg.get("l2")?,
    };
    let learner = &mut spec.learner;
    apply_optimizer(&mut learner.train, &opt);
    let cs: Vec<f64> = cfg.get_all("c")?;
    if !cs.is_empty() {
        learner.c_grid = cs;
    }
    let gammas: Vec<f64> = cfg.get_all("gamma")?;
    if !gammas.is_empty() {
        learner.gamma_grid = Some(gammas);
    }
    if let Some(f) = cfg.get("folds")? {
        learner.folds = f;
    }
    if let Some(t) = cfg.get("svm_tol")? {
        learner.svm.tol = t;
    }
    learner.svm.max_iter = cfg.get("svm_max_iter")?;
    if let Some(g) = cfg.get("gram_limit")? {
        learner.gram_limit = g;
    }
    spec.validate()?;
    Ok(spec)
}

/// The resolved form of an experiment, itself a valid benchmark config.
pub fn experiment_config(spec: &ExperimentSpec) -> String {
    let mut w = ConfigWriter::new("benchmark");
    w.set("scenario", spec.scenario.name())
        .set("d", spec.d)
        .set_all("n", &spec.n_grid)
        .set_all("learner", &spec.learners)
        .set("replications", spec.replications)
        .set("seed", spec.seed)
        .set("test_size", spec.test_size)
        .set("theta", spec.theta);
    record_optimizer(&mut w, &spec.learner.train);
    w.set_all("c", &spec.learner.c_grid);
    if let Some(g) = &spec.learner.gamma_grid {
        w.set_all("gamma", g);
    }
    w.set("folds", spec.learner.folds).set("svm_tol", spec.learner.svm.tol);
    if let Some(m) = spec.learner.svm.max_iter {
        w.set("svm_max_iter", m);
    }
    w.set("gram_limit", spec.learner.gram_limit);
    w.finish().to_string()
}

const METRIC_COLUMNS: [&str; 5] = ["bayes_accuracy", "l_theta_hat", "l_prime_hat", "policy_value", "train_loss"];

fn write_records(path: &Path, records: &[ReplicationRecord]) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["learner", "n", "replication", "data_seed", "theta", "status"];
    header.extend(METRIC_COLUMNS);
    header.push("error");
    w.write_record(&header).map_err(csv_err)?;
    for r in records {
        let mut row = vec![
            r.learner.to_string(),
            r.n.to_string(),
            r.replication.to_string(),
            r.data_seed.to_string(),
            r.theta.value().to_string(),
        ];
        match &r.outcome {
            Ok(m) => {
                row.push("ok".into());
                for v in [m.bayes_accuracy, m.l_theta_hat, m.l_prime_hat, m.policy_value, m.train_loss] {
                    row.push(v.to_string());
                }
                row.push(String::new());
            }
            Err(e) => {
                row.push("failed".into());
                row.extend(std::iter::repeat(String::new()).take(METRIC_COLUMNS.len()));
                row.push(e.clone());
            }
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    finish_csv(w, path)
}

fn mean_of(records: &[&ReplicationRecord], metric: impl Fn(&respclass::evaluation::Metrics) -> f64) -> f64 {
    let values: Vec<f64> = records.iter().filter_map(|r| r.outcome.as_ref().ok()).map(&metric).collect();
    if values.is_empty() {
        f64::NAN
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

fn write_aggregate(path: &Path, spec: &ExperimentSpec, records: &[ReplicationRecord]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "learner",
        "n",
        "replications",
        "failures",
        "bayes_accuracy_mean",
        "bayes_accuracy_p10",
        "bayes_accuracy_p90",
        "l_theta_hat_mean",
        "policy_value_mean",
    ])
    .map_err(csv_err)?;
    for s in summarize(spec, records) {
        let cell: Vec<&ReplicationRecord> = records.iter().filter(|r| r.learner == s.learner && r.n == s.n).collect();
        w.write_record([
            s.learner.to_string(),
            s.n.to_string(),
            cell.len().to_string(),
            s.failures.to_string(),
            s.mean.to_string(),
            s.percentile_10.to_string(),
            s.percentile_90.to_string(),
            mean_of(&cell, |m| m.l_theta_hat).to_string(),
            mean_of(&cell, |m| m.policy_value).to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish_csv(w, path)
}

pub fn benchmark(args: &BenchmarkArgs) -> Result<()> {
    let text = fs::read_to_string(&args.config)
        .map_err(Error::from)
        .with_context(|| format!("reading {}", args.config.display()))?;
    // A malformed config is a usage problem, not bad data.
    let spec = ConfigFile::parse(&text)
        .map_err(anyhow::Error::from)
        .and_then(|cfg| experiment_from_config(&cfg))
        .map_err(|e| match e.downcast::<Error>() {
            Ok(Error::Parse { line, message }) => usage(format!("{} line {line}: {message}", args.config.display())),
            Ok(other) => anyhow::Error::from(other).context(format!("in {}", args.config.display())),
            Err(e) => e,
        })?;
    let threads = worker_count(args.threads);
    let records = with_pool(threads, || run_replications(&spec))??;

    let dir = &args.out_dir;
    write_records(&dir.join("replications.csv"), &records)?;
    write_aggregate(&dir.join("aggregate.csv"), &spec, &records)?;
    write_text(&dir.join("resolved_config.cfg"), &experiment_config(&spec))?;
    let failed = records.iter().filter(|r| r.outcome.is_err()).count();
    println!("{} replications ({failed} failed) written to {}", records.len(), dir.display());
    for s in summarize(&spec, &records) {
        println!(
            "{} n={}: bayes accuracy mean {:.4} [p10 {:.4}, p90 {:.4}]",
            s.learner, s.n, s.mean, s.percentile_10, s.percentile_90
        );
    }
    Ok(())
}

pub fn bootstrap(args: &BootstrapArgs) -> Result<()> {
    let mut cfg = BootstrapConfig {
        outer: args.outer,
        inner: args.inner,
        level: args.level,
        seed: args.seed,
        warm_start: !args.cold_start,
        ..BootstrapConfig::default()
    };
    apply_optimizer(&mut cfg.train, &args.optimizer);
    cfg.validate()?;
    let ds = read_data(&args.data, &args.input)?;
    let threads = worker_count(args.threads);
    let result = with_pool(threads, || bootstrap_ci(&ds, &cfg))??;

    let mut w = csv_writer(&args.out)?;
    w.write_record(["coefficient", "estimate", "std_error", "lower", "upper", "level", "significant", "contains_estimate"])
        .map_err(csv_err)?;
    for ci in &result.intervals {
        w.write_record([
            ci.name.clone(),
            ci.estimate.to_string(),
            ci.std_error.to_string(),
            ci.lower.to_string(),
            ci.upper.to_string(),
            ci.level.to_string(),
            ci.significant().to_string(),
            ci.contains_estimate().to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish_csv(w, &args.out)?;

    let mut rc = ConfigWriter::new("bootstrap");
    rc.set("data", args.data.display())
        .set("outer", cfg.outer)
        .set("inner", cfg.inner)
        .set("level", cfg.level)
        .set("seed", cfg.seed)
        .set("warm_start", cfg.warm_start);
    record_optimizer(&mut rc, &cfg.train);
    record_input(&mut rc, &args.input);
    rc.set("out", args.out.display());
    write_text(&resolved_path(&args.out), rc.finish())?;

    println!("{} resamples used, {} skipped", result.used, result.skipped);
    for ci in &result.intervals {
        println!(
            "{}: {:.4} [{:.4}, {:.4}]{}",
            ci.name,
            ci.estimate,
            ci.lower,
            ci.upper,
            if ci.significant() { " *" } else { "" }
        );
    }
    Ok(())
}
