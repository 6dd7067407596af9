//! Subcommand implementations. Inputs are never modified; every output goes
//! under the output directory.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use celebprof_core::corpus::{generate_synthetic_corpus, AgeBoundary, Corpus, LabelConfig, SynthSpec};
use celebprof_core::evaluation::{
    render_text_report, CellResult, EvaluationError, EvaluationReport, ExperimentPlan, FittedModel, ModelKind,
};
use celebprof_core::linalg::Matrix;
use celebprof_core::preprocess::{preprocess_corpus, preprocess_feeds, RetentionReport};
use celebprof_core::{CelebrityLabels, Demographic};

use crate::archive::{
    load, load_corpus, save, save_corpus, save_retention, write_text, ArtifactKind, CleanCorpus, Envelope,
    LabelledDocument, ModelBundle,
};
use crate::cli::{
    Command, ConfigArgs, EvaluateArgs, IngestArgs, PredictArgs, PreprocessArgs, RunArgs, SynthArgs, TrainArgs,
};
use crate::config::{render_experiment, RunConfig};
use crate::error::{write_error, CliError, Result};
use crate::ingest::{export_corpus, ingest_directory, read_feeds, IngestWarning};

pub const CORPUS_FILE: &str = "corpus.json";
pub const CLEAN_FILE: &str = "clean.json";
pub const RETENTION_FILE: &str = "retention.json";
pub const MODELS_DIR: &str = "models";
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_TEXT: &str = "report.txt";
pub const CONFIG_FILE: &str = "config.txt";

/// Runs one parsed command. Progress lines go to `out`, warnings to `warn`.
pub fn dispatch(command: Command, out: &mut dyn Write, warn: &mut dyn Write) -> Result<()> {
    match command {
        Command::Synth(a) => synth(&a, out),
        Command::Ingest(a) => ingest(&a, out, warn),
        Command::Preprocess(a) => preprocess(&a, out),
        Command::Train(a) => train(&a, out),
        Command::Evaluate(a) => evaluate(&a, out),
        Command::Run(a) => run(&a, out, warn),
        Command::Predict(a) => predict(&a, out, warn),
    }
}

fn say(out: &mut dyn Write, line: String) -> Result<()> {
    writeln!(out, "{line}").map_err(|e| CliError::internal(format!("cannot write to output: {e}")))
}

fn warn_rows(warn: &mut dyn Write, warnings: &[IngestWarning]) -> Result<()> {
    for w in warnings {
        let line = serde_json::json!({
            "warning": "row",
            "file": w.file.display().to_string(),
            "row": w.row,
            "message": w.message,
        });
        say(warn, line.to_string())?;
    }
    Ok(())
}

/// Maps core evaluation errors onto exit classes.
pub fn evaluation_error(e: EvaluationError) -> CliError {
    match e {
        EvaluationError::InvalidConfig(_) | EvaluationError::InvalidSplit(_) => CliError::config(e.to_string()),
        _ => CliError::data(e.to_string()),
    }
}

/// Config file, then `--set` overrides.
pub fn load_config(args: &ConfigArgs) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    for item in &args.overrides {
        let (key, value) =
            item.split_once('=').ok_or_else(|| CliError::config(format!("--set expects KEY=VALUE, got `{item}`")))?;
        cfg.set(key.trim(), value.trim())?;
    }
    Ok(cfg)
}

fn seeded(args: &ConfigArgs, seed: u64) -> Result<RunConfig> {
    let cfg = load_config(args)?.with_seed(seed);
    cfg.validate()?;
    Ok(cfg)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| write_error(dir, e))
}

pub fn synth(args: &SynthArgs, out: &mut dyn Write) -> Result<()> {
    let spec = SynthSpec {
        n_celebrities: args.celebrities,
        followers_per_celebrity: args.followers,
        min_tweets: args.min_tweets,
        vocab_size: args.vocab,
        class_signal_strength: args.signal,
        reference_year: args.reference_year,
        ..SynthSpec::new(args.seed)
    };
    spec.validate().map_err(|e| CliError::config(e.to_string()))?;
    let corpus = generate_synthetic_corpus(&spec).map_err(|e| CliError::internal(e.to_string()))?;
    ensure_dir(&args.out)?;
    save_corpus(&args.out.join(CORPUS_FILE), &corpus)?;
    if args.export {
        export_corpus(&corpus, &args.out.join("feeds"), &args.out.join("labels.csv"))?;
    }
    say(
        out,
        format!(
            "synth: {} celebrities, {} followers each, {} tweets -> {}",
            corpus.len(),
            spec.followers_per_celebrity,
            corpus.tweet_count(),
            args.out.join(CORPUS_FILE).display()
        ),
    )
}

fn label_config(cfg: &RunConfig, reference_year: Option<i32>) -> Result<LabelConfig> {
    let mut labels = match (reference_year, cfg.label_config()) {
        (Some(year), Ok(l)) => LabelConfig { reference_year: year, ..l },
        (Some(year), Err(_)) => LabelConfig::new(year),
        (None, found) => found?,
    };
    if let Some(l) = &cfg.labels {
        labels.age_boundary = l.age_boundary;
    }
    Ok(labels)
}

fn required<'a>(flag: Option<&'a PathBuf>, from_config: Option<&'a PathBuf>, name: &str) -> Result<&'a Path> {
    flag.or(from_config).map(PathBuf::as_path).ok_or_else(|| CliError::config(format!("--{name} is required")))
}

fn ingest_corpus(feeds: &Path, labels: &Path, config: &LabelConfig, warn: &mut dyn Write) -> Result<Corpus> {
    if !labels.exists() {
        return Err(CliError::config(format!("labels file {} does not exist", labels.display())).at(labels));
    }
    let (corpus, warnings) = ingest_directory(feeds, labels, config)?;
    warn_rows(warn, &warnings)?;
    Ok(corpus)
}

pub fn ingest(args: &IngestArgs, out: &mut dyn Write, warn: &mut dyn Write) -> Result<()> {
    let cfg = load_config(&args.config)?;
    let feeds = required(args.feeds.as_ref(), cfg.paths.feeds.as_ref(), "feeds")?;
    let labels_path = required(args.labels.as_ref(), cfg.paths.labels.as_ref(), "labels")?;
    let mut labels = label_config(&cfg, args.reference_year)?;
    if let Some(n) = args.followers {
        labels.followers_per_celebrity = n;
    }
    if let Some(b) = &args.age_boundary {
        labels.age_boundary = [AgeBoundary::Lower, AgeBoundary::Upper]
            .into_iter()
            .find(|x| x.name() == b)
            .ok_or_else(|| CliError::config(format!("unknown age boundary `{b}`")))?;
    }
    let corpus = ingest_corpus(feeds, labels_path, &labels, warn)?;
    ensure_dir(&args.out)?;
    save_corpus(&args.out.join(CORPUS_FILE), &corpus)?;
    say(out, format!("ingest: {} celebrities, {} tweets", corpus.len(), corpus.tweet_count()))
}

/// Cleans a corpus into labelled documents plus its retention report.
pub fn clean_corpus(corpus: &Corpus, cfg: &RunConfig) -> (CleanCorpus, RetentionReport) {
    let preprocess = cfg.experiment.preprocess.clone();
    let (docs, retention) = preprocess_corpus(corpus.records(), &preprocess);
    let labels: BTreeMap<&str, CelebrityLabels> =
        corpus.records().iter().map(|r| (r.celebrity_id.as_str(), r.labels)).collect();
    let documents = docs
        .into_iter()
        .map(|document| LabelledDocument { labels: labels[document.celebrity_id.as_str()], document })
        .collect();
    let clean = CleanCorpus {
        corpus_fingerprint: corpus.config_fingerprint().to_string(),
        n_celebrities: corpus.len(),
        preprocess,
        documents,
    };
    (clean, retention)
}

fn write_clean(dir: &Path, clean: &CleanCorpus, retention: &RetentionReport) -> Result<()> {
    let fp = clean.preprocess.fingerprint();
    save(&dir.join(CLEAN_FILE), ArtifactKind::CleanCorpus, &fp, clean)?;
    save_retention(&dir.join(RETENTION_FILE), &fp, retention)
}

fn retention_line(clean: &CleanCorpus, retention: &RetentionReport) -> String {
    format!(
        "preprocess: kept {} of {} celebrities, {} flagged below min_tweets or empty",
        clean.documents.len(),
        clean.n_celebrities,
        retention.flagged().count()
    )
}

pub fn preprocess(args: &PreprocessArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = load_config(&args.config)?;
    cfg.experiment.preprocess.validate().map_err(|e| CliError::config(e.to_string()))?;
    let corpus = load_corpus(&args.corpus)?;
    let (clean, retention) = clean_corpus(&corpus, &cfg);
    ensure_dir(&args.out)?;
    write_clean(&args.out, &clean, &retention)?;
    say(out, retention_line(&clean, &retention))
}

fn load_clean(path: &Path, cfg: &RunConfig) -> Result<CleanCorpus> {
    let envelope: Envelope<CleanCorpus> = load(path, ArtifactKind::CleanCorpus)?;
    let clean = envelope.payload;
    if clean.preprocess != cfg.experiment.preprocess {
        return Err(CliError::config(format!(
            "cleaned archive was produced with preprocess config {}, the current config has {}",
            clean.preprocess.fingerprint(),
            cfg.experiment.preprocess.fingerprint()
        ))
        .at(path));
    }
    Ok(clean)
}

fn plan_for(clean: &CleanCorpus, cfg: &RunConfig) -> Result<ExperimentPlan> {
    ExperimentPlan::from_documents(clean.pairs(), &clean.corpus_fingerprint, clean.n_celebrities, &cfg.experiment)
        .map_err(evaluation_error)
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    if jobs == 0 {
        return Err(CliError::config("--jobs must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::internal(format!("cannot start worker pool: {e}")))
}

/// Fits every cell, at most `jobs` at once. Results come back in grid order.
pub fn fit_all(plan: &ExperimentPlan, jobs: usize) -> Result<Vec<(Demographic, ModelKind, FittedModel)>> {
    let cells = plan.cells();
    thread_pool(jobs)?.install(|| {
        cells.par_iter().map(|&(d, m)| plan.fit(d, m).map(|f| (d, m, f)).map_err(evaluation_error)).collect()
    })
}

fn bundle(plan: &ExperimentPlan, d: Demographic, m: ModelKind, fitted: FittedModel) -> Result<ModelBundle> {
    let data = plan.data_for(d).map_err(evaluation_error)?;
    Ok(ModelBundle {
        demographic: d,
        model: m,
        seed: celebprof_core::evaluation::cell_seed(plan.config.seed, d, m),
        corpus_fingerprint: plan.corpus_fingerprint.clone(),
        preprocess: plan.config.preprocess.clone(),
        features: matches!(fitted, FittedModel::Classical(_)).then(|| data.features.clone()),
        fitted,
    })
}

fn write_models(dir: &Path, plan: &ExperimentPlan, fitted: Vec<(Demographic, ModelKind, FittedModel)>) -> Result<()> {
    let models = dir.join(MODELS_DIR);
    ensure_dir(&models)?;
    let fp = plan.config.fingerprint();
    for (d, m, f) in fitted {
        let bundle = bundle(plan, d, m, f)?;
        save(&models.join(ModelBundle::file_name(d, m)), ArtifactKind::Model, &fp, &bundle)?;
    }
    Ok(())
}

fn dump_features(dir: &Path, plan: &ExperimentPlan) -> Result<()> {
    let features = dir.join("features");
    ensure_dir(&features)?;
    for (d, data) in &plan.data {
        for (side, docs) in [("train", &data.train_docs), ("test", &data.test_docs)] {
            let matrix = data.features.transform(docs).map_err(|e| CliError::data(e.to_string()))?;
            let mut text = String::new();
            matrix.write_sparse_text(&mut text).map_err(|e| CliError::internal(e.to_string()))?;
            write_text(&features.join(format!("{}.{side}.tsv", d.name())), &text)?;
        }
    }
    Ok(())
}

fn write_config(dir: &Path, cfg: &RunConfig) -> Result<()> {
    write_text(&dir.join(CONFIG_FILE), &render_experiment(&cfg.experiment))
}

pub fn train(args: &TrainArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = seeded(&args.config, args.seed)?;
    let clean = load_clean(&args.clean, &cfg)?;
    let plan = plan_for(&clean, &cfg)?;
    let fitted = fit_all(&plan, args.jobs)?;
    let n = fitted.len();
    ensure_dir(&args.out)?;
    write_models(&args.out, &plan, fitted)?;
    write_config(&args.out, &cfg)?;
    if args.dump_features {
        dump_features(&args.out, &plan)?;
    }
    say(out, format!("train: {n} models, config {}", cfg.experiment.fingerprint()))
}

fn write_report(dir: &Path, report: &EvaluationReport) -> Result<()> {
    let fp = &report.header.config_fingerprint;
    save(&dir.join(REPORT_JSON), ArtifactKind::Report, fp, report)?;
    write_text(&dir.join(REPORT_TEXT), &render_text_report(report))
}

pub fn evaluate(args: &EvaluateArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = seeded(&args.config, args.seed)?;
    let clean = load_clean(&args.clean, &cfg)?;
    let plan = plan_for(&clean, &cfg)?;
    let fp = cfg.experiment.fingerprint();
    let mut results = Vec::new();
    for (d, m) in plan.cells() {
        let path = args.models.join(ModelBundle::file_name(d, m));
        let envelope: Envelope<ModelBundle> = load(&path, ArtifactKind::Model)?;
        if envelope.config_fingerprint != fp {
            return Err(CliError::config(format!(
                "model was trained under config {}, the current config is {fp}",
                envelope.config_fingerprint
            ))
            .at(&path));
        }
        let bundle = envelope.payload;
        if bundle.corpus_fingerprint != clean.corpus_fingerprint || bundle.demographic != d || bundle.model != m {
            return Err(CliError::data("model does not belong to this corpus and cell").at(&path));
        }
        results.push(plan.evaluate(d, m, &bundle.fitted).map_err(evaluation_error)?);
    }
    let report = plan.assemble(results).map_err(evaluation_error)?;
    ensure_dir(&args.out)?;
    write_report(&args.out, &report)?;
    say(out, format!("evaluate: {} cells -> {}", report.cells.len(), args.out.join(REPORT_TEXT).display()))
}

type CellOutcome = (Demographic, ModelKind, FittedModel, CellResult);

/// Fits and scores every cell, at most `jobs` at once.
pub fn run_grid(plan: &ExperimentPlan, jobs: usize) -> Result<Vec<CellOutcome>> {
    let cells = plan.cells();
    thread_pool(jobs)?.install(|| {
        cells
            .par_iter()
            .map(|&(d, m)| {
                let fitted = plan.fit(d, m).map_err(evaluation_error)?;
                let result = plan.evaluate(d, m, &fitted).map_err(evaluation_error)?;
                Ok((d, m, fitted, result))
            })
            .collect()
    })
}

pub fn run(args: &RunArgs, out: &mut dyn Write, warn: &mut dyn Write) -> Result<()> {
    let cfg = seeded(&args.config, args.seed)?;
    let dir = required(args.out.as_ref(), cfg.paths.output.as_ref(), "out")?.to_path_buf();
    let corpus_path = args.corpus.as_ref().or(cfg.paths.corpus.as_ref());
    let feeds = args.feeds.as_ref().or(cfg.paths.feeds.as_ref());
    let (corpus, ingested) = match (corpus_path, feeds) {
        (Some(_), Some(_)) => return Err(CliError::config("give either a corpus archive or feeds, not both")),
        (Some(path), None) => (load_corpus(path)?, false),
        (None, Some(feeds)) => {
            let labels = required(args.labels.as_ref(), cfg.paths.labels.as_ref(), "labels")?;
            let label_cfg = label_config(&cfg, args.reference_year)?;
            (ingest_corpus(feeds, labels, &label_cfg, warn)?, true)
        }
        (None, None) => return Err(CliError::config("--corpus or --feeds is required")),
    };
    ensure_dir(&dir)?;
    if ingested {
        save_corpus(&dir.join(CORPUS_FILE), &corpus)?;
    }
    let (clean, retention) = clean_corpus(&corpus, &cfg);
    write_clean(&dir, &clean, &retention)?;
    say(out, retention_line(&clean, &retention))?;
    let plan = plan_for(&clean, &cfg)?;
    if args.dump_features {
        dump_features(&dir, &plan)?;
    }
    let outcomes = run_grid(&plan, args.jobs)?;
    let mut fitted = Vec::with_capacity(outcomes.len());
    let mut results = Vec::with_capacity(outcomes.len());
    for (d, m, f, r) in outcomes {
        fitted.push((d, m, f));
        results.push(r);
    }
    write_models(&dir, &plan, fitted)?;
    let report = plan.assemble(results).map_err(evaluation_error)?;
    write_config(&dir, &cfg)?;
    write_report(&dir, &report)?;
    say(out, format!("run: {} cells -> {}", report.cells.len(), dir.join(REPORT_TEXT).display()))
}

#[derive(Debug, Serialize)]
struct PredictedLabel {
    demographic: Demographic,
    model: ModelKind,
    label: String,
}

#[derive(Debug, Serialize)]
struct Prediction {
    celebrity_id: String,
    retained_tweets: usize,
    labels: Vec<PredictedLabel>,
}

fn celebrity_dirs(feeds: &Path) -> Result<Vec<(String, PathBuf)>> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(feeds)
        .map_err(|e| crate::error::io_error(feeds, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    entries.sort();
    let has_csv = entries.iter().any(|p| p.is_file() && p.extension().and_then(|e| e.to_str()) == Some("csv"));
    let name = |p: &Path| p.file_name().and_then(|s| s.to_str()).unwrap_or("celebrity").to_string();
    if has_csv {
        return Ok(vec![(name(feeds), feeds.to_path_buf())]);
    }
    Ok(entries.into_iter().filter(|p| p.is_dir()).map(|p| (name(&p), p)).collect())
}

fn predict_one(bundle: &ModelBundle, doc: &celebprof_core::CleanDocument) -> Result<String> {
    let docs = std::slice::from_ref(doc);
    let x = match &bundle.features {
        Some(pipeline) => pipeline.transform(docs).map_err(|e| CliError::data(e.to_string()))?.to_dense(),
        None => Matrix::zeros(1, 0),
    };
    let class = bundle.fitted.predict(&x, docs).map_err(CliError::data)?[0];
    bundle
        .fitted
        .label_set()
        .get(class)
        .cloned()
        .ok_or_else(|| CliError::internal(format!("predicted class {class} outside the label set")))
}

pub fn predict(args: &PredictArgs, out: &mut dyn Write, warn: &mut dyn Write) -> Result<()> {
    let bundles: Vec<ModelBundle> = args
        .models
        .iter()
        .map(|p| load::<ModelBundle>(p, ArtifactKind::Model).map(|e| e.payload))
        .collect::<Result<_>>()?;
    if !args.feeds.is_dir() {
        return Err(
            CliError::config(format!("feeds directory {} does not exist", args.feeds.display())).at(&args.feeds)
        );
    }
    let mut lines = String::new();
    for (id, dir) in celebrity_dirs(&args.feeds)? {
        let mut warnings = Vec::new();
        let feeds = read_feeds(&dir, &mut warnings)?;
        warn_rows(warn, &warnings)?;
        let mut prediction = Prediction { celebrity_id: id.clone(), retained_tweets: 0, labels: Vec::new() };
        for bundle in &bundles {
            let (doc, retention) = preprocess_feeds(&id, &feeds, &bundle.preprocess);
            prediction.retained_tweets = retention.feeds.iter().map(|f| f.retained).sum();
            prediction.labels.push(PredictedLabel {
                demographic: bundle.demographic,
                model: bundle.model,
                label: predict_one(bundle, &doc)?,
            });
        }
        lines.push_str(&serde_json::to_string(&prediction).map_err(|e| CliError::internal(e.to_string()))?);
        lines.push('\n');
    }
    match &args.out {
        Some(path) => write_text(path, &lines),
        None => out.write_all(lines.as_bytes()).map_err(|e| CliError::internal(e.to_string())),
    }
}
