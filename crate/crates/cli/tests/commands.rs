use std::path::Path;

use celebprof::archive::{load_corpus, ARTIFACT_FORMAT_VERSION};
use celebprof::execute;

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn cli(args: &[&str]) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("celebprof").chain(args.iter().copied());
    let code = execute(argv, &mut out, &mut err);
    Outcome { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const QUICK: [&str; 4] = ["--set", "neural.epochs=3", "--set", "classical.n_trees=10"];

fn small_synth(dir: &Path, seed: &str) {
    let o = cli(&[
        "synth",
        "--seed",
        seed,
        "--celebrities",
        "24",
        "--followers",
        "2",
        "--vocab",
        "200",
        "--signal",
        "1",
        "--export",
        "--out",
        p(dir),
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
}

fn error_record(stderr: &str) -> serde_json::Value {
    let line = stderr.lines().last().expect("an error line");
    serde_json::from_str(line).expect("single-line json")
}

#[test]
fn version_names_formats() {
    let o = cli(&["--version"]);
    assert_eq!(o.code, 0);
    assert!(o.stdout.contains(&format!("artifact format {ARTIFACT_FORMAT_VERSION}")), "{}", o.stdout);
    assert!(o.stdout.contains("corpus format 1"));
}

#[test]
fn synth_at_table_scale() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&[
        "synth",
        "--seed",
        "1",
        "--celebrities",
        "100",
        "--followers",
        "10",
        "--min-tweets",
        "20",
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let corpus = load_corpus(&dir.path().join("corpus.json")).unwrap();
    assert_eq!(corpus.len(), 100);
    for record in corpus.records() {
        assert_eq!(record.feeds.len(), 10);
        assert!(record.feeds.iter().all(|f| f.records.len() >= 20));
    }
}

#[test]
fn seed_is_mandatory() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&["synth", "--out", p(dir.path())]);
    assert_eq!(o.code, 1);
    assert!(error_record(&o.stderr)["message"].as_str().unwrap().contains("--seed"));
}

#[test]
fn missing_labels_file_is_a_config_error_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    small_synth(dir.path(), "2");
    let labels = dir.path().join("absent.csv");
    let o = cli(&[
        "ingest",
        "--feeds",
        p(&dir.path().join("feeds")),
        "--labels",
        p(&labels),
        "--reference-year",
        "2022",
        "--out",
        p(&dir.path().join("i")),
    ]);
    assert_eq!(o.code, 1);
    let record = error_record(&o.stderr);
    assert_eq!(record["error"], "config");
    assert!(record["message"].as_str().unwrap().contains("absent.csv"));
}

#[test]
fn ingest_requires_a_reference_year() {
    let dir = tempfile::tempdir().unwrap();
    small_synth(dir.path(), "2");
    let o = cli(&[
        "ingest",
        "--feeds",
        p(&dir.path().join("feeds")),
        "--labels",
        p(&dir.path().join("labels.csv")),
        "--followers",
        "2",
        "--out",
        p(&dir.path().join("i")),
    ]);
    assert_eq!(o.code, 1);
    assert!(o.stderr.contains("reference_year"));
}

#[test]
fn corrupted_archive_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("corpus.json");
    std::fs::write(&bad, "{\"kind\":").unwrap();
    let o = cli(&["preprocess", "--corpus", p(&bad), "--out", p(&dir.path().join("o"))]);
    assert_eq!(o.code, 2);
    assert_eq!(error_record(&o.stderr)["error"], "data");
}

#[test]
fn step_by_step_matches_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_synth(d, "5");
    let ingest = cli(&[
        "ingest",
        "--feeds",
        p(&d.join("feeds")),
        "--labels",
        p(&d.join("labels.csv")),
        "--reference-year",
        "2022",
        "--followers",
        "2",
        "--out",
        p(&d.join("i")),
    ]);
    assert_eq!(ingest.code, 0, "{}", ingest.stderr);
    let corpus = d.join("i/corpus.json");
    assert_eq!(cli(&["preprocess", "--corpus", p(&corpus), "--out", p(&d.join("p"))]).code, 0);
    assert!(d.join("p/retention.json").exists());
    let clean = d.join("p/clean.json");
    let mut train = vec!["train", "--clean", p(&clean), "--seed", "8", "--jobs", "2", "--out"];
    let t = d.join("t");
    train.push(p(&t));
    train.extend(QUICK);
    assert_eq!(cli(&train).code, 0);
    assert_eq!(std::fs::read_dir(t.join("models")).unwrap().count(), 28);
    let models = t.join("models");
    let e = d.join("e");
    let mut evaluate = vec!["evaluate", "--clean", p(&clean), "--models", p(&models), "--seed", "8", "--out", p(&e)];
    evaluate.extend(QUICK);
    let o = cli(&evaluate);
    assert_eq!(o.code, 0, "{}", o.stderr);

    let r = d.join("r");
    let mut run = vec!["run", "--corpus", p(&corpus), "--seed", "8", "--out", p(&r)];
    run.extend(QUICK);
    assert_eq!(cli(&run).code, 0);
    for file in ["report.json", "report.txt"] {
        assert_eq!(std::fs::read(e.join(file)).unwrap(), std::fs::read(r.join(file)).unwrap(), "{file}");
    }

    // A model trained under another config is refused.
    let mut other = vec!["evaluate", "--clean", p(&clean), "--models", p(&models), "--seed", "9", "--out", p(&e)];
    other.extend(QUICK);
    assert_eq!(cli(&other).code, 1);

    // The report's config reruns the experiment byte for byte.
    let again = d.join("again");
    let report = r.join("report.json");
    let o = cli(&["run", "--config", p(&report), "--corpus", p(&corpus), "--seed", "8", "--out", p(&again)]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert_eq!(std::fs::read(again.join("report.json")).unwrap(), std::fs::read(&report).unwrap());

    let o = cli(&[
        "predict",
        "--model",
        p(&models.join("gender-svm.json")),
        "--model",
        p(&models.join("age-cnn.json")),
        "--feeds",
        p(&d.join("feeds")),
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let lines: Vec<serde_json::Value> = o.stdout.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 24);
    assert_eq!(lines[0]["labels"][0]["demographic"], "gender");
    assert_eq!(lines[0]["labels"][1]["model"], "cnn");

    let one = d.join("feeds/celeb-0003");
    let o = cli(&["predict", "--model", p(&models.join("fame-logreg.json")), "--feeds", p(&one)]);
    assert_eq!(o.code, 0);
    assert_eq!(o.stdout.lines().count(), 1);
    assert!(o.stdout.contains("celeb-0003"));
}

#[test]
fn run_ingests_feeds_and_writes_everything_under_out() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_synth(d, "6");
    let cfg = d.join("run.cfg");
    std::fs::write(
        &cfg,
        format!(
            "models = logreg,svm\n[paths]\nfeeds = {}\nlabels = {}\n[labels]\nreference_year = 2022\n\
             followers_per_celebrity = 2\n",
            p(&d.join("feeds")),
            p(&d.join("labels.csv"))
        ),
    )
    .unwrap();
    let out = d.join("out");
    let o = cli(&["run", "--config", p(&cfg), "--seed", "1", "--out", p(&out), "--dump-features"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    for f in ["corpus.json", "clean.json", "retention.json", "report.json", "report.txt", "config.txt"] {
        assert!(out.join(f).exists(), "{f}");
    }
    assert!(out.join("features/gender.train.tsv").exists());
    let report = std::fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("Logistic Regression") && !report.contains("LSTM"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["payload"]["cells"].as_array().unwrap().len(), 8);
    assert_eq!(json["config_fingerprint"], json["payload"]["header"]["config_fingerprint"]);
}

#[test]
fn conflicting_inputs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    small_synth(dir.path(), "3");
    let corpus = dir.path().join("corpus.json");
    let feeds = dir.path().join("feeds");
    let o = cli(&["run", "--corpus", p(&corpus), "--feeds", p(&feeds), "--seed", "1", "--out", p(dir.path())]);
    assert_eq!(o.code, 1);
    let o = cli(&["run", "--corpus", p(&corpus), "--seed", "1", "--jobs", "0", "--out", p(&dir.path().join("o"))]);
    assert_eq!(o.code, 1);
}
