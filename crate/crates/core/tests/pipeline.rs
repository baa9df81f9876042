//! End-to-end runs of the `metriq` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use metriq::calibrate::{reference_params_for, ParamSet};
use metriq::corpus::{ingest_canonical, metrics_for, registry, Language};
use metriq::evalreport::EvalReport;
use metriq::pipeline::RunManifest;
use metriq::scoring::WeightSet;
use metriq::synthgen::SynthSpec;

fn metriq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metriq"))
        .args(args)
        .env_remove("METRIQ_CONFIG")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = metriq(args);
    assert!(
        out.status.success(),
        "metriq {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

struct Run {
    corpus: PathBuf,
    params: PathBuf,
    weights: PathBuf,
    model: PathBuf,
    scores: PathBuf,
    eval: PathBuf,
}

fn full_pipeline(dir: &Path, language: Language, n: usize, seed: u64) -> Run {
    let spec = dir.join("spec.json");
    fs::write(
        &spec,
        serde_json::to_string(&SynthSpec::new(language, n, seed)).unwrap(),
    )
    .unwrap();
    let r = Run {
        corpus: dir.join("corpus.csv"),
        params: dir.join("params.json"),
        weights: dir.join("weights.json"),
        model: dir.join("model.json"),
        scores: dir.join("scores.csv"),
        eval: dir.join("eval"),
    };
    ok(&["synth", "--spec", p(&spec), "--output", p(&r.corpus)]);
    ok(&[
        "fit",
        "--corpus",
        p(&r.corpus),
        "--language",
        language.as_str(),
        "--output",
        p(&r.params),
    ]);
    ok(&[
        "train-weights",
        "--corpus",
        p(&r.corpus),
        "--params",
        p(&r.params),
        "--q",
        "0.2",
        "--seed",
        "42",
        "--output-weights",
        p(&r.weights),
        "--output-model",
        p(&r.model),
    ]);
    ok(&[
        "score",
        "--corpus",
        p(&r.corpus),
        "--params",
        p(&r.params),
        "--weights",
        p(&r.weights),
        "--output",
        p(&r.scores),
    ]);
    ok(&[
        "evaluate",
        "--corpus",
        p(&r.corpus),
        "--params",
        p(&r.params),
        "--weights",
        p(&r.weights),
        "--seed",
        "42",
        "--outdir",
        p(&r.eval),
        "--bins",
        "20",
    ]);
    r
}

#[test]
fn full_pipeline_produces_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let r = full_pipeline(dir.path(), Language::Java, 200, 42);

    let params = ParamSet::from_json_file(&r.params).unwrap();
    assert_eq!(params.metrics.len(), 20);
    let weights = WeightSet::from_json_file(&r.weights).unwrap();
    assert!((weights.global.values().sum::<f64>() - 1.0).abs() < 1e-9);
    let report: EvalReport =
        serde_json::from_slice(&fs::read(r.eval.join("report.json")).unwrap()).unwrap();
    assert!(report.auc_roc >= 0.9, "AUC {}", report.auc_roc);
    assert_eq!(report.n_train + report.n_val, 80);

    let hist = fs::read_to_string(r.eval.join("hist_java.csv")).unwrap();
    assert!(hist.starts_with("bin_lower,bin_upper,count\n"));
    assert_eq!(hist.lines().count(), 21);
    let scores = fs::read_to_string(&r.scores).unwrap();
    assert!(scores.starts_with("repo_id,overall,maintainability,reliability,functionality,"));
    assert_eq!(scores.lines().count(), 201);

    for out in [&r.corpus, &r.params, &r.weights, &r.scores] {
        let m: RunManifest = serde_json::from_slice(
            &fs::read(out.with_extension(format!(
                "{}.manifest.json",
                out.extension().unwrap().to_str().unwrap()
            )))
            .unwrap(),
        )
        .unwrap();
        assert!(!m.outputs.is_empty() && m.outputs.iter().all(|d| d.sha256.len() == 64));
    }
    assert!(r.eval.join("manifest.json").is_file());
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = full_pipeline(a.path(), Language::Python, 200, 8);
    let rb = full_pipeline(b.path(), Language::Python, 200, 8);
    for (x, y) in [
        (&ra.corpus, &rb.corpus),
        (&ra.params, &rb.params),
        (&ra.weights, &rb.weights),
        (&ra.model, &rb.model),
        (&ra.scores, &rb.scores),
        (&ra.eval.join("report.json"), &rb.eval.join("report.json")),
        (
            &ra.eval.join("hist_python.csv"),
            &rb.eval.join("hist_python.csv"),
        ),
    ] {
        assert_eq!(
            fs::read(x).unwrap(),
            fs::read(y).unwrap(),
            "{}",
            x.display()
        );
    }

    // Evaluating again in place reproduces the report.
    let before = fs::read(ra.eval.join("report.json")).unwrap();
    ok(&[
        "evaluate",
        "--corpus",
        p(&ra.corpus),
        "--params",
        p(&ra.params),
        "--weights",
        p(&ra.weights),
        "--seed",
        "42",
        "--outdir",
        p(&ra.eval),
    ]);
    assert_eq!(before, fs::read(ra.eval.join("report.json")).unwrap());
}

#[test]
fn fit_covers_every_language_metric() {
    let dir = tempfile::tempdir().unwrap();
    for language in [Language::Java, Language::JavaScript, Language::TypeScript] {
        let spec = dir.path().join("spec.json");
        let corpus = dir.path().join("c.csv");
        let params = dir.path().join("p.json");
        fs::write(
            &spec,
            serde_json::to_string(&SynthSpec::new(language, 120, 1)).unwrap(),
        )
        .unwrap();
        ok(&["synth", "--spec", p(&spec), "--output", p(&corpus)]);
        ok(&[
            "fit",
            "--corpus",
            p(&corpus),
            "--language",
            language.as_str(),
            "--output",
            p(&params),
        ]);
        let set = ParamSet::from_json_file(&params).unwrap();
        assert_eq!(set.metrics.len(), metrics_for(registry(), language).len());
    }
}

#[test]
fn config_file_supplies_paths_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let r = full_pipeline(dir.path(), Language::Java, 100, 5);
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        serde_json::json!({
            "language": "java",
            "corpus": r.corpus,
            "params": r.params,
            "weights": r.weights,
            "output_dir": dir.path().join("from_config"),
            "seed": 42,
            "bins": 20
        })
        .to_string(),
    )
    .unwrap();
    ok(&["--config", p(&cfg), "evaluate"]);
    assert_eq!(
        fs::read(dir.path().join("from_config/report.json")).unwrap(),
        fs::read(r.eval.join("report.json")).unwrap()
    );

    let out = Command::new(env!("CARGO_BIN_EXE_metriq"))
        .args(["evaluate", "--bins", "5"])
        .env("METRIQ_CONFIG", &cfg)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let hist = fs::read_to_string(dir.path().join("from_config/hist_java.csv")).unwrap();
    assert_eq!(hist.lines().count(), 6);
}

#[test]
fn ingest_filters_and_maps_scanner_columns() {
    let dir = tempfile::tempdir().unwrap();
    let sonar = dir.path().join("sonar.csv");
    fs::write(
        &sonar,
        "project_key,language,stars,description,ncloc,lines,comment_lines,files,statements,complexity,cognitive_complexity,code_smells,violations,critical_violations,info_violations,lines_to_cover,duplicated_blocks,duplicated_files,duplicated_lines\n\
         acme/engine,java,900,fast engine,1000,1300,100,20,400,150,90,12,30,2,3,500,4,2,60\n\
         someone/JavaGuide,java,50000,JavaGuide: a guide for Java interviews,500,600,50,10,200,40,20,5,6,1,1,100,1,1,10\n",
    )
    .unwrap();
    let canonical = dir.path().join("canonical.csv");
    ok(&[
        "ingest",
        "--adapter",
        "sonarqube",
        "--input",
        p(&sonar),
        "--output",
        p(&canonical),
    ]);
    let records = ingest_canonical(&canonical).unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0].repo_id, "acme/engine");
    assert_eq!(records[0].denominators.loc, 1300);
    assert_eq!(records[0].raw["cyclomatic_complexity"], 150.0);

    let ck = dir.path().join("ck.csv");
    fs::write(
        &ck,
        "project,class,cbo,fanin,fanout,dit,noc,lcom,tcc,lcc\n\
         acme/engine,A,4,1,2,1,0,3,0.5,0.6\n\
         acme/engine,B,10,3,4,3,2,5,NaN,0.2\n",
    )
    .unwrap();
    let merged = dir.path().join("merged.csv");
    ok(&[
        "ingest",
        "--adapter",
        "ck",
        "--input",
        p(&ck),
        "--base",
        p(&canonical),
        "--output",
        p(&merged),
    ]);
    let records = ingest_canonical(&merged).unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0].raw["cbo"], 7.0);
    assert_eq!(records[0].raw["fan_in"], 2.0);
    assert_eq!(records[0].raw["tcc"], 0.5);
    assert_eq!(records[0].raw["cyclomatic_complexity"], 150.0);
}

#[test]
fn inputs_are_not_modified() {
    let dir = tempfile::tempdir().unwrap();
    let r = full_pipeline(dir.path(), Language::TypeScript, 100, 9);
    let before: Vec<Vec<u8>> = [&r.corpus, &r.params, &r.weights]
        .iter()
        .map(|f| fs::read(f).unwrap())
        .collect();
    ok(&[
        "score",
        "--corpus",
        p(&r.corpus),
        "--params",
        p(&r.params),
        "--weights",
        p(&r.weights),
        "--output",
        p(&dir.path().join("s2.csv")),
    ]);
    let after: Vec<Vec<u8>> = [&r.corpus, &r.params, &r.weights]
        .iter()
        .map(|f| fs::read(f).unwrap())
        .collect();
    assert_eq!(before, after);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    // Usage errors.
    assert_eq!(metriq(&["fit", "--bogus"]).status.code(), Some(1));
    assert_eq!(metriq(&["nonsense"]).status.code(), Some(1));
    let missing = metriq(&[
        "fit",
        "--corpus",
        p(&d.join("nope.csv")),
        "--language",
        "java",
        "--output",
        p(&d.join("o.json")),
    ]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("nope.csv"));

    // Schema errors name the offending column.
    let bad = d.join("bad.csv");
    fs::write(&bad, "repo_id,language,stars\nx,java,3\n").unwrap();
    let out = metriq(&[
        "fit",
        "--corpus",
        p(&bad),
        "--language",
        "java",
        "--output",
        p(&d.join("o.json")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("name_text"));

    // Constant features: the classifier finds no split to turn into weights.
    let params = d.join("params.json");
    fs::write(
        &params,
        reference_params_for(Language::Python)
            .unwrap()
            .to_json_string()
            .unwrap(),
    )
    .unwrap();
    let flat = d.join("flat.csv");
    let mut csv = String::from(
        "repo_id,language,stars,name_text,ncloc,loc,comment_lines,files,statements,cyclomatic_complexity,cognitive_complexity,code_smells,violations,critical_violations,info_violations,lines_to_cover,duplicated_blocks,duplicated_files,duplicated_lines\n",
    );
    for i in 0..50 {
        csv.push_str(&format!(
            "r{i:02},python,{},x,100,120,10,5,50,10,5,1,1,0,0,10,0,0,0\n",
            i * 7
        ));
    }
    fs::write(&flat, csv).unwrap();
    let out = metriq(&[
        "train-weights",
        "--corpus",
        p(&flat),
        "--params",
        p(&params),
        "--output-weights",
        p(&d.join("w.json")),
        "--output-model",
        p(&d.join("m.json")),
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    // Out-of-range quantile is a configuration error.
    let out = metriq(&[
        "train-weights",
        "--corpus",
        p(&flat),
        "--params",
        p(&params),
        "--q",
        "0.7",
        "--output-weights",
        p(&d.join("w.json")),
        "--output-model",
        p(&d.join("m.json")),
    ]);
    assert_eq!(out.status.code(), Some(1));
}
