//! End-to-end stages: ingest/filter, fit, train weights, score, evaluate, synth.
//!
//! Every stage writes its declared outputs, re-reads them to check they parse,
//! and leaves a run manifest with content hashes of its inputs and outputs.

mod config;
mod manifest;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use crate::calibrate::{fit_all, FitConfig, ParamSet};
use crate::corpus::{
    filter_non_engineering, ingest_canonical, ingest_ck_classes, ingest_sonarqube, metrics_for,
    normalize, registry, write_canonical_file, ColumnMap, Language, MetricVector, RepoRecord,
};
use crate::error::{Error, Result};
use crate::evalreport::{
    auc_roc, confusion_metrics, histogram, r_squared, write_histogram, EvalReport,
    DEFAULT_THRESHOLD,
};
use crate::gbm::{
    make_labels, split_indices, split_train_val, train_gbc, train_gbr, GbmModel, GbmParams,
    RankedRepo,
};
use crate::scoring::{
    derive_weights, overall_score, read_profiles, score_vector, write_profiles, ScoreProfile,
    WeightSet,
};
use crate::synthgen::{gen_corpus, SynthSpec};

pub use config::{RunConfig, CONFIG_ENV};
pub use manifest::{manifest_path_for, sha256_file, write_manifest, FileDigest, RunManifest};

/// Score assigned to a missing metric when building classifier features.
pub const MISSING_FEATURE_SCORE: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Adapter {
    Canonical,
    SonarQube,
    Ck,
}

impl std::str::FromStr for Adapter {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "canonical" => Ok(Adapter::Canonical),
            "sonarqube" => Ok(Adapter::SonarQube),
            "ck" => Ok(Adapter::Ck),
            other => Err(Error::Config(format!("unknown adapter `{other}`"))),
        }
    }
}

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "input file {} does not exist",
            path.display()
        )))
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(BufWriter::new(
        File::create(path).map_err(|e| Error::io(path, e))?,
    ))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    use std::io::Write;
    let mut w = create(path)?;
    w.write_all(text.as_bytes())
        .and_then(|_| w.write_all(b"\n"))
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub struct IngestOptions<'a> {
    pub adapter: Adapter,
    pub input: &'a Path,
    pub output: &'a Path,
    /// Canonical corpus that CK class means are merged into.
    pub base: Option<&'a Path>,
    pub column_map: Option<&'a Path>,
    pub filter_patterns: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestSummary {
    pub kept: usize,
    pub dropped: Vec<String>,
}

/// Reads scanner output, drops non-engineering repositories, writes canonical CSV.
pub fn cmd_ingest(opts: &IngestOptions) -> Result<IngestSummary> {
    require_file(opts.input)?;
    let map = match opts.column_map {
        Some(p) => ColumnMap::from_file(p)?,
        None => ColumnMap::default(),
    };
    let records = match opts.adapter {
        Adapter::Canonical => ingest_canonical(opts.input)?,
        Adapter::SonarQube => ingest_sonarqube(opts.input, &map)?,
        Adapter::Ck => {
            let base = match opts.base {
                Some(b) => ingest_canonical(b)?,
                None => Vec::new(),
            };
            ingest_ck_classes(opts.input, &map, base)?
        }
    };
    let (kept, dropped) = filter_non_engineering(records, &opts.filter_patterns);
    for r in &dropped {
        log::info!("dropped non-engineering repository `{}`", r.repo_id);
    }
    write_canonical_file(&kept, opts.output)?;
    let reread = ingest_canonical(opts.output)?;
    if reread != kept {
        return Err(Error::Numerical(
            "canonical output did not re-ingest identically".into(),
        ));
    }
    let mut inputs = vec![opts.input];
    inputs.extend(opts.base);
    write_manifest(
        &manifest_path_for(opts.output),
        "ingest",
        None,
        &inputs,
        &[opts.output],
    )?;
    Ok(IngestSummary {
        kept: kept.len(),
        dropped: dropped.into_iter().map(|r| r.repo_id).collect(),
    })
}

fn language_vectors(records: &[RepoRecord], language: Language) -> Result<Vec<MetricVector>> {
    records
        .iter()
        .filter(|r| r.language == language)
        .map(|r| normalize(r, registry()))
        .collect()
}

pub struct FitOptions<'a> {
    pub corpus: &'a Path,
    pub language: Language,
    pub output: &'a Path,
    pub config: FitConfig,
    /// Fail when any asymmetric Gaussian fit did not converge.
    pub strict: bool,
}

pub fn cmd_fit(opts: &FitOptions) -> Result<ParamSet> {
    require_file(opts.corpus)?;
    let records = ingest_canonical(opts.corpus)?;
    let vectors = language_vectors(&records, opts.language)?;
    let set = fit_all(&vectors, registry(), opts.language, &opts.config)?;
    let stalled = set.non_converged();
    if !stalled.is_empty() {
        if opts.strict {
            return Err(Error::Numerical(format!(
                "fits did not converge: {}",
                stalled.join(", ")
            )));
        }
        log::warn!("fits did not converge: {}", stalled.join(", "));
    }
    write_text(opts.output, &set.to_json_string()?)?;
    let reread = ParamSet::from_json_file(opts.output)?;
    reread.validate(registry())?;
    write_manifest(
        &manifest_path_for(opts.output),
        "fit",
        None,
        &[opts.corpus],
        &[opts.output],
    )?;
    Ok(set)
}

/// A repository of the parameter set's language with its per-metric scores.
pub struct ScoredRepo {
    pub record: RepoRecord,
    pub scores: BTreeMap<String, f64>,
}

/// Scores every repository of `params.language` in `records`.
pub fn score_records(records: &[RepoRecord], params: &ParamSet) -> Result<Vec<ScoredRepo>> {
    records
        .iter()
        .filter(|r| r.language == params.language)
        .map(|r| {
            let v = normalize(r, registry())?;
            Ok(ScoredRepo {
                record: r.clone(),
                scores: score_vector(&v, params)?,
            })
        })
        .collect()
}

/// Feature column names for `language`, in registry order.
pub fn feature_names(language: Language) -> Vec<String> {
    metrics_for(registry(), language)
        .iter()
        .map(|m| m.name.to_string())
        .collect()
}

/// Score vector in `names` order with missing metrics imputed.
pub fn feature_row(scores: &BTreeMap<String, f64>, names: &[String]) -> Vec<f64> {
    names
        .iter()
        .map(|n| scores.get(n).copied().unwrap_or(MISSING_FEATURE_SCORE))
        .collect()
}

/// Quantile labels and the stratified split shared by training and evaluation.
fn labeled_split(
    scored: &[ScoredRepo],
    names: &[String],
    q: f64,
    seed: u64,
) -> Result<(
    Vec<crate::gbm::LabeledExample>,
    Vec<crate::gbm::LabeledExample>,
)> {
    let ranked: Vec<RankedRepo> = scored
        .iter()
        .map(|s| RankedRepo {
            repo_id: s.record.repo_id.clone(),
            stars: s.record.stars,
            features: feature_row(&s.scores, names),
        })
        .collect();
    let labeled = make_labels(&ranked, q)?;
    split_train_val(&labeled, seed)
}

pub struct TrainOptions<'a> {
    pub corpus: &'a Path,
    pub params: &'a Path,
    pub q: f64,
    pub seed: u64,
    pub gbm: GbmParams,
    pub output_weights: &'a Path,
    pub output_model: &'a Path,
}

/// Trains the quantile classifier and turns its feature importances into weights.
pub fn cmd_train_weights(opts: &TrainOptions) -> Result<(WeightSet, GbmModel)> {
    require_file(opts.corpus)?;
    require_file(opts.params)?;
    let params = ParamSet::from_json_file(opts.params)?;
    params.validate(registry())?;
    let records = ingest_canonical(opts.corpus)?;
    let scored = score_records(&records, &params)?;
    let names = feature_names(params.language);
    let (train, _) = labeled_split(&scored, &names, opts.q, opts.seed)?;
    let gbm = GbmParams {
        seed: opts.seed,
        ..opts.gbm
    };
    let mut model = train_gbc(&train, &gbm)?;
    model.feature_names = names.clone();
    let importances = model.feature_importances()?;
    let raw: BTreeMap<String, f64> = names.into_iter().zip(importances).collect();
    let weights = derive_weights(&raw, registry(), params.language)?;

    write_text(opts.output_weights, &weights.to_json_string()?)?;
    write_text(opts.output_model, &model.to_json_string()?)?;
    WeightSet::from_json_file(opts.output_weights)?;
    GbmModel::from_json_file(opts.output_model)?;
    write_manifest(
        &manifest_path_for(opts.output_weights),
        "train-weights",
        Some(opts.seed),
        &[opts.corpus, opts.params],
        &[opts.output_weights, opts.output_model],
    )?;
    Ok((weights, model))
}

fn profiles_for(scored: &[ScoredRepo], weights: &WeightSet) -> Result<Vec<ScoreProfile>> {
    scored
        .iter()
        .map(|s| overall_score(&s.record.repo_id, &s.scores, weights))
        .collect()
}

pub struct ScoreOptions<'a> {
    pub corpus: &'a Path,
    pub params: &'a Path,
    pub weights: &'a Path,
    pub output: &'a Path,
}

pub fn cmd_score(opts: &ScoreOptions) -> Result<Vec<ScoreProfile>> {
    for p in [opts.corpus, opts.params, opts.weights] {
        require_file(p)?;
    }
    let params = ParamSet::from_json_file(opts.params)?;
    params.validate(registry())?;
    let weights = WeightSet::from_json_file(opts.weights)?;
    if weights.language != params.language {
        return Err(Error::Config(format!(
            "weights are for {}, parameters for {}",
            weights.language, params.language
        )));
    }
    let records = ingest_canonical(opts.corpus)?;
    let profiles = profiles_for(&score_records(&records, &params)?, &weights)?;
    let mut out = create(opts.output)?;
    write_profiles(&profiles, registry(), params.language, &mut out)?;
    drop(out);
    let file = File::open(opts.output).map_err(|e| Error::io(opts.output, e))?;
    read_profiles(file)?;
    write_manifest(
        &manifest_path_for(opts.output),
        "score",
        None,
        &[opts.corpus, opts.params, opts.weights],
        &[opts.output],
    )?;
    Ok(profiles)
}

pub struct EvaluateOptions<'a> {
    pub corpus: &'a Path,
    pub params: &'a Path,
    pub weights: &'a Path,
    pub seed: u64,
    pub outdir: &'a Path,
    pub bins: usize,
    pub q: f64,
    pub gbm: GbmParams,
}

/// Validation metrics of the quantile classifier and the star regressor, plus
/// an overall-score histogram. Writes `report.json` and `hist_<language>.csv`.
pub fn cmd_evaluate(opts: &EvaluateOptions) -> Result<EvalReport> {
    for p in [opts.corpus, opts.params, opts.weights] {
        require_file(p)?;
    }
    let params = ParamSet::from_json_file(opts.params)?;
    params.validate(registry())?;
    let weights = WeightSet::from_json_file(opts.weights)?;
    let records = ingest_canonical(opts.corpus)?;
    let scored = score_records(&records, &params)?;
    let names = feature_names(params.language);
    let gbm = GbmParams {
        seed: opts.seed,
        ..opts.gbm
    };

    let (train, val) = labeled_split(&scored, &names, opts.q, opts.seed)?;
    let clf = train_gbc(&train, &gbm)?;
    let probs: Vec<f64> = val
        .iter()
        .map(|e| clf.predict_proba(&e.features))
        .collect::<Result<_>>()?;
    let labels: Vec<u8> = val.iter().map(|e| e.label).collect();
    let cm = confusion_metrics(&probs, &labels, DEFAULT_THRESHOLD)?;
    let auc = auc_roc(&probs, &labels)?;

    let x: Vec<Vec<f64>> = scored
        .iter()
        .map(|s| feature_row(&s.scores, &names))
        .collect();
    let y: Vec<f64> = scored
        .iter()
        .map(|s| (1.0 + s.record.stars as f64).log10())
        .collect();
    let (tr, va) = split_indices(x.len(), opts.seed);
    let pick = |idx: &[usize], v: &[f64]| idx.iter().map(|&i| v[i]).collect::<Vec<f64>>();
    let x_train: Vec<Vec<f64>> = tr.iter().map(|&i| x[i].clone()).collect();
    let reg = train_gbr(&x_train, &pick(&tr, &y), &gbm)?;
    let preds: Vec<f64> = va
        .iter()
        .map(|&i| reg.predict(&x[i]))
        .collect::<Result<_>>()?;
    let r2 = match r_squared(&preds, &pick(&va, &y)) {
        Ok(v) => Some(v),
        Err(Error::UndefinedR2 | Error::InsufficientData { .. }) => {
            log::warn!("validation R2 is undefined");
            None
        }
        Err(e) => return Err(e),
    };

    let report = EvalReport {
        language: params.language,
        accuracy: cm.accuracy,
        precision: cm.precision,
        recall: cm.recall,
        f1: cm.f1,
        auc_roc: auc,
        r2,
        n_train: train.len(),
        n_val: val.len(),
        threshold: DEFAULT_THRESHOLD,
        seed: opts.seed,
        precision_undefined: cm.precision_undefined,
        recall_undefined: cm.recall_undefined,
    };

    let overall: Vec<f64> = profiles_for(&scored, &weights)?
        .iter()
        .map(|p| p.overall)
        .collect();
    let hist = histogram(&overall, opts.bins)?;

    let report_path = opts.outdir.join("report.json");
    let hist_path = opts
        .outdir
        .join(format!("hist_{}.csv", params.language.slug()));
    write_text(&report_path, &serde_json::to_string_pretty(&report)?)?;
    let mut out = create(&hist_path)?;
    write_histogram(&hist, &mut out)?;
    drop(out);

    let reread: EvalReport =
        serde_json::from_reader(File::open(&report_path).map_err(|e| Error::io(&report_path, e))?)?;
    if reread != report {
        return Err(Error::Numerical(
            "report did not re-read identically".into(),
        ));
    }
    let mut reader = csv::Reader::from_path(&hist_path)?;
    let counted: usize = reader
        .deserialize::<crate::evalreport::HistogramBin>()
        .map(|b| b.map(|b| b.count))
        .sum::<std::result::Result<usize, _>>()?;
    if counted != overall.len() {
        return Err(Error::Numerical("histogram counts do not match".into()));
    }
    write_manifest(
        &opts.outdir.join("manifest.json"),
        "evaluate",
        Some(opts.seed),
        &[opts.corpus, opts.params, opts.weights],
        &[&report_path, &hist_path],
    )?;
    Ok(report)
}

pub fn cmd_synth(spec_path: &Path, output: &Path) -> Result<Vec<RepoRecord>> {
    require_file(spec_path)?;
    let spec = SynthSpec::from_json_file(spec_path)?;
    let records = gen_corpus(&spec)?;
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    write_canonical_file(&records, output)?;
    if ingest_canonical(output)? != records {
        return Err(Error::Numerical(
            "synthetic corpus did not re-ingest identically".into(),
        ));
    }
    write_manifest(
        &manifest_path_for(output),
        "synth",
        Some(spec.seed),
        &[spec_path],
        &[output],
    )?;
    Ok(records)
}

/// Paths of the artifacts a full `synth -> fit -> train-weights -> score -> evaluate` run produces.
#[derive(Debug, Clone)]
pub struct PipelineArtifacts {
    pub corpus: PathBuf,
    pub params: PathBuf,
    pub weights: PathBuf,
    pub model: PathBuf,
    pub scores: PathBuf,
    pub report: PathBuf,
    pub histogram: PathBuf,
}

/// Runs every stage on a synthetic corpus inside `dir`.
pub fn run_synthetic_pipeline(
    spec: &SynthSpec,
    dir: &Path,
    cfg: &RunConfig,
) -> Result<PipelineArtifacts> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let spec_path = dir.join("spec.json");
    write_text(&spec_path, &serde_json::to_string_pretty(spec)?)?;
    let a = PipelineArtifacts {
        corpus: dir.join("corpus.csv"),
        params: dir.join("params.json"),
        weights: dir.join("weights.json"),
        model: dir.join("model.json"),
        scores: dir.join("scores.csv"),
        report: dir.join("eval").join("report.json"),
        histogram: dir
            .join("eval")
            .join(format!("hist_{}.csv", spec.language.slug())),
    };
    cmd_synth(&spec_path, &a.corpus)?;
    let fit_cfg = FitConfig {
        min_samples: cfg.min_samples.unwrap_or(crate::calibrate::MIN_SAMPLES),
        ..FitConfig::default()
    };
    cmd_fit(&FitOptions {
        corpus: &a.corpus,
        language: spec.language,
        output: &a.params,
        config: fit_cfg,
        strict: cfg.strict(),
    })?;
    cmd_train_weights(&TrainOptions {
        corpus: &a.corpus,
        params: &a.params,
        q: cfg.q(),
        seed: cfg.seed(),
        gbm: cfg.gbm(),
        output_weights: &a.weights,
        output_model: &a.model,
    })?;
    cmd_score(&ScoreOptions {
        corpus: &a.corpus,
        params: &a.params,
        weights: &a.weights,
        output: &a.scores,
    })?;
    cmd_evaluate(&EvaluateOptions {
        corpus: &a.corpus,
        params: &a.params,
        weights: &a.weights,
        seed: cfg.seed(),
        outdir: &dir.join("eval"),
        bins: cfg.bins(),
        q: cfg.q(),
        gbm: cfg.gbm(),
    })?;
    Ok(a)
}
