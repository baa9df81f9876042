//! Per-metric scores, importance-derived weights, and weighted aggregation.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::calibrate::ParamSet;
use crate::corpus::{lookup, metrics_for, Dimension, Language, MetricDef, MetricVector};
use crate::error::{Error, Result};

/// Tolerance on the sum of raw importances handed to [`derive_weights`].
pub const RAW_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSet {
    pub language: Language,
    /// Importances as produced by the classifier.
    pub raw: BTreeMap<String, f64>,
    /// Raw importances renormalized to sum to exactly 1; used for the overall score.
    pub global: BTreeMap<String, f64>,
    /// Raw importances renormalized within each dimension.
    pub per_dimension: BTreeMap<Dimension, BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl WeightSet {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

const REFERENCE_IMPORTANCES: &str = include_str!("../fixtures/reference_importances.json");

/// Published importances: `raw` as trained, `within_dimension` as printed (three decimals).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceTable {
    pub language: Language,
    pub raw: BTreeMap<String, f64>,
    pub within_dimension: BTreeMap<String, f64>,
}

pub fn reference_importances() -> Vec<ImportanceTable> {
    serde_json::from_str(REFERENCE_IMPORTANCES).expect("bundled importance fixture is valid")
}

pub fn reference_importances_for(language: Language) -> Option<ImportanceTable> {
    reference_importances()
        .into_iter()
        .find(|t| t.language == language)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreProfile {
    pub repo_id: String,
    pub per_metric: BTreeMap<String, f64>,
    pub per_dimension: BTreeMap<Dimension, f64>,
    pub overall: f64,
    /// Fraction of the language's metrics that were scored.
    pub coverage: f64,
}

/// Scores every present metric of `v` under its fitted distribution.
pub fn score_vector(v: &MetricVector, params: &ParamSet) -> Result<BTreeMap<String, f64>> {
    if v.language != params.language {
        return Err(Error::Config(format!(
            "repository `{}` is {}, parameters are for {}",
            v.repo_id, v.language, params.language
        )));
    }
    v.values
        .iter()
        .map(|(name, &x)| {
            let fit = params
                .get(name)
                .ok_or_else(|| Error::MissingParams(name.clone()))?;
            Ok((name.clone(), fit.score(x)?))
        })
        .collect()
}

fn normalized(weights: &BTreeMap<String, f64>) -> Option<BTreeMap<String, f64>> {
    let total: f64 = weights.values().sum();
    (total > 0.0).then(|| {
        weights
            .iter()
            .map(|(k, w)| (k.clone(), w / total))
            .collect()
    })
}

fn uniform<'a>(names: impl Iterator<Item = &'a String> + Clone) -> BTreeMap<String, f64> {
    let n = names.clone().count() as f64;
    names.map(|k| (k.clone(), 1.0 / n)).collect()
}

/// Builds global and within-dimension weights from raw importances. Metrics
/// of the language absent from `raw` get weight 0; a dimension whose raw
/// total is 0 falls back to uniform weights with a warning.
pub fn derive_weights(
    raw: &BTreeMap<String, f64>,
    registry: &[MetricDef],
    language: Language,
) -> Result<WeightSet> {
    let available = metrics_for(registry, language);
    for (name, &w) in raw {
        if !available.iter().any(|m| m.name == name) {
            return Err(Error::Config(format!(
                "importance given for `{name}`, which is not a {language} metric"
            )));
        }
        if !(w.is_finite() && w >= 0.0) {
            return Err(Error::Config(format!(
                "importance of `{name}` = {w} must be >= 0"
            )));
        }
    }
    let sum: f64 = raw.values().sum();
    if (sum - 1.0).abs() > RAW_SUM_TOLERANCE {
        return Err(Error::Config(format!(
            "raw importances sum to {sum}, expected 1 within {RAW_SUM_TOLERANCE}"
        )));
    }
    let full: BTreeMap<String, f64> = available
        .iter()
        .map(|m| (m.name.to_string(), raw.get(m.name).copied().unwrap_or(0.0)))
        .collect();
    let global = normalized(&full).expect("sum checked above");

    let mut per_dimension = BTreeMap::new();
    let mut warnings = Vec::new();
    for dim in Dimension::ALL {
        let members: BTreeMap<String, f64> = available
            .iter()
            .filter(|m| m.dimension == dim)
            .map(|m| (m.name.to_string(), full[m.name]))
            .collect();
        if members.is_empty() {
            continue;
        }
        let weights = normalized(&members).unwrap_or_else(|| {
            let msg = format!("{dim:?} has zero total importance; using uniform weights");
            log::warn!("{msg}");
            warnings.push(msg);
            uniform(members.keys())
        });
        per_dimension.insert(dim, weights);
    }
    Ok(WeightSet {
        language,
        raw: full,
        global,
        per_dimension,
        warnings,
    })
}

/// Weighted mean of `scores` under `weights`, renormalized over the metrics
/// present. Falls back to a plain mean if every present weight is zero.
fn weighted_mean(scores: &BTreeMap<String, f64>, weights: &BTreeMap<String, f64>) -> Option<f64> {
    let present: Vec<(f64, f64)> = scores
        .iter()
        .filter_map(|(k, &q)| weights.get(k).map(|&w| (w, q)))
        .collect();
    if present.is_empty() {
        return None;
    }
    let total: f64 = present.iter().map(|(w, _)| w).sum();
    let mean = if total > 0.0 {
        present.iter().map(|(w, q)| w * q).sum::<f64>() / total
    } else {
        present.iter().map(|(_, q)| q).sum::<f64>() / present.len() as f64
    };
    let lo = present.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let hi = present
        .iter()
        .map(|p| p.1)
        .fold(f64::NEG_INFINITY, f64::max);
    Some(mean.clamp(lo, hi))
}

/// Aggregates per-metric scores into dimension scores and the overall score.
pub fn overall_score(
    repo_id: &str,
    scores: &BTreeMap<String, f64>,
    w: &WeightSet,
) -> Result<ScoreProfile> {
    if scores.is_empty() {
        return Err(Error::DegenerateData(format!(
            "repository `{repo_id}` has no scored metrics"
        )));
    }
    if let Some(name) = scores.keys().find(|k| !w.global.contains_key(*k)) {
        return Err(Error::Config(format!("metric `{name}` has no weight")));
    }
    let overall = weighted_mean(scores, &w.global).expect("scores checked non-empty");
    let per_dimension = w
        .per_dimension
        .iter()
        .filter_map(|(dim, weights)| weighted_mean(scores, weights).map(|s| (*dim, s)))
        .collect();
    Ok(ScoreProfile {
        repo_id: repo_id.to_string(),
        per_metric: scores.clone(),
        per_dimension,
        overall,
        coverage: scores.len() as f64 / w.global.len() as f64,
    })
}

/// Header of the score CSV for `language`.
pub fn profile_columns(registry: &[MetricDef], language: Language) -> Vec<String> {
    let mut cols = vec!["repo_id".to_string(), "overall".to_string()];
    cols.extend(Dimension::ALL.iter().map(|d| d.column_name().to_string()));
    cols.extend(
        metrics_for(registry, language)
            .iter()
            .map(|m| m.name.to_string()),
    );
    cols.push("coverage".to_string());
    cols
}

pub fn write_profiles(
    profiles: &[ScoreProfile],
    registry: &[MetricDef],
    language: Language,
    out: impl Write,
) -> Result<()> {
    let metrics = metrics_for(registry, language);
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(profile_columns(registry, language))?;
    let fmt = |v: Option<&f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for p in profiles {
        let mut row = vec![p.repo_id.clone(), p.overall.to_string()];
        row.extend(Dimension::ALL.iter().map(|d| fmt(p.per_dimension.get(d))));
        row.extend(metrics.iter().map(|m| fmt(p.per_metric.get(m.name))));
        row.push(p.coverage.to_string());
        writer.write_record(&row)?;
    }
    writer.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

/// Parses a score CSV written by [`write_profiles`], validating ranges.
pub fn read_profiles(input: impl Read) -> Result<Vec<ScoreProfile>> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn {
                source_name: "scores".into(),
                column: name.into(),
            })
    };
    let (id_col, overall_col, coverage_col) = (col("repo_id")?, col("overall")?, col("coverage")?);
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let score = |i: usize| -> Result<Option<f64>> {
            let cell = row.get(i).unwrap_or("").trim();
            if cell.is_empty() {
                return Ok(None);
            }
            match cell.parse::<f64>() {
                Ok(v) if (0.0..=100.0).contains(&v) => Ok(Some(v)),
                _ => Err(Error::Row {
                    line,
                    message: format!("`{}` = {cell:?} is not a score in [0, 100]", &headers[i]),
                }),
            }
        };
        let mut per_metric = BTreeMap::new();
        let mut per_dimension = BTreeMap::new();
        for (i, h) in headers.iter().enumerate() {
            if let Some(dim) = Dimension::ALL.iter().find(|d| d.column_name() == h) {
                if let Some(v) = score(i)? {
                    per_dimension.insert(*dim, v);
                }
            } else if lookup(h).is_some() {
                if let Some(v) = score(i)? {
                    per_metric.insert(h.to_string(), v);
                }
            }
        }
        let overall = score(overall_col)?.ok_or_else(|| Error::Row {
            line,
            message: "missing overall score".into(),
        })?;
        let coverage: f64 =
            row.get(coverage_col)
                .unwrap_or("")
                .parse()
                .map_err(|_| Error::Row {
                    line,
                    message: "coverage is not a number".into(),
                })?;
        out.push(ScoreProfile {
            repo_id: row.get(id_col).unwrap_or("").to_string(),
            per_metric,
            per_dimension,
            overall,
            coverage,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibrate::reference_params_for;
    use crate::corpus::registry;
    use crate::distmodel::{agauss_score, exp_score, Distribution};

    fn map(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn vector(pairs: &[(&str, f64)]) -> MetricVector {
        MetricVector {
            repo_id: "r".into(),
            language: Language::Java,
            values: map(pairs),
            missing: Default::default(),
        }
    }

    fn java_uniform() -> WeightSet {
        let names = metrics_for(registry(), Language::Java);
        let raw = names
            .iter()
            .map(|m| (m.name.to_string(), 1.0 / 20.0))
            .collect();
        derive_weights(&raw, registry(), Language::Java).unwrap()
    }

    #[test]
    fn fixture_spot_scores() {
        let java = reference_params_for(Language::Java).unwrap();
        let s = score_vector(
            &vector(&[("code_smells", 0.5), ("cyclomatic_complexity", 155.228)]),
            &java,
        )
        .unwrap();
        assert_eq!(s["code_smells"], 100.0);
        assert_eq!(s["cyclomatic_complexity"], 100.0);
    }

    #[test]
    fn score_vector_matches_direct_evaluation() {
        let java = reference_params_for(Language::Java).unwrap();
        let pairs: Vec<(&str, f64)> = java.metrics.keys().map(|k| (k.as_str(), 0.37)).collect();
        let s = score_vector(&vector(&pairs), &java).unwrap();
        for (name, fit) in &java.metrics {
            let want = match fit.params.dist {
                Distribution::Exponential(p) => exp_score(0.37, &p).unwrap(),
                Distribution::AsymGauss(p) => agauss_score(0.37, &p).unwrap(),
            };
            assert_eq!(s[name], want, "{name}");
        }
    }

    #[test]
    fn score_vector_missing_params() {
        let mut java = reference_params_for(Language::Java).unwrap();
        java.metrics.remove("dit");
        match score_vector(&vector(&[("dit", 1.0)]), &java) {
            Err(Error::MissingParams(m)) => assert_eq!(m, "dit"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn within_dimension_weight_from_published_importance() {
        let mut raw = map(&[("file_complexity", 0.165), ("cyclomatic_complexity", 0.587)]);
        raw.insert("violations".into(), 0.248);
        let w = derive_weights(&raw, registry(), Language::Java).unwrap();
        let fc = w.per_dimension[&Dimension::Maintainability]["file_complexity"];
        assert!((fc - 0.165 / 0.752).abs() < 1e-12);
        assert!((fc - 0.220).abs() < 0.001);
    }

    #[test]
    fn single_metric_weights() {
        let w =
            derive_weights(&map(&[("code_smells", 1.0)]), registry(), Language::Python).unwrap();
        assert_eq!(w.global["code_smells"], 1.0);
        assert_eq!(
            w.per_dimension[&Dimension::Maintainability]["code_smells"],
            1.0
        );
        let rel = &w.per_dimension[&Dimension::Reliability];
        assert!(rel.values().all(|&v| (v - 1.0 / 3.0).abs() < 1e-15));
        assert_eq!(w.warnings.len(), 2);
    }

    #[test]
    fn uniform_twelve() {
        let raw = metrics_for(registry(), Language::Python)
            .iter()
            .map(|m| (m.name.to_string(), 1.0 / 12.0))
            .collect();
        let w = derive_weights(&raw, registry(), Language::Python).unwrap();
        assert!(w.global.values().all(|&v| (v - 1.0 / 12.0).abs() < 1e-15));
        assert_eq!(w.global.len(), 12);
    }

    #[test]
    fn derive_weights_rejects_bad_input() {
        assert!(derive_weights(&map(&[("cbo", 1.0)]), registry(), Language::Python).is_err());
        assert!(derive_weights(&map(&[("cbo", 0.5)]), registry(), Language::Java).is_err());
    }

    #[test]
    fn overall_midpoint_and_single_metric() {
        let mut w = derive_weights(
            &map(&[("code_smells", 0.5), ("violations", 0.5)]),
            registry(),
            Language::Python,
        )
        .unwrap();
        let p = overall_score(
            "r",
            &map(&[("code_smells", 40.0), ("violations", 60.0)]),
            &w,
        )
        .unwrap();
        assert_eq!(p.overall, 50.0);
        assert_eq!(p.coverage, 2.0 / 12.0);

        let p = overall_score("r", &map(&[("duplicated_lines", 73.0)]), &w).unwrap();
        assert_eq!(p.overall, 73.0);
        w.global.insert("duplicated_lines".into(), 0.0);
        assert_eq!(
            overall_score("r", &map(&[("duplicated_lines", 73.0)]), &w)
                .unwrap()
                .overall,
            73.0
        );

        assert!(overall_score("r", &BTreeMap::new(), &w).is_err());
    }

    #[test]
    fn dimension_scores_are_bounded_by_members() {
        let w = java_uniform();
        let scores = map(&[("code_smells", 10.0), ("cbo", 90.0), ("violations", 55.0)]);
        let p = overall_score("r", &scores, &w).unwrap();
        assert_eq!(p.per_dimension[&Dimension::Maintainability], 50.0);
        assert_eq!(p.per_dimension[&Dimension::Reliability], 55.0);
        assert!(!p.per_dimension.contains_key(&Dimension::Functionality));
    }

    #[test]
    fn profiles_csv_round_trip() {
        let w = java_uniform();
        let p = overall_score("acme", &map(&[("code_smells", 12.5), ("tcc", 99.0)]), &w).unwrap();
        let mut buf = Vec::new();
        write_profiles(
            std::slice::from_ref(&p),
            registry(),
            Language::Java,
            &mut buf,
        )
        .unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "repo_id,overall,maintainability,reliability,functionality,cyclomatic_complexity,"
        ));
        let back = read_profiles(buf.as_slice()).unwrap();
        assert_eq!(back, vec![p]);
    }
}
