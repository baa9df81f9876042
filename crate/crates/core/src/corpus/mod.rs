//! Repository records, the metric registry, ingestion and size normalization.

mod adapters;
mod csv_io;
mod registry;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use adapters::{ingest_ck_classes, ingest_sonarqube, ColumnMap};
pub use csv_io::{
    ingest_canonical, read_canonical, read_class_rows, write_canonical, write_canonical_file,
    BASE_COLUMNS, CLASS_COLUMNS, OPTIONAL_COLUMNS, SONAR_COLUMNS,
};
pub use registry::{
    lookup, metrics_for, registry, Dimension, Family, Language, MetricDef, Normalizer, Source,
};

pub const DEFAULT_FILTER_PATTERNS: [&str; 9] = [
    "awesome",
    "guide",
    "interview",
    "tutorial",
    "cheatsheet",
    "roadmap",
    "book",
    "course",
    "list of",
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Denominators {
    pub ncloc: u64,
    pub loc: u64,
    pub comment_lines: u64,
    pub files: u64,
    pub statements: u64,
}

/// One repository as delivered by the scanners, before normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepoRecord {
    pub repo_id: String,
    pub language: Language,
    pub stars: u64,
    pub name_text: String,
    pub denominators: Denominators,
    /// Raw counters by column name. Absent keys are missing measurements.
    pub raw: BTreeMap<String, f64>,
}

/// Normalized metric values for one repository; the inputs to scoring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricVector {
    pub repo_id: String,
    pub language: Language,
    pub values: BTreeMap<String, f64>,
    /// Registry metrics with no value: not measured, or unavailable for the language.
    pub missing: BTreeSet<String>,
}

impl MetricVector {
    pub fn get(&self, metric: &str) -> Option<f64> {
        self.values.get(metric).copied()
    }
}

/// Per-class CK measurements. `None` marks an undefined value (CK reports
/// NaN or a negative sentinel for TCC/LCC on classes without method pairs).
#[derive(Debug, Clone, PartialEq)]
pub struct ClassRow {
    pub repo_id: String,
    pub class_name: String,
    pub values: BTreeMap<String, Option<f64>>,
}

/// Averages per-class CK metrics into repository-level values.
///
/// Undefined entries are left out of their metric's mean; a metric undefined
/// for every class is omitted from the result.
pub fn aggregate_class_rows(rows: &[ClassRow]) -> Result<BTreeMap<String, f64>> {
    let first = rows
        .first()
        .ok_or_else(|| Error::DegenerateData("no classes to aggregate".into()))?;
    if let Some(other) = rows.iter().find(|r| r.repo_id != first.repo_id) {
        return Err(Error::DegenerateData(format!(
            "class rows mix repositories `{}` and `{}`",
            first.repo_id, other.repo_id
        )));
    }
    let mut out = BTreeMap::new();
    for metric in CLASS_COLUMNS {
        let defined: Vec<f64> = rows
            .iter()
            .filter_map(|r| r.values.get(metric).copied().flatten())
            .collect();
        if !defined.is_empty() {
            out.insert(
                metric.to_string(),
                defined.iter().sum::<f64>() / defined.len() as f64,
            );
        }
    }
    Ok(out)
}

/// Splits records into (kept, dropped); a record is dropped when any pattern
/// occurs case-insensitively in its `name_text`.
pub fn filter_non_engineering<S: AsRef<str>>(
    records: Vec<RepoRecord>,
    patterns: &[S],
) -> (Vec<RepoRecord>, Vec<RepoRecord>) {
    let lowered: Vec<String> = patterns
        .iter()
        .map(|p| p.as_ref().to_lowercase())
        .filter(|p| !p.is_empty())
        .collect();
    records.into_iter().partition(|r| {
        let text = r.name_text.to_lowercase();
        !lowered.iter().any(|p| text.contains(p.as_str()))
    })
}

fn denominator(record: &RepoRecord, normalizer: Normalizer) -> Option<(&'static str, u64)> {
    let d = &record.denominators;
    match normalizer {
        Normalizer::Ncloc => Some(("ncloc", d.ncloc)),
        Normalizer::NclocPlusComments => Some(("ncloc+comment_lines", d.ncloc + d.comment_lines)),
        Normalizer::Loc => Some(("loc", d.loc)),
        Normalizer::Files => Some(("files", d.files)),
        Normalizer::Statements => Some(("statements", d.statements)),
        Normalizer::ClassMean | Normalizer::None => None,
    }
}

/// Divides each raw counter by its size denominator.
pub fn normalize(record: &RepoRecord, registry: &[MetricDef]) -> Result<MetricVector> {
    let mut values = BTreeMap::new();
    let mut missing = BTreeSet::new();
    for def in registry {
        if !def.available_for(record.language) {
            missing.insert(def.name.to_string());
            continue;
        }
        if let Some(v) = def.prenormalized.and_then(|col| record.raw.get(col)) {
            values.insert(def.name.to_string(), check_value(def.name, *v)?);
            continue;
        }
        let raw = match def.source {
            Source::Counter(col) => record.raw.get(col).copied(),
            Source::CommentLines => Some(record.denominators.comment_lines as f64),
        };
        let Some(raw) = raw else {
            missing.insert(def.name.to_string());
            continue;
        };
        let value = match denominator(record, def.normalizer) {
            Some((name, 0)) => {
                return Err(Error::Normalization {
                    metric: def.name.to_string(),
                    denominator: name.to_string(),
                })
            }
            Some((_, d)) => raw / d as f64,
            None => raw,
        };
        values.insert(def.name.to_string(), check_value(def.name, value)?);
    }
    Ok(MetricVector {
        repo_id: record.repo_id.clone(),
        language: record.language,
        values,
        missing,
    })
}

fn check_value(metric: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(Error::Domain(format!(
            "normalized `{metric}` = {v} is not a finite non-negative value"
        )))
    }
}
