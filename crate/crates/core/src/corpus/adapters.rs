//! Scanner adapters: rename SonarQube / CK export headers onto canonical
//! column names through an editable mapping table.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    aggregate_class_rows, read_canonical, read_class_rows, ClassRow, Language, RepoRecord,
};
use crate::error::{Error, Result};

const BUNDLED_MAP: &str = include_str!("../../fixtures/column_map.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMap {
    pub sonarqube: BTreeMap<String, String>,
    pub ck: BTreeMap<String, String>,
}

impl Default for ColumnMap {
    fn default() -> Self {
        serde_json::from_str(BUNDLED_MAP).expect("bundled column map is valid JSON")
    }
}

impl ColumnMap {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_reader(file)?)
    }
}

/// Reads a SonarQube measures export (one row per project) into canonical records.
/// Stars and language must be joined in by the caller as `stars` / `language` columns.
pub fn ingest_sonarqube(path: impl AsRef<Path>, map: &ColumnMap) -> Result<Vec<RepoRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_canonical(file, &path.display().to_string(), Some(&map.sonarqube))
}

/// Reads per-class CK output, averages it per repository and merges the means
/// into `base`. Repositories absent from `base` get a skeleton Java record.
pub fn ingest_ck_classes(
    path: impl AsRef<Path>,
    map: &ColumnMap,
    base: Vec<RepoRecord>,
) -> Result<Vec<RepoRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let rows = read_class_rows(file, &path.display().to_string(), Some(&map.ck))?;

    let mut by_repo: BTreeMap<String, Vec<ClassRow>> = BTreeMap::new();
    for row in rows {
        by_repo.entry(row.repo_id.clone()).or_default().push(row);
    }

    let mut records = base;
    for (repo_id, rows) in by_repo {
        let means = aggregate_class_rows(&rows)?;
        let pos = records.iter().position(|r| r.repo_id == repo_id);
        let record = match pos {
            Some(i) => &mut records[i],
            None => {
                records.push(RepoRecord {
                    repo_id: repo_id.clone(),
                    language: Language::Java,
                    stars: 0,
                    name_text: String::new(),
                    denominators: Default::default(),
                    raw: BTreeMap::new(),
                });
                records.last_mut().unwrap()
            }
        };
        record.raw.extend(means);
    }
    Ok(records)
}
