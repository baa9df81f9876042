use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{ClassRow, Denominators, RepoRecord};
use crate::error::{Error, Result};

/// Identity and size columns, in canonical header order.
pub const BASE_COLUMNS: [&str; 9] = [
    "repo_id",
    "language",
    "stars",
    "name_text",
    "ncloc",
    "loc",
    "comment_lines",
    "files",
    "statements",
];

/// Scanner counters; mandatory columns, cells may be blank.
pub const SONAR_COLUMNS: [&str; 10] = [
    "cyclomatic_complexity",
    "cognitive_complexity",
    "code_smells",
    "violations",
    "critical_violations",
    "info_violations",
    "lines_to_cover",
    "duplicated_blocks",
    "duplicated_files",
    "duplicated_lines",
];

/// CK class metrics (repo-level means); optional columns.
pub const CLASS_COLUMNS: [&str; 8] = [
    "cbo", "fan_in", "fan_out", "dit", "noc", "lcom", "tcc", "lcc",
];

/// Pre-normalized values that override `counter / denominator`.
pub const OPTIONAL_COLUMNS: [&str; 2] = ["file_complexity", "comment_density"];

fn mandatory_columns() -> impl Iterator<Item = &'static str> {
    BASE_COLUMNS.iter().copied().chain(SONAR_COLUMNS)
}

fn raw_columns() -> impl Iterator<Item = &'static str> {
    SONAR_COLUMNS
        .iter()
        .copied()
        .chain(CLASS_COLUMNS.iter().copied())
        .chain(OPTIONAL_COLUMNS.iter().copied())
}

pub fn ingest_canonical(path: impl AsRef<Path>) -> Result<Vec<RepoRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_canonical(file, &path.display().to_string(), None)
}

fn row_error(line: u64, message: impl Into<String>) -> Error {
    Error::Row {
        line,
        message: message.into(),
    }
}

fn parse_count(cell: &str, column: &str, line: u64) -> Result<u64> {
    let v: f64 = cell
        .trim()
        .parse()
        .map_err(|_| row_error(line, format!("`{column}` = {cell:?} is not a number")))?;
    if !v.is_finite() || v < 0.0 {
        return Err(row_error(
            line,
            format!("`{column}` = {cell:?} must be a non-negative count"),
        ));
    }
    if v.fract() != 0.0 || v > u64::MAX as f64 {
        return Err(row_error(
            line,
            format!("`{column}` = {cell:?} must be an integer"),
        ));
    }
    Ok(v as u64)
}

fn parse_measure(cell: &str, column: &str, line: u64) -> Result<Option<f64>> {
    let cell = cell.trim();
    if cell.is_empty() {
        return Ok(None);
    }
    let v: f64 = cell
        .parse()
        .map_err(|_| row_error(line, format!("`{column}` = {cell:?} is not a number")))?;
    if !v.is_finite() || v < 0.0 {
        return Err(row_error(
            line,
            format!("`{column}` = {cell:?} must be finite and non-negative"),
        ));
    }
    Ok(Some(v))
}

fn header_index(
    reader: &mut csv::Reader<impl Read>,
    rename: Option<&BTreeMap<String, String>>,
) -> Result<HashMap<String, usize>> {
    let headers = reader.headers()?.clone();
    let mut index = HashMap::new();
    for (i, h) in headers.iter().enumerate() {
        let h = h.trim();
        let name = rename
            .and_then(|m| m.get(h))
            .cloned()
            .unwrap_or_else(|| h.to_string());
        index.entry(name).or_insert(i);
    }
    Ok(index)
}

fn warn_unknown(index: &HashMap<String, usize>, known: &BTreeSet<&str>, source_name: &str) {
    let mut unknown: Vec<&String> = index
        .keys()
        .filter(|k| !known.contains(k.as_str()))
        .collect();
    unknown.sort();
    for col in unknown {
        log::warn!("{source_name}: ignoring unknown column `{col}`");
    }
}

/// Parses canonical repository CSV. `rename` maps foreign header names onto
/// canonical ones before validation (used by the scanner adapters).
pub fn read_canonical(
    input: impl Read,
    source_name: &str,
    rename: Option<&BTreeMap<String, String>>,
) -> Result<Vec<RepoRecord>> {
    let mut reader = csv::ReaderBuilder::new().flexible(false).from_reader(input);
    let index = header_index(&mut reader, rename)?;
    for col in mandatory_columns() {
        if !index.contains_key(col) {
            return Err(Error::MissingColumn {
                source_name: source_name.to_string(),
                column: col.to_string(),
            });
        }
    }
    let known: BTreeSet<&str> = BASE_COLUMNS.iter().copied().chain(raw_columns()).collect();
    warn_unknown(&index, &known, source_name);

    let mut records = Vec::new();
    let mut seen = BTreeSet::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let cell = |col: &str| row.get(index[col]).unwrap_or("");
        let repo_id = cell("repo_id").trim().to_string();
        if repo_id.is_empty() {
            return Err(row_error(line, "empty repo_id"));
        }
        if !seen.insert(repo_id.clone()) {
            return Err(row_error(line, format!("duplicate repo_id `{repo_id}`")));
        }
        let denominators = Denominators {
            ncloc: parse_count(cell("ncloc"), "ncloc", line)?,
            loc: parse_count(cell("loc"), "loc", line)?,
            comment_lines: parse_count(cell("comment_lines"), "comment_lines", line)?,
            files: parse_count(cell("files"), "files", line)?,
            statements: parse_count(cell("statements"), "statements", line)?,
        };
        let mut raw = BTreeMap::new();
        for col in raw_columns() {
            if let Some(&i) = index.get(col) {
                if let Some(v) = parse_measure(row.get(i).unwrap_or(""), col, line)? {
                    raw.insert(col.to_string(), v);
                }
            }
        }
        records.push(RepoRecord {
            repo_id,
            language: cell("language").parse()?,
            stars: parse_count(cell("stars"), "stars", line)?,
            name_text: cell("name_text").to_string(),
            denominators,
            raw,
        });
    }
    Ok(records)
}

/// Writes canonical CSV. The optional class and pre-normalized columns are
/// emitted only when at least one record carries them.
pub fn write_canonical(records: &[RepoRecord], out: impl Write) -> Result<()> {
    let mut columns: Vec<&str> = mandatory_columns().collect();
    for col in CLASS_COLUMNS.iter().chain(OPTIONAL_COLUMNS.iter()) {
        if records.iter().any(|r| r.raw.contains_key(*col)) {
            columns.push(col);
        }
    }
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(&columns)?;
    for r in records {
        let d = &r.denominators;
        let mut row: Vec<String> = vec![
            r.repo_id.clone(),
            r.language.to_string(),
            r.stars.to_string(),
            r.name_text.clone(),
            d.ncloc.to_string(),
            d.loc.to_string(),
            d.comment_lines.to_string(),
            d.files.to_string(),
            d.statements.to_string(),
        ];
        for col in &columns[BASE_COLUMNS.len()..] {
            row.push(r.raw.get(*col).map(|v| v.to_string()).unwrap_or_default());
        }
        writer.write_record(&row)?;
    }
    writer.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

pub fn write_canonical_file(records: &[RepoRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_canonical(records, std::io::BufWriter::new(file))
}

fn parse_class_value(cell: &str, column: &str, line: u64) -> Result<Option<f64>> {
    let cell = cell.trim();
    if cell.is_empty() || cell.eq_ignore_ascii_case("nan") {
        return Ok(None);
    }
    let v: f64 = cell
        .parse()
        .map_err(|_| row_error(line, format!("`{column}` = {cell:?} is not a number")))?;
    if v < 0.0 {
        // CK writes -1 for cohesion ratios that are undefined on a class
        if matches!(column, "tcc" | "lcc") {
            return Ok(None);
        }
        return Err(row_error(
            line,
            format!("`{column}` = {cell:?} is negative"),
        ));
    }
    Ok(Some(v))
}

/// Parses a per-class CK CSV (`repo_id,class_name,cbo,...`). Metric columns are optional.
pub fn read_class_rows(
    input: impl Read,
    source_name: &str,
    rename: Option<&BTreeMap<String, String>>,
) -> Result<Vec<ClassRow>> {
    let mut reader = csv::Reader::from_reader(input);
    let index = header_index(&mut reader, rename)?;
    for col in ["repo_id", "class_name"] {
        if !index.contains_key(col) {
            return Err(Error::MissingColumn {
                source_name: source_name.to_string(),
                column: col.to_string(),
            });
        }
    }
    let known: BTreeSet<&str> = ["repo_id", "class_name"]
        .into_iter()
        .chain(CLASS_COLUMNS)
        .collect();
    warn_unknown(&index, &known, source_name);

    let mut rows = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let mut values = BTreeMap::new();
        for col in CLASS_COLUMNS {
            if let Some(&i) = index.get(col) {
                values.insert(
                    col.to_string(),
                    parse_class_value(row.get(i).unwrap_or(""), col, line)?,
                );
            }
        }
        rows.push(ClassRow {
            repo_id: row.get(index["repo_id"]).unwrap_or("").trim().to_string(),
            class_name: row.get(index["class_name"]).unwrap_or("").to_string(),
            values,
        });
    }
    Ok(rows)
}
