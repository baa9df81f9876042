use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Language {
    Java,
    Python,
    JavaScript,
    TypeScript,
    #[serde(rename = "other")]
    Other,
}

impl Language {
    pub const ALL: [Language; 5] = [
        Language::Java,
        Language::Python,
        Language::JavaScript,
        Language::TypeScript,
        Language::Other,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Language::Java => "Java",
            Language::Python => "Python",
            Language::JavaScript => "JavaScript",
            Language::TypeScript => "TypeScript",
            Language::Other => "other",
        }
    }

    /// Lowercase name used in file names.
    pub fn slug(&self) -> String {
        self.as_str().to_ascii_lowercase()
    }
}

impl<'de> Deserialize<'de> for Language {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Language {
    type Err = Error;

    /// Case-insensitive; any unrecognized language maps to `Other`.
    fn from_str(s: &str) -> Result<Self, Error> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "java" => Language::Java,
            "python" | "py" => Language::Python,
            "javascript" | "js" => Language::JavaScript,
            "typescript" | "ts" => Language::TypeScript,
            _ => Language::Other,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Dimension {
    Maintainability,
    Reliability,
    Functionality,
}

impl Dimension {
    pub const ALL: [Dimension; 3] = [
        Dimension::Maintainability,
        Dimension::Reliability,
        Dimension::Functionality,
    ];

    pub fn column_name(&self) -> &'static str {
        match self {
            Dimension::Maintainability => "maintainability",
            Dimension::Reliability => "reliability",
            Dimension::Functionality => "functionality",
        }
    }
}

/// Shape of a metric's relationship to quality; fixes the distribution family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    /// More is worse; shifted exponential.
    Monotonic,
    /// Interior optimum; asymmetric Gaussian.
    NonMonotonic,
}

/// Size denominator a raw counter is divided by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalizer {
    Ncloc,
    NclocPlusComments,
    Loc,
    Files,
    Statements,
    /// Already a per-class mean (CK metrics); passes through.
    ClassMean,
    None,
}

/// Where a metric's raw value comes from in a [`super::RepoRecord`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    /// A raw counter column.
    Counter(&'static str),
    /// The `comment_lines` size denominator.
    CommentLines,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MetricDef {
    pub name: &'static str,
    pub label: &'static str,
    pub dimension: Dimension,
    pub family: Family,
    pub normalizer: Normalizer,
    pub source: Source,
    /// Optional raw column holding an already-normalized value that takes
    /// precedence over `source / normalizer`.
    pub prenormalized: Option<&'static str>,
    pub java_only: bool,
}

impl MetricDef {
    pub fn available_for(&self, language: Language) -> bool {
        !self.java_only || language == Language::Java
    }
}

macro_rules! metric {
    ($name:literal, $label:literal, $dim:ident, $fam:ident, $norm:ident, $src:expr, $pre:expr, $java:literal) => {
        MetricDef {
            name: $name,
            label: $label,
            dimension: Dimension::$dim,
            family: Family::$fam,
            normalizer: Normalizer::$norm,
            source: $src,
            prenormalized: $pre,
            java_only: $java,
        }
    };
}

use Source::Counter;

static REGISTRY: [MetricDef; 20] = [
    metric!(
        "cyclomatic_complexity",
        "Cyclomatic Complexity",
        Maintainability,
        NonMonotonic,
        Ncloc,
        Counter("cyclomatic_complexity"),
        None,
        false
    ),
    metric!(
        "file_complexity",
        "File Complexity",
        Maintainability,
        Monotonic,
        Files,
        Counter("cyclomatic_complexity"),
        Some("file_complexity"),
        false
    ),
    metric!(
        "cognitive_complexity",
        "Cognitive Complexity",
        Maintainability,
        NonMonotonic,
        Ncloc,
        Counter("cognitive_complexity"),
        None,
        false
    ),
    metric!(
        "code_smells",
        "Code Smells",
        Maintainability,
        Monotonic,
        Ncloc,
        Counter("code_smells"),
        None,
        false
    ),
    metric!(
        "cbo",
        "Coupling Between Objects",
        Maintainability,
        NonMonotonic,
        ClassMean,
        Counter("cbo"),
        None,
        true
    ),
    metric!(
        "fan_in",
        "Fan-in",
        Maintainability,
        NonMonotonic,
        ClassMean,
        Counter("fan_in"),
        None,
        true
    ),
    metric!(
        "fan_out",
        "Fan-out",
        Maintainability,
        NonMonotonic,
        ClassMean,
        Counter("fan_out"),
        None,
        true
    ),
    metric!(
        "dit",
        "Depth Inheritance Tree",
        Maintainability,
        Monotonic,
        ClassMean,
        Counter("dit"),
        None,
        true
    ),
    metric!(
        "noc",
        "Number of Children",
        Maintainability,
        Monotonic,
        ClassMean,
        Counter("noc"),
        None,
        true
    ),
    metric!(
        "lcom",
        "Lack of Cohesion of Methods",
        Maintainability,
        Monotonic,
        ClassMean,
        Counter("lcom"),
        None,
        true
    ),
    metric!(
        "tcc",
        "Tight Class Cohesion",
        Maintainability,
        NonMonotonic,
        ClassMean,
        Counter("tcc"),
        None,
        true
    ),
    metric!(
        "lcc",
        "Loose Class Cohesion",
        Maintainability,
        NonMonotonic,
        ClassMean,
        Counter("lcc"),
        None,
        true
    ),
    metric!(
        "violations",
        "Total Violations",
        Reliability,
        Monotonic,
        Ncloc,
        Counter("violations"),
        None,
        false
    ),
    metric!(
        "critical_violations",
        "Critical Violations",
        Reliability,
        Monotonic,
        Ncloc,
        Counter("critical_violations"),
        None,
        false
    ),
    metric!(
        "info_violations",
        "Info Violations",
        Reliability,
        Monotonic,
        Ncloc,
        Counter("info_violations"),
        None,
        false
    ),
    metric!(
        "lines_to_cover",
        "Line to Cover",
        Functionality,
        Monotonic,
        Ncloc,
        Counter("lines_to_cover"),
        None,
        false
    ),
    metric!(
        "comment_lines",
        "Comment Lines",
        Functionality,
        NonMonotonic,
        NclocPlusComments,
        Source::CommentLines,
        Some("comment_density"),
        false
    ),
    metric!(
        "duplicated_blocks",
        "Duplicated Blocks",
        Functionality,
        Monotonic,
        Statements,
        Counter("duplicated_blocks"),
        None,
        false
    ),
    metric!(
        "duplicated_files",
        "Duplicated Files",
        Functionality,
        Monotonic,
        Files,
        Counter("duplicated_files"),
        None,
        false
    ),
    metric!(
        "duplicated_lines",
        "Duplicated Lines",
        Functionality,
        Monotonic,
        Loc,
        Counter("duplicated_lines"),
        None,
        false
    ),
];

/// The 20 built-in quality metrics in reporting order.
pub fn registry() -> &'static [MetricDef] {
    &REGISTRY
}

pub fn lookup(name: &str) -> Option<&'static MetricDef> {
    REGISTRY.iter().find(|m| m.name == name)
}

/// Registry metrics available for `language`, in registry order.
pub fn metrics_for(registry: &[MetricDef], language: Language) -> Vec<MetricDef> {
    registry
        .iter()
        .filter(|m| m.available_for(language))
        .copied()
        .collect()
}
