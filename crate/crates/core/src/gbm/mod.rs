//! Gradient-boosted regression trees.
//!
//! The classifier minimizes binomial log-loss: each round fits a least-squares
//! tree to the residuals `c - p` and replaces leaf outputs with Newton steps
//! `sum(r) / sum(p (1 - p))`. The regressor uses squared loss with mean leaves.
//! Split search is exact and deterministic, and there is no subsampling, so a
//! model is a pure function of its training data and hyperparameters.

mod labels;
mod tree;

use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use labels::{make_labels, split_indices, split_train_val, LabeledExample, RankedRepo};
pub use tree::{Node, RegressionTree};

use tree::{LeafRule, TreeBuilder};

/// Raw scores are clamped to this magnitude before the sigmoid.
pub const RAW_SCORE_CLAMP: f64 = 36.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbmParams {
    pub n_trees: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Recorded in the model for provenance; training itself draws no randomness.
    pub seed: u64,
}

impl Default for GbmParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            learning_rate: 0.1,
            max_depth: 3,
            min_leaf: 5,
            seed: 0,
        }
    }
}

impl GbmParams {
    fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::Config(format!(
                "learning rate {} must lie in (0, 1]",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Classifier,
    Regressor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbmModel {
    pub kind: ModelKind,
    /// Column names of the feature vector, when the caller supplied them.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub feature_names: Vec<String>,
    pub f0: f64,
    pub eta: f64,
    pub n_features: usize,
    pub params: GbmParams,
    pub trees: Vec<RegressionTree>,
    /// Training loss after the prior and after each round (`trees.len() + 1` entries).
    pub train_loss: Vec<f64>,
}

fn sigmoid(f: f64) -> f64 {
    let f = f.clamp(-RAW_SCORE_CLAMP, RAW_SCORE_CLAMP);
    1.0 / (1.0 + (-f).exp())
}

fn log_loss(labels: &[f64], raw: &[f64]) -> f64 {
    let total: f64 = labels
        .iter()
        .zip(raw)
        .map(|(&c, &f)| {
            // log(1 + e^f) - c f, evaluated stably
            let softplus = if f > 0.0 {
                f + (-f).exp().ln_1p()
            } else {
                f.exp().ln_1p()
            };
            softplus - c * f
        })
        .sum();
    total / labels.len() as f64
}

fn squared_loss(targets: &[f64], raw: &[f64]) -> f64 {
    targets
        .iter()
        .zip(raw)
        .map(|(y, f)| (y - f).powi(2))
        .sum::<f64>()
        / targets.len() as f64
}

fn check_features(x: &[Vec<f64>]) -> Result<usize> {
    let width = x.first().map_or(0, |r| r.len());
    for row in x {
        if row.len() != width {
            return Err(Error::DimensionMismatch {
                expected: width,
                got: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("feature values must be finite".into()));
        }
    }
    Ok(width)
}

pub fn train_gbc(train: &[LabeledExample], params: &GbmParams) -> Result<GbmModel> {
    params.validate()?;
    let x: Vec<Vec<f64>> = train.iter().map(|e| e.features.clone()).collect();
    let y: Vec<f64> = train.iter().map(|e| f64::from(e.label)).collect();
    let n_features = check_features(&x)?;
    let n1 = y.iter().filter(|&&c| c == 1.0).count();
    let n0 = y.len() - n1;
    if n1 == 0 || n0 == 0 {
        return Err(Error::SingleClass);
    }
    let f0 = (n1 as f64 / n0 as f64).ln();
    let mut raw = vec![f0; y.len()];
    let mut model = GbmModel {
        kind: ModelKind::Classifier,
        feature_names: Vec::new(),
        f0,
        eta: params.learning_rate,
        n_features,
        params: *params,
        trees: Vec::with_capacity(params.n_trees),
        train_loss: vec![log_loss(&y, &raw)],
    };
    for _ in 0..params.n_trees {
        let p: Vec<f64> = raw.iter().map(|&f| sigmoid(f)).collect();
        let residual: Vec<f64> = y.iter().zip(&p).map(|(c, p)| c - p).collect();
        let hessian: Vec<f64> = p.iter().map(|p| p * (1.0 - p)).collect();
        let tree = TreeBuilder {
            x: &x,
            residual: &residual,
            leaf: LeafRule::Newton(&hessian),
            max_depth: params.max_depth,
            min_leaf: params.min_leaf,
        }
        .build();
        for (f, row) in raw.iter_mut().zip(&x) {
            *f += params.learning_rate * tree.predict(row);
        }
        model.trees.push(tree);
        model.train_loss.push(log_loss(&y, &raw));
    }
    Ok(model)
}

pub fn train_gbr(x: &[Vec<f64>], y: &[f64], params: &GbmParams) -> Result<GbmModel> {
    params.validate()?;
    if x.is_empty() {
        return Err(Error::InsufficientData { n: 0, required: 1 });
    }
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("regression targets must be finite".into()));
    }
    let n_features = check_features(x)?;
    let f0 = y.iter().sum::<f64>() / y.len() as f64;
    let mut raw = vec![f0; y.len()];
    let mut model = GbmModel {
        kind: ModelKind::Regressor,
        feature_names: Vec::new(),
        f0,
        eta: params.learning_rate,
        n_features,
        params: *params,
        trees: Vec::with_capacity(params.n_trees),
        train_loss: vec![squared_loss(y, &raw)],
    };
    for _ in 0..params.n_trees {
        let residual: Vec<f64> = y.iter().zip(&raw).map(|(t, f)| t - f).collect();
        let tree = TreeBuilder {
            x,
            residual: &residual,
            leaf: LeafRule::Mean,
            max_depth: params.max_depth,
            min_leaf: params.min_leaf,
        }
        .build();
        for (f, row) in raw.iter_mut().zip(x) {
            *f += params.learning_rate * tree.predict(row);
        }
        model.trees.push(tree);
        model.train_loss.push(squared_loss(y, &raw));
    }
    Ok(model)
}

impl GbmModel {
    /// `f0 + eta * sum(tree outputs)`.
    pub fn predict_raw(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: x.len(),
            });
        }
        Ok(self.f0 + self.eta * self.trees.iter().map(|t| t.predict(x)).sum::<f64>())
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        match self.kind {
            ModelKind::Classifier => self.predict_proba(x),
            ModelKind::Regressor => self.predict_raw(x),
        }
    }

    /// Probability of class 1; always strictly inside (0, 1).
    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        Ok(sigmoid(self.predict_raw(x)?))
    }

    /// Total split gain per feature, normalized to sum to 1.
    pub fn feature_importances(&self) -> Result<Vec<f64>> {
        let mut gains = vec![0.0; self.n_features];
        for tree in &self.trees {
            for (feature, gain) in tree.splits() {
                gains[feature] += gain;
            }
        }
        let total: f64 = gains.iter().sum();
        if !(total > 0.0) {
            return Err(Error::NoSplits);
        }
        Ok(gains.into_iter().map(|g| g / total).collect())
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
    }
}

pub fn predict_proba(model: &GbmModel, x: &[f64]) -> Result<f64> {
    model.predict_proba(x)
}

pub fn feature_importances(model: &GbmModel) -> Result<Vec<f64>> {
    model.feature_importances()
}
