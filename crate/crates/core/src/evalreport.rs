//! Classification and regression quality measures, plus score histograms.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::Language;
use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when precision had no predicted positives and was reported as 0.
    pub precision_undefined: bool,
    /// Set when recall had no actual positives and was reported as 0.
    pub recall_undefined: bool,
}

/// Accuracy, precision, recall and F1 with `prob >= threshold` predicting class 1.
pub fn confusion_metrics(probs: &[f64], labels: &[u8], threshold: f64) -> Result<ConfusionMetrics> {
    if probs.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            got: probs.len(),
        });
    }
    if probs.is_empty() {
        return Err(Error::InsufficientData { n: 0, required: 1 });
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0usize, 0usize, 0usize, 0usize);
    for (&p, &c) in probs.iter().zip(labels) {
        match (p >= threshold, c == 1) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(ConfusionMetrics {
        accuracy: ratio(tp + tn, probs.len()),
        precision,
        recall,
        f1,
        precision_undefined: tp + fp == 0,
        recall_undefined: tp + fn_ == 0,
    })
}

/// Area under the ROC curve in Mann-Whitney form:
/// `(concordant + 0.5 * tied) / (n_pos * n_neg)`, computed from mid-ranks.
pub fn auc_roc(probs: &[f64], labels: &[u8]) -> Result<f64> {
    if probs.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            got: probs.len(),
        });
    }
    let n_pos = labels.iter().filter(|&&c| c == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| probs[a].total_cmp(&probs[b]));
    // twice the rank sum of the positives keeps mid-ranks integral
    let mut doubled_rank_sum: u64 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && probs[order[j + 1]] == probs[order[i]] {
            j += 1;
        }
        let doubled_mid = (i + 1 + j + 1) as u64; // 2 * average 1-based rank
        let positives = order[i..=j].iter().filter(|&&k| labels[k] == 1).count() as u64;
        doubled_rank_sum += doubled_mid * positives;
        i = j + 1;
    }
    let n_pos = n_pos as u64;
    let doubled_u = doubled_rank_sum - n_pos * (n_pos + 1);
    Ok(doubled_u as f64 / 2.0 / (n_pos * n_neg as u64) as f64)
}

/// Coefficient of determination `1 - SS_res / SS_tot`.
pub fn r_squared(preds: &[f64], targets: &[f64]) -> Result<f64> {
    if preds.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            expected: targets.len(),
            got: preds.len(),
        });
    }
    if targets.len() < 2 {
        return Err(Error::InsufficientData {
            n: targets.len(),
            required: 2,
        });
    }
    let mean = targets.iter().sum::<f64>() / targets.len() as f64;
    let ss_tot: f64 = targets.iter().map(|t| (t - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::UndefinedR2);
    }
    let ss_res: f64 = preds
        .iter()
        .zip(targets)
        .map(|(p, t)| (t - p).powi(2))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub bin_lower: f64,
    pub bin_upper: f64,
    pub count: usize,
}

/// Equal-width bins over [0, 100]; the last bin is closed so a score of 100 is counted.
pub fn histogram(scores: &[f64], bins: usize) -> Result<Vec<HistogramBin>> {
    if bins == 0 {
        return Err(Error::Config("histogram needs at least one bin".into()));
    }
    let width = 100.0 / bins as f64;
    let mut out: Vec<HistogramBin> = (0..bins)
        .map(|i| HistogramBin {
            bin_lower: i as f64 * width,
            bin_upper: if i + 1 == bins {
                100.0
            } else {
                (i + 1) as f64 * width
            },
            count: 0,
        })
        .collect();
    for &s in scores {
        let i = ((s.clamp(0.0, 100.0) / width) as usize).min(bins - 1);
        out[i].count += 1;
    }
    Ok(out)
}

pub fn write_histogram(hist: &[HistogramBin], out: impl Write) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for bin in hist {
        writer.serialize(bin)?;
    }
    writer.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub language: Language,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc_roc: f64,
    /// Validation R2 of the star regressor; `None` when the targets are constant.
    pub r2: Option<f64>,
    pub n_train: usize,
    pub n_val: usize,
    pub threshold: f64,
    pub seed: u64,
    pub precision_undefined: bool,
    pub recall_undefined: bool,
}
