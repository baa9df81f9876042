//! Per-language, per-metric distribution fitting.
//!
//! Shifted exponentials use the closed-form maximum-likelihood estimates
//! (`c = min`, `lambda = 1 / (mean - c)`). Asymmetric Gaussians minimize the
//! exact negative log-likelihood with a Nelder-Mead simplex started from the
//! histogram mode and one-sided RMS deviations.

mod simplex;

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Family, Language, MetricDef, MetricVector};
use crate::distmodel::{AGaussParams, Distribution, ExpParams, FittedParams, SIGMA_FLOOR};
use crate::error::{Error, Result};

pub use simplex::{nelder_mead, SimplexOptions, SimplexResult};

pub const MIN_SAMPLES: usize = 30;
pub const LAMBDA_CAP: f64 = 1e9;
pub const MAX_ITERS: usize = 2000;

const REFERENCE_PARAMS: &str = include_str!("../../fixtures/params_paper.json");

#[derive(Debug, Clone, Copy)]
pub struct FitConfig {
    pub min_samples: usize,
    pub lambda_cap: f64,
    pub simplex: SimplexOptions,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            min_samples: MIN_SAMPLES,
            lambda_cap: LAMBDA_CAP,
            simplex: SimplexOptions {
                max_iters: MAX_ITERS,
                rel_tol: 1e-8,
            },
        }
    }
}

/// One fitted metric with its diagnostics, as stored in a parameter file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricFit {
    #[serde(flatten)]
    pub params: FittedParams,
    pub n: usize,
    pub nll: Option<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Omission {
    pub n: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub language: Language,
    pub metrics: BTreeMap<String, MetricFit>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub omitted: BTreeMap<String, Omission>,
}

impl ParamSet {
    pub fn get(&self, metric: &str) -> Option<&FittedParams> {
        self.metrics.get(metric).map(|m| &m.params)
    }

    /// Every entry must name a registry metric available in the language and use its family.
    pub fn validate(&self, registry: &[MetricDef]) -> Result<()> {
        for (name, fit) in &self.metrics {
            let def = registry.iter().find(|m| m.name == name).ok_or_else(|| {
                Error::Config(format!("unknown metric `{name}` in parameter set"))
            })?;
            if !def.available_for(self.language) {
                return Err(Error::Config(format!(
                    "metric `{name}` is not available for {}",
                    self.language
                )));
            }
            if fit.params.family() != def.family {
                return Err(Error::Config(format!(
                    "metric `{name}` has family {:?}, registry expects {:?}",
                    fit.params.family(),
                    def.family
                )));
            }
            fit.params.validate()?;
        }
        Ok(())
    }

    pub fn non_converged(&self) -> Vec<&str> {
        self.metrics
            .iter()
            .filter(|(_, f)| !f.converged)
            .map(|(k, _)| k.as_str())
            .collect()
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Fitted parameters transcribed from the published reference tables, one set per language.
pub fn reference_params() -> Vec<ParamSet> {
    serde_json::from_str(REFERENCE_PARAMS).expect("bundled parameter fixture is valid")
}

pub fn reference_params_for(language: Language) -> Option<ParamSet> {
    reference_params()
        .into_iter()
        .find(|p| p.language == language)
}

fn check_samples(samples: &[f64], min_samples: usize) -> Result<()> {
    if samples.len() < min_samples {
        return Err(Error::InsufficientData {
            n: samples.len(),
            required: min_samples,
        });
    }
    if let Some(bad) = samples.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(Error::Domain(format!(
            "sample {bad} is not a finite non-negative value"
        )));
    }
    Ok(())
}

pub fn fit_exponential(samples: &[f64]) -> Result<ExpParams> {
    fit_exponential_with(samples, &FitConfig::default())
}

/// Shifted-exponential MLE. A spread below `1 / lambda_cap` yields `lambda = 0`,
/// the uninformative marker.
pub fn fit_exponential_with(samples: &[f64], cfg: &FitConfig) -> Result<ExpParams> {
    check_samples(samples, cfg.min_samples)?;
    let c = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let spread = mean - c;
    let lambda = if spread < 1.0 / cfg.lambda_cap {
        0.0
    } else {
        1.0 / spread
    };
    ExpParams::new(c, lambda)
}

/// Negative log-likelihood of the shifted exponential, taking the density at
/// `x = c` as its right limit `lambda`. `None` for uninformative parameters.
pub fn exp_nll(samples: &[f64], p: &ExpParams) -> Option<f64> {
    if p.is_uninformative() {
        return None;
    }
    let mut nll = 0.0;
    for &x in samples {
        if x < p.c {
            return Some(f64::INFINITY);
        }
        nll += -p.lambda.ln() + p.lambda * (x - p.c);
    }
    Some(nll)
}

/// Exact negative log of the product of asymmetric Gaussian densities, summed in log space.
pub fn agauss_nll(samples: &[f64], p: &AGaussParams) -> Result<f64> {
    p.validate()?;
    let q = p.clamped();
    let log_amp = q.amplitude().ln();
    let mut nll = 0.0;
    for &x in samples {
        let s = if x < q.mu { q.sigma1 } else { q.sigma2 };
        let z = (x - q.mu) / s;
        nll += 0.5 * z * z - log_amp;
    }
    Ok(if nll.is_nan() { f64::INFINITY } else { nll })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AGaussFit {
    pub params: AGaussParams,
    pub nll: f64,
    pub initial: AGaussParams,
    pub initial_nll: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Histogram mode (Freedman-Diaconis bin width, leftmost tallest bin's center)
/// and one-sided RMS deviations around it.
pub fn agauss_initial_guess(samples: &[f64]) -> Result<AGaussParams> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
    let range = max - min;
    if !(range > 0.0) {
        return Err(Error::DegenerateData("samples have zero spread".into()));
    }
    let n = sorted.len() as f64;
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let mut width = 2.0 * iqr / n.cbrt();
    if !(width > 0.0) {
        width = range / n.sqrt().ceil();
    }
    let bins = ((range / width).ceil() as usize).clamp(1, 100_000);
    let width = range / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in &sorted {
        let i = (((x - min) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    let top = *counts.iter().max().unwrap();
    let mode_bin = counts.iter().position(|&c| c == top).unwrap();
    let mu = min + (mode_bin as f64 + 0.5) * width;

    let one_sided = |left: bool| {
        let (sum, count) = sorted
            .iter()
            .filter(|&&x| (x < mu) == left)
            .fold((0.0, 0usize), |(s, c), &x| (s + (x - mu).powi(2), c + 1));
        if count == 0 {
            SIGMA_FLOOR
        } else {
            (sum / count as f64).sqrt().max(SIGMA_FLOOR)
        }
    };
    AGaussParams::new(mu, one_sided(true), one_sided(false))
}

fn project(x: &[f64]) -> AGaussParams {
    AGaussParams {
        mu: x[0].max(0.0),
        sigma1: x[1].max(SIGMA_FLOOR),
        sigma2: x[2].max(SIGMA_FLOOR),
    }
}

pub fn fit_agauss(samples: &[f64]) -> Result<AGaussFit> {
    fit_agauss_with(samples, &FitConfig::default())
}

/// Maximum-likelihood asymmetric Gaussian via Nelder-Mead. Bounds are enforced
/// by projecting each trial point onto `mu >= 0`, `sigma >= SIGMA_FLOOR`.
pub fn fit_agauss_with(samples: &[f64], cfg: &FitConfig) -> Result<AGaussFit> {
    check_samples(samples, cfg.min_samples)?;
    let initial = agauss_initial_guess(samples)?;
    let initial_nll = agauss_nll(samples, &initial)?;

    let width = 0.5 * (initial.sigma1 + initial.sigma2);
    let steps = [
        0.1 * width,
        0.1 * initial.sigma1.max(1e-3 * width),
        0.1 * initial.sigma2.max(1e-3 * width),
    ];
    let objective = |x: &[f64]| agauss_nll(samples, &project(x)).unwrap_or(f64::INFINITY);
    let result = nelder_mead(
        objective,
        &[initial.mu, initial.sigma1, initial.sigma2],
        &steps,
        cfg.simplex,
    );
    let params = project(&result.x);
    Ok(AGaussFit {
        params,
        nll: result.value,
        initial,
        initial_nll,
        converged: result.converged,
        iterations: result.iterations,
    })
}

/// Fits every registry metric available for `language`, dispatching on family.
/// Metrics without enough observations (or with degenerate data) are recorded
/// in `omitted` instead.
pub fn fit_all(
    corpus: &[MetricVector],
    registry: &[MetricDef],
    language: Language,
    cfg: &FitConfig,
) -> Result<ParamSet> {
    if corpus.is_empty() {
        return Err(Error::InsufficientData {
            n: 0,
            required: cfg.min_samples,
        });
    }
    if let Some(v) = corpus.iter().find(|v| v.language != language) {
        return Err(Error::Config(format!(
            "repository `{}` is {}, expected a {language} corpus",
            v.repo_id, v.language
        )));
    }
    let mut set = ParamSet {
        language,
        metrics: BTreeMap::new(),
        omitted: BTreeMap::new(),
    };
    for def in registry.iter().filter(|m| m.available_for(language)) {
        let samples: Vec<f64> = corpus.iter().filter_map(|v| v.get(def.name)).collect();
        let n = samples.len();
        if n < cfg.min_samples {
            log::info!("{}: omitted, {n} samples < {}", def.name, cfg.min_samples);
            set.omitted.insert(
                def.name.to_string(),
                Omission {
                    n,
                    reason: format!("fewer than {} samples", cfg.min_samples),
                },
            );
            continue;
        }
        let fit = match def.family {
            Family::Monotonic => {
                let p = fit_exponential_with(&samples, cfg)?;
                MetricFit {
                    params: FittedParams::exponential(p),
                    n,
                    nll: exp_nll(&samples, &p),
                    converged: true,
                }
            }
            Family::NonMonotonic => match fit_agauss_with(&samples, cfg) {
                Ok(f) => MetricFit {
                    params: FittedParams::asym_gauss(f.params),
                    n,
                    nll: Some(f.nll),
                    converged: f.converged,
                },
                Err(Error::DegenerateData(reason)) => {
                    log::warn!("{}: omitted, {reason}", def.name);
                    set.omitted
                        .insert(def.name.to_string(), Omission { n, reason });
                    continue;
                }
                Err(e) => return Err(e),
            },
        };
        set.metrics.insert(def.name.to_string(), fit);
    }
    Ok(set)
}

impl MetricFit {
    pub fn distribution(&self) -> &Distribution {
        &self.params.dist
    }
}
