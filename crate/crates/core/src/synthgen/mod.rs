//! Seeded samplers for both distribution families and a synthetic corpus
//! generator whose star counts depend on latent quality through a known model.

mod rng;

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::calibrate::{reference_params_for, ParamSet};
use crate::corpus::{lookup, Denominators, Language, RepoRecord, Source};
use crate::distmodel::{AGaussParams, Distribution, ExpParams};
use crate::error::{Error, Result};

pub use rng::SplitMix64;

fn draw_exponential(rng: &mut SplitMix64, p: &ExpParams) -> f64 {
    // 1 - u lies in (0, 1], so the log is finite and the draw is >= c
    let u = rng.next_f64();
    p.c - (1.0 - u).ln() / p.lambda
}

fn draw_agauss(rng: &mut SplitMix64, p: &AGaussParams) -> f64 {
    let left_mass = p.sigma1 / (p.sigma1 + p.sigma2);
    loop {
        let left = rng.next_f64() < left_mass;
        let half = rng.next_normal().abs();
        let x = if left {
            p.mu - p.sigma1 * half
        } else {
            p.mu + p.sigma2 * half
        };
        if x >= 0.0 {
            return x;
        }
    }
}

/// `n` draws of `c + Exp(lambda)` by inverse CDF.
pub fn sample_exponential(p: &ExpParams, n: usize, seed: u64) -> Result<Vec<f64>> {
    p.validate()?;
    if p.is_uninformative() {
        return Err(Error::Domain(
            "cannot sample from an uninformative exponential".into(),
        ));
    }
    let mut rng = SplitMix64::new(seed);
    Ok((0..n).map(|_| draw_exponential(&mut rng, p)).collect())
}

/// `n` draws from the asymmetric Gaussian, truncated to `[0, inf)` by rejection.
///
/// A side is picked with probability proportional to its width, then a
/// half-normal of that width is reflected away from `mu`.
pub fn sample_agauss(p: &AGaussParams, n: usize, seed: u64) -> Result<Vec<f64>> {
    p.validate()?;
    let p = p.clamped();
    let mut rng = SplitMix64::new(seed);
    Ok((0..n).map(|_| draw_agauss(&mut rng, &p)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarModel {
    pub base: f64,
    pub beta: f64,
    pub noise_sigma: f64,
}

impl Default for StarModel {
    fn default() -> Self {
        Self {
            base: 10.0,
            beta: 10.0,
            noise_sigma: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub language: Language,
    /// Generator parameters; defaults to the bundled reference set for `language`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamSet>,
    pub n_repos: usize,
    pub seed: u64,
    #[serde(default)]
    pub stars: StarModel,
}

impl SynthSpec {
    pub fn new(language: Language, n_repos: usize, seed: u64) -> Self {
        Self {
            language,
            params: None,
            n_repos,
            seed,
            stars: StarModel::default(),
        }
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_reader(file)?)
    }

    pub fn generator_params(&self) -> Result<ParamSet> {
        match &self.params {
            Some(p) => Ok(p.clone()),
            None => reference_params_for(self.language).ok_or_else(|| {
                Error::Config(format!(
                    "no bundled generator parameters for {}",
                    self.language
                ))
            }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_repos == 0 {
            return Err(Error::Config("n_repos must be >= 1".into()));
        }
        let s = &self.stars;
        if !(s.noise_sigma >= 0.0 && s.noise_sigma.is_finite()) {
            return Err(Error::Config("noise_sigma must be finite and >= 0".into()));
        }
        if !(s.base > 0.0 && s.base.is_finite() && s.beta.is_finite()) {
            return Err(Error::Config(
                "star model base must be > 0 and beta finite".into(),
            ));
        }
        Ok(())
    }
}

/// A synthetic repository plus the latent quality that drove its stars.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthRepo {
    pub record: RepoRecord,
    pub latent: f64,
}

/// Generates `n_repos` records. Metric values are written pre-normalized with
/// unit size denominators, so normalization returns them unchanged.
///
/// Each repository draws from its own stream derived from `(seed, index)`.
pub fn gen_corpus_detailed(spec: &SynthSpec) -> Result<Vec<SynthRepo>> {
    spec.validate()?;
    let params = spec.generator_params()?;
    if params.language != spec.language {
        return Err(Error::Config(format!(
            "generator parameters are for {}, spec asks for {}",
            params.language, spec.language
        )));
    }
    let width = spec.n_repos.to_string().len().max(5);
    let mut out = Vec::with_capacity(spec.n_repos);
    for i in 0..spec.n_repos {
        let mut rng = SplitMix64::derive(spec.seed, i as u64);
        let mut raw = BTreeMap::new();
        let mut score_sum = 0.0;
        let mut scored = 0usize;
        for (name, fit) in &params.metrics {
            let def = lookup(name)
                .ok_or_else(|| Error::Config(format!("unknown metric `{name}` in generator")))?;
            if !def.available_for(spec.language) {
                continue;
            }
            let value = match (&fit.params.dist, fit.params.uninformative) {
                (Distribution::Exponential(p), false) => draw_exponential(&mut rng, p),
                (Distribution::Exponential(p), true) => p.c,
                (Distribution::AsymGauss(p), _) => draw_agauss(&mut rng, &p.clamped()),
            };
            let column = match (def.prenormalized, def.source) {
                (Some(col), _) => col,
                (None, Source::Counter(col)) => col,
                (None, Source::CommentLines) => {
                    unreachable!("comment lines always have an override column")
                }
            };
            raw.insert(column.to_string(), value);
            score_sum += fit.params.score(value)?;
            scored += 1;
        }
        let latent = if scored == 0 {
            0.0
        } else {
            score_sum / scored as f64
        };
        let m = &spec.stars;
        let noise = m.noise_sigma * rng.next_normal();
        let stars = (m.base * (m.beta * latent / 100.0 + noise).exp()).round();
        let stars = if stars.is_finite() {
            stars.clamp(0.0, 1e15) as u64
        } else {
            u64::MAX / 2
        };
        out.push(SynthRepo {
            record: RepoRecord {
                repo_id: format!("synth-{i:0width$}"),
                language: spec.language,
                stars,
                name_text: format!("synthetic {} repository {i}", spec.language),
                denominators: Denominators {
                    ncloc: 1,
                    loc: 1,
                    comment_lines: 1,
                    files: 1,
                    statements: 1,
                },
                raw,
            },
            latent,
        });
    }
    Ok(out)
}

pub fn gen_corpus(spec: &SynthSpec) -> Result<Vec<RepoRecord>> {
    Ok(gen_corpus_detailed(spec)?
        .into_iter()
        .map(|r| r.record)
        .collect())
}
