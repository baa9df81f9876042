//! Probability densities for metric populations and the 0-100 score functions built on them.
//!
//! Monotonic metrics ("more is worse") use a shifted exponential with threshold
//! `c` and decay `lambda`. Non-monotonic metrics use an asymmetric Gaussian with
//! peak `mu` and separate left/right widths.

mod erf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use erf::erf;

/// Fitted decay rates below this mark a metric as uninformative.
pub const LAMBDA_FLOOR: f64 = 1e-9;
/// Lower clamp for asymmetric Gaussian widths.
pub const SIGMA_FLOOR: f64 = 1e-9;

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpParams {
    pub c: f64,
    pub lambda: f64,
}

impl ExpParams {
    pub fn new(c: f64, lambda: f64) -> Result<Self> {
        let p = Self { c, lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c >= 0.0) {
            return Err(Error::Domain(format!(
                "exponential threshold c={} must be >= 0",
                self.c
            )));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::Domain(format!(
                "exponential rate lambda={} must be >= 0",
                self.lambda
            )));
        }
        Ok(())
    }

    /// A rate this small carries no information; the score is flat at 100.
    pub fn is_uninformative(&self) -> bool {
        self.lambda < LAMBDA_FLOOR
    }

    pub fn mean(&self) -> f64 {
        self.c + 1.0 / self.lambda
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AGaussParams {
    pub mu: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

impl AGaussParams {
    pub fn new(mu: f64, sigma1: f64, sigma2: f64) -> Result<Self> {
        let p = Self { mu, sigma1, sigma2 };
        p.validate()?;
        Ok(p)
    }

    /// Widths may be stored as zero (a degenerate fit); they are clamped on use.
    pub fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.mu >= 0.0) {
            return Err(Error::Domain(format!("peak mu={} must be >= 0", self.mu)));
        }
        for (name, s) in [("sigma1", self.sigma1), ("sigma2", self.sigma2)] {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::Domain(format!("{name}={s} must be finite and >= 0")));
            }
        }
        Ok(())
    }

    /// Copy with both widths raised to at least [`SIGMA_FLOOR`].
    pub fn clamped(&self) -> Self {
        Self {
            mu: self.mu.max(0.0),
            sigma1: self.sigma1.max(SIGMA_FLOOR),
            sigma2: self.sigma2.max(SIGMA_FLOOR),
        }
    }

    /// Shared peak height `2 / (sqrt(2 pi) (sigma1 + sigma2))`.
    pub fn amplitude(&self) -> f64 {
        let p = self.clamped();
        2.0 / (SQRT_2PI * (p.sigma1 + p.sigma2))
    }

    fn side_sigma(&self, x: f64) -> f64 {
        if x < self.mu {
            self.sigma1
        } else {
            self.sigma2
        }
    }
}

/// Distribution family and its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params")]
pub enum Distribution {
    #[serde(rename = "exp")]
    Exponential(ExpParams),
    #[serde(rename = "agauss")]
    AsymGauss(AGaussParams),
}

/// Fitted parameters plus the `uninformative` flag carried alongside them on disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FittedParams {
    #[serde(flatten)]
    pub dist: Distribution,
    pub uninformative: bool,
}

impl FittedParams {
    pub fn exponential(p: ExpParams) -> Self {
        Self {
            dist: Distribution::Exponential(p),
            uninformative: p.is_uninformative(),
        }
    }

    pub fn asym_gauss(p: AGaussParams) -> Self {
        Self {
            dist: Distribution::AsymGauss(p),
            uninformative: false,
        }
    }

    pub fn family(&self) -> crate::corpus::Family {
        match self.dist {
            Distribution::Exponential(_) => crate::corpus::Family::Monotonic,
            Distribution::AsymGauss(_) => crate::corpus::Family::NonMonotonic,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.dist {
            Distribution::Exponential(p) => {
                p.validate()?;
                if p.is_uninformative() && !self.uninformative {
                    return Err(Error::Domain(format!(
                        "lambda={} is below the floor but the fit is not flagged uninformative",
                        p.lambda
                    )));
                }
                Ok(())
            }
            Distribution::AsymGauss(p) => p.validate(),
        }
    }

    pub fn score(&self, x: f64) -> Result<f64> {
        if self.uninformative {
            check_input(x)?;
            return Ok(100.0);
        }
        match &self.dist {
            Distribution::Exponential(p) => exp_score(x, p),
            Distribution::AsymGauss(p) => agauss_score(x, p),
        }
    }
}

fn check_input(x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("metric value {x} is not finite")));
    }
    if x < 0.0 {
        return Err(Error::Domain(format!("metric value {x} is negative")));
    }
    Ok(())
}

pub fn exp_pdf(x: f64, p: &ExpParams) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("density at non-finite point {x}")));
    }
    if p.is_uninformative() {
        return Err(Error::Domain(
            "exponential density is undefined for uninformative parameters".into(),
        ));
    }
    if x <= p.c {
        Ok(0.0)
    } else {
        Ok(p.lambda * (-p.lambda * (x - p.c)).exp())
    }
}

/// 100 up to the threshold `c`, then exponential decay at rate `lambda`.
pub fn exp_score(x: f64, p: &ExpParams) -> Result<f64> {
    check_input(x)?;
    if p.is_uninformative() || x <= p.c {
        return Ok(100.0);
    }
    Ok(100.0 * (-p.lambda * (x - p.c)).exp())
}

pub fn agauss_pdf(x: f64, p: &AGaussParams) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("density at non-finite point {x}")));
    }
    let q = p.clamped();
    let s = q.side_sigma(x);
    let z = (x - q.mu) / s;
    Ok(q.amplitude() * (-0.5 * z * z).exp())
}

/// `100 (1 - erf(|x - mu| / (sigma_side sqrt 2)))`, peaking at `mu`.
pub fn agauss_score(x: f64, p: &AGaussParams) -> Result<f64> {
    check_input(x)?;
    let q = p.clamped();
    let s = q.side_sigma(x);
    let z = (x - q.mu).abs() / (s * std::f64::consts::SQRT_2);
    if !z.is_finite() {
        // |x - mu| / SIGMA_FLOOR overflowing means "infinitely far" on that side
        return Ok(0.0);
    }
    Ok(100.0 * (1.0 - erf::erf_finite(z)))
}
