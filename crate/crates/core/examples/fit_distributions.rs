//! Draw samples from known distributions and fit them back.
//!
//!     cargo run --example fit_distributions

use metriq::calibrate::{fit_agauss, fit_exponential};
use metriq::distmodel::{AGaussParams, ExpParams};
use metriq::synthgen::{sample_agauss, sample_exponential};

fn main() -> metriq::Result<()> {
    let truth = ExpParams::new(1.0, 50.0)?;
    let samples = sample_exponential(&truth, 10_000, 1)?;
    let fit = fit_exponential(&samples)?;
    println!(
        "shifted exponential  truth c={:.4} λ={:.3}",
        truth.c, truth.lambda
    );
    println!(
        "                     fit   c={:.4} λ={:.3}",
        fit.c, fit.lambda
    );

    let truth = AGaussParams::new(155.228, 50.947, 40.902)?;
    let samples = sample_agauss(&truth, 10_000, 2)?;
    let fit = fit_agauss(&samples)?;
    println!(
        "asymmetric Gaussian  truth μ={:.3} σ1={:.3} σ2={:.3}",
        truth.mu, truth.sigma1, truth.sigma2
    );
    println!(
        "                     start μ={:.3} σ1={:.3} σ2={:.3}  nll {:.2}",
        fit.initial.mu, fit.initial.sigma1, fit.initial.sigma2, fit.initial_nll
    );
    println!(
        "                     fit   μ={:.3} σ1={:.3} σ2={:.3}  nll {:.2}  ({} iterations, converged: {})",
        fit.params.mu, fit.params.sigma1, fit.params.sigma2, fit.nll, fit.iterations, fit.converged
    );
    Ok(())
}
