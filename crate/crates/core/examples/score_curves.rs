//! Tabulate both score functions, including the degenerate reference fits
//! (an uninformative exponential and a zero right width).
//!
//!     cargo run --example score_curves

use metriq::calibrate::reference_params_for;
use metriq::corpus::Language;

fn main() -> metriq::Result<()> {
    let java = reference_params_for(Language::Java).expect("bundled Java parameters");
    let python = reference_params_for(Language::Python).expect("bundled Python parameters");
    let curves = [
        (
            "Java code_smells",
            java.get("code_smells").unwrap(),
            1.0,
            1.2,
        ),
        (
            "Java cyclomatic_complexity",
            java.get("cyclomatic_complexity").unwrap(),
            0.0,
            400.0,
        ),
        (
            "Java lines_to_cover",
            java.get("lines_to_cover").unwrap(),
            0.0,
            10.0,
        ),
        (
            "Python cognitive_complexity",
            python.get("cognitive_complexity").unwrap(),
            0.0,
            250.0,
        ),
    ];
    for (label, fit, lo, hi) in curves {
        println!("{label}  {:?}", fit.dist);
        for i in 0..=10 {
            let x = lo + (hi - lo) * f64::from(i) / 10.0;
            let s = fit.score(x)?;
            println!(
                "  x={x:<10.4} {s:7.3} {}",
                "*".repeat((s / 2.5).round() as usize)
            );
        }
    }
    Ok(())
}
