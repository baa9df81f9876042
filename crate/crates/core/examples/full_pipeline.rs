//! Every stage end to end on a synthetic corpus, writing the same artifacts
//! as the `metriq` binary: corpus, parameters, weights, model, scores, report.
//!
//!     cargo run --example full_pipeline [out_dir]

use metriq::corpus::Language;
use metriq::pipeline::{run_synthetic_pipeline, RunConfig};
use metriq::synthgen::SynthSpec;

fn main() -> metriq::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "metriq-run".into());
    let spec = SynthSpec::new(Language::JavaScript, 400, 42);
    let a = run_synthetic_pipeline(&spec, dir.as_ref(), &RunConfig::default())?;
    for (what, path) in [
        ("corpus", &a.corpus),
        ("parameters", &a.params),
        ("weights", &a.weights),
        ("model", &a.model),
        ("scores", &a.scores),
        ("report", &a.report),
        ("histogram", &a.histogram),
    ] {
        println!("{what:<11} {}", path.display());
    }
    println!(
        "{}",
        std::fs::read_to_string(&a.report).expect("report written")
    );
    Ok(())
}
