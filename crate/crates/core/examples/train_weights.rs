//! Learn metric weights from a synthetic corpus: quintile labels on stars,
//! a boosted classifier on per-metric scores, importances as weights.
//!
//!     cargo run --example train_weights [n_repos]

use metriq::calibrate::reference_params_for;
use metriq::corpus::{registry, Language};
use metriq::gbm::{make_labels, split_train_val, train_gbc, GbmParams, RankedRepo};
use metriq::pipeline::{feature_names, feature_row, score_records};
use metriq::scoring::derive_weights;
use metriq::synthgen::{gen_corpus, SynthSpec};

fn main() -> metriq::Result<()> {
    let n: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(2000);
    let records = gen_corpus(&SynthSpec::new(Language::Python, n, 42))?;
    let params = reference_params_for(Language::Python).expect("bundled Python parameters");
    let names = feature_names(Language::Python);

    let ranked: Vec<RankedRepo> = score_records(&records, &params)?
        .into_iter()
        .map(|s| RankedRepo {
            repo_id: s.record.repo_id,
            stars: s.record.stars,
            features: feature_row(&s.scores, &names),
        })
        .collect();
    let (train, val) = split_train_val(&make_labels(&ranked, 0.2)?, 42)?;
    let model = train_gbc(&train, &GbmParams::default())?;
    println!(
        "{} training / {} validation examples, loss {:.4} -> {:.4}",
        train.len(),
        val.len(),
        model.train_loss[0],
        model.train_loss[model.train_loss.len() - 1]
    );

    let raw = names
        .iter()
        .cloned()
        .zip(model.feature_importances()?)
        .collect();
    let weights = derive_weights(&raw, registry(), Language::Python)?;
    for (dim, members) in &weights.per_dimension {
        println!("{}", dim.column_name());
        for (name, w) in members {
            println!("  {name:<24} {w:.3} ({:.3})", weights.raw[name]);
        }
    }
    for w in &weights.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
