//! Validation metrics for the quantile classifier and the log-stars regressor,
//! plus overall-score histogram data.
//!
//!     cargo run --example evaluate_model

use metriq::calibrate::reference_params_for;
use metriq::corpus::registry;
use metriq::corpus::Language;
use metriq::evalreport::{auc_roc, confusion_metrics, histogram, r_squared, DEFAULT_THRESHOLD};
use metriq::gbm::{
    make_labels, split_indices, split_train_val, train_gbc, train_gbr, GbmParams, RankedRepo,
};
use metriq::pipeline::{feature_names, feature_row, score_records};
use metriq::scoring::{derive_weights, overall_score, reference_importances_for};
use metriq::synthgen::{gen_corpus, SynthSpec};

fn main() -> metriq::Result<()> {
    let language = Language::TypeScript;
    let records = gen_corpus(&SynthSpec::new(language, 1500, 9))?;
    let params = reference_params_for(language).expect("bundled parameters");
    let scored = score_records(&records, &params)?;
    let names = feature_names(language);
    let x: Vec<Vec<f64>> = scored
        .iter()
        .map(|s| feature_row(&s.scores, &names))
        .collect();

    let ranked: Vec<RankedRepo> = scored
        .iter()
        .zip(&x)
        .map(|(s, f)| RankedRepo {
            repo_id: s.record.repo_id.clone(),
            stars: s.record.stars,
            features: f.clone(),
        })
        .collect();
    let (train, val) = split_train_val(&make_labels(&ranked, 0.2)?, 9)?;
    let clf = train_gbc(&train, &GbmParams::default())?;
    let probs: Vec<f64> = val
        .iter()
        .map(|e| clf.predict_proba(&e.features))
        .collect::<metriq::Result<_>>()?;
    let labels: Vec<u8> = val.iter().map(|e| e.label).collect();
    let cm = confusion_metrics(&probs, &labels, DEFAULT_THRESHOLD)?;
    println!(
        "classifier  accuracy {:.3}  precision {:.3}  recall {:.3}  f1 {:.3}  auc {:.3}",
        cm.accuracy,
        cm.precision,
        cm.recall,
        cm.f1,
        auc_roc(&probs, &labels)?
    );

    let y: Vec<f64> = scored
        .iter()
        .map(|s| (1.0 + s.record.stars as f64).log10())
        .collect();
    let (tr, va) = split_indices(x.len(), 9);
    let reg = train_gbr(
        &tr.iter().map(|&i| x[i].clone()).collect::<Vec<_>>(),
        &tr.iter().map(|&i| y[i]).collect::<Vec<_>>(),
        &GbmParams::default(),
    )?;
    let preds: Vec<f64> = va
        .iter()
        .map(|&i| reg.predict(&x[i]))
        .collect::<metriq::Result<_>>()?;
    let targets: Vec<f64> = va.iter().map(|&i| y[i]).collect();
    println!(
        "regressor   R2 on log10(1+stars) {:.3}",
        r_squared(&preds, &targets)?
    );

    let weights = derive_weights(
        &reference_importances_for(language).unwrap().raw,
        registry(),
        language,
    )?;
    let overall: Vec<f64> = scored
        .iter()
        .map(|s| overall_score(&s.record.repo_id, &s.scores, &weights).map(|p| p.overall))
        .collect::<metriq::Result<_>>()?;
    println!("overall score histogram");
    for b in histogram(&overall, 10)? {
        println!(
            "  [{:5.1}, {:5.1})  {:5}  {}",
            b.bin_lower,
            b.bin_upper,
            b.count,
            "#".repeat(b.count / 10)
        );
    }
    Ok(())
}
