//! Score a few hand-written Java repositories with the bundled reference
//! parameters and importance weights.
//!
//!     cargo run --example score_with_reference_params

use std::collections::BTreeMap;

use metriq::calibrate::reference_params_for;
use metriq::corpus::{normalize, registry, Denominators, Language, RepoRecord};
use metriq::scoring::{derive_weights, overall_score, reference_importances_for, score_vector};

fn repo(id: &str, ncloc: u64, files: u64, counters: &[(&str, f64)]) -> RepoRecord {
    RepoRecord {
        repo_id: id.into(),
        language: Language::Java,
        stars: 0,
        name_text: id.into(),
        denominators: Denominators {
            ncloc,
            loc: ncloc * 13 / 10,
            comment_lines: ncloc / 8,
            files,
            statements: ncloc / 2,
        },
        raw: counters.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
    }
}

fn main() -> metriq::Result<()> {
    let params = reference_params_for(Language::Java).expect("bundled Java parameters");
    let importances = reference_importances_for(Language::Java).expect("bundled Java importances");
    let weights = derive_weights(&importances.raw, registry(), Language::Java)?;

    // The reference fits are on their published scale, so counters are chosen to land
    // inside it. `file_complexity` is given pre-normalized rather than derived.
    let repos = [
        repo(
            "tidy/service",
            1_000,
            40,
            &[
                ("cyclomatic_complexity", 155_000.0),
                ("file_complexity", 1.2),
                ("cognitive_complexity", 60_000.0),
                ("code_smells", 1_100.0),
                ("violations", 1_050.0),
                ("critical_violations", 5.0),
                ("comment_lines", 20.0),
            ],
        ),
        repo(
            "tangled/monolith",
            1_000,
            10,
            &[
                ("cyclomatic_complexity", 400_000.0),
                ("file_complexity", 9.0),
                ("cognitive_complexity", 300_000.0),
                ("code_smells", 1_400.0),
                ("violations", 1_400.0),
                ("critical_violations", 90.0),
                ("comment_lines", 2.0),
            ],
        ),
    ];

    for r in &repos {
        let v = normalize(r, registry())?;
        let scores = score_vector(&v, &params)?;
        let profile = overall_score(&r.repo_id, &scores, &weights)?;
        println!(
            "{}  overall {:.1}  coverage {:.2}",
            r.repo_id, profile.overall, profile.coverage
        );
        for (dim, s) in &profile.per_dimension {
            println!("  {:<16} {s:6.1}", dim.column_name());
        }
        let by_metric: BTreeMap<_, _> = scores
            .iter()
            .map(|(k, s)| (k.as_str(), (v.values[k], *s)))
            .collect();
        for (name, (x, s)) in by_metric {
            println!("    {name:<24} x={x:<12.4} score={s:6.1}");
        }
    }
    Ok(())
}
