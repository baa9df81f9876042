//! Generate a synthetic canonical corpus and write it as CSV.
//!
//!     cargo run --example synth_corpus [out.csv]

use metriq::corpus::{write_canonical_file, Language};
use metriq::synthgen::{gen_corpus_detailed, SynthSpec};

fn main() -> metriq::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "synthetic_java.csv".into());
    let mut spec = SynthSpec::new(Language::Java, 500, 7);
    spec.stars.noise_sigma = 0.2;
    let repos = gen_corpus_detailed(&spec)?;

    let mut by_stars: Vec<_> = repos.iter().collect();
    by_stars.sort_by_key(|r| std::cmp::Reverse(r.record.stars));
    println!("most starred:");
    for r in by_stars.iter().take(3) {
        println!(
            "  {}  stars {:>7}  latent quality {:.1}",
            r.record.repo_id, r.record.stars, r.latent
        );
    }
    println!("least starred:");
    for r in by_stars.iter().rev().take(3) {
        println!(
            "  {}  stars {:>7}  latent quality {:.1}",
            r.record.repo_id, r.record.stars, r.latent
        );
    }

    let records: Vec<_> = repos.into_iter().map(|r| r.record).collect();
    write_canonical_file(&records, &out)?;
    println!("wrote {} repositories to {out}", records.len());
    Ok(())
}
