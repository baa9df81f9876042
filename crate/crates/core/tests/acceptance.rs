//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any criterion fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use twofloat::{consts::FRAC_2_SQRT_PI, TwoFloat};

use metriq::calibrate::{
    agauss_initial_guess, agauss_nll, fit_agauss, fit_exponential, reference_params_for,
};
use metriq::corpus::{metrics_for, normalize, registry, Language};
use metriq::distmodel::{
    agauss_score, exp_score, AGaussParams, Distribution, ExpParams, SIGMA_FLOOR,
};
use metriq::evalreport::{auc_roc, confusion_metrics};
use metriq::gbm::{make_labels, split_train_val, train_gbc, GbmParams, RankedRepo};
use metriq::pipeline::{feature_names, feature_row, run_synthetic_pipeline, RunConfig};
use metriq::scoring::{
    derive_weights, overall_score, reference_importances_for, score_vector, WeightSet,
};
use metriq::synthgen::{gen_corpus, sample_agauss, sample_exponential, SplitMix64, SynthSpec};

const LANGUAGES: [Language; 4] = [
    Language::Java,
    Language::JavaScript,
    Language::Python,
    Language::TypeScript,
];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

// ---------------------------------------------------------------------------
// Double-double oracle.

fn dd(x: f64) -> TwoFloat {
    TwoFloat::from(x)
}

/// e^t for t ≥ 0 by its all-positive Taylor series.
fn dd_exp(t: TwoFloat) -> TwoFloat {
    let mut term = dd(1.0);
    let mut sum = dd(1.0);
    let mut n = 0.0;
    while term.hi() > sum.hi() * 1e-34 {
        n += 1.0;
        term = term * t / dd(n);
        sum += term;
    }
    sum
}

fn oracle_exp_score(x: f64, c: f64, lambda: f64) -> f64 {
    if x <= c {
        return 100.0;
    }
    let t = dd(lambda) * (dd(x) - dd(c));
    (dd(100.0) / dd_exp(t)).hi()
}

/// erfc(z) for z ≥ 0 via erf(z) = 2/√π · e^(−z²) · Σ 2ⁿ z^(2n+1) / (2n+1)!!, all terms positive.
fn oracle_erfc(z: TwoFloat) -> TwoFloat {
    // erfc(6) < 2.2e-17: scores past this point are below 1e-14.
    if z.hi() > 6.0 {
        return dd(0.0);
    }
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    let mut n = 0u32;
    loop {
        n += 1;
        term = term * dd(2.0) * z2 / dd(f64::from(2 * n + 1));
        sum += term;
        if term.hi() < sum.hi() * 1e-34 {
            break;
        }
    }
    dd(1.0) - FRAC_2_SQRT_PI * sum / dd_exp(z2)
}

fn oracle_agauss_score(x: f64, mu: f64, sigma1: f64, sigma2: f64) -> f64 {
    if x == mu {
        return 100.0;
    }
    let s = if x < mu { sigma1 } else { sigma2 };
    if s == 0.0 {
        return 0.0;
    }
    let z = (dd(x) - dd(mu)).abs() / (dd(s) * dd(2.0).sqrt());
    (dd(100.0) * oracle_erfc(z)).hi()
}

// ---------------------------------------------------------------------------

fn c1_score_conformance() -> Outcome {
    const GRID: usize = 10_001;
    let mut worst = 0.0f64;
    let mut out_of_range = 0usize;
    let mut metrics = 0usize;
    for lang in LANGUAGES {
        let set = reference_params_for(lang).expect("bundled parameters");
        for (name, fit) in &set.metrics {
            metrics += 1;
            // Upper grid bound and a closure returning (implementation, oracle) at x.
            type Eval = Box<dyn Fn(f64) -> (f64, f64)>;
            let (hi, eval): (f64, Eval) = match &fit.params.dist {
                Distribution::Exponential(p) => {
                    let p = *p;
                    let span = if p.lambda > 0.0 {
                        30.0 / p.lambda
                    } else {
                        100.0
                    };
                    let uninformative = fit.params.uninformative;
                    (
                        p.c + span,
                        Box::new(move |x| {
                            let got = exp_score(x, &p).unwrap();
                            let want = if uninformative {
                                100.0
                            } else {
                                oracle_exp_score(x, p.c, p.lambda)
                            };
                            (got, want)
                        }),
                    )
                }
                Distribution::AsymGauss(p) => {
                    let p = *p;
                    (
                        p.mu + 10.0 * p.sigma1.max(p.sigma2),
                        Box::new(move |x| {
                            let got = agauss_score(x, &p).unwrap();
                            (got, oracle_agauss_score(x, p.mu, p.sigma1, p.sigma2))
                        }),
                    )
                }
            };
            for i in 0..GRID {
                let x = hi * i as f64 / (GRID - 1) as f64;
                let (got, want) = eval(x);
                if !(0.0..=100.0).contains(&got) {
                    out_of_range += 1;
                }
                let err = (got - want).abs();
                if !(err <= 1e-9) {
                    eprintln!("  {lang} {name} x={x}: got {got}, oracle {want}");
                }
                worst = worst.max(if err.is_nan() { f64::INFINITY } else { err });
            }
        }
    }
    outcome(
        worst <= 1e-9 && out_of_range == 0,
        format!("{metrics} metrics x {GRID} points, max |error| {worst:.3e}, {out_of_range} outside [0,100]"),
    )
}

fn c2_fixture_spot_values() -> Outcome {
    let java = reference_params_for(Language::Java).unwrap();
    let smells = match java.get("code_smells").unwrap().dist {
        Distribution::Exponential(p) => p,
        _ => unreachable!(),
    };
    let cyc = match java.get("cyclomatic_complexity").unwrap().dist {
        Distribution::AsymGauss(p) => p,
        _ => unreachable!(),
    };
    let checks = [
        ("smells x=0.5", exp_score(0.5, &smells).unwrap(), 100.0, 0.0),
        (
            "smells x=c+1/λ",
            exp_score(smells.c + 1.0 / smells.lambda, &smells).unwrap(),
            36.79,
            0.01,
        ),
        (
            "cyclomatic x=μ",
            agauss_score(cyc.mu, &cyc).unwrap(),
            100.0,
            0.0,
        ),
        (
            "cyclomatic x=μ+σ2",
            agauss_score(cyc.mu + cyc.sigma2, &cyc).unwrap(),
            31.73,
            0.01,
        ),
        (
            "cyclomatic x=μ−σ1",
            agauss_score(cyc.mu - cyc.sigma1, &cyc).unwrap(),
            31.73,
            0.01,
        ),
    ];
    let params_ok = (smells.c, smells.lambda) == (1.123, 50.731)
        && (cyc.mu, cyc.sigma1, cyc.sigma2) == (155.228, 50.947, 40.902);
    let bad: Vec<String> = checks
        .iter()
        .filter(|(_, got, want, tol)| (got - want).abs() > *tol)
        .map(|(what, got, want, _)| format!("{what}: {got} vs {want}"))
        .collect();
    outcome(
        bad.is_empty() && params_ok,
        if bad.is_empty() {
            checks
                .iter()
                .map(|(w, g, _, _)| format!("{w} → {g:.4}"))
                .collect::<Vec<_>>()
                .join("; ")
        } else {
            bad.join("; ")
        },
    )
}

fn c3_fit_recovery() -> Outcome {
    let exp_truth = ExpParams::new(1.0, 50.0).unwrap();
    let ag_truth = AGaussParams::new(155.228, 50.947, 40.902).unwrap();
    let (mut exp_ok, mut ag_ok) = (0, 0);
    for seed in 0..20u64 {
        let s = sample_exponential(&exp_truth, 10_000, 1000 + seed).unwrap();
        let f = fit_exponential(&s).unwrap();
        if (f.lambda / 50.0 - 1.0).abs() <= 0.05 && (f.c - 1.0).abs() <= 0.005 {
            exp_ok += 1;
        }
        let s = sample_agauss(&ag_truth, 10_000, 2000 + seed).unwrap();
        let f = fit_agauss(&s).unwrap().params;
        let rel = |a: f64, b: f64| (a / b - 1.0).abs();
        if rel(f.mu, ag_truth.mu) <= 0.1
            && rel(f.sigma1, ag_truth.sigma1) <= 0.1
            && rel(f.sigma2, ag_truth.sigma2) <= 0.1
        {
            ag_ok += 1;
        }
    }
    outcome(
        exp_ok >= 19 && ag_ok >= 19,
        format!("exponential {exp_ok}/20, asymmetric Gaussian {ag_ok}/20 seeds within tolerance"),
    )
}

fn c4_weight_normalization() -> Outcome {
    let table = reference_importances_for(Language::Java).unwrap();
    let w = derive_weights(&table.raw, registry(), Language::Java).unwrap();
    let mut misses = Vec::new();
    let mut cells = 0;
    for weights in w.per_dimension.values() {
        for (name, got) in weights {
            cells += 1;
            let printed = table.within_dimension[name];
            if (got - printed).abs() > 0.001 {
                misses.push(format!("{name}: {got:.4} vs printed {printed:.3}"));
            }
        }
    }
    let sums_ok = w
        .per_dimension
        .values()
        .all(|d| (d.values().sum::<f64>() - 1.0).abs() <= 1e-9);
    outcome(
        misses.is_empty() && sums_ok && cells == 20,
        format!(
            "{}/{cells} cells within 0.001, dimension sums {}{}",
            cells - misses.len(),
            if sums_ok { "= 1" } else { "off" },
            if misses.is_empty() {
                String::new()
            } else {
                format!("; mismatched: {}", misses.join(", "))
            }
        ),
    )
}

fn validation_run(beta: f64, seed: u64) -> (f64, f64, bool) {
    let mut spec = SynthSpec::new(Language::Java, 2000, seed);
    spec.stars.beta = beta;
    spec.stars.noise_sigma = 0.1;
    let records = gen_corpus(&spec).unwrap();
    let params = reference_params_for(Language::Java).unwrap();
    let names = feature_names(Language::Java);
    let ranked: Vec<RankedRepo> = records
        .iter()
        .map(|r| {
            let scores = score_vector(&normalize(r, registry()).unwrap(), &params).unwrap();
            RankedRepo {
                repo_id: r.repo_id.clone(),
                stars: r.stars,
                features: feature_row(&scores, &names),
            }
        })
        .collect();
    let (train, val) = split_train_val(&make_labels(&ranked, 0.2).unwrap(), seed).unwrap();
    let model = train_gbc(
        &train,
        &GbmParams {
            seed,
            ..GbmParams::default()
        },
    )
    .unwrap();
    let monotone = model.train_loss.windows(2).all(|w| w[1] <= w[0]);
    let probs: Vec<f64> = val
        .iter()
        .map(|e| model.predict_proba(&e.features).unwrap())
        .collect();
    let labels: Vec<u8> = val.iter().map(|e| e.label).collect();
    (
        confusion_metrics(&probs, &labels, 0.5).unwrap().accuracy,
        auc_roc(&probs, &labels).unwrap(),
        monotone,
    )
}

fn c5_gbc_sanity() -> Outcome {
    let (acc, auc, mono) = validation_run(20.0, 42);
    let (_, null_auc, null_mono) = validation_run(0.0, 42);
    outcome(
        acc >= 0.95 && auc >= 0.97 && (0.35..=0.65).contains(&null_auc) && mono && null_mono,
        format!(
            "accuracy {acc:.4}, AUC {auc:.4}, null AUC {null_auc:.4}, loss non-increasing: {}",
            mono && null_mono
        ),
    )
}

fn brute_force_auc(probs: &[f64], labels: &[u8]) -> f64 {
    let mut doubled = 0u64;
    let (mut n1, mut n0) = (0u64, 0u64);
    for (i, &li) in labels.iter().enumerate() {
        if li == 1 {
            n1 += 1;
        } else {
            n0 += 1;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if li == 1 && lj == 0 {
                doubled += if probs[i] > probs[j] {
                    2
                } else if probs[i] == probs[j] {
                    1
                } else {
                    0
                };
            }
        }
    }
    doubled as f64 / (2 * n1 * n0) as f64
}

fn c6_oracle_equivalences() -> Outcome {
    let mut rng = SplitMix64::new(6);
    let mut auc_mismatch = 0;
    for _ in 0..1000 {
        let n = 2 + rng.next_below(49) as usize;
        let mut labels: Vec<u8> = (0..n).map(|_| rng.next_below(2) as u8).collect();
        labels[0] = 1;
        labels[1] = 0;
        // Coarse grid so ties are common.
        let probs: Vec<f64> = (0..n).map(|_| rng.next_below(11) as f64 / 10.0).collect();
        if auc_roc(&probs, &labels).unwrap() != brute_force_auc(&probs, &labels) {
            auc_mismatch += 1;
        }
    }

    let mut dot_err = 0.0f64;
    for _ in 0..200 {
        let names: Vec<String> = metrics_for(registry(), Language::Java)
            .iter()
            .map(|m| m.name.to_string())
            .collect();
        let mut raw: BTreeMap<String, f64> =
            names.iter().map(|n| (n.clone(), rng.next_f64())).collect();
        let total: f64 = raw.values().sum();
        raw.values_mut().for_each(|v| *v /= total);
        let w: WeightSet = derive_weights(&raw, registry(), Language::Java).unwrap();
        let scores: BTreeMap<String, f64> = names
            .iter()
            .map(|n| (n.clone(), 100.0 * rng.next_f64()))
            .collect();
        let profile = overall_score("r", &scores, &w).unwrap();
        let dot: f64 = names.iter().map(|n| w.global[n] * scores[n]).sum();
        dot_err = dot_err.max((profile.overall - dot).abs());
    }

    let mut nll_worse = 0;
    for k in 0..100u64 {
        let mu = 1.0 + 200.0 * rng.next_f64();
        let s1 = 0.05 * mu + mu * rng.next_f64();
        let s2 = 0.05 * mu + mu * rng.next_f64();
        let n = 30 + rng.next_below(500) as usize;
        let data = sample_agauss(&AGaussParams::new(mu, s1, s2).unwrap(), n, 7000 + k).unwrap();
        let fit = fit_agauss(&data).unwrap();
        let init = agauss_nll(&data, &agauss_initial_guess(&data).unwrap()).unwrap();
        if !(fit.nll <= init) {
            nll_worse += 1;
        }
    }
    outcome(
        auc_mismatch == 0 && dot_err <= 1e-12 && nll_worse == 0,
        format!("AUC mismatches {auc_mismatch}/1000, max dot-product error {dot_err:.1e}, NLL worse than start {nll_worse}/100"),
    )
}

fn c7_determinism() -> Outcome {
    let spec = SynthSpec::new(Language::Java, 200, 2024);
    let cfg = RunConfig::default();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = run_synthetic_pipeline(&spec, a.path(), &cfg).unwrap();
    let rb = run_synthetic_pipeline(&spec, b.path(), &cfg).unwrap();
    let pairs = [
        ("corpus", &ra.corpus, &rb.corpus),
        ("params", &ra.params, &rb.params),
        ("weights", &ra.weights, &rb.weights),
        ("model", &ra.model, &rb.model),
        ("scores", &ra.scores, &rb.scores),
        ("report", &ra.report, &rb.report),
        ("histogram", &ra.histogram, &rb.histogram),
    ];
    let differing: Vec<&str> = pairs
        .iter()
        .filter(|(_, x, y)| std::fs::read(x).unwrap() != std::fs::read(y).unwrap())
        .map(|(n, _, _)| *n)
        .collect();
    outcome(
        differing.is_empty(),
        if differing.is_empty() {
            format!("{} artifacts byte-identical across two runs", pairs.len())
        } else {
            format!("differing: {}", differing.join(", "))
        },
    )
}

fn c8_degenerate_handling() -> Outcome {
    let java = reference_params_for(Language::Java).unwrap();
    let cover = java.get("lines_to_cover").unwrap();
    let python = reference_params_for(Language::Python).unwrap();
    let cog = match python.get("cognitive_complexity").unwrap().dist {
        Distribution::AsymGauss(p) => p,
        _ => unreachable!(),
    };
    let probes: Vec<f64> = (0..=1000)
        .map(|i| i as f64 * 0.5)
        .chain([1e-300, 1e6, 1e100, 1e300, f64::MAX])
        .collect();

    let cover_flat =
        cover.uninformative && probes.iter().all(|&x| cover.score(x).unwrap() == 100.0);
    let right_zero = probes
        .iter()
        .filter(|&&x| x > cog.mu)
        .all(|&x| agauss_score(x, &cog).unwrap() == 0.0);
    let left_ok = [0.5, 1.0, 2.0, 3.0].iter().all(|&k| {
        let x = cog.mu - k * cog.sigma1;
        x < 0.0 || {
            let got = agauss_score(x, &cog).unwrap();
            let want = oracle_agauss_score(x, cog.mu, cog.sigma1, 0.0);
            if (got - want).abs() > 1e-9 {
                eprintln!("  python cognitive x={x}: got {got}, oracle {want}");
            }
            (got - want).abs() <= 1e-9
        }
    });
    let peak = agauss_score(cog.mu, &cog).unwrap() == 100.0;
    let finite = probes.iter().all(|&x| {
        cover.score(x).unwrap().is_finite() && agauss_score(x, &cog).unwrap().is_finite()
    });
    let clamped = cog.sigma2 == 0.0 && cog.clamped().sigma2 == SIGMA_FLOOR;
    outcome(
        cover_flat && right_zero && left_ok && peak && finite && clamped,
        format!(
            "flat-100 uninformative: {cover_flat}; right of μ = 0: {right_zero}; left side matches oracle: {left_ok}; peak 100: {peak}; all finite: {finite}"
        ),
    )
}

fn main() {
    type Criterion = (u32, &'static str, fn() -> Outcome, Option<Duration>);
    let criteria: [Criterion; 8] = [
        (
            1,
            "score-function conformance",
            c1_score_conformance,
            Some(Duration::from_secs(5)),
        ),
        (2, "fixture spot values", c2_fixture_spot_values, None),
        (
            3,
            "fit recovery",
            c3_fit_recovery,
            Some(Duration::from_secs(60)),
        ),
        (
            4,
            "weight normalization vs published table",
            c4_weight_normalization,
            None,
        ),
        (
            5,
            "GBC sanity",
            c5_gbc_sanity,
            Some(Duration::from_secs(30)),
        ),
        (6, "oracle equivalences", c6_oracle_equivalences, None),
        (
            7,
            "pipeline determinism",
            c7_determinism,
            Some(Duration::from_secs(60)),
        ),
        (8, "degenerate handling", c8_degenerate_handling, None),
    ];
    let mut failed = 0;
    for (id, name, run, budget) in criteria {
        let start = Instant::now();
        let mut o = run();
        let took = start.elapsed();
        if let Some(b) = budget {
            if took > b {
                o.pass = false;
                o.detail.push_str(&format!("; over budget {b:?}"));
            }
        }
        println!(
            "{} criterion {id} ({name}): {} [{:.2}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            took.as_secs_f64()
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
