use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::synthgen::SplitMix64;

/// A repository's score features with its star count, before labeling.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedRepo {
    pub repo_id: String,
    pub stars: u64,
    pub features: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub repo_id: String,
    pub features: Vec<f64>,
    /// 1 for the most-starred quantile, 0 for the least-starred.
    pub label: u8,
}

/// Labels the top `q` fraction by stars 1 and the bottom `q` fraction 0;
/// the middle is discarded. Stars sort descending with ties broken by
/// ascending `repo_id`.
pub fn make_labels(records: &[RankedRepo], q: f64) -> Result<Vec<LabeledExample>> {
    if !(q > 0.0 && q <= 0.5) {
        return Err(Error::Config(format!(
            "quantile q={q} must lie in (0, 0.5]"
        )));
    }
    let n = records.len();
    let k = (q * n as f64).floor() as usize;
    if k == 0 {
        return Err(Error::InsufficientData {
            n,
            required: (1.0 / q).ceil() as usize,
        });
    }
    let mut order: Vec<&RankedRepo> = records.iter().collect();
    order.sort_by(|a, b| {
        b.stars
            .cmp(&a.stars)
            .then_with(|| a.repo_id.cmp(&b.repo_id))
    });
    let label = |r: &RankedRepo, label| LabeledExample {
        repo_id: r.repo_id.clone(),
        features: r.features.clone(),
        label,
    };
    let mut out: Vec<LabeledExample> = order[..k].iter().map(|r| label(r, 1)).collect();
    out.extend(order[n - k..].iter().map(|r| label(r, 0)));
    Ok(out)
}

/// Seeded 4:1 train/validation split, stratified by label. Each class sends
/// `floor(n_class / 5)` members to validation; the rest train.
pub fn split_train_val(
    examples: &[LabeledExample],
    seed: u64,
) -> Result<(Vec<LabeledExample>, Vec<LabeledExample>)> {
    if examples.len() < 5 {
        return Err(Error::InsufficientData {
            n: examples.len(),
            required: 5,
        });
    }
    let mut rng = SplitMix64::new(seed);
    let mut train = Vec::new();
    let mut val = Vec::new();
    for class in [1u8, 0u8] {
        let mut members: Vec<&LabeledExample> =
            examples.iter().filter(|e| e.label == class).collect();
        if members.len() < 2 {
            return Err(Error::Stratification(format!(
                "class {class} has {} member(s); at least 2 are needed",
                members.len()
            )));
        }
        rng.shuffle(&mut members);
        let n_val = members.len() / 5;
        val.extend(members[..n_val].iter().map(|e| (*e).clone()));
        train.extend(members[n_val..].iter().map(|e| (*e).clone()));
    }
    Ok((train, val))
}

/// Seeded unstratified 4:1 split of indices `0..n` (validation gets `floor(n / 5)`).
pub fn split_indices(n: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    SplitMix64::new(seed).shuffle(&mut idx);
    let n_val = n / 5;
    let val = idx[..n_val].to_vec();
    let train = idx[n_val..].to_vec();
    (train, val)
}
