use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        /// Reduction in squared error achieved by this split.
        gain: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// Least-squares regression tree stored as a flat node array; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    i = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn splits(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Split { feature, gain, .. } => Some((*feature, *gain)),
            Node::Leaf { .. } => None,
        })
    }
}

/// How leaf outputs are computed from the members' residuals.
pub(crate) enum LeafRule<'a> {
    Mean,
    /// Newton step `sum(r) / sum(h)`, zero when `sum(h) == 0`.
    Newton(&'a [f64]),
}

pub(crate) struct TreeBuilder<'a> {
    pub x: &'a [Vec<f64>],
    pub residual: &'a [f64],
    pub leaf: LeafRule<'a>,
    pub max_depth: usize,
    pub min_leaf: usize,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
    left: Vec<usize>,
    right: Vec<usize>,
}

impl TreeBuilder<'_> {
    pub fn build(&self) -> RegressionTree {
        let mut nodes = Vec::new();
        self.grow((0..self.x.len()).collect(), 0, &mut nodes);
        RegressionTree { nodes }
    }

    fn grow(&self, members: Vec<usize>, depth: usize, nodes: &mut Vec<Node>) -> usize {
        let id = nodes.len();
        nodes.push(Node::Leaf { value: 0.0 });
        let split = if depth < self.max_depth {
            self.best_split(&members)
        } else {
            None
        };
        match split {
            None => {
                nodes[id] = Node::Leaf {
                    value: self.leaf_value(&members),
                }
            }
            Some(s) => {
                let left = self.grow(s.left, depth + 1, nodes);
                let right = self.grow(s.right, depth + 1, nodes);
                nodes[id] = Node::Split {
                    feature: s.feature,
                    threshold: s.threshold,
                    gain: s.gain,
                    left,
                    right,
                };
            }
        }
        id
    }

    fn leaf_value(&self, members: &[usize]) -> f64 {
        let sum_r: f64 = members.iter().map(|&i| self.residual[i]).sum();
        match self.leaf {
            LeafRule::Mean => {
                if members.is_empty() {
                    0.0
                } else {
                    sum_r / members.len() as f64
                }
            }
            LeafRule::Newton(h) => {
                let sum_h: f64 = members.iter().map(|&i| h[i]).sum();
                if sum_h == 0.0 {
                    0.0
                } else {
                    sum_r / sum_h
                }
            }
        }
    }

    /// Exact greedy search over midpoints of consecutive distinct values.
    /// Strict improvement is required, so ties keep the lower feature index
    /// and then the lower threshold.
    fn best_split(&self, members: &[usize]) -> Option<BestSplit> {
        let n = members.len();
        let min_leaf = self.min_leaf.max(1);
        if n < 2 * min_leaf {
            return None;
        }
        let total: f64 = members.iter().map(|&i| self.residual[i]).sum();
        let parent = total * total / n as f64;
        // gains below this are rounding noise, not structure
        let noise: f64 = 1e-12
            * members
                .iter()
                .map(|&i| self.residual[i].powi(2))
                .sum::<f64>();
        let n_features = self.x.first().map_or(0, |r| r.len());

        let mut best: Option<(usize, usize, f64, f64)> = None; // feature, cut, threshold, gain
        let mut order = members.to_vec();
        for f in 0..n_features {
            order.copy_from_slice(members);
            order.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]));
            let mut left_sum = 0.0;
            for k in 1..n {
                left_sum += self.residual[order[k - 1]];
                if k < min_leaf || n - k < min_leaf {
                    continue;
                }
                let lo = self.x[order[k - 1]][f];
                let hi = self.x[order[k]][f];
                if lo >= hi {
                    continue;
                }
                let right_sum = total - left_sum;
                let gain = left_sum * left_sum / k as f64 + right_sum * right_sum / (n - k) as f64
                    - parent;
                if gain > noise && best.is_none_or(|b| gain > b.3) {
                    let mut threshold = lo + (hi - lo) / 2.0;
                    if threshold >= hi {
                        threshold = lo;
                    }
                    best = Some((f, k, threshold, gain));
                }
            }
        }
        let (feature, _, threshold, gain) = best?;
        let (left, right) = members
            .iter()
            .partition(|&&i| self.x[i][feature] <= threshold);
        Some(BestSplit {
            feature,
            threshold,
            gain,
            left,
            right,
        })
    }
}
