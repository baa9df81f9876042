//! Nelder-Mead downhill simplex.

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub max_iters: usize,
    /// Converged once the simplex diameter drops below `rel_tol * (1 + |best|)`.
    pub rel_tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            rel_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

fn lerp(from: &[f64], to: &[f64], t: f64) -> Vec<f64> {
    from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Minimizes `f` starting from `x0` with initial edge lengths `steps`.
///
/// The start point is a vertex of the initial simplex and the best vertex is
/// never replaced by a worse one, so the result is never worse than `f(x0)`.
/// NaN objective values are treated as +inf.
pub fn nelder_mead<F>(f: F, x0: &[f64], steps: &[f64], opts: SimplexOptions) -> SimplexResult
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    assert_eq!(steps.len(), n);
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), eval(x0)));
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += steps[i];
        let fv = eval(&v);
        simplex.push((v, fv));
    }

    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iters {
        // stable sort keeps ties in insertion order, so runs are reproducible
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));

        let best = &simplex[0].0;
        let diameter = simplex[1..]
            .iter()
            .map(|(v, _)| norm(&v.iter().zip(best).map(|(a, b)| a - b).collect::<Vec<_>>()))
            .fold(0.0, f64::max);
        if diameter < opts.rel_tol * (1.0 + norm(best)) {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for (v, _) in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let (worst, f_worst) = simplex[n].clone();
        let f_best = simplex[0].1;
        let f_second = simplex[n - 1].1;

        let reflected = lerp(&centroid, &worst, -REFLECT);
        let f_r = eval(&reflected);
        if f_r < f_best {
            let expanded = lerp(&centroid, &worst, -EXPAND);
            let f_e = eval(&expanded);
            simplex[n] = if f_e < f_r {
                (expanded, f_e)
            } else {
                (reflected, f_r)
            };
            continue;
        }
        if f_r < f_second {
            simplex[n] = (reflected, f_r);
            continue;
        }
        // contraction: outside if the reflection improved on the worst, inside otherwise
        let (contracted, f_c) = if f_r < f_worst {
            let c = lerp(&centroid, &reflected, CONTRACT);
            let fc = eval(&c);
            (c, fc)
        } else {
            let c = lerp(&centroid, &worst, CONTRACT);
            let fc = eval(&c);
            (c, fc)
        };
        if f_c < f_worst.min(f_r) {
            simplex[n] = (contracted, f_c);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let v = lerp(&anchor, &vertex.0, SHRINK);
            let fv = eval(&v);
            *vertex = (v, fv);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    SimplexResult {
        x,
        value,
        iterations,
        converged,
    }
}
