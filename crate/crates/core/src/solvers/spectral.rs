//! Spectral matching and max-pooling matching: power iterations on the
//! affinity `-C`, followed by rounding to a matching.

use super::relax::{affinity_product, has_complete_matching, norm2, round};
use super::{run_direct, SolverParams};
use crate::model::Problem;
use crate::record::{RunRecord, Tracker};

/// `y_a = A_aa x_a + sum_j max_{b at node j} A_ab x_b` with `A = -C`.
fn max_pool_product(p: &Problem, x: &[f64]) -> Vec<f64> {
    p.assignments()
        .iter()
        .enumerate()
        .map(|(a, asg)| {
            let mut total = -asg.cost * x[a];
            let mut group: Option<(usize, f64)> = None;
            // Neighbors are sorted by node, so each node forms a run.
            for &(b, e) in p.neighbors(a) {
                let node = p.assignment(b).node;
                let v = -0.5 * e * x[b];
                match group {
                    Some((j, best)) if j == node => group = Some((j, best.max(v))),
                    Some((_, best)) => {
                        total += best;
                        group = Some((node, v));
                    }
                    None => group = Some((node, v)),
                }
            }
            if let Some((_, best)) = group {
                total += best;
            }
            total
        })
        .collect()
}

fn power_iterate(
    p: &Problem,
    params: &SolverParams,
    product: fn(&Problem, &[f64]) -> Vec<f64>,
    expired: &dyn Fn() -> bool,
) -> (Vec<f64>, usize) {
    let n = p.num_assignments();
    if n == 0 {
        return (Vec::new(), 0);
    }
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut iterations = 0;
    while iterations < params.power_max_iter && !expired() {
        iterations += 1;
        let mut y = product(p, &x);
        let norm = norm2(&y);
        if !(norm > 0.0) || !norm.is_finite() {
            break;
        }
        y.iter_mut().for_each(|v| *v /= norm);
        let diff = norm2(&y.iter().zip(&x).map(|(a, b)| a - b).collect::<Vec<_>>());
        x = y;
        if diff <= params.power_tol {
            break;
        }
    }
    (x, iterations)
}

/// Leading eigenvector of `-C` by power iteration from the uniform vector.
pub fn sm_vector(problem: &Problem, params: &SolverParams) -> Vec<f64> {
    power_iterate(problem, params, affinity_product, &|| false).0
}

/// Fixed point of the max-pooling iteration from the uniform vector.
pub fn mpm_vector(problem: &Problem, params: &SolverParams) -> Vec<f64> {
    power_iterate(problem, params, max_pool_product, &|| false).0
}

pub(crate) fn sm_vector_tracked(p: &Problem, params: &SolverParams, tracker: &mut Tracker) -> Vec<f64> {
    let (x, it) = power_iterate(p, params, affinity_product, &|| tracker.expired());
    tracker.iterations += it;
    x
}

pub fn sm_run(problem: &Problem, params: &SolverParams, tracker: &mut Tracker) {
    let x = sm_vector_tracked(problem, params, tracker);
    tracker.offer(&round(problem, &x, has_complete_matching(problem)));
}

pub fn mpm_run(problem: &Problem, params: &SolverParams, tracker: &mut Tracker) {
    let (x, it) = power_iterate(problem, params, max_pool_product, &|| tracker.expired());
    tracker.iterations += it;
    tracker.offer(&round(problem, &x, has_complete_matching(problem)));
}

/// Spectral matching on `problem` as given.
pub fn sm(problem: &Problem, params: &SolverParams) -> RunRecord {
    run_direct("sm", problem, params, |t| sm_run(problem, params, t))
}

/// Max-pooling matching on `problem` as given.
pub fn mpm(problem: &Problem, params: &SolverParams) -> RunRecord {
    run_direct("mpm", problem, params, |t| mpm_run(problem, params, t))
}
