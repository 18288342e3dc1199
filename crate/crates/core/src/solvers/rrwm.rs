//! Reweighted random walks on the association graph with a Sinkhorn-based
//! reweighting jump.

use super::relax::{has_complete_matching, norm2, round, sinkhorn};
use super::{run_direct, SolverParams};
use crate::model::Problem;
use crate::record::{RunRecord, Tracker};

/// Row sums of the affinity `A = -C` (diagonal included).
fn row_sums(p: &Problem) -> Vec<f64> {
    p.assignments()
        .iter()
        .enumerate()
        .map(|(a, asg)| -asg.cost - 0.5 * p.neighbors(a).iter().map(|&(_, e)| e).sum::<f64>())
        .collect()
}

/// `y = P^T x` for the row-normalized affinity `P`.
fn walk(p: &Problem, sums: &[f64], x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; x.len()];
    for (a, asg) in p.assignments().iter().enumerate() {
        if !(sums[a] > 0.0) || x[a] == 0.0 {
            continue;
        }
        let w = x[a] / sums[a];
        y[a] += w * -asg.cost;
        for &(b, e) in p.neighbors(a) {
            y[b] += w * -0.5 * e;
        }
    }
    y
}

fn normalize_l1(x: &mut [f64]) {
    let s: f64 = x.iter().map(|v| v.abs()).sum();
    if s > 0.0 && s.is_finite() {
        x.iter_mut().for_each(|v| *v /= s);
    }
}

fn iterate(
    p: &Problem,
    params: &SolverParams,
    expired: &dyn Fn() -> bool,
) -> (Vec<f64>, usize) {
    let n = p.num_assignments();
    if n == 0 {
        return (Vec::new(), 0);
    }
    let sums = row_sums(p);
    let alpha = params.rrwm_alpha;
    let mut x = vec![1.0 / n as f64; n];
    let mut iterations = 0;
    while iterations < params.rrwm_max_iter && !expired() {
        iterations += 1;
        let mut y = walk(p, &sums, &x);
        normalize_l1(&mut y);
        let peak = y.iter().copied().fold(0.0, f64::max);
        let mut next = if alpha < 1.0 && peak > 0.0 {
            let mut jump: Vec<f64> = y
                .iter()
                .map(|&v| (params.rrwm_beta * v / peak).exp())
                .collect();
            sinkhorn(p, &mut jump, params.sinkhorn_tol, params.sinkhorn_max_iter);
            normalize_l1(&mut jump);
            y.iter().zip(&jump).map(|(w, j)| alpha * w + (1.0 - alpha) * j).collect()
        } else {
            y
        };
        normalize_l1(&mut next);
        let change = norm2(&next.iter().zip(&x).map(|(a, b)| a - b).collect::<Vec<_>>());
        x = next;
        if change <= params.rrwm_tol {
            break;
        }
    }
    (x, iterations)
}

/// Final walk distribution before rounding.
pub fn rrwm_vector(problem: &Problem, params: &SolverParams) -> Vec<f64> {
    iterate(problem, params, &|| false).0
}

pub fn rrwm_run(problem: &Problem, params: &SolverParams, tracker: &mut Tracker) {
    let (x, it) = iterate(problem, params, &|| tracker.expired());
    tracker.iterations += it;
    tracker.offer(&round(problem, &x, has_complete_matching(problem)));
}

/// Reweighted random walk matching on `problem` as given.
pub fn rrwm(problem: &Problem, params: &SolverParams) -> RunRecord {
    run_direct("rrwm", problem, params, |t| rrwm_run(problem, params, t))
}
