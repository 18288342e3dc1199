//! Graduated assignment: softassign updates on the gradient of the
//! relaxation under a geometrically decreasing temperature.

use super::relax::{gradient, has_complete_matching, norm2, round, sinkhorn};
use super::{run_direct, SolverParams};
use crate::model::Problem;
use crate::record::{RunRecord, Tracker};

/// Softassign updates per temperature before cooling.
const INNER_STEPS: usize = 10;
const INNER_TOL: f64 = 1e-4;

fn row_min(problem: &Problem, g: &[f64]) -> Vec<f64> {
    (0..problem.num_nodes())
        .map(|i| {
            problem
                .node_assignments(i)
                .iter()
                .map(|&a| g[a])
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// `x <- sinkhorn(exp(-(g - rowmin g) / T))`.
fn softassign(problem: &Problem, params: &SolverParams, x: &[f64], temperature: f64) -> Vec<f64> {
    let g = gradient(problem, x);
    let mins = row_min(problem, &g);
    let mut m: Vec<f64> = problem
        .assignments()
        .iter()
        .enumerate()
        .map(|(a, asg)| (-(g[a] - mins[asg.node]) / temperature).exp())
        .collect();
    sinkhorn(problem, &mut m, params.sinkhorn_tol, params.sinkhorn_max_iter);
    m
}

pub fn ga_run(problem: &Problem, params: &SolverParams, tracker: &mut Tracker) {
    let t0 = match params.ga_t0 {
        Some(t) if t > 0.0 => t,
        _ => {
            let c = problem.max_abs_cost();
            if c > 0.0 {
                c
            } else {
                1.0
            }
        }
    };
    let t_min = params.ga_t_min_ratio * t0;
    let complete = has_complete_matching(problem);

    let mut x = vec![1.0; problem.num_assignments()];
    sinkhorn(problem, &mut x, params.sinkhorn_tol, params.sinkhorn_max_iter);
    let mut temperature = t0;
    while temperature >= t_min && tracker.iterations < params.ga_max_iter && !tracker.expired() {
        for _ in 0..INNER_STEPS {
            let next = softassign(problem, params, &x, temperature);
            let change = norm2(&next.iter().zip(&x).map(|(a, b)| a - b).collect::<Vec<_>>());
            x = next;
            if change <= INNER_TOL {
                break;
            }
        }
        tracker.iterations += 1;
        tracker.offer(&round(problem, &x, complete));
        temperature *= params.ga_gamma;
    }
    tracker.offer(&round(problem, &x, complete));
}

/// Graduated assignment on `problem` as given.
pub fn ga(problem: &Problem, params: &SolverParams) -> RunRecord {
    run_direct("ga", problem, params, |t| ga_run(problem, params, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::t1;

    #[test]
    fn very_hot_softassign_is_uniform() {
        let p = t1();
        let x = softassign(&p, &SolverParams::default(), &[0.5; 4], 1e12);
        assert!(x.iter().all(|v| (v - 0.5).abs() < 1e-9));
    }

    #[test]
    fn cooling_schedule_length() {
        // T0 = 5, gamma = 0.9, T_min = 5e-3: 0.9^k >= 1e-3 for k <= 65.
        let r = ga(&t1(), &SolverParams::default());
        assert_eq!(r.iterations, 66);
        assert_eq!(r.objective, -7.0);
    }
}
