//! Methods driven by a linear-assignment oracle: integer projected fixed
//! point (`ipfp`) and Frank-Wolfe (`fw`).

use super::relax::{dot, gradient, has_complete_matching, line_search, linear_min, round};
use super::spectral::sm_vector_tracked;
use super::{run_direct, SolverParams};
use crate::model::{Labeling, Problem};
use crate::record::{RunRecord, Tracker};

/// Starting point of `ipfp`.
#[derive(Debug, Clone, PartialEq)]
pub enum IpfpInit {
    /// Constant vector `1 / sqrt(#assignments)`.
    Uniform,
    /// Leading eigenvector of the affinity, as computed by `sm`.
    FromSm,
    /// Caller-provided point.
    Given(Vec<f64>),
}

pub fn ipfp_run(problem: &Problem, params: &SolverParams, init: IpfpInit, tracker: &mut Tracker) {
    let n = problem.num_assignments();
    let uniform = || vec![1.0 / (n.max(1) as f64).sqrt(); n];
    let mut x = match init {
        IpfpInit::Uniform => uniform(),
        IpfpInit::FromSm => {
            let v = sm_vector_tracked(problem, params, tracker);
            if v.iter().any(|&w| w != 0.0) {
                v
            } else {
                uniform()
            }
        }
        IpfpInit::Given(v) => {
            assert_eq!(v.len(), n, "starting point has the wrong length");
            v
        }
    };
    let complete = has_complete_matching(problem);
    let mut previous: Option<Labeling> = None;
    for _ in 0..params.ipfp_max_iter {
        if tracker.expired() {
            break;
        }
        let g = gradient(problem, &x);
        let (b, _) = linear_min(problem, &g, complete);
        tracker.offer(&b);
        tracker.iterations += 1;
        if previous.as_ref() == Some(&b) {
            break;
        }
        let target = problem.indicator(&b).expect("oracle returns a candidate matching");
        let d: Vec<f64> = target.iter().zip(&x).map(|(t, x)| t - x).collect();
        let eta = line_search(problem, &d, &g);
        x.iter_mut().zip(&d).for_each(|(x, d)| *x += eta * d);
        previous = Some(b);
    }
}

/// `ipfp` on `problem` as given.
pub fn ipfp(problem: &Problem, params: &SolverParams, init: IpfpInit) -> RunRecord {
    let name = match init {
        IpfpInit::FromSm => "ipfps",
        _ => "ipfpu",
    };
    run_direct(name, problem, params, |t| ipfp_run(problem, params, init, t))
}

/// `ipfp` started from `x0`.
pub fn ipfp_from(problem: &Problem, params: &SolverParams, x0: Vec<f64>) -> RunRecord {
    ipfp(problem, params, IpfpInit::Given(x0))
}

/// Frank-Wolfe on the multilinear relaxation over matchings with dummies,
/// started at the empty matching. Stops when the duality gap
/// `<g, x - b>` drops below the tolerance.
pub fn fw_run(problem: &Problem, params: &SolverParams, tracker: &mut Tracker) {
    let mut x = vec![0.0; problem.num_assignments()];
    for _ in 0..params.fw_max_iter {
        if tracker.expired() {
            break;
        }
        let g = gradient(problem, &x);
        let (b, value) = linear_min(problem, &g, false);
        tracker.offer(&b);
        if dot(&g, &x) - value <= params.fw_tol {
            break;
        }
        tracker.iterations += 1;
        let target = problem.indicator(&b).expect("oracle returns a candidate matching");
        let d: Vec<f64> = target.iter().zip(&x).map(|(t, x)| t - x).collect();
        let eta = line_search(problem, &d, &g);
        x.iter_mut().zip(&d).for_each(|(x, d)| *x += eta * d);
    }
    tracker.offer(&round(problem, &x, false));
}

/// Frank-Wolfe on `problem` as given.
pub fn fw(problem: &Problem, params: &SolverParams) -> RunRecord {
    run_direct("fw", problem, params, |t| fw_run(problem, params, t))
}
