//! Fusion moves: randomized greedy proposals fused into an incumbent by a
//! monotone local search between two parents.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{run_direct, SolverParams};
use crate::model::{Labeling, ModelError, Problem};
use crate::record::{RunRecord, Tracker};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FuseError {
    #[error("parent {parent} is infeasible: {source}")]
    InfeasibleParent { parent: usize, source: ModelError },
}

/// Incremental cost used by the greedy construction.
pub trait GreedyCost {
    /// Cost of giving `node` the assignment `choice` (`None` for the dummy),
    /// given the choices already fixed for other nodes: `fixed[j]` is `None`
    /// while node `j` is open, `Some(None)` for the dummy and
    /// `Some(Some(id))` for an assignment.
    fn delta(
        &self,
        problem: &Problem,
        node: usize,
        choice: Option<usize>,
        fixed: &[Option<Option<usize>>],
    ) -> f64;
}

/// The problem's own costs: the dummy is free and an assignment pays its
/// unary plus the edges to already fixed assignments.
pub struct OriginalCost;

impl GreedyCost for OriginalCost {
    fn delta(
        &self,
        problem: &Problem,
        _node: usize,
        choice: Option<usize>,
        fixed: &[Option<Option<usize>>],
    ) -> f64 {
        let Some(a) = choice else { return 0.0 };
        let mut total = problem.assignment(a).cost;
        for &(b, e) in problem.neighbors(a) {
            if fixed[problem.assignment(b).node] == Some(Some(b)) {
                total += e;
            }
        }
        total
    }
}

/// Visits nodes in random order and fixes each to its cheapest option
/// (random tie-breaking); with probability `epsilon` it picks uniformly
/// among the `k` cheapest options instead.
pub fn greedy_generate<C: GreedyCost, R: Rng>(
    problem: &Problem,
    cost: &C,
    rng: &mut R,
    epsilon: f64,
    k: usize,
) -> Labeling {
    let n = problem.num_nodes();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut used = vec![false; problem.num_labels()];
    let mut fixed: Vec<Option<Option<usize>>> = vec![None; n];
    let mut options: Vec<(f64, u64, Option<usize>)> = Vec::new();
    for node in order {
        options.clear();
        options.push((cost.delta(problem, node, None, &fixed), rng.gen(), None));
        for &a in problem.node_assignments(node) {
            if !used[problem.assignment(a).label] {
                options.push((cost.delta(problem, node, Some(a), &fixed), rng.gen(), Some(a)));
            }
        }
        options.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        let pick = if rng.gen::<f64>() < epsilon {
            rng.gen_range(0..k.min(options.len()).max(1))
        } else {
            0
        };
        let choice = options[pick].2;
        if let Some(a) = choice {
            used[problem.assignment(a).label] = true;
        }
        fixed[node] = Some(choice);
    }
    problem.labeling_from_ids(fixed.into_iter().flatten().flatten())
}

fn owners(problem: &Problem, y: &Labeling) -> Vec<Option<usize>> {
    let mut owner = vec![None; problem.num_labels()];
    for (node, label) in y.iter().enumerate() {
        if let Some(s) = label {
            owner[s] = Some(node);
        }
    }
    owner
}

/// Fuses two feasible labelings: starting from the better parent, nodes are
/// moved to the other parent's label whenever that strictly lowers the
/// objective. A label held by another node is freed by sending that node to
/// its own other-parent label when available, otherwise to the dummy. The
/// result is never worse than either parent.
pub fn fuse(problem: &Problem, a: &Labeling, b: &Labeling) -> Result<Labeling, FuseError> {
    let ea = problem
        .evaluate(a)
        .map_err(|source| FuseError::InfeasibleParent { parent: 0, source })?;
    let eb = problem
        .evaluate(b)
        .map_err(|source| FuseError::InfeasibleParent { parent: 1, source })?;
    let (mut current, mut value, other) = if eb < ea { (b.clone(), eb, a) } else { (a.clone(), ea, b) };
    let mut owner = owners(problem, &current);
    loop {
        let mut improved = false;
        for node in 0..problem.num_nodes() {
            let target = other.get(node);
            if current.get(node) == target {
                continue;
            }
            let mut candidate = current.clone();
            candidate.set(node, target);
            if let Some(s) = target {
                if let Some(holder) = owner[s] {
                    let vacated = current.get(node);
                    let alt = other.get(holder).filter(|&l| owner[l].is_none() || Some(l) == vacated);
                    candidate.set(holder, alt);
                }
            }
            let v = problem.evaluate(&candidate).expect("fusion moves keep feasibility");
            if v < value {
                current = candidate;
                value = v;
                owner = owners(problem, &current);
                improved = true;
            }
        }
        if !improved {
            return Ok(current);
        }
    }
}

pub fn fm_run(problem: &Problem, params: &SolverParams, tracker: &mut Tracker) {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut incumbent: Option<Labeling> = None;
    for _ in 0..params.fm_max_generations {
        if tracker.expired() {
            break;
        }
        let proposal = greedy_generate(problem, &OriginalCost, &mut rng, params.fm_epsilon, params.fm_k);
        let next = match &incumbent {
            Some(x) => fuse(problem, x, &proposal).expect("generated labelings are feasible"),
            None => proposal,
        };
        tracker.offer(&next);
        tracker.iterations += 1;
        incumbent = Some(next);
    }
}

/// Fusion moves on `problem` as given.
pub fn fm(problem: &Problem, params: &SolverParams) -> RunRecord {
    run_direct("fm", problem, params, |t| fm_run(problem, params, t))
}
