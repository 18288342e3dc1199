//! Lagrangean lower bounds for the matching problem.
//!
//! The objective is split into a linear assignment over `lambda`, one
//! subproblem per node (its unaries minus `lambda`, plus messages) and one
//! subproblem per pair of nodes that share at least one edge (all edge
//! costs between the two nodes minus messages). Each node's label set
//! includes the dummy. Every part is minimized exactly and independently,
//! so the sum of the minima is a lower bound for any multiplier values;
//! projected subgradient ascent with Polyak steps tightens it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::lap::{min_cost_matching, round_weights};
use crate::model::{Labeling, Problem};
use crate::record::{relative_gap, RunRecord, Tracker};
use crate::solvers::{fuse, greedy_generate, run_direct, GreedyCost, SolverParams};

#[derive(Debug, Clone)]
struct Factor {
    first: usize,
    second: usize,
    /// Options of `second` per row: dummy plus its candidates.
    cols: usize,
    /// `(options of first) x cols` edge costs, row-major.
    table: Vec<f64>,
}

/// Decomposition structure of a problem.
#[derive(Debug, Clone)]
pub struct DualModel<'p> {
    problem: &'p Problem,
    factors: Vec<Factor>,
    /// Factors touching each node, with `true` when the node is `first`.
    incident: Vec<Vec<(usize, bool)>>,
    /// Option index of each assignment at its node (0 is the dummy).
    option: Vec<usize>,
}

/// Multipliers: `lambda` per assignment and one message vector per factor
/// side, indexed by node option.
#[derive(Debug, Clone, PartialEq)]
pub struct DualVars {
    pub lambda: Vec<f64>,
    messages: Vec<[Vec<f64>; 2]>,
}

/// Minimizers of each part of the decomposition at given multipliers.
#[derive(Debug, Clone)]
pub struct DualEval {
    pub value: f64,
    pub lap: Labeling,
    lap_ids: Vec<usize>,
    node_choice: Vec<usize>,
    factor_choice: Vec<(usize, usize)>,
}

impl<'p> DualModel<'p> {
    pub fn new(problem: &'p Problem) -> Self {
        let n = problem.num_nodes();
        let mut option = vec![0; problem.num_assignments()];
        for i in 0..n {
            for (k, &a) in problem.node_assignments(i).iter().enumerate() {
                option[a] = k + 1;
            }
        }
        let mut index = std::collections::HashMap::new();
        let mut factors: Vec<Factor> = Vec::new();
        let mut incident = vec![Vec::new(); n];
        for e in problem.edges() {
            let (mut a, mut b) = (e.a, e.b);
            if problem.assignment(a).node > problem.assignment(b).node {
                std::mem::swap(&mut a, &mut b);
            }
            let (i, j) = (problem.assignment(a).node, problem.assignment(b).node);
            let f = *index.entry((i, j)).or_insert_with(|| {
                let rows = problem.node_assignments(i).len() + 1;
                let cols = problem.node_assignments(j).len() + 1;
                factors.push(Factor {
                    first: i,
                    second: j,
                    cols,
                    table: vec![0.0; rows * cols],
                });
                incident[i].push((factors.len() - 1, true));
                incident[j].push((factors.len() - 1, false));
                factors.len() - 1
            });
            let fac = &mut factors[f];
            fac.table[option[a] * fac.cols + option[b]] += e.cost;
        }
        // Both nodes of a factor taking the same label is infeasible
        // anyway; excluding it tightens the bound for free.
        for fac in &mut factors {
            for (r, &a) in problem.node_assignments(fac.first).iter().enumerate() {
                for (c, &b) in problem.node_assignments(fac.second).iter().enumerate() {
                    if problem.assignment(a).label == problem.assignment(b).label {
                        fac.table[(r + 1) * fac.cols + c + 1] = f64::INFINITY;
                    }
                }
            }
        }
        Self {
            problem,
            factors,
            incident,
            option,
        }
    }

    pub fn problem(&self) -> &'p Problem {
        self.problem
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    fn options(&self, node: usize) -> usize {
        self.problem.node_assignments(node).len() + 1
    }

    /// All unary mass on the assignment part, zero messages. For an
    /// edge-free problem the bound is then already the optimum.
    pub fn initial_vars(&self) -> DualVars {
        DualVars {
            lambda: self.problem.assignments().iter().map(|a| a.cost).collect(),
            messages: self
                .factors
                .iter()
                .map(|f| [vec![0.0; self.options(f.first)], vec![0.0; f.cols]])
                .collect(),
        }
    }

    /// Zero messages with the given assignment multipliers.
    pub fn vars_with_lambda(&self, lambda: Vec<f64>) -> DualVars {
        let mut v = self.initial_vars();
        assert_eq!(lambda.len(), v.lambda.len(), "one multiplier per assignment");
        v.lambda = lambda;
        v
    }

    fn message(&self, vars: &DualVars, node: usize, opt: usize) -> f64 {
        self.incident[node]
            .iter()
            .map(|&(f, first)| vars.messages[f][if first { 0 } else { 1 }][opt])
            .sum()
    }

    /// Unary of option `opt` at `node` after moving messages onto it.
    fn reparam_unary(&self, vars: &DualVars, node: usize, opt: usize) -> f64 {
        let base = match opt {
            0 => 0.0,
            k => self.problem.assignment(self.problem.node_assignments(node)[k - 1]).cost,
        };
        base + self.message(vars, node, opt)
    }

    pub fn evaluate(&self, vars: &DualVars) -> DualEval {
        let p = self.problem;
        let (lap, lap_value) = min_cost_matching(p, &vars.lambda);
        let lap_ids = p.active_ids(&lap).expect("matching uses candidates");
        let mut value = lap_value;

        let mut node_choice = Vec::with_capacity(p.num_nodes());
        for i in 0..p.num_nodes() {
            let mut best = (self.message(vars, i, 0), 0);
            for (k, &a) in p.node_assignments(i).iter().enumerate() {
                let c = p.assignment(a).cost - vars.lambda[a] + self.message(vars, i, k + 1);
                if c < best.0 {
                    best = (c, k + 1);
                }
            }
            value += best.0;
            node_choice.push(best.1);
        }

        let mut factor_choice = Vec::with_capacity(self.factors.len());
        for (f, fac) in self.factors.iter().enumerate() {
            let [m1, m2] = &vars.messages[f];
            let mut best = (f64::INFINITY, (0, 0));
            for (r, row) in fac.table.chunks_exact(fac.cols).enumerate() {
                for (c, &t) in row.iter().enumerate() {
                    let v = t - m1[r] - m2[c];
                    if v < best.0 {
                        best = (v, (r, c));
                    }
                }
            }
            value += best.0;
            factor_choice.push(best.1);
        }
        DualEval {
            value,
            lap,
            lap_ids,
            node_choice,
            factor_choice,
        }
    }

    pub fn bound(&self, vars: &DualVars) -> f64 {
        self.evaluate(vars).value
    }

    /// Subgradient at the evaluated point, in the layout of `DualVars`.
    fn subgradient(&self, ev: &DualEval) -> DualVars {
        let p = self.problem;
        let mut lambda = vec![0.0; p.num_assignments()];
        for &a in &ev.lap_ids {
            lambda[a] += 1.0;
        }
        for (i, &k) in ev.node_choice.iter().enumerate() {
            if k > 0 {
                lambda[p.node_assignments(i)[k - 1]] -= 1.0;
            }
        }
        let messages = self
            .factors
            .iter()
            .zip(&ev.factor_choice)
            .map(|(fac, &(r, c))| {
                let mut g1 = vec![0.0; self.options(fac.first)];
                let mut g2 = vec![0.0; fac.cols];
                g1[ev.node_choice[fac.first]] += 1.0;
                g1[r] -= 1.0;
                g2[ev.node_choice[fac.second]] += 1.0;
                g2[c] -= 1.0;
                [g1, g2]
            })
            .collect();
        DualVars { lambda, messages }
    }

    /// Feasible labelings suggested by the current multipliers: the
    /// assignment part's matching and a rounding of the reparametrized
    /// unaries.
    fn primal_hints(&self, vars: &DualVars, ev: &DualEval) -> [Labeling; 2] {
        let p = self.problem;
        let weights: Vec<f64> = (0..p.num_assignments())
            .map(|a| {
                let i = p.assignment(a).node;
                self.reparam_unary(vars, i, 0) - self.reparam_unary(vars, i, self.option[a])
            })
            .collect();
        [ev.lap.clone(), round_weights(p, &weights)]
    }
}

impl DualVars {
    fn axpy(&mut self, step: f64, g: &DualVars) {
        self.lambda.iter_mut().zip(&g.lambda).for_each(|(x, d)| *x += step * d);
        for (m, d) in self.messages.iter_mut().zip(&g.messages) {
            for side in 0..2 {
                m[side].iter_mut().zip(&d[side]).for_each(|(x, d)| *x += step * d);
            }
        }
    }

    fn norm_sq(&self) -> f64 {
        self.lambda.iter().map(|v| v * v).sum::<f64>()
            + self
                .messages
                .iter()
                .flat_map(|m| m.iter().flatten())
                .map(|v| v * v)
                .sum::<f64>()
    }
}

/// Bound for multipliers `lambda` and zero messages.
pub fn lower_bound(problem: &Problem, lambda: &[f64]) -> f64 {
    let model = DualModel::new(problem);
    model.bound(&model.vars_with_lambda(lambda.to_vec()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Continue,
    /// The relative gap reached the tolerance.
    Certified,
    /// Zero subgradient: the multipliers are dual optimal.
    Stationary,
}

/// Subgradient ascent state with Polyak step sizes.
pub struct DualAscent<'p> {
    model: DualModel<'p>,
    vars: DualVars,
    scale: f64,
    best: f64,
    stall: usize,
    pub iterations: usize,
}

impl<'p> DualAscent<'p> {
    pub fn new(problem: &'p Problem) -> Self {
        let model = DualModel::new(problem);
        let vars = model.initial_vars();
        Self {
            model,
            vars,
            scale: 1.0,
            best: f64::NEG_INFINITY,
            stall: 0,
            iterations: 0,
        }
    }

    pub fn model(&self) -> &DualModel<'p> {
        &self.model
    }

    pub fn vars(&self) -> &DualVars {
        &self.vars
    }

    /// One evaluation and ascent step; bounds and primal hints go to the
    /// tracker, whose best objective sets the Polyak target.
    pub fn step(&mut self, params: &SolverParams, tracker: &mut Tracker) -> StepOutcome {
        self.iterations += 1;
        let ev = self.model.evaluate(&self.vars);
        tracker.offer_bound(ev.value);
        for y in self.model.primal_hints(&self.vars, &ev) {
            tracker.offer(&y);
        }
        let best_e = tracker.best_objective().expect("a hint was offered");
        if tracker.gap().is_some_and(|g| g <= params.gap_tol) {
            return StepOutcome::Certified;
        }
        if ev.value > self.best + 1e-12 * self.best.abs().max(1.0) {
            self.best = ev.value;
            self.stall = 0;
        } else {
            self.stall += 1;
            if params.dual_patience > 0 && self.stall >= params.dual_patience {
                self.scale *= 0.5;
                self.stall = 0;
            }
        }
        let g = self.model.subgradient(&ev);
        let norm = g.norm_sq();
        if norm == 0.0 {
            return StepOutcome::Stationary;
        }
        let mut target = best_e - params.dual_margin * best_e.abs();
        if target <= ev.value {
            target = best_e;
        }
        let step = self.scale * (target - ev.value) / norm;
        self.vars.axpy(step, &g);
        StepOutcome::Continue
    }

    /// Greedy costs on the message-reparametrized problem.
    pub fn reparametrized(&self) -> ReparamCost<'_, 'p> {
        ReparamCost {
            model: &self.model,
            vars: &self.vars,
        }
    }
}

/// Costs of the problem after moving the factor messages onto the nodes;
/// the total over any labeling equals the original objective.
pub struct ReparamCost<'a, 'p> {
    model: &'a DualModel<'p>,
    vars: &'a DualVars,
}

impl GreedyCost for ReparamCost<'_, '_> {
    fn delta(
        &self,
        problem: &Problem,
        node: usize,
        choice: Option<usize>,
        fixed: &[Option<Option<usize>>],
    ) -> f64 {
        let m = self.model;
        let opt = choice.map_or(0, |a| m.option[a]);
        let mut total = m.reparam_unary(self.vars, node, opt);
        for &(f, first) in &m.incident[node] {
            let fac = &m.factors[f];
            let other = if first { fac.second } else { fac.first };
            let Some(other_choice) = fixed[other] else { continue };
            let other_opt = other_choice.map_or(0, |b| m.option[b]);
            let (r, c) = if first { (opt, other_opt) } else { (other_opt, opt) };
            let [m1, m2] = &self.vars.messages[f];
            total += fac.table[r * fac.cols + c] - m1[r] - m2[c];
        }
        debug_assert!(std::ptr::eq(problem, m.problem));
        total
    }
}

pub(crate) fn subgradient_run(problem: &Problem, params: &SolverParams, tracker: &mut Tracker) {
    let mut ascent = DualAscent::new(problem);
    while ascent.iterations < params.dual_max_iter && !tracker.expired() {
        if ascent.step(params, tracker) != StepOutcome::Continue {
            break;
        }
    }
    tracker.iterations = ascent.iterations;
}

pub(crate) fn fm_dual_run(problem: &Problem, params: &SolverParams, tracker: &mut Tracker) {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut ascent = DualAscent::new(problem);
    let mut incumbent: Option<Labeling> = None;
    let mut dual_done = false;
    let mut generations = 0;
    'rounds: loop {
        if !dual_done {
            for _ in 0..params.fm_dual_steps {
                if ascent.iterations >= params.dual_max_iter {
                    dual_done = true;
                    break;
                }
                if tracker.expired() {
                    break 'rounds;
                }
                match ascent.step(params, tracker) {
                    StepOutcome::Continue => {}
                    StepOutcome::Certified => break 'rounds,
                    StepOutcome::Stationary => {
                        dual_done = true;
                        break;
                    }
                }
            }
        }
        if tracker.expired() || (dual_done && generations >= params.fm_max_generations) {
            break;
        }
        if generations >= params.fm_max_generations {
            continue;
        }
        generations += 1;
        let proposal = greedy_generate(
            problem,
            &ascent.reparametrized(),
            &mut rng,
            params.fm_epsilon,
            params.fm_k,
        );
        let next = match &incumbent {
            Some(x) => fuse(problem, x, &proposal).expect("generated labelings are feasible"),
            None => proposal,
        };
        tracker.offer(&next);
        incumbent = Some(next);
        if let (Some(e), Some(d)) = (tracker.best_objective(), tracker.lower_bound()) {
            if relative_gap(e, d) <= params.gap_tol {
                break;
            }
        }
    }
    tracker.iterations = ascent.iterations;
}

/// Subgradient ascent on the dual of `problem` as given.
pub fn subgradient_ascend(problem: &Problem, params: &SolverParams) -> RunRecord {
    run_direct("dual", problem, params, |t| subgradient_run(problem, params, t))
}

/// Fusion moves guided by the dual, with a certified gap.
pub fn fm_dual(problem: &Problem, params: &SolverParams) -> RunRecord {
    run_direct("fm+dual", problem, params, |t| fm_dual_run(problem, params, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lap::solve_ilap;
    use crate::model::fixtures::t1;

    #[test]
    fn edge_free_bound_is_tight_at_unaries() {
        let p = Problem::new(2, 2, vec![(0, 0, -1.0), (0, 1, -3.0), (1, 0, -2.0), (1, 1, 4.0)], vec![])
            .unwrap();
        let lambda: Vec<f64> = p.assignments().iter().map(|a| a.cost).collect();
        assert_eq!(lower_bound(&p, &lambda), solve_ilap(&p).unwrap().1);
        let r = subgradient_ascend(&p, &SolverParams::default());
        assert_eq!(r.iterations, 1);
        assert_eq!(r.lower_bound, Some(r.objective));
    }

    #[test]
    fn t1_bound_at_zero_multipliers() {
        // LAP 0, nodes min(0,-1,-2) + min(0,-3,-1), one factor with min -5.
        assert_eq!(lower_bound(&t1(), &[0.0; 4]), -10.0);
    }

    #[test]
    fn ascent_improves_and_certifies_t1() {
        let r = subgradient_ascend(&t1(), &SolverParams::default());
        assert_eq!(r.objective, -7.0);
        let d = r.lower_bound.unwrap();
        assert!((-7.0 - 7e-3..=-7.0 + 1e-9).contains(&d), "{d}");
        let bounds: Vec<f64> = r.timing.trace.iter().filter_map(|e| e.lower_bound).collect();
        assert!(bounds.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn reparametrized_greedy_cost_sums_to_objective() {
        let p = t1();
        let mut ascent = DualAscent::new(&p);
        let params = SolverParams::default();
        let mut tracker = Tracker::new(&p, &[], 10.0);
        for _ in 0..5 {
            ascent.step(&params, &mut tracker);
        }
        let cost = ascent.reparametrized();
        for (y0, y1) in [(Some(0), Some(3)), (Some(1), Some(2)), (None, Some(2)), (None, None)] {
            let mut fixed = vec![None; 2];
            let d0 = cost.delta(&p, 0, y0, &fixed);
            fixed[0] = Some(y0);
            let d1 = cost.delta(&p, 1, y1, &fixed);
            let y = p.labeling_from_ids(y0.into_iter().chain(y1));
            assert!((d0 + d1 - p.evaluate(&y).unwrap()).abs() < 1e-9);
        }
    }
}
