//! Cost transformations and problem reductions.
//!
//! Every transform maps a problem `P` to `P'` together with a
//! [`TransformReport`] such that for each feasible labeling `y` of `P` with
//! image `y' = report.forward(y)`, `E'(y') = scale * E(y) + shift`. Reports
//! flagged `complete_only` guarantee the identity only for complete
//! matchings, which is why those transforms require a square problem and
//! are applied after [`gm_to_qap`] when preparing solver input.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lap::LapMatrix;
use crate::model::{Labeling, ModelError, Problem};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransformError {
    #[error("{transform} needs |V| = |L|, got {nodes} x {labels}")]
    NotSquare {
        transform: &'static str,
        nodes: usize,
        labels: usize,
    },
    #[error("remove_unary needs at least two nodes")]
    TooFewNodes,
    #[error("ilap_to_lap needs an edge-free problem, found {0} edges")]
    HasEdges(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// How labelings of the transformed problem relate to the source problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Mapping {
    /// Same nodes and labels.
    Identity,
    /// Nodes and labels of the result are `V ⊔ L`; source node `i` is node
    /// `i`, source label `s` is label `num_nodes + s`.
    DisjointUnion { num_nodes: usize, num_labels: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformReport {
    pub name: String,
    /// `E'(y') = scale * E(y) + shift`.
    pub scale: f64,
    pub shift: f64,
    /// The identity holds for complete matchings only.
    pub complete_only: bool,
    pub mapping: Mapping,
}

impl TransformReport {
    fn new(name: &str, scale: f64, shift: f64, complete_only: bool, mapping: Mapping) -> Self {
        Self {
            name: name.to_string(),
            scale,
            shift,
            complete_only,
            mapping,
        }
    }

    /// Labeling of the source problem induced by a labeling of the result.
    pub fn pullback(&self, y: &Labeling) -> Labeling {
        match self.mapping {
            Mapping::Identity => y.clone(),
            Mapping::DisjointUnion { num_nodes, .. } => Labeling::from_vec(
                (0..num_nodes)
                    .map(|i| y.get(i).and_then(|l| l.checked_sub(num_nodes)))
                    .collect(),
            ),
        }
    }

    /// Image of a source labeling; for [`Mapping::DisjointUnion`] this is
    /// the complete matching built in the reduction proof.
    pub fn forward(&self, y: &Labeling) -> Labeling {
        match self.mapping {
            Mapping::Identity => y.clone(),
            Mapping::DisjointUnion {
                num_nodes,
                num_labels,
            } => {
                let mut out = Labeling::unassigned(num_nodes + num_labels);
                let mut matched_by = vec![None; num_labels];
                for i in 0..num_nodes {
                    match y.get(i) {
                        Some(s) => {
                            out.set(i, Some(num_nodes + s));
                            matched_by[s] = Some(i);
                        }
                        None => out.set(i, Some(i)),
                    }
                }
                for (s, owner) in matched_by.iter().enumerate() {
                    let node = num_nodes + s;
                    out.set(node, Some(owner.unwrap_or(node)));
                }
                out
            }
        }
    }
}

/// Pulls a labeling back through a chain of transforms (applied in order).
pub fn pullback_chain(chain: &[TransformReport], y: &Labeling) -> Labeling {
    chain.iter().rev().fold(y.clone(), |y, r| r.pullback(&y))
}

pub fn forward_chain(chain: &[TransformReport], y: &Labeling) -> Labeling {
    chain.iter().fold(y.clone(), |y, r| r.forward(&y))
}

fn require_square(problem: &Problem, transform: &'static str) -> Result<(), TransformError> {
    if !problem.is_square() {
        return Err(TransformError::NotSquare {
            transform,
            nodes: problem.num_nodes(),
            labels: problem.num_labels(),
        });
    }
    Ok(())
}

type Triples = Vec<(usize, usize, f64)>;

fn parts(problem: &Problem) -> (Triples, HashMap<(usize, usize), f64>) {
    let assignments = problem
        .assignments()
        .iter()
        .map(|a| (a.node, a.label, a.cost))
        .collect();
    let edges = problem
        .edges()
        .iter()
        .map(|e| ((e.a, e.b), e.cost))
        .collect();
    (assignments, edges)
}

fn rebuild(
    problem: &Problem,
    assignments: Triples,
    edges: HashMap<(usize, usize), f64>,
) -> Result<Problem, TransformError> {
    let edges = edges
        .into_iter()
        .filter(|(_, c)| *c != 0.0)
        .map(|((a, b), c)| (a, b, c))
        .collect();
    Ok(Problem::with_geometry(
        problem.num_nodes(),
        problem.num_labels(),
        assignments,
        edges,
        problem.geometry().clone(),
    )?)
}

fn compatible(problem: &Problem, a: usize, b: usize) -> bool {
    let (x, y) = (problem.assignment(a), problem.assignment(b));
    x.node != y.node && x.label != y.label
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Reduction of graph matching to a bijective problem over `M = V ⊔ L`.
///
/// Source assignments keep their ids as `(i, |V| + s)`; every element of
/// `M` gets a zero-cost self assignment, and every source candidate
/// `(i, s)` a zero-cost mirror `(|V| + s, i)` so that complete matchings of
/// the result correspond to incomplete matchings of the source.
pub fn gm_to_qap(problem: &Problem) -> (Problem, TransformReport) {
    let (n, m) = (problem.num_nodes(), problem.num_labels());
    let mut assignments: Triples = problem
        .assignments()
        .iter()
        .map(|a| (a.node, n + a.label, a.cost))
        .collect();
    assignments.extend((0..n + m).map(|k| (k, k, 0.0)));
    assignments.extend(problem.assignments().iter().map(|a| (n + a.label, a.node, 0.0)));
    let edges = problem.edges().iter().map(|e| (e.a, e.b, e.cost)).collect();
    let qap = Problem::new(n + m, n + m, assignments, edges).expect("construction is valid");
    let report = TransformReport::new(
        "gm_to_qap",
        1.0,
        0.0,
        false,
        Mapping::DisjointUnion {
            num_nodes: n,
            num_labels: m,
        },
    );
    (qap, report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftMode {
    /// Shift only the unary costs by a constant `K`.
    #[default]
    UnaryOnly,
    /// Shift every entry of the cost matrix by `max(w) + 1`.
    Full,
}

/// Reduction of a bijective problem (complete matchings) to graph matching
/// with strictly negative costs, whose optima are complete.
pub fn qap_to_gm(
    problem: &Problem,
    mode: ShiftMode,
) -> Result<(Problem, TransformReport), TransformError> {
    require_square(problem, "qap_to_gm")?;
    let n = problem.num_nodes() as f64;
    let (mut assignments, mut edges) = parts(problem);
    let shift = match mode {
        ShiftMode::Full => {
            // Entries of the dense matrix: unaries, half edge costs, and
            // zeros for compatible pairs without an edge.
            let mut max = f64::NEG_INFINITY;
            for a in &assignments {
                max = max.max(a.2);
            }
            let count = problem.num_assignments();
            for a in 0..count {
                for b in a + 1..count {
                    if compatible(problem, a, b) {
                        max = max.max(edges.get(&(a, b)).map_or(0.0, |c| 0.5 * c));
                    }
                }
            }
            if count == 0 {
                max = 0.0;
            }
            let k = max + 1.0;
            for a in &mut assignments {
                a.2 -= k;
            }
            for a in 0..count {
                for b in a + 1..count {
                    if compatible(problem, a, b) {
                        *edges.entry((a, b)).or_insert(0.0) -= 2.0 * k;
                    }
                }
            }
            -n * n * k
        }
        ShiftMode::UnaryOnly => {
            // Any complete matching then beats any incomplete one.
            let mass: f64 = assignments.iter().map(|a| a.2.abs()).sum::<f64>()
                + edges.values().map(|c| c.abs()).sum::<f64>();
            let k = 2.0 * mass + 1.0;
            for a in &mut assignments {
                a.2 -= k;
            }
            -n * k
        }
    };
    let out = rebuild(problem, assignments, edges)?;
    let name = match mode {
        ShiftMode::Full => "qap_to_gm(full)",
        ShiftMode::UnaryOnly => "qap_to_gm(unary)",
    };
    Ok((out, TransformReport::new(name, 1.0, shift, true, Mapping::Identity)))
}

/// Shifts unary rows and pairwise node blocks so that every finite cost is
/// non-positive. The objective of every complete matching moves by the same
/// constant.
pub fn make_non_positive(problem: &Problem) -> Result<(Problem, TransformReport), TransformError> {
    require_square(problem, "make_non_positive")?;
    let (mut assignments, mut edges) = parts(problem);
    let mut shift = 0.0;

    for i in 0..problem.num_nodes() {
        let ids = problem.node_assignments(i);
        let alpha = ids
            .iter()
            .map(|&id| assignments[id].2)
            .fold(f64::NEG_INFINITY, f64::max);
        if alpha > 0.0 {
            for &id in ids {
                assignments[id].2 -= alpha;
            }
            shift -= alpha;
        }
    }

    let mut blocks: Vec<(usize, usize)> = problem
        .edges()
        .iter()
        .filter(|e| e.cost > 0.0)
        .map(|e| {
            let (i, j) = (problem.assignment(e.a).node, problem.assignment(e.b).node);
            (i.min(j), i.max(j))
        })
        .collect();
    blocks.sort_unstable();
    blocks.dedup();
    for (i, j) in blocks {
        let pairs: Vec<(usize, usize)> = problem
            .node_assignments(i)
            .iter()
            .flat_map(|&a| problem.node_assignments(j).iter().map(move |&b| key(a, b)))
            .filter(|&(a, b)| compatible(problem, a, b))
            .collect();
        let alpha = pairs
            .iter()
            .map(|p| edges.get(p).copied().unwrap_or(0.0))
            .fold(f64::NEG_INFINITY, f64::max);
        if alpha > 0.0 {
            for p in pairs {
                *edges.entry(p).or_insert(0.0) -= alpha;
            }
            shift -= alpha;
        }
    }

    let out = rebuild(problem, assignments, edges)?;
    Ok((
        out,
        TransformReport::new("make_non_positive", 1.0, shift, true, Mapping::Identity),
    ))
}

/// For each assignment with a non-zero unary, the node that receives it and
/// the pairwise entries it is spread over (ties go to the smallest node).
pub fn unary_targets(problem: &Problem) -> Vec<Option<(usize, Vec<usize>)>> {
    (0..problem.num_assignments())
        .map(|a| {
            let x = problem.assignment(a);
            if x.cost == 0.0 {
                return None;
            }
            let mut best: Option<(usize, usize, Vec<usize>)> = None;
            for j in (0..problem.num_nodes()).filter(|&j| j != x.node) {
                let targets: Vec<usize> = problem
                    .node_assignments(j)
                    .iter()
                    .copied()
                    .filter(|&b| problem.assignment(b).label != x.label)
                    .collect();
                if targets.is_empty() {
                    continue;
                }
                let zeros = targets
                    .iter()
                    .filter(|&&b| {
                        !problem
                            .neighbors(a)
                            .iter()
                            .any(|&(o, c)| o == b && c != 0.0)
                    })
                    .count();
                if best.as_ref().is_none_or(|(z, _, _)| zeros < *z) {
                    best = Some((zeros, j, targets));
                }
            }
            best.map(|(_, j, t)| (j, t))
        })
        .collect()
}

/// Moves every unary cost into pairwise entries towards one other node,
/// chosen to create the fewest new non-zeros. Complete-matching objectives
/// are unchanged.
pub fn remove_unary(problem: &Problem) -> Result<(Problem, TransformReport), TransformError> {
    require_square(problem, "remove_unary")?;
    if problem.num_nodes() < 2 {
        return Err(TransformError::TooFewNodes);
    }
    let (mut assignments, mut edges) = parts(problem);
    for (a, target) in unary_targets(problem).into_iter().enumerate() {
        if let Some((_, ids)) = target {
            let u = problem.assignment(a).cost;
            for b in ids {
                *edges.entry(key(a, b)).or_insert(0.0) += u;
            }
        }
    }
    for a in &mut assignments {
        a.2 = 0.0;
    }
    let out = rebuild(problem, assignments, edges)?;
    Ok((
        out,
        TransformReport::new("remove_unary", 1.0, 0.0, true, Mapping::Identity),
    ))
}

/// Flips the sign of every finite cost.
pub fn negate_for_max(problem: &Problem) -> Problem {
    negate_with_report(problem).0
}

pub fn negate_with_report(problem: &Problem) -> (Problem, TransformReport) {
    let assignments = problem
        .assignments()
        .iter()
        .map(|a| (a.node, a.label, -a.cost))
        .collect();
    let edges = problem.edges().iter().map(|e| (e.a, e.b, -e.cost)).collect();
    let out = Problem::with_geometry(
        problem.num_nodes(),
        problem.num_labels(),
        assignments,
        edges,
        problem.geometry().clone(),
    )
    .expect("negation keeps structure");
    (
        out,
        TransformReport::new("negate_for_max", -1.0, 0.0, false, Mapping::Identity),
    )
}

/// Maps LAP solutions of [`ilap_to_lap`] back to labelings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IlapPullback {
    pub num_nodes: usize,
    pub num_labels: usize,
}

impl IlapPullback {
    pub fn labeling(&self, assignment: &[usize]) -> Labeling {
        Labeling::from_vec(
            (0..self.num_nodes)
                .map(|i| Some(assignment[i]).filter(|&c| c < self.num_labels))
                .collect(),
        )
    }
}

/// Square LAP of side `|V| + |L|`: unaries in the `V x L` block (`+inf` for
/// forbidden pairs), zero-cost dummy rows and columns elsewhere.
pub fn ilap_to_lap(problem: &Problem) -> Result<(LapMatrix, IlapPullback), TransformError> {
    if !problem.edges().is_empty() {
        return Err(TransformError::HasEdges(problem.edges().len()));
    }
    let (n, m) = (problem.num_nodes(), problem.num_labels());
    let side = n + m;
    let mut costs = vec![0.0; side * side];
    for i in 0..n {
        for s in 0..m {
            costs[i * side + s] = f64::INFINITY;
        }
    }
    for a in problem.assignments() {
        costs[a.node * side + a.label] = a.cost;
    }
    let matrix = LapMatrix::new(side, costs).expect("square by construction");
    Ok((
        matrix,
        IlapPullback {
            num_nodes: n,
            num_labels: m,
        },
    ))
}

/// Cost-structure requirements of a solver.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Requirements {
    pub bijective: bool,
    pub non_positive: bool,
    pub zero_unary: bool,
}

/// A solver-ready problem and the transforms that produced it.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub problem: Problem,
    pub chain: Vec<TransformReport>,
}

impl Prepared {
    pub fn pullback(&self, y: &Labeling) -> Labeling {
        pullback_chain(&self.chain, y)
    }
}

/// Applies `gm_to_qap -> make_non_positive -> remove_unary` as required.
/// The two cost shifts are only exact on complete matchings, so they always
/// run on the bijective form.
pub fn prepare(problem: &Problem, req: Requirements) -> Result<Prepared, TransformError> {
    let mut current = problem.clone();
    let mut chain = Vec::new();
    if req.bijective || req.non_positive || req.zero_unary {
        let (p, r) = gm_to_qap(&current);
        current = p;
        chain.push(r);
    }
    if req.non_positive {
        let (p, r) = make_non_positive(&current)?;
        current = p;
        chain.push(r);
    }
    if req.zero_unary && current.num_nodes() >= 2 {
        let (p, r) = remove_unary(&current)?;
        current = p;
        chain.push(r);
    }
    Ok(Prepared {
        problem: current,
        chain,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lap::solve_lap;
    use crate::model::fixtures::{lab, t1};
    use crate::model::{brute_force_solve, BruteForce};

    fn complete_oracle(p: &Problem) -> f64 {
        BruteForce {
            max_assignments: usize::MAX,
            max_nodes: usize::MAX,
            complete: true,
        }
        .solve(p)
        .unwrap()
        .unwrap()
        .1
    }

    fn free_oracle(p: &Problem) -> (Labeling, f64) {
        BruteForce {
            max_assignments: usize::MAX,
            max_nodes: usize::MAX,
            complete: false,
        }
        .solve(p)
        .unwrap()
        .unwrap()
    }

    #[test]
    fn gm_to_qap_t1() {
        let (q, r) = gm_to_qap(&t1());
        assert_eq!(q.num_nodes(), 4);
        assert_eq!(q.num_labels(), 4);
        assert_eq!(complete_oracle(&q), -7.0);
        let y = lab(&[Some(0), Some(1)]);
        let image = r.forward(&y);
        assert_eq!(image.num_assigned(), 4);
        assert_eq!(q.evaluate(&image).unwrap(), -7.0);
        assert_eq!(r.pullback(&image), y);
    }

    #[test]
    fn gm_to_qap_empty_and_positive() {
        let (q, _) = gm_to_qap(&Problem::empty());
        assert_eq!(q.num_nodes(), 0);
        assert_eq!(q.num_assignments(), 0);
        let pos = Problem::new(2, 2, vec![(0, 0, 2.0), (1, 1, 3.0)], vec![(0, 1, 1.0)]).unwrap();
        let (q, r) = gm_to_qap(&pos);
        assert_eq!(complete_oracle(&q), 0.0);
        let (y, _) = BruteForce {
            max_assignments: usize::MAX,
            max_nodes: usize::MAX,
            complete: true,
        }
        .solve(&q)
        .unwrap()
        .unwrap();
        assert_eq!(r.pullback(&y), lab(&[None, None]));
    }

    #[test]
    fn qap_to_gm_full_t1() {
        let (g, r) = qap_to_gm(&t1(), ShiftMode::Full).unwrap();
        assert!(g.assignments().iter().all(|a| a.cost < 0.0));
        assert!(g.edges().iter().all(|e| e.cost < 0.0));
        // Both compatible pairs carry edges, so max(w) is the half edge -0.5.
        let (y, v) = free_oracle(&g);
        assert_eq!(y.num_assigned(), 2);
        let qap_opt = complete_oracle(&t1());
        assert!((v - (qap_opt + r.shift)).abs() < 1e-9);
        assert_eq!(r.shift, -4.0 * 0.5);
    }

    #[test]
    fn qap_to_gm_single() {
        let p = Problem::new(1, 1, vec![(0, 0, 5.0)], vec![]).unwrap();
        let (g, r) = qap_to_gm(&p, ShiftMode::Full).unwrap();
        assert_eq!(g.assignment(0).cost, -1.0);
        assert_eq!(r.shift, -6.0);
    }

    #[test]
    fn qap_to_gm_unary_keeps_pairwise() {
        let (g, r) = qap_to_gm(&t1(), ShiftMode::UnaryOnly).unwrap();
        assert_eq!(g.edges(), t1().edges());
        let (y, v) = free_oracle(&g);
        assert_eq!(y.num_assigned(), 2);
        assert!((v - (complete_oracle(&t1()) + r.shift)).abs() < 1e-9);
        assert!(qap_to_gm(&Problem::new(1, 2, vec![], vec![]).unwrap(), ShiftMode::Full).is_err());
    }

    #[test]
    fn non_positive_rows() {
        let p = Problem::new(2, 2, vec![(0, 0, 3.0), (0, 1, -1.0), (1, 0, 0.0), (1, 1, 0.0)], vec![])
            .unwrap();
        let (q, r) = make_non_positive(&p).unwrap();
        assert_eq!(q.assignment(0).cost, 0.0);
        assert_eq!(q.assignment(1).cost, -4.0);
        assert_eq!(r.shift, -3.0);
        let (same, r0) = make_non_positive(&t1()).unwrap();
        assert_eq!(same, t1());
        assert_eq!(r0.shift, 0.0);
        assert!(make_non_positive(&Problem::new(1, 2, vec![], vec![]).unwrap()).is_err());
    }

    #[test]
    fn non_positive_pairwise_block_densifies() {
        let p = Problem::new(
            2,
            2,
            vec![(0, 0, 0.0), (0, 1, 0.0), (1, 0, 0.0), (1, 1, 0.0)],
            vec![(0, 3, 2.0)],
        )
        .unwrap();
        let (q, r) = make_non_positive(&p).unwrap();
        assert_eq!(r.shift, -2.0);
        // (0,0)-(1,1) becomes 0 and is dropped; (0,1)-(1,0) becomes -2.
        assert_eq!(q.edges().len(), 1);
        assert_eq!((q.edges()[0].a, q.edges()[0].b, q.edges()[0].cost), (1, 2, -2.0));
    }

    #[test]
    fn non_positive_preserves_argmin_on_qap_of_t1() {
        let (q, _) = gm_to_qap(&t1());
        let (nq, _) = make_non_positive(&q).unwrap();
        let oracle = BruteForce {
            max_assignments: usize::MAX,
            max_nodes: usize::MAX,
            complete: true,
        };
        let a = oracle.solve(&q).unwrap().unwrap().0;
        let b = oracle.solve(&nq).unwrap().unwrap().0;
        assert_eq!(a, b);
    }

    #[test]
    fn remove_unary_two_nodes() {
        let p = Problem::new(
            2,
            2,
            vec![(0, 0, -3.0), (0, 1, 0.0), (1, 0, 0.0), (1, 1, 0.0)],
            vec![],
        )
        .unwrap();
        let (q, r) = remove_unary(&p).unwrap();
        assert_eq!(r.shift, 0.0);
        assert!(q.assignments().iter().all(|a| a.cost == 0.0));
        // The unary of (0,0) lands on the entry towards (1,1).
        assert_eq!(q.edges().len(), 1);
        assert_eq!((q.edges()[0].a, q.edges()[0].b, q.edges()[0].cost), (0, 3, -3.0));
        let zero = Problem::new(2, 2, vec![(0, 0, 0.0), (1, 1, 0.0)], vec![(0, 1, -1.0)]).unwrap();
        assert_eq!(remove_unary(&zero).unwrap().0, zero);
        assert_eq!(
            remove_unary(&Problem::new(1, 1, vec![(0, 0, 1.0)], vec![]).unwrap()),
            Err(TransformError::TooFewNodes)
        );
    }

    #[test]
    fn negation() {
        let n = negate_for_max(&t1());
        assert_eq!(n.assignment(0).cost, 1.0);
        assert_eq!(negate_for_max(&n), t1());
        let (y_min, _) = brute_force_solve(&t1()).unwrap();
        // Maximizing the negated objective: minimize its negation again.
        let (y_max, _) = brute_force_solve(&negate_for_max(&n)).unwrap();
        assert_eq!(y_min, y_max);
    }

    #[test]
    fn ilap_to_lap_small() {
        let p = Problem::new(1, 1, vec![(0, 0, -1.0)], vec![]).unwrap();
        let (m, back) = ilap_to_lap(&p).unwrap();
        assert_eq!(m, LapMatrix::from_rows(&[vec![-1.0, 0.0], vec![0.0, 0.0]]).unwrap());
        let s = solve_lap(&m).unwrap();
        assert_eq!(s.value, -1.0);
        assert_eq!(back.labeling(&s.assignment), lab(&[Some(0)]));

        let pos = Problem::new(2, 2, vec![(0, 0, 1.0), (1, 0, 2.0)], vec![]).unwrap();
        let (m, back) = ilap_to_lap(&pos).unwrap();
        let s = solve_lap(&m).unwrap();
        assert_eq!(s.value, 0.0);
        assert_eq!(back.labeling(&s.assignment), lab(&[None, None]));
        assert!(ilap_to_lap(&t1()).is_err());
    }

    #[test]
    fn prepare_chain_pulls_back() {
        let prep = prepare(
            &t1(),
            Requirements {
                bijective: true,
                non_positive: true,
                zero_unary: true,
            },
        )
        .unwrap();
        assert_eq!(prep.chain.len(), 3);
        let y = lab(&[Some(1), Some(0)]);
        let image = forward_chain(&prep.chain, &y);
        assert_eq!(prep.pullback(&image), y);
        let shift: f64 = prep.chain.iter().map(|r| r.shift).sum();
        assert!((prep.problem.evaluate(&image).unwrap() - (-6.0 + shift)).abs() < 1e-9);
    }
}
