//! Sparse graph matching instances and the objects defined over them.
//!
//! A [`Problem`] stores the candidate assignments `(i, s)` of nodes to labels
//! together with their unary costs, and edges between pairs of candidate
//! assignments carrying the symmetrized pairwise cost `c_{is,jl} + c_{jl,is}`.
//! Absent candidates are forbidden assignments. A [`Labeling`] maps every
//! node to a label or to the dummy label (unassigned).

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while building or evaluating problems.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("assignment {id}: node {node} out of range (|V| = {num_nodes})")]
    NodeOutOfRange {
        id: usize,
        node: usize,
        num_nodes: usize,
    },
    #[error("assignment {id}: label {label} out of range (|L| = {num_labels})")]
    LabelOutOfRange {
        id: usize,
        label: usize,
        num_labels: usize,
    },
    #[error("duplicate assignment ({node}, {label})")]
    DuplicateAssignment { node: usize, label: usize },
    #[error("edge references unknown assignment {0}")]
    UnknownAssignment(usize),
    #[error("edge ({0}, {1}) connects assignments sharing a node")]
    EdgeSharesNode(usize, usize),
    #[error("edge ({0}, {1}) connects assignments sharing a label")]
    EdgeSharesLabel(usize, usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("non-finite cost {0}")]
    NonFiniteCost(f64),
    #[error("labeling has {got} entries, problem has {expected} nodes")]
    LabelingSize { expected: usize, got: usize },
    #[error("node {node} -> label {label} is not a candidate assignment")]
    InvalidLabeling { node: usize, label: usize },
    #[error("label {label} used by nodes {first} and {second}")]
    Infeasible {
        label: usize,
        first: usize,
        second: usize,
    },
    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("fractional weight {value} at assignment {id} must be finite and non-negative")]
    InvalidWeight { id: usize, value: f64 },
    #[error("fractional solution has {got} entries, problem has {expected} assignments")]
    WeightCount { expected: usize, got: usize },
}

/// A candidate assignment `node -> label` with its unary cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub node: usize,
    pub label: usize,
    pub cost: f64,
}

/// Pairwise term between two assignments, `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub cost: f64,
}

/// Optional visualization data carried by dd files (`i0`, `i1`, `n0`, `n1`).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub node_points: Vec<(usize, f64, f64)>,
    pub label_points: Vec<(usize, f64, f64)>,
    pub node_neighbors: Vec<(usize, usize)>,
    pub label_neighbors: Vec<(usize, usize)>,
}

impl Geometry {
    pub fn is_empty(&self) -> bool {
        self.node_points.is_empty()
            && self.label_points.is_empty()
            && self.node_neighbors.is_empty()
            && self.label_neighbors.is_empty()
    }
}

/// An immutable sparse graph matching instance.
#[derive(Debug, Clone)]
pub struct Problem {
    num_nodes: usize,
    num_labels: usize,
    assignments: Vec<Assignment>,
    edges: Vec<Edge>,
    geometry: Geometry,
    by_node: Vec<Vec<usize>>,
    by_label: Vec<Vec<usize>>,
    adjacency: Vec<Vec<(usize, f64)>>,
    lookup: HashMap<(usize, usize), usize>,
}

impl PartialEq for Problem {
    fn eq(&self, other: &Self) -> bool {
        self.num_nodes == other.num_nodes
            && self.num_labels == other.num_labels
            && self.assignments == other.assignments
            && self.edges == other.edges
            && self.geometry == other.geometry
    }
}

impl Problem {
    /// Builds a problem from `(node, label, unary)` triples (ids are the
    /// positions in the vector) and `(id1, id2, cost)` edges.
    pub fn new(
        num_nodes: usize,
        num_labels: usize,
        assignments: Vec<(usize, usize, f64)>,
        edges: Vec<(usize, usize, f64)>,
    ) -> Result<Self, ModelError> {
        Self::with_geometry(num_nodes, num_labels, assignments, edges, Geometry::default())
    }

    pub fn with_geometry(
        num_nodes: usize,
        num_labels: usize,
        assignments: Vec<(usize, usize, f64)>,
        edges: Vec<(usize, usize, f64)>,
        geometry: Geometry,
    ) -> Result<Self, ModelError> {
        let mut lookup = HashMap::with_capacity(assignments.len());
        let mut by_node = vec![Vec::new(); num_nodes];
        let mut by_label = vec![Vec::new(); num_labels];
        let mut list = Vec::with_capacity(assignments.len());
        for (id, &(node, label, cost)) in assignments.iter().enumerate() {
            if node >= num_nodes {
                return Err(ModelError::NodeOutOfRange {
                    id,
                    node,
                    num_nodes,
                });
            }
            if label >= num_labels {
                return Err(ModelError::LabelOutOfRange {
                    id,
                    label,
                    num_labels,
                });
            }
            if !cost.is_finite() {
                return Err(ModelError::NonFiniteCost(cost));
            }
            if lookup.insert((node, label), id).is_some() {
                return Err(ModelError::DuplicateAssignment { node, label });
            }
            by_node[node].push(id);
            by_label[label].push(id);
            list.push(Assignment { node, label, cost });
        }

        let mut normalized = Vec::with_capacity(edges.len());
        for &(x, y, cost) in &edges {
            let (a, b) = if x <= y { (x, y) } else { (y, x) };
            if b >= list.len() {
                return Err(ModelError::UnknownAssignment(b));
            }
            if !cost.is_finite() {
                return Err(ModelError::NonFiniteCost(cost));
            }
            if list[a].node == list[b].node {
                return Err(ModelError::EdgeSharesNode(x, y));
            }
            if list[a].label == list[b].label {
                return Err(ModelError::EdgeSharesLabel(x, y));
            }
            normalized.push(Edge { a, b, cost });
        }
        normalized.sort_by_key(|e| (e.a, e.b));
        for w in normalized.windows(2) {
            if w[0].a == w[1].a && w[0].b == w[1].b {
                return Err(ModelError::DuplicateEdge(w[0].a, w[0].b));
            }
        }

        let mut adjacency = vec![Vec::new(); list.len()];
        for e in &normalized {
            adjacency[e.a].push((e.b, e.cost));
            adjacency[e.b].push((e.a, e.cost));
        }
        for adj in &mut adjacency {
            adj.sort_by_key(|&(b, _)| (list[b].node, b));
        }

        Ok(Self {
            num_nodes,
            num_labels,
            assignments: list,
            edges: normalized,
            geometry,
            by_node,
            by_label,
            adjacency,
            lookup,
        })
    }

    /// A problem with no nodes and no labels.
    pub fn empty() -> Self {
        Self::new(0, 0, Vec::new(), Vec::new()).expect("empty problem is valid")
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn num_assignments(&self) -> usize {
        self.assignments.len()
    }

    pub fn assignments(&self) -> &[Assignment] {
        &self.assignments
    }

    pub fn assignment(&self, id: usize) -> &Assignment {
        &self.assignments[id]
    }

    /// Edges sorted by `(a, b)` with `a < b`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    /// Candidate assignment ids of `node`, in id order.
    pub fn node_assignments(&self, node: usize) -> &[usize] {
        &self.by_node[node]
    }

    pub fn label_assignments(&self, label: usize) -> &[usize] {
        &self.by_label[label]
    }

    /// Neighbors of an assignment with the symmetrized edge cost, grouped by
    /// the neighbor's node.
    pub fn neighbors(&self, id: usize) -> &[(usize, f64)] {
        &self.adjacency[id]
    }

    pub fn find(&self, node: usize, label: usize) -> Option<usize> {
        self.lookup.get(&(node, label)).copied()
    }

    /// `|V| = |L|`, the shape required by bijective solvers.
    pub fn is_square(&self) -> bool {
        self.num_nodes == self.num_labels
    }

    /// Largest absolute finite cost, 0 for an empty problem.
    pub fn max_abs_cost(&self) -> f64 {
        self.assignments
            .iter()
            .map(|a| a.cost.abs())
            .chain(self.edges.iter().map(|e| e.cost.abs()))
            .fold(0.0, f64::max)
    }

    /// Assignment ids selected by a labeling; `None` if it references a
    /// non-candidate pair or has the wrong size.
    pub fn active_ids(&self, y: &Labeling) -> Result<Vec<usize>, ModelError> {
        if y.len() != self.num_nodes {
            return Err(ModelError::LabelingSize {
                expected: self.num_nodes,
                got: y.len(),
            });
        }
        let mut ids = Vec::new();
        for (node, label) in y.iter().enumerate() {
            if let Some(label) = label {
                match self.find(node, label) {
                    Some(id) => ids.push(id),
                    None => return Err(ModelError::InvalidLabeling { node, label }),
                }
            }
        }
        Ok(ids)
    }

    /// Objective of a feasible labeling.
    pub fn evaluate(&self, y: &Labeling) -> Result<f64, ModelError> {
        let ids = self.active_ids(y)?;
        check_unique(y)?;
        Ok(self.evaluate_ids(&ids))
    }

    /// Objective of a set of active assignments (no feasibility check).
    pub(crate) fn evaluate_ids(&self, ids: &[usize]) -> f64 {
        let mut active = vec![false; self.assignments.len()];
        for &id in ids {
            active[id] = true;
        }
        let mut total = 0.0;
        for &id in ids {
            total += self.assignments[id].cost;
            for &(other, cost) in &self.adjacency[id] {
                if other > id && active[other] {
                    total += cost;
                }
            }
        }
        total
    }

    pub fn is_feasible(&self, y: &Labeling) -> bool {
        self.active_ids(y).is_ok() && check_unique(y).is_ok()
    }

    /// Indicator vector over assignment ids.
    pub fn indicator(&self, y: &Labeling) -> Result<Vec<f64>, ModelError> {
        let mut x = vec![0.0; self.assignments.len()];
        for id in self.active_ids(y)? {
            x[id] = 1.0;
        }
        Ok(x)
    }

    /// Labeling selecting the given assignment ids.
    pub fn labeling_from_ids(&self, ids: impl IntoIterator<Item = usize>) -> Labeling {
        let mut y = Labeling::unassigned(self.num_nodes);
        for id in ids {
            let a = self.assignments[id];
            y.set(a.node, Some(a.label));
        }
        y
    }

    /// Dense cost matrix over `V x L` (index `i * |L| + s`).
    pub fn to_dense(&self, budget: usize) -> Result<DenseCost, ModelError> {
        let side = self.num_nodes * self.num_labels;
        if side > budget {
            return Err(ModelError::BudgetExceeded(format!(
                "dense side {side} exceeds budget {budget}"
            )));
        }
        let mut data = vec![0.0; side * side];
        for i in 0..self.num_nodes {
            for s in 0..self.num_labels {
                let k = i * self.num_labels + s;
                data[k * side + k] = f64::INFINITY;
            }
        }
        let index = |a: &Assignment| a.node * self.num_labels + a.label;
        for a in &self.assignments {
            let k = index(a);
            data[k * side + k] = a.cost;
        }
        for e in &self.edges {
            let p = index(&self.assignments[e.a]);
            let q = index(&self.assignments[e.b]);
            data[p * side + q] = 0.5 * e.cost;
            data[q * side + p] = 0.5 * e.cost;
        }
        Ok(DenseCost { side, data })
    }
}

fn check_unique(y: &Labeling) -> Result<(), ModelError> {
    let mut owner: HashMap<usize, usize> = HashMap::new();
    for (node, label) in y.iter().enumerate() {
        if let Some(label) = label {
            if let Some(first) = owner.insert(label, node) {
                return Err(ModelError::Infeasible {
                    label,
                    first,
                    second: node,
                });
            }
        }
    }
    Ok(())
}

/// Square dense cost matrix; forbidden diagonal entries are `+inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseCost {
    pub side: usize,
    pub data: Vec<f64>,
}

impl DenseCost {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.side + col]
    }

    /// `x^T C x` for a 0/1 vector; forbidden entries are skipped when the
    /// corresponding coordinate is zero.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let mut total = 0.0;
        for p in 0..self.side {
            if x[p] == 0.0 {
                continue;
            }
            for q in 0..self.side {
                if x[q] != 0.0 {
                    total += self.get(p, q) * x[p] * x[q];
                }
            }
        }
        total
    }
}

/// Per-node label or dummy (`None`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Labeling(Vec<Option<usize>>);

impl Labeling {
    pub fn unassigned(num_nodes: usize) -> Self {
        Self(vec![None; num_nodes])
    }

    pub fn from_vec(labels: Vec<Option<usize>>) -> Self {
        Self(labels)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, node: usize) -> Option<usize> {
        self.0[node]
    }

    pub fn set(&mut self, node: usize, label: Option<usize>) {
        self.0[node] = label;
    }

    pub fn iter(&self) -> impl Iterator<Item = Option<usize>> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[Option<usize>] {
        &self.0
    }

    pub fn num_assigned(&self) -> usize {
        self.0.iter().filter(|l| l.is_some()).count()
    }
}

impl fmt::Display for Labeling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            match l {
                Some(s) => write!(f, "{i}->{s}")?,
                None => write!(f, "{i}->#")?,
            }
        }
        write!(f, "}}")
    }
}

/// Non-negative weights over candidate assignments.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalSolution(Vec<f64>);

impl FractionalSolution {
    pub fn new(problem: &Problem, weights: Vec<f64>) -> Result<Self, ModelError> {
        if weights.len() != problem.num_assignments() {
            return Err(ModelError::WeightCount {
                expected: problem.num_assignments(),
                got: weights.len(),
            });
        }
        if let Some((id, &value)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < 0.0)
        {
            return Err(ModelError::InvalidWeight { id, value });
        }
        Ok(Self(weights))
    }

    pub fn indicator(problem: &Problem, y: &Labeling) -> Result<Self, ModelError> {
        Ok(Self(problem.indicator(y)?))
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }
}

/// Limits for the exhaustive oracle.
#[derive(Debug, Clone, Copy)]
pub struct BruteForce {
    pub max_assignments: usize,
    pub max_nodes: usize,
    /// Only complete matchings (every node assigned) are admitted.
    pub complete: bool,
}

impl Default for BruteForce {
    fn default() -> Self {
        Self {
            max_assignments: 25,
            max_nodes: 8,
            complete: false,
        }
    }
}

impl BruteForce {
    /// Enumerates all feasible labelings; returns the lexicographically
    /// smallest optimum (dummy sorts before every label). `None` when
    /// `complete` is set and no complete matching exists.
    pub fn solve(&self, problem: &Problem) -> Result<Option<(Labeling, f64)>, ModelError> {
        if problem.num_assignments() > self.max_assignments && problem.num_nodes() > self.max_nodes
        {
            return Err(ModelError::BudgetExceeded(format!(
                "{} assignments on {} nodes",
                problem.num_assignments(),
                problem.num_nodes()
            )));
        }
        let n = problem.num_nodes();
        // suffix[k]: lowest possible contribution of nodes k.. and of edges
        // whose later endpoint lies in k..
        let mut node_min = vec![0.0f64; n + 1];
        for (i, slot) in node_min.iter_mut().enumerate().take(n) {
            let unary = problem
                .node_assignments(i)
                .iter()
                .map(|&id| problem.assignment(id).cost)
                .fold(f64::INFINITY, f64::min);
            let m = if self.complete { unary } else { unary.min(0.0) };
            *slot = if m.is_finite() { m } else { 0.0 };
        }
        for e in problem.edges() {
            let later = problem
                .assignment(e.a)
                .node
                .max(problem.assignment(e.b).node);
            node_min[later] += e.cost.min(0.0);
        }
        let mut suffix = vec![0.0; n + 1];
        for k in (0..n).rev() {
            suffix[k] = suffix[k + 1] + node_min[k];
        }

        let mut search = Search {
            problem,
            complete: self.complete,
            suffix,
            active: vec![false; problem.num_assignments()],
            used_label: vec![false; problem.num_labels()],
            current: Labeling::unassigned(n),
            best: None,
        };
        search.descend(0, 0.0);
        Ok(search.best)
    }
}

struct Search<'a> {
    problem: &'a Problem,
    complete: bool,
    suffix: Vec<f64>,
    active: Vec<bool>,
    used_label: Vec<bool>,
    current: Labeling,
    best: Option<(Labeling, f64)>,
}

impl Search<'_> {
    fn descend(&mut self, node: usize, value: f64) {
        if let Some((_, best)) = &self.best {
            // Later leaves are lexicographically larger, so ties cannot win.
            if value + self.suffix[node] >= *best - 1e-12 * best.abs().max(1.0) {
                return;
            }
        }
        if node == self.problem.num_nodes() {
            self.best = Some((self.current.clone(), value));
            return;
        }
        if !self.complete {
            self.current.set(node, None);
            self.descend(node + 1, value);
        }
        let problem = self.problem;
        for &id in problem.node_assignments(node) {
            let a = problem.assignment(id);
            if self.used_label[a.label] {
                continue;
            }
            let mut delta = a.cost;
            for &(other, cost) in problem.neighbors(id) {
                if self.active[other] {
                    delta += cost;
                }
            }
            self.active[id] = true;
            self.used_label[a.label] = true;
            self.current.set(node, Some(a.label));
            self.descend(node + 1, value + delta);
            self.active[id] = false;
            self.used_label[a.label] = false;
        }
        self.current.set(node, None);
    }
}

/// Exhaustive optimum over all feasible (possibly incomplete) labelings.
pub fn brute_force_solve(problem: &Problem) -> Result<(Labeling, f64), ModelError> {
    Ok(BruteForce::default()
        .solve(problem)?
        .expect("the empty matching is always feasible"))
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Two nodes, two labels, all four candidates, two edges.
    pub fn t1() -> Problem {
        Problem::new(
            2,
            2,
            vec![(0, 0, -1.0), (0, 1, -2.0), (1, 0, -3.0), (1, 1, -1.0)],
            vec![(0, 3, -5.0), (1, 2, -1.0)],
        )
        .unwrap()
    }

    pub fn lab(v: &[Option<usize>]) -> Labeling {
        Labeling::from_vec(v.to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::{lab, t1};
    use super::*;

    #[test]
    fn evaluate_t1() {
        let p = t1();
        assert_eq!(p.evaluate(&lab(&[Some(0), Some(1)])).unwrap(), -7.0);
        assert_eq!(p.evaluate(&lab(&[None, None])).unwrap(), 0.0);
        assert_eq!(p.evaluate(&lab(&[Some(1), Some(0)])).unwrap(), -6.0);
    }

    #[test]
    fn evaluate_errors() {
        let p = Problem::new(2, 2, vec![(0, 0, 1.0), (1, 0, 1.0)], vec![]).unwrap();
        assert!(matches!(
            p.evaluate(&lab(&[Some(1), None])),
            Err(ModelError::InvalidLabeling { node: 0, label: 1 })
        ));
        assert!(matches!(
            p.evaluate(&lab(&[Some(0), Some(0)])),
            Err(ModelError::Infeasible { label: 0, .. })
        ));
        assert!(matches!(
            p.evaluate(&lab(&[None])),
            Err(ModelError::LabelingSize { .. })
        ));
    }

    #[test]
    fn feasibility_t1() {
        let p = t1();
        assert!(!p.is_feasible(&lab(&[Some(0), Some(0)])));
        assert!(p.is_feasible(&lab(&[None, Some(1)])));
        assert!(p.is_feasible(&lab(&[Some(0), Some(1)])));
    }

    #[test]
    fn construction_rejects_bad_edges() {
        let a = vec![(0, 0, 0.0), (0, 1, 0.0), (1, 0, 0.0), (1, 1, 0.0)];
        assert_eq!(
            Problem::new(2, 2, a.clone(), vec![(0, 1, 1.0)]).unwrap_err(),
            ModelError::EdgeSharesNode(0, 1)
        );
        assert_eq!(
            Problem::new(2, 2, a.clone(), vec![(0, 2, 1.0)]).unwrap_err(),
            ModelError::EdgeSharesLabel(0, 2)
        );
        assert_eq!(
            Problem::new(2, 2, a.clone(), vec![(0, 3, 1.0), (3, 0, 2.0)]).unwrap_err(),
            ModelError::DuplicateEdge(0, 3)
        );
        assert_eq!(
            Problem::new(2, 2, a.clone(), vec![(0, 9, 1.0)]).unwrap_err(),
            ModelError::UnknownAssignment(9)
        );
        assert_eq!(
            Problem::new(2, 2, vec![(0, 0, 0.0), (0, 0, 1.0)], vec![]).unwrap_err(),
            ModelError::DuplicateAssignment { node: 0, label: 0 }
        );
        assert!(matches!(
            Problem::new(1, 1, vec![(0, 0, f64::NAN)], vec![]),
            Err(ModelError::NonFiniteCost(_))
        ));
    }

    #[test]
    fn brute_force_t1() {
        let (y, v) = brute_force_solve(&t1()).unwrap();
        assert_eq!(y, lab(&[Some(0), Some(1)]));
        assert_eq!(v, -7.0);
    }

    #[test]
    fn brute_force_ties_and_positive() {
        let zero = Problem::new(2, 2, vec![(0, 0, 0.0), (1, 1, 0.0)], vec![(0, 1, 0.0)]).unwrap();
        assert_eq!(brute_force_solve(&zero).unwrap(), (lab(&[None, None]), 0.0));
        let pos = Problem::new(2, 2, vec![(1, 0, 3.5)], vec![]).unwrap();
        assert_eq!(brute_force_solve(&pos).unwrap(), (lab(&[None, None]), 0.0));
    }

    #[test]
    fn brute_force_budget() {
        let mut a = Vec::new();
        for i in 0..9 {
            for s in 0..3 {
                a.push((i, s, -1.0));
            }
        }
        let p = Problem::new(9, 3, a, vec![]).unwrap();
        assert!(matches!(
            brute_force_solve(&p),
            Err(ModelError::BudgetExceeded(_))
        ));
    }

    #[test]
    fn brute_force_complete_mode() {
        let p = Problem::new(2, 2, vec![(0, 0, 1.0), (0, 1, 5.0), (1, 0, 1.0), (1, 1, 2.0)], vec![])
            .unwrap();
        let oracle = BruteForce {
            complete: true,
            ..BruteForce::default()
        };
        let (y, v) = oracle.solve(&p).unwrap().unwrap();
        assert_eq!(y, lab(&[Some(0), Some(1)]));
        assert_eq!(v, 3.0);
        let none = Problem::new(2, 2, vec![(0, 0, 1.0), (1, 0, 1.0)], vec![]).unwrap();
        assert!(oracle.solve(&none).unwrap().is_none());
    }

    #[test]
    fn dense_view() {
        let d = t1().to_dense(64).unwrap();
        assert_eq!(d.side, 4);
        // (0,0) is row 0, (1,1) is row 3.
        assert_eq!(d.get(0, 3), -2.5);
        assert_eq!(d.get(3, 0), -2.5);
        assert_eq!(d.get(1, 1), -2.0);
        let empty = Problem::empty().to_dense(64).unwrap();
        assert_eq!(empty.side, 0);
        assert!(t1().to_dense(3).is_err());
    }

    #[test]
    fn dense_forbidden_diagonal() {
        let p = Problem::new(2, 2, vec![(0, 0, 1.0)], vec![]).unwrap();
        let d = p.to_dense(16).unwrap();
        assert_eq!(d.get(0, 0), 1.0);
        assert!(d.get(3, 3).is_infinite());
    }

    #[test]
    fn fractional_validation() {
        let p = t1();
        assert!(FractionalSolution::new(&p, vec![0.0, 0.5, 1.0, 2.0]).is_ok());
        assert!(FractionalSolution::new(&p, vec![0.0, -0.5, 1.0, 2.0]).is_err());
        assert!(FractionalSolution::new(&p, vec![0.0, f64::NAN, 1.0, 2.0]).is_err());
        assert!(FractionalSolution::new(&p, vec![0.0]).is_err());
    }
}
