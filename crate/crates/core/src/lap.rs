//! Exact linear assignment by shortest augmenting paths with dual
//! potentials, and the LAP-based rounding shared by continuous solvers.

use thiserror::Error;

use crate::model::{FractionalSolution, Labeling, Problem};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LapError {
    #[error("no finite complete assignment exists")]
    Infeasible,
    #[error("cost matrix has {got} entries, expected {expected}")]
    Shape { expected: usize, got: usize },
    #[error("NaN cost at ({0}, {1})")]
    NanCost(usize, usize),
    #[error("problem has {0} edges; linear assignment needs an edge-free problem")]
    HasEdges(usize),
}

/// Square cost matrix; `+inf` marks a forbidden pair.
#[derive(Debug, Clone, PartialEq)]
pub struct LapMatrix {
    n: usize,
    costs: Vec<f64>,
}

impl LapMatrix {
    pub fn new(n: usize, costs: Vec<f64>) -> Result<Self, LapError> {
        if costs.len() != n * n {
            return Err(LapError::Shape {
                expected: n * n,
                got: costs.len(),
            });
        }
        if let Some(k) = costs.iter().position(|c| c.is_nan()) {
            return Err(LapError::NanCost(k / n, k % n));
        }
        Ok(Self { n, costs })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LapError> {
        let n = rows.len();
        let costs: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(n, costs)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.costs[row * self.n + col]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LapSolution {
    /// Column assigned to each row.
    pub assignment: Vec<usize>,
    pub value: f64,
}

/// Minimum-cost complete assignment.
pub fn solve_lap(m: &LapMatrix) -> Result<LapSolution, LapError> {
    let assignment = solve_rect(m.n, m.n, |r, c| m.get(r, c))?;
    let value = assignment
        .iter()
        .enumerate()
        .map(|(r, &c)| m.get(r, c))
        .sum();
    Ok(LapSolution { assignment, value })
}

/// Rows-to-columns assignment for `rows <= cols`, every row matched.
/// Ties go to the smallest column index.
pub(crate) fn solve_rect(
    rows: usize,
    cols: usize,
    cost: impl Fn(usize, usize) -> f64,
) -> Result<Vec<usize>, LapError> {
    debug_assert!(rows <= cols);
    let inf = f64::INFINITY;
    let mut u = vec![0.0; rows + 1];
    let mut v = vec![0.0; cols + 1];
    let mut owner = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];
    let mut minv = vec![inf; cols + 1];
    let mut used = vec![false; cols + 1];

    for i in 1..=rows {
        owner[0] = i;
        let mut j0 = 0;
        minv.fill(inf);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=cols {
                if used[j] {
                    continue;
                }
                let c = cost(i0 - 1, j - 1);
                if c.is_finite() {
                    let cur = c - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            if j1 == 0 {
                return Err(LapError::Infeasible);
            }
            for j in 0..=cols {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0; rows];
    for j in 1..=cols {
        if owner[j] != 0 {
            assignment[owner[j] - 1] = j - 1;
        }
    }
    Ok(assignment)
}

/// Optimal incomplete matching for per-assignment costs: every node takes
/// a candidate label or the dummy at cost 0. Only negative costs can enter
/// an optimal matching, so the LAP is built over those alone.
pub fn min_cost_matching(problem: &Problem, costs: &[f64]) -> (Labeling, f64) {
    debug_assert_eq!(costs.len(), problem.num_assignments());
    let mut row_of = vec![usize::MAX; problem.num_nodes()];
    let mut col_of = vec![usize::MAX; problem.num_labels()];
    let mut rows = Vec::new();
    let mut cols = Vec::new();
    for (id, a) in problem.assignments().iter().enumerate() {
        if costs[id] < 0.0 {
            if row_of[a.node] == usize::MAX {
                row_of[a.node] = rows.len();
                rows.push(a.node);
            }
            if col_of[a.label] == usize::MAX {
                col_of[a.label] = cols.len();
                cols.push(a.label);
            }
        }
    }
    let (nr, nc) = (rows.len(), cols.len());
    let mut table = vec![f64::INFINITY; nr * (nc + nr)];
    for (id, a) in problem.assignments().iter().enumerate() {
        if costs[id] < 0.0 {
            table[row_of[a.node] * (nc + nr) + col_of[a.label]] = costs[id];
        }
    }
    for r in 0..nr {
        // Private dummy column of row r.
        table[r * (nc + nr) + nc + r] = 0.0;
    }
    let assignment = solve_rect(nr, nc + nr, |r, c| table[r * (nc + nr) + c])
        .expect("dummy columns make every row assignable");

    let mut y = Labeling::unassigned(problem.num_nodes());
    let mut value = 0.0;
    for (r, &c) in assignment.iter().enumerate() {
        if c < nc {
            let node = rows[r];
            let label = cols[c];
            let id = problem.find(node, label).expect("finite entry is a candidate");
            y.set(node, Some(label));
            value += costs[id];
        }
    }
    (y, value)
}

/// Optimal incomplete matching of an edge-free problem.
pub fn solve_ilap(problem: &Problem) -> Result<(Labeling, f64), LapError> {
    if !problem.edges().is_empty() {
        return Err(LapError::HasEdges(problem.edges().len()));
    }
    let costs: Vec<f64> = problem.assignments().iter().map(|a| a.cost).collect();
    Ok(min_cost_matching(problem, &costs))
}

/// Feasible labeling of maximum total weight; an indicator of a feasible
/// labeling is returned unchanged.
pub fn round_fractional(problem: &Problem, x: &FractionalSolution) -> Labeling {
    round_weights(problem, x.weights())
}

/// Same as [`round_fractional`] for an unchecked weight slice; entries that
/// are not strictly positive never enter the matching.
pub(crate) fn round_weights(problem: &Problem, weights: &[f64]) -> Labeling {
    let costs: Vec<f64> = weights
        .iter()
        .map(|&w| if w > 0.0 && w.is_finite() { -w } else { 0.0 })
        .collect();
    min_cost_matching(problem, &costs).0
}
