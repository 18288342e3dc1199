//! Shared pieces of the continuous relaxations: the multilinear objective,
//! its gradient, exact line search, linear minimization over the matching
//! polytope, rounding and Sinkhorn balancing.

use crate::lap::{min_cost_matching, solve_rect};
use crate::model::{Labeling, Problem};

/// `f(x) = sum u_a x_a + sum_{ab in E} e_ab x_a x_b`, which agrees with the
/// objective on indicator vectors.
#[cfg(test)]
pub(crate) fn objective(p: &Problem, x: &[f64]) -> f64 {
    let mut total = 0.0;
    for (a, asg) in p.assignments().iter().enumerate() {
        total += asg.cost * x[a];
        for &(b, e) in p.neighbors(a) {
            if b > a {
                total += e * x[a] * x[b];
            }
        }
    }
    total
}

/// Gradient of [`objective`]: `g_a = u_a + sum_b e_ab x_b`.
pub(crate) fn gradient(p: &Problem, x: &[f64]) -> Vec<f64> {
    p.assignments()
        .iter()
        .enumerate()
        .map(|(a, asg)| asg.cost + p.neighbors(a).iter().map(|&(b, e)| e * x[b]).sum::<f64>())
        .collect()
}

/// `y = -C x` for the symmetric cost matrix with the unaries on its
/// diagonal and half the edge cost on both off-diagonal entries.
pub(crate) fn affinity_product(p: &Problem, x: &[f64]) -> Vec<f64> {
    p.assignments()
        .iter()
        .enumerate()
        .map(|(a, asg)| {
            let off: f64 = p.neighbors(a).iter().map(|&(b, e)| e * x[b]).sum();
            -(asg.cost * x[a] + 0.5 * off)
        })
        .collect()
}

/// Step in `[0, 1]` minimizing `f(x + eta d)`, given `g = grad f(x)`.
pub(crate) fn line_search(p: &Problem, d: &[f64], g: &[f64]) -> f64 {
    let slope: f64 = g.iter().zip(d).map(|(g, d)| g * d).sum();
    let mut curvature = 0.0;
    for a in 0..p.num_assignments() {
        if d[a] == 0.0 {
            continue;
        }
        for &(b, e) in p.neighbors(a) {
            if b > a {
                curvature += e * d[a] * d[b];
            }
        }
    }
    if curvature > 0.0 {
        (-slope / (2.0 * curvature)).clamp(0.0, 1.0)
    } else if slope + curvature <= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Whether the problem admits a complete matching, in which case bijective
/// methods search over permutations only.
pub(crate) fn has_complete_matching(p: &Problem) -> bool {
    p.is_square()
        && solve_rect(p.num_nodes(), p.num_labels(), |i, s| {
            if p.find(i, s).is_some() {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .is_ok()
}

/// Minimizes `<costs, x>` over matchings; over complete matchings only when
/// `complete` is set (which requires [`has_complete_matching`]).
pub(crate) fn linear_min(p: &Problem, costs: &[f64], complete: bool) -> (Labeling, f64) {
    if complete {
        let n = p.num_nodes();
        let mut table = vec![f64::INFINITY; n * n];
        for (a, asg) in p.assignments().iter().enumerate() {
            table[asg.node * n + asg.label] = costs[a];
        }
        if let Ok(cols) = solve_rect(n, n, |i, s| table[i * n + s]) {
            let y = Labeling::from_vec(cols.iter().map(|&s| Some(s)).collect());
            let value = cols.iter().enumerate().map(|(i, &s)| table[i * n + s]).sum();
            return (y, value);
        }
    }
    min_cost_matching(p, costs)
}

/// Labeling of maximum total weight.
pub(crate) fn round(p: &Problem, weights: &[f64], complete: bool) -> Labeling {
    let costs: Vec<f64> = weights
        .iter()
        .map(|&w| if w.is_finite() { -w } else { 0.0 })
        .collect();
    if complete {
        linear_min(p, &costs, true).0
    } else {
        crate::lap::round_weights(p, weights)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| a * b).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkhornOutcome {
    pub iterations: usize,
    pub converged: bool,
    /// Largest deviation of a row or column sum from 1 at exit.
    pub residual: f64,
}

/// Alternating row/column normalization of non-negative weights over the
/// candidate pattern. Rows and columns without mass are left alone.
pub fn sinkhorn(p: &Problem, m: &mut [f64], tol: f64, max_iter: usize) -> SinkhornOutcome {
    let rows: Vec<&[usize]> = (0..p.num_nodes()).map(|i| p.node_assignments(i)).collect();
    let cols: Vec<&[usize]> = (0..p.num_labels()).map(|s| p.label_assignments(s)).collect();
    let normalize = |m: &mut [f64], groups: &[&[usize]]| {
        for g in groups {
            let sum: f64 = g.iter().map(|&a| m[a]).sum();
            if sum > 0.0 && sum.is_finite() {
                for &a in g.iter() {
                    m[a] /= sum;
                }
            }
        }
    };
    let residual = |m: &[f64], groups: &[&[usize]]| {
        groups
            .iter()
            .map(|g| g.iter().map(|&a| m[a]).sum::<f64>())
            .filter(|&s| s > 0.0)
            .map(|s| (s - 1.0).abs())
            .fold(0.0, f64::max)
    };
    let mut outcome = SinkhornOutcome {
        iterations: 0,
        converged: false,
        residual: f64::INFINITY,
    };
    for it in 1..=max_iter {
        normalize(m, &rows);
        normalize(m, &cols);
        outcome.iterations = it;
        // Columns are exact right after their normalization.
        outcome.residual = residual(m, &rows);
        if outcome.residual <= tol {
            outcome.converged = true;
            break;
        }
    }
    outcome
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{lab, t1};

    #[test]
    fn objective_matches_evaluate_on_indicators() {
        let p = t1();
        for y in [
            lab(&[Some(0), Some(1)]),
            lab(&[Some(1), Some(0)]),
            lab(&[None, Some(0)]),
            lab(&[None, None]),
        ] {
            let x = p.indicator(&y).unwrap();
            assert_eq!(objective(&p, &x), p.evaluate(&y).unwrap());
        }
    }

    #[test]
    fn affinity_is_negated_cost_form() {
        let p = t1();
        let x = [0.3, 0.1, 0.7, 0.2];
        let quad = -dot(&x, &affinity_product(&p, &x));
        let dense = p.to_dense(1 << 20).unwrap();
        let mut full = vec![0.0; 4];
        for (a, asg) in p.assignments().iter().enumerate() {
            full[asg.node * 2 + asg.label] = x[a];
        }
        assert!((quad - dense.quadratic_form(&full)).abs() < 1e-12);
    }

    #[test]
    fn line_search_is_exact_on_concave_direction() {
        let p = t1();
        let x = [0.5; 4];
        let target = p.indicator(&lab(&[Some(0), Some(1)])).unwrap();
        let d: Vec<f64> = target.iter().zip(&x).map(|(t, x)| t - x).collect();
        let g = gradient(&p, &x);
        let eta = line_search(&p, &d, &g);
        let at = |eta: f64| {
            let z: Vec<f64> = x.iter().zip(&d).map(|(x, d)| x + eta * d).collect();
            objective(&p, &z)
        };
        for k in 0..=20 {
            assert!(at(eta) <= at(k as f64 / 20.0) + 1e-12);
        }
    }

    #[test]
    fn sinkhorn_of_ones_is_uniform() {
        let p = t1();
        let mut m = vec![1.0; 4];
        let out = sinkhorn(&p, &mut m, 1e-6, 200);
        assert!(out.converged);
        assert!(m.iter().all(|&v| (v - 0.5).abs() < 1e-9));
    }

    #[test]
    fn sinkhorn_without_support_hits_the_cap() {
        // Two nodes compete for a single label: no doubly stochastic scaling.
        let p = Problem::new(2, 2, vec![(0, 0, 0.0), (1, 0, 0.0), (1, 1, 0.0)], vec![]).unwrap();
        let mut m = vec![1.0; 3];
        let out = sinkhorn(&p, &mut m, 1e-9, 50);
        assert_eq!(out.iterations, 50);
        assert!(!out.converged);
        assert!(m.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn complete_oracle_respects_pattern() {
        let p = t1();
        assert!(has_complete_matching(&p));
        let (y, v) = linear_min(&p, &[1.0, 1.0, 1.0, 1.0], true);
        assert_eq!(y.num_assigned(), 2);
        assert_eq!(v, 2.0);
        let (y, v) = linear_min(&p, &[1.0, 1.0, 1.0, 1.0], false);
        assert_eq!((y.num_assigned(), v), (0, 0.0));
    }
}
