//! Helpers shared by the integration tests.
#![allow(dead_code)]

use gmbench::model::{Labeling, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every feasible labeling (complete ones only when `complete`).
pub fn all_labelings(p: &Problem, complete: bool) -> Vec<Labeling> {
    fn rec(p: &Problem, complete: bool, node: usize, used: &mut Vec<bool>, cur: &mut Vec<Option<usize>>, out: &mut Vec<Labeling>) {
        if node == p.num_nodes() {
            out.push(Labeling::from_vec(cur.clone()));
            return;
        }
        if !complete {
            cur.push(None);
            rec(p, complete, node + 1, used, cur, out);
            cur.pop();
        }
        for &a in p.node_assignments(node) {
            let s = p.assignment(a).label;
            if !used[s] {
                used[s] = true;
                cur.push(Some(s));
                rec(p, complete, node + 1, used, cur, out);
                cur.pop();
                used[s] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(p, complete, 0, &mut vec![false; p.num_labels()], &mut Vec::new(), &mut out);
    out
}

/// Square instance with every pair a candidate and random edges.
pub fn random_square(n: usize, seed: u64) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let assignments: Vec<(usize, usize, f64)> = (0..n)
        .flat_map(|i| (0..n).map(move |s| (i, s)))
        .map(|(i, s)| (i, s, (rng.gen_range(-3.0f64..3.0) * 4.0).round() / 4.0))
        .collect();
    let density = rng.gen_range(0.2..0.9);
    let mut edges = Vec::new();
    for a in 0..assignments.len() {
        for b in a + 1..assignments.len() {
            let (x, y) = (assignments[a], assignments[b]);
            if x.0 != y.0 && x.1 != y.1 && rng.gen_bool(density) {
                edges.push((a, b, (rng.gen_range(-3.0f64..3.0) * 4.0).round() / 4.0));
            }
        }
    }
    Problem::new(n, n, assignments, edges).unwrap()
}

/// Edge-free instance with a random candidate pattern.
pub fn random_edge_free(nv: usize, nl: usize, seed: u64) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = Vec::new();
    for i in 0..nv {
        for s in 0..nl {
            if rng.gen_bool(0.7) {
                assignments.push((i, s, rng.gen_range(-5.0..5.0)));
            }
        }
    }
    Problem::new(nv, nl, assignments, vec![]).unwrap()
}

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Rectangular instance with a random candidate pattern and mixed-sign
/// unary and pairwise costs.
pub fn random_problem(nv: usize, nl: usize, seed: u64) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = Vec::new();
    for i in 0..nv {
        for s in 0..nl {
            if rng.gen_bool(0.75) {
                assignments.push((i, s, (rng.gen_range(-2.0f64..2.0) * 8.0).round() / 8.0));
            }
        }
    }
    let mut edges = Vec::new();
    for a in 0..assignments.len() {
        for b in a + 1..assignments.len() {
            let (x, y) = (assignments[a], assignments[b]);
            if x.0 != y.0 && x.1 != y.1 && rng.gen_bool(0.5) {
                edges.push((a, b, (rng.gen_range(-2.0f64..2.0) * 8.0).round() / 8.0));
            }
        }
    }
    Problem::new(nv, nl, assignments, edges).unwrap()
}
