//! Synthetic instances: wide-baseline style point matching, outlier-heavy
//! projection-error matching, and small random instances with known optima.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{BenchError, Instance, Suite};
use crate::model::{BruteForce, Geometry, Labeling, Problem};

const HOUSE_NEIGHBORS: usize = 5;
/// Side of the square the landmarks are drawn from, in pixels.
const HOUSE_EXTENT: f64 = 600.0;
const HOUSE_SIGMA_SQ: f64 = 2500.0;
const HOUSE_NOISE: f64 = 4.0;
const CALTECH_TRUNCATION: f64 = 50.0;
const CALTECH_NOISE: f64 = 3.0;

type Point = (f64, f64);

fn dist(p: Point, q: Point) -> f64 {
    ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt()
}

/// Symmetrized k-nearest-neighbor graph as sorted pairs `i < j`.
fn knn_pairs(points: &[Point], k: usize) -> BTreeSet<(usize, usize)> {
    let mut pairs = BTreeSet::new();
    for (i, &p) in points.iter().enumerate() {
        let mut others: Vec<(f64, usize)> = points
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(j, &q)| (dist(p, q), j))
            .collect();
        others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(_, j) in others.iter().take(k) {
            pairs.insert((i.min(j), i.max(j)));
        }
    }
    pairs
}

fn random_points(rng: &mut impl Rng, n: usize, extent: f64) -> Vec<Point> {
    (0..n)
        .map(|_| (rng.gen_range(0.0..extent), rng.gen_range(0.0..extent)))
        .collect()
}

/// Rigid motion plus Gaussian noise.
fn perturb(rng: &mut impl Rng, points: &[Point], noise: f64) -> Vec<Point> {
    let angle: f64 = rng.gen_range(-0.3..0.3);
    let (tx, ty): Point = (rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0));
    let normal = Normal::new(0.0, noise).expect("positive deviation");
    let (s, c) = angle.sin_cos();
    points
        .iter()
        .map(|&(x, y)| {
            (
                c * x - s * y + tx + normal.sample(rng),
                s * x + c * y + ty + normal.sample(rng),
            )
        })
        .collect()
}

fn indexed(points: &[Point]) -> Vec<(usize, f64, f64)> {
    points.iter().enumerate().map(|(i, &(x, y))| (i, x, y)).collect()
}

/// Point-matching instance in the style of the house sequence: `n` points
/// in a 600 x 600 square, a rigidly moved noisy copy, k-nearest-neighbor
/// graphs (k = 5) on both sides, zero unaries and pairwise costs
/// `-exp(-(d_ij - d_sl)^2 / 2500)` on every pair of graph edges. All
/// `n * n` assignments are candidates; the ground truth is the identity.
pub fn gen_house_style(n: usize, seed: u64) -> Result<Instance, BenchError> {
    if n < 3 {
        return Err(BenchError::InvalidGenerator(format!("house instances need n >= 3, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = random_points(&mut rng, n, HOUSE_EXTENT);
    let second = perturb(&mut rng, &first, HOUSE_NOISE);
    let k = HOUSE_NEIGHBORS.min(n - 1);
    let node_edges = knn_pairs(&first, k);
    let label_edges = knn_pairs(&second, k);

    let assignments: Vec<(usize, usize, f64)> = (0..n)
        .flat_map(|i| (0..n).map(move |s| (i, s, 0.0)))
        .collect();
    let mut edges = Vec::new();
    for &(i, j) in &node_edges {
        let dij = dist(first[i], first[j]);
        for &(s, l) in &label_edges {
            let dsl = dist(second[s], second[l]);
            let cost = -(-(dij - dsl).powi(2) / HOUSE_SIGMA_SQ).exp();
            edges.push((i * n + s, j * n + l, cost));
            edges.push((i * n + l, j * n + s, cost));
        }
    }
    let geometry = Geometry {
        node_points: indexed(&first),
        label_points: indexed(&second),
        node_neighbors: node_edges.into_iter().collect(),
        label_neighbors: label_edges.into_iter().collect(),
    };
    let problem = Problem::with_geometry(n, n, assignments, edges, geometry)
        .expect("generated house instance is valid");
    let mut inst = Instance::new(format!("house_n{n}_s{seed}"), problem);
    inst.ground_truth = Some(Labeling::from_vec((0..n).map(Some).collect()));
    Ok(inst)
}

/// Outlier-heavy instance with truncated projection-error costs
/// `-max(50 - d, 0)`, where `d = | |p_i - p_j| - |q_s - q_l| |`. The first
/// `nv - outliers` nodes are inliers whose moved copies are hidden among
/// `nl` shuffled labels; the rest are clutter. Ground truth covers the
/// inliers only.
pub fn gen_caltech_style(nv: usize, nl: usize, outliers: usize, seed: u64) -> Result<Instance, BenchError> {
    if nl < nv || outliers > nv || nv == 0 {
        return Err(BenchError::InvalidGenerator(format!(
            "need 0 < nv <= nl and outliers <= nv, got nv={nv}, nl={nl}, outliers={outliers}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inliers = nv - outliers;
    let first = random_points(&mut rng, nv, 200.0);
    let mut second = perturb(&mut rng, &first[..inliers], CALTECH_NOISE);
    second.extend(random_points(&mut rng, nl - inliers, 200.0));
    let mut order: Vec<usize> = (0..nl).collect();
    order.shuffle(&mut rng);
    // Label `order[k]` is the k-th generated point.
    let mut labels = vec![(0.0, 0.0); nl];
    for (k, &s) in order.iter().enumerate() {
        labels[s] = second[k];
    }

    let assignments: Vec<(usize, usize, f64)> = (0..nv)
        .flat_map(|i| (0..nl).map(move |s| (i, s, 0.0)))
        .collect();
    let mut edges = Vec::new();
    for i in 0..nv {
        for j in i + 1..nv {
            let dij = dist(first[i], first[j]);
            for s in 0..nl {
                for l in 0..nl {
                    if s == l {
                        continue;
                    }
                    let d = (dij - dist(labels[s], labels[l])).abs();
                    let cost = -(CALTECH_TRUNCATION - d).max(0.0);
                    if cost < 0.0 {
                        edges.push((i * nl + s, j * nl + l, cost));
                    }
                }
            }
        }
    }
    let geometry = Geometry {
        node_points: indexed(&first),
        label_points: indexed(&labels),
        ..Geometry::default()
    };
    let problem = Problem::with_geometry(nv, nl, assignments, edges, geometry)
        .expect("generated caltech instance is valid");
    let mut inst = Instance::new(format!("caltech_{nv}x{nl}_o{outliers}_s{seed}"), problem);
    let gt = (0..nv).map(|i| (i < inliers).then(|| order[i])).collect();
    inst.ground_truth = Some(Labeling::from_vec(gt));
    Ok(inst)
}

/// Small random instance with mixed-sign costs (unaries in [-1, 1], edges
/// in [-0.5, 0.5]) and a seed-dependent density; the optimum is attached when exhaustive search is cheap.
pub fn gen_random(nv: usize, nl: usize, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let candidate_density = [0.5, 0.8, 1.0][rng.gen_range(0..3)];
    let edge_density = [0.2, 0.5, 0.9][rng.gen_range(0..3)];
    let mut assignments = Vec::new();
    for i in 0..nv {
        for s in 0..nl {
            if rng.gen_bool(candidate_density) {
                assignments.push((i, s, round2(rng.gen_range(-1.0..1.0))));
            }
        }
    }
    let mut edges = Vec::new();
    for a in 0..assignments.len() {
        for b in a + 1..assignments.len() {
            let (x, y) = (assignments[a], assignments[b]);
            if x.0 != y.0 && x.1 != y.1 && rng.gen_bool(edge_density) {
                edges.push((a, b, round2(rng.gen_range(-0.5..0.5))));
            }
        }
    }
    let problem = Problem::new(nv, nl, assignments, edges).expect("generated random instance is valid");
    let mut inst = Instance::new(format!("random_{nv}x{nl}_s{seed}"), problem);
    inst.optimum = BruteForce::default()
        .solve(&inst.problem)
        .ok()
        .flatten()
        .map(|(_, v)| v);
    inst
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Suite generator description, e.g. `house:20:30`, `caltech:10:20:30:5`
/// or `random:100:6:6`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenerateSpec {
    House { count: usize, n: usize },
    Caltech { count: usize, nv: usize, nl: usize, outliers: usize },
    Random { count: usize, nv: usize, nl: usize },
}

pub fn parse_generate_spec(text: &str) -> Result<GenerateSpec, BenchError> {
    let bad = || BenchError::InvalidSpec(text.to_string());
    let mut parts = text.split(':');
    let kind = parts.next().ok_or_else(bad)?;
    let nums: Vec<usize> = parts
        .map(|p| p.trim().parse::<usize>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    match (kind, nums.as_slice()) {
        ("house", &[count, n]) => Ok(GenerateSpec::House { count, n }),
        ("caltech", &[count, nv, nl, outliers]) => Ok(GenerateSpec::Caltech {
            count,
            nv,
            nl,
            outliers,
        }),
        ("random", &[count, nv, nl]) => Ok(GenerateSpec::Random { count, nv, nl }),
        _ => Err(bad()),
    }
}

impl GenerateSpec {
    /// Instance `k` uses seed `seed + k`.
    pub fn generate(&self, seed: u64) -> Result<Suite, BenchError> {
        let instances = match *self {
            GenerateSpec::House { count, n } => (0..count as u64)
                .map(|k| gen_house_style(n, seed + k))
                .collect::<Result<_, _>>()?,
            GenerateSpec::Caltech {
                count,
                nv,
                nl,
                outliers,
            } => (0..count as u64)
                .map(|k| gen_caltech_style(nv, nl, outliers, seed + k))
                .collect::<Result<_, _>>()?,
            GenerateSpec::Random { count, nv, nl } => {
                (0..count as u64).map(|k| gen_random(nv, nl, seed + k)).collect()
            }
        };
        Ok(Suite { instances })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn house_cost_range_and_shape() {
        let inst = gen_house_style(5, 0).unwrap();
        let p = &inst.problem;
        assert!(p.is_square());
        assert_eq!(p.num_assignments(), 25);
        assert!(p.assignments().iter().all(|a| a.cost == 0.0));
        assert!(!p.edges().is_empty());
        assert!(p.edges().iter().all(|e| e.cost >= -1.0 && e.cost < 0.0));
        inst.validate().unwrap();
        assert!(gen_house_style(2, 0).is_err());
    }

    #[test]
    fn house_identical_clouds_favor_the_diagonal() {
        // Equal distances give the minimal pairwise cost -1.
        let cost = -(-(0.0f64).powi(2) / HOUSE_SIGMA_SQ).exp();
        assert_eq!(cost, -1.0);
    }

    #[test]
    fn caltech_ground_truth_and_range() {
        let inst = gen_caltech_style(5, 8, 2, 3).unwrap();
        inst.validate().unwrap();
        let gt = inst.ground_truth.as_ref().unwrap();
        assert_eq!(gt.num_assigned(), 3);
        assert!(inst.problem.edges().iter().all(|e| e.cost >= -50.0 && e.cost < 0.0));
        assert!(gen_caltech_style(5, 4, 0, 0).is_err());
    }

    #[test]
    fn random_instances_carry_optima() {
        let inst = gen_random(4, 4, 11);
        assert!(inst.optimum.is_some());
        assert_eq!(gen_random(4, 4, 11), inst);
    }

    #[test]
    fn spec_parsing() {
        assert_eq!(
            parse_generate_spec("house:20:30").unwrap(),
            GenerateSpec::House { count: 20, n: 30 }
        );
        assert!(parse_generate_spec("house:20").is_err());
        assert!(parse_generate_spec("cube:1:2").is_err());
        let suite = parse_generate_spec("random:3:3:4").unwrap().generate(5).unwrap();
        assert_eq!(suite.instances.len(), 3);
        assert_eq!(suite.instances[1].name, "random_3x4_s6");
    }
}
