//! Fixed-time tables, fixed-target times and performance profiles.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{accuracy, BenchError, Suite};
use crate::record::RunRecord;

/// Placeholder for "the method yields no solution" in tables.
pub const NO_SOLUTION: &str = "-";

/// Whether `e` is within the relative tolerance of `opt`; the absolute
/// floor makes `opt = 0` an (almost) exact comparison.
fn within(e: f64, opt: f64, tol: f64) -> bool {
    e <= opt + (tol * opt.abs()).max(1e-9)
}

fn by_cell(records: &[RunRecord]) -> HashMap<(&str, &str), Vec<&RunRecord>> {
    let mut map: HashMap<(&str, &str), Vec<&RunRecord>> = HashMap::new();
    for r in records {
        map.entry((r.instance.as_str(), r.solver.as_str())).or_default().push(r);
    }
    map
}

/// Solver names in order of first appearance.
fn solver_names(records: &[RunRecord]) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    for r in records {
        if !names.contains(&r.solver) {
            names.push(r.solver.clone());
        }
    }
    names
}

/// Per instance: the known optimum, lowered to the best objective any run
/// reached if that is smaller; `+inf` when neither exists.
pub fn reference_optima(suite: &Suite, records: &[RunRecord]) -> Vec<f64> {
    references(&known_optima(suite), records)
}

fn known_optima(suite: &Suite) -> Vec<(String, Option<f64>)> {
    suite.instances.iter().map(|i| (i.name.clone(), i.optimum)).collect()
}

fn references(instances: &[(String, Option<f64>)], records: &[RunRecord]) -> Vec<f64> {
    instances
        .iter()
        .map(|(name, optimum)| {
            let best = records
                .iter()
                .filter(|r| &r.instance == name && r.solved())
                .map(|r| r.objective)
                .fold(f64::INFINITY, f64::min);
            optimum.map_or(best, |o| o.min(best))
        })
        .collect()
}

/// Time-to-target per instance and solver; `+inf` when never reached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileTable {
    pub solvers: Vec<String>,
    pub instances: Vec<String>,
    /// `times[instance][solver]` in seconds.
    pub times: Vec<Vec<f64>>,
}

impl ProfileTable {
    /// Performance ratios `t_s(p) / min_s t_s(p)`, `+inf` where unsolved.
    pub fn ratios(&self) -> Vec<Vec<f64>> {
        self.times
            .iter()
            .map(|row| {
                let floor = |t: f64| t.max(1e-9);
                let best = row.iter().copied().map(floor).fold(f64::INFINITY, f64::min);
                row.iter()
                    .map(|&t| {
                        if t.is_finite() {
                            floor(t) / best
                        } else {
                            f64::INFINITY
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// First time each solver's best-so-far objective came within `tol` of the
/// reference optimum, minimized over trials.
pub fn fixed_target_times(suite: &Suite, records: &[RunRecord], tol: f64) -> ProfileTable {
    target_times(&known_optima(suite), records, tol)
}

/// Like [`fixed_target_times`] when only run records are at hand: the
/// instances are those named in the records and the reference optimum is
/// the best objective any run reached, unless `optima` knows better.
pub fn fixed_target_times_from_records(
    records: &[RunRecord],
    optima: &HashMap<String, f64>,
    tol: f64,
) -> ProfileTable {
    let mut instances: Vec<(String, Option<f64>)> = Vec::new();
    for r in records {
        if !instances.iter().any(|(n, _)| n == &r.instance) {
            instances.push((r.instance.clone(), optima.get(&r.instance).copied()));
        }
    }
    target_times(&instances, records, tol)
}

fn target_times(instances: &[(String, Option<f64>)], records: &[RunRecord], tol: f64) -> ProfileTable {
    let solvers = solver_names(records);
    let cells = by_cell(records);
    let refs = references(instances, records);
    let times = instances
        .iter()
        .zip(&refs)
        .map(|((name, _), &opt)| {
            solvers
                .iter()
                .map(|s| {
                    cells
                        .get(&(name.as_str(), s.as_str()))
                        .into_iter()
                        .flatten()
                        .filter_map(|r| {
                            r.timing
                                .trace
                                .iter()
                                .find(|e| e.objective.is_some_and(|v| within(v, opt, tol)))
                                .map(|e| e.elapsed)
                        })
                        .fold(f64::INFINITY, f64::min)
                })
                .collect()
        })
        .collect();
    ProfileTable {
        solvers,
        instances: instances.iter().map(|(n, _)| n.clone()).collect(),
        times,
    }
}

/// `rho[solver][k]`: fraction of instances with ratio at most `taus[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub taus: Vec<f64>,
    pub solvers: Vec<String>,
    pub rho: Vec<Vec<f64>>,
}

impl Profile {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau");
        for s in &self.solvers {
            out.push(',');
            out.push_str(s);
        }
        out.push('\n');
        for (k, tau) in self.taus.iter().enumerate() {
            write!(out, "{tau}").unwrap();
            for row in &self.rho {
                write!(out, ",{}", row[k]).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Geometric grid `2^(k/4)` from 1 to 1024.
pub fn default_taus() -> Vec<f64> {
    (0..=40).map(|k| 2f64.powf(k as f64 / 4.0)).collect()
}

pub fn performance_profile(table: &ProfileTable, taus: &[f64]) -> Result<Profile, BenchError> {
    if taus.is_empty() || !(taus[0] >= 1.0) || taus.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(BenchError::InvalidTaus);
    }
    let ratios = table.ratios();
    let count = ratios.len();
    let rho = (0..table.solvers.len())
        .map(|s| {
            taus.iter()
                .map(|&tau| {
                    if count == 0 {
                        return 0.0;
                    }
                    ratios.iter().filter(|row| row[s] <= tau).count() as f64 / count as f64
                })
                .collect()
        })
        .collect();
    Ok(Profile {
        taus: taus.to_vec(),
        solvers: table.solvers.clone(),
        rho,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedTimeRow {
    pub solver: String,
    pub budget: f64,
    pub instances: usize,
    /// Instances with a solution within the budget.
    pub solved: usize,
    /// Share of instances with a known optimum that were solved to it
    /// (0.1% tolerance); absent when no optimum is known.
    pub opt_percent: Option<f64>,
    /// Absent when some instance has no solution within the budget.
    pub mean_objective: Option<f64>,
    pub mean_bound: Option<f64>,
    pub mean_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedTimeReport {
    pub rows: Vec<FixedTimeRow>,
}

impl FixedTimeReport {
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map_or(NO_SOLUTION.to_string(), |v| v.to_string());
        let mut out =
            String::from("solver,budget,instances,solved,opt_percent,mean_objective,mean_bound,mean_accuracy\n");
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.solver,
                r.budget,
                r.instances,
                r.solved,
                opt(r.opt_percent),
                opt(r.mean_objective),
                opt(r.mean_bound),
                opt(r.mean_accuracy)
            )
            .unwrap();
        }
        out
    }
}

fn mean_all(values: &[Option<f64>]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let sum: Option<f64> = values.iter().copied().sum();
    sum.map(|s| s / values.len() as f64)
}

/// Quality reached by each solver within each budget, best over trials.
pub fn fixed_time_report(suite: &Suite, records: &[RunRecord], budgets: &[f64]) -> FixedTimeReport {
    let cells = by_cell(records);
    let mut rows = Vec::new();
    for solver in solver_names(records) {
        for &budget in budgets {
            let mut objectives = Vec::new();
            let mut bounds = Vec::new();
            let mut accuracies = Vec::new();
            let (mut known, mut hits) = (0usize, 0usize);
            for inst in &suite.instances {
                let runs = cells
                    .get(&(inst.name.as_str(), solver.as_str()))
                    .map(Vec::as_slice)
                    .unwrap_or(&[]);
                let best = runs
                    .iter()
                    .filter_map(|r| r.objective_at(budget).map(|e| (e, *r)))
                    .min_by(|a, b| a.0.total_cmp(&b.0));
                let bound = runs
                    .iter()
                    .filter_map(|r| r.lower_bound_at(budget))
                    .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.max(d))));
                objectives.push(best.map(|b| b.0));
                bounds.push(bound);
                if let Some(opt) = inst.optimum {
                    known += 1;
                    if best.is_some_and(|(e, _)| within(e, opt, 1e-3)) {
                        hits += 1;
                    }
                }
                if let Some(gt) = &inst.ground_truth {
                    let acc = best
                        .and_then(|(_, r)| r.labeling_at(budget))
                        .and_then(|y| accuracy(y, gt).ok());
                    accuracies.push(acc);
                }
            }
            rows.push(FixedTimeRow {
                solver: solver.clone(),
                budget,
                instances: suite.instances.len(),
                solved: objectives.iter().filter(|o| o.is_some()).count(),
                opt_percent: (known > 0).then(|| 100.0 * hits as f64 / known as f64),
                mean_objective: mean_all(&objectives),
                mean_bound: mean_all(&bounds),
                mean_accuracy: mean_all(&accuracies),
            });
        }
    }
    FixedTimeReport { rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::Instance;
    use crate::model::{Labeling, Problem};
    use crate::record::{Timing, TraceEntry};
    use crate::solvers::SolverParams;

    fn record(instance: &str, solver: &str, trace: &[(f64, f64)]) -> RunRecord {
        let entries: Vec<TraceEntry> = trace
            .iter()
            .map(|&(t, e)| TraceEntry {
                elapsed: t,
                objective: Some(e),
                lower_bound: None,
                labeling: Some(Labeling::from_vec(vec![Some(0)])),
            })
            .collect();
        RunRecord {
            solver: solver.into(),
            instance: instance.into(),
            params: SolverParams::default(),
            labeling: Labeling::from_vec(vec![Some(0)]),
            objective: trace.last().map_or(f64::NAN, |x| x.1),
            lower_bound: None,
            iterations: 1,
            error: None,
            timing: Timing {
                total_seconds: trace.last().map_or(0.0, |x| x.0),
                trace: entries,
            },
        }
    }

    fn suite(names: &[&str], optimum: Option<f64>) -> Suite {
        let p = Problem::new(1, 1, vec![(0, 0, -1.0)], vec![]).unwrap();
        Suite {
            instances: names
                .iter()
                .map(|n| Instance {
                    optimum,
                    ground_truth: Some(Labeling::from_vec(vec![Some(0)])),
                    ..Instance::new(*n, p.clone())
                })
                .collect(),
        }
    }

    #[test]
    fn ratios_of_two_solvers() {
        let s = suite(&["p"], Some(-1.0));
        let recs = vec![record("p", "a", &[(2.0, -1.0)]), record("p", "b", &[(4.0, -1.0)])];
        let t = fixed_target_times(&s, &recs, 1e-3);
        assert_eq!(t.ratios(), vec![vec![1.0, 2.0]]);
    }

    #[test]
    fn unreached_target_is_infinite() {
        let s = suite(&["p"], Some(-1.0));
        let recs = vec![record("p", "a", &[(1.0, -1.0)]), record("p", "b", &[(1.0, -0.5)])];
        let t = fixed_target_times(&s, &recs, 1e-3);
        assert!(t.ratios()[0][1].is_infinite());
        let prof = performance_profile(&t, &default_taus()).unwrap();
        assert!(prof.rho[1].iter().all(|&r| r == 0.0));
        assert!(prof.rho[0].iter().all(|&r| r == 1.0));
    }

    #[test]
    fn reference_defined_by_a_solver() {
        let s = suite(&["p"], None);
        let recs = vec![record("p", "a", &[(3.0, -2.0)]), record("p", "b", &[(1.0, -1.0)])];
        assert_eq!(reference_optima(&s, &recs), vec![-2.0]);
        let t = fixed_target_times(&s, &recs, 1e-3);
        assert_eq!(t.ratios()[0][0], 1.0);
    }

    #[test]
    fn fixed_time_opt_percent_and_no_solution() {
        let s = suite(&["p"], Some(-1.0));
        let recs = vec![record("p", "a", &[(0.5, -1.0)]), record("p", "b", &[(1.5, -1.0)])];
        let rep = fixed_time_report(&s, &recs, &[1.0, 10.0]);
        let a: Vec<_> = rep.rows.iter().filter(|r| r.solver == "a").collect();
        assert!(a.iter().all(|r| r.opt_percent == Some(100.0) && r.mean_accuracy == Some(1.0)));
        let b1 = rep.rows.iter().find(|r| r.solver == "b" && r.budget == 1.0).unwrap();
        assert_eq!((b1.solved, b1.mean_objective), (0, None));
        assert!(rep.to_csv().contains("b,1,1,0,0,-,-,-"));
    }

    #[test]
    fn tau_grid_validation() {
        let t = ProfileTable {
            solvers: vec![],
            instances: vec![],
            times: vec![],
        };
        assert!(performance_profile(&t, &[0.5, 2.0]).is_err());
        assert!(performance_profile(&t, &[2.0, 2.0]).is_err());
        assert!(performance_profile(&t, &[]).is_err());
    }
}
