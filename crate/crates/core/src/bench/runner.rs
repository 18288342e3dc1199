//! Parallel execution of instance x solver x trial cells.

use std::collections::HashMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use rayon::prelude::*;

use super::report::{
    default_taus, fixed_target_times, fixed_time_report, performance_profile, FixedTimeReport, Profile,
    ProfileTable,
};
use super::{BenchError, Suite};
use crate::record::RunRecord;
use crate::solvers::{solve, SolverKind, SolverParams};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub solvers: Vec<SolverKind>,
    /// Fixed-time budgets in seconds; runs use the largest one.
    pub budgets: Vec<f64>,
    pub trials: usize,
    /// Worker threads; each cell runs on a single thread.
    pub threads: usize,
    pub params: SolverParams,
    /// Relative optimality tolerance of the fixed-target protocol.
    pub tolerance: f64,
    pub taus: Vec<f64>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            solvers: SolverKind::QUADRATIC.to_vec(),
            budgets: vec![1.0, 10.0, 100.0],
            trials: 5,
            threads: (num_cpus::get_physical() / 2).max(1),
            params: SolverParams::default(),
            tolerance: 1e-3,
            taus: default_taus(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchOutput {
    /// Ordered by instance, solver, trial.
    pub records: Vec<RunRecord>,
    pub fixed_time: FixedTimeReport,
    pub table: ProfileTable,
    pub profile: Profile,
}

fn panic_message(payload: &(dyn std::any::Any + Send)) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        s.to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "unknown panic".to_string()
    }
}

/// Runs every solver `trials` times on every instance. Cost transforms
/// happen outside the timed region; a failing or crashing solver yields a
/// no-solution record and the benchmark continues.
pub fn run_benchmark(suite: &Suite, config: &BenchConfig) -> Result<BenchOutput, BenchError> {
    let budget = config.budgets.iter().copied().fold(0.0, f64::max);
    let params = if budget > 0.0 {
        config.params.clone().with_budget(budget)
    } else {
        config.params.clone()
    };
    let cells: Vec<(usize, SolverKind)> = (0..suite.instances.len())
        .flat_map(|i| {
            config
                .solvers
                .iter()
                .flat_map(move |&s| std::iter::repeat_n((i, s), config.trials))
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.max(1))
        .build()
        .map_err(|e| BenchError::Record(e.to_string()))?;
    let records: Vec<RunRecord> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(i, kind)| {
                let inst = &suite.instances[i];
                let outcome = catch_unwind(AssertUnwindSafe(|| solve(kind, &inst.problem, &params, &inst.name)));
                let fail = |msg: String| {
                    RunRecord::failed(kind.name(), &inst.name, &params, inst.problem.num_nodes(), msg)
                };
                match outcome {
                    Ok(Ok(r)) => r,
                    Ok(Err(e)) => fail(e.to_string()),
                    Err(payload) => fail(format!("solver panicked: {}", panic_message(payload.as_ref()))),
                }
            })
            .collect()
    });
    let fixed_time = fixed_time_report(suite, &records, &config.budgets);
    let table = fixed_target_times(suite, &records, config.tolerance);
    let profile = performance_profile(&table, &config.taus)?;
    Ok(BenchOutput {
        records,
        fixed_time,
        table,
        profile,
    })
}

/// Writes `fixed_time.csv`, `profile.csv` and `runs/<instance>__<solver>__<trial>.json`.
pub fn write_outputs(dir: &Path, output: &BenchOutput) -> Result<(), BenchError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| BenchError::Io { path, source }
    };
    let runs = dir.join("runs");
    fs::create_dir_all(&runs).map_err(io(&runs))?;
    let ft = dir.join("fixed_time.csv");
    fs::write(&ft, output.fixed_time.to_csv()).map_err(io(&ft))?;
    let pr = dir.join("profile.csv");
    fs::write(&pr, output.profile.to_csv()).map_err(io(&pr))?;
    let mut seen: HashMap<(&str, &str), usize> = HashMap::new();
    for r in &output.records {
        let trial = seen.entry((&r.instance, &r.solver)).or_insert(0);
        let path = runs.join(format!("{}__{}__{}.json", r.instance, r.solver, trial));
        *trial += 1;
        let text = serde_json::to_string_pretty(r).map_err(|e| BenchError::Record(e.to_string()))?;
        fs::write(&path, text + "\n").map_err(io(&path))?;
    }
    Ok(())
}
