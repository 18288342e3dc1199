//! Primal heuristics, one per algorithm family, and the driver that
//! prepares costs for each of them.
//!
//! Every solver operates on the problem it is given and reports through a
//! [`Tracker`], which pulls labelings back to the original instance. The
//! driver ([`solve`]) applies the cost transformations each method needs
//! before the clock starts. Methods that are native maximizers (`sm`, `mpm`,
//! `ipfp`, `ga`, `rrwm`) work with the affinity `-C` internally, so the
//! problems they receive are always in minimization form.

mod fusion;
mod ga;
mod linear;
pub(crate) mod relax;
mod rrwm;
mod spectral;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dual;
use crate::lap::{self, LapError};
use crate::model::Problem;
use crate::record::{RunRecord, Tracker};
use crate::transforms::{prepare, Requirements, TransformError};

pub use fusion::{fm, fm_run, fuse, greedy_generate, FuseError, GreedyCost, OriginalCost};
pub use ga::{ga, ga_run};
pub use linear::{fw, fw_run, ipfp, ipfp_from, ipfp_run, IpfpInit};
pub use relax::{sinkhorn, SinkhornOutcome};
pub use rrwm::{rrwm, rrwm_run, rrwm_vector};
pub use spectral::{mpm, mpm_run, mpm_vector, sm, sm_run, sm_vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SolverKind {
    #[serde(rename = "sm")]
    Sm,
    #[serde(rename = "mpm")]
    Mpm,
    #[serde(rename = "ipfpu")]
    Ipfpu,
    #[serde(rename = "ipfps")]
    Ipfps,
    #[serde(rename = "ga")]
    Ga,
    #[serde(rename = "fw")]
    Fw,
    #[serde(rename = "rrwm")]
    Rrwm,
    #[serde(rename = "fm")]
    Fm,
    #[serde(rename = "dual")]
    Dual,
    #[serde(rename = "fm+dual")]
    FmDual,
    #[serde(rename = "lap")]
    Lap,
}

impl SolverKind {
    pub const ALL: [SolverKind; 11] = [
        SolverKind::Sm,
        SolverKind::Mpm,
        SolverKind::Ipfpu,
        SolverKind::Ipfps,
        SolverKind::Ga,
        SolverKind::Fw,
        SolverKind::Rrwm,
        SolverKind::Fm,
        SolverKind::Dual,
        SolverKind::FmDual,
        SolverKind::Lap,
    ];

    /// Solvers applicable to problems with pairwise terms.
    pub const QUADRATIC: [SolverKind; 10] = [
        SolverKind::Sm,
        SolverKind::Mpm,
        SolverKind::Ipfpu,
        SolverKind::Ipfps,
        SolverKind::Ga,
        SolverKind::Fw,
        SolverKind::Rrwm,
        SolverKind::Fm,
        SolverKind::Dual,
        SolverKind::FmDual,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Sm => "sm",
            SolverKind::Mpm => "mpm",
            SolverKind::Ipfpu => "ipfpu",
            SolverKind::Ipfps => "ipfps",
            SolverKind::Ga => "ga",
            SolverKind::Fw => "fw",
            SolverKind::Rrwm => "rrwm",
            SolverKind::Fm => "fm",
            SolverKind::Dual => "dual",
            SolverKind::FmDual => "fm+dual",
            SolverKind::Lap => "lap",
        }
    }

    /// Cost-structure requirements of each method.
    pub fn requirements(self) -> Requirements {
        let (bijective, non_positive) = match self {
            SolverKind::Sm | SolverKind::Mpm | SolverKind::Ipfps | SolverKind::Rrwm => (true, true),
            SolverKind::Ipfpu | SolverKind::Ga => (true, false),
            SolverKind::Fw | SolverKind::Fm | SolverKind::Dual | SolverKind::FmDual | SolverKind::Lap => {
                (false, false)
            }
        };
        Requirements {
            bijective,
            non_positive,
            zero_unary: false,
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = SolveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| SolveError::UnknownSolver(s.to_string()))
    }
}

/// Parameters of every solver plus the shared seed and time budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverParams {
    pub seed: u64,
    /// Wall-clock budget in seconds.
    pub budget: f64,
    pub power_tol: f64,
    pub power_max_iter: usize,
    pub ipfp_max_iter: usize,
    /// Initial temperature; `None` means the largest absolute cost.
    pub ga_t0: Option<f64>,
    pub ga_gamma: f64,
    /// `T_min = ga_t_min_ratio * T0`.
    pub ga_t_min_ratio: f64,
    pub ga_max_iter: usize,
    pub sinkhorn_tol: f64,
    pub sinkhorn_max_iter: usize,
    pub fw_tol: f64,
    pub fw_max_iter: usize,
    pub rrwm_alpha: f64,
    pub rrwm_beta: f64,
    pub rrwm_tol: f64,
    pub rrwm_max_iter: usize,
    pub fm_epsilon: f64,
    pub fm_k: usize,
    pub fm_max_generations: usize,
    pub dual_max_iter: usize,
    /// Polyak target is `best E - dual_margin * |best E|`.
    pub dual_margin: f64,
    /// Non-improving iterations before the step scale is halved; 0 keeps
    /// the scale fixed.
    pub dual_patience: usize,
    /// Stop once `(E - D) / |E|` drops to this value.
    pub gap_tol: f64,
    /// Dual iterations between two generations of `fm+dual`.
    pub fm_dual_steps: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            seed: 0,
            budget: 10.0,
            power_tol: 1e-8,
            power_max_iter: 1000,
            ipfp_max_iter: 100,
            ga_t0: None,
            ga_gamma: 0.9,
            ga_t_min_ratio: 1e-3,
            ga_max_iter: 1000,
            sinkhorn_tol: 1e-6,
            sinkhorn_max_iter: 200,
            fw_tol: 1e-6,
            fw_max_iter: 500,
            rrwm_alpha: 0.2,
            rrwm_beta: 30.0,
            rrwm_tol: 1e-8,
            rrwm_max_iter: 300,
            fm_epsilon: 0.2,
            fm_k: 3,
            fm_max_generations: 1000,
            dual_max_iter: 20_000,
            dual_margin: 0.05,
            dual_patience: 0,
            gap_tol: 1e-3,
            fm_dual_steps: 10,
        }
    }
}

impl SolverParams {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_budget(mut self, budget: f64) -> Self {
        self.budget = budget;
        self
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        let caps = [
            ("power_max_iter", self.power_max_iter),
            ("ipfp_max_iter", self.ipfp_max_iter),
            ("ga_max_iter", self.ga_max_iter),
            ("sinkhorn_max_iter", self.sinkhorn_max_iter),
            ("fw_max_iter", self.fw_max_iter),
            ("rrwm_max_iter", self.rrwm_max_iter),
            ("fm_k", self.fm_k),
            ("fm_max_generations", self.fm_max_generations),
            ("dual_max_iter", self.dual_max_iter),
            ("fm_dual_steps", self.fm_dual_steps),
        ];
        if let Some((name, _)) = caps.iter().find(|(_, v)| *v < 1) {
            return Err(SolveError::InvalidParams(format!("{name} must be at least 1")));
        }
        if !(self.budget > 0.0) {
            return Err(SolveError::InvalidParams("budget must be positive".into()));
        }
        if !(self.ga_gamma > 0.0 && self.ga_gamma < 1.0) {
            return Err(SolveError::InvalidParams("ga_gamma must lie in (0, 1)".into()));
        }
        if !(0.0..=1.0).contains(&self.rrwm_alpha) || !(0.0..=1.0).contains(&self.fm_epsilon) {
            return Err(SolveError::InvalidParams(
                "rrwm_alpha and fm_epsilon must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("unknown solver `{0}`")]
    UnknownSolver(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Lap(#[from] LapError),
}

/// Runs a solver on `problem`: transforms the costs as the method requires
/// (untimed), then optimizes and records the best-so-far trace.
pub fn solve(
    kind: SolverKind,
    problem: &Problem,
    params: &SolverParams,
    instance: &str,
) -> Result<RunRecord, SolveError> {
    params.validate()?;
    if kind == SolverKind::Lap && !problem.edges().is_empty() {
        return Err(LapError::HasEdges(problem.edges().len()).into());
    }
    let prepared = prepare(problem, kind.requirements())?;
    let work = &prepared.problem;
    let mut tracker = Tracker::new(problem, &prepared.chain, params.budget);
    match kind {
        SolverKind::Sm => sm_run(work, params, &mut tracker),
        SolverKind::Mpm => mpm_run(work, params, &mut tracker),
        SolverKind::Ipfpu => ipfp_run(work, params, IpfpInit::Uniform, &mut tracker),
        SolverKind::Ipfps => ipfp_run(work, params, IpfpInit::FromSm, &mut tracker),
        SolverKind::Ga => ga_run(work, params, &mut tracker),
        SolverKind::Fw => fw_run(work, params, &mut tracker),
        SolverKind::Rrwm => rrwm_run(work, params, &mut tracker),
        SolverKind::Fm => fm_run(work, params, &mut tracker),
        SolverKind::Dual => dual::subgradient_run(work, params, &mut tracker),
        SolverKind::FmDual => dual::fm_dual_run(work, params, &mut tracker),
        SolverKind::Lap => {
            let (y, _) = lap::solve_ilap(work)?;
            tracker.iterations = 1;
            tracker.offer(&y);
        }
    }
    Ok(tracker.finish(kind.name(), instance, params))
}

/// Runs `body` on `problem` as given (no transforms) and returns its record.
pub(crate) fn run_direct(
    name: &str,
    problem: &Problem,
    params: &SolverParams,
    body: impl FnOnce(&mut Tracker),
) -> RunRecord {
    let mut tracker = Tracker::new(problem, &[], params.budget);
    body(&mut tracker);
    tracker.finish(name, "", params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::t1;

    #[test]
    fn names_round_trip() {
        for k in SolverKind::ALL {
            assert_eq!(k.name().parse::<SolverKind>().unwrap(), k);
            let json = serde_json::to_string(&k).unwrap();
            assert_eq!(json, format!("\"{}\"", k.name()));
        }
        assert!("nope".parse::<SolverKind>().is_err());
    }

    #[test]
    fn params_validation() {
        assert!(SolverParams::default().validate().is_ok());
        let p = SolverParams {
            fw_max_iter: 0,
            ..SolverParams::default()
        };
        assert!(p.validate().is_err());
        assert!(SolverParams::default().with_budget(0.0).validate().is_err());
    }

    #[test]
    fn every_solver_runs_on_t1() {
        let params = SolverParams::default().with_budget(5.0);
        for k in SolverKind::QUADRATIC {
            let r = solve(k, &t1(), &params, "t1").unwrap();
            assert!(t1().is_feasible(&r.labeling), "{k}");
            assert_eq!(t1().evaluate(&r.labeling).unwrap(), r.objective, "{k}");
            assert!(r.objective >= -7.0, "{k}");
        }
        assert!(solve(SolverKind::Lap, &t1(), &params, "t1").is_err());
    }
}
