//! Solver run records and the best-so-far tracker that produces them.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::model::{Labeling, Problem};
use crate::solvers::SolverParams;
use crate::transforms::{pullback_chain, TransformReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    /// Seconds since the optimization routine started.
    pub elapsed: f64,
    /// Best primal objective so far, in the original problem's sign.
    pub objective: Option<f64>,
    /// Best lower bound so far.
    pub lower_bound: Option<f64>,
    /// Labeling attaining `objective`, present when it changed at this entry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labeling: Option<Labeling>,
}

/// Wall-clock data, kept apart so reproducibility checks can mask it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_seconds: f64,
    pub trace: Vec<TraceEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub solver: String,
    pub instance: String,
    pub params: SolverParams,
    pub labeling: Labeling,
    /// `NaN` (serialized as `null`) when the run failed.
    #[serde(with = "nan_as_null")]
    pub objective: f64,
    pub lower_bound: Option<f64>,
    pub iterations: usize,
    /// Set when the run failed before producing a solution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub timing: Timing,
}

impl RunRecord {
    /// Record for a run that produced nothing.
    pub fn failed(
        solver: &str,
        instance: &str,
        params: &SolverParams,
        num_nodes: usize,
        error: String,
    ) -> Self {
        Self {
            solver: solver.to_string(),
            instance: instance.to_string(),
            params: params.clone(),
            labeling: Labeling::unassigned(num_nodes),
            objective: f64::NAN,
            lower_bound: None,
            iterations: 0,
            error: Some(error),
            timing: Timing {
                total_seconds: 0.0,
                trace: Vec::new(),
            },
        }
    }

    pub fn solved(&self) -> bool {
        self.error.is_none() && !self.timing.trace.is_empty()
    }

    /// Best objective reached within `seconds`, if any.
    pub fn objective_at(&self, seconds: f64) -> Option<f64> {
        self.last_entry_at(seconds).and_then(|e| e.objective)
    }

    pub fn lower_bound_at(&self, seconds: f64) -> Option<f64> {
        self.last_entry_at(seconds).and_then(|e| e.lower_bound)
    }

    /// Labeling attaining the best objective within `seconds`.
    pub fn labeling_at(&self, seconds: f64) -> Option<&Labeling> {
        self.timing
            .trace
            .iter()
            .take_while(|e| e.elapsed <= seconds)
            .filter_map(|e| e.labeling.as_ref())
            .last()
    }

    fn last_entry_at(&self, seconds: f64) -> Option<&TraceEntry> {
        self.timing
            .trace
            .iter()
            .take_while(|e| e.elapsed <= seconds)
            .last()
    }

    /// JSON without the `timing` key.
    pub fn untimed_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("record serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("timing");
        }
        v
    }
}

/// Keeps the best labeling and bound seen during a run and the trace.
///
/// Solvers hand in labelings of the problem they operate on; the tracker
/// pulls them back through the transform chain and evaluates them on the
/// original problem, so every reported objective is in the original sign.
pub struct Tracker<'a> {
    original: &'a Problem,
    chain: &'a [TransformReport],
    start: Instant,
    budget: Duration,
    best: Option<(Labeling, f64)>,
    bound: Option<f64>,
    trace: Vec<TraceEntry>,
    pub iterations: usize,
}

impl<'a> Tracker<'a> {
    pub fn new(original: &'a Problem, chain: &'a [TransformReport], budget_seconds: f64) -> Self {
        Self {
            original,
            chain,
            start: Instant::now(),
            budget: Duration::from_secs_f64(budget_seconds.max(0.0)),
            best: None,
            bound: None,
            trace: Vec::new(),
            iterations: 0,
        }
    }

    pub fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    pub fn expired(&self) -> bool {
        self.start.elapsed() >= self.budget
    }

    pub fn best_objective(&self) -> Option<f64> {
        self.best.as_ref().map(|b| b.1)
    }

    pub fn best_labeling(&self) -> Option<&Labeling> {
        self.best.as_ref().map(|b| &b.0)
    }

    pub fn lower_bound(&self) -> Option<f64> {
        self.bound
    }

    /// Offers a labeling of the solver's problem; returns its objective on
    /// the original problem. Infeasible labelings are ignored.
    pub fn offer(&mut self, y: &Labeling) -> Option<f64> {
        let y = pullback_chain(self.chain, y);
        let value = self.original.evaluate(&y).ok()?;
        self.offer_original(y, value);
        Some(value)
    }

    /// Offers a labeling of the original problem with a known objective.
    pub fn offer_original(&mut self, y: Labeling, value: f64) {
        if self.best.as_ref().is_none_or(|b| value < b.1) {
            self.best = Some((y.clone(), value));
            self.push(Some(y));
        }
    }

    pub fn offer_bound(&mut self, bound: f64) {
        if bound.is_finite() && self.bound.is_none_or(|b| bound > b) {
            self.bound = Some(bound);
            self.push(None);
        }
    }

    /// Relative gap `(E - D) / |E|` when both exist.
    pub fn gap(&self) -> Option<f64> {
        let e = self.best_objective()?;
        let d = self.bound?;
        Some(relative_gap(e, d))
    }

    fn push(&mut self, labeling: Option<Labeling>) {
        let entry = TraceEntry {
            elapsed: self.elapsed(),
            objective: self.best_objective(),
            lower_bound: self.bound,
            labeling,
        };
        match self.trace.last_mut() {
            Some(last) if entry.elapsed <= last.elapsed => {
                // Same clock reading: fold into the previous entry.
                last.objective = entry.objective;
                last.lower_bound = entry.lower_bound;
                if entry.labeling.is_some() {
                    last.labeling = entry.labeling;
                }
            }
            _ => self.trace.push(entry),
        }
    }

    pub fn finish(self, solver: &str, instance: &str, params: &SolverParams) -> RunRecord {
        let total_seconds = self.elapsed();
        let (labeling, objective) = self
            .best
            .unwrap_or_else(|| (Labeling::unassigned(self.original.num_nodes()), 0.0));
        RunRecord {
            solver: solver.to_string(),
            instance: instance.to_string(),
            params: params.clone(),
            labeling,
            objective,
            lower_bound: self.bound,
            iterations: self.iterations,
            error: None,
            timing: Timing {
                total_seconds,
                trace: self.trace,
            },
        }
    }
}

/// `(E - D) / |E|` with an absolute floor for `E = 0`.
pub fn relative_gap(objective: f64, bound: f64) -> f64 {
    (objective - bound).max(0.0) / objective.abs().max(1e-9)
}

mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        v.is_finite().then_some(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}
