//! Graph matching (Lawler QAP) toolkit: sparse instances, dd file I/O, cost
//! transformations and reductions, an exact LAP kernel, primal heuristics
//! from the main algorithm families, a Lagrangean lower bound, and the
//! fixed-time / fixed-target benchmark machinery.

pub mod bench;
pub mod dd_io;
pub mod dual;
pub mod lap;
pub mod model;
pub mod record;
pub mod solvers;
pub mod transforms;

pub use lap::{round_fractional, solve_ilap, solve_lap, LapMatrix};
pub use model::{brute_force_solve, BruteForce, FractionalSolution, Labeling, Problem};
pub use record::{RunRecord, TraceEntry};
pub use solvers::{SolverKind, SolverParams};
