//! Evaluation protocol: instance suites, synthetic generators, fixed-time
//! and fixed-target reports, performance profiles and the parallel runner.

mod generate;
mod report;
mod runner;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dd_io::{self, DdError};
use crate::model::{Labeling, Problem};

pub use generate::{gen_caltech_style, gen_house_style, gen_random, parse_generate_spec, GenerateSpec};
pub use report::{
    default_taus, fixed_target_times, fixed_target_times_from_records, fixed_time_report, performance_profile, reference_optima,
    FixedTimeReport, FixedTimeRow, Profile, ProfileTable, NO_SOLUTION,
};
pub use runner::{run_benchmark, write_outputs, BenchConfig, BenchOutput};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Dd { path: PathBuf, source: DdError },
    #[error("{path}: invalid sidecar: {message}")]
    Sidecar { path: PathBuf, message: String },
    #[error("ground truth is empty")]
    EmptyGroundTruth,
    #[error("ground truth covers {got} nodes, labeling has {expected}")]
    GroundTruthSize { expected: usize, got: usize },
    #[error("ground truth pair ({node}, {label}) is not a candidate of instance {instance}")]
    InvalidGroundTruth {
        instance: String,
        node: usize,
        label: usize,
    },
    #[error("tau grid must be increasing and start at a value >= 1")]
    InvalidTaus,
    #[error("invalid generator spec `{0}`")]
    InvalidSpec(String),
    #[error("invalid generator parameters: {0}")]
    InvalidGenerator(String),
    #[error("run record: {0}")]
    Record(String),
}

/// One benchmark instance with optional reference data.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    pub problem: Problem,
    /// Partial matching: `None` marks nodes without ground truth.
    pub ground_truth: Option<Labeling>,
    pub optimum: Option<f64>,
}

/// Reference data stored next to `<stem>.dd` as `<stem>.json`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<Labeling>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimum: Option<f64>,
}

impl Instance {
    pub fn new(name: impl Into<String>, problem: Problem) -> Self {
        Self {
            name: name.into(),
            problem,
            ground_truth: None,
            optimum: None,
        }
    }

    /// Checks that the ground truth references candidate pairs only.
    pub fn validate(&self) -> Result<(), BenchError> {
        if let Some(gt) = &self.ground_truth {
            if gt.len() != self.problem.num_nodes() {
                return Err(BenchError::GroundTruthSize {
                    expected: self.problem.num_nodes(),
                    got: gt.len(),
                });
            }
            for (node, label) in gt.iter().enumerate() {
                if let Some(label) = label {
                    if self.problem.find(node, label).is_none() {
                        return Err(BenchError::InvalidGroundTruth {
                            instance: self.name.clone(),
                            node,
                            label,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Named instances, in a fixed order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Suite {
    pub instances: Vec<Instance>,
}

impl Suite {
    /// Loads every `*.dd` file of `dir` (sorted by name) together with its
    /// optional `<stem>.json` sidecar.
    pub fn load_dir(dir: &Path) -> Result<Self, BenchError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| BenchError::Io { path, source }
        };
        let mut files: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(io(dir))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "dd"))
            .collect();
        files.sort();
        let mut instances = Vec::with_capacity(files.len());
        for path in files {
            let bytes = fs::read(&path).map_err(io(&path))?;
            let problem = dd_io::parse_bytes(&bytes).map_err(|source| BenchError::Dd {
                path: path.clone(),
                source,
            })?;
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let mut instance = Instance::new(name, problem);
            let side = path.with_extension("json");
            if side.exists() {
                let text = fs::read_to_string(&side).map_err(io(&side))?;
                let data: Sidecar = serde_json::from_str(&text).map_err(|e| BenchError::Sidecar {
                    path: side.clone(),
                    message: e.to_string(),
                })?;
                instance.ground_truth = data.ground_truth;
                instance.optimum = data.optimum;
            }
            instance.validate()?;
            instances.push(instance);
        }
        Ok(Self { instances })
    }

    /// Writes `<name>.dd` and, when reference data exists, `<name>.json`.
    pub fn save_dir(&self, dir: &Path) -> Result<(), BenchError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| BenchError::Io { path, source }
        };
        fs::create_dir_all(dir).map_err(io(dir))?;
        for inst in &self.instances {
            let path = dir.join(format!("{}.dd", inst.name));
            fs::write(&path, dd_io::write(&inst.problem)).map_err(io(&path))?;
            if inst.ground_truth.is_some() || inst.optimum.is_some() {
                let side = dir.join(format!("{}.json", inst.name));
                let data = Sidecar {
                    ground_truth: inst.ground_truth.clone(),
                    optimum: inst.optimum,
                };
                let text = serde_json::to_string_pretty(&data).expect("sidecar serializes");
                fs::write(&side, text + "\n").map_err(io(&side))?;
            }
        }
        Ok(())
    }
}

/// Fraction of nodes with ground truth whose label matches it.
pub fn accuracy(labeling: &Labeling, ground_truth: &Labeling) -> Result<f64, BenchError> {
    if labeling.len() != ground_truth.len() {
        return Err(BenchError::GroundTruthSize {
            expected: labeling.len(),
            got: ground_truth.len(),
        });
    }
    let known = ground_truth.num_assigned();
    if known == 0 {
        return Err(BenchError::EmptyGroundTruth);
    }
    let correct = ground_truth
        .iter()
        .zip(labeling.iter())
        .filter(|(gt, y)| gt.is_some() && gt == y)
        .count();
    Ok(correct as f64 / known as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lab(v: &[Option<usize>]) -> Labeling {
        Labeling::from_vec(v.to_vec())
    }

    #[test]
    fn accuracy_examples() {
        let gt = lab(&[Some(0), Some(1), Some(2), Some(3)]);
        assert_eq!(accuracy(&lab(&[Some(0), Some(1), Some(2), Some(0)]), &gt).unwrap(), 0.75);
        let partial = lab(&[Some(0), None, Some(2), None]);
        assert_eq!(accuracy(&lab(&[Some(0), Some(1), Some(2), Some(3)]), &partial).unwrap(), 1.0);
        assert_eq!(accuracy(&Labeling::unassigned(4), &gt).unwrap(), 0.0);
        assert_eq!(accuracy(&gt, &gt).unwrap(), 1.0);
        assert!(matches!(
            accuracy(&gt, &Labeling::unassigned(4)),
            Err(BenchError::EmptyGroundTruth)
        ));
    }
}
