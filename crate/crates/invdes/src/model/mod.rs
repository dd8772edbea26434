//! Shared task data model: goals, designs, outcomes, difficulty levels, and
//! the scoring rules every domain uses.
//!
//! Everything here is an immutable value after construction and every
//! operation is a pure function, so tasks can be scored from any number of
//! concurrent workers.

mod canon;
mod score;

pub use canon::{canonical_json, canonical_json_pretty, designs_equal};
pub use score::{
    base_reward, check_all_targets, check_target, success_predicate, TargetCheck,
    DEFAULT_BOUND_SLACK, EPS_DEN,
};

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// How a target value is to be met.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    /// Achieved value must lie within the relative tolerance of the value.
    Exact,
    /// Achieved value must be at least the value (minus the bound slack).
    MinBound,
    /// Achieved value must be at most the value (plus the bound slack).
    MaxBound,
}

/// One quantitative target inside a goal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub metric: String,
    pub kind: TargetKind,
    pub value: f64,
}

impl TargetSpec {
    pub fn exact(metric: &str, value: f64) -> Self {
        TargetSpec { metric: metric.to_string(), kind: TargetKind::Exact, value }
    }
    pub fn min_bound(metric: &str, value: f64) -> Self {
        TargetSpec { metric: metric.to_string(), kind: TargetKind::MinBound, value }
    }
    pub fn max_bound(metric: &str, value: f64) -> Self {
        TargetSpec { metric: metric.to_string(), kind: TargetKind::MaxBound, value }
    }
}

/// Difficulty level. The level fixes both the number of targets a goal
/// carries and the relative tolerance of its success check:
/// L1 30%, L2 25%, L3 20%, L4 15%.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Difficulty {
    L1,
    L2,
    L3,
    L4,
}

impl Difficulty {
    pub const ALL: [Difficulty; 4] = [Difficulty::L1, Difficulty::L2, Difficulty::L3, Difficulty::L4];

    pub fn rel_tolerance(self) -> f64 {
        match self {
            Difficulty::L1 => 0.30,
            Difficulty::L2 => 0.25,
            Difficulty::L3 => 0.20,
            Difficulty::L4 => 0.15,
        }
    }

    /// Number of targets a goal at this level carries, given how many
    /// metrics the domain exposes for targeting.
    pub fn target_count(self, n_targetable: usize) -> usize {
        let want = match self {
            Difficulty::L1 => 1,
            Difficulty::L2 => 2,
            Difficulty::L3 => 3,
            Difficulty::L4 => n_targetable,
        };
        want.min(n_targetable).max(1)
    }

    pub fn parse(s: &str) -> Option<Difficulty> {
        match s {
            "L1" | "l1" => Some(Difficulty::L1),
            "L2" | "l2" => Some(Difficulty::L2),
            "L3" | "l3" => Some(Difficulty::L3),
            "L4" | "l4" => Some(Difficulty::L4),
            _ => None,
        }
    }
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Difficulty::L1 => write!(f, "L1"),
            Difficulty::L2 => write!(f, "L2"),
            Difficulty::L3 => write!(f, "L3"),
            Difficulty::L4 => write!(f, "L4"),
        }
    }
}

/// De novo tasks are designed from scratch; optimization tasks modify a
/// provided starting design and must end up different from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    DeNovo,
    Optimization,
}

impl TaskKind {
    pub const ALL: [TaskKind; 2] = [TaskKind::DeNovo, TaskKind::Optimization];

    pub fn short(self) -> &'static str {
        match self {
            TaskKind::DeNovo => "dn",
            TaskKind::Optimization => "opt",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaskKind::DeNovo => write!(f, "de_novo"),
            TaskKind::Optimization => write!(f, "optimization"),
        }
    }
}

/// Mechanically checkable bound on a design parameter. None of these need an
/// oracle call to verify.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "bound", rename_all = "snake_case")]
pub enum ConstraintBound {
    Range { min: f64, max: f64 },
    EnumNumber { allowed: Vec<f64> },
    EnumToken { allowed: Vec<String> },
    SumToOne { tol: f64 },
    MaxCount { max: usize },
}

/// A constraint on one parameter path of a design.
///
/// Paths address into the design's parameter map: `"volume_L"` is a top-level
/// key, `"layers[].thickness_nm"` addresses a field of every record in a
/// list, `"composition"` with `SumToOne` addresses a fraction map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub path: String,
    #[serde(flatten)]
    pub bound: ConstraintBound,
}

impl Constraint {
    pub fn range(path: &str, min: f64, max: f64) -> Self {
        Constraint { path: path.to_string(), bound: ConstraintBound::Range { min, max } }
    }
    pub fn enum_number(path: &str, allowed: &[f64]) -> Self {
        Constraint {
            path: path.to_string(),
            bound: ConstraintBound::EnumNumber { allowed: allowed.to_vec() },
        }
    }
    pub fn enum_token(path: &str, allowed: &[&str]) -> Self {
        Constraint {
            path: path.to_string(),
            bound: ConstraintBound::EnumToken {
                allowed: allowed.iter().map(|s| s.to_string()).collect(),
            },
        }
    }
    pub fn sum_to_one(path: &str, tol: f64) -> Self {
        Constraint { path: path.to_string(), bound: ConstraintBound::SumToOne { tol } }
    }
    pub fn max_count(path: &str, max: usize) -> Self {
        Constraint { path: path.to_string(), bound: ConstraintBound::MaxCount { max } }
    }
}

/// Structured target specification for one task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Goal {
    pub domain: String,
    pub targets: Vec<TargetSpec>,
    pub constraints: Vec<Constraint>,
    pub difficulty: Difficulty,
    pub seed: u64,
    pub task_kind: TaskKind,
}

/// A candidate design: a domain tag plus the parameter map an agent emitted.
/// Each domain declares the exact schema the map must satisfy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub domain: String,
    pub params: serde_json::Map<String, serde_json::Value>,
}

impl Design {
    pub fn new(domain: &str, params: serde_json::Value) -> Self {
        let params = match params {
            serde_json::Value::Object(map) => map,
            other => {
                let mut map = serde_json::Map::new();
                map.insert("value".to_string(), other);
                map
            }
        };
        Design { domain: domain.to_string(), params }
    }

    pub fn get(&self, key: &str) -> Option<&serde_json::Value> {
        self.params.get(key)
    }

    pub fn f64(&self, key: &str) -> Option<f64> {
        self.params.get(key).and_then(|v| v.as_f64())
    }
}

/// Simulated metric values produced by a forward oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub domain: String,
    pub metrics: BTreeMap<String, f64>,
}

impl Outcome {
    pub fn new(domain: &str) -> Self {
        Outcome { domain: domain.to_string(), metrics: BTreeMap::new() }
    }

    pub fn with(mut self, metric: &str, value: f64) -> Self {
        self.metrics.insert(metric.to_string(), value);
        self
    }

    pub fn get(&self, metric: &str) -> Option<f64> {
        self.metrics.get(metric).copied()
    }
}

/// Frozen benchmark unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub task_id: String,
    pub goal: Goal,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub starting_design: Option<Design>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub starting_outcome: Option<Outcome>,
}

impl TaskRecord {
    /// Optimization tasks carry both a starting design and its measured
    /// outcome; de novo tasks carry neither.
    pub fn check_shape(&self) -> Result<(), String> {
        match self.goal.task_kind {
            TaskKind::Optimization => {
                if self.starting_design.is_none() || self.starting_outcome.is_none() {
                    return Err(format!(
                        "optimization task {} must carry starting design and outcome",
                        self.task_id
                    ));
                }
            }
            TaskKind::DeNovo => {
                if self.starting_design.is_some() || self.starting_outcome.is_some() {
                    return Err(format!(
                        "de novo task {} must not carry a starting design",
                        self.task_id
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Contract violations between goal, outcome, and design.
#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum ModelError {
    #[error("domain mismatch: goal is `{goal}` but {what} is `{got}`")]
    DomainMismatch { goal: String, what: &'static str, got: String },
    #[error("goal has no targets")]
    EmptyTargets,
    #[error("outcome is missing metric `{0}`")]
    MissingMetric(String),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_schedule_is_fixed() {
        assert_eq!(Difficulty::L1.rel_tolerance(), 0.30);
        assert_eq!(Difficulty::L2.rel_tolerance(), 0.25);
        assert_eq!(Difficulty::L3.rel_tolerance(), 0.20);
        assert_eq!(Difficulty::L4.rel_tolerance(), 0.15);
    }

    #[test]
    fn target_counts_follow_level() {
        assert_eq!(Difficulty::L1.target_count(5), 1);
        assert_eq!(Difficulty::L2.target_count(5), 2);
        assert_eq!(Difficulty::L3.target_count(5), 3);
        assert_eq!(Difficulty::L3.target_count(3), 3);
        assert_eq!(Difficulty::L4.target_count(5), 5);
        assert_eq!(Difficulty::L4.target_count(2), 2);
    }

    #[test]
    fn difficulty_serializes_as_level_names() {
        let s = serde_json::to_string(&Difficulty::L3).unwrap();
        assert_eq!(s, "\"L3\"");
        let d: Difficulty = serde_json::from_str("\"L1\"").unwrap();
        assert_eq!(d, Difficulty::L1);
    }

    #[test]
    fn task_record_shape_rules() {
        let goal = Goal {
            domain: "reactor".into(),
            targets: vec![TargetSpec::exact("conversion", 0.5)],
            constraints: vec![],
            difficulty: Difficulty::L1,
            seed: 7,
            task_kind: TaskKind::Optimization,
        };
        let rec = TaskRecord {
            task_id: "t".into(),
            goal,
            starting_design: None,
            starting_outcome: None,
        };
        assert!(rec.check_shape().is_err());
    }
}
