//! Forward oracles: deterministic simulators mapping a design to an outcome.
//!
//! Each domain implements [`Oracle`]. Oracles are pure functions of the task
//! context (difficulty, seed, kind) and the design; stochastic oracles derive
//! their randomness from explicit seeds, so repeated calls are bit-identical
//! and arbitrary parallel fan-out is safe.

pub mod alloy;
pub mod controls;
pub mod heatx;
pub mod perturbation;
pub mod pkpd;
pub mod quantum;
pub mod reactor;
pub mod sigproc;
pub mod ssa;
pub mod thinfilm;

use crate::model::{Constraint, ConstraintBound, Design, Difficulty, Goal, Outcome, TaskKind};
use crate::rng::DetRng;
use crate::vectorize::DesignSpace;
use serde_json::Value;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

// Bundled, schema-versioned data files: per-task system catalogs, the
// thin-film index table, the alloy property table, and the gene regulatory
// network.
pub(crate) const SYSTEMS_JSON: &str = include_str!("../../data/systems_v1.json");
pub(crate) const MATERIALS_JSON: &str = include_str!("../../data/materials_v1.json");
pub(crate) const ALLOY_JSON: &str = include_str!("../../data/alloy_v1.json");
pub(crate) const GRN_JSON: &str = include_str!("../../data/grn_v1.json");

/// Task-fixed context an oracle needs besides the design itself: the
/// difficulty level selects the system configuration family, the seed picks
/// the concrete instance, and stochastic oracles fold the seed into their
/// random streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaskContext {
    pub difficulty: Difficulty,
    pub seed: u64,
    pub kind: TaskKind,
}

impl TaskContext {
    pub fn of_goal(goal: &Goal) -> Self {
        TaskContext { difficulty: goal.difficulty, seed: goal.seed, kind: goal.task_kind }
    }
}

/// A single validation finding, addressed by parameter path.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl Violation {
    pub fn new(path: &str, message: impl Into<String>) -> Self {
        Violation { path: path.to_string(), message: message.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum OracleError {
    #[error("unknown domain `{0}`")]
    UnknownDomain(String),
    #[error("invalid design: {0}")]
    InvalidDesign(String),
    #[error("unsupported feature: {0}")]
    Unsupported(String),
}

/// How task generation turns an achieved metric value into a target. Metrics
/// that sit at zero for many designs (overshoot of a well-damped loop,
/// steady-state error under integral action) become bound targets at a fixed
/// floor instead of exact targets, which keeps relative error meaningful.
#[derive(Debug, Clone, Copy)]
pub struct MetricPolicy {
    /// Below this magnitude the achieved value is treated as "at zero".
    pub near_zero: f64,
    /// Bound used instead of an exact target in the near-zero case.
    pub fallback_kind: crate::model::TargetKind,
    pub fallback_value: f64,
}

impl Default for MetricPolicy {
    fn default() -> Self {
        MetricPolicy {
            near_zero: 1e-9,
            fallback_kind: crate::model::TargetKind::MaxBound,
            fallback_value: 1e-6,
        }
    }
}

impl MetricPolicy {
    pub fn max_bound_floor(near_zero: f64, floor: f64) -> Self {
        MetricPolicy {
            near_zero,
            fallback_kind: crate::model::TargetKind::MaxBound,
            fallback_value: floor,
        }
    }
}

/// A forward simulator together with its design schema, constraint box,
/// samplers, and metric declarations.
pub trait Oracle: Send + Sync {
    fn domain(&self) -> &'static str;

    /// One-line description used in goal renderings.
    fn blurb(&self) -> &'static str;

    /// Names of all outcome metrics for this task context.
    fn metric_names(&self, ctx: &TaskContext) -> Vec<String>;

    /// Metrics eligible to become targets. Defaults to all metrics; domains
    /// exclude metrics that do not depend on the design (such as a half-life
    /// fixed by the drug's PK parameters).
    fn targetable_metrics(&self, ctx: &TaskContext) -> Vec<String> {
        self.metric_names(ctx)
    }

    /// Constraint set describing the design space for this task context.
    fn constraints(&self, ctx: &TaskContext) -> Vec<Constraint>;

    /// JSON skeleton of the expected design, shown to agents.
    fn schema(&self, ctx: &TaskContext) -> Value;

    /// Rendering of the task-fixed system configuration (plant, streams,
    /// kinetics, PK parameters, ...), shown to agents.
    fn system_summary(&self, ctx: &TaskContext) -> String;

    /// Schema-level validation beyond the generic constraint checks.
    fn validate(&self, ctx: &TaskContext, design: &Design) -> Vec<Violation>;

    /// Runs the forward simulation. Fails on designs that do not satisfy the
    /// domain schema; generic constraint violations are the harness's job.
    fn simulate(&self, ctx: &TaskContext, design: &Design) -> Result<Outcome, OracleError>;

    /// Samples a design valid for this task context, uniformly over the
    /// constraint box (continuous) and enumerations (discrete).
    fn sample_design(&self, ctx: &TaskContext, rng: &mut DetRng) -> Design;

    /// Preferred generating design for task generation, when the domain has
    /// a natural hidden reference (the circuit that built a target state, the
    /// knockout the markers were chosen around). Defaults to random sampling.
    fn generating_design_hint(&self, _ctx: &TaskContext) -> Option<Design> {
        None
    }

    /// Flat real/categorical parameterization of the design space, when the
    /// domain has a fixed-shape one. Used by hill climbing, CEM, and the
    /// calibration sweep.
    fn space(&self, _ctx: &TaskContext) -> Option<DesignSpace> {
        None
    }

    /// Target policy for one metric.
    fn metric_policy(&self, _metric: &str) -> MetricPolicy {
        MetricPolicy::default()
    }

    /// Whether an outcome is a sensible basis for a frozen task. Task
    /// generation resamples generating designs whose outcome fails this
    /// (for example an unstable control loop's sentinel outcome).
    fn taskworthy(&self, _outcome: &Outcome) -> bool {
        true
    }

    /// Domain-declared parsimony score (higher is simpler). Zero by default.
    fn parsimony(&self, _ctx: &TaskContext, _design: &Design) -> f64 {
        0.0
    }
}

/// Maps domain identifiers to their oracle implementations.
#[derive(Clone)]
pub struct Registry {
    oracles: BTreeMap<&'static str, Arc<dyn Oracle>>,
}

impl Registry {
    /// All ten built-in domains.
    pub fn builtin() -> Self {
        let list: Vec<Arc<dyn Oracle>> = vec![
            Arc::new(quantum::QuantumOracle::new()),
            Arc::new(thinfilm::ThinFilmOracle::new()),
            Arc::new(controls::ControlsOracle::new()),
            Arc::new(sigproc::SigProcOracle::new()),
            Arc::new(reactor::ReactorOracle::new()),
            Arc::new(heatx::HeatxOracle::new()),
            Arc::new(pkpd::PkpdOracle::new()),
            Arc::new(ssa::SsaOracle::new()),
            Arc::new(alloy::AlloyOracle::new()),
            Arc::new(perturbation::PerturbationOracle::new()),
        ];
        let mut oracles = BTreeMap::new();
        for o in list {
            oracles.insert(o.domain(), o);
        }
        Registry { oracles }
    }

    pub fn get(&self, domain: &str) -> Result<&Arc<dyn Oracle>, OracleError> {
        self.oracles.get(domain).ok_or_else(|| OracleError::UnknownDomain(domain.to_string()))
    }

    pub fn domains(&self) -> Vec<&'static str> {
        self.oracles.keys().copied().collect()
    }

    pub fn contains(&self, domain: &str) -> bool {
        self.oracles.contains_key(domain)
    }
}

/// Full validation of a design against a goal: domain tag, every goal
/// constraint, and the domain schema. Returns all violations, never aborts
/// on the first, and never calls the oracle.
pub fn validate_design(oracle: &dyn Oracle, goal: &Goal, design: &Design) -> Vec<Violation> {
    let mut out = Vec::new();
    if design.domain != goal.domain {
        out.push(Violation::new(
            "domain",
            format!("design domain `{}` does not match task domain `{}`", design.domain, goal.domain),
        ));
        return out;
    }
    for c in &goal.constraints {
        out.extend(check_constraint(c, &design.params));
    }
    out.extend(oracle.validate(&TaskContext::of_goal(goal), design));
    out
}

/// Collects the values addressed by a constraint path. Segments are
/// dot-separated; a trailing `[]` on a segment maps over list elements.
/// Missing paths address nothing (required-key checks are schema-level).
fn collect_path<'a>(value: &'a Value, segments: &[&str], out: &mut Vec<&'a Value>) {
    let Some((head, rest)) = segments.split_first() else {
        out.push(value);
        return;
    };
    let (key, iterate) = match head.strip_suffix("[]") {
        Some(k) => (k, true),
        None => (*head, false),
    };
    let Some(child) = value.get(key) else { return };
    if iterate {
        if let Some(items) = child.as_array() {
            for item in items {
                collect_path(item, rest, out);
            }
        }
    } else {
        collect_path(child, rest, out);
    }
}

fn check_constraint(c: &Constraint, params: &serde_json::Map<String, Value>) -> Vec<Violation> {
    let root = Value::Object(params.clone());
    let segments: Vec<&str> = c.path.split('.').collect();
    let mut addressed = Vec::new();
    collect_path(&root, &segments, &mut addressed);
    let mut out = Vec::new();
    match &c.bound {
        ConstraintBound::Range { min, max } => {
            for v in addressed {
                match v.as_f64() {
                    Some(x) if x >= *min && x <= *max => {}
                    Some(x) => out.push(Violation::new(
                        &c.path,
                        format!("value {x} outside range [{min}, {max}]"),
                    )),
                    None => out.push(Violation::new(&c.path, "expected a number")),
                }
            }
        }
        ConstraintBound::EnumNumber { allowed } => {
            for v in addressed {
                match v.as_f64() {
                    Some(x) if allowed.iter().any(|a| (a - x).abs() < 1e-9) => {}
                    Some(x) => out.push(Violation::new(
                        &c.path,
                        format!("value {x} not in allowed set {allowed:?}"),
                    )),
                    None => out.push(Violation::new(&c.path, "expected a number")),
                }
            }
        }
        ConstraintBound::EnumToken { allowed } => {
            for v in addressed {
                match v.as_str() {
                    Some(s) if allowed.iter().any(|a| a == s) => {}
                    Some(s) => out.push(Violation::new(
                        &c.path,
                        format!("token `{s}` not in allowed set {allowed:?}"),
                    )),
                    None => out.push(Violation::new(&c.path, "expected a string")),
                }
            }
        }
        ConstraintBound::SumToOne { tol } => {
            for v in addressed {
                let sum: Option<f64> = match v {
                    Value::Object(map) => {
                        map.values().map(|x| x.as_f64()).collect::<Option<Vec<_>>>()
                            .map(|xs| xs.iter().sum())
                    }
                    Value::Array(items) => {
                        items.iter().map(|x| x.as_f64()).collect::<Option<Vec<_>>>()
                            .map(|xs| xs.iter().sum())
                    }
                    _ => None,
                };
                match sum {
                    Some(s) if (s - 1.0).abs() <= *tol => {}
                    Some(s) => out.push(Violation::new(
                        &c.path,
                        format!("values sum to {s}, expected 1.0 within {tol}"),
                    )),
                    None => out.push(Violation::new(&c.path, "expected numeric map or list")),
                }
            }
        }
        ConstraintBound::MaxCount { max } => {
            for v in addressed {
                let n = match v {
                    Value::Array(items) => Some(items.len()),
                    Value::Object(map) => Some(map.len()),
                    _ => None,
                };
                match n {
                    Some(n) if n <= *max => {}
                    Some(n) => out.push(Violation::new(
                        &c.path,
                        format!("{n} entries exceed the maximum of {max}"),
                    )),
                    None => out.push(Violation::new(&c.path, "expected a list or map")),
                }
            }
        }
    }
    out
}

/// Renders violations as one line per finding, for retry messages and logs.
pub fn violations_text(violations: &[Violation]) -> String {
    violations.iter().map(|v| format!("- {v}")).collect::<Vec<_>>().join("\n")
}
