//! Simulator-grounded inverse-design benchmark suite.
//!
//! The crate bundles three layers:
//!
//! - **Forward oracles** ([`oracles`]): ten self-contained scientific
//!   simulators, each a deterministic map from a structured design to a set
//!   of outcome metrics.
//! - **Benchmark machinery** ([`model`], [`taskgen`], [`harness`],
//!   [`calibration`], [`agents`]): difficulty-graded task generation with
//!   frozen manifests, the parse/validate/execute/score pipeline with
//!   multi-turn feedback, per-task calibration artifacts, and reference
//!   agents including a line-protocol adapter for external processes.
//! - **Training-side math** ([`rlsf`]): shaped rewards, group-relative
//!   advantages, the clipped surrogate term, batched rollouts, and a
//!   cross-entropy reference optimizer.
//!
//! The `invdes` command-line tool in the companion crate drives generation,
//! calibration, evaluation, and reporting. The book under `book/` walks
//! through the concepts; its code snippets are compiled as doctests.

pub mod agents;
pub mod calibration;
pub mod harness;
pub mod model;
pub mod oracles;
pub mod rlsf;
pub mod rng;
pub mod taskgen;
pub mod vectorize;

pub use model::{
    Constraint, ConstraintBound, Design, Difficulty, Goal, Outcome, TargetKind, TargetSpec,
    TaskKind, TaskRecord,
};
pub use oracles::{Oracle, Registry, TaskContext};
