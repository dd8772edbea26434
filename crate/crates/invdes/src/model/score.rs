//! Target checking, the success predicate, and the base reward.

use super::{
    designs_equal, Design, Goal, ModelError, Outcome, TargetKind, TargetSpec, TaskKind,
};

/// Denominator guard for relative errors against zero-valued targets.
pub const EPS_DEN: f64 = 1e-9;

/// Default slack for min/max bound targets.
pub const DEFAULT_BOUND_SLACK: f64 = 0.10;

/// Result of checking one target against an achieved value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetCheck {
    pub passed: bool,
    /// Signed relative error `(achieved - value) / max(|value|, EPS_DEN)`.
    /// Infinite when the achieved value was not finite.
    pub rel_error: f64,
    /// One-sided miss distance used by the reward: |rel_error| for exact
    /// targets, the shortfall/overshoot beyond the bound for min/max targets
    /// (zero when the bound is satisfied with room to spare).
    pub miss: f64,
}

/// Checks one target. `tolerance` applies to exact targets, `bound_slack` to
/// min/max bounds. A non-finite achieved value counts as a miss, never a
/// crash.
pub fn check_target(
    target: &TargetSpec,
    achieved: f64,
    tolerance: f64,
    bound_slack: f64,
) -> TargetCheck {
    debug_assert!(tolerance > 0.0 && tolerance < 1.0, "tolerance out of (0,1)");
    if !achieved.is_finite() {
        return TargetCheck { passed: false, rel_error: f64::INFINITY, miss: f64::INFINITY };
    }
    let denom = target.value.abs().max(EPS_DEN);
    let rel_error = (achieved - target.value) / denom;
    let (passed, miss) = match target.kind {
        TargetKind::Exact => (rel_error.abs() <= tolerance, rel_error.abs()),
        TargetKind::MinBound => {
            (achieved >= target.value * (1.0 - bound_slack), (-rel_error).max(0.0))
        }
        TargetKind::MaxBound => {
            (achieved <= target.value * (1.0 + bound_slack), rel_error.max(0.0))
        }
    };
    TargetCheck { passed, rel_error, miss }
}

/// Checks every target of a goal against an outcome at the given tolerances.
/// A metric missing from the outcome is a contract violation.
pub fn check_all_targets(
    goal: &Goal,
    outcome: &Outcome,
    tolerance: f64,
    bound_slack: f64,
) -> Result<Vec<TargetCheck>, ModelError> {
    if goal.domain != outcome.domain {
        return Err(ModelError::DomainMismatch {
            goal: goal.domain.clone(),
            what: "outcome",
            got: outcome.domain.clone(),
        });
    }
    goal.targets
        .iter()
        .map(|t| {
            let achieved = outcome
                .get(&t.metric)
                .ok_or_else(|| ModelError::MissingMetric(t.metric.clone()))?;
            Ok(check_target(t, achieved, tolerance, bound_slack))
        })
        .collect()
}

/// Success iff every target passes at the goal's difficulty tolerance, and
/// (for optimization tasks) the proposed design differs from the start.
pub fn success_predicate(
    goal: &Goal,
    outcome: &Outcome,
    starting_design: Option<&Design>,
    proposed: &Design,
) -> Result<bool, ModelError> {
    if goal.domain != proposed.domain {
        return Err(ModelError::DomainMismatch {
            goal: goal.domain.clone(),
            what: "design",
            got: proposed.domain.clone(),
        });
    }
    let checks = check_all_targets(goal, outcome, goal.difficulty.rel_tolerance(), DEFAULT_BOUND_SLACK)?;
    let all_pass = checks.iter().all(|c| c.passed);
    if !all_pass {
        return Ok(false);
    }
    if goal.task_kind == TaskKind::Optimization {
        if let Some(start) = starting_design {
            if designs_equal(start, proposed) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Base reward on the `[0, 10]` scale: a linear ramp in the mean relative
/// miss, capped at a relative error of 1. Zero distance on every target
/// scores exactly 10.
pub fn base_reward(goal: &Goal, outcome: &Outcome) -> Result<f64, ModelError> {
    if goal.targets.is_empty() {
        return Err(ModelError::EmptyTargets);
    }
    let checks = check_all_targets(goal, outcome, goal.difficulty.rel_tolerance(), DEFAULT_BOUND_SLACK)?;
    let mean_miss: f64 =
        checks.iter().map(|c| c.miss.min(1.0)).sum::<f64>() / checks.len() as f64;
    Ok(10.0 * (1.0 - mean_miss))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Difficulty;
    use serde_json::json;

    fn goal_with(targets: Vec<TargetSpec>, difficulty: Difficulty, kind: TaskKind) -> Goal {
        Goal {
            domain: "reactor".into(),
            targets,
            constraints: vec![],
            difficulty,
            seed: 0,
            task_kind: kind,
        }
    }

    #[test]
    fn exact_target_within_tolerance() {
        let t = TargetSpec::exact("m", 10.0);
        let c = check_target(&t, 12.0, 0.30, 0.10);
        assert!(c.passed);
        assert!((c.rel_error - 0.20).abs() < 1e-12);
    }

    #[test]
    fn exact_target_outside_tolerance() {
        let t = TargetSpec::exact("m", 10.0);
        let c = check_target(&t, 12.0, 0.15, 0.10);
        assert!(!c.passed);
        assert!((c.rel_error - 0.20).abs() < 1e-12);
    }

    #[test]
    fn max_bound_allows_slack() {
        let t = TargetSpec::max_bound("m", 5.0);
        assert!(check_target(&t, 5.4, 0.30, 0.10).passed);
        assert!(!check_target(&t, 5.6, 0.30, 0.10).passed);
    }

    #[test]
    fn min_bound_allows_slack() {
        let t = TargetSpec::min_bound("m", 5.0);
        assert!(check_target(&t, 4.6, 0.30, 0.10).passed);
        assert!(!check_target(&t, 4.4, 0.30, 0.10).passed);
    }

    #[test]
    fn non_finite_achieved_is_a_miss_not_a_crash() {
        let t = TargetSpec::exact("m", 10.0);
        let c = check_target(&t, f64::NAN, 0.30, 0.10);
        assert!(!c.passed);
        assert!(c.rel_error.is_infinite());
    }

    #[test]
    fn zero_valued_target_uses_denominator_guard() {
        let t = TargetSpec::exact("m", 0.0);
        let c = check_target(&t, 0.0, 0.30, 0.10);
        assert!(c.passed);
        assert_eq!(c.rel_error, 0.0);
        let c = check_target(&t, 0.001, 0.30, 0.10);
        assert!(!c.passed);
    }

    #[test]
    fn success_all_pass_de_novo() {
        let goal = goal_with(vec![TargetSpec::exact("m", 10.0)], Difficulty::L1, TaskKind::DeNovo);
        let outcome = Outcome::new("reactor").with("m", 11.0);
        let d = Design::new("reactor", json!({"volume_L": 1.0}));
        assert!(success_predicate(&goal, &outcome, None, &d).unwrap());
    }

    #[test]
    fn optimization_requires_changed_design() {
        let goal =
            goal_with(vec![TargetSpec::exact("m", 10.0)], Difficulty::L1, TaskKind::Optimization);
        let outcome = Outcome::new("reactor").with("m", 10.0);
        let start = Design::new("reactor", json!({"volume_L": 1.0}));
        let same = start.clone();
        let changed = Design::new("reactor", json!({"volume_L": 2.0}));
        assert!(!success_predicate(&goal, &outcome, Some(&start), &same).unwrap());
        assert!(success_predicate(&goal, &outcome, Some(&start), &changed).unwrap());
    }

    #[test]
    fn one_missed_target_fails() {
        let goal = goal_with(
            vec![
                TargetSpec::exact("a", 10.0),
                TargetSpec::exact("b", 1.0),
                TargetSpec::exact("c", 2.0),
            ],
            Difficulty::L2,
            TaskKind::DeNovo,
        );
        let outcome =
            Outcome::new("reactor").with("a", 10.0).with("b", 1.0).with("c", 3.0);
        let d = Design::new("reactor", json!({}));
        assert!(!success_predicate(&goal, &outcome, None, &d).unwrap());
    }

    #[test]
    fn domain_mismatch_is_a_contract_violation() {
        let goal = goal_with(vec![TargetSpec::exact("m", 1.0)], Difficulty::L1, TaskKind::DeNovo);
        let outcome = Outcome::new("pkpd").with("m", 1.0);
        let d = Design::new("reactor", json!({}));
        assert!(matches!(
            success_predicate(&goal, &outcome, None, &d),
            Err(ModelError::DomainMismatch { .. })
        ));
    }

    #[test]
    fn base_reward_perfect_is_ten() {
        let goal = goal_with(vec![TargetSpec::exact("m", 4.0)], Difficulty::L1, TaskKind::DeNovo);
        let outcome = Outcome::new("reactor").with("m", 4.0);
        assert_eq!(base_reward(&goal, &outcome).unwrap(), 10.0);
    }

    #[test]
    fn base_reward_fully_missed_is_zero() {
        let goal = goal_with(vec![TargetSpec::exact("m", 1.0)], Difficulty::L1, TaskKind::DeNovo);
        let outcome = Outcome::new("reactor").with("m", 2.0); // rel err 1.0, capped
        assert_eq!(base_reward(&goal, &outcome).unwrap(), 0.0);
    }

    #[test]
    fn base_reward_two_targets_hand_check() {
        // rel errors {0.0, 0.5} -> 10 * (1 - 0.25) = 7.5
        let goal = goal_with(
            vec![TargetSpec::exact("a", 2.0), TargetSpec::exact("b", 2.0)],
            Difficulty::L1,
            TaskKind::DeNovo,
        );
        let outcome = Outcome::new("reactor").with("a", 2.0).with("b", 3.0);
        assert!((base_reward(&goal, &outcome).unwrap() - 7.5).abs() < 1e-12);
    }

    #[test]
    fn base_reward_empty_targets_is_error() {
        let goal = goal_with(vec![], Difficulty::L1, TaskKind::DeNovo);
        let outcome = Outcome::new("reactor");
        assert!(matches!(base_reward(&goal, &outcome), Err(ModelError::EmptyTargets)));
    }

    #[test]
    fn base_reward_permutation_invariant() {
        let mut goal = goal_with(
            vec![TargetSpec::exact("a", 2.0), TargetSpec::exact("b", 5.0)],
            Difficulty::L1,
            TaskKind::DeNovo,
        );
        let outcome = Outcome::new("reactor").with("a", 2.2).with("b", 4.0);
        let r1 = base_reward(&goal, &outcome).unwrap();
        goal.targets.reverse();
        let r2 = base_reward(&goal, &outcome).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn success_implies_reward_floor() {
        // Passing every target at tolerance t bounds every miss by
        // max(t, bound slack), so reward >= 10 * (1 - t) for t >= slack.
        let goal = goal_with(
            vec![TargetSpec::exact("a", 10.0), TargetSpec::min_bound("b", 2.0)],
            Difficulty::L3,
            TaskKind::DeNovo,
        );
        let outcome = Outcome::new("reactor").with("a", 11.9).with("b", 1.81);
        let d = Design::new("reactor", json!({}));
        if success_predicate(&goal, &outcome, None, &d).unwrap() {
            let floor = 10.0 * (1.0 - goal.difficulty.rel_tolerance());
            assert!(base_reward(&goal, &outcome).unwrap() >= floor - 1e-9);
        }
    }
}
