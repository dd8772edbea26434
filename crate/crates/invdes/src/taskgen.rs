//! Programmatic task generation and manifest freezing.
//!
//! A task is generated by sampling a valid design (or taking the domain's
//! hidden reference design), running the oracle, and turning the achieved
//! metrics into targets jittered by at most half the level tolerance, so the
//! generating design satisfies the goal by construction. Optimization tasks
//! additionally sample a distinct starting design whose outcome misses at
//! least one target. Everything is deterministic in
//! `(domain, level, kind, seed)`; re-freezing a manifest with identical
//! inputs is byte-identical.
//!
//! Benchmark seeds live in `[0, 100_000)`, holdout seeds in
//! `[100_000, 200_000)`, and training seeds in `[200_000, 10_000_000)` so
//! evaluation and training data can never collide.

use crate::model::{
    canonical_json_pretty, designs_equal, success_predicate, Design, Difficulty, Goal, Outcome,
    TargetKind, TargetSpec, TaskKind, TaskRecord,
};
use crate::oracles::{Oracle, Registry, TaskContext};
use crate::rng::DetRng;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const BENCHMARK_SEEDS: std::ops::Range<u64> = 0..100_000;
pub const HOLDOUT_SEEDS: std::ops::Range<u64> = 100_000..200_000;
pub const TRAINING_SEEDS: std::ops::Range<u64> = 200_000..10_000_000;

/// Tasks per (domain, kind): five per difficulty level.
pub const TASKS_PER_LEVEL: usize = 5;

#[derive(Debug, thiserror::Error)]
pub enum TaskGenError {
    #[error("unknown domain `{0}`")]
    UnknownDomain(String),
    #[error("manifest version `{0}` already frozen (manifests are immutable)")]
    VersionExists(String),
    #[error("failed to generate a task for {domain} {kind} {level} seed {seed}: {reason}")]
    GenerationFailed { domain: String, level: Difficulty, kind: TaskKind, seed: u64, reason: String },
    #[error("jitter fraction {0} outside [0, 0.25]")]
    BadJitterFraction(f64),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse: {0}")]
    Parse(#[from] serde_json::Error),
}

/// A generated task plus the hidden design that proves it achievable.
#[derive(Debug, Clone)]
pub struct GeneratedTask {
    pub record: TaskRecord,
    pub generating_design: Design,
}

pub fn task_id_for(domain: &str, kind: TaskKind, level: Difficulty, seed: u64) -> String {
    format!("{domain}-{}-{level}-s{seed:06}", kind.short())
}

/// Whether a goal's target count is consistent with its difficulty.
pub fn target_count_ok(level: Difficulty, n_targets: usize, n_targetable: usize) -> bool {
    match level {
        Difficulty::L1 => n_targets == 1,
        Difficulty::L2 => n_targets == 2.min(n_targetable),
        Difficulty::L3 => {
            let hi = 4.min(n_targetable);
            let lo = 3.min(n_targetable);
            (lo..=hi).contains(&n_targets)
        }
        Difficulty::L4 => n_targets == n_targetable,
    }
}

fn build_targets(
    oracle: &dyn Oracle,
    ctx: &TaskContext,
    outcome: &Outcome,
    rng: &mut DetRng,
) -> Vec<TargetSpec> {
    let targetable = oracle.targetable_metrics(ctx);
    let count = match ctx.difficulty {
        Difficulty::L1 => 1,
        Difficulty::L2 => 2.min(targetable.len()),
        Difficulty::L3 => (3 + rng.below(2)).min(targetable.len()).max(1),
        Difficulty::L4 => targetable.len(),
    };
    let mut picks = rng.distinct(targetable.len(), count);
    picks.sort_unstable();
    let tol = ctx.difficulty.rel_tolerance();
    picks
        .into_iter()
        .map(|i| {
            let metric = &targetable[i];
            let achieved = outcome.get(metric).expect("declared metric");
            let policy = oracle.metric_policy(metric);
            if achieved.abs() <= policy.near_zero {
                return TargetSpec {
                    metric: metric.clone(),
                    kind: policy.fallback_kind,
                    value: policy.fallback_value,
                };
            }
            // Mostly exact targets; occasionally a one-sided bound (positive
            // metrics only, where bound semantics are unambiguous).
            let u = rng.uniform(0.0, tol / 2.0);
            if achieved > policy.near_zero && rng.f64() < 0.25 {
                if rng.f64() < 0.5 {
                    TargetSpec::min_bound(metric, achieved * (1.0 - u))
                } else {
                    TargetSpec::max_bound(metric, achieved * (1.0 + u))
                }
            } else {
                let signed = if rng.f64() < 0.5 { u } else { -u };
                TargetSpec::exact(metric, achieved * (1.0 + signed))
            }
        })
        .collect()
}

/// Generates one achievable task. Deterministic in all four arguments.
pub fn forward_generate(
    registry: &Registry,
    domain: &str,
    level: Difficulty,
    kind: TaskKind,
    seed: u64,
) -> Result<GeneratedTask, TaskGenError> {
    let oracle = registry
        .get(domain)
        .map_err(|_| TaskGenError::UnknownDomain(domain.to_string()))?;
    let ctx = TaskContext { difficulty: level, seed, kind };
    let constraints = oracle.constraints(&ctx);
    let mut rng = DetRng::keyed(seed, &["taskgen", domain, &level.to_string(), kind.short()]);

    let fail = |reason: &str| TaskGenError::GenerationFailed {
        domain: domain.to_string(),
        level,
        kind,
        seed,
        reason: reason.to_string(),
    };

    for attempt in 0..256 {
        let design = if attempt == 0 {
            oracle
                .generating_design_hint(&ctx)
                .unwrap_or_else(|| oracle.sample_design(&ctx, &mut rng))
        } else {
            oracle.sample_design(&ctx, &mut rng)
        };
        let Ok(outcome) = oracle.simulate(&ctx, &design) else { continue };
        if !oracle.taskworthy(&outcome) {
            continue;
        }
        let targets = build_targets(oracle.as_ref(), &ctx, &outcome, &mut rng);
        let goal = Goal {
            domain: domain.to_string(),
            targets,
            constraints: constraints.clone(),
            difficulty: level,
            seed,
            task_kind: kind,
        };
        // Achievability by construction; verify anyway.
        if !success_predicate(&goal, &outcome, None, &design).unwrap_or(false) {
            continue;
        }

        let (starting_design, starting_outcome) = match kind {
            TaskKind::DeNovo => (None, None),
            TaskKind::Optimization => {
                let mut found = None;
                for _ in 0..256 {
                    let start = oracle.sample_design(&ctx, &mut rng);
                    if designs_equal(&start, &design) {
                        continue;
                    }
                    let Ok(start_outcome) = oracle.simulate(&ctx, &start) else { continue };
                    let misses = goal.targets.iter().any(|t| {
                        start_outcome
                            .get(&t.metric)
                            .map(|v| {
                                !crate::model::check_target(
                                    t,
                                    v,
                                    level.rel_tolerance(),
                                    crate::model::DEFAULT_BOUND_SLACK,
                                )
                                .passed
                            })
                            .unwrap_or(true)
                    });
                    if misses {
                        found = Some((start, start_outcome));
                        break;
                    }
                }
                match found {
                    Some((s, o)) => (Some(s), Some(o)),
                    None => continue,
                }
            }
        };

        let record = TaskRecord {
            task_id: task_id_for(domain, kind, level, seed),
            goal,
            starting_design,
            starting_outcome,
        };
        record.check_shape().map_err(|e| fail(&e))?;
        return Ok(GeneratedTask { record, generating_design: design });
    }
    Err(fail("no taskworthy generating design found within the retry budget"))
}

/// Multiplies every exact target by `(1 + u)`, `u` uniform in
/// `[-fraction, fraction]`, deterministically in `seed`. Bound targets and
/// constraints are unchanged.
pub fn jitter_goal(goal: &Goal, fraction: f64, seed: u64) -> Result<Goal, TaskGenError> {
    if !(0.0..=0.25).contains(&fraction) {
        return Err(TaskGenError::BadJitterFraction(fraction));
    }
    let mut rng = DetRng::keyed(seed, &["goal-jitter"]);
    let mut out = goal.clone();
    for t in out.targets.iter_mut() {
        if t.kind == TargetKind::Exact {
            t.value *= 1.0 + rng.uniform(-fraction, fraction);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SeedRanges {
    pub benchmark: [u64; 2],
    pub holdout: [u64; 2],
    pub training: [u64; 2],
}

impl Default for SeedRanges {
    fn default() -> Self {
        SeedRanges {
            benchmark: [BENCHMARK_SEEDS.start, BENCHMARK_SEEDS.end],
            holdout: [HOLDOUT_SEEDS.start, HOLDOUT_SEEDS.end],
            training: [TRAINING_SEEDS.start, TRAINING_SEEDS.end],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ManifestEntry {
    pub task_id: String,
    pub domain: String,
    pub kind: TaskKind,
    pub level: Difficulty,
    pub seed: u64,
    pub task_path: String,
    pub calibration_path: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Manifest {
    pub schema_version: u32,
    pub version: String,
    pub domains: Vec<String>,
    pub seed_ranges: SeedRanges,
    pub tasks: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Manifest, TaskGenError> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Directory the manifest's relative paths are resolved against.
    pub fn root_of(manifest_path: &Path) -> PathBuf {
        manifest_path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."))
    }
}

/// Deterministic benchmark seed for one task slot.
pub fn benchmark_seed(domain_idx: usize, kind: TaskKind, level: Difficulty, slot: usize) -> u64 {
    let kind_idx = match kind {
        TaskKind::DeNovo => 0,
        TaskKind::Optimization => 1,
    };
    let level_idx = Difficulty::ALL.iter().position(|l| *l == level).unwrap() as u64;
    let counter =
        ((domain_idx as u64 * 2 + kind_idx) * 4 + level_idx) * TASKS_PER_LEVEL as u64 + slot as u64;
    let seed = counter * 211 + 17;
    debug_assert!(BENCHMARK_SEEDS.contains(&seed));
    seed
}

/// Freezes a manifest: 20 de novo plus 20 optimization tasks per domain
/// (5 per level each), written under `out_dir/<version>/`. Refuses to
/// overwrite an existing version. Returns the manifest and the path of its
/// `manifest.json`.
pub fn freeze_manifest(
    registry: &Registry,
    domains: &[String],
    version: &str,
    out_dir: &Path,
) -> Result<(Manifest, PathBuf), TaskGenError> {
    for d in domains {
        if !registry.contains(d) {
            return Err(TaskGenError::UnknownDomain(d.clone()));
        }
    }
    let root = out_dir.join(version);
    let manifest_path = root.join("manifest.json");
    if manifest_path.exists() {
        return Err(TaskGenError::VersionExists(version.to_string()));
    }
    std::fs::create_dir_all(root.join("tasks"))?;
    std::fs::create_dir_all(root.join("hidden"))?;
    std::fs::create_dir_all(root.join("calibration"))?;

    let mut entries = Vec::new();
    for (d_idx, domain) in domains.iter().enumerate() {
        for kind in TaskKind::ALL {
            for level in Difficulty::ALL {
                for slot in 0..TASKS_PER_LEVEL {
                    let seed = benchmark_seed(d_idx, kind, level, slot);
                    let generated = forward_generate(registry, domain, level, kind, seed)?;
                    let task_id = generated.record.task_id.clone();
                    let task_path = format!("tasks/{task_id}.json");
                    let calibration_path = format!("calibration/{task_id}.json");
                    std::fs::write(
                        root.join(&task_path),
                        canonical_json_pretty(&generated.record),
                    )?;
                    let hidden = HiddenSidecar {
                        schema_version: 1,
                        task_id: task_id.clone(),
                        generating_design: generated.generating_design,
                    };
                    std::fs::write(
                        root.join(format!("hidden/{task_id}.json")),
                        canonical_json_pretty(&hidden),
                    )?;
                    entries.push(ManifestEntry {
                        task_id,
                        domain: domain.clone(),
                        kind,
                        level,
                        seed,
                        task_path,
                        calibration_path,
                    });
                }
            }
        }
    }
    let manifest = Manifest {
        schema_version: 1,
        version: version.to_string(),
        domains: domains.to_vec(),
        seed_ranges: SeedRanges::default(),
        tasks: entries,
    };
    std::fs::write(&manifest_path, canonical_json_pretty(&manifest))?;
    Ok((manifest, manifest_path))
}

/// Hidden generating design, stored beside (never inside) the public
/// manifest so replay tests can prove solvability.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HiddenSidecar {
    pub schema_version: u32,
    pub task_id: String,
    pub generating_design: Design,
}

pub fn load_task(manifest_root: &Path, entry: &ManifestEntry) -> Result<TaskRecord, TaskGenError> {
    let text = std::fs::read_to_string(manifest_root.join(&entry.task_path))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn load_hidden(manifest_root: &Path, task_id: &str) -> Option<Design> {
    let text =
        std::fs::read_to_string(manifest_root.join(format!("hidden/{task_id}.json"))).ok()?;
    let sidecar: HiddenSidecar = serde_json::from_str(&text).ok()?;
    Some(sidecar.generating_design)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::base_reward;

    fn registry() -> Registry {
        Registry::builtin()
    }

    #[test]
    fn generated_task_replays_successfully() {
        let reg = registry();
        for domain in ["reactor", "pkpd", "quantum", "alloy"] {
            let g = forward_generate(&reg, domain, Difficulty::L1, TaskKind::DeNovo, 7).unwrap();
            let oracle = reg.get(domain).unwrap();
            let ctx = TaskContext::of_goal(&g.record.goal);
            let outcome = oracle.simulate(&ctx, &g.generating_design).unwrap();
            assert!(success_predicate(&g.record.goal, &outcome, None, &g.generating_design)
                .unwrap());
            assert!(base_reward(&g.record.goal, &outcome).unwrap() > 5.0);
        }
    }

    #[test]
    fn level_counts_follow_schedule() {
        let reg = registry();
        let g1 = forward_generate(&reg, "reactor", Difficulty::L1, TaskKind::DeNovo, 7).unwrap();
        assert_eq!(g1.record.goal.targets.len(), 1);
        let g4 = forward_generate(&reg, "heatx", Difficulty::L4, TaskKind::DeNovo, 8).unwrap();
        assert_eq!(g4.record.goal.targets.len(), 5); // all declared metrics
        let g3 = forward_generate(&reg, "sigproc", Difficulty::L3, TaskKind::DeNovo, 9).unwrap();
        assert!((3..=4).contains(&g3.record.goal.targets.len()));
        assert!(target_count_ok(Difficulty::L3, g3.record.goal.targets.len(), 5));
    }

    #[test]
    fn generation_is_deterministic() {
        let reg = registry();
        let a = forward_generate(&reg, "ssa", Difficulty::L2, TaskKind::DeNovo, 123).unwrap();
        let b = forward_generate(&reg, "ssa", Difficulty::L2, TaskKind::DeNovo, 123).unwrap();
        assert_eq!(a.record, b.record);
        assert_eq!(a.generating_design, b.generating_design);
        let c = forward_generate(&reg, "ssa", Difficulty::L2, TaskKind::DeNovo, 124).unwrap();
        assert_ne!(a.record.goal.targets, c.record.goal.targets);
    }

    #[test]
    fn optimization_tasks_carry_a_missing_start() {
        let reg = registry();
        for domain in ["reactor", "thinfilm", "perturbation"] {
            let g =
                forward_generate(&reg, domain, Difficulty::L2, TaskKind::Optimization, 31).unwrap();
            let start = g.record.starting_design.as_ref().unwrap();
            let start_outcome = g.record.starting_outcome.as_ref().unwrap();
            assert!(!designs_equal(start, &g.generating_design));
            // The starting design misses at least one target.
            assert!(
                !success_predicate(&g.record.goal, start_outcome, None, start).unwrap(),
                "{domain}: starting design should not already satisfy the goal"
            );
            // The generating design differs from the start, so the full
            // optimization success check passes on replay.
            let oracle = reg.get(domain).unwrap();
            let ctx = TaskContext::of_goal(&g.record.goal);
            let outcome = oracle.simulate(&ctx, &g.generating_design).unwrap();
            assert!(success_predicate(
                &g.record.goal,
                &outcome,
                Some(start),
                &g.generating_design
            )
            .unwrap());
        }
    }

    #[test]
    fn jitter_respects_fraction_and_determinism() {
        let reg = registry();
        let g = forward_generate(&reg, "reactor", Difficulty::L2, TaskKind::DeNovo, 55).unwrap();
        let j0 = jitter_goal(&g.record.goal, 0.0, 9).unwrap();
        assert_eq!(j0, g.record.goal);
        let j = jitter_goal(&g.record.goal, 0.05, 9).unwrap();
        let j2 = jitter_goal(&g.record.goal, 0.05, 9).unwrap();
        assert_eq!(j, j2);
        for (a, b) in g.record.goal.targets.iter().zip(&j.targets) {
            if a.kind == TargetKind::Exact {
                assert!((b.value - a.value).abs() <= 0.05 * a.value.abs() + 1e-12);
            } else {
                assert_eq!(a, b);
            }
        }
        assert!(jitter_goal(&g.record.goal, 0.3, 9).is_err());
    }

    #[test]
    fn benchmark_seeds_stay_in_range_and_are_unique() {
        let mut seen = std::collections::BTreeSet::new();
        for d in 0..10 {
            for kind in TaskKind::ALL {
                for level in Difficulty::ALL {
                    for slot in 0..TASKS_PER_LEVEL {
                        let s = benchmark_seed(d, kind, level, slot);
                        assert!(BENCHMARK_SEEDS.contains(&s));
                        assert!(seen.insert(s), "duplicate seed {s}");
                    }
                }
            }
        }
        assert_eq!(seen.len(), 400);
    }

    #[test]
    fn freeze_writes_tasks_and_refuses_overwrite() {
        let reg = registry();
        let dir = tempfile::tempdir().unwrap();
        let domains = vec!["reactor".to_string(), "alloy".to_string()];
        let (manifest, path) = freeze_manifest(&reg, &domains, "vtest", dir.path()).unwrap();
        assert_eq!(manifest.tasks.len(), 2 * 2 * 4 * TASKS_PER_LEVEL);
        let root = Manifest::root_of(&path);
        // Public record loads; the hidden design stays out of it.
        let entry = manifest
            .tasks
            .iter()
            .find(|e| e.kind == TaskKind::Optimization)
            .unwrap();
        let record = load_task(&root, entry).unwrap();
        record.check_shape().unwrap();
        let hidden = load_hidden(&root, &entry.task_id).unwrap();
        let public_text = std::fs::read_to_string(root.join(&entry.task_path)).unwrap();
        let hidden_json = crate::model::canonical_json(&hidden.params);
        assert!(!public_text.contains(&hidden_json), "hidden design leaked");
        // Immutable.
        match freeze_manifest(&reg, &domains, "vtest", dir.path()) {
            Err(TaskGenError::VersionExists(_)) => {}
            other => panic!("expected version collision, got {other:?}"),
        }
        // Unknown domain.
        match freeze_manifest(&reg, &["nope".to_string()], "v2", dir.path()) {
            Err(TaskGenError::UnknownDomain(_)) => {}
            other => panic!("expected unknown domain, got {other:?}"),
        }
    }

    #[test]
    fn refreeze_is_byte_identical() {
        let reg = registry();
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let domains = vec!["pkpd".to_string()];
        let (ma, pa) = freeze_manifest(&reg, &domains, "v1", dir_a.path()).unwrap();
        let (_mb, pb) = freeze_manifest(&reg, &domains, "v1", dir_b.path()).unwrap();
        assert_eq!(std::fs::read(&pa).unwrap(), std::fs::read(&pb).unwrap());
        for entry in &ma.tasks {
            let a = std::fs::read(Manifest::root_of(&pa).join(&entry.task_path)).unwrap();
            let b = std::fs::read(Manifest::root_of(&pb).join(&entry.task_path)).unwrap();
            assert_eq!(a, b, "task file differs: {}", entry.task_id);
        }
    }
}
