//! Stochastic mass-action network oracle (Gillespie direct method).
//!
//! A design declares species with initial counts and mass-action reactions
//! (reactant/product stoichiometry plus a rate constant). The oracle runs
//! `n_runs` exact simulations with a deterministic stream per
//! `(seed, run index)` pair and summarizes the end window (the second half
//! of the horizon) with time-weighted per-species means and variances plus
//! an oscillation score: the averaged per-run autocorrelation of the
//! reporter species (the alphabetically first one), scored at its first
//! positive-lag local maximum.
//!
//! Runs whose cumulative event count exceeds a fixed cap stop early (the
//! state freezes at that point); this bounds runtime for self-amplifying
//! networks while staying deterministic.

use super::{MetricPolicy, Oracle, OracleError, TaskContext, Violation};
use crate::model::{Constraint, Design, Difficulty, Outcome};
use crate::rng::{derive_seed, label, DetRng};
use serde::Deserialize;
use serde_json::json;
use std::collections::BTreeMap;

pub const MAX_SPECIES: usize = 8;
pub const MAX_REACTIONS: usize = 16;
const EVENT_CAP: usize = 200_000;
const ACF_GRID: usize = 64;

#[derive(Debug, Clone)]
pub struct Reaction {
    pub reactants: Vec<(usize, u32)>,
    pub products: Vec<(usize, u32)>,
    pub rate: f64,
}

#[derive(Debug, Clone)]
pub struct Network {
    pub species: Vec<String>,
    pub initial: Vec<i64>,
    pub reactions: Vec<Reaction>,
}

impl Network {
    fn propensity(&self, r: &Reaction, state: &[i64]) -> f64 {
        let mut a = r.rate;
        for &(s, n) in &r.reactants {
            let x = state[s];
            match n {
                1 => a *= x as f64,
                2 => a *= (x * (x - 1)) as f64 / 2.0,
                _ => a = 0.0,
            }
            if x < n as i64 {
                return 0.0;
            }
        }
        a.max(0.0)
    }
}

/// Summary statistics over the end window.
#[derive(Debug, Clone)]
pub struct SsaStats {
    /// Time-weighted mean per species.
    pub mean: Vec<f64>,
    /// Time-weighted population variance per species (across time and runs).
    pub variance: Vec<f64>,
    pub oscillation_score: f64,
}

/// Runs the direct-method simulation. `window_start` is the fraction of the
/// horizon after which statistics accumulate (0.5 = second half).
pub fn simulate_network(
    net: &Network,
    t_end: f64,
    n_runs: usize,
    seed: u64,
    window_start: f64,
    reporter: usize,
) -> SsaStats {
    assert!(n_runs >= 1 && t_end > 0.0);
    let n_species = net.species.len();
    let w0 = t_end * window_start;
    let mut sum = vec![0.0f64; n_species];
    let mut sum_sq = vec![0.0f64; n_species];
    let mut weight = 0.0f64;
    let mut acf_accum = vec![0.0f64; ACF_GRID / 2];
    let mut acf_runs = 0usize;

    for run in 0..n_runs {
        let mut rng = DetRng::new(derive_seed(seed, &[label("ssa-run"), run as u64]));
        let mut state = net.initial.clone();
        let mut t = 0.0f64;
        let mut events = 0usize;
        // Reporter samples on a uniform grid over the window.
        let mut grid = vec![0.0f64; ACF_GRID];
        let mut grid_filled = 0usize;
        let grid_dt = (t_end - w0) / ACF_GRID as f64;

        let mut record = |from: f64, to: f64, state: &[i64], grid: &mut [f64], filled: &mut usize| {
            let lo = from.max(w0);
            let hi = to.min(t_end);
            if hi > lo {
                let dt = hi - lo;
                for (i, &x) in state.iter().enumerate() {
                    sum[i] += x as f64 * dt;
                    sum_sq[i] += (x as f64) * (x as f64) * dt;
                }
                weight += dt;
            }
            // Grid samples: value at sample time g = w0 + (g + 0.5) * dt.
            while *filled < ACF_GRID {
                let ts = w0 + (*filled as f64 + 0.5) * grid_dt;
                if ts >= from && ts < to {
                    grid[*filled] = state[reporter] as f64;
                    *filled += 1;
                } else {
                    break;
                }
            }
        };

        loop {
            let props: Vec<f64> =
                net.reactions.iter().map(|r| net.propensity(r, &state)).collect();
            let a0: f64 = props.iter().sum();
            if a0 <= 0.0 || events >= EVENT_CAP {
                record(t, t_end, &state, &mut grid, &mut grid_filled);
                break;
            }
            let dt = rng.exponential(a0);
            let t_next = t + dt;
            if t_next >= t_end {
                record(t, t_end, &state, &mut grid, &mut grid_filled);
                break;
            }
            record(t, t_next, &state, &mut grid, &mut grid_filled);
            let mut pick = rng.f64() * a0;
            let mut chosen = net.reactions.len() - 1;
            for (i, p) in props.iter().enumerate() {
                if pick < *p {
                    chosen = i;
                    break;
                }
                pick -= p;
            }
            let r = &net.reactions[chosen];
            for &(s, n) in &r.reactants {
                state[s] -= n as i64;
                debug_assert!(state[s] >= 0, "negative count");
            }
            for &(s, n) in &r.products {
                state[s] += n as i64;
            }
            t = t_next;
            events += 1;
        }

        while grid_filled < ACF_GRID {
            grid[grid_filled] = *state.get(reporter).unwrap_or(&0) as f64;
            grid_filled += 1;
        }
        let g_mean = grid.iter().sum::<f64>() / ACF_GRID as f64;
        let g_var: f64 = grid.iter().map(|x| (x - g_mean).powi(2)).sum();
        if g_var > 1e-12 {
            for (l, slot) in acf_accum.iter_mut().enumerate() {
                let mut c = 0.0;
                for g in 0..(ACF_GRID - l) {
                    c += (grid[g] - g_mean) * (grid[g + l] - g_mean);
                }
                *slot += c / g_var;
            }
            acf_runs += 1;
        }
    }

    let mean: Vec<f64> = sum.iter().map(|s| s / weight).collect();
    let variance: Vec<f64> = sum_sq
        .iter()
        .zip(&mean)
        .map(|(sq, m)| (sq / weight - m * m).max(0.0))
        .collect();

    let mut oscillation_score = 0.0;
    if acf_runs > 0 {
        let acf: Vec<f64> = acf_accum.iter().map(|c| c / acf_runs as f64).collect();
        for l in 2..acf.len() - 1 {
            if acf[l] > acf[l - 1] && acf[l] >= acf[l + 1] {
                oscillation_score = acf[l].max(0.0);
                break;
            }
        }
    }
    SsaStats { mean, variance, oscillation_score }
}

/// Task-fixed simulation settings.
#[derive(Debug, Clone)]
pub struct SsaSystem {
    pub alphabet: Vec<String>,
    pub max_reactions: usize,
    pub t_end_s: f64,
    pub n_runs: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpeciesSpec {
    name: String,
    initial: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReactionSpec {
    reactants: BTreeMap<String, f64>,
    products: BTreeMap<String, f64>,
    rate_constant: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SsaDesign {
    species: Vec<SpeciesSpec>,
    reactions: Vec<ReactionSpec>,
}

pub struct SsaOracle;

impl SsaOracle {
    pub fn new() -> Self {
        SsaOracle
    }

    pub fn system(&self, ctx: &TaskContext) -> SsaSystem {
        let names = ["A", "B", "C", "D", "E"];
        let (n, max_reactions) = match ctx.difficulty {
            Difficulty::L1 => (2, 4),
            Difficulty::L2 => (3, 6),
            Difficulty::L3 => (4, 8),
            Difficulty::L4 => (5, 12),
        };
        SsaSystem {
            alphabet: names[..n].iter().map(|s| s.to_string()).collect(),
            max_reactions,
            t_end_s: 50.0,
            n_runs: 40,
        }
    }

    fn parse(&self, ctx: &TaskContext, design: &Design) -> Result<Network, Vec<Violation>> {
        let d: SsaDesign =
            serde_json::from_value(serde_json::Value::Object(design.params.clone()))
                .map_err(|e| vec![Violation::new("params", e.to_string())])?;
        let sys = self.system(ctx);
        let mut out = Vec::new();
        let mut names: Vec<String> = Vec::new();
        for (i, s) in d.species.iter().enumerate() {
            let path = format!("species[{i}]");
            if !sys.alphabet.contains(&s.name) {
                out.push(Violation::new(
                    &path,
                    format!("species must come from {:?}", sys.alphabet),
                ));
            }
            if names.contains(&s.name) {
                out.push(Violation::new(&path, format!("duplicate species `{}`", s.name)));
            }
            if s.initial.fract() != 0.0 || !(0.0..=50.0).contains(&s.initial) {
                out.push(Violation::new(&path, "initial count must be an integer in [0, 50]"));
            }
            names.push(s.name.clone());
        }
        for a in &sys.alphabet {
            if !names.contains(a) {
                out.push(Violation::new(
                    "species",
                    format!("species `{a}` must be declared (targets reference it)"),
                ));
            }
        }
        if d.species.len() > MAX_SPECIES {
            out.push(Violation::new("species", format!("at most {MAX_SPECIES} species")));
        }
        if d.reactions.len() > sys.max_reactions.min(MAX_REACTIONS) {
            out.push(Violation::new(
                "reactions",
                format!("at most {} reactions for this task", sys.max_reactions),
            ));
        }
        let index_of = |n: &str| names.iter().position(|x| x == n);
        let mut reactions = Vec::new();
        for (i, r) in d.reactions.iter().enumerate() {
            let path = format!("reactions[{i}]");
            if !r.rate_constant.is_finite() || !(0.001..=10.0).contains(&r.rate_constant) {
                out.push(Violation::new(&path, "rate_constant must lie in [0.001, 10]"));
            }
            let mut side = |map: &BTreeMap<String, f64>, what: &str| -> Vec<(usize, u32)> {
                let mut v = Vec::new();
                let mut total = 0u32;
                for (name, count) in map {
                    match index_of(name) {
                        Some(idx) if count.fract() == 0.0 && *count >= 1.0 => {
                            total += *count as u32;
                            v.push((idx, *count as u32));
                        }
                        Some(_) => out.push(Violation::new(
                            &path,
                            format!("{what} stoichiometry must be a positive integer"),
                        )),
                        None => out.push(Violation::new(
                            &path,
                            format!("unknown species `{name}` in {what}"),
                        )),
                    }
                }
                if total > 2 {
                    out.push(Violation::new(
                        &path,
                        format!("total {what} stoichiometry must be at most 2"),
                    ));
                }
                v
            };
            let reactants = side(&r.reactants, "reactant");
            let products = side(&r.products, "product");
            reactions.push(Reaction { reactants, products, rate: r.rate_constant });
        }
        if !out.is_empty() {
            return Err(out);
        }
        Ok(Network {
            species: names,
            initial: d.species.iter().map(|s| s.initial as i64).collect(),
            reactions,
        })
    }
}

impl Default for SsaOracle {
    fn default() -> Self {
        Self::new()
    }
}

impl Oracle for SsaOracle {
    fn domain(&self) -> &'static str {
        "ssa"
    }

    fn blurb(&self) -> &'static str {
        "stochastic mass-action network with Gillespie statistics"
    }

    fn metric_names(&self, ctx: &TaskContext) -> Vec<String> {
        let sys = self.system(ctx);
        let mut names = Vec::new();
        for s in &sys.alphabet {
            names.push(format!("mean_{s}"));
            names.push(format!("var_{s}"));
        }
        names.push("oscillation_score".into());
        names
    }

    fn constraints(&self, ctx: &TaskContext) -> Vec<Constraint> {
        let sys = self.system(ctx);
        let alphabet: Vec<&str> = sys.alphabet.iter().map(|s| s.as_str()).collect();
        vec![
            Constraint::enum_token("species[].name", &alphabet),
            Constraint::range("species[].initial", 0.0, 50.0),
            Constraint::max_count("reactions", sys.max_reactions),
            Constraint::range("reactions[].rate_constant", 0.001, 10.0),
        ]
    }

    fn schema(&self, ctx: &TaskContext) -> serde_json::Value {
        let sys = self.system(ctx);
        json!({
            "species": [{"name": format!("each of {:?} exactly once", sys.alphabet), "initial": "integer in [0, 50]"}],
            "reactions": [{
                "reactants": "map species -> stoichiometry (total order <= 2; empty map = zero-order source)",
                "products": "map species -> stoichiometry (total <= 2)",
                "rate_constant": "number in [0.001, 10]"
            }],
            "_note": format!("at most {} reactions; mass-action kinetics", sys.max_reactions),
        })
    }

    fn system_summary(&self, ctx: &TaskContext) -> String {
        let sys = self.system(ctx);
        format!(
            "Mass-action stochastic network over species {:?}. The oracle runs {} Gillespie \
             simulations to t = {} s and reports time-weighted means and variances over the \
             second half, plus an oscillation score from the autocorrelation of species {}.",
            sys.alphabet, sys.n_runs, sys.t_end_s, sys.alphabet[0]
        )
    }

    fn validate(&self, ctx: &TaskContext, design: &Design) -> Vec<Violation> {
        match self.parse(ctx, design) {
            Ok(_) => vec![],
            Err(v) => v,
        }
    }

    fn simulate(&self, ctx: &TaskContext, design: &Design) -> Result<Outcome, OracleError> {
        let net = self
            .parse(ctx, design)
            .map_err(|v| OracleError::InvalidDesign(super::violations_text(&v)))?;
        let sys = self.system(ctx);
        let reporter = net
            .species
            .iter()
            .position(|s| *s == sys.alphabet[0])
            .unwrap_or(0);
        let stats = simulate_network(&net, sys.t_end_s, sys.n_runs, ctx.seed, 0.5, reporter);
        let mut out = Outcome::new("ssa");
        for a in &sys.alphabet {
            let idx = net.species.iter().position(|s| s == a).expect("validated");
            out = out
                .with(&format!("mean_{a}"), stats.mean[idx])
                .with(&format!("var_{a}"), stats.variance[idx]);
        }
        out = out.with("oscillation_score", stats.oscillation_score);
        Ok(out)
    }

    fn sample_design(&self, ctx: &TaskContext, rng: &mut DetRng) -> Design {
        let sys = self.system(ctx);
        let n = sys.alphabet.len();
        let species: Vec<serde_json::Value> = sys
            .alphabet
            .iter()
            .map(|s| json!({"name": s, "initial": rng.int_range(0, 50)}))
            .collect();
        let n_reactions = rng.int_range(1, sys.max_reactions as i64) as usize;
        let mut reactions = Vec::with_capacity(n_reactions);
        for _ in 0..n_reactions {
            let kind = rng.below(6);
            let (reactants, products, rate) = match kind {
                // birth: 0 -> S
                0 => {
                    let s = rng.below(n);
                    (json!({}), json!({ &sys.alphabet[s]: 1 }), rng.uniform(0.5, 10.0))
                }
                // death: S -> 0
                1 => {
                    let s = rng.below(n);
                    (json!({ &sys.alphabet[s]: 1 }), json!({}), rng.uniform(0.02, 0.5))
                }
                // conversion: S -> T
                2 => {
                    let pair = rng.distinct(n, 2.min(n));
                    let (s, t) = (pair[0], pair[pair.len() - 1]);
                    (
                        json!({ &sys.alphabet[s]: 1 }),
                        json!({ &sys.alphabet[t]: 1 }),
                        rng.uniform(0.02, 0.5),
                    )
                }
                // catalysis: S -> S + T
                3 if n >= 2 => {
                    let pair = rng.distinct(n, 2);
                    let (s, t) = (pair[0], pair[1]);
                    (
                        json!({ &sys.alphabet[s]: 1 }),
                        json!({ &sys.alphabet[s]: 1, &sys.alphabet[t]: 1 }),
                        rng.uniform(0.02, 0.3),
                    )
                }
                // binding: S + T -> U
                4 if n >= 2 => {
                    let pair = rng.distinct(n, 2);
                    let u = rng.below(n);
                    (
                        json!({ &sys.alphabet[pair[0]]: 1, &sys.alphabet[pair[1]]: 1 }),
                        json!({ &sys.alphabet[u]: 1 }),
                        rng.uniform(0.001, 0.02),
                    )
                }
                // unbinding: U -> S + T
                5 if n >= 2 => {
                    let pair = rng.distinct(n, 2);
                    let u = rng.below(n);
                    (
                        json!({ &sys.alphabet[u]: 1 }),
                        json!({ &sys.alphabet[pair[0]]: 1, &sys.alphabet[pair[1]]: 1 }),
                        rng.uniform(0.02, 0.5),
                    )
                }
                _ => {
                    let s = rng.below(n);
                    (json!({ &sys.alphabet[s]: 1 }), json!({}), rng.uniform(0.02, 0.5))
                }
            };
            reactions.push(json!({
                "reactants": reactants,
                "products": products,
                "rate_constant": rate,
            }));
        }
        Design::new("ssa", json!({ "species": species, "reactions": reactions }))
    }

    fn metric_policy(&self, metric: &str) -> MetricPolicy {
        if metric == "oscillation_score" {
            MetricPolicy::max_bound_floor(0.02, 0.1)
        } else {
            // Count statistics of extinct species sit at zero.
            MetricPolicy::max_bound_floor(0.05, 1.0)
        }
    }
}
