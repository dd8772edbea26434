//! Steady-state CSTR oracle with Arrhenius kinetics.
//!
//! Three reaction systems are supported, all first order in the reactant and
//! solved analytically at steady state for residence time `tau = V / F`:
//!
//! - single `A -> B`:           `cA = c0 / (1 + k1 tau)`
//! - series `A -> B -> C`:      `cB = c0 k1 tau / ((1 + k1 tau)(1 + k2 tau))`
//! - parallel `A -> B, A -> C`: `cA = c0 / (1 + (k1 + k2) tau)`, `cB = k1 tau cA`
//!
//! Rate constants follow `k_i = A_i exp(-E_i / (R T))`. The reactor runs
//! isothermally at the design temperature; the coolant temperature is a
//! feasibility parameter (it must sit below the operating temperature) and
//! does not enter the kinetics.

use super::{MetricPolicy, Oracle, OracleError, TaskContext, Violation};
use crate::model::{Constraint, Design, Outcome};
use crate::rng::DetRng;
use crate::vectorize::{DesignSpace, Dim, DimValue};
use serde::Deserialize;
use serde_json::json;

pub const GAS_CONSTANT: f64 = 8.314;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReactionMode {
    Single,
    Series,
    Parallel,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ReactionRate {
    pub k_ref_per_s: f64,
    #[serde(rename = "e_act_J_mol")]
    pub e_act_j_mol: f64,
}

impl ReactionRate {
    /// Arrhenius pre-exponential consistent with the reference point.
    pub fn pre_exponential(&self, t_ref: f64) -> f64 {
        self.k_ref_per_s * (self.e_act_j_mol / (GAS_CONSTANT * t_ref)).exp()
    }

    pub fn k_at(&self, t_ref: f64, t: f64) -> f64 {
        self.k_ref_per_s * (-self.e_act_j_mol / GAS_CONSTANT * (1.0 / t - 1.0 / t_ref)).exp()
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct KineticsSystem {
    pub name: String,
    pub mode: ReactionMode,
    #[serde(rename = "t_ref_K")]
    pub t_ref_k: f64,
    pub reactions: Vec<ReactionRate>,
}

/// Steady-state solution of the reaction system.
#[derive(Debug, Clone, Copy)]
pub struct CstrState {
    pub conversion: f64,
    pub selectivity: f64,
    pub yield_b: f64,
    /// mol/s of product B leaving the reactor.
    pub productivity: f64,
}

/// Analytic steady state for the given kinetics, residence time (s), feed
/// concentration (mol/L), flow (L/s), and temperature (K).
pub fn steady_state(sys: &KineticsSystem, tau: f64, c0: f64, flow: f64, temp: f64) -> CstrState {
    let k1 = sys.reactions[0].k_at(sys.t_ref_k, temp);
    let (ca, cb, cc) = match sys.mode {
        ReactionMode::Single => {
            let ca = c0 / (1.0 + k1 * tau);
            (ca, c0 - ca, 0.0)
        }
        ReactionMode::Series => {
            let k2 = sys.reactions[1].k_at(sys.t_ref_k, temp);
            let ca = c0 / (1.0 + k1 * tau);
            let cb = c0 * k1 * tau / ((1.0 + k1 * tau) * (1.0 + k2 * tau));
            (ca, cb, c0 - ca - cb)
        }
        ReactionMode::Parallel => {
            let k2 = sys.reactions[1].k_at(sys.t_ref_k, temp);
            let ca = c0 / (1.0 + (k1 + k2) * tau);
            let cb = k1 * tau * ca;
            let cc = k2 * tau * ca;
            (ca, cb, cc)
        }
    };
    let conversion = (1.0 - ca / c0).clamp(0.0, 1.0);
    let reacted = cb + cc;
    let selectivity = if reacted > 0.0 { cb / reacted } else { 0.0 };
    CstrState { conversion, selectivity, yield_b: cb / c0, productivity: flow * cb }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReactorDesign {
    #[serde(rename = "volume_L")]
    volume_l: f64,
    #[serde(rename = "flow_L_per_s")]
    flow_l_per_s: f64,
    #[serde(rename = "feed_conc_mol_L")]
    feed_conc_mol_l: f64,
    #[serde(rename = "temperature_K")]
    temperature_k: f64,
    #[serde(rename = "coolant_K")]
    coolant_k: f64,
}

pub struct ReactorOracle {
    catalog: std::collections::BTreeMap<String, Vec<KineticsSystem>>,
}

impl ReactorOracle {
    pub fn new() -> Self {
        let systems: serde_json::Value =
            serde_json::from_str(super::SYSTEMS_JSON).expect("systems data file");
        let catalog = serde_json::from_value(systems["reactor"].clone())
            .expect("reactor kinetics catalog");
        ReactorOracle { catalog }
    }

    pub fn system(&self, ctx: &TaskContext) -> &KineticsSystem {
        let entries = &self.catalog[&ctx.difficulty.to_string()];
        &entries[(crate::rng::derive_seed(ctx.seed, &[crate::rng::label("reactor-sys")])
            % entries.len() as u64) as usize]
    }

    fn parse(&self, design: &Design) -> Result<ReactorDesign, Vec<Violation>> {
        serde_json::from_value(serde_json::Value::Object(design.params.clone()))
            .map_err(|e| vec![Violation::new("params", e.to_string())])
    }
}

impl Default for ReactorOracle {
    fn default() -> Self {
        Self::new()
    }
}

impl Oracle for ReactorOracle {
    fn domain(&self) -> &'static str {
        "reactor"
    }

    fn blurb(&self) -> &'static str {
        "continuous stirred-tank reactor at steady state"
    }

    fn metric_names(&self, ctx: &TaskContext) -> Vec<String> {
        match self.system(ctx).mode {
            ReactionMode::Single => vec!["conversion".into(), "productivity".into()],
            _ => vec![
                "conversion".into(),
                "selectivity".into(),
                "yield".into(),
                "productivity".into(),
            ],
        }
    }

    fn constraints(&self, _ctx: &TaskContext) -> Vec<Constraint> {
        vec![
            Constraint::range("volume_L", 10.0, 5000.0),
            Constraint::range("flow_L_per_s", 0.1, 20.0),
            Constraint::range("feed_conc_mol_L", 0.1, 5.0),
            Constraint::range("temperature_K", 300.0, 550.0),
            Constraint::range("coolant_K", 280.0, 540.0),
        ]
    }

    fn schema(&self, _ctx: &TaskContext) -> serde_json::Value {
        json!({
            "volume_L": "number",
            "flow_L_per_s": "number",
            "feed_conc_mol_L": "number",
            "temperature_K": "number",
            "coolant_K": "number (must not exceed temperature_K)"
        })
    }

    fn system_summary(&self, ctx: &TaskContext) -> String {
        let sys = self.system(ctx);
        let mut s = match sys.mode {
            ReactionMode::Single => "Reaction system: A -> B (first order).".to_string(),
            ReactionMode::Series => {
                "Reaction system: A -> B -> C in series (first order each); B is the desired product.".to_string()
            }
            ReactionMode::Parallel => {
                "Reaction system: A -> B and A -> C in parallel (first order each); B is the desired product.".to_string()
            }
        };
        for (i, r) in sys.reactions.iter().enumerate() {
            s.push_str(&format!(
                "\nk{} = {:.4e} * exp(-{:.0} / (8.314 * T)) 1/s",
                i + 1,
                r.pre_exponential(sys.t_ref_k),
                r.e_act_j_mol
            ));
        }
        s.push_str("\nResidence time tau = volume_L / flow_L_per_s (seconds).");
        s
    }

    fn validate(&self, _ctx: &TaskContext, design: &Design) -> Vec<Violation> {
        let d = match self.parse(design) {
            Ok(d) => d,
            Err(v) => return v,
        };
        let mut out = Vec::new();
        for (name, v) in [
            ("volume_L", d.volume_l),
            ("flow_L_per_s", d.flow_l_per_s),
            ("feed_conc_mol_L", d.feed_conc_mol_l),
            ("temperature_K", d.temperature_k),
            ("coolant_K", d.coolant_k),
        ] {
            if !v.is_finite() || v <= 0.0 {
                out.push(Violation::new(name, "must be a positive finite number"));
            }
        }
        if d.coolant_k > d.temperature_k {
            out.push(Violation::new("coolant_K", "coolant must not exceed the operating temperature"));
        }
        out
    }

    fn simulate(&self, ctx: &TaskContext, design: &Design) -> Result<Outcome, OracleError> {
        let violations = self.validate(ctx, design);
        if !violations.is_empty() {
            return Err(OracleError::InvalidDesign(super::violations_text(&violations)));
        }
        let d = self.parse(design).expect("validated");
        let sys = self.system(ctx);
        let tau = d.volume_l / d.flow_l_per_s;
        let st = steady_state(sys, tau, d.feed_conc_mol_l, d.flow_l_per_s, d.temperature_k);
        let mut out = Outcome::new("reactor")
            .with("conversion", st.conversion)
            .with("productivity", st.productivity);
        if sys.mode != ReactionMode::Single {
            out = out.with("selectivity", st.selectivity).with("yield", st.yield_b);
        }
        Ok(out)
    }

    fn sample_design(&self, ctx: &TaskContext, rng: &mut DetRng) -> Design {
        let _ = ctx;
        let temperature = rng.uniform(300.0, 550.0);
        Design::new(
            "reactor",
            json!({
                "volume_L": rng.uniform(10.0, 5000.0),
                "flow_L_per_s": rng.uniform(0.1, 20.0),
                "feed_conc_mol_L": rng.uniform(0.1, 5.0),
                "temperature_K": temperature,
                "coolant_K": rng.uniform(280.0, temperature.min(540.0)),
            }),
        )
    }

    fn space(&self, _ctx: &TaskContext) -> Option<DesignSpace> {
        Some(DesignSpace::new(
            vec![
                Dim::real("volume_L", 10.0, 5000.0),
                Dim::real("flow_L_per_s", 0.1, 20.0),
                Dim::real("feed_conc_mol_L", 0.1, 5.0),
                Dim::real("temperature_K", 300.0, 550.0),
                Dim::real("coolant_K", 280.0, 540.0),
            ],
            |v| {
                let temp = v[3].as_real();
                Design::new(
                    "reactor",
                    json!({
                        "volume_L": v[0].as_real(),
                        "flow_L_per_s": v[1].as_real(),
                        "feed_conc_mol_L": v[2].as_real(),
                        "temperature_K": temp,
                        "coolant_K": v[4].as_real().min(temp),
                    }),
                )
            },
            |d| {
                Some(vec![
                    DimValue::Real(d.f64("volume_L")?),
                    DimValue::Real(d.f64("flow_L_per_s")?),
                    DimValue::Real(d.f64("feed_conc_mol_L")?),
                    DimValue::Real(d.f64("temperature_K")?),
                    DimValue::Real(d.f64("coolant_K")?),
                ])
            },
        ))
    }

    fn metric_policy(&self, metric: &str) -> MetricPolicy {
        match metric {
            "conversion" | "yield" | "selectivity" => MetricPolicy::max_bound_floor(1e-4, 0.05),
            "productivity" => MetricPolicy::max_bound_floor(1e-6, 0.01),
            _ => MetricPolicy::default(),
        }
    }

    fn taskworthy(&self, outcome: &Outcome) -> bool {
        let conv = outcome.get("conversion").unwrap_or(0.0);
        (0.001..=0.999).contains(&conv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Difficulty, TaskKind};

    fn ctx(level: Difficulty, seed: u64) -> TaskContext {
        TaskContext { difficulty: level, seed, kind: TaskKind::DeNovo }
    }

    fn single_system(k_ref: f64, e: f64, t_ref: f64) -> KineticsSystem {
        KineticsSystem {
            name: "test".into(),
            mode: ReactionMode::Single,
            t_ref_k: t_ref,
            reactions: vec![ReactionRate { k_ref_per_s: k_ref, e_act_j_mol: e }],
        }
    }

    #[test]
    fn first_order_conversion_half_at_unit_ktau() {
        // k*tau = 1 -> X = k*tau / (1 + k*tau) = 0.5, exactly.
        let sys = single_system(0.05, 60000.0, 400.0);
        let tau = 1.0 / 0.05; // k at t_ref equals k_ref
        let st = steady_state(&sys, tau, 1.0, 1.0, 400.0);
        assert!((st.conversion - 0.5).abs() < 1e-9, "X = {}", st.conversion);
    }

    #[test]
    fn cold_reactor_converts_nothing() {
        let sys = single_system(0.05, 60000.0, 400.0);
        let st = steady_state(&sys, 1.0, 1.0, 1.0, 250.0);
        assert!(st.conversion < 1e-3);
    }

    #[test]
    fn series_cascade_hand_algebra() {
        // k1 = k2, k1*tau = 1: cB/c0 = 1/((1+1)(1+1)) = 0.25,
        // conversion = 0.5, cC/c0 = 0.25, selectivity = 0.5.
        let sys = KineticsSystem {
            name: "t".into(),
            mode: ReactionMode::Series,
            t_ref_k: 400.0,
            reactions: vec![
                ReactionRate { k_ref_per_s: 0.1, e_act_j_mol: 60000.0 },
                ReactionRate { k_ref_per_s: 0.1, e_act_j_mol: 60000.0 },
            ],
        };
        let st = steady_state(&sys, 10.0, 2.0, 1.0, 400.0);
        assert!((st.yield_b - 0.25).abs() < 1e-12);
        assert!((st.conversion - 0.5).abs() < 1e-12);
        assert!((st.selectivity - 0.5).abs() < 1e-12);
        assert!((st.productivity - 0.5).abs() < 1e-12); // 1 L/s * 0.25 * 2 mol/L
    }

    #[test]
    fn parallel_selectivity_is_rate_ratio() {
        let sys = KineticsSystem {
            name: "t".into(),
            mode: ReactionMode::Parallel,
            t_ref_k: 400.0,
            reactions: vec![
                ReactionRate { k_ref_per_s: 0.3, e_act_j_mol: 60000.0 },
                ReactionRate { k_ref_per_s: 0.1, e_act_j_mol: 60000.0 },
            ],
        };
        let st = steady_state(&sys, 5.0, 1.0, 1.0, 400.0);
        assert!((st.selectivity - 0.75).abs() < 1e-12);
    }

    #[test]
    fn yield_never_exceeds_conversion() {
        let oracle = ReactorOracle::new();
        let mut rng = DetRng::new(9);
        for level in Difficulty::ALL {
            for seed in 0..20 {
                let ctx = ctx(level, seed);
                let d = oracle.sample_design(&ctx, &mut rng);
                let out = oracle.simulate(&ctx, &d).unwrap();
                if let Some(y) = out.get("yield") {
                    assert!(y <= out.get("conversion").unwrap() + 1e-9);
                }
            }
        }
    }

    #[test]
    fn conversion_monotone_in_residence_time() {
        let sys = single_system(0.05, 60000.0, 400.0);
        let mut last = 0.0;
        for i in 1..50 {
            let tau = i as f64 * 3.0;
            let st = steady_state(&sys, tau, 1.0, 1.0, 390.0);
            assert!(st.conversion >= last - 1e-12);
            last = st.conversion;
        }
    }

    #[test]
    fn rejects_nonpositive_and_unknown_fields() {
        let oracle = ReactorOracle::new();
        let ctx = ctx(Difficulty::L1, 0);
        let bad = Design::new("reactor", serde_json::json!({"volume_L": -5.0, "flow_L_per_s": 1.0, "feed_conc_mol_L": 1.0, "temperature_K": 400.0, "coolant_K": 350.0}));
        assert!(!oracle.validate(&ctx, &bad).is_empty());
        let extra = Design::new("reactor", serde_json::json!({"volume_L": 5.0, "flow_L_per_s": 1.0, "feed_conc_mol_L": 1.0, "temperature_K": 400.0, "coolant_K": 350.0, "stirrer_rpm": 100.0}));
        assert!(!oracle.validate(&ctx, &extra).is_empty());
        assert!(oracle.simulate(&ctx, &extra).is_err());
    }

    #[test]
    fn simulation_is_deterministic() {
        let oracle = ReactorOracle::new();
        let ctx = ctx(Difficulty::L2, 33);
        let mut rng = DetRng::new(1);
        let d = oracle.sample_design(&ctx, &mut rng);
        let a = oracle.simulate(&ctx, &d).unwrap();
        let b = oracle.simulate(&ctx, &d).unwrap();
        assert_eq!(a, b);
    }
}
