//! Alloy property oracle built on mixing rules over a bundled ten-element
//! property table.
//!
//! - density and cost: rule of mixtures `sum_i x_i p_i`
//! - melting point: rule of mixtures minus a pairwise depression term
//!   `D * sum_{i<j} x_i x_j` with the bundled depression constant
//! - yield strength: rule-of-mixtures base strength plus a solid-solution
//!   term `g(T) * sum_{i != base} k_i sqrt(x_i)` where `base` is the
//!   majority element and `g` is a linear annealing factor in the
//!   processing temperature (1.15 at 500 K down to 0.85 at 1500 K)
//!
//! Pure compositions therefore reproduce the elemental table values exactly.

use super::{MetricPolicy, Oracle, OracleError, TaskContext, Violation};
use crate::model::{Constraint, Design, Difficulty, Outcome};
use crate::rng::DetRng;
use crate::vectorize::{DesignSpace, Dim, DimValue};
use serde::Deserialize;
use serde_json::json;
use std::collections::BTreeMap;
use std::sync::OnceLock;

#[derive(Debug, Clone, Deserialize)]
pub struct ElementProps {
    pub density_g_cc: f64,
    #[serde(rename = "melting_K")]
    pub melting_k: f64,
    #[serde(rename = "base_strength_MPa")]
    pub base_strength_mpa: f64,
    #[serde(rename = "strengthening_MPa")]
    pub strengthening_mpa: f64,
    pub cost_per_kg: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct AlloyTable {
    pub schema_version: u32,
    #[serde(rename = "melting_depression_K")]
    pub melting_depression_k: f64,
    pub elements: BTreeMap<String, ElementProps>,
}

pub fn alloy_table() -> &'static AlloyTable {
    static TABLE: OnceLock<AlloyTable> = OnceLock::new();
    TABLE.get_or_init(|| serde_json::from_str(super::ALLOY_JSON).expect("alloy table"))
}

const TEMP_LO: f64 = 500.0;
const TEMP_HI: f64 = 1500.0;

/// Annealing factor applied to the solid-solution strengthening term.
pub fn anneal_factor(temp_k: f64) -> f64 {
    let t = ((temp_k - TEMP_LO) / (TEMP_HI - TEMP_LO)).clamp(0.0, 1.0);
    1.15 - 0.3 * t
}

/// Mixing-rule property evaluation for a composition that already sums to 1.
pub fn evaluate_composition(
    composition: &BTreeMap<String, f64>,
    temp_k: f64,
) -> Option<(f64, f64, f64, f64)> {
    let table = alloy_table();
    let mut density = 0.0;
    let mut cost = 0.0;
    let mut melting = 0.0;
    let mut base_strength = 0.0;
    for (el, &x) in composition {
        let p = table.elements.get(el)?;
        density += x * p.density_g_cc;
        cost += x * p.cost_per_kg;
        melting += x * p.melting_k;
        base_strength += x * p.base_strength_mpa;
    }
    // Pairwise depression vanishes for pure compositions.
    let fractions: Vec<f64> = composition.values().copied().collect();
    let mut pair_sum = 0.0;
    for i in 0..fractions.len() {
        for j in (i + 1)..fractions.len() {
            pair_sum += fractions[i] * fractions[j];
        }
    }
    melting -= table.melting_depression_k * pair_sum;

    let base_el = composition
        .iter()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(b.0.cmp(a.0)))
        .map(|(el, _)| el.clone())?;
    let mut solid_solution = 0.0;
    for (el, &x) in composition {
        if *el != base_el && x > 0.0 {
            solid_solution += table.elements[el].strengthening_mpa * x.sqrt();
        }
    }
    let strength = base_strength + anneal_factor(temp_k) * solid_solution;
    Some((strength, density, melting, cost))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AlloyDesign {
    composition: BTreeMap<String, f64>,
    #[serde(rename = "processing_temp_K")]
    processing_temp_k: f64,
}

pub struct AlloyOracle;

impl AlloyOracle {
    pub fn new() -> Self {
        AlloyOracle
    }

    fn parse(&self, design: &Design) -> Result<AlloyDesign, Vec<Violation>> {
        serde_json::from_value(serde_json::Value::Object(design.params.clone()))
            .map_err(|e| vec![Violation::new("params", e.to_string())])
    }

    fn max_elements(level: Difficulty) -> usize {
        match level {
            Difficulty::L1 => 2,
            Difficulty::L2 => 3,
            Difficulty::L3 => 4,
            Difficulty::L4 => 6,
        }
    }
}

impl Default for AlloyOracle {
    fn default() -> Self {
        Self::new()
    }
}

impl Oracle for AlloyOracle {
    fn domain(&self) -> &'static str {
        "alloy"
    }

    fn blurb(&self) -> &'static str {
        "alloy property prediction from composition mixing rules"
    }

    fn metric_names(&self, _ctx: &TaskContext) -> Vec<String> {
        vec![
            "yield_strength_MPa".into(),
            "density_g_cc".into(),
            "melting_point_K".into(),
            "cost_per_kg".into(),
        ]
    }

    fn constraints(&self, ctx: &TaskContext) -> Vec<Constraint> {
        vec![
            Constraint::sum_to_one("composition", 1e-6),
            Constraint::max_count("composition", Self::max_elements(ctx.difficulty)),
            Constraint::range("processing_temp_K", TEMP_LO, TEMP_HI),
        ]
    }

    fn schema(&self, ctx: &TaskContext) -> serde_json::Value {
        let elements: Vec<&str> = alloy_table().elements.keys().map(|s| s.as_str()).collect();
        json!({
            "composition": format!(
                "map from element symbol to fraction; fractions must sum to 1.0; at most {} elements; available: {}",
                Self::max_elements(ctx.difficulty),
                elements.join(", ")
            ),
            "processing_temp_K": "number",
        })
    }

    fn system_summary(&self, _ctx: &TaskContext) -> String {
        let table = alloy_table();
        let mut s = String::from(
            "Elemental property table (density g/cc, melting K, base strength MPa, strengthening MPa, cost $/kg):",
        );
        for (el, p) in &table.elements {
            s.push_str(&format!(
                "\n{el}: {:.2}, {:.0}, {:.0}, {:.0}, {:.2}",
                p.density_g_cc, p.melting_k, p.base_strength_mpa, p.strengthening_mpa, p.cost_per_kg
            ));
        }
        s
    }

    fn validate(&self, _ctx: &TaskContext, design: &Design) -> Vec<Violation> {
        let d = match self.parse(design) {
            Ok(d) => d,
            Err(v) => return v,
        };
        let mut out = Vec::new();
        if d.composition.is_empty() {
            out.push(Violation::new("composition", "at least one element required"));
        }
        let table = alloy_table();
        let mut sum = 0.0;
        for (el, &x) in &d.composition {
            if !table.elements.contains_key(el) {
                out.push(Violation::new("composition", format!("unknown element `{el}`")));
            }
            if !x.is_finite() || x < 0.0 {
                out.push(Violation::new("composition", format!("fraction of `{el}` must be non-negative")));
            }
            sum += x;
        }
        if (sum - 1.0).abs() > 1e-6 {
            out.push(Violation::new("composition", format!("fractions sum to {sum:.6}, expected 1.0")));
        }
        if !d.processing_temp_k.is_finite() || d.processing_temp_k <= 0.0 {
            out.push(Violation::new("processing_temp_K", "must be a positive finite number"));
        }
        out
    }

    fn simulate(&self, ctx: &TaskContext, design: &Design) -> Result<Outcome, OracleError> {
        let violations = self.validate(ctx, design);
        if !violations.is_empty() {
            return Err(OracleError::InvalidDesign(super::violations_text(&violations)));
        }
        let d = self.parse(design).expect("validated");
        let (strength, density, melting, cost) =
            evaluate_composition(&d.composition, d.processing_temp_k)
                .ok_or_else(|| OracleError::InvalidDesign("unknown element".into()))?;
        Ok(Outcome::new("alloy")
            .with("yield_strength_MPa", strength)
            .with("density_g_cc", density)
            .with("melting_point_K", melting)
            .with("cost_per_kg", cost))
    }

    fn sample_design(&self, ctx: &TaskContext, rng: &mut DetRng) -> Design {
        let table = alloy_table();
        let symbols: Vec<&String> = table.elements.keys().collect();
        let n = rng.int_range(2, Self::max_elements(ctx.difficulty) as i64) as usize;
        let picks = rng.distinct(symbols.len(), n);
        let mut raw: Vec<f64> = (0..n).map(|_| rng.exponential(1.0)).collect();
        let total: f64 = raw.iter().sum();
        for x in &mut raw {
            *x /= total;
        }
        let composition = normalize_fractions(
            picks.iter().map(|&i| symbols[i].clone()).zip(raw.iter().copied()).collect(),
        );
        Design::new(
            "alloy",
            json!({
                "composition": composition,
                "processing_temp_K": rng.uniform(TEMP_LO, TEMP_HI),
            }),
        )
    }

    fn space(&self, ctx: &TaskContext) -> Option<DesignSpace> {
        // Fixed element slate drawn from the task seed; the simplex is
        // parameterized by unnormalized weights that decode normalizes.
        let table = alloy_table();
        let symbols: Vec<String> = table.elements.keys().cloned().collect();
        let n = Self::max_elements(ctx.difficulty).min(4).max(2);
        let mut rng = DetRng::keyed(ctx.seed, &["alloy-slate"]);
        let picks = rng.distinct(symbols.len(), n);
        let slate: Vec<String> = picks.iter().map(|&i| symbols[i].clone()).collect();
        let mut dims: Vec<Dim> =
            slate.iter().map(|el| Dim::real(&format!("w_{el}"), 0.01, 1.0)).collect();
        dims.push(Dim::real("processing_temp_K", TEMP_LO, TEMP_HI));
        let slate_dec = slate.clone();
        let slate_enc = slate;
        Some(DesignSpace::new(
            dims,
            move |v| {
                let n = slate_dec.len();
                let total: f64 = v[..n].iter().map(|x| x.as_real()).sum();
                let pairs = slate_dec
                    .iter()
                    .cloned()
                    .zip(v[..n].iter().map(|x| x.as_real() / total))
                    .collect();
                Design::new(
                    "alloy",
                    json!({
                        "composition": normalize_fractions(pairs),
                        "processing_temp_K": v[n].as_real(),
                    }),
                )
            },
            move |d| {
                let comp = d.get("composition")?.as_object()?;
                let mut vals = Vec::with_capacity(slate_enc.len() + 1);
                for el in &slate_enc {
                    vals.push(DimValue::Real(comp.get(el)?.as_f64()?.max(0.01)));
                }
                vals.push(DimValue::Real(d.f64("processing_temp_K")?));
                Some(vals)
            },
        ))
    }

    fn metric_policy(&self, _metric: &str) -> MetricPolicy {
        // All four metrics are bounded away from zero for valid compositions.
        MetricPolicy::default()
    }
}

/// Rounds fractions to six decimals and pushes the residual into the largest
/// component so the sum is exactly 1 within 1e-6 after rounding.
fn normalize_fractions(pairs: Vec<(String, f64)>) -> BTreeMap<String, f64> {
    let mut map: BTreeMap<String, f64> = pairs
        .into_iter()
        .map(|(el, x)| (el, (x * 1e6).round() / 1e6))
        .collect();
    let sum: f64 = map.values().sum();
    let residual = 1.0 - sum;
    if let Some(largest) = map
        .iter()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(b.0.cmp(a.0)))
        .map(|(el, _)| el.clone())
    {
        *map.get_mut(&largest).unwrap() += residual;
        let v = map[&largest];
        map.insert(largest, (v * 1e9).round() / 1e9);
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TaskKind;

    fn ctx(level: Difficulty) -> TaskContext {
        TaskContext { difficulty: level, seed: 5, kind: TaskKind::DeNovo }
    }

    #[test]
    fn pure_iron_reproduces_table() {
        let mut comp = BTreeMap::new();
        comp.insert("Fe".to_string(), 1.0);
        let (strength, density, melting, cost) = evaluate_composition(&comp, 900.0).unwrap();
        let fe = &alloy_table().elements["Fe"];
        assert_eq!(density, fe.density_g_cc);
        assert_eq!(melting, fe.melting_k);
        assert_eq!(strength, fe.base_strength_mpa);
        assert_eq!(cost, fe.cost_per_kg);
    }

    #[test]
    fn fifty_fifty_density_is_mixture() {
        let mut comp = BTreeMap::new();
        comp.insert("Fe".to_string(), 0.5);
        comp.insert("Al".to_string(), 0.5);
        let (_, density, _, _) = evaluate_composition(&comp, 900.0).unwrap();
        let t = alloy_table();
        let expected = 0.5 * t.elements["Fe"].density_g_cc + 0.5 * t.elements["Al"].density_g_cc;
        assert!((density - expected).abs() < 1e-12);
    }

    #[test]
    fn density_is_affine_in_composition() {
        let t = alloy_table();
        for lam in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let mut comp = BTreeMap::new();
            comp.insert("Cu".to_string(), lam);
            comp.insert("Ni".to_string(), 1.0 - lam);
            let (_, density, _, _) = evaluate_composition(&comp, 800.0).unwrap();
            let expected =
                lam * t.elements["Cu"].density_g_cc + (1.0 - lam) * t.elements["Ni"].density_g_cc;
            assert!((density - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn bad_sum_is_rejected() {
        let oracle = AlloyOracle::new();
        let d = Design::new(
            "alloy",
            serde_json::json!({"composition": {"Fe": 0.5, "Al": 0.48}, "processing_temp_K": 900.0}),
        );
        let v = oracle.validate(&ctx(Difficulty::L1), &d);
        assert!(v.iter().any(|v| v.message.contains("sum")));
        assert!(oracle.simulate(&ctx(Difficulty::L1), &d).is_err());
    }

    #[test]
    fn unknown_element_is_rejected() {
        let oracle = AlloyOracle::new();
        let d = Design::new(
            "alloy",
            serde_json::json!({"composition": {"Unobtainium": 1.0}, "processing_temp_K": 900.0}),
        );
        assert!(!oracle.validate(&ctx(Difficulty::L1), &d).is_empty());
    }

    #[test]
    fn sampled_designs_validate_and_outputs_positive() {
        let oracle = AlloyOracle::new();
        let mut rng = DetRng::new(2);
        for level in Difficulty::ALL {
            for _ in 0..25 {
                let c = ctx(level);
                let d = oracle.sample_design(&c, &mut rng);
                assert!(oracle.validate(&c, &d).is_empty(), "design {d:?}");
                let out = oracle.simulate(&c, &d).unwrap();
                for (m, v) in &out.metrics {
                    assert!(*v > 0.0, "{m} = {v}");
                }
            }
        }
    }

    #[test]
    fn space_decode_produces_valid_designs() {
        let oracle = AlloyOracle::new();
        let c = ctx(Difficulty::L3);
        let space = oracle.space(&c).unwrap();
        let mut rng = DetRng::new(8);
        for _ in 0..20 {
            let v = space.sample(&mut rng);
            let d = space.decode(&v);
            assert!(oracle.validate(&c, &d).is_empty(), "design {d:?}");
        }
    }
}
