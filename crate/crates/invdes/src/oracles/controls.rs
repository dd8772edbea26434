//! PID tuning oracle: unit-step response of a unity-feedback loop.
//!
//! The plant is a strictly proper rational transfer function fixed per task.
//! The controller acts on the error `e = r - y` with
//! `u = Kp e + Ki int(e) + Kd * (filtered derivative)`, the derivative term
//! realized as `s N / (s + N)` so the loop stays proper. Plant, integrator,
//! and filter are assembled into one augmented linear system and stepped
//! with the exact matrix exponential on a grid of `time_scale / 200`
//! (horizon 50 time scales), so stiff filter poles cost accuracy nothing.
//!
//! Metrics from the sampled response: overshoot above the final value (%),
//! 2% settling time, 10-90% rise time, and steady-state error `|1 - final|`.
//! Diverging or zero-output loops return a sentinel outcome with every
//! metric at 1e6 (a finite all-miss value, never NaN).

use super::{MetricPolicy, Oracle, OracleError, TaskContext, Violation};
use crate::model::{Constraint, Design, Outcome};
use crate::rng::DetRng;
use crate::vectorize::{DesignSpace, Dim, DimValue};
use serde::Deserialize;
use serde_json::json;
use std::collections::BTreeMap;

pub const SENTINEL: f64 = 1e6;

#[derive(Debug, Clone, Deserialize)]
pub struct Plant {
    pub name: String,
    /// Numerator coefficients, descending powers of s.
    pub num: Vec<f64>,
    /// Denominator coefficients, descending powers of s.
    pub den: Vec<f64>,
    pub time_scale_s: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    pub filter_n: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct StepMetrics {
    pub overshoot_pct: f64,
    pub settling_time_s: f64,
    pub rise_time_s: f64,
    pub steady_state_error: f64,
    pub final_value: f64,
    pub settled: bool,
}

type Mat = Vec<Vec<f64>>;

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

fn mat_vec(a: &Mat, v: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(v).map(|(r, x)| r * x).sum()).collect()
}

fn inf_norm(a: &Mat) -> f64 {
    a.iter().map(|row| row.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a Taylor core.
fn expm(a: &Mat, h: f64) -> Mat {
    let n = a.len();
    let norm = inf_norm(a) * h;
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scale = h / 2f64.powi(squarings as i32);
    let scaled: Mat =
        a.iter().map(|row| row.iter().map(|x| x * scale).collect()).collect();
    let mut result: Mat = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut term = result.clone();
    for k in 1..=20 {
        term = mat_mul(&term, &scaled);
        for row in term.iter_mut() {
            for x in row.iter_mut() {
                *x /= k as f64;
            }
        }
        for i in 0..n {
            for j in 0..n {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        result = mat_mul(&result, &result);
    }
    result
}

/// Unit-step response of the closed loop on a uniform grid.
/// Returns (sample spacing, y samples) or None for a malformed plant.
pub fn closed_loop_step(plant: &Plant, gains: &PidGains) -> Option<(f64, Vec<f64>)> {
    let lead = *plant.den.first()?;
    if lead == 0.0 || plant.num.len() >= plant.den.len() || plant.num.is_empty() {
        return None;
    }
    let n = plant.den.len() - 1;
    // Ascending normalized coefficients a_0..a_{n-1}, b_0..b_{n-1}.
    let a: Vec<f64> = plant.den.iter().skip(1).rev().map(|c| c / lead).collect();
    let mut b = vec![0.0; n];
    for (i, c) in plant.num.iter().rev().enumerate() {
        b[i] = c / lead;
    }

    let filter_n = gains.filter_n.unwrap_or(20.0 / plant.time_scale_s);
    let (kp, ki, kd, nf) = (gains.kp, gains.ki, gains.kd, filter_n);

    // Augmented state: [x_plant (n), integrator, filter, constant].
    let dim = n + 3;
    let mut m = vec![vec![0.0; dim]; dim];
    for i in 0..n.saturating_sub(1) {
        m[i][i + 1] = 1.0;
    }
    for j in 0..n {
        m[n - 1][j] = -a[j];
    }
    // Plant input u enters through B = e_{n-1}:
    // u = (kp + kd nf)(1 - Cx) + ki*xi - kd nf^2 z.
    let direct = kp + kd * nf;
    for j in 0..n {
        m[n - 1][j] -= direct * b[j];
    }
    m[n - 1][n] = ki;
    m[n - 1][n + 1] = -kd * nf * nf;
    m[n - 1][n + 2] = direct;
    // Integrator: xi' = 1 - Cx.
    for j in 0..n {
        m[n][j] = -b[j];
    }
    m[n][n + 2] = 1.0;
    // Derivative filter: z' = -nf z + (1 - Cx).
    for j in 0..n {
        m[n + 1][j] = -b[j];
    }
    m[n + 1][n + 1] = -nf;
    m[n + 1][n + 2] = 1.0;

    let h = plant.time_scale_s / 200.0;
    let steps = 200 * 50;
    let e = expm(&m, h);
    let mut w = vec![0.0; dim];
    w[dim - 1] = 1.0;
    let mut ys = Vec::with_capacity(steps + 1);
    let output = |w: &[f64]| -> f64 { b.iter().zip(w).map(|(bi, xi)| bi * xi).sum() };
    ys.push(output(&w));
    for _ in 0..steps {
        w = mat_vec(&e, &w);
        let y = output(&w);
        if !y.is_finite() || y.abs() > 1e9 {
            return Some((h, vec![f64::INFINITY]));
        }
        ys.push(y);
    }
    Some((h, ys))
}

/// Extracts step-response metrics from the sampled output.
pub fn step_metrics(h: f64, ys: &[f64]) -> StepMetrics {
    let sentinel = StepMetrics {
        overshoot_pct: SENTINEL,
        settling_time_s: SENTINEL,
        rise_time_s: SENTINEL,
        steady_state_error: SENTINEL,
        final_value: 0.0,
        settled: false,
    };
    if ys.iter().any(|y| !y.is_finite()) || ys.len() < 10 {
        return sentinel;
    }
    let tail = ys.len() / 50; // final value from the last 2% of samples
    let final_value = ys[ys.len() - tail..].iter().sum::<f64>() / tail as f64;
    if final_value <= 1e-9 {
        return sentinel;
    }
    let horizon = h * (ys.len() - 1) as f64;
    let peak = ys.iter().copied().fold(f64::MIN, f64::max);
    let overshoot_pct = ((peak - final_value) / final_value * 100.0).max(0.0);

    let band = 0.02 * final_value.abs();
    let mut settling = 0.0;
    for (i, y) in ys.iter().enumerate() {
        if (y - final_value).abs() > band {
            settling = i as f64 * h;
        }
    }
    let settled = settling < horizon * 0.99;

    let cross = |level: f64| -> Option<f64> {
        ys.iter().position(|y| *y >= level).map(|i| i as f64 * h)
    };
    let rise_time_s = match (cross(0.1 * final_value), cross(0.9 * final_value)) {
        (Some(t10), Some(t90)) if t90 >= t10 => t90 - t10,
        _ => horizon,
    };
    StepMetrics {
        overshoot_pct,
        settling_time_s: settling,
        rise_time_s,
        steady_state_error: (1.0 - final_value).abs(),
        final_value,
        settled,
    }
}

pub fn simulate_pid(plant: &Plant, gains: &PidGains) -> Option<StepMetrics> {
    let (h, ys) = closed_loop_step(plant, gains)?;
    Some(step_metrics(h, &ys))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PidDesign {
    #[serde(rename = "Kp")]
    kp: f64,
    #[serde(rename = "Ki")]
    ki: f64,
    #[serde(rename = "Kd")]
    kd: f64,
    #[serde(default, rename = "filter_N")]
    filter_n: Option<f64>,
}

pub struct ControlsOracle {
    catalog: BTreeMap<String, Vec<Plant>>,
}

impl ControlsOracle {
    pub fn new() -> Self {
        let systems: serde_json::Value =
            serde_json::from_str(super::SYSTEMS_JSON).expect("systems data file");
        let catalog =
            serde_json::from_value(systems["controls"].clone()).expect("plant catalog");
        ControlsOracle { catalog }
    }

    pub fn system(&self, ctx: &TaskContext) -> &Plant {
        let entries = &self.catalog[&ctx.difficulty.to_string()];
        &entries[(crate::rng::derive_seed(ctx.seed, &[crate::rng::label("controls-sys")])
            % entries.len() as u64) as usize]
    }

    fn parse(&self, design: &Design) -> Result<PidDesign, Vec<Violation>> {
        serde_json::from_value(serde_json::Value::Object(design.params.clone()))
            .map_err(|e| vec![Violation::new("params", e.to_string())])
    }
}

impl Default for ControlsOracle {
    fn default() -> Self {
        Self::new()
    }
}

fn polynomial(coeffs: &[f64]) -> String {
    let n = coeffs.len() - 1;
    let terms: Vec<String> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(i, c)| {
            let p = n - i;
            match p {
                0 => format!("{c}"),
                1 => format!("{c}*s"),
                _ => format!("{c}*s^{p}"),
            }
        })
        .collect();
    if terms.is_empty() { "0".into() } else { terms.join(" + ") }
}

impl Oracle for ControlsOracle {
    fn domain(&self) -> &'static str {
        "controls"
    }

    fn blurb(&self) -> &'static str {
        "PID tuning against a fixed plant's unit-step response"
    }

    fn metric_names(&self, _ctx: &TaskContext) -> Vec<String> {
        vec![
            "overshoot_pct".into(),
            "settling_time_s".into(),
            "rise_time_s".into(),
            "steady_state_error".into(),
        ]
    }

    fn constraints(&self, _ctx: &TaskContext) -> Vec<Constraint> {
        vec![
            Constraint::range("Kp", 0.0, 20.0),
            Constraint::range("Ki", 0.0, 5.0),
            Constraint::range("Kd", 0.0, 10.0),
            Constraint::range("filter_N", 0.1, 100.0),
        ]
    }

    fn schema(&self, _ctx: &TaskContext) -> serde_json::Value {
        json!({
            "Kp": "number >= 0",
            "Ki": "number >= 0",
            "Kd": "number >= 0",
            "filter_N": "optional derivative filter coefficient (1/s)"
        })
    }

    fn system_summary(&self, ctx: &TaskContext) -> String {
        let p = self.system(ctx);
        format!(
            "Plant G(s) = ({}) / ({}), unity feedback, unit step reference.\n\
             Response simulated for {} s; settling band 2%, rise time 10%-90%.",
            polynomial(&p.num),
            polynomial(&p.den),
            50.0 * p.time_scale_s
        )
    }

    fn validate(&self, _ctx: &TaskContext, design: &Design) -> Vec<Violation> {
        let d = match self.parse(design) {
            Ok(d) => d,
            Err(v) => return v,
        };
        let mut out = Vec::new();
        for (name, v) in [("Kp", d.kp), ("Ki", d.ki), ("Kd", d.kd)] {
            if !v.is_finite() || v < 0.0 {
                out.push(Violation::new(name, "must be a non-negative finite number"));
            }
        }
        if let Some(nf) = d.filter_n {
            if !nf.is_finite() || nf <= 0.0 {
                out.push(Violation::new("filter_N", "must be a positive finite number"));
            }
        }
        out
    }

    fn simulate(&self, ctx: &TaskContext, design: &Design) -> Result<Outcome, OracleError> {
        let violations = self.validate(ctx, design);
        if !violations.is_empty() {
            return Err(OracleError::InvalidDesign(super::violations_text(&violations)));
        }
        let d = self.parse(design).expect("validated");
        let plant = self.system(ctx);
        let gains = PidGains { kp: d.kp, ki: d.ki, kd: d.kd, filter_n: d.filter_n };
        let m = simulate_pid(plant, &gains)
            .ok_or_else(|| OracleError::InvalidDesign("degenerate plant".into()))?;
        Ok(Outcome::new("controls")
            .with("overshoot_pct", m.overshoot_pct)
            .with("settling_time_s", m.settling_time_s)
            .with("rise_time_s", m.rise_time_s)
            .with("steady_state_error", m.steady_state_error))
    }

    fn sample_design(&self, _ctx: &TaskContext, rng: &mut DetRng) -> Design {
        let mut params = json!({
            "Kp": rng.uniform(0.0, 20.0),
            "Ki": rng.uniform(0.0, 5.0),
            "Kd": rng.uniform(0.0, 10.0),
        });
        if rng.f64() < 0.5 {
            params["filter_N"] = json!(rng.uniform(0.1, 100.0));
        }
        Design::new("controls", params)
    }

    fn space(&self, ctx: &TaskContext) -> Option<DesignSpace> {
        let default_n = 20.0 / self.system(ctx).time_scale_s;
        Some(DesignSpace::new(
            vec![
                Dim::real("Kp", 0.0, 20.0),
                Dim::real("Ki", 0.0, 5.0),
                Dim::real("Kd", 0.0, 10.0),
                Dim::real("filter_N", 0.1, 100.0),
            ],
            |v| {
                Design::new(
                    "controls",
                    json!({
                        "Kp": v[0].as_real(),
                        "Ki": v[1].as_real(),
                        "Kd": v[2].as_real(),
                        "filter_N": v[3].as_real(),
                    }),
                )
            },
            move |d| {
                Some(vec![
                    DimValue::Real(d.f64("Kp")?),
                    DimValue::Real(d.f64("Ki")?),
                    DimValue::Real(d.f64("Kd")?),
                    DimValue::Real(d.f64("filter_N").unwrap_or(default_n)),
                ])
            },
        ))
    }

    fn metric_policy(&self, metric: &str) -> MetricPolicy {
        match metric {
            "overshoot_pct" => MetricPolicy::max_bound_floor(0.5, 5.0),
            "steady_state_error" => MetricPolicy::max_bound_floor(0.005, 0.05),
            _ => MetricPolicy::default(),
        }
    }

    fn taskworthy(&self, outcome: &Outcome) -> bool {
        outcome.metrics.values().all(|v| *v < SENTINEL)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn first_order() -> Plant {
        Plant { name: "t".into(), num: vec![1.0], den: vec![1.0, 1.0], time_scale_s: 1.0 }
    }

    #[test]
    fn p_control_offset_matches_final_value_theorem() {
        // Plant 1/(s+1), Kp only: final = Kp/(1+Kp), sse = 1/(1+Kp).
        for kp in [1.0, 2.0, 5.0, 10.0] {
            let m = simulate_pid(
                &first_order(),
                &PidGains { kp, ki: 0.0, kd: 0.0, filter_n: None },
            )
            .unwrap();
            assert!(
                (m.steady_state_error - 1.0 / (1.0 + kp)).abs() < 1e-3,
                "kp {kp}: sse {}",
                m.steady_state_error
            );
            assert!(m.overshoot_pct < 1e-6, "first order never overshoots");
        }
    }

    #[test]
    fn integral_action_removes_offset() {
        let m = simulate_pid(
            &first_order(),
            &PidGains { kp: 1.0, ki: 0.5, kd: 0.0, filter_n: None },
        )
        .unwrap();
        assert!(m.steady_state_error < 1e-3, "sse {}", m.steady_state_error);
    }

    #[test]
    fn second_order_overshoot_formula() {
        // Plant 1/(s(s+2)) with Kp = 4: closed loop wn = 2, zeta = 0.5,
        // overshoot = exp(-pi zeta / sqrt(1 - zeta^2)) = 16.30%.
        let plant = Plant {
            name: "t".into(),
            num: vec![1.0],
            den: vec![1.0, 2.0, 0.0],
            time_scale_s: 3.0,
        };
        let m = simulate_pid(&plant, &PidGains { kp: 4.0, ki: 0.0, kd: 0.0, filter_n: None })
            .unwrap();
        let zeta: f64 = 0.5;
        let expect = 100.0 * (-std::f64::consts::PI * zeta / (1.0 - zeta * zeta).sqrt()).exp();
        assert!((m.overshoot_pct - expect).abs() < 0.5, "{} vs {}", m.overshoot_pct, expect);
        assert!(m.steady_state_error < 1e-3);
    }

    #[test]
    fn unstable_loop_returns_finite_sentinels() {
        // Double integrator with pure P control is marginally unstable;
        // a RHP-zero plant with huge gain diverges outright.
        let plant = Plant {
            name: "t".into(),
            num: vec![-1.0, 1.0],
            den: vec![1.0, 2.0, 1.0],
            time_scale_s: 4.0,
        };
        let m = simulate_pid(&plant, &PidGains { kp: 20.0, ki: 5.0, kd: 0.0, filter_n: None })
            .unwrap();
        assert_eq!(m.overshoot_pct, SENTINEL);
        assert!(m.settling_time_s.is_finite());
    }

    #[test]
    fn settling_time_within_horizon_when_settled() {
        let plant = first_order();
        let m = simulate_pid(&plant, &PidGains { kp: 2.0, ki: 1.0, kd: 0.0, filter_n: None })
            .unwrap();
        assert!(m.settled);
        assert!(m.settling_time_s <= 50.0 * plant.time_scale_s);
        assert!(m.rise_time_s > 0.0);
    }

    #[test]
    fn derivative_filter_is_stable_at_any_coefficient() {
        // The exact stepper must not blow up for stiff filter poles.
        let plant = Plant {
            name: "t".into(),
            num: vec![1.0],
            den: vec![5.0, 15.5, 11.5, 1.0],
            time_scale_s: 12.0,
        };
        let m = simulate_pid(
            &plant,
            &PidGains { kp: 2.0, ki: 0.2, kd: 5.0, filter_n: Some(100.0) },
        )
        .unwrap();
        assert!(m.overshoot_pct.is_finite());
        assert!(m.settled, "loop should settle: {m:?}");
    }

    #[test]
    fn oracle_end_to_end_on_catalog_plants() {
        let oracle = ControlsOracle::new();
        let mut rng = DetRng::new(6);
        for level in crate::model::Difficulty::ALL {
            let ctx = TaskContext {
                difficulty: level,
                seed: 17,
                kind: crate::model::TaskKind::DeNovo,
            };
            for _ in 0..5 {
                let d = oracle.sample_design(&ctx, &mut rng);
                let out = oracle.simulate(&ctx, &d).unwrap();
                let overshoot = out.get("overshoot_pct").unwrap();
                assert!(overshoot >= 0.0);
                assert!(out.metrics.values().all(|v| v.is_finite()));
            }
        }
    }

    #[test]
    fn negative_gain_is_rejected() {
        let oracle = ControlsOracle::new();
        let ctx = TaskContext {
            difficulty: crate::model::Difficulty::L1,
            seed: 0,
            kind: crate::model::TaskKind::DeNovo,
        };
        let d = Design::new("controls", json!({"Kp": -1.0, "Ki": 0.0, "Kd": 0.0}));
        assert!(oracle.simulate(&ctx, &d).is_err());
    }
}
