//! Pharmacokinetic dosing oracle.
//!
//! Linear compartment model: a gut depot absorbing with rate `ka` into a
//! central compartment cleared at `CL/V`, optionally exchanging with a
//! peripheral compartment at `k12`/`k21`. Doses enter the gut as
//! instantaneous additions of `F * dose` at every interval boundary and the
//! system is integrated with classical fixed-step RK4.
//!
//! Regimen metrics are assessed over a standard initiation course of
//! `max(3, ceil(24h / interval))` dosing intervals from a drug-free
//! baseline: `cmax_mg_L` is the peak concentration anywhere in the course,
//! `cmin_mg_L` the trough at the end of the final interval, and `auc_0_24`
//! the final-interval exposure scaled to 24 hours. `half_life_hr` is
//! `0.693 * V / CL` by definition and does not depend on the regimen.

use super::{MetricPolicy, Oracle, OracleError, TaskContext, Violation};
use crate::model::{Constraint, Design, Outcome, TargetKind};
use crate::rng::DetRng;
use crate::vectorize::{DesignSpace, Dim, DimValue};
use serde::Deserialize;
use serde_json::json;
use std::collections::BTreeMap;

pub const ALLOWED_INTERVALS_HR: [f64; 5] = [4.0, 6.0, 8.0, 12.0, 24.0];

#[derive(Debug, Clone, Deserialize)]
pub struct PkParams {
    pub name: String,
    pub ka_per_hr: f64,
    pub f_bioavail: f64,
    #[serde(rename = "cl_L_hr")]
    pub cl_l_hr: f64,
    #[serde(rename = "v_L")]
    pub v_l: f64,
    #[serde(default)]
    pub k12_per_hr: Option<f64>,
    #[serde(default)]
    pub k21_per_hr: Option<f64>,
}

impl PkParams {
    pub fn elimination_rate(&self) -> f64 {
        self.cl_l_hr / self.v_l
    }

    /// Reported half-life, `0.693 * V / CL`.
    pub fn half_life_hr(&self) -> f64 {
        0.693 * self.v_l / self.cl_l_hr
    }

    /// Terminal disposition rate: `ke` for one compartment, the slow hybrid
    /// root of `s^2 + (ke+k12+k21)s + ke*k21` for two. Governs how long the
    /// system takes to accumulate to steady state.
    pub fn terminal_lambda_z(&self) -> f64 {
        let ke = self.elimination_rate();
        match (self.k12_per_hr, self.k21_per_hr) {
            (Some(k12), Some(k21)) => {
                let sum = ke + k12 + k21;
                let disc = (sum * sum - 4.0 * ke * k21).max(0.0).sqrt();
                (sum - disc) / 2.0
            }
            _ => ke,
        }
    }
}

/// Concentration metrics of a simulated multiple-dose course.
#[derive(Debug, Clone, Copy)]
pub struct CourseMetrics {
    pub cmax_mg_l: f64,
    /// Trough at the end of the final interval.
    pub cmin_mg_l: f64,
    /// Exposure over the final interval, scaled to 24 hours.
    pub auc_daily: f64,
    /// Raw exposure over the final interval.
    pub auc_final_interval: f64,
}

/// Integrates `n_intervals` doses of `dose_mg` every `tau_hr` hours from a
/// drug-free baseline and reports course metrics. RK4 with step
/// `min(0.02/ka, 0.05)` hours, doses applied exactly on interval boundaries.
pub fn simulate_course(
    params: &PkParams,
    dose_mg: f64,
    tau_hr: f64,
    n_intervals: usize,
) -> CourseMetrics {
    assert!(tau_hr > 0.0 && n_intervals >= 1);
    if dose_mg <= 0.0 {
        return CourseMetrics {
            cmax_mg_l: 0.0,
            cmin_mg_l: 0.0,
            auc_daily: 0.0,
            auc_final_interval: 0.0,
        };
    }
    let ke = params.elimination_rate();
    let (k12, k21) = match (params.k12_per_hr, params.k21_per_hr) {
        (Some(a), Some(b)) => (a, b),
        _ => (0.0, 0.0),
    };
    let h_nominal = (0.02 / params.ka_per_hr).min(0.05);
    let steps = (tau_hr / h_nominal).ceil() as usize;
    let h = tau_hr / steps as f64;

    // State: [gut, central, peripheral] amounts in mg.
    let deriv = |s: [f64; 3]| -> [f64; 3] {
        [
            -params.ka_per_hr * s[0],
            params.ka_per_hr * s[0] - ke * s[1] - k12 * s[1] + k21 * s[2],
            k12 * s[1] - k21 * s[2],
        ]
    };
    let mut state = [0.0f64; 3];
    let mut cmax = 0.0f64;
    let mut auc_last = 0.0f64;
    for interval in 0..n_intervals {
        state[0] += params.f_bioavail * dose_mg;
        let last = interval + 1 == n_intervals;
        let mut auc = 0.0;
        for _ in 0..steps {
            let c0 = state[1] / params.v_l;
            let k1 = deriv(state);
            let mid1 = add_scaled(state, k1, h / 2.0);
            let k2 = deriv(mid1);
            let mid2 = add_scaled(state, k2, h / 2.0);
            let k3 = deriv(mid2);
            let end = add_scaled(state, k3, h);
            let k4 = deriv(end);
            for i in 0..3 {
                state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            let c1 = state[1] / params.v_l;
            cmax = cmax.max(c1);
            auc += 0.5 * (c0 + c1) * h;
        }
        if last {
            auc_last = auc;
        }
    }
    let cmin = state[1] / params.v_l;
    CourseMetrics {
        cmax_mg_l: cmax,
        cmin_mg_l: cmin,
        auc_daily: auc_last * 24.0 / tau_hr,
        auc_final_interval: auc_last,
    }
}

fn add_scaled(s: [f64; 3], d: [f64; 3], h: f64) -> [f64; 3] {
    [s[0] + h * d[0], s[1] + h * d[1], s[2] + h * d[2]]
}

/// Number of intervals in the standard assessment course.
pub fn course_intervals(tau_hr: f64) -> usize {
    ((24.0 / tau_hr).ceil() as usize).max(3)
}

/// Runs the course until the per-interval cmax settles to steady state
/// (relative change < 1e-5, capped at 14 terminal half-lives), then measures
/// the following 24 hours. Used by accuracy property tests; the benchmark
/// metrics use the fixed initiation course above.
pub fn steady_state_window(params: &PkParams, dose_mg: f64, tau_hr: f64) -> CourseMetrics {
    let t_half = 0.693 / params.terminal_lambda_z();
    let cap = ((14.0 * t_half / tau_hr).ceil() as usize).max(3);
    let mut prev = simulate_course(params, dose_mg, tau_hr, 3).cmax_mg_l;
    let mut n = 3;
    while n < cap {
        let next = simulate_course(params, dose_mg, tau_hr, n + 1).cmax_mg_l;
        if (next - prev).abs() / next.max(1e-30) < 1e-5 {
            break;
        }
        prev = next;
        n += 1;
    }
    // Measure a full 24 h (whole intervals, 24/tau is integral for the
    // allowed interval set) after the settling point.
    let extra = (24.0 / tau_hr).ceil() as usize;
    let m = simulate_course(params, dose_mg, tau_hr, n + extra);
    m
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DosingDesign {
    dose_mg: f64,
    frequency_hours: f64,
}

pub struct PkpdOracle {
    catalog: BTreeMap<String, Vec<PkParams>>,
}

impl PkpdOracle {
    pub fn new() -> Self {
        let systems: serde_json::Value =
            serde_json::from_str(super::SYSTEMS_JSON).expect("systems data file");
        let catalog = serde_json::from_value(systems["pkpd"].clone()).expect("pk catalog");
        PkpdOracle { catalog }
    }

    pub fn system(&self, ctx: &TaskContext) -> &PkParams {
        let entries = &self.catalog[&ctx.difficulty.to_string()];
        &entries[(crate::rng::derive_seed(ctx.seed, &[crate::rng::label("pkpd-sys")])
            % entries.len() as u64) as usize]
    }

    fn parse(&self, design: &Design) -> Result<DosingDesign, Vec<Violation>> {
        serde_json::from_value(serde_json::Value::Object(design.params.clone()))
            .map_err(|e| vec![Violation::new("params", e.to_string())])
    }
}

impl Default for PkpdOracle {
    fn default() -> Self {
        Self::new()
    }
}

impl Oracle for PkpdOracle {
    fn domain(&self) -> &'static str {
        "pkpd"
    }

    fn blurb(&self) -> &'static str {
        "multiple-dose pharmacokinetics of a fixed drug"
    }

    fn metric_names(&self, _ctx: &TaskContext) -> Vec<String> {
        vec!["cmax_mg_L".into(), "auc_0_24".into(), "half_life_hr".into(), "cmin_mg_L".into()]
    }

    fn targetable_metrics(&self, _ctx: &TaskContext) -> Vec<String> {
        // half_life_hr is a property of the drug, not the regimen.
        vec!["cmax_mg_L".into(), "auc_0_24".into(), "cmin_mg_L".into()]
    }

    fn constraints(&self, _ctx: &TaskContext) -> Vec<Constraint> {
        vec![
            Constraint::range("dose_mg", 10.0, 3000.0),
            Constraint::enum_number("frequency_hours", &ALLOWED_INTERVALS_HR),
        ]
    }

    fn schema(&self, _ctx: &TaskContext) -> serde_json::Value {
        json!({
            "dose_mg": "number",
            "frequency_hours": "one of [4, 6, 8, 12, 24] (hours between doses)"
        })
    }

    fn system_summary(&self, ctx: &TaskContext) -> String {
        let p = self.system(ctx);
        let mut s = format!(
            "Drug PK parameters: ka = {} 1/hr, F = {}, CL = {} L/hr, V = {} L.",
            p.ka_per_hr, p.f_bioavail, p.cl_l_hr, p.v_l
        );
        if let (Some(k12), Some(k21)) = (p.k12_per_hr, p.k21_per_hr) {
            s.push_str(&format!(" Two-compartment model: k12 = {k12} 1/hr, k21 = {k21} 1/hr."));
        }
        s.push_str(
            "\nMetrics are assessed over an initiation course of max(3, 24h/interval) doses from a drug-free baseline.",
        );
        s
    }

    fn validate(&self, _ctx: &TaskContext, design: &Design) -> Vec<Violation> {
        let d = match self.parse(design) {
            Ok(d) => d,
            Err(v) => return v,
        };
        let mut out = Vec::new();
        if !d.dose_mg.is_finite() || d.dose_mg <= 0.0 {
            out.push(Violation::new("dose_mg", "must be a positive finite number"));
        }
        if !ALLOWED_INTERVALS_HR.iter().any(|t| (t - d.frequency_hours).abs() < 1e-9) {
            out.push(Violation::new("frequency_hours", "must be one of 4, 6, 8, 12, 24"));
        }
        out
    }

    fn simulate(&self, ctx: &TaskContext, design: &Design) -> Result<Outcome, OracleError> {
        let violations = self.validate(ctx, design);
        if !violations.is_empty() {
            return Err(OracleError::InvalidDesign(super::violations_text(&violations)));
        }
        let d = self.parse(design).expect("validated");
        let params = self.system(ctx);
        let m =
            simulate_course(params, d.dose_mg, d.frequency_hours, course_intervals(d.frequency_hours));
        Ok(Outcome::new("pkpd")
            .with("cmax_mg_L", m.cmax_mg_l)
            .with("auc_0_24", m.auc_daily)
            .with("half_life_hr", params.half_life_hr())
            .with("cmin_mg_L", m.cmin_mg_l))
    }

    fn sample_design(&self, _ctx: &TaskContext, rng: &mut DetRng) -> Design {
        Design::new(
            "pkpd",
            json!({
                "dose_mg": rng.uniform(10.0, 3000.0),
                "frequency_hours": *rng.choose(&ALLOWED_INTERVALS_HR),
            }),
        )
    }

    fn space(&self, _ctx: &TaskContext) -> Option<DesignSpace> {
        Some(DesignSpace::new(
            vec![Dim::real("dose_mg", 10.0, 3000.0), Dim::cat("frequency_hours", 5)],
            |v| {
                Design::new(
                    "pkpd",
                    json!({
                        "dose_mg": v[0].as_real(),
                        "frequency_hours": ALLOWED_INTERVALS_HR[v[1].as_cat()],
                    }),
                )
            },
            |d| {
                let dose = d.f64("dose_mg")?;
                let freq = d.f64("frequency_hours")?;
                let idx = ALLOWED_INTERVALS_HR.iter().position(|t| (t - freq).abs() < 1e-9)?;
                Some(vec![DimValue::Real(dose), DimValue::Cat(idx)])
            },
        ))
    }

    fn metric_policy(&self, metric: &str) -> MetricPolicy {
        match metric {
            "cmin_mg_L" => MetricPolicy::max_bound_floor(0.01, 0.05),
            _ => MetricPolicy {
                near_zero: 1e-6,
                fallback_kind: TargetKind::MaxBound,
                fallback_value: 0.05,
            },
        }
    }

    fn taskworthy(&self, outcome: &Outcome) -> bool {
        outcome.get("cmax_mg_L").unwrap_or(0.0) > 0.1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn drug_a() -> PkParams {
        PkParams {
            name: "drug_a".into(),
            ka_per_hr: 0.8,
            f_bioavail: 0.65,
            cl_l_hr: 5.0,
            v_l: 100.0,
            k12_per_hr: None,
            k21_per_hr: None,
        }
    }

    fn drug_f() -> PkParams {
        PkParams {
            name: "drug_f".into(),
            ka_per_hr: 1.5,
            f_bioavail: 0.75,
            cl_l_hr: 10.0,
            v_l: 60.0,
            k12_per_hr: Some(0.3),
            k21_per_hr: Some(0.15),
        }
    }

    /// Closed-form one-compartment concentration after `n` doses at interval
    /// `tau` (superposition of first-order absorption curves). Independent
    /// oracle for the RK4 integrator.
    fn analytic_one_cpt(p: &PkParams, dose: f64, tau: f64, n: usize, t_since_last: f64) -> f64 {
        let ke = p.elimination_rate();
        let ka = p.ka_per_hr;
        let a = p.f_bioavail * dose * ka / (p.v_l * (ka - ke));
        let mut c = 0.0;
        for i in 0..n {
            let t = t_since_last + (n - 1 - i) as f64 * tau;
            c += a * ((-ke * t).exp() - (-ka * t).exp());
        }
        c
    }

    #[test]
    fn integrator_matches_analytic_superposition() {
        let p = drug_a();
        let m = simulate_course(&p, 1000.0, 12.0, 3);
        // Trough at end of the third interval.
        let expect = analytic_one_cpt(&p, 1000.0, 12.0, 3, 12.0);
        assert!(
            (m.cmin_mg_l - expect).abs() / expect < 1e-8,
            "rk4 {} vs analytic {}",
            m.cmin_mg_l,
            expect
        );
        // Peak: maximize the three-dose curve on a fine grid. Both maxima
        // are grid-sampled, so compare at grid resolution, not RK4 accuracy.
        let mut peak: f64 = 0.0;
        for n in 1..=3usize {
            for i in 0..=4800 {
                let t = i as f64 * 12.0 / 4800.0;
                peak = peak.max(analytic_one_cpt(&p, 1000.0, 12.0, n, t));
            }
        }
        assert!(
            (m.cmax_mg_l - peak).abs() / peak < 2e-4,
            "rk4 {} vs analytic {}",
            m.cmax_mg_l,
            peak
        );
    }

    #[test]
    fn paper_trace_one_compartment_cmax() {
        let p = drug_a();
        let m = simulate_course(&p, 1356.4, 12.0, course_intervals(12.0));
        let err = (m.cmax_mg_l - 13.42).abs() / 13.42;
        assert!(err <= 0.10, "cmax {} not within 10% of 13.42", m.cmax_mg_l);
    }

    #[test]
    fn paper_trace_two_compartment_cmax() {
        let p = drug_f();
        let m = simulate_course(&p, 635.1, 12.0, course_intervals(12.0));
        let err = (m.cmax_mg_l - 6.47).abs() / 6.47;
        assert!(err <= 0.15, "cmax {} not within 15% of 6.47", m.cmax_mg_l);
    }

    #[test]
    fn half_life_formula_exact() {
        assert_eq!(drug_a().half_life_hr(), 13.86);
    }

    #[test]
    fn zero_dose_means_zero_exposure() {
        let m = simulate_course(&drug_a(), 0.0, 12.0, 3);
        assert_eq!(m.cmax_mg_l, 0.0);
        assert_eq!(m.auc_daily, 0.0);
        assert_eq!(m.cmin_mg_l, 0.0);
    }

    #[test]
    fn dose_linearity_is_exact() {
        for p in [drug_a(), drug_f()] {
            let a = simulate_course(&p, 500.0, 8.0, course_intervals(8.0));
            let b = simulate_course(&p, 1000.0, 8.0, course_intervals(8.0));
            assert!((b.cmax_mg_l - 2.0 * a.cmax_mg_l).abs() / b.cmax_mg_l < 1e-6);
            assert!((b.auc_daily - 2.0 * a.auc_daily).abs() / b.auc_daily < 1e-6);
        }
    }

    #[test]
    fn halving_clearance_doubles_steady_state_auc() {
        let p = drug_a();
        let mut p_half = drug_a();
        p_half.cl_l_hr /= 2.0;
        let a = steady_state_window(&p, 800.0, 12.0);
        let b = steady_state_window(&p_half, 800.0, 12.0);
        let ratio = b.auc_daily / a.auc_daily;
        assert!((ratio - 2.0).abs() < 1e-3, "ratio {ratio}");

        let p2 = drug_f();
        let mut p2_half = drug_f();
        p2_half.cl_l_hr /= 2.0;
        let a = steady_state_window(&p2, 600.0, 12.0);
        let b = steady_state_window(&p2_half, 600.0, 12.0);
        let ratio = b.auc_daily / a.auc_daily;
        assert!((ratio - 2.0).abs() < 1e-3, "two-compartment ratio {ratio}");
    }

    #[test]
    fn steady_state_auc_matches_clearance_identity() {
        // At steady state, interval AUC = F * dose / CL.
        let p = drug_a();
        let m = steady_state_window(&p, 800.0, 12.0);
        let expect = p.f_bioavail * 800.0 / p.cl_l_hr;
        assert!(
            (m.auc_final_interval - expect).abs() / expect < 1e-3,
            "{} vs {}",
            m.auc_final_interval,
            expect
        );
    }

    #[test]
    fn cmin_never_exceeds_cmax() {
        let mut rng = DetRng::new(5);
        for p in [drug_a(), drug_f()] {
            for _ in 0..20 {
                let dose = rng.uniform(10.0, 3000.0);
                let tau = *rng.choose(&ALLOWED_INTERVALS_HR);
                let m = simulate_course(&p, dose, tau, course_intervals(tau));
                assert!(m.cmin_mg_l <= m.cmax_mg_l + 1e-12);
                assert!(m.cmin_mg_l >= 0.0 && m.auc_daily >= 0.0);
            }
        }
    }

    #[test]
    fn oracle_rejects_bad_regimens() {
        let oracle = PkpdOracle::new();
        let ctx = TaskContext {
            difficulty: crate::model::Difficulty::L1,
            seed: 0,
            kind: crate::model::TaskKind::DeNovo,
        };
        let bad = Design::new("pkpd", json!({"dose_mg": -5.0, "frequency_hours": 12}));
        assert!(oracle.simulate(&ctx, &bad).is_err());
        let bad_freq = Design::new("pkpd", json!({"dose_mg": 100.0, "frequency_hours": 5}));
        assert!(!oracle.validate(&ctx, &bad_freq).is_empty());
    }
}
