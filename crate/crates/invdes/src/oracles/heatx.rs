//! Shell-and-tube heat exchanger rating oracle.
//!
//! Tube-side film coefficient from Dittus-Boelter (`Nu = 0.023 Re^0.8 Pr^0.4`,
//! laminar floor `Nu = 3.66`), shell-side from Kern's method with equilateral
//! triangular pitch `1.25 d_o` (`Nu = 0.36 Re^0.55 Pr^(1/3)`). Duty and outlet
//! temperatures come from effectiveness-NTU: the counterflow relation for a
//! single tube pass, the one-shell-pass relation for 2 or 4 passes. The
//! reported mean temperature difference is `Q / (U A)`, which coincides with
//! the log-mean temperature difference for counterflow. The hot stream is on
//! the shell side, the cold stream in the tubes; fouling is neglected.

use super::{MetricPolicy, Oracle, OracleError, TaskContext, Violation};
use crate::model::{Constraint, Design, Outcome};
use crate::rng::DetRng;
use crate::vectorize::{DesignSpace, Dim, DimValue};
use serde::Deserialize;
use serde_json::json;
use std::collections::BTreeMap;
use std::f64::consts::PI;

#[derive(Debug, Clone, Deserialize)]
pub struct StreamProps {
    pub m_dot_kg_s: f64,
    #[serde(rename = "t_in_K")]
    pub t_in_k: f64,
    #[serde(rename = "cp_J_kgK")]
    pub cp_j_kgk: f64,
    #[serde(rename = "mu_Pa_s")]
    pub mu_pa_s: f64,
    #[serde(rename = "k_W_mK")]
    pub k_w_mk: f64,
    pub rho_kg_m3: f64,
}

impl StreamProps {
    pub fn prandtl(&self) -> f64 {
        self.cp_j_kgk * self.mu_pa_s / self.k_w_mk
    }
    pub fn capacity_rate(&self) -> f64 {
        self.m_dot_kg_s * self.cp_j_kgk
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct ExchangerDuty {
    pub name: String,
    #[serde(rename = "wall_k_W_mK")]
    pub wall_k_w_mk: f64,
    pub hot: StreamProps,
    pub cold: StreamProps,
}

/// Effectiveness of the exchanger for the given NTU, capacity ratio, and
/// tube pass count (counterflow for one pass, one shell pass otherwise).
pub fn effectiveness(ntu: f64, cr: f64, n_passes: u32) -> f64 {
    if ntu <= 0.0 {
        return 0.0;
    }
    let eps = if n_passes <= 1 {
        if (1.0 - cr).abs() < 1e-9 {
            ntu / (1.0 + ntu)
        } else {
            let e = (-ntu * (1.0 - cr)).exp();
            (1.0 - e) / (1.0 - cr * e)
        }
    } else {
        let root = (1.0 + cr * cr).sqrt();
        let e = (-ntu * root).exp();
        2.0 / ((1.0 + cr) + root * (1.0 + e) / (1.0 - e))
    };
    eps.clamp(0.0, 1.0)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HeatxDesign {
    n_tubes: f64,
    tube_length_m: f64,
    tube_id_m: f64,
    tube_od_m: f64,
    baffle_spacing_m: f64,
    n_passes: f64,
}

/// Rating result for a geometry against a duty specification.
#[derive(Debug, Clone, Copy)]
pub struct Rating {
    pub duty_w: f64,
    pub hot_out_k: f64,
    pub cold_out_k: f64,
    pub effectiveness: f64,
    pub mean_dt_k: f64,
    pub ua_w_k: f64,
}

pub fn rate_exchanger(
    duty: &ExchangerDuty,
    n_tubes: usize,
    length: f64,
    d_i: f64,
    d_o: f64,
    baffle: f64,
    n_passes: u32,
) -> Rating {
    // Tube side: cold stream.
    let per_pass = n_tubes as f64 / n_passes as f64;
    let flow_area = per_pass * PI * d_i * d_i / 4.0;
    let g_t = duty.cold.m_dot_kg_s / flow_area;
    let re_t = g_t * d_i / duty.cold.mu_pa_s;
    let nu_t = dittus_boelter(re_t, duty.cold.prandtl());
    let h_i = nu_t * duty.cold.k_w_mk / d_i;

    // Shell side: hot stream, Kern's method.
    let pitch = 1.25 * d_o;
    let shell_d = 1.05 * pitch * (n_tubes as f64).sqrt() + 0.05;
    let cross_area = shell_d * baffle * (pitch - d_o) / pitch;
    let g_s = duty.hot.m_dot_kg_s / cross_area;
    let d_e = 4.0 * (3f64.sqrt() / 4.0 * pitch * pitch - PI * d_o * d_o / 8.0) / (PI * d_o / 2.0);
    let re_s = g_s * d_e / duty.hot.mu_pa_s;
    let nu_s = kern(re_s, duty.hot.prandtl());
    let h_o = nu_s * duty.hot.k_w_mk / d_e;

    // Overall coefficient referenced to the outer area.
    let wall = d_o * (d_o / d_i).ln() / (2.0 * duty.wall_k_w_mk);
    let u_o = 1.0 / (1.0 / h_o + wall + d_o / (d_i * h_i));
    let area = n_tubes as f64 * PI * d_o * length;
    let ua = u_o * area;

    let c_h = duty.hot.capacity_rate();
    let c_c = duty.cold.capacity_rate();
    let c_min = c_h.min(c_c);
    let c_max = c_h.max(c_c);
    let ntu = ua / c_min;
    let cr = c_min / c_max;
    let dt_in = duty.hot.t_in_k - duty.cold.t_in_k;
    if dt_in <= 0.0 {
        return Rating {
            duty_w: 0.0,
            hot_out_k: duty.hot.t_in_k,
            cold_out_k: duty.cold.t_in_k,
            effectiveness: 0.0,
            mean_dt_k: 0.0,
            ua_w_k: ua,
        };
    }
    let eps = effectiveness(ntu, cr, n_passes);
    let q = eps * c_min * dt_in;
    Rating {
        duty_w: q,
        hot_out_k: duty.hot.t_in_k - q / c_h,
        cold_out_k: duty.cold.t_in_k + q / c_c,
        effectiveness: eps,
        mean_dt_k: q / ua,
        ua_w_k: ua,
    }
}

fn dittus_boelter(re: f64, pr: f64) -> f64 {
    let turbulent = 0.023 * re.powf(0.8) * pr.powf(0.4);
    turbulent.max(3.66)
}

fn kern(re: f64, pr: f64) -> f64 {
    let turbulent = 0.36 * re.powf(0.55) * pr.powf(1.0 / 3.0);
    turbulent.max(3.66)
}

pub struct HeatxOracle {
    catalog: BTreeMap<String, Vec<ExchangerDuty>>,
}

impl HeatxOracle {
    pub fn new() -> Self {
        let systems: serde_json::Value =
            serde_json::from_str(super::SYSTEMS_JSON).expect("systems data file");
        let catalog =
            serde_json::from_value(systems["heatx"].clone()).expect("heatx stream catalog");
        HeatxOracle { catalog }
    }

    pub fn system(&self, ctx: &TaskContext) -> &ExchangerDuty {
        let entries = &self.catalog[&ctx.difficulty.to_string()];
        &entries[(crate::rng::derive_seed(ctx.seed, &[crate::rng::label("heatx-sys")])
            % entries.len() as u64) as usize]
    }

    fn parse(&self, design: &Design) -> Result<HeatxDesign, Vec<Violation>> {
        serde_json::from_value(serde_json::Value::Object(design.params.clone()))
            .map_err(|e| vec![Violation::new("params", e.to_string())])
    }
}

impl Default for HeatxOracle {
    fn default() -> Self {
        Self::new()
    }
}

impl Oracle for HeatxOracle {
    fn domain(&self) -> &'static str {
        "heatx"
    }

    fn blurb(&self) -> &'static str {
        "shell-and-tube heat exchanger rating"
    }

    fn metric_names(&self, _ctx: &TaskContext) -> Vec<String> {
        vec![
            "duty_W".into(),
            "hot_out_K".into(),
            "cold_out_K".into(),
            "effectiveness".into(),
            "lmtd_K".into(),
        ]
    }

    fn constraints(&self, _ctx: &TaskContext) -> Vec<Constraint> {
        vec![
            Constraint::range("n_tubes", 8.0, 400.0),
            Constraint::range("tube_length_m", 1.0, 8.0),
            Constraint::range("tube_id_m", 0.01, 0.025),
            Constraint::range("tube_od_m", 0.012, 0.03),
            Constraint::range("baffle_spacing_m", 0.05, 1.0),
            Constraint::enum_number("n_passes", &[1.0, 2.0, 4.0]),
        ]
    }

    fn schema(&self, _ctx: &TaskContext) -> serde_json::Value {
        json!({
            "n_tubes": "integer",
            "tube_length_m": "number",
            "tube_id_m": "number",
            "tube_od_m": "number (must exceed tube_id_m)",
            "baffle_spacing_m": "number",
            "n_passes": "one of [1, 2, 4]"
        })
    }

    fn system_summary(&self, ctx: &TaskContext) -> String {
        let s = self.system(ctx);
        format!(
            "Hot stream (shell side): {:.1} kg/s in at {:.1} K, cp {:.0} J/(kg K), mu {:.2e} Pa s, k {:.3} W/(m K), rho {:.0} kg/m3.\n\
             Cold stream (tube side): {:.1} kg/s in at {:.1} K, cp {:.0} J/(kg K), mu {:.2e} Pa s, k {:.3} W/(m K), rho {:.0} kg/m3.\n\
             Tube wall conductivity {:.0} W/(m K); triangular pitch 1.25 * tube_od_m.",
            s.hot.m_dot_kg_s, s.hot.t_in_k, s.hot.cp_j_kgk, s.hot.mu_pa_s, s.hot.k_w_mk, s.hot.rho_kg_m3,
            s.cold.m_dot_kg_s, s.cold.t_in_k, s.cold.cp_j_kgk, s.cold.mu_pa_s, s.cold.k_w_mk, s.cold.rho_kg_m3,
            s.wall_k_w_mk,
        )
    }

    fn validate(&self, _ctx: &TaskContext, design: &Design) -> Vec<Violation> {
        let d = match self.parse(design) {
            Ok(d) => d,
            Err(v) => return v,
        };
        let mut out = Vec::new();
        for (name, v) in [
            ("n_tubes", d.n_tubes),
            ("tube_length_m", d.tube_length_m),
            ("tube_id_m", d.tube_id_m),
            ("tube_od_m", d.tube_od_m),
            ("baffle_spacing_m", d.baffle_spacing_m),
            ("n_passes", d.n_passes),
        ] {
            if !v.is_finite() || v <= 0.0 {
                out.push(Violation::new(name, "must be a positive finite number"));
            }
        }
        if d.n_tubes.fract() != 0.0 {
            out.push(Violation::new("n_tubes", "must be an integer"));
        }
        if d.tube_od_m <= d.tube_id_m {
            out.push(Violation::new("tube_od_m", "outer diameter must exceed inner diameter"));
        }
        if ![1.0, 2.0, 4.0].contains(&d.n_passes) {
            out.push(Violation::new("n_passes", "must be 1, 2, or 4"));
        }
        out
    }

    fn simulate(&self, ctx: &TaskContext, design: &Design) -> Result<Outcome, OracleError> {
        let violations = self.validate(ctx, design);
        if !violations.is_empty() {
            return Err(OracleError::InvalidDesign(super::violations_text(&violations)));
        }
        let d = self.parse(design).expect("validated");
        let duty = self.system(ctx);
        let r = rate_exchanger(
            duty,
            d.n_tubes as usize,
            d.tube_length_m,
            d.tube_id_m,
            d.tube_od_m,
            d.baffle_spacing_m,
            d.n_passes as u32,
        );
        Ok(Outcome::new("heatx")
            .with("duty_W", r.duty_w)
            .with("hot_out_K", r.hot_out_k)
            .with("cold_out_K", r.cold_out_k)
            .with("effectiveness", r.effectiveness)
            .with("lmtd_K", r.mean_dt_k))
    }

    fn sample_design(&self, _ctx: &TaskContext, rng: &mut DetRng) -> Design {
        let id = rng.uniform(0.01, 0.025);
        let od = (id + rng.uniform(0.002, 0.005)).min(0.03);
        Design::new(
            "heatx",
            json!({
                "n_tubes": rng.int_range(8, 400),
                "tube_length_m": rng.uniform(1.0, 8.0),
                "tube_id_m": id,
                "tube_od_m": od,
                "baffle_spacing_m": rng.uniform(0.05, 1.0),
                "n_passes": *rng.choose(&[1, 2, 4]),
            }),
        )
    }

    fn space(&self, _ctx: &TaskContext) -> Option<DesignSpace> {
        Some(DesignSpace::new(
            vec![
                Dim::int("n_tubes", 8, 400),
                Dim::real("tube_length_m", 1.0, 8.0),
                Dim::real("tube_id_m", 0.01, 0.025),
                Dim::real("wall_m", 0.002, 0.005),
                Dim::real("baffle_spacing_m", 0.05, 1.0),
                Dim::cat("n_passes", 3),
            ],
            |v| {
                let id = v[2].as_real();
                let passes = [1, 2, 4][v[5].as_cat()];
                Design::new(
                    "heatx",
                    json!({
                        "n_tubes": v[0].as_real() as i64,
                        "tube_length_m": v[1].as_real(),
                        "tube_id_m": id,
                        "tube_od_m": (id + v[3].as_real()).min(0.03),
                        "baffle_spacing_m": v[4].as_real(),
                        "n_passes": passes,
                    }),
                )
            },
            |d| {
                let id = d.f64("tube_id_m")?;
                let od = d.f64("tube_od_m")?;
                let passes = d.f64("n_passes")? as i64;
                let pass_idx = [1, 2, 4].iter().position(|p| *p == passes)?;
                Some(vec![
                    DimValue::Real(d.f64("n_tubes")?),
                    DimValue::Real(d.f64("tube_length_m")?),
                    DimValue::Real(id),
                    DimValue::Real((od - id).clamp(0.002, 0.005)),
                    DimValue::Real(d.f64("baffle_spacing_m")?),
                    DimValue::Cat(pass_idx),
                ])
            },
        ))
    }

    fn metric_policy(&self, metric: &str) -> MetricPolicy {
        match metric {
            "effectiveness" => MetricPolicy::max_bound_floor(1e-4, 0.05),
            "duty_W" => MetricPolicy::max_bound_floor(1.0, 100.0),
            _ => MetricPolicy::default(),
        }
    }

    fn taskworthy(&self, outcome: &Outcome) -> bool {
        outcome.get("duty_W").unwrap_or(0.0) > 1.0
    }
}
