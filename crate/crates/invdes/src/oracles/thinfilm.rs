//! Thin-film coating oracle using the characteristic-matrix form of the
//! transfer matrix method for planar layered media.
//!
//! Indices are real (lossless, dispersionless) and come from the bundled
//! material table. For layer j with phase thickness
//! `delta = 2 pi n d cos(theta) / lambda` and admittance `eta = n cos(theta)`
//! (TE polarization), the characteristic matrix is
//! `[[cos d, i sin d / eta], [i eta sin d, cos d]]`; the stack reflectance is
//! `|((eta0 B - C) / (eta0 B + C))|^2` with `[B; C]` the matrix product
//! applied to `[1; eta_sub]`. Oblique incidence follows Snell's law and is
//! evaluated for the TE (s) polarization.

use super::{MetricPolicy, Oracle, OracleError, TaskContext, Violation};
use crate::model::{Constraint, Design, Difficulty, Outcome};
use crate::rng::{derive_seed, label, DetRng};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::json;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

#[derive(Debug, Clone, Deserialize)]
struct MaterialTable {
    #[allow(dead_code)]
    schema_version: u32,
    materials: BTreeMap<String, f64>,
    substrates: BTreeMap<String, f64>,
}

fn table() -> &'static MaterialTable {
    static TABLE: OnceLock<MaterialTable> = OnceLock::new();
    TABLE.get_or_init(|| serde_json::from_str(super::MATERIALS_JSON).expect("material table"))
}

/// Refractive index of a coating material, if known.
pub fn material_index(name: &str) -> Option<f64> {
    table().materials.get(name).copied()
}

#[derive(Debug, Clone, Copy)]
pub struct FilmLayer {
    pub index: f64,
    pub thickness_nm: f64,
}

/// Reflectance and transmittance of a lossless stack at one wavelength.
pub fn reflectance(
    ambient: f64,
    substrate: f64,
    layers: &[FilmLayer],
    wavelength_nm: f64,
    angle_rad: f64,
) -> (f64, f64) {
    let sin0 = angle_rad.sin() * ambient;
    let cos_in = |n: f64| -> f64 {
        let s = sin0 / n;
        (1.0 - s * s).max(0.0).sqrt()
    };
    let eta0 = ambient * cos_in(ambient);
    let eta_s = substrate * cos_in(substrate);

    // [B; C] = prod M_j [1; eta_s]
    let mut b = Complex64::new(1.0, 0.0);
    let mut c = Complex64::new(eta_s, 0.0);
    for layer in layers.iter().rev() {
        let cos_t = cos_in(layer.index);
        let eta = layer.index * cos_t;
        let delta = 2.0 * PI * layer.index * layer.thickness_nm * cos_t / wavelength_nm;
        let (s, co) = delta.sin_cos();
        let m00 = Complex64::new(co, 0.0);
        let m01 = Complex64::new(0.0, s / eta);
        let m10 = Complex64::new(0.0, s * eta);
        let nb = m00 * b + m01 * c;
        let nc = m10 * b + m00 * c;
        b = nb;
        c = nc;
    }
    let denom = eta0 * b + c;
    let r = (eta0 * b - c) / denom;
    let refl = r.norm_sqr().clamp(0.0, 1.0);
    let t = 2.0 * eta0 / denom;
    let trans = t.norm_sqr() * eta_s / eta0;
    (refl, trans)
}

/// Fixed evaluation configuration of one task.
#[derive(Debug, Clone)]
pub struct FilmSystem {
    pub eval_wavelengths_nm: Vec<f64>,
    pub band_nm: (f64, f64),
    pub band_points: usize,
    pub ambient: f64,
    pub substrate_name: String,
    pub substrate: f64,
    pub angle_deg: f64,
    pub max_layers: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerSpec {
    material: String,
    thickness_nm: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FilmDesign {
    layers: Vec<LayerSpec>,
}

pub struct ThinFilmOracle;

impl ThinFilmOracle {
    pub fn new() -> Self {
        ThinFilmOracle
    }

    pub fn system(&self, ctx: &TaskContext) -> FilmSystem {
        let t = table();
        let subs: Vec<(&String, &f64)> = t.substrates.iter().collect();
        let pick = derive_seed(ctx.seed, &[label("thinfilm-sys")]);
        let (eval, band, points, angle_choices, max_layers): (Vec<f64>, (f64, f64), usize, &[f64], usize) =
            match ctx.difficulty {
                Difficulty::L1 => (vec![550.0], (450.0, 650.0), 21, &[0.0], 3),
                Difficulty::L2 => (vec![450.0, 650.0], (420.0, 680.0), 27, &[0.0], 5),
                Difficulty::L3 => (vec![450.0, 550.0, 650.0], (400.0, 700.0), 31, &[0.0, 30.0], 8),
                Difficulty::L4 => (vec![450.0, 550.0, 650.0], (400.0, 700.0), 31, &[0.0, 30.0, 45.0], 12),
            };
        let (name, index) = subs[(pick % subs.len() as u64) as usize];
        let angle = angle_choices[((pick >> 8) % angle_choices.len() as u64) as usize];
        FilmSystem {
            eval_wavelengths_nm: eval,
            band_nm: band,
            band_points: points,
            ambient: 1.0,
            substrate_name: name.clone(),
            substrate: *index,
            angle_deg: angle,
            max_layers,
        }
    }

    fn parse(&self, design: &Design) -> Result<FilmDesign, Vec<Violation>> {
        serde_json::from_value(serde_json::Value::Object(design.params.clone()))
            .map_err(|e| vec![Violation::new("params", e.to_string())])
    }
}

impl Default for ThinFilmOracle {
    fn default() -> Self {
        Self::new()
    }
}

impl Oracle for ThinFilmOracle {
    fn domain(&self) -> &'static str {
        "thinfilm"
    }

    fn blurb(&self) -> &'static str {
        "optical coating reflectance via the transfer matrix method"
    }

    fn metric_names(&self, ctx: &TaskContext) -> Vec<String> {
        let sys = self.system(ctx);
        let mut names: Vec<String> =
            sys.eval_wavelengths_nm.iter().map(|w| format!("r_{}", *w as u64)).collect();
        names.push("r_band_avg".into());
        names
    }

    fn constraints(&self, ctx: &TaskContext) -> Vec<Constraint> {
        let sys = self.system(ctx);
        let materials: Vec<&str> = table().materials.keys().map(|s| s.as_str()).collect();
        vec![
            Constraint::max_count("layers", sys.max_layers),
            Constraint::range("layers[].thickness_nm", 1.0, 2000.0),
            Constraint::enum_token("layers[].material", &materials),
        ]
    }

    fn schema(&self, ctx: &TaskContext) -> serde_json::Value {
        let sys = self.system(ctx);
        let materials: Vec<&str> = table().materials.keys().map(|s| s.as_str()).collect();
        json!({
            "layers": [{
                "material": format!("one of: {}", materials.join(", ")),
                "thickness_nm": "number in [1, 2000]"
            }],
            "_note": format!("0 to {} layers, listed from the ambient side toward the substrate", sys.max_layers),
        })
    }

    fn system_summary(&self, ctx: &TaskContext) -> String {
        let sys = self.system(ctx);
        let t = table();
        let mats: Vec<String> =
            t.materials.iter().map(|(m, n)| format!("{m} (n={n})")).collect();
        format!(
            "Ambient index 1.0; substrate {} (n={}); incidence angle {} deg (TE polarization).\n\
             Reflectance is evaluated at {:?} nm and band-averaged over [{}, {}] nm.\n\
             Materials: {}.",
            sys.substrate_name,
            sys.substrate,
            sys.angle_deg,
            sys.eval_wavelengths_nm,
            sys.band_nm.0,
            sys.band_nm.1,
            mats.join(", ")
        )
    }

    fn validate(&self, ctx: &TaskContext, design: &Design) -> Vec<Violation> {
        let d = match self.parse(design) {
            Ok(d) => d,
            Err(v) => return v,
        };
        let sys = self.system(ctx);
        let mut out = Vec::new();
        if d.layers.len() > sys.max_layers {
            out.push(Violation::new(
                "layers",
                format!("at most {} layers for this task", sys.max_layers),
            ));
        }
        for (i, layer) in d.layers.iter().enumerate() {
            let path = format!("layers[{i}]");
            if material_index(&layer.material).is_none() {
                out.push(Violation::new(&path, format!("unknown material `{}`", layer.material)));
            }
            if !layer.thickness_nm.is_finite()
                || !(1.0..=2000.0).contains(&layer.thickness_nm)
            {
                out.push(Violation::new(&path, "thickness must lie in [1, 2000] nm"));
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
        let sys = self.system(ctx);
        let layers: Vec<FilmLayer> = d
            .layers
            .iter()
            .map(|l| FilmLayer {
                index: material_index(&l.material).expect("validated"),
                thickness_nm: l.thickness_nm,
            })
            .collect();
        let angle = sys.angle_deg.to_radians();
        let mut out = Outcome::new("thinfilm");
        for w in &sys.eval_wavelengths_nm {
            let (r, _) = reflectance(sys.ambient, sys.substrate, &layers, *w, angle);
            out = out.with(&format!("r_{}", *w as u64), r);
        }
        let mut avg = 0.0;
        for i in 0..sys.band_points {
            let w = sys.band_nm.0
                + (sys.band_nm.1 - sys.band_nm.0) * i as f64 / (sys.band_points - 1) as f64;
            let (r, _) = reflectance(sys.ambient, sys.substrate, &layers, w, angle);
            avg += r;
        }
        out = out.with("r_band_avg", avg / sys.band_points as f64);
        Ok(out)
    }

    fn sample_design(&self, ctx: &TaskContext, rng: &mut DetRng) -> Design {
        let sys = self.system(ctx);
        let materials: Vec<&String> = table().materials.keys().collect();
        let n = rng.int_range(0, sys.max_layers as i64) as usize;
        let layers: Vec<serde_json::Value> = (0..n)
            .map(|_| {
                json!({
                    "material": rng.choose(&materials),
                    "thickness_nm": rng.uniform(1.0, 2000.0),
                })
            })
            .collect();
        Design::new("thinfilm", json!({ "layers": layers }))
    }

    fn metric_policy(&self, _metric: &str) -> MetricPolicy {
        MetricPolicy::max_bound_floor(1e-4, 0.01)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TaskKind;

    #[test]
    fn bare_substrate_is_fresnel() {
        let (r, t) = reflectance(1.0, 1.5, &[], 550.0, 0.0);
        assert!((r - 0.04).abs() < 1e-9, "R = {r}");
        assert!((r + t - 1.0).abs() < 1e-9);
    }

    #[test]
    fn index_matched_layer_is_invisible() {
        let layers = [FilmLayer { index: 1.0, thickness_nm: 300.0 }];
        let (r, _) = reflectance(1.0, 1.0, &layers, 550.0, 0.0);
        assert!(r < 1e-12, "R = {r}");
    }

    #[test]
    fn quarter_wave_antireflection() {
        // R = ((n0 ns - n1^2) / (n0 ns + n1^2))^2 at the design wavelength.
        let n1 = 1.38;
        let ns = 1.52;
        let layers = [FilmLayer { index: n1, thickness_nm: 550.0 / (4.0 * n1) }];
        let (r, _) = reflectance(1.0, ns, &layers, 550.0, 0.0);
        let expect = ((ns - n1 * n1) / (ns + n1 * n1)).powi(2);
        assert!((r - expect).abs() < 1e-9, "R = {r}, expect {expect}");
        assert!((expect - 0.0126).abs() < 1e-3);
    }

    #[test]
    fn energy_conserved_for_lossless_stacks() {
        let mut rng = DetRng::new(12);
        let oracle = ThinFilmOracle::new();
        let ctx = TaskContext { difficulty: Difficulty::L4, seed: 3, kind: TaskKind::DeNovo };
        let sys = oracle.system(&ctx);
        for _ in 0..40 {
            let d = oracle.sample_design(&ctx, &mut rng);
            let parsed: FilmDesign =
                serde_json::from_value(serde_json::Value::Object(d.params.clone())).unwrap();
            let layers: Vec<FilmLayer> = parsed
                .layers
                .iter()
                .map(|l| FilmLayer {
                    index: material_index(&l.material).unwrap(),
                    thickness_nm: l.thickness_nm,
                })
                .collect();
            for w in [400.0, 550.0, 700.0] {
                let (r, t) =
                    reflectance(sys.ambient, sys.substrate, &layers, w, sys.angle_deg.to_radians());
                assert!((0.0..=1.0).contains(&r));
                assert!((r + t - 1.0).abs() < 1e-9, "R+T = {}", r + t);
            }
        }
    }

    #[test]
    fn reflectance_is_continuous_in_thickness() {
        let ns = 1.52;
        let mut prev = None;
        for i in 0..=2000 {
            let d = 1.0 + i as f64;
            let layers = [FilmLayer { index: 2.35, thickness_nm: d }];
            let (r, _) = reflectance(1.0, ns, &layers, 550.0, 0.0);
            assert!(r.is_finite());
            if let Some(p) = prev {
                let delta: f64 = r - p;
                assert!(delta.abs() < 0.05, "jump at {d}: {delta}");
            }
            prev = Some(r);
        }
    }

    #[test]
    fn oblique_incidence_stays_physical() {
        let layers = [
            FilmLayer { index: 1.38, thickness_nm: 99.0 },
            FilmLayer { index: 2.35, thickness_nm: 120.0 },
        ];
        for deg in [0.0, 15.0, 30.0, 45.0, 60.0] {
            let (r, t) = reflectance(1.0, 1.52, &layers, 550.0, (deg as f64).to_radians());
            assert!((0.0..=1.0).contains(&r));
            assert!((r + t - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn unknown_material_is_a_validation_error() {
        let oracle = ThinFilmOracle::new();
        let ctx = TaskContext { difficulty: Difficulty::L1, seed: 0, kind: TaskKind::DeNovo };
        let d = Design::new(
            "thinfilm",
            json!({"layers": [{"material": "unobtainium", "thickness_nm": 100.0}]}),
        );
        assert!(!oracle.validate(&ctx, &d).is_empty());
        assert!(oracle.simulate(&ctx, &d).is_err());
    }

    #[test]
    fn metric_names_follow_level_config() {
        let oracle = ThinFilmOracle::new();
        let ctx = TaskContext { difficulty: Difficulty::L3, seed: 9, kind: TaskKind::DeNovo };
        let names = oracle.metric_names(&ctx);
        assert_eq!(names, vec!["r_450", "r_550", "r_650", "r_band_avg"]);
    }
}
