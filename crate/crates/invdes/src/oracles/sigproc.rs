//! IIR digital filter design oracle.
//!
//! Filters are designed in zero-pole-gain form: closed-form analog lowpass
//! prototypes (Butterworth, Chebyshev I, Chebyshev II), analog frequency
//! transforms to lowpass/highpass/bandpass/bandstop, then the bilinear map
//! `s = (z - 1)/(z + 1)` with cutoffs prewarped as `tan(pi f / 2)` (f in
//! units of the Nyquist frequency). The frequency response is evaluated
//! directly from the digital roots on a 4096-point grid; no polynomial
//! expansion, so high orders stay numerically clean.
//!
//! Metrics: the -3 dB cutoff at the primary band edge, stopband attenuation
//! at a fixed probe (2x cutoff for lowpass, cutoff/2 for highpass, band
//! edges for bandpass, band center for bandstop), passband ripple, the
//! -3 dB to -20 dB transition width, and group-delay variation over the
//! passband (unwrapped phase, central differences). The elliptic family is
//! not implemented and reports an unsupported-feature error.

use super::{MetricPolicy, Oracle, OracleError, TaskContext, Violation};
use crate::model::{Constraint, Design, Difficulty, Outcome};
use crate::rng::DetRng;
use crate::vectorize::{DesignSpace, Dim, DimValue};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::json;
use std::f64::consts::PI;

pub const FAMILIES: [&str; 3] = ["butterworth", "chebyshev1", "chebyshev2"];
pub const RESPONSES: [&str; 4] = ["lowpass", "highpass", "bandpass", "bandstop"];
const GRID: usize = 4096;
const DB3: f64 = 3.010_299_956_639_812;

/// Zero-pole-gain filter representation.
#[derive(Debug, Clone)]
pub struct Zpk {
    pub zeros: Vec<Complex64>,
    pub poles: Vec<Complex64>,
    pub gain: f64,
}

fn real_prod_neg(roots: &[Complex64]) -> f64 {
    roots.iter().fold(Complex64::new(1.0, 0.0), |acc, r| acc * (-r)).re
}

/// Analog Butterworth lowpass prototype, cutoff 1 rad/s.
pub fn butterworth_proto(order: usize) -> Zpk {
    let poles: Vec<Complex64> = (1..=order)
        .map(|k| {
            let theta = PI * (2 * k + order - 1) as f64 / (2 * order) as f64;
            Complex64::from_polar(1.0, theta)
        })
        .collect();
    let gain = real_prod_neg(&poles);
    Zpk { zeros: vec![], poles, gain }
}

/// Analog Chebyshev type I prototype: equiripple passband, ripple in dB.
pub fn cheby1_proto(order: usize, ripple_db: f64) -> Zpk {
    let eps = (10f64.powf(ripple_db / 10.0) - 1.0).sqrt();
    let mu = (1.0 / eps).asinh() / order as f64;
    let poles: Vec<Complex64> = (1..=order)
        .map(|k| {
            let theta = PI * (2 * k - 1) as f64 / (2 * order) as f64;
            Complex64::new(-mu.sinh() * theta.sin(), mu.cosh() * theta.cos())
        })
        .collect();
    let mut gain = real_prod_neg(&poles);
    if order % 2 == 0 {
        gain /= (1.0 + eps * eps).sqrt();
    }
    Zpk { zeros: vec![], poles, gain }
}

/// Analog Chebyshev type II (inverse) prototype: equiripple stopband with
/// the given attenuation in dB, stopband edge at 1 rad/s.
pub fn cheby2_proto(order: usize, atten_db: f64) -> Zpk {
    let eps = 1.0 / (10f64.powf(atten_db / 10.0) - 1.0).sqrt();
    let mu = (1.0 / eps).asinh() / order as f64;
    let mut zeros = Vec::new();
    let mut poles = Vec::new();
    for k in 1..=order {
        let theta = PI * (2 * k - 1) as f64 / (2 * order) as f64;
        let p = Complex64::new(-mu.sinh() * theta.sin(), mu.cosh() * theta.cos());
        poles.push(p.inv());
        if theta.cos().abs() > 1e-12 {
            zeros.push(Complex64::new(0.0, 1.0 / theta.cos()));
        }
    }
    let gain = real_prod_neg(&poles) / real_prod_neg(&zeros);
    Zpk { zeros, poles, gain }
}

/// Lowpass-to-lowpass: rescale cutoff to `w0`.
pub fn lp_to_lp(proto: &Zpk, w0: f64) -> Zpk {
    let degree = proto.poles.len() - proto.zeros.len();
    Zpk {
        zeros: proto.zeros.iter().map(|z| z * w0).collect(),
        poles: proto.poles.iter().map(|p| p * w0).collect(),
        gain: proto.gain * w0.powi(degree as i32),
    }
}

/// Lowpass-to-highpass at cutoff `w0`.
pub fn lp_to_hp(proto: &Zpk, w0: f64) -> Zpk {
    let degree = proto.poles.len() - proto.zeros.len();
    let mut zeros: Vec<Complex64> = proto.zeros.iter().map(|z| w0 / z).collect();
    let poles: Vec<Complex64> = proto.poles.iter().map(|p| w0 / p).collect();
    let gain = proto.gain * (real_prod_neg(&proto.zeros) / real_prod_neg(&proto.poles));
    zeros.extend(std::iter::repeat(Complex64::new(0.0, 0.0)).take(degree));
    Zpk { zeros, poles, gain }
}

fn bp_roots(roots: &[Complex64], w0: f64, bw: f64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(roots.len() * 2);
    for r in roots {
        let half = r * bw / 2.0;
        let disc = (half * half - w0 * w0).sqrt();
        out.push(half + disc);
        out.push(half - disc);
    }
    out
}

/// Lowpass-to-bandpass with center `w0` and bandwidth `bw`.
pub fn lp_to_bp(proto: &Zpk, w0: f64, bw: f64) -> Zpk {
    let degree = proto.poles.len() - proto.zeros.len();
    let mut zeros = bp_roots(&proto.zeros, w0, bw);
    let poles = bp_roots(&proto.poles, w0, bw);
    zeros.extend(std::iter::repeat(Complex64::new(0.0, 0.0)).take(degree));
    Zpk { zeros, poles, gain: proto.gain * bw.powi(degree as i32) }
}

/// Lowpass-to-bandstop with center `w0` and bandwidth `bw`.
pub fn lp_to_bs(proto: &Zpk, w0: f64, bw: f64) -> Zpk {
    let degree = proto.poles.len() - proto.zeros.len();
    let inv = |roots: &[Complex64]| -> Vec<Complex64> {
        roots.iter().map(|r| bw / (2.0 * r)).collect()
    };
    let mut zeros = bp_roots(&inv(&proto.zeros), w0, bw);
    let poles = bp_roots(&inv(&proto.poles), w0, bw);
    for _ in 0..degree {
        zeros.push(Complex64::new(0.0, w0));
        zeros.push(Complex64::new(0.0, -w0));
    }
    let gain = proto.gain * (real_prod_neg(&proto.zeros) / real_prod_neg(&proto.poles));
    Zpk { zeros, poles, gain }
}

/// Bilinear transform `s = (z-1)/(z+1)` from the analog plane to digital.
pub fn bilinear(analog: &Zpk) -> Zpk {
    let degree = analog.poles.len() - analog.zeros.len();
    let map = |r: &Complex64| (1.0 + r) / (1.0 - r);
    let mut zeros: Vec<Complex64> = analog.zeros.iter().map(map).collect();
    let poles: Vec<Complex64> = analog.poles.iter().map(map).collect();
    let num: Complex64 = analog.zeros.iter().fold(Complex64::new(1.0, 0.0), |a, z| a * (1.0 - z));
    let den: Complex64 = analog.poles.iter().fold(Complex64::new(1.0, 0.0), |a, p| a * (1.0 - p));
    zeros.extend(std::iter::repeat(Complex64::new(-1.0, 0.0)).take(degree));
    Zpk { zeros, poles, gain: analog.gain * (num / den).re }
}

/// Complex response at normalized frequency `f` (fraction of Nyquist).
pub fn response_at(zpk: &Zpk, f: f64) -> Complex64 {
    let z = Complex64::from_polar(1.0, PI * f);
    let mut h = Complex64::new(zpk.gain, 0.0);
    for zero in &zpk.zeros {
        h *= z - zero;
    }
    for pole in &zpk.poles {
        h /= z - pole;
    }
    h
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterDesign {
    pub family: String,
    pub order: f64,
    pub response: String,
    pub cutoffs: Vec<f64>,
    #[serde(default)]
    pub ripple_db: Option<f64>,
    #[serde(default)]
    pub attenuation_db: Option<f64>,
}

/// Designs the digital filter in zpk form.
pub fn design_zpk(d: &FilterDesign) -> Result<Zpk, OracleError> {
    let order = d.order as usize;
    let proto = match d.family.as_str() {
        "butterworth" => butterworth_proto(order),
        "chebyshev1" => cheby1_proto(order, d.ripple_db.unwrap_or(1.0)),
        "chebyshev2" => cheby2_proto(order, d.attenuation_db.unwrap_or(40.0)),
        "elliptic" => {
            return Err(OracleError::Unsupported(
                "elliptic family is not implemented; use butterworth or chebyshev1/2".into(),
            ))
        }
        other => return Err(OracleError::InvalidDesign(format!("unknown family `{other}`"))),
    };
    let warp = |f: f64| (PI * f / 2.0).tan();
    let analog = match d.response.as_str() {
        "lowpass" => lp_to_lp(&proto, warp(d.cutoffs[0])),
        "highpass" => lp_to_hp(&proto, warp(d.cutoffs[0])),
        "bandpass" | "bandstop" => {
            let (w1, w2) = (warp(d.cutoffs[0]), warp(d.cutoffs[1]));
            let (w0, bw) = ((w1 * w2).sqrt(), w2 - w1);
            if d.response == "bandpass" {
                lp_to_bp(&proto, w0, bw)
            } else {
                lp_to_bs(&proto, w0, bw)
            }
        }
        other => return Err(OracleError::InvalidDesign(format!("unknown response `{other}`"))),
    };
    Ok(bilinear(&analog))
}

/// Frequency-response metrics of a designed filter.
#[derive(Debug, Clone, Copy)]
pub struct FilterMetrics {
    pub cutoff_minus3db: f64,
    pub stopband_attenuation_db: f64,
    pub passband_ripple_db: f64,
    pub transition_bandwidth: f64,
    pub group_delay_variation: f64,
}

pub fn measure(d: &FilterDesign, zpk: &Zpk) -> FilterMetrics {
    let fs: Vec<f64> =
        (0..GRID).map(|i| 1e-4 + (0.9999 - 1e-4) * i as f64 / (GRID - 1) as f64).collect();
    let resp: Vec<Complex64> = fs.iter().map(|f| response_at(zpk, *f)).collect();
    let mags_db: Vec<f64> = resp.iter().map(|h| 20.0 * h.norm().max(1e-300).log10()).collect();
    let peak_db = mags_db.iter().copied().fold(f64::MIN, f64::max);

    // Primary band edge: first crossing of peak - 3 dB moving out of the band
    // containing the peak.
    let peak_idx = mags_db
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap_or(0);
    let level3 = peak_db - DB3;
    let interp_cross = |i0: usize, i1: usize, level: f64| -> f64 {
        let (m0, m1) = (mags_db[i0], mags_db[i1]);
        if (m1 - m0).abs() < 1e-12 {
            fs[i1]
        } else {
            fs[i0] + (fs[i1] - fs[i0]) * (level - m0) / (m1 - m0)
        }
    };
    // Primary band edge: lowpass and bandstop descend into the stopband
    // with rising frequency; highpass and bandpass cross their lower edge.
    let descending = matches!(d.response.as_str(), "lowpass" | "bandstop");
    // For bandstop the relevant peak is the low-side passband, not the
    // global maximum (both passbands sit near 0 dB).
    let start_idx = if d.response == "bandstop" {
        let center = (d.cutoffs[0] * d.cutoffs[1]).sqrt();
        mags_db
            .iter()
            .enumerate()
            .take_while(|(i, _)| fs[*i] < center)
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i)
            .unwrap_or(0)
    } else {
        peak_idx
    };
    let mut cutoff = if descending { fs[GRID - 1] } else { fs[0] };
    if descending {
        for i in start_idx..GRID - 1 {
            if mags_db[i] >= level3 && mags_db[i + 1] < level3 {
                cutoff = interp_cross(i, i + 1, level3);
                break;
            }
        }
    } else {
        for i in (1..=start_idx).rev() {
            if mags_db[i] >= level3 && mags_db[i - 1] < level3 {
                cutoff = interp_cross(i, i - 1, level3);
                break;
            }
        }
    }

    // Stopband probe(s).
    let atten_at = |f: f64| -> f64 {
        let h = response_at(zpk, f.clamp(1e-4, 0.9999));
        peak_db - 20.0 * h.norm().max(1e-300).log10()
    };
    let stopband_attenuation_db = match d.response.as_str() {
        "lowpass" => {
            let fc = d.cutoffs[0];
            atten_at((2.0 * fc).min(fc + 0.5 * (1.0 - fc)))
        }
        "highpass" => atten_at(d.cutoffs[0] / 2.0),
        "bandpass" => {
            let (f1, f2) = (d.cutoffs[0], d.cutoffs[1]);
            atten_at(f1 / 2.0).min(atten_at((2.0 * f2).min(f2 + 0.5 * (1.0 - f2))))
        }
        _ => atten_at((d.cutoffs[0] * d.cutoffs[1]).sqrt()),
    };

    // Passband region(s) for ripple and group delay.
    let regions = passband_regions(d, &fs, &mags_db, peak_db);
    let mut pass_min = f64::MAX;
    let mut pass_max = f64::MIN;
    for (lo, hi) in &regions {
        for i in 0..GRID {
            if fs[i] >= *lo && fs[i] <= *hi {
                pass_min = pass_min.min(mags_db[i]);
                pass_max = pass_max.max(mags_db[i]);
            }
        }
    }
    let passband_ripple_db =
        if pass_min == f64::MAX { 0.0 } else { (pass_max - pass_min).max(0.0) };

    // Transition width from -3 dB to -20 dB at the primary edge.
    let level20 = peak_db - 20.0;
    let mut f20 = if descending { fs[GRID - 1] } else { fs[0] };
    if descending {
        for i in start_idx..GRID - 1 {
            if mags_db[i] >= level20 && mags_db[i + 1] < level20 {
                f20 = interp_cross(i, i + 1, level20);
                break;
            }
        }
    } else {
        for i in (1..=start_idx).rev() {
            if mags_db[i] >= level20 && mags_db[i - 1] < level20 {
                f20 = interp_cross(i, i - 1, level20);
                break;
            }
        }
    }
    let transition_bandwidth = (f20 - cutoff).abs();

    // Group delay -dphi/domega (omega = pi f), unwrapped phase, central
    // differences; variation over the passband regions.
    let mut phases: Vec<f64> = resp.iter().map(|h| h.arg()).collect();
    for i in 1..GRID {
        let mut delta = phases[i] - phases[i - 1];
        while delta > PI {
            delta -= 2.0 * PI;
        }
        while delta < -PI {
            delta += 2.0 * PI;
        }
        phases[i] = phases[i - 1] + delta;
    }
    let domega = PI * (fs[1] - fs[0]);
    let mut gd_min = f64::MAX;
    let mut gd_max = f64::MIN;
    for i in 1..GRID - 1 {
        let f = fs[i];
        if regions.iter().any(|(lo, hi)| f >= *lo && f <= *hi) {
            let gd = -(phases[i + 1] - phases[i - 1]) / (2.0 * domega);
            gd_min = gd_min.min(gd);
            gd_max = gd_max.max(gd);
        }
    }
    let group_delay_variation = if gd_min == f64::MAX { 0.0 } else { (gd_max - gd_min).max(0.0) };

    FilterMetrics {
        cutoff_minus3db: cutoff,
        stopband_attenuation_db,
        passband_ripple_db,
        transition_bandwidth,
        group_delay_variation,
    }
}

/// Passband intervals in normalized frequency. Butterworth and Chebyshev I
/// have their passband bounded by the design cutoffs; Chebyshev II's cutoff
/// parameter is the stopband edge, so its passband is taken as the measured
/// -3 dB region around the peak, shrunk 20% on the transition side.
fn passband_regions(
    d: &FilterDesign,
    fs: &[f64],
    mags_db: &[f64],
    peak_db: f64,
) -> Vec<(f64, f64)> {
    if d.family != "chebyshev2" {
        return match d.response.as_str() {
            "lowpass" => vec![(fs[0], d.cutoffs[0])],
            "highpass" => vec![(d.cutoffs[0], *fs.last().unwrap())],
            "bandpass" => vec![(d.cutoffs[0], d.cutoffs[1])],
            _ => vec![(fs[0], d.cutoffs[0]), (d.cutoffs[1], *fs.last().unwrap())],
        };
    }
    let level = peak_db - DB3;
    let peak_idx = mags_db
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut lo = peak_idx;
    while lo > 0 && mags_db[lo - 1] >= level {
        lo -= 1;
    }
    let mut hi = peak_idx;
    while hi + 1 < mags_db.len() && mags_db[hi + 1] >= level {
        hi += 1;
    }
    let (flo, fhi) = (fs[lo], fs[hi]);
    let width = fhi - flo;
    match d.response.as_str() {
        "lowpass" => vec![(flo, fhi - 0.2 * width)],
        "highpass" => vec![(flo + 0.2 * width, fhi)],
        _ => vec![(flo + 0.1 * width, fhi - 0.1 * width)],
    }
}

pub struct SigProcOracle;

impl SigProcOracle {
    pub fn new() -> Self {
        SigProcOracle
    }

    fn allowed_responses(level: Difficulty) -> &'static [&'static str] {
        match level {
            Difficulty::L1 => &RESPONSES[..1],
            Difficulty::L2 => &RESPONSES[..2],
            Difficulty::L3 => &RESPONSES[..3],
            Difficulty::L4 => &RESPONSES,
        }
    }

    fn max_order(level: Difficulty) -> usize {
        match level {
            Difficulty::L1 => 6,
            Difficulty::L2 | Difficulty::L3 => 8,
            Difficulty::L4 => 10,
        }
    }

    fn parse(&self, ctx: &TaskContext, design: &Design) -> Result<FilterDesign, Vec<Violation>> {
        let d: FilterDesign =
            serde_json::from_value(serde_json::Value::Object(design.params.clone()))
                .map_err(|e| vec![Violation::new("params", e.to_string())])?;
        let mut out = Vec::new();
        if !FAMILIES.contains(&d.family.as_str()) {
            out.push(Violation::new(
                "family",
                if d.family == "elliptic" {
                    "elliptic is not supported by this task's oracle".to_string()
                } else {
                    format!("unknown family `{}`", d.family)
                },
            ));
        }
        if d.order.fract() != 0.0 || !(1.0..=Self::max_order(ctx.difficulty) as f64).contains(&d.order)
        {
            out.push(Violation::new(
                "order",
                format!("must be an integer in [1, {}]", Self::max_order(ctx.difficulty)),
            ));
        }
        let allowed = Self::allowed_responses(ctx.difficulty);
        if !allowed.contains(&d.response.as_str()) {
            out.push(Violation::new(
                "response",
                format!("must be one of {allowed:?} for this task"),
            ));
        }
        let want = if matches!(d.response.as_str(), "bandpass" | "bandstop") { 2 } else { 1 };
        if d.cutoffs.len() != want {
            out.push(Violation::new("cutoffs", format!("{} cutoff(s) required", want)));
        } else {
            for c in &d.cutoffs {
                if !c.is_finite() || !(0.05..=0.95).contains(c) {
                    out.push(Violation::new("cutoffs", "cutoffs must lie in [0.05, 0.95]"));
                }
            }
            if want == 2 && d.cutoffs.len() == 2 && d.cutoffs[1] < d.cutoffs[0] + 0.05 {
                out.push(Violation::new("cutoffs", "upper cutoff must exceed lower by >= 0.05"));
            }
        }
        if let Some(r) = d.ripple_db {
            if !(0.1..=3.0).contains(&r) {
                out.push(Violation::new("ripple_db", "must lie in [0.1, 3.0]"));
            }
        }
        if let Some(a) = d.attenuation_db {
            if !(20.0..=80.0).contains(&a) {
                out.push(Violation::new("attenuation_db", "must lie in [20, 80]"));
            }
        }
        if out.is_empty() {
            Ok(d)
        } else {
            Err(out)
        }
    }
}

impl Default for SigProcOracle {
    fn default() -> Self {
        Self::new()
    }
}

impl Oracle for SigProcOracle {
    fn domain(&self) -> &'static str {
        "sigproc"
    }

    fn blurb(&self) -> &'static str {
        "IIR digital filter design to frequency-response targets"
    }

    fn metric_names(&self, _ctx: &TaskContext) -> Vec<String> {
        vec![
            "cutoff_minus3db".into(),
            "stopband_attenuation_db".into(),
            "passband_ripple_db".into(),
            "transition_bandwidth".into(),
            "group_delay_variation".into(),
        ]
    }

    fn constraints(&self, ctx: &TaskContext) -> Vec<Constraint> {
        vec![
            Constraint::enum_token("family", &FAMILIES),
            Constraint::enum_token("response", Self::allowed_responses(ctx.difficulty)),
            Constraint::range("order", 1.0, Self::max_order(ctx.difficulty) as f64),
            Constraint::range("cutoffs[]", 0.05, 0.95),
            Constraint::max_count("cutoffs", 2),
            Constraint::range("ripple_db", 0.1, 3.0),
            Constraint::range("attenuation_db", 20.0, 80.0),
        ]
    }

    fn schema(&self, ctx: &TaskContext) -> serde_json::Value {
        json!({
            "family": "one of butterworth, chebyshev1, chebyshev2",
            "order": format!("integer in [1, {}]", Self::max_order(ctx.difficulty)),
            "response": format!("one of {:?}", Self::allowed_responses(ctx.difficulty)),
            "cutoffs": "1 normalized frequency (2 ascending for bandpass/bandstop), each in [0.05, 0.95] of Nyquist",
            "ripple_db": "optional, chebyshev1 passband ripple (default 1.0)",
            "attenuation_db": "optional, chebyshev2 stopband attenuation (default 40)"
        })
    }

    fn system_summary(&self, _ctx: &TaskContext) -> String {
        "Frequencies are normalized to the Nyquist frequency. Metrics come from the \
         magnitude/phase response on a 4096-point grid: -3 dB cutoff at the primary band edge, \
         stopband attenuation at the standard probe (2x cutoff for lowpass, cutoff/2 for \
         highpass, outer edges for bandpass, band center for bandstop), passband ripple, \
         -3 dB to -20 dB transition width, and group-delay variation (samples) over the passband."
            .into()
    }

    fn validate(&self, ctx: &TaskContext, design: &Design) -> Vec<Violation> {
        match self.parse(ctx, design) {
            Ok(_) => vec![],
            Err(v) => v,
        }
    }

    fn simulate(&self, ctx: &TaskContext, design: &Design) -> Result<Outcome, OracleError> {
        // Surface the unsupported-family error distinctly from plain schema
        // violations.
        if design.get("family").and_then(|f| f.as_str()) == Some("elliptic") {
            return Err(OracleError::Unsupported(
                "elliptic family is not implemented; use butterworth or chebyshev1/2".into(),
            ));
        }
        let d = self
            .parse(ctx, design)
            .map_err(|v| OracleError::InvalidDesign(super::violations_text(&v)))?;
        let zpk = design_zpk(&d)?;
        let m = measure(&d, &zpk);
        Ok(Outcome::new("sigproc")
            .with("cutoff_minus3db", m.cutoff_minus3db)
            .with("stopband_attenuation_db", m.stopband_attenuation_db)
            .with("passband_ripple_db", m.passband_ripple_db)
            .with("transition_bandwidth", m.transition_bandwidth)
            .with("group_delay_variation", m.group_delay_variation))
    }

    fn sample_design(&self, ctx: &TaskContext, rng: &mut DetRng) -> Design {
        let family = *rng.choose(&FAMILIES);
        let response = *rng.choose(Self::allowed_responses(ctx.difficulty));
        let order = rng.int_range(1, Self::max_order(ctx.difficulty) as i64);
        let cutoffs: Vec<f64> = if matches!(response, "bandpass" | "bandstop") {
            let f1 = rng.uniform(0.05, 0.80);
            let f2 = rng.uniform(f1 + 0.05, (f1 + 0.6).min(0.95));
            vec![f1, f2]
        } else {
            vec![rng.uniform(0.05, 0.95)]
        };
        let mut params = json!({
            "family": family,
            "order": order,
            "response": response,
            "cutoffs": cutoffs,
        });
        if family == "chebyshev1" {
            params["ripple_db"] = json!(rng.uniform(0.1, 3.0));
        }
        if family == "chebyshev2" {
            params["attenuation_db"] = json!(rng.uniform(20.0, 80.0));
        }
        Design::new("sigproc", params)
    }

    fn space(&self, ctx: &TaskContext) -> Option<DesignSpace> {
        let responses: Vec<String> =
            Self::allowed_responses(ctx.difficulty).iter().map(|s| s.to_string()).collect();
        let responses_dec = responses.clone();
        let max_order = Self::max_order(ctx.difficulty);
        Some(DesignSpace::new(
            vec![
                Dim::cat("family", 3),
                Dim::cat("response", responses.len()),
                Dim::int("order", 1, max_order as i64),
                Dim::real("cutoff_lo", 0.05, 0.80),
                Dim::real("band_width", 0.05, 0.5),
                Dim::real("ripple_db", 0.1, 3.0),
                Dim::real("attenuation_db", 20.0, 80.0),
            ],
            move |v| {
                let family = FAMILIES[v[0].as_cat()];
                let response = responses_dec[v[1].as_cat()].clone();
                let lo = v[3].as_real();
                let cutoffs: Vec<f64> = if response == "bandpass" || response == "bandstop" {
                    vec![lo, (lo + v[4].as_real()).min(0.95)]
                } else {
                    vec![lo]
                };
                let mut params = json!({
                    "family": family,
                    "order": v[2].as_real() as i64,
                    "response": response,
                    "cutoffs": cutoffs,
                });
                if family == "chebyshev1" {
                    params["ripple_db"] = json!(v[5].as_real());
                }
                if family == "chebyshev2" {
                    params["attenuation_db"] = json!(v[6].as_real());
                }
                Design::new("sigproc", params)
            },
            move |d| {
                let family = d.get("family")?.as_str()?;
                let fam_idx = FAMILIES.iter().position(|f| *f == family)?;
                let response = d.get("response")?.as_str()?;
                let resp_idx = responses.iter().position(|r| r == response)?;
                let cutoffs = d.get("cutoffs")?.as_array()?;
                let lo = cutoffs.first()?.as_f64()?;
                let width = if cutoffs.len() == 2 {
                    (cutoffs[1].as_f64()? - lo).clamp(0.05, 0.5)
                } else {
                    0.2
                };
                Some(vec![
                    DimValue::Cat(fam_idx),
                    DimValue::Cat(resp_idx),
                    DimValue::Real(d.f64("order")?),
                    DimValue::Real(lo.min(0.80)),
                    DimValue::Real(width),
                    DimValue::Real(d.f64("ripple_db").unwrap_or(1.0)),
                    DimValue::Real(d.f64("attenuation_db").unwrap_or(40.0)),
                ])
            },
        ))
    }

    fn metric_policy(&self, metric: &str) -> MetricPolicy {
        match metric {
            "passband_ripple_db" => MetricPolicy::max_bound_floor(1e-4, 0.01),
            "transition_bandwidth" => MetricPolicy::max_bound_floor(1e-4, 0.01),
            "group_delay_variation" => MetricPolicy::max_bound_floor(1e-3, 0.1),
            _ => MetricPolicy::default(),
        }
    }

    fn taskworthy(&self, outcome: &Outcome) -> bool {
        let cutoff = outcome.get("cutoff_minus3db").unwrap_or(0.0);
        (0.01..=0.99).contains(&cutoff)
            && outcome.metrics.values().all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(family: &str, order: usize, fc: f64) -> FilterDesign {
        FilterDesign {
            family: family.into(),
            order: order as f64,
            response: "lowpass".into(),
            cutoffs: vec![fc],
            ripple_db: Some(1.0),
            attenuation_db: Some(40.0),
        }
    }

    #[test]
    fn butterworth_dc_gain_is_unity() {
        for order in [1, 2, 4, 7, 10] {
            let zpk = design_zpk(&lp("butterworth", order, 0.3)).unwrap();
            let dc = response_at(&zpk, 0.0).norm();
            assert!((dc - 1.0).abs() < 1e-9, "order {order}: DC {dc}");
        }
    }

    #[test]
    fn butterworth_cutoff_is_exactly_3db() {
        let zpk = design_zpk(&lp("butterworth", 4, 0.3)).unwrap();
        let mag_db = 20.0 * response_at(&zpk, 0.3).norm().log10();
        assert!((mag_db + DB3).abs() < 1e-6, "at cutoff: {mag_db} dB");
        let d = lp("butterworth", 4, 0.3);
        let m = measure(&d, &zpk);
        assert!((m.cutoff_minus3db - 0.3).abs() < 0.002, "measured {}", m.cutoff_minus3db);
    }

    #[test]
    fn bilinear_matches_analog_prototype_at_prewarped_frequency() {
        // |H_digital(f)| equals the analog prototype magnitude at the
        // prewarped ratio tan(pi f/2) / tan(pi fc/2); the analog value at
        // exactly 2x cutoff is 10 log10(1 + 2^(2n)).
        let n = 2;
        let fc = 0.2;
        let zpk = design_zpk(&lp("butterworth", n, fc)).unwrap();
        let analog_at = |ratio: f64| 10.0 * (1.0 + ratio.powi(2 * n as i32)).log10();
        assert!((analog_at(2.0) - 12.304).abs() < 0.01);
        let f = 0.4;
        let ratio = (PI * f / 2.0).tan() / (PI * fc / 2.0).tan();
        let digital_atten = -20.0 * response_at(&zpk, f).norm().log10();
        assert!(
            (digital_atten - analog_at(ratio)).abs() < 1e-6,
            "digital {digital_atten} vs analog {}",
            analog_at(ratio)
        );
        // Prewarping makes the digital response steeper than the naive
        // analog value at 2x cutoff.
        assert!(digital_atten > analog_at(2.0));
    }

    #[test]
    fn cheby1_ripple_is_bounded_by_spec() {
        for order in [3, 5, 8] {
            let mut d = lp("chebyshev1", order, 0.4);
            d.ripple_db = Some(1.0);
            let zpk = design_zpk(&d).unwrap();
            let m = measure(&d, &zpk);
            assert!(
                m.passband_ripple_db <= 1.05,
                "order {order}: ripple {}",
                m.passband_ripple_db
            );
            assert!(m.passband_ripple_db > 0.5, "equiripple should be near the spec");
        }
    }

    #[test]
    fn cheby2_attenuation_at_stopband_edge() {
        let mut d = lp("chebyshev2", 6, 0.5);
        d.attenuation_db = Some(40.0);
        let zpk = design_zpk(&d).unwrap();
        let dc = response_at(&zpk, 0.0).norm();
        assert!((dc - 1.0).abs() < 1e-9, "DC {dc}");
        let edge_atten = -20.0 * response_at(&zpk, 0.5).norm().log10();
        assert!((edge_atten - 40.0).abs() < 0.5, "edge attenuation {edge_atten}");
    }

    #[test]
    fn butterworth_lowpass_is_monotone_above_cutoff() {
        let d = lp("butterworth", 5, 0.35);
        let zpk = design_zpk(&d).unwrap();
        let mut prev = f64::MAX;
        for i in 0..512 {
            let f = 0.35 + (0.999 - 0.35) * i as f64 / 511.0;
            let mag = response_at(&zpk, f).norm();
            assert!(mag <= prev + 1e-12, "non-monotone at {f}");
            prev = mag;
        }
    }

    #[test]
    fn highpass_blocks_dc() {
        let mut d = lp("butterworth", 4, 0.4);
        d.response = "highpass".into();
        let zpk = design_zpk(&d).unwrap();
        assert!(response_at(&zpk, 0.0).norm() < 1e-12);
        assert!((response_at(&zpk, 0.9999).norm() - 1.0).abs() < 1e-3);
        let m = measure(&d, &zpk);
        assert!((m.cutoff_minus3db - 0.4).abs() < 0.002);
    }

    #[test]
    fn bandpass_peaks_inside_band() {
        let d = FilterDesign {
            family: "butterworth".into(),
            order: 4.0,
            response: "bandpass".into(),
            cutoffs: vec![0.2, 0.4],
            ripple_db: None,
            attenuation_db: None,
        };
        let zpk = design_zpk(&d).unwrap();
        let mid = response_at(&zpk, 0.285).norm();
        assert!((mid - 1.0).abs() < 0.01, "midband {mid}");
        assert!(response_at(&zpk, 0.05).norm() < 0.05);
        assert!(response_at(&zpk, 0.8).norm() < 0.05);
        let m = measure(&d, &zpk);
        assert!((m.cutoff_minus3db - 0.2).abs() < 0.01, "lower edge {}", m.cutoff_minus3db);
    }

    #[test]
    fn bandstop_notches_the_center() {
        let d = FilterDesign {
            family: "butterworth".into(),
            order: 3.0,
            response: "bandstop".into(),
            cutoffs: vec![0.3, 0.5],
            ripple_db: None,
            attenuation_db: None,
        };
        let zpk = design_zpk(&d).unwrap();
        let m = measure(&d, &zpk);
        assert!(m.stopband_attenuation_db > 30.0, "notch depth {}", m.stopband_attenuation_db);
        assert!((response_at(&zpk, 0.05).norm() - 1.0).abs() < 0.05);
    }

    #[test]
    fn elliptic_is_an_explicit_unsupported_error() {
        let oracle = SigProcOracle::new();
        let ctx = TaskContext {
            difficulty: Difficulty::L1,
            seed: 0,
            kind: crate::model::TaskKind::DeNovo,
        };
        let d = Design::new(
            "sigproc",
            json!({"family": "elliptic", "order": 4, "response": "lowpass", "cutoffs": [0.3]}),
        );
        match oracle.simulate(&ctx, &d) {
            Err(OracleError::Unsupported(_)) => {}
            other => panic!("expected unsupported-feature error, got {other:?}"),
        }
    }

    #[test]
    fn bandpass_requires_ordered_cutoffs() {
        let oracle = SigProcOracle::new();
        let ctx = TaskContext {
            difficulty: Difficulty::L4,
            seed: 0,
            kind: crate::model::TaskKind::DeNovo,
        };
        let d = Design::new(
            "sigproc",
            json!({"family": "butterworth", "order": 4, "response": "bandpass", "cutoffs": [0.5, 0.3]}),
        );
        assert!(!oracle.validate(&ctx, &d).is_empty());
    }

    #[test]
    fn sampled_designs_simulate_clean() {
        let oracle = SigProcOracle::new();
        let mut rng = DetRng::new(21);
        for level in Difficulty::ALL {
            let ctx = TaskContext { difficulty: level, seed: 4, kind: crate::model::TaskKind::DeNovo };
            for _ in 0..10 {
                let d = oracle.sample_design(&ctx, &mut rng);
                assert!(oracle.validate(&ctx, &d).is_empty(), "{d:?}");
                let out = oracle.simulate(&ctx, &d).unwrap();
                for (m, v) in &out.metrics {
                    assert!(v.is_finite(), "{m} not finite for {d:?}");
                }
            }
        }
    }
}
