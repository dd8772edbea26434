//! Quantum circuit statevector oracle.
//!
//! Simulates 1-4 qubit circuits over the gate set
//! H, X, Y, Z, S, T, RX, RY, RZ, CNOT, CZ, SWAP starting from |0...0> and
//! reports fidelity against the task's hidden target state, the all-zeros
//! and all-ones basis probabilities, and the entanglement entropy (von
//! Neumann, in bits) across the fixed bipartition of the first ceil(n/2)
//! qubits against the rest.
//!
//! Qubit index convention: qubit 0 is the leftmost / most significant bit of
//! the basis label, so |q0 q1 ... q_{n-1}> has index `sum bit(q) << (n-1-q)`.

use super::{MetricPolicy, Oracle, OracleError, TaskContext, Violation};
use crate::model::{Constraint, Design, Difficulty, Outcome};
use crate::rng::{label, DetRng};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::json;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

pub const GATE_NAMES: [&str; 12] =
    ["H", "X", "Y", "Z", "S", "T", "RX", "RY", "RZ", "CNOT", "CZ", "SWAP"];
pub const MAX_GATES: usize = 64;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSpec {
    pub name: String,
    pub qubits: Vec<usize>,
    #[serde(default)]
    pub angle: Option<f64>,
}

impl GateSpec {
    pub fn single(name: &str, q: usize) -> Self {
        GateSpec { name: name.into(), qubits: vec![q], angle: None }
    }
    pub fn rotation(name: &str, q: usize, angle: f64) -> Self {
        GateSpec { name: name.into(), qubits: vec![q], angle: Some(angle) }
    }
    pub fn two(name: &str, a: usize, b: usize) -> Self {
        GateSpec { name: name.into(), qubits: vec![a, b], angle: None }
    }

    fn is_rotation(&self) -> bool {
        matches!(self.name.as_str(), "RX" | "RY" | "RZ")
    }
    fn is_two_qubit(&self) -> bool {
        matches!(self.name.as_str(), "CNOT" | "CZ" | "SWAP")
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitDesign {
    n_qubits: usize,
    gates: Vec<GateSpec>,
}

/// Statevector of an `n`-qubit register.
#[derive(Debug, Clone)]
pub struct StateVector {
    pub n: usize,
    pub amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zero(n: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        StateVector { n, amps }
    }

    fn bit(&self, index: usize, qubit: usize) -> usize {
        (index >> (self.n - 1 - qubit)) & 1
    }

    fn apply_single(&mut self, q: usize, m: [[Complex64; 2]; 2]) {
        let stride = 1 << (self.n - 1 - q);
        for base in 0..self.amps.len() {
            if base & stride == 0 {
                let a0 = self.amps[base];
                let a1 = self.amps[base | stride];
                self.amps[base] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[base | stride] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    pub fn apply(&mut self, gate: &GateSpec) -> Result<(), OracleError> {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        match gate.name.as_str() {
            "H" => {
                let h = FRAC_1_SQRT_2;
                self.apply_single(gate.qubits[0], [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]]);
            }
            "X" => self.apply_single(gate.qubits[0], [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]),
            "Y" => self.apply_single(gate.qubits[0], [[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]]),
            "Z" => self.apply_single(gate.qubits[0], [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]]),
            "S" => self.apply_single(gate.qubits[0], [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 1.0)]]),
            "T" => {
                let p = Complex64::from_polar(1.0, PI / 4.0);
                self.apply_single(gate.qubits[0], [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), p]]);
            }
            "RX" => {
                let t = gate.angle.unwrap_or(0.0) / 2.0;
                self.apply_single(
                    gate.qubits[0],
                    [[c(t.cos(), 0.0), c(0.0, -t.sin())], [c(0.0, -t.sin()), c(t.cos(), 0.0)]],
                );
            }
            "RY" => {
                let t = gate.angle.unwrap_or(0.0) / 2.0;
                self.apply_single(
                    gate.qubits[0],
                    [[c(t.cos(), 0.0), c(-t.sin(), 0.0)], [c(t.sin(), 0.0), c(t.cos(), 0.0)]],
                );
            }
            "RZ" => {
                let t = gate.angle.unwrap_or(0.0) / 2.0;
                self.apply_single(
                    gate.qubits[0],
                    [[Complex64::from_polar(1.0, -t), c(0.0, 0.0)], [c(0.0, 0.0), Complex64::from_polar(1.0, t)]],
                );
            }
            "CNOT" => {
                let (ctl, tgt) = (gate.qubits[0], gate.qubits[1]);
                let t_stride = 1 << (self.n - 1 - tgt);
                for i in 0..self.amps.len() {
                    if self.bit(i, ctl) == 1 && i & t_stride == 0 {
                        self.amps.swap(i, i | t_stride);
                    }
                }
            }
            "CZ" => {
                for i in 0..self.amps.len() {
                    if self.bit(i, gate.qubits[0]) == 1 && self.bit(i, gate.qubits[1]) == 1 {
                        self.amps[i] = -self.amps[i];
                    }
                }
            }
            "SWAP" => {
                let (a, b) = (gate.qubits[0], gate.qubits[1]);
                for i in 0..self.amps.len() {
                    let (ba, bb) = (self.bit(i, a), self.bit(i, b));
                    if ba == 1 && bb == 0 {
                        let j = i ^ (1 << (self.n - 1 - a)) ^ (1 << (self.n - 1 - b));
                        self.amps.swap(i, j);
                    }
                }
            }
            other => return Err(OracleError::InvalidDesign(format!("unknown gate `{other}`"))),
        }
        Ok(())
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn fidelity(&self, target: &[Complex64]) -> f64 {
        let ip: Complex64 =
            self.amps.iter().zip(target).map(|(a, t)| t.conj() * a).sum();
        ip.norm_sqr()
    }

    /// Von Neumann entropy (bits) of the reduced state of the first
    /// `ceil(n/2)` qubits.
    pub fn entanglement_entropy(&self) -> f64 {
        let a = self.n.div_ceil(2);
        let b = self.n - a;
        let (da, db) = (1usize << a, 1usize << b);
        // rho_A = M M^dagger where M[i][j] = amps[i * db + j].
        let mut rho = vec![vec![Complex64::new(0.0, 0.0); da]; da];
        for (i, row) in rho.iter_mut().enumerate() {
            for (i2, val) in row.iter_mut().enumerate() {
                let mut s = Complex64::new(0.0, 0.0);
                for j in 0..db {
                    s += self.amps[i * db + j] * self.amps[i2 * db + j].conj();
                }
                *val = s;
            }
        }
        // Hermitian eigenvalues via the real-symmetric embedding
        // [[Re, -Im], [Im, Re]]; each eigenvalue of rho appears twice.
        let d2 = 2 * da;
        let mut s = vec![vec![0.0f64; d2]; d2];
        for i in 0..da {
            for j in 0..da {
                s[i][j] = rho[i][j].re;
                s[i + da][j + da] = rho[i][j].re;
                s[i][j + da] = -rho[i][j].im;
                s[i + da][j] = rho[i][j].im;
            }
        }
        let eig = jacobi_eigenvalues(&mut s);
        -0.5 * eig
            .iter()
            .filter(|&&l| l > 1e-12)
            .map(|&l| l * l.log2())
            .sum::<f64>()
    }
}

/// Eigenvalues of a small real symmetric matrix by cyclic Jacobi rotations.
fn jacobi_eigenvalues(a: &mut [Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[i][j] * a[i][j];
            }
        }
        if off < 1e-24 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-18 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

/// Runs a gate list from |0...0>.
pub fn run_circuit(n: usize, gates: &[GateSpec]) -> Result<StateVector, OracleError> {
    let mut sv = StateVector::zero(n);
    for g in gates {
        sv.apply(g)?;
    }
    Ok(sv)
}

pub struct QuantumOracle;

impl QuantumOracle {
    pub fn new() -> Self {
        QuantumOracle
    }

    pub fn n_qubits(level: Difficulty) -> usize {
        match level {
            Difficulty::L1 => 1,
            Difficulty::L2 => 2,
            Difficulty::L3 => 3,
            Difficulty::L4 => 4,
        }
    }

    fn gate_budget(level: Difficulty) -> usize {
        match level {
            Difficulty::L1 => 6,
            Difficulty::L2 => 10,
            Difficulty::L3 => 14,
            Difficulty::L4 => 20,
        }
    }

    /// Hidden reference circuit that defines the task's target state.
    pub fn reference_circuit(ctx: &TaskContext) -> Vec<GateSpec> {
        let n = Self::n_qubits(ctx.difficulty);
        let mut rng = DetRng::new(crate::rng::derive_seed(ctx.seed, &[label("quantum-target")]));
        let mut gates = Vec::new();
        for q in 0..n {
            let theta = (1.0 - 2.0 * rng.f64()).acos();
            let phi = rng.uniform(0.0, 2.0 * PI);
            gates.push(GateSpec::rotation("RY", q, theta));
            gates.push(GateSpec::rotation("RZ", q, phi));
        }
        for q in 0..n.saturating_sub(1) {
            gates.push(GateSpec::two("CNOT", q, q + 1));
        }
        if n >= 2 {
            let q = rng.below(n);
            gates.push(GateSpec::rotation("RY", q, rng.uniform(0.0, PI)));
        }
        gates
    }

    pub fn target_state(ctx: &TaskContext) -> Vec<Complex64> {
        run_circuit(Self::n_qubits(ctx.difficulty), &Self::reference_circuit(ctx))
            .expect("reference circuit")
            .amps
    }

    fn parse(&self, ctx: &TaskContext, design: &Design) -> Result<CircuitDesign, Vec<Violation>> {
        let d: CircuitDesign =
            serde_json::from_value(serde_json::Value::Object(design.params.clone()))
                .map_err(|e| vec![Violation::new("params", e.to_string())])?;
        let mut out = Vec::new();
        let expected = Self::n_qubits(ctx.difficulty);
        if d.n_qubits != expected {
            out.push(Violation::new("n_qubits", format!("this task uses {expected} qubit(s)")));
        }
        if d.gates.len() > MAX_GATES {
            out.push(Violation::new("gates", format!("at most {MAX_GATES} gates")));
        }
        for (i, g) in d.gates.iter().enumerate() {
            let path = format!("gates[{i}]");
            if !GATE_NAMES.contains(&g.name.as_str()) {
                out.push(Violation::new(&path, format!("unknown gate `{}`", g.name)));
                continue;
            }
            let want = if g.is_two_qubit() { 2 } else { 1 };
            if g.qubits.len() != want {
                out.push(Violation::new(&path, format!("`{}` takes {want} qubit index(es)", g.name)));
                continue;
            }
            if g.qubits.iter().any(|&q| q >= d.n_qubits) {
                out.push(Violation::new(&path, "qubit index out of range"));
            }
            if want == 2 && g.qubits[0] == g.qubits[1] {
                out.push(Violation::new(&path, "two-qubit gate needs distinct qubits"));
            }
            match (g.is_rotation(), g.angle) {
                (true, None) => out.push(Violation::new(&path, "rotation gate requires an angle")),
                (true, Some(a)) if !a.is_finite() || a.abs() > 2.0 * PI => {
                    out.push(Violation::new(&path, "angle must be finite within [-2pi, 2pi]"))
                }
                (false, Some(_)) => out.push(Violation::new(&path, "only RX/RY/RZ take an angle")),
                _ => {}
            }
        }
        if out.is_empty() {
            Ok(d)
        } else {
            Err(out)
        }
    }
}

impl Default for QuantumOracle {
    fn default() -> Self {
        Self::new()
    }
}

impl Oracle for QuantumOracle {
    fn domain(&self) -> &'static str {
        "quantum"
    }

    fn blurb(&self) -> &'static str {
        "quantum circuit synthesis toward a hidden target state"
    }

    fn metric_names(&self, _ctx: &TaskContext) -> Vec<String> {
        vec!["fidelity".into(), "entanglement_entropy".into(), "p_zero".into(), "p_one".into()]
    }

    fn constraints(&self, ctx: &TaskContext) -> Vec<Constraint> {
        let n = Self::n_qubits(ctx.difficulty) as f64;
        vec![
            Constraint::range("n_qubits", n, n),
            Constraint::enum_token("gates[].name", &GATE_NAMES),
            Constraint::max_count("gates", MAX_GATES),
            Constraint::range("gates[].angle", -2.0 * PI, 2.0 * PI),
        ]
    }

    fn schema(&self, ctx: &TaskContext) -> serde_json::Value {
        json!({
            "n_qubits": Self::n_qubits(ctx.difficulty),
            "gates": [{
                "name": "one of H, X, Y, Z, S, T, RX, RY, RZ, CNOT, CZ, SWAP",
                "qubits": "list of qubit indices (1 for single-qubit gates, 2 distinct for CNOT/CZ/SWAP)",
                "angle": "radians, required for RX/RY/RZ only"
            }]
        })
    }

    fn system_summary(&self, ctx: &TaskContext) -> String {
        let n = Self::n_qubits(ctx.difficulty);
        format!(
            "Register of {n} qubit(s) initialized to |0...0>. Fidelity is measured against a hidden \
             target state; entanglement entropy is the von Neumann entropy (bits) of the first \
             ceil(n/2) qubits; p_zero and p_one are the probabilities of the all-zeros and all-ones \
             basis states."
        )
    }

    fn validate(&self, ctx: &TaskContext, design: &Design) -> Vec<Violation> {
        match self.parse(ctx, design) {
            Ok(_) => vec![],
            Err(v) => v,
        }
    }

    fn simulate(&self, ctx: &TaskContext, design: &Design) -> Result<Outcome, OracleError> {
        let d = self
            .parse(ctx, design)
            .map_err(|v| OracleError::InvalidDesign(super::violations_text(&v)))?;
        let sv = run_circuit(d.n_qubits, &d.gates)?;
        debug_assert!((sv.norm_sq() - 1.0).abs() < 1e-10);
        let target = Self::target_state(ctx);
        let p_zero = sv.amps[0].norm_sqr();
        let p_one = sv.amps[sv.amps.len() - 1].norm_sqr();
        Ok(Outcome::new("quantum")
            .with("fidelity", sv.fidelity(&target))
            .with("entanglement_entropy", sv.entanglement_entropy())
            .with("p_zero", p_zero)
            .with("p_one", p_one))
    }

    fn sample_design(&self, ctx: &TaskContext, rng: &mut DetRng) -> Design {
        let n = Self::n_qubits(ctx.difficulty);
        let len = rng.int_range(1, Self::gate_budget(ctx.difficulty) as i64) as usize;
        let mut gates = Vec::with_capacity(len);
        for _ in 0..len {
            let pool: &[&str] = if n == 1 { &GATE_NAMES[..9] } else { &GATE_NAMES };
            let name = *rng.choose(pool);
            let gate = match name {
                "CNOT" | "CZ" | "SWAP" => {
                    let pair = rng.distinct(n, 2);
                    GateSpec::two(name, pair[0], pair[1])
                }
                "RX" | "RY" | "RZ" => {
                    GateSpec::rotation(name, rng.below(n), rng.uniform(0.0, 2.0 * PI))
                }
                _ => GateSpec::single(name, rng.below(n)),
            };
            gates.push(gate);
        }
        Design::new("quantum", json!({ "n_qubits": n, "gates": gates_to_json(&gates) }))
    }

    fn generating_design_hint(&self, ctx: &TaskContext) -> Option<Design> {
        let gates = Self::reference_circuit(ctx);
        Some(Design::new(
            "quantum",
            json!({ "n_qubits": Self::n_qubits(ctx.difficulty), "gates": gates_to_json(&gates) }),
        ))
    }

    fn metric_policy(&self, metric: &str) -> MetricPolicy {
        match metric {
            "entanglement_entropy" => MetricPolicy::max_bound_floor(0.05, 0.1),
            "p_zero" | "p_one" => MetricPolicy::max_bound_floor(0.02, 0.05),
            _ => MetricPolicy::default(),
        }
    }

    fn parsimony(&self, _ctx: &TaskContext, design: &Design) -> f64 {
        -(design.get("gates").and_then(|g| g.as_array()).map(|g| g.len()).unwrap_or(0) as f64)
    }
}

fn gates_to_json(gates: &[GateSpec]) -> serde_json::Value {
    serde_json::Value::Array(
        gates
            .iter()
            .map(|g| {
                let mut m = serde_json::Map::new();
                m.insert("name".into(), json!(g.name));
                m.insert("qubits".into(), json!(g.qubits));
                if let Some(a) = g.angle {
                    m.insert("angle".into(), json!(a));
                }
                serde_json::Value::Object(m)
            })
            .collect(),
    )
}
