//! Gene-knockout oracle over a linear gene regulatory network.
//!
//! The bundled network has 51 genes across 7 pathways and ~100 signed
//! weighted edges (including the textbook relations TP53 -> CDKN1A and the
//! KRAS -> BRAF -> MEK1 -> ERK2 cascade). Expression solves the linear
//! fixed point `x = basal + W x`; the edge weights are rescaled at data-file
//! creation so the spectral radius is 0.8, which makes the iteration
//! converge geometrically. A knockout clamps the gene's expression to
//! `baseline * 2^knockout_log2_floor` and re-solves; the outcome is the
//! log2 fold-change of each marker gene, plus a small deterministic noise
//! offset keyed by (task seed, marker) so the mapping cannot be inverted
//! from a single clean table.
//!
//! The shipped `grn_v1.json` is produced by `examples/generate_grn.rs`; a
//! unit test pins the file to the builder output.

use super::{MetricPolicy, Oracle, OracleError, TaskContext, Violation};
use crate::model::{Constraint, Design, Difficulty, Outcome};
use crate::rng::{derive_seed, label, DetRng};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::collections::BTreeMap;
use std::sync::OnceLock;

/// Expression floor used before taking ratios, to keep fold-changes finite.
pub const EXPRESSION_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GrnEdge {
    pub source: String,
    pub target: String,
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GrnModel {
    pub schema_version: u32,
    pub noise_scale: f64,
    pub knockout_log2_floor: f64,
    pub pathways: BTreeMap<String, Vec<String>>,
    pub genes: Vec<String>,
    pub basal: Vec<f64>,
    pub edges: Vec<GrnEdge>,
}

impl GrnModel {
    pub fn gene_index(&self, gene: &str) -> Option<usize> {
        self.genes.iter().position(|g| g == gene)
    }

    /// Dense adjacency: `w[target][source]`.
    pub fn adjacency(&self) -> Vec<Vec<f64>> {
        let n = self.genes.len();
        let mut w = vec![vec![0.0; n]; n];
        for e in &self.edges {
            let s = self.gene_index(&e.source).expect("edge source");
            let t = self.gene_index(&e.target).expect("edge target");
            w[t][s] += e.weight;
        }
        w
    }
}

/// Solves `x = basal + W x` with an optional clamped coordinate by fixed
/// point iteration. Returns None if the iteration fails to converge (the
/// shipped network is certified at creation time to converge for the
/// baseline and all 51 single-gene knockouts).
pub fn solve_expression(
    grn: &GrnModel,
    w: &[Vec<f64>],
    clamp: Option<(usize, f64)>,
) -> Option<Vec<f64>> {
    let n = grn.genes.len();
    let mut x = grn.basal.clone();
    if let Some((g, v)) = clamp {
        x[g] = v;
    }
    for _ in 0..2000 {
        let mut next = vec![0.0; n];
        for t in 0..n {
            let mut acc = grn.basal[t];
            for s in 0..n {
                if w[t][s] != 0.0 {
                    acc += w[t][s] * x[s];
                }
            }
            next[t] = acc;
        }
        if let Some((g, v)) = clamp {
            next[g] = v;
        }
        let mut delta = 0.0f64;
        let mut scale = 1e-12f64;
        for i in 0..n {
            delta = delta.max((next[i] - x[i]).abs());
            scale = scale.max(next[i].abs());
        }
        x = next;
        if delta <= 1e-13 * scale {
            return Some(x);
        }
    }
    None
}

/// Zero-noise log2 fold-changes of every gene under a single knockout.
pub fn knockout_fold_changes(grn: &GrnModel, gene_idx: usize) -> Vec<f64> {
    let w = grn.adjacency();
    let baseline = solve_expression(grn, &w, None).expect("certified baseline");
    let floor = baseline[gene_idx] * 2f64.powf(grn.knockout_log2_floor);
    let knocked =
        solve_expression(grn, &w, Some((gene_idx, floor))).expect("certified knockout");
    baseline
        .iter()
        .zip(&knocked)
        .map(|(b, k)| (k.max(EXPRESSION_FLOOR) / b.max(EXPRESSION_FLOOR)).log2())
        .collect()
}

/// Deterministic noise offset for one (task seed, marker) pair, clamped to
/// 2.5 standard units so an unaffected marker stays within 3 noise scales.
pub fn marker_noise(grn: &GrnModel, task_seed: u64, marker: &str) -> f64 {
    let mut rng = DetRng::new(derive_seed(task_seed, &[label("perturb-noise"), label(marker)]));
    grn.noise_scale * rng.normal().clamp(-2.5, 2.5)
}

// ---------------------------------------------------------------------------
// Deterministic network builder (data-file provenance).

const PATHWAY_GENES: [(&str, &[&str]); 7] = [
    ("cell_cycle", &["CCND1", "CDK4", "CDK6", "CCNE1", "CDK2", "RB1", "E2F1", "CDKN1A", "CDKN2A"]),
    ("apoptosis", &["TP53", "MDM2", "BAX", "BCL2", "CASP3", "CASP9", "APAF1", "BBC3", "FAS"]),
    ("mapk_pi3k", &["EGFR", "KRAS", "BRAF", "RAF1", "MEK1", "ERK2", "PIK3CA", "AKT1", "MTOR", "PTEN"]),
    ("transcription", &["MYC", "JUN", "FOS", "STAT3", "NFKB1", "HIF1A", "FOXO3"]),
    ("dna_repair", &["BRCA1", "BRCA2", "ATM", "ATR", "CHEK1", "CHEK2", "RAD51"]),
    ("epigenetic", &["EZH2", "DNMT1", "HDAC1", "CREBBP"]),
    ("metabolism", &["LDHA", "HK2", "PFKM", "G6PD", "IDH1"]),
];

const CURATED_EDGES: [(&str, &str, f64); 57] = [
    ("TP53", "CDKN1A", 1.0),
    ("KRAS", "BRAF", 1.0),
    ("BRAF", "MEK1", 1.0),
    ("MEK1", "ERK2", 1.0),
    ("EGFR", "KRAS", 1.0),
    ("EGFR", "PIK3CA", 1.0),
    ("KRAS", "RAF1", 1.0),
    ("RAF1", "MEK1", 1.0),
    ("PIK3CA", "AKT1", 1.0),
    ("AKT1", "MTOR", 1.0),
    ("PTEN", "AKT1", -1.0),
    ("TP53", "MDM2", 1.0),
    ("MDM2", "TP53", -1.0),
    ("TP53", "BAX", 1.0),
    ("TP53", "BBC3", 1.0),
    ("BCL2", "CASP9", -1.0),
    ("BAX", "CASP9", 1.0),
    ("CASP9", "CASP3", 1.0),
    ("APAF1", "CASP9", 1.0),
    ("FAS", "CASP3", 1.0),
    ("RB1", "E2F1", -1.0),
    ("E2F1", "CCNE1", 1.0),
    ("CCNE1", "CDK2", 1.0),
    ("CCND1", "CDK4", 1.0),
    ("CCND1", "CDK6", 1.0),
    ("CDKN1A", "CDK2", -1.0),
    ("CDKN2A", "CDK4", -1.0),
    ("CDK4", "RB1", -1.0),
    ("CDK2", "RB1", -1.0),
    ("MYC", "CCND1", 1.0),
    ("ERK2", "MYC", 1.0),
    ("ERK2", "FOS", 1.0),
    ("ERK2", "JUN", 1.0),
    ("JUN", "CCND1", 1.0),
    ("STAT3", "MYC", 1.0),
    ("STAT3", "BCL2", 1.0),
    ("STAT3", "HIF1A", 1.0),
    ("NFKB1", "BCL2", 1.0),
    ("NFKB1", "MYC", 1.0),
    ("HIF1A", "LDHA", 1.0),
    ("HIF1A", "PFKM", 1.0),
    ("MYC", "HK2", 1.0),
    ("MYC", "LDHA", 1.0),
    ("MYC", "G6PD", 1.0),
    ("AKT1", "HIF1A", 1.0),
    ("AKT1", "HK2", 1.0),
    ("AKT1", "FOXO3", -1.0),
    ("FOXO3", "CDKN1A", 1.0),
    ("ATM", "TP53", 1.0),
    ("ATM", "CHEK2", 1.0),
    ("ATR", "CHEK1", 1.0),
    ("CHEK1", "TP53", 1.0),
    ("CHEK2", "TP53", 1.0),
    ("BRCA1", "RAD51", 1.0),
    ("BRCA2", "RAD51", 1.0),
    ("EZH2", "CDKN2A", -1.0),
    ("HDAC1", "TP53", -1.0),
];

const N_RANDOM_EDGES: usize = 45;
const BUILDER_SEED: u64 = 0x5eed_6e6e;

fn spectral_radius_estimate(w: &[Vec<f64>]) -> f64 {
    let n = w.len();
    let mut rng = DetRng::new(424242);
    let mut x: Vec<f64> = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
    let mut log_growth_tail = Vec::new();
    for iter in 0..400 {
        let mut y = vec![0.0; n];
        for t in 0..n {
            for s in 0..n {
                if w[t][s] != 0.0 {
                    y[t] += w[t][s] * x[s];
                }
            }
        }
        let norm: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return 0.0;
        }
        for v in y.iter_mut() {
            *v /= norm;
        }
        if iter >= 300 {
            log_growth_tail.push(norm.ln());
        }
        x = y;
    }
    (log_growth_tail.iter().sum::<f64>() / log_growth_tail.len() as f64).exp()
}

/// Builds the network deterministically: curated edges with drawn
/// magnitudes, extra random edges, weights rescaled to spectral radius 0.8,
/// and basal rates adjusted until the baseline and every knockout state are
/// well-positive.
pub fn build_network() -> GrnModel {
    let mut rng = DetRng::new(BUILDER_SEED);
    let mut pathways = BTreeMap::new();
    let mut genes: Vec<String> = Vec::new();
    for (path, members) in PATHWAY_GENES {
        pathways.insert(path.to_string(), members.iter().map(|g| g.to_string()).collect());
        genes.extend(members.iter().map(|g| g.to_string()));
    }
    assert_eq!(genes.len(), 51);

    let mut edges: Vec<GrnEdge> = CURATED_EDGES
        .iter()
        .map(|(s, t, sign)| GrnEdge {
            source: s.to_string(),
            target: t.to_string(),
            weight: sign * rng.uniform(0.3, 0.7),
        })
        .collect();
    let mut have: Vec<(String, String)> =
        edges.iter().map(|e| (e.source.clone(), e.target.clone())).collect();
    while edges.len() < CURATED_EDGES.len() + N_RANDOM_EDGES {
        let s = genes[rng.below(genes.len())].clone();
        let t = genes[rng.below(genes.len())].clone();
        if s == t || have.contains(&(s.clone(), t.clone())) {
            continue;
        }
        let sign = if rng.f64() < 0.7 { 1.0 } else { -1.0 };
        let weight = sign * rng.uniform(0.1, 0.4);
        have.push((s.clone(), t.clone()));
        edges.push(GrnEdge { source: s, target: t, weight });
    }

    let basal: Vec<f64> = (0..genes.len()).map(|_| rng.uniform(2.0, 8.0)).collect();
    let mut grn = GrnModel {
        schema_version: 1,
        noise_scale: 0.05,
        knockout_log2_floor: -7.0,
        pathways,
        genes,
        basal,
        edges,
    };

    // Rescale to spectral radius 0.8.
    let rho = spectral_radius_estimate(&grn.adjacency());
    assert!(rho > 1e-6, "network must have feedback");
    let scale = 0.8 / rho;
    for e in grn.edges.iter_mut() {
        e.weight = (e.weight * scale * 1e9).round() / 1e9;
    }

    // Certify positivity of the baseline and every knockout state, raising
    // basal rates where repression pushes a gene too low.
    for _round in 0..200 {
        let w = grn.adjacency();
        let baseline = solve_expression(&grn, &w, None).expect("baseline converges");
        let mut worst: Option<usize> = None;
        let mut worst_val = 0.05;
        for (i, v) in baseline.iter().enumerate() {
            if *v < worst_val {
                worst_val = *v;
                worst = Some(i);
            }
        }
        if worst.is_none() {
            for g in 0..grn.genes.len() {
                let floor = baseline[g] * 2f64.powf(grn.knockout_log2_floor);
                let state =
                    solve_expression(&grn, &w, Some((g, floor))).expect("knockout converges");
                for (i, v) in state.iter().enumerate() {
                    if i != g && *v < worst_val {
                        worst_val = *v;
                        worst = Some(i);
                    }
                }
            }
        }
        match worst {
            Some(i) => grn.basal[i] += 0.5,
            None => break,
        }
    }
    for b in grn.basal.iter_mut() {
        *b = (*b * 1e9).round() / 1e9;
    }
    grn
}

pub fn grn() -> &'static GrnModel {
    static GRN: OnceLock<GrnModel> = OnceLock::new();
    GRN.get_or_init(|| serde_json::from_str(super::GRN_JSON).expect("grn data file"))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct KnockoutDesign {
    gene: String,
}

pub struct PerturbationOracle;

impl PerturbationOracle {
    pub fn new() -> Self {
        PerturbationOracle
    }

    fn marker_count(level: Difficulty) -> usize {
        match level {
            Difficulty::L1 => 1,
            Difficulty::L2 => 2,
            Difficulty::L3 => 4,
            Difficulty::L4 => 5,
        }
    }

    /// Hidden knockout the task was generated around.
    pub fn hidden_gene(ctx: &TaskContext) -> usize {
        (derive_seed(ctx.seed, &[label("perturb-ko")]) % grn().genes.len() as u64) as usize
    }

    /// Marker genes: the strongest zero-noise responders to the hidden
    /// knockout, excluding the knocked-out gene itself.
    pub fn markers(ctx: &TaskContext) -> Vec<String> {
        let model = grn();
        let ko = Self::hidden_gene(ctx);
        let fc = knockout_fold_changes(model, ko);
        let mut ranked: Vec<(usize, f64)> = fc
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != ko)
            .map(|(i, v)| (i, v.abs()))
            .collect();
        ranked.sort_by(|a, b| {
            b.1.partial_cmp(&a.1).unwrap().then(model.genes[a.0].cmp(&model.genes[b.0]))
        });
        let mut names: Vec<String> = ranked
            .into_iter()
            .take(Self::marker_count(ctx.difficulty))
            .map(|(i, _)| model.genes[i].clone())
            .collect();
        names.sort();
        names
    }
}

impl Default for PerturbationOracle {
    fn default() -> Self {
        Self::new()
    }
}

impl Oracle for PerturbationOracle {
    fn domain(&self) -> &'static str {
        "perturbation"
    }

    fn blurb(&self) -> &'static str {
        "single-gene knockout against a linear regulatory network"
    }

    fn metric_names(&self, ctx: &TaskContext) -> Vec<String> {
        Self::markers(ctx).iter().map(|m| format!("log2fc_{m}")).collect()
    }

    fn constraints(&self, _ctx: &TaskContext) -> Vec<Constraint> {
        let genes: Vec<&str> = grn().genes.iter().map(|g| g.as_str()).collect();
        vec![Constraint::enum_token("gene", &genes)]
    }

    fn schema(&self, _ctx: &TaskContext) -> serde_json::Value {
        json!({ "gene": "one of the 51 network genes listed in the task description" })
    }

    fn system_summary(&self, ctx: &TaskContext) -> String {
        let model = grn();
        let mut s = String::from(
            "Linear gene regulatory network: 51 genes across 7 pathways, ~100 signed edges.\nPathways:",
        );
        for (p, members) in &model.pathways {
            s.push_str(&format!("\n  {p}: {}", members.join(", ")));
        }
        s.push_str(&format!(
            "\nMarker genes for this task: {}.",
            Self::markers(ctx).join(", ")
        ));
        s
    }

    fn validate(&self, _ctx: &TaskContext, design: &Design) -> Vec<Violation> {
        let d: KnockoutDesign =
            match serde_json::from_value(serde_json::Value::Object(design.params.clone())) {
                Ok(d) => d,
                Err(e) => return vec![Violation::new("params", e.to_string())],
            };
        if grn().gene_index(&d.gene).is_none() {
            return vec![Violation::new("gene", format!("unknown gene `{}`", d.gene))];
        }
        vec![]
    }

    fn simulate(&self, ctx: &TaskContext, design: &Design) -> Result<Outcome, OracleError> {
        let violations = self.validate(ctx, design);
        if !violations.is_empty() {
            return Err(OracleError::InvalidDesign(super::violations_text(&violations)));
        }
        let model = grn();
        let gene = design.get("gene").and_then(|g| g.as_str()).expect("validated");
        let idx = model.gene_index(gene).expect("validated");
        let fc = knockout_fold_changes(model, idx);
        let mut out = Outcome::new("perturbation");
        for marker in Self::markers(ctx) {
            let m_idx = model.gene_index(&marker).expect("marker gene");
            let value = fc[m_idx] + marker_noise(model, ctx.seed, &marker);
            out = out.with(&format!("log2fc_{marker}"), value);
        }
        Ok(out)
    }

    fn sample_design(&self, _ctx: &TaskContext, rng: &mut DetRng) -> Design {
        let model = grn();
        Design::new("perturbation", json!({ "gene": model.genes[rng.below(model.genes.len())] }))
    }

    fn generating_design_hint(&self, ctx: &TaskContext) -> Option<Design> {
        let model = grn();
        Some(Design::new("perturbation", json!({ "gene": model.genes[Self::hidden_gene(ctx)] })))
    }

    fn space(&self, _ctx: &TaskContext) -> Option<crate::vectorize::DesignSpace> {
        let n = grn().genes.len();
        Some(crate::vectorize::DesignSpace::new(
            vec![crate::vectorize::Dim::cat("gene", n)],
            |v| {
                Design::new(
                    "perturbation",
                    json!({ "gene": grn().genes[v[0].as_cat()] }),
                )
            },
            |d| {
                let gene = d.get("gene")?.as_str()?;
                Some(vec![crate::vectorize::DimValue::Cat(grn().gene_index(gene)?)])
            },
        ))
    }

    fn metric_policy(&self, _metric: &str) -> MetricPolicy {
        // Fold-changes are signed; targets stay exact (replay is bit-exact
        // because the per-marker noise is fixed by the task seed).
        MetricPolicy { near_zero: 0.0, ..MetricPolicy::default() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TaskKind;

    /// Independent dense route: Gaussian elimination on the (I - W) system
    /// with the knockout row replaced by the clamp equation.
    pub fn dense_knockout_fold_changes(grn: &GrnModel, gene_idx: usize) -> Vec<f64> {
        let n = grn.genes.len();
        let w = grn.adjacency();
        let solve = |clamp: Option<(usize, f64)>| -> Vec<f64> {
            let mut a = vec![vec![0.0f64; n + 1]; n];
            for t in 0..n {
                for s in 0..n {
                    a[t][s] = if t == s { 1.0 } else { 0.0 } - w[t][s];
                }
                a[t][n] = grn.basal[t];
            }
            if let Some((g, v)) = clamp {
                for s in 0..n {
                    a[g][s] = if s == g { 1.0 } else { 0.0 };
                }
                a[g][n] = v;
            }
            // Partial-pivot elimination.
            for col in 0..n {
                let piv = (col..n).max_by(|&i, &j| {
                    a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()
                }).unwrap();
                a.swap(col, piv);
                let p = a[col][col];
                for row in 0..n {
                    if row != col && a[row][col] != 0.0 {
                        let f = a[row][col] / p;
                        for k in col..=n {
                            a[row][k] -= f * a[col][k];
                        }
                    }
                }
            }
            (0..n).map(|i| a[i][n] / a[i][i]).collect()
        };
        let baseline = solve(None);
        let floor = baseline[gene_idx] * 2f64.powf(grn.knockout_log2_floor);
        let knocked = solve(Some((gene_idx, floor)));
        baseline
            .iter()
            .zip(&knocked)
            .map(|(b, k)| (k.max(EXPRESSION_FLOOR) / b.max(EXPRESSION_FLOOR)).log2())
            .collect()
    }

    #[test]
    fn shipped_network_matches_builder() {
        let built = build_network();
        assert_eq!(&built, grn(), "data/grn_v1.json is out of date; run examples/generate_grn");
    }

    #[test]
    fn network_shape_and_named_edges() {
        let model = grn();
        assert_eq!(model.genes.len(), 51);
        assert_eq!(model.pathways.len(), 7);
        let edge = |s: &str, t: &str| {
            model.edges.iter().find(|e| e.source == s && e.target == t).map(|e| e.weight)
        };
        assert!(edge("TP53", "CDKN1A").unwrap() > 0.0);
        assert!(edge("KRAS", "BRAF").unwrap() > 0.0);
        assert!(edge("BRAF", "MEK1").unwrap() > 0.0);
        assert!(edge("MEK1", "ERK2").unwrap() > 0.0);
        assert!(model.edges.len() >= 90 && model.edges.len() <= 110);
        let rho = spectral_radius_estimate(&model.adjacency());
        assert!((rho - 0.8).abs() < 0.02, "spectral radius {rho}");
    }

    #[test]
    fn iterative_matches_dense_solve_for_all_knockouts() {
        let model = grn();
        for g in 0..model.genes.len() {
            let fast = knockout_fold_changes(model, g);
            let dense = dense_knockout_fold_changes(model, g);
            for (a, b) in fast.iter().zip(&dense) {
                assert!((a - b).abs() <= 1e-9, "gene {g}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn knocking_out_tp53_suppresses_cdkn1a() {
        let model = grn();
        let tp53 = model.gene_index("TP53").unwrap();
        let fc = knockout_fold_changes(model, tp53);
        let cdkn1a = model.gene_index("CDKN1A").unwrap();
        assert!(
            fc[cdkn1a] < -3.0 * model.noise_scale,
            "removing an activator must suppress its target: {}",
            fc[cdkn1a]
        );
    }

    #[test]
    fn knocked_gene_reports_the_floor() {
        let model = grn();
        let g = model.gene_index("BRCA1").unwrap();
        let fc = knockout_fold_changes(model, g);
        assert!((fc[g] - model.knockout_log2_floor).abs() < 1e-9);
    }

    #[test]
    fn disconnected_pairs_stay_within_noise() {
        // RAD51 has no outgoing edges in the curated set; unless a random
        // edge links it onward, knocking it out must not move upstream
        // genes. Verify against the zero-noise solution directly.
        let model = grn();
        let g = model.gene_index("RAD51").unwrap();
        let has_out = model.edges.iter().any(|e| e.source == "RAD51");
        if !has_out {
            let fc = knockout_fold_changes(model, g);
            for (i, v) in fc.iter().enumerate() {
                if i != g {
                    assert!(v.abs() < 1e-9, "gene {} moved: {v}", model.genes[i]);
                }
            }
        }
    }

    #[test]
    fn oracle_outcome_is_deterministic_and_noised() {
        let oracle = PerturbationOracle::new();
        let ctx = TaskContext { difficulty: Difficulty::L3, seed: 91, kind: TaskKind::DeNovo };
        let hint = oracle.generating_design_hint(&ctx).unwrap();
        let a = oracle.simulate(&ctx, &hint).unwrap();
        let b = oracle.simulate(&ctx, &hint).unwrap();
        assert_eq!(a, b);
        // A different task seed re-draws the noise.
        let ctx2 = TaskContext { difficulty: Difficulty::L3, seed: 92, kind: TaskKind::DeNovo };
        let markers1 = PerturbationOracle::markers(&ctx);
        let markers2 = PerturbationOracle::markers(&ctx2);
        if markers1 == markers2 {
            assert_ne!(oracle.simulate(&ctx2, &hint).unwrap(), a);
        }
    }

    #[test]
    fn unknown_gene_is_rejected() {
        let oracle = PerturbationOracle::new();
        let ctx = TaskContext { difficulty: Difficulty::L1, seed: 0, kind: TaskKind::DeNovo };
        let d = Design::new("perturbation", json!({"gene": "NOT_A_GENE"}));
        assert!(oracle.simulate(&ctx, &d).is_err());
    }

    #[test]
    #[ignore = "regenerates data/grn_v1.json; run when the builder changes"]
    fn regenerate_grn_data_file() {
        let model = build_network();
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/grn_v1.json");
        std::fs::write(path, crate::model::canonical_json_pretty(&model)).unwrap();
    }
}
