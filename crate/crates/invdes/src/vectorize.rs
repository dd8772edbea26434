//! Flat parameterization of design spaces.
//!
//! Domains with a fixed-shape design (a handful of scalars plus enumerated
//! choices) expose a [`DesignSpace`]: an ordered list of real and categorical
//! dimensions plus encode/decode closures. Hill climbing, the cross-entropy
//! optimizer, and the calibration sweep all work on these vectors instead of
//! raw JSON. Variable-shape domains (gate sequences, reaction networks,
//! layer stacks) do not vectorize and fall back to their native samplers.

use crate::model::Design;
use crate::rng::DetRng;

/// One coordinate of a design vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DimValue {
    Real(f64),
    Cat(usize),
}

impl DimValue {
    pub fn as_real(&self) -> f64 {
        match self {
            DimValue::Real(x) => *x,
            DimValue::Cat(i) => *i as f64,
        }
    }
    pub fn as_cat(&self) -> usize {
        match self {
            DimValue::Cat(i) => *i,
            DimValue::Real(x) => *x as usize,
        }
    }
}

/// Declared dimension of a design space.
#[derive(Debug, Clone)]
pub enum Dim {
    /// Continuous value in `[lo, hi]`.
    Real { name: String, lo: f64, hi: f64 },
    /// Integer value in `[lo, hi]`, carried as a rounded real.
    Int { name: String, lo: i64, hi: i64 },
    /// Index into an enumeration with `n` choices.
    Cat { name: String, n: usize },
}

impl Dim {
    pub fn real(name: &str, lo: f64, hi: f64) -> Self {
        Dim::Real { name: name.to_string(), lo, hi }
    }
    pub fn int(name: &str, lo: i64, hi: i64) -> Self {
        Dim::Int { name: name.to_string(), lo, hi }
    }
    pub fn cat(name: &str, n: usize) -> Self {
        Dim::Cat { name: name.to_string(), n }
    }

    pub fn name(&self) -> &str {
        match self {
            Dim::Real { name, .. } | Dim::Int { name, .. } | Dim::Cat { name, .. } => name,
        }
    }

    /// Width of the continuous range (1.0 for categoricals, used to scale
    /// perturbation steps).
    pub fn range(&self) -> f64 {
        match self {
            Dim::Real { lo, hi, .. } => hi - lo,
            Dim::Int { lo, hi, .. } => (hi - lo) as f64,
            Dim::Cat { .. } => 1.0,
        }
    }

    pub fn clamp(&self, v: DimValue) -> DimValue {
        match (self, v) {
            (Dim::Real { lo, hi, .. }, DimValue::Real(x)) => DimValue::Real(x.clamp(*lo, *hi)),
            (Dim::Int { lo, hi, .. }, DimValue::Real(x)) => {
                DimValue::Real(x.round().clamp(*lo as f64, *hi as f64))
            }
            (Dim::Int { lo, hi, .. }, DimValue::Cat(i)) => {
                DimValue::Real((i as f64).clamp(*lo as f64, *hi as f64))
            }
            (Dim::Cat { n, .. }, DimValue::Cat(i)) => DimValue::Cat(i.min(n.saturating_sub(1))),
            (Dim::Cat { n, .. }, DimValue::Real(x)) => {
                DimValue::Cat((x.round().max(0.0) as usize).min(n.saturating_sub(1)))
            }
            (Dim::Real { lo, hi, .. }, DimValue::Cat(i)) => {
                DimValue::Real((i as f64).clamp(*lo, *hi))
            }
        }
    }

    pub fn sample(&self, rng: &mut DetRng) -> DimValue {
        match self {
            Dim::Real { lo, hi, .. } => DimValue::Real(rng.uniform(*lo, *hi)),
            Dim::Int { lo, hi, .. } => DimValue::Real(rng.int_range(*lo, *hi) as f64),
            Dim::Cat { n, .. } => DimValue::Cat(rng.below(*n)),
        }
    }

    /// Maps a unit-cube coordinate onto this dimension (used by the
    /// low-discrepancy calibration sweep).
    pub fn from_unit(&self, u: f64) -> DimValue {
        match self {
            Dim::Real { lo, hi, .. } => DimValue::Real(lo + (hi - lo) * u),
            Dim::Int { lo, hi, .. } => {
                let span = (hi - lo + 1) as f64;
                DimValue::Real((*lo as f64 + (u * span).floor()).min(*hi as f64))
            }
            Dim::Cat { n, .. } => DimValue::Cat(((u * *n as f64) as usize).min(n - 1)),
        }
    }

    pub fn is_cat(&self) -> bool {
        matches!(self, Dim::Cat { .. })
    }
}

type DecodeFn = dyn Fn(&[DimValue]) -> Design + Send + Sync;
type EncodeFn = dyn Fn(&Design) -> Option<Vec<DimValue>> + Send + Sync;

/// A declared parameterization: dims plus the mapping to and from designs.
pub struct DesignSpace {
    pub dims: Vec<Dim>,
    decode: Box<DecodeFn>,
    encode: Box<EncodeFn>,
}

impl DesignSpace {
    pub fn new(
        dims: Vec<Dim>,
        decode: impl Fn(&[DimValue]) -> Design + Send + Sync + 'static,
        encode: impl Fn(&Design) -> Option<Vec<DimValue>> + Send + Sync + 'static,
    ) -> Self {
        DesignSpace { dims, decode: Box::new(decode), encode: Box::new(encode) }
    }

    /// Clamps every coordinate into its dimension and assembles the design.
    pub fn decode(&self, values: &[DimValue]) -> Design {
        assert_eq!(values.len(), self.dims.len(), "dimension mismatch");
        let clamped: Vec<DimValue> =
            self.dims.iter().zip(values).map(|(d, v)| d.clamp(*v)).collect();
        (self.decode)(&clamped)
    }

    /// Recovers the vector for a design, if the design fits this space.
    pub fn encode(&self, design: &Design) -> Option<Vec<DimValue>> {
        (self.encode)(design)
    }

    pub fn sample(&self, rng: &mut DetRng) -> Vec<DimValue> {
        self.dims.iter().map(|d| d.sample(rng)).collect()
    }

    /// Low-discrepancy point `index` of the sweep over this space.
    pub fn sweep_point(&self, index: u64) -> Vec<DimValue> {
        let unit = crate::rng::halton_point(index, self.dims.len());
        self.dims.iter().zip(unit).map(|(d, u)| d.from_unit(u)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn toy_space() -> DesignSpace {
        DesignSpace::new(
            vec![Dim::real("x", 0.0, 10.0), Dim::cat("mode", 3)],
            |vals| {
                let mode = ["a", "b", "c"][vals[1].as_cat()];
                Design::new("toy", json!({"x": vals[0].as_real(), "mode": mode}))
            },
            |d| {
                let x = d.f64("x")?;
                let mode = d.get("mode")?.as_str()?;
                let i = ["a", "b", "c"].iter().position(|m| *m == mode)?;
                Some(vec![DimValue::Real(x), DimValue::Cat(i)])
            },
        )
    }

    #[test]
    fn decode_clamps_into_bounds() {
        let space = toy_space();
        let d = space.decode(&[DimValue::Real(99.0), DimValue::Cat(7)]);
        assert_eq!(d.f64("x").unwrap(), 10.0);
        assert_eq!(d.get("mode").unwrap(), "c");
    }

    #[test]
    fn encode_round_trips() {
        let space = toy_space();
        let d = space.decode(&[DimValue::Real(4.5), DimValue::Cat(1)]);
        let v = space.encode(&d).unwrap();
        assert_eq!(v, vec![DimValue::Real(4.5), DimValue::Cat(1)]);
    }

    #[test]
    fn sweep_points_stay_in_bounds() {
        let space = toy_space();
        for i in 0..64 {
            let p = space.sweep_point(i);
            let d = space.decode(&p);
            let x = d.f64("x").unwrap();
            assert!((0.0..=10.0).contains(&x));
        }
    }
}
