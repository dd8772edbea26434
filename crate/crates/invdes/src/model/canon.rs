//! Canonical JSON serialization and the design-equality relation.
//!
//! The wire format used by the harness and agents is plain JSON with
//! lexicographic key order and round-trip-exact decimal numbers. serde_json
//! already gives both: its map type is a BTreeMap and floats render through
//! the shortest round-trip form. The helpers here pin that contract in one
//! place and add the numeric canonicalization used to decide whether two
//! designs are "the same".

use super::Design;
use serde::Serialize;
use serde_json::Value;

/// Canonical compact serialization: lexicographic keys, round-trip numbers.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("serializable value");
    serde_json::to_string(&v).expect("json string")
}

/// Canonical pretty serialization for files meant to be read by humans.
pub fn canonical_json_pretty<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("serializable value");
    let mut s = serde_json::to_string_pretty(&v).expect("json string");
    s.push('\n');
    s
}

/// Rounds a float to 9 significant digits, the resolution at which two
/// numeric parameters are considered equal.
fn round_sig9(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.8e}").parse().unwrap_or(x)
}

fn canonicalize_numbers(v: &Value) -> Value {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Value::from(i)
            } else if let Some(u) = n.as_u64() {
                Value::from(u)
            } else {
                let f = n.as_f64().unwrap_or(0.0);
                Value::from(round_sig9(f))
            }
        }
        Value::Array(items) => Value::Array(items.iter().map(canonicalize_numbers).collect()),
        Value::Object(map) => Value::Object(
            map.iter().map(|(k, val)| (k.clone(), canonicalize_numbers(val))).collect(),
        ),
        other => other.clone(),
    }
}

/// Design equality under canonicalization: sorted keys, numbers rounded to
/// 9 significant digits, sequence order preserved. Reflexive, symmetric, and
/// decidable without oracle calls; this is the relation the optimization
/// success check uses for "the proposed design differs from the start".
pub fn designs_equal(a: &Design, b: &Design) -> bool {
    if a.domain != b.domain {
        return false;
    }
    let ca = canonicalize_numbers(&Value::Object(a.params.clone()));
    let cb = canonicalize_numbers(&Value::Object(b.params.clone()));
    ca == cb
}
