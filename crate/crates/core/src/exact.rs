//! Serde helpers writing exact values as `{ "exact": "p/q", "approx": f }`.

use std::collections::BTreeMap;

use serde::ser::{SerializeMap, SerializeStruct};
use serde::Serializer;

use crate::ast::{approximate, format_rational, Rational, Value};

pub(crate) fn rational<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    let mut st = s.serialize_struct("Exact", 2)?;
    st.serialize_field("exact", &format_rational(r))?;
    st.serialize_field("approx", &approximate(r))?;
    st.end()
}

struct ExactValue<'a>(&'a Value);

impl serde::Serialize for ExactValue<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            Value::Bool(b) => s.serialize_bool(*b),
            v => rational(&v.as_rational().expect("numeric value"), s),
        }
    }
}

pub(crate) fn valuation<S: Serializer>(
    map: &BTreeMap<String, Value>,
    s: S,
) -> Result<S::Ok, S::Error> {
    let mut m = s.serialize_map(Some(map.len()))?;
    for (k, v) in map {
        m.serialize_entry(k, &ExactValue(v))?;
    }
    m.end()
}

/// Ordered `(name, value)` pairs as a map.
pub(crate) fn assignment<S: Serializer>(pairs: &[(String, i64)], s: S) -> Result<S::Ok, S::Error> {
    let mut m = s.serialize_map(Some(pairs.len()))?;
    for (k, v) in pairs {
        m.serialize_entry(k, v)?;
    }
    m.end()
}
