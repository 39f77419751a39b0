//! Shared helpers for machine-readable output.

use serde_json::{Map, Number, Value};

/// Version tag carried by every JSON report.
pub const SCHEMA_VERSION: u32 = 1;

/// Float formatted with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// JSON number carrying 17 significant digits verbatim; non-finite values
/// become strings.
pub fn json_f64(x: f64) -> Value {
    match fmt_f64(x).parse::<Number>() {
        Ok(n) if x.is_finite() => Value::Number(n),
        _ => Value::String(x.to_string()),
    }
}

/// Object with a `schema_version` field and the given entries. Keys are
/// kept sorted by serde_json's default map.
pub fn json_report<I: IntoIterator<Item = (&'static str, Value)>>(entries: I) -> Value {
    let mut m = Map::new();
    m.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
    for (k, v) in entries {
        m.insert(k.into(), v);
    }
    Value::Object(m)
}
