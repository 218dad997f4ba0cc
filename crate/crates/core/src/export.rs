//! Machine-readable outputs: a small ordered-JSON writer with a fixed float
//! policy (17 significant digits, so values round-trip and reports are
//! byte-identical across runs), RFC 4180 CSV, and an FNV content hash for
//! report provenance.

use crate::scalar::Real;
use crate::transfer::{ExponentEstimate, UlamDensity};

/// JSON value with insertion-ordered object keys.
#[derive(Clone, Debug)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    UInt(u64),
    Float(f64),
    Str(String),
    Array(Vec<Json>),
    Object(Vec<(String, Json)>),
}

impl Json {
    pub fn object() -> Json {
        Json::Object(Vec::new())
    }

    pub fn push(&mut self, key: &str, value: Json) -> &mut Self {
        match self {
            Json::Object(entries) => entries.push((key.to_string(), value)),
            _ => panic!("push on non-object"),
        }
        self
    }

    pub fn with(mut self, key: &str, value: Json) -> Self {
        self.push(key, value);
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out);
        out
    }

    fn write(&self, out: &mut String) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(i) => out.push_str(&i.to_string()),
            Json::UInt(u) => out.push_str(&u.to_string()),
            Json::Float(x) => out.push_str(&format_float_17(*x)),
            Json::Str(s) => write_escaped(s, out),
            Json::Array(items) => {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    item.write(out);
                }
                out.push(']');
            }
            Json::Object(entries) => {
                out.push('{');
                for (i, (k, v)) in entries.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    write_escaped(k, out);
                    out.push(':');
                    v.write(out);
                }
                out.push('}');
            }
        }
    }
}

pub fn floats(values: impl IntoIterator<Item = f64>) -> Json {
    Json::Array(values.into_iter().map(Json::Float).collect())
}

/// Fixed 17-significant-digit scientific formatting: deterministic and
/// lossless for f64.
pub fn format_float_17(x: f64) -> String {
    if x.is_nan() {
        return "null".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "1e999".into() } else { "-1e999".into() };
    }
    format!("{:.16e}", x)
}

fn write_escaped(s: &str, out: &mut String) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
}

/// FNV-1a 64-bit content hash, used to stamp reports with their config.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// RFC 4180 CSV: CRLF line endings, quoting only where needed.
pub fn csv_document(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = String::new();
    push_csv_row(&mut out, header.iter().map(|s| s.to_string()));
    for row in rows {
        push_csv_row(&mut out, row.into_iter());
    }
    out
}

fn push_csv_row(out: &mut String, fields: impl Iterator<Item = String>) {
    let mut first = true;
    for field in fields {
        if !first {
            out.push(',');
        }
        first = false;
        if field.contains([',', '"', '\n', '\r']) {
            out.push('"');
            out.push_str(&field.replace('"', "\"\""));
            out.push('"');
        } else {
            out.push_str(&field);
        }
    }
    out.push_str("\r\n");
}

/// Density export: `bin_index, left_endpoint, mass`.
pub fn density_csv<R: Real>(q: &UlamDensity<R>) -> String {
    let n = q.n_bins();
    csv_document(
        &["bin_index", "left_endpoint", "mass"],
        (0..n).map(|j| {
            vec![
                j.to_string(),
                format_float_17(j as f64 / n as f64),
                format_float_17(q.mass()[j].as_f64()),
            ]
        }),
    )
}

/// Exponent estimate as a JSON record `{value, stderr, n_samples, seed, params}`.
pub fn estimate_json<R: Real>(est: &ExponentEstimate<R>, seed: u64, params: Json) -> Json {
    Json::object()
        .with("value", Json::Float(est.value.as_f64()))
        .with("stderr", Json::Float(est.stderr.as_f64()))
        .with("n_samples", Json::UInt(est.n_samples))
        .with("seed", Json::UInt(seed))
        .with("params", params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_round_trips() {
        for &x in &[0.1, -3.25e-17, 0.6931471805599453, 1.0, 12345.678] {
            let s = format_float_17(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn json_rendering_is_ordered_and_escaped() {
        let j = Json::object()
            .with("b", Json::Int(1))
            .with("a", Json::Str("x\"y\n".into()))
            .with("arr", floats([1.0]));
        let s = j.render();
        assert!(s.starts_with("{\"b\":1,\"a\":\"x\\\"y\\n\""), "{s}");
    }

    #[test]
    fn csv_quotes_only_when_needed() {
        let doc = csv_document(
            &["a", "b"],
            vec![vec!["plain".to_string(), "with,comma".to_string()]],
        );
        assert_eq!(doc, "a,b\r\nplain,\"with,comma\"\r\n");
    }

    #[test]
    fn fnv_hash_is_stable() {
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
    }
}
