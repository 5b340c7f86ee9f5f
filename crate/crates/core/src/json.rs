//! Minimal JSON document builder with deterministic byte output.
//!
//! Reports must be byte-identical across reruns: keys keep insertion order
//! and every real is formatted with exactly 17 significant digits. Infinite
//! values are encoded as the strings `"inf"` / `"-inf"`.

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(String, Json)>),
}

impl Json {
    pub fn str(s: impl Into<String>) -> Json {
        Json::Str(s.into())
    }

    pub fn obj(fields: Vec<(&str, Json)>) -> Json {
        Json::Obj(fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }

    /// Encode a scalar, mapping non-finite values to strings.
    pub fn real<T: Real>(x: T) -> Json {
        let v = x.as_f64();
        if v.is_finite() {
            Json::Num(v)
        } else if v.is_nan() {
            Json::Str("nan".to_string())
        } else if v > 0.0 {
            Json::Str("inf".to_string())
        } else {
            Json::Str("-inf".to_string())
        }
    }

    /// Render the document with a trailing newline.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out.push('\n');
        out
    }

    fn write(&self, out: &mut String, indent: usize) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(i) => out.push_str(&i.to_string()),
            Json::Num(v) => out.push_str(&format!("{v:.16e}")),
            Json::Str(s) => write_escaped(out, s),
            Json::Arr(items) => {
                if items.is_empty() {
                    out.push_str("[]");
                    return;
                }
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push(' ');
                    item.write(out, indent);
                }
                out.push_str(" ]");
            }
            Json::Obj(fields) => {
                if fields.is_empty() {
                    out.push_str("{}");
                    return;
                }
                out.push_str("{\n");
                let pad = "  ".repeat(indent + 1);
                for (i, (k, v)) in fields.iter().enumerate() {
                    out.push_str(&pad);
                    write_escaped(out, k);
                    out.push_str(": ");
                    v.write(out, indent + 1);
                    if i + 1 < fields.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                out.push_str(&"  ".repeat(indent));
                out.push('}');
            }
        }
    }
}

fn write_escaped(out: &mut String, s: &str) {
    out.push('"');
    for ch in s.chars() {
        match ch {
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_17_significant_digits() {
        let j = Json::real(0.9f64);
        assert_eq!(j.render().trim(), "9.0000000000000002e-1");
        let j = Json::real(9.0 / 11.0);
        assert_eq!(j.render().trim(), "8.1818181818181823e-1");
    }

    #[test]
    fn infinities_become_strings() {
        assert_eq!(Json::real(f64::INFINITY).render().trim(), "\"inf\"");
        assert_eq!(Json::real(f64::NEG_INFINITY).render().trim(), "\"-inf\"");
    }

    #[test]
    fn object_layout_is_stable() {
        let doc = Json::obj(vec![
            ("schema", Json::Int(1)),
            ("ok", Json::Bool(true)),
            ("items", Json::Arr(vec![Json::Int(1), Json::Int(2)])),
            ("nested", Json::obj(vec![("x", Json::Null)])),
        ]);
        let a = doc.render();
        let b = doc.render();
        assert_eq!(a, b);
        assert!(a.contains("\"schema\": 1"));
        assert!(a.contains("[ 1, 2 ]"));
    }

    #[test]
    fn strings_are_escaped() {
        let j = Json::str("a\"b\\c\nd");
        assert_eq!(j.render().trim(), r#""a\"b\\c\nd""#);
    }
}
