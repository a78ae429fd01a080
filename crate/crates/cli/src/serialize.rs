//! Canonical JSON forms of scalars, polynomials and fibre series.
//!
//! Terms are emitted in the graded-lexicographic order the core types keep
//! them in, coefficients as lowest-terms `a/b` or `a/b+c/d*I` strings, and
//! object keys sorted, so equal values always serialize to equal bytes.

use fedosov_core::{BasePolynomial, FibreSeries, MultiIndex, Scalar};
use serde_json::{json, Value};

pub fn scalar(c: &Scalar) -> Value {
    Value::String(c.canonical_string())
}

pub fn multi_index(m: &MultiIndex) -> Value {
    Value::Array(m.exponents().iter().map(|&e| Value::from(e)).collect())
}

pub fn polynomial(p: &BasePolynomial, names: &[String]) -> Value {
    let terms: Vec<Value> =
        p.terms().map(|(m, c)| json!({ "x_multi_index": multi_index(m), "coeff": scalar(c) })).collect();
    json!({ "display": p.display_with(names), "terms": terms })
}

/// `order` is `null` for exact series.
pub fn series(f: &FibreSeries, names: &[String]) -> Value {
    let mut terms = Vec::new();
    for (xm, p) in f.terms() {
        for (m, c) in p.terms() {
            terms.push(json!({
                "xi_multi_index": multi_index(xm),
                "x_multi_index": multi_index(m),
                "coeff": scalar(c),
            }));
        }
    }
    let order = if f.is_exact() { Value::Null } else { Value::from(f.order()) };
    json!({ "display": f.display_with(names), "order": order, "terms": terms })
}

pub fn series_list(fs: &[FibreSeries], names: &[String]) -> Value {
    Value::Array(fs.iter().map(|f| series(f, names)).collect())
}

pub fn series_matrix(rows: &[Vec<FibreSeries>], names: &[String]) -> Value {
    Value::Array(rows.iter().map(|r| series_list(r, names)).collect())
}

/// One residual entry; `index` is 1-based.
pub fn residual(index: &[usize], value: Value) -> Value {
    json!({ "index": index.iter().map(|i| i + 1).collect::<Vec<_>>(), "value": value })
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}
