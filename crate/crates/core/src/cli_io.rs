//! File formats and report helpers shared by the command line and bindings.
//!
//! * pattern: `{"kappa": 4, "triples": [[1,2,3], ...], "directed": false}`
//! * schedule: `["v1", "v2", "p12", ...]` or `{"schedule": [...]}`
//! * parameters: `{"x": {"1": "1/2"}, "y": {"12": "5/4"}, "z": {"123": "241/128"}}`;
//!   keys use the schedule element digits (`"1-12"` style when an index is 10 or more)
//! * instance: `{"n": 6, "hyperedges": [[1,2,3]], "directed": false, "weights": [[1,2,3,7]]}`
//! * operator: `{"n": 2, "table": [..n^3 values..]}` or the bare values separated by whitespace

use crate::assoc::{AssocError, TernaryOperator};
use crate::complexity::ParameterExponents;
use crate::oracle::{InstanceHypergraph, OracleError};
use crate::pattern::{LoadingSchedule, Pair, PatternError, PatternHypergraph, ScheduleElement, Triple};
use crate::rational::{format_rational, parse_rational, Rational};
use serde::Deserialize;
use serde_json::{Map, Value};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{what}: parse error at line {line}, column {column}: {message}")]
    Parse {
        what: &'static str,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{what}: {message}")]
    Validation { what: &'static str, message: String },
}

fn validation(what: &'static str, message: impl ToString) -> IoError {
    IoError::Validation {
        what,
        message: message.to_string(),
    }
}

fn json<T: for<'de> Deserialize<'de>>(what: &'static str, text: &str) -> Result<T, IoError> {
    serde_json::from_str(text).map_err(|e| IoError::Parse {
        what,
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn read_file(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PatternFile {
    kappa: usize,
    triples: Vec<[u8; 3]>,
    #[serde(default)]
    directed: bool,
}

pub fn parse_pattern(text: &str) -> Result<PatternHypergraph, IoError> {
    let f: PatternFile = json("pattern", text)?;
    PatternHypergraph::new(f.kappa, f.triples, f.directed).map_err(|e: PatternError| validation("pattern", e))
}

pub fn pattern_to_json(h: &PatternHypergraph) -> Value {
    let triples: Vec<Value> = h
        .triples()
        .iter()
        .map(|t| serde_json::json!(h.orientation(*t).expect("own triple")))
        .collect();
    serde_json::json!({"kappa": h.kappa(), "triples": triples, "directed": h.is_directed()})
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ScheduleFile {
    List(Vec<String>),
    Object { schedule: Vec<String> },
}

/// Parses the element list. Validity against a pattern is checked separately.
pub fn parse_schedule(text: &str) -> Result<LoadingSchedule, IoError> {
    let list = match json::<ScheduleFile>("schedule", text)? {
        ScheduleFile::List(l) | ScheduleFile::Object { schedule: l } => l,
    };
    list.iter()
        .enumerate()
        .map(|(i, s)| {
            s.parse::<ScheduleElement>()
                .map_err(|e| validation("schedule", format!("element {}: {e}", i + 1)))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(LoadingSchedule::new)
}

fn parse_key(key: &str, arity: usize) -> Option<Vec<u8>> {
    let idx: Vec<u8> = if key.contains(['-', ',']) {
        key.split(['-', ',']).map(|t| t.trim().parse().ok()).collect::<Option<_>>()?
    } else {
        key.chars().map(|c| c.to_digit(10).map(|d| d as u8)).collect::<Option<_>>()?
    };
    (idx.len() == arity).then_some(idx)
}

fn key_of(idx: &[u8]) -> String {
    let sep = if idx.iter().any(|&i| i >= 10) { "-" } else { "" };
    idx.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(sep)
}

fn rational_value(v: &Value) -> Option<Rational> {
    match v {
        Value::String(s) => parse_rational(s).ok(),
        Value::Number(n) => n.as_i64().map(|i| Rational::from_integer(i.into())),
        _ => None,
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsFile {
    x: Map<String, Value>,
    y: Map<String, Value>,
    z: Map<String, Value>,
}

/// Parses exponents and checks keys, ranges and `x <= 1` against `h`.
pub fn parse_params(text: &str, h: &PatternHypergraph) -> Result<ParameterExponents, IoError> {
    let f: ParamsFile = json("params", text)?;
    fn section<K: Ord>(
        name: &str,
        arity: usize,
        m: &Map<String, Value>,
        make: impl Fn(&[u8]) -> K,
    ) -> Result<BTreeMap<K, Rational>, IoError> {
        let mut out = BTreeMap::new();
        for (k, v) in m {
            let idx = parse_key(k, arity).ok_or_else(|| validation("params", format!("{name}: bad key {k:?}")))?;
            let r = rational_value(v)
                .ok_or_else(|| validation("params", format!("{name}[{k}]: expected a rational such as \"3/4\"")))?;
            if r < Rational::from_integer(0.into()) {
                return Err(validation("params", format!("{name}[{k}] = {} is negative", format_rational(&r))));
            }
            out.insert(make(&idx), r);
        }
        Ok(out)
    }
    let p = ParameterExponents {
        x: section("x", 1, &f.x, |i| i[0])?,
        y: section("y", 2, &f.y, |i| Pair::new(i[0], i[1]))?,
        z: section("z", 3, &f.z, |i| Triple::new(i[0], i[1], i[2]))?,
    };
    p.check_keys(h).map_err(|e| validation("params", e))?;
    if let Some((v, x)) = p.x.iter().find(|(_, x)| **x > Rational::from_integer(1.into())) {
        return Err(validation("params", format!("x[{v}] = {} exceeds 1", format_rational(x))));
    }
    Ok(p)
}

pub fn params_to_json(p: &ParameterExponents) -> Value {
    let x: Map<String, Value> = p.x.iter().map(|(k, v)| (key_of(&[*k]), Value::String(format_rational(v)))).collect();
    let y: Map<String, Value> = p.y.iter().map(|(k, v)| (key_of(&k.0), Value::String(format_rational(v)))).collect();
    let z: Map<String, Value> = p.z.iter().map(|(k, v)| (key_of(&k.0), Value::String(format_rational(v)))).collect();
    serde_json::json!({"x": x, "y": y, "z": z})
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    n: u32,
    hyperedges: Vec<[u32; 3]>,
    #[serde(default)]
    directed: bool,
    #[serde(default)]
    weights: Option<Vec<[u32; 4]>>,
}

pub fn parse_instance(text: &str) -> Result<InstanceHypergraph, IoError> {
    let f: InstanceFile = json("instance", text)?;
    let weights = f
        .weights
        .map(|w| w.into_iter().map(|[a, b, c, l]| ([a, b, c], l)).collect::<BTreeMap<_, _>>());
    InstanceHypergraph::new(f.n, f.hyperedges, f.directed, weights).map_err(|e: OracleError| validation("instance", e))
}

pub fn instance_to_json(g: &InstanceHypergraph) -> Value {
    let mut v = serde_json::json!({
        "n": g.n(),
        "hyperedges": g.hyperedges().iter().collect::<Vec<_>>(),
        "directed": g.is_directed(),
    });
    if let Some(w) = g.weights() {
        v["weights"] = w.iter().map(|(t, l)| serde_json::json!([t[0], t[1], t[2], l])).collect();
    }
    v
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OperatorFile {
    n: u32,
    table: Vec<u32>,
}

/// Dense row-major operator table, as JSON or as bare whitespace-separated values.
pub fn parse_operator(text: &str) -> Result<TernaryOperator, IoError> {
    let trimmed = text.trim_start();
    let (n, table) = if trimmed.starts_with('{') {
        let f: OperatorFile = json("operator", text)?;
        (f.n, f.table)
    } else {
        let mut values = Vec::new();
        for (li, line) in text.lines().enumerate() {
            let body = line.split('#').next().unwrap_or("");
            let mut col = 0;
            for tok in body.split_whitespace() {
                col = line[col..].find(tok).map_or(col, |c| col + c) + tok.len();
                values.push(tok.parse::<u32>().map_err(|e| IoError::Parse {
                    what: "operator",
                    line: li + 1,
                    column: col + 1 - tok.len(),
                    message: format!("{tok:?}: {e}"),
                })?);
            }
        }
        let n = (1..=values.len() as u32).find(|k| (*k as usize).pow(3) >= values.len()).unwrap_or(0);
        (n, values)
    };
    TernaryOperator::new(n, table).map_err(|e: AssocError| validation("operator", e))
}

/// Rounds every float in a report to 6 significant digits.
pub fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64");
            if let Some(r) = serde_json::Number::from_f64(round_sig(x, 6)) {
                *n = r;
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_floats),
        Value::Object(m) => m.values_mut().for_each(round_floats),
        _ => {}
    }
}

pub fn round_sig(x: f64, digits: i32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let mag = x.abs().log10().floor() as i32;
    let scale = 10f64.powi(digits - 1 - mag);
    (x * scale).round() / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexity::k4_reference_parameters;
    use crate::rational::ratio;

    #[test]
    fn k4_pattern_parses() {
        let h = parse_pattern(r#"{"kappa": 4, "triples": [[2,3,4],[1,2,3],[1,2,4],[1,3,4]], "directed": false}"#).unwrap();
        assert_eq!(h, PatternHypergraph::k4());
        assert_eq!(h.triples().len(), 4);
    }

    #[test]
    fn repeated_vertex_is_a_validation_error() {
        let e = parse_pattern(r#"{"kappa": 3, "triples": [[1,1,2]]}"#).unwrap_err();
        assert!(matches!(e, IoError::Validation { what: "pattern", .. }));
    }

    #[test]
    fn parse_error_has_location() {
        match parse_pattern("{\n  \"kappa\": 4,\n  \"triples\": [[1,2,]]\n}") {
            Err(IoError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn params_round_trip() {
        let p = k4_reference_parameters();
        let text = params_to_json(&p).to_string();
        let back = parse_params(&text, &PatternHypergraph::k4()).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.z[&Triple::new(1, 2, 3)], ratio(241, 128));
    }

    #[test]
    fn params_key_mismatch() {
        let text = r#"{"x": {"1": "1/2"}, "y": {}, "z": {}}"#;
        assert!(matches!(parse_params(text, &PatternHypergraph::k4()), Err(IoError::Validation { .. })));
    }

    #[test]
    fn schedule_both_shapes() {
        let a = parse_schedule(r#"["v1","v2","v3","p12"]"#).unwrap();
        let b = parse_schedule(r#"{"schedule": ["v1","v2","v3","p12"]}"#).unwrap();
        assert_eq!(a, b);
        assert!(parse_schedule(r#"["q1"]"#).is_err());
    }

    #[test]
    fn operator_text_and_json() {
        let a = parse_operator("1 2 2 1\n2 1 1 2 # row 2\n").unwrap();
        let b = parse_operator(r#"{"n": 2, "table": [1,2,2,1,2,1,1,2]}"#).unwrap();
        assert_eq!(a, b);
        assert!(parse_operator("1 2 3").is_err());
    }

    #[test]
    fn instance_round_trip() {
        let text = r#"{"n": 4, "hyperedges": [[3,1,2]], "directed": false}"#;
        let g = parse_instance(text).unwrap();
        assert_eq!(parse_instance(&instance_to_json(&g).to_string()).unwrap(), g);
    }

    #[test]
    fn rounding() {
        assert_eq!(round_sig(0.123456789, 6), 0.123457);
        assert_eq!(round_sig(123456789.0, 6), 123457000.0);
        let mut v = serde_json::json!({"a": [1.0000004, 3], "b": 2});
        round_floats(&mut v);
        assert_eq!(v, serde_json::json!({"a": [1.0, 3], "b": 2}));
    }
}
