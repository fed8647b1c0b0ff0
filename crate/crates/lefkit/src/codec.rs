//! JSON encoding of the core types.
//!
//! Rationals are strings `"a/b"` (or `"a"`), matrices are arrays of rows,
//! graded objects are objects keyed by degree. Decoding always knows the
//! expected shape, so empty matrices may be written as `[]`.

use std::collections::BTreeMap;

use lefkit_core::linalg::{format_rational, parse_rational};
use lefkit_core::{GradedMap, GradedPairing, GradedSpace, LefschetzModule, Matrix, Rational, Subspaces};
use serde_json::{json, Map, Value};

use crate::result::CliError;

pub type Obj = Map<String, Value>;

// ---------------------------------------------------------------------------
// Encoding.

pub fn rational(q: &Rational) -> Value {
    Value::String(format_rational(q))
}

pub fn vector(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(rational).collect())
}

pub fn matrix(m: &Matrix) -> Value {
    Value::Array(m.to_rows().iter().map(|r| vector(r)).collect())
}

/// Columns of `m` as a list of coordinate vectors.
pub fn columns(m: &Matrix) -> Value {
    Value::Array(m.columns().iter().map(|c| vector(c)).collect())
}

pub fn dims(s: &GradedSpace) -> Value {
    Value::Object(s.dims().iter().map(|(d, n)| (d.to_string(), json!(n))).collect())
}

/// Stored blocks with no zero-sized side.
pub fn graded_map(f: &GradedMap) -> Value {
    Value::Object(
        f.stored_blocks()
            .iter()
            .filter(|(_, b)| b.rows() > 0 && b.cols() > 0)
            .map(|(d, b)| (d.to_string(), matrix(b)))
            .collect(),
    )
}

pub fn subspaces(s: &Subspaces) -> Value {
    Value::Object(
        s.ambient()
            .degrees()
            .map(|d| (d.to_string(), columns(&s.basis(d))))
            .collect(),
    )
}

pub fn pairing(p: &GradedPairing) -> Value {
    let blocks: Obj = p
        .stored_blocks()
        .iter()
        .filter(|(_, b)| b.rows() > 0 && b.cols() > 0)
        .map(|(d, b)| (d.to_string(), matrix(b)))
        .collect();
    json!({ "total": p.total(), "blocks": blocks })
}

/// `{"n", "dims", "L"}`.
pub fn module(m: &LefschetzModule) -> Obj {
    let mut o = Obj::new();
    o.insert("n".into(), json!(m.n()));
    o.insert("dims".into(), dims(m.space()));
    o.insert("L".into(), graded_map(m.l()));
    o
}

/// `c_1·x_1 + c_2·x_2` with unit coefficients dropped; `"0"` for zero.
pub fn combination(v: &[Rational], names: &[String]) -> String {
    use num_traits::{One, Signed, Zero};
    let mut out = String::new();
    for (k, c) in v.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let name = names.get(k).cloned().unwrap_or_else(|| format!("e{}", k + 1));
        let neg = c.is_negative();
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let a = c.abs();
        if !a.is_one() {
            out.push_str(&format_rational(&a));
            out.push('·');
        }
        out.push_str(&name);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

// ---------------------------------------------------------------------------
// Decoding.

fn bad(path: &str, what: impl std::fmt::Display) -> CliError {
    CliError::contract(format!("{path}: {what}"))
}

pub fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Obj, CliError> {
    v.as_object().ok_or_else(|| bad(path, "expected an object"))
}

pub fn field<'a>(o: &'a Obj, key: &str, path: &str) -> Result<&'a Value, CliError> {
    o.get(key).ok_or_else(|| bad(path, format!("missing field \"{key}\"")))
}

pub fn int(v: &Value, path: &str) -> Result<i64, CliError> {
    v.as_i64().ok_or_else(|| bad(path, "expected an integer"))
}

pub fn int_field(o: &Obj, key: &str, path: &str) -> Result<i32, CliError> {
    let p = format!("{path}.{key}");
    let x = int(field(o, key, path)?, &p)?;
    i32::try_from(x).map_err(|_| bad(&p, "integer out of range"))
}

pub fn parse_rat(v: &Value, path: &str) -> Result<Rational, CliError> {
    match v {
        Value::String(s) => parse_rational(s).map_err(|e| bad(path, e)),
        Value::Number(n) if n.is_i64() => Ok(Rational::from_integer(n.as_i64().unwrap_or(0).into())),
        _ => Err(bad(path, "expected a rational string like \"3/2\"")),
    }
}

pub fn parse_vector(v: &Value, len: usize, path: &str) -> Result<Vec<Rational>, CliError> {
    let a = v.as_array().ok_or_else(|| bad(path, "expected an array"))?;
    if a.len() != len {
        return Err(bad(path, format!("expected {len} entries, got {}", a.len())));
    }
    a.iter().enumerate().map(|(k, x)| parse_rat(x, &format!("{path}[{k}]"))).collect()
}

pub fn parse_matrix(v: &Value, rows: usize, cols: usize, path: &str) -> Result<Matrix, CliError> {
    let a = v.as_array().ok_or_else(|| bad(path, "expected an array of rows"))?;
    if a.is_empty() && rows * cols == 0 {
        return Ok(Matrix::zeros(rows, cols));
    }
    if a.len() != rows {
        return Err(bad(path, format!("expected {rows} rows, got {}", a.len())));
    }
    let rows_v = a
        .iter()
        .enumerate()
        .map(|(k, r)| parse_vector(r, cols, &format!("{path}[{k}]")))
        .collect::<Result<Vec<_>, _>>()?;
    Matrix::from_rows(rows_v, cols).map_err(|e| bad(path, e))
}

fn degree(key: &str, path: &str) -> Result<i32, CliError> {
    key.parse().map_err(|_| bad(path, format!("\"{key}\" is not a degree")))
}

pub fn parse_dims(v: &Value, path: &str) -> Result<GradedSpace, CliError> {
    let o = object(v, path)?;
    let mut out = Vec::new();
    for (k, x) in o {
        let p = format!("{path}.{k}");
        let n = int(x, &p)?;
        let n = usize::try_from(n).map_err(|_| bad(&p, "dimension must be non-negative"))?;
        out.push((degree(k, path)?, n));
    }
    Ok(GradedSpace::new(out))
}

/// Blocks keyed by source degree, each of shape `target(d + shift) x source(d)`.
pub fn parse_map(v: &Value, source: &GradedSpace, target: &GradedSpace, shift: i32, path: &str) -> Result<GradedMap, CliError> {
    let o = object(v, path)?;
    let mut blocks = BTreeMap::new();
    for (k, x) in o {
        let d = degree(k, path)?;
        let m = parse_matrix(x, target.dim(d + shift), source.dim(d), &format!("{path}.{k}"))?;
        blocks.insert(d, m);
    }
    GradedMap::new(source.clone(), target.clone(), shift, blocks).map_err(|e| bad(path, e))
}

pub fn parse_subspaces(v: &Value, ambient: &GradedSpace, path: &str) -> Result<Subspaces, CliError> {
    let o = object(v, path)?;
    let mut bases = BTreeMap::new();
    for (k, x) in o {
        let d = degree(k, path)?;
        let p = format!("{path}.{k}");
        let cols = x.as_array().ok_or_else(|| bad(&p, "expected a list of columns"))?;
        let n = ambient.dim(d);
        let cols = cols
            .iter()
            .enumerate()
            .map(|(c, col)| parse_vector(col, n, &format!("{p}[{c}]")))
            .collect::<Result<Vec<_>, _>>()?;
        bases.insert(d, Matrix::from_columns(n, &cols).map_err(|e| bad(&p, e))?);
    }
    Subspaces::new(ambient, bases).map_err(|e| bad(path, e))
}

pub fn parse_pairing(v: &Value, space: &GradedSpace, path: &str) -> Result<GradedPairing, CliError> {
    let o = object(v, path)?;
    let total = int_field(o, "total", path)?;
    let bo = object(field(o, "blocks", path)?, &format!("{path}.blocks"))?;
    let mut blocks = BTreeMap::new();
    for (k, x) in bo {
        let d = degree(k, path)?;
        let m = parse_matrix(x, space.dim(d), space.dim(total - d), &format!("{path}.blocks.{k}"))?;
        blocks.insert(d, m);
    }
    GradedPairing::new(space.clone(), total, blocks).map_err(|e| bad(path, e))
}

/// `{"dims", "L"}` with the center integer supplied by the caller, or read
/// from `"n"` when `n` is `None`.
pub fn parse_module(o: &Obj, n: Option<i32>, path: &str) -> Result<LefschetzModule, CliError> {
    let n = match n {
        Some(n) => n,
        None => int_field(o, "n", path)?,
    };
    let space = parse_dims(field(o, "dims", path)?, &format!("{path}.dims"))?;
    let l = match o.get("L") {
        Some(v) => parse_map(v, &space, &space, 1, &format!("{path}.L"))?,
        None => GradedMap::zero(space.clone(), space.clone(), 1),
    };
    LefschetzModule::new(space, l, n).map_err(|e| bad(path, e))
}

pub fn names(v: Option<&Value>, path: &str) -> Result<BTreeMap<i32, Vec<String>>, CliError> {
    let Some(v) = v else { return Ok(BTreeMap::new()) };
    let o = object(v, path)?;
    let mut out = BTreeMap::new();
    for (k, x) in o {
        let p = format!("{path}.{k}");
        let list = x.as_array().ok_or_else(|| bad(&p, "expected a list of names"))?;
        let list = list
            .iter()
            .map(|s| s.as_str().map(str::to_string).ok_or_else(|| bad(&p, "names must be strings")))
            .collect::<Result<Vec<_>, _>>()?;
        out.insert(degree(k, path)?, list);
    }
    Ok(out)
}

pub fn encode_names(m: &BTreeMap<i32, Vec<String>>) -> Value {
    Value::Object(m.iter().map(|(d, v)| (d.to_string(), json!(v))).collect())
}
