//! Problem files: raw `{a, b, n}` specs, tagged canonical forms, claimed
//! solution lists, and `value` / `lo:hi` quantity flags.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use qes_core::apps::Quantity;
use qes_core::forms::{CanonicalForm, FormKind};
use qes_core::{OdeSpec, C64};
use serde_json::Value;

/// Marks an error as bad user input (exit status 2).
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

pub fn bad(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(InputError(msg.into()))
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| bad(format!("reading {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| bad(format!("parsing {}: {e}", path.display())))
}

/// Plain numbers become `[x, 0]` everywhere except under the keys that are
/// integers or tags.
pub fn complexify(v: Value) -> Value {
    fn walk(v: Value, key: Option<&str>) -> Value {
        match v {
            Value::Number(x) if !matches!(key, Some("n")) => Value::Array(vec![Value::Number(x), Value::from(0.0)]),
            Value::Array(items) => {
                let is_pair = items.len() == 2 && items.iter().all(Value::is_number);
                if is_pair {
                    Value::Array(items)
                } else {
                    Value::Array(items.into_iter().map(|x| walk(x, None)).collect())
                }
            }
            Value::Object(map) => Value::Object(
                map.into_iter()
                    .map(|(k, x)| {
                        let y = walk(x, Some(&k));
                        (k, y)
                    })
                    .collect(),
            ),
            other => other,
        }
    }
    walk(v, None)
}

/// `raw` (or no `--form`) reads `{a, b, n}`; a form name reads the tagged
/// form object, whose `form` tag may be omitted. `n` comes from `--n` or the
/// file.
pub fn load_problem(path: &Path, form: Option<&str>, n: Option<usize>) -> Result<(OdeSpec, Option<CanonicalForm>)> {
    let mut v = read_json(path)?;
    let Some(obj) = v.as_object_mut() else {
        return Err(bad(format!("{}: expected a JSON object", path.display())));
    };
    let file_n = match obj.remove("n") {
        Some(x) => Some(x.as_u64().ok_or_else(|| bad("n must be a non-negative integer"))? as usize),
        None => None,
    };
    let n = n.or(file_n).ok_or_else(|| bad("degree n missing: pass --n or put \"n\" in the file"))?;
    let form = form.or_else(|| obj.get("form").and_then(Value::as_str)).unwrap_or("raw").to_string();
    if form == "raw" {
        obj.remove("form");
        let mut raw = complexify(v);
        raw["n"] = Value::from(n);
        let spec: OdeSpec = serde_json::from_value(raw).map_err(|e| bad(format!("raw spec: {e}")))?;
        return Ok((spec, None));
    }
    let kind = FormKind::parse(&form).ok_or_else(|| bad(format!("unknown form {form:?}")))?;
    obj.insert("form".into(), Value::from(kind.name()));
    let parsed: CanonicalForm =
        serde_json::from_value(complexify(v)).map_err(|e| bad(format!("{} form: {e}", kind.name())))?;
    let spec = parsed.to_spec(n).map_err(|e| bad(e.to_string()))?;
    Ok((spec, Some(parsed)))
}

/// A claimed solution: roots plus optional claimed coefficients.
#[derive(Debug, Clone)]
pub struct Claim {
    pub roots: Vec<C64>,
    pub coeffs: Option<[C64; 3]>,
}

fn complex_of(v: &Value) -> Result<C64> {
    match v {
        Value::Number(x) => Ok(C64::new(x.as_f64().unwrap_or(f64::NAN), 0.0)),
        Value::Array(p) if p.len() == 2 => {
            let re = p[0].as_f64().ok_or_else(|| bad("complex entries must be numbers"))?;
            let im = p[1].as_f64().ok_or_else(|| bad("complex entries must be numbers"))?;
            Ok(C64::new(re, im))
        }
        _ => Err(bad(format!("expected a number or [re, im], got {v}"))),
    }
}

fn claim_of(v: &Value) -> Result<Claim> {
    let roots_of = |r: &Value| -> Result<Vec<C64>> {
        r.as_array().ok_or_else(|| bad("roots must be a list"))?.iter().map(complex_of).collect()
    };
    match v {
        Value::Array(_) => Ok(Claim { roots: roots_of(v)?, coeffs: None }),
        Value::Object(m) => {
            let roots = roots_of(m.get("roots").ok_or_else(|| bad("solution object without \"roots\""))?)?;
            let coeffs = match (m.get("c2"), m.get("c1"), m.get("c0")) {
                (Some(c2), Some(c1), Some(c0)) => Some([complex_of(c2)?, complex_of(c1)?, complex_of(c0)?]),
                (None, None, None) => None,
                _ => return Err(bad("give all of c2, c1, c0 or none")),
            };
            Ok(Claim { roots, coeffs })
        }
        _ => Err(bad(format!("unrecognised solution entry {v}"))),
    }
}

/// Accepts a bare list, `{"solutions": [...]}`, or a `solve` output document.
pub fn load_claims(path: &Path) -> Result<Vec<Claim>> {
    let v = read_json(path)?;
    let list = if v.is_array() {
        &v
    } else if let Some(s) = v.get("solutions") {
        s
    } else if let Some(s) = v.get("result").and_then(|r| r.get("solutions")) {
        s
    } else {
        bail!(InputError(format!("{}: no solution list found", path.display())));
    };
    let items = list.as_array().ok_or_else(|| bad("solutions must be a list"))?;
    items.iter().map(claim_of).collect::<Result<_>>().with_context(|| format!("in {}", path.display()))
}

/// `v` for a given value, `lo:hi` for an unknown with that start box.
pub fn parse_quantity(s: &str) -> std::result::Result<Quantity, String> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    match s.split_once(':') {
        Some((lo, hi)) => {
            let (lo, hi) = (num(lo)?, num(hi)?);
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(format!("start box {s:?} needs finite lo < hi"));
            }
            Ok(Quantity::unknown(lo, hi))
        }
        None => {
            let v = num(s)?;
            if !v.is_finite() {
                return Err(format!("{s:?} is not finite"));
            }
            Ok(Quantity::fixed(v))
        }
    }
}
