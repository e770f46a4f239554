//! Experiment spec files.
//!
//! Two equivalent syntaxes over the same flat keys:
//!
//! ```text
//! # key = value, one spec per block; blocks are separated by blank lines or `---`
//! n = 100
//! k = 20
//! gamma = estimated      # or a number for a known scale
//! truth = sin            # zero | sin | power | neg_power
//! c = 0.5
//! alpha = 2
//! ```
//!
//! or a JSON object (or array of objects) with the same keys. Unset keys take the size-study
//! defaults of [`ExperimentSpec::new`]; `seed` falls back to the caller's default.

use std::collections::BTreeMap;

use crate::error::{GofError, Result};
use crate::sims::{ErrorLaw, ExperimentSpec, GammaMode, Truth};

const KEYS: [&str; 15] = [
    "n", "h", "h1", "k", "level", "gamma", "truth", "c", "alpha", "p", "x0", "errors", "reps", "seed",
    "a1",
];

fn invalid(msg: String) -> GofError {
    GofError::InvalidSpec(msg)
}

fn get<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    map.get(key)
        .map(|v| {
            v.parse::<T>()
                .map_err(|_| invalid(format!("{key} = {v:?} is not valid")))
        })
        .transpose()
}

fn spec_from_map(map: &BTreeMap<String, String>, default_seed: u64) -> Result<ExperimentSpec> {
    for k in map.keys() {
        if !KEYS.contains(&k.as_str()) {
            return Err(invalid(format!("unknown key {k:?}")));
        }
    }
    let n = get(map, "n")?.ok_or_else(|| invalid("missing key n".into()))?;
    let reps = get(map, "reps")?.unwrap_or(1000);
    let seed = get(map, "seed")?.unwrap_or(default_seed);
    let mut spec = ExperimentSpec::new(n, reps, seed);
    if let Some(h) = get(map, "h")? {
        spec.h = h;
        spec.h1 = h;
    }
    if let Some(h1) = get(map, "h1")? {
        spec.h1 = h1;
    }
    if let Some(k) = get(map, "k")? {
        spec.k = k;
    }
    if let Some(l) = get(map, "level")? {
        spec.level = l;
    }
    if let Some(a) = get(map, "a1")? {
        spec.a1 = a;
    }
    spec.gamma_mode = match map.get("gamma").map(String::as_str) {
        None | Some("estimated") => GammaMode::Estimated,
        Some(v) => GammaMode::Known {
            gamma: v
                .parse()
                .map_err(|_| invalid(format!("gamma = {v:?} is neither a number nor \"estimated\"")))?,
        },
    };
    spec.errors = match map.get("errors").map(String::as_str) {
        None | Some("uniform") | Some("uniform_unit") => ErrorLaw::UniformUnit,
        Some("neg_exponential") | Some("exponential") => ErrorLaw::NegExponential,
        Some(v) => return Err(invalid(format!("unknown error law {v:?}"))),
    };
    let c = get(map, "c")?.unwrap_or(1.0);
    let p = get(map, "p")?.unwrap_or(2);
    let x0 = get(map, "x0")?.unwrap_or(0.0);
    spec.truth = match map.get("truth").map(String::as_str) {
        None | Some("zero") => Truth::Zero,
        Some("sin") => Truth::Sin {
            c,
            alpha: get(map, "alpha")?.unwrap_or(1.0),
        },
        Some("power") => Truth::Power { c, p, x0 },
        Some("neg_power") => Truth::NegPower { c, p, x0 },
        Some(v) => return Err(invalid(format!("unknown truth {v:?}"))),
    };
    spec.validate()?;
    Ok(spec)
}

fn json_scalar(v: &serde_json::Value) -> Result<String> {
    match v {
        serde_json::Value::String(s) => Ok(s.clone()),
        serde_json::Value::Number(n) => Ok(n.to_string()),
        serde_json::Value::Bool(b) => Ok(b.to_string()),
        other => Err(invalid(format!("expected a scalar value, got {other}"))),
    }
}

fn json_object_to_map(v: &serde_json::Value) -> Result<BTreeMap<String, String>> {
    let obj = v
        .as_object()
        .ok_or_else(|| invalid("expected a JSON object".into()))?;
    obj.iter()
        .map(|(k, v)| Ok((k.clone(), json_scalar(v)?)))
        .collect()
}

pub fn parse_specs(text: &str, default_seed: u64) -> Result<Vec<ExperimentSpec>> {
    let trimmed = text.trim_start();
    let maps: Vec<BTreeMap<String, String>> = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        let v: serde_json::Value =
            serde_json::from_str(text).map_err(|e| invalid(format!("JSON: {e}")))?;
        match &v {
            serde_json::Value::Array(items) => items.iter().map(json_object_to_map).collect::<Result<_>>()?,
            _ => vec![json_object_to_map(&v)?],
        }
    } else {
        let mut maps = Vec::new();
        let mut cur = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() || line == "---" {
                if !cur.is_empty() {
                    maps.push(std::mem::take(&mut cur));
                }
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| invalid(format!("line {}: expected key = value", i + 1)))?;
            cur.insert(k.trim().to_string(), v.trim().to_string());
        }
        if !cur.is_empty() {
            maps.push(cur);
        }
        maps
    };
    if maps.is_empty() {
        return Err(invalid("no experiment found".into()));
    }
    maps.iter().map(|m| spec_from_map(m, default_seed)).collect()
}
