//! Layered configuration: built-in defaults, then a TOML file, then flags.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_rational::Rational64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::CliError;

/// What gets written to `config.toml` and read back by `--config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub subcommand: String,
    pub params: toml::Value,
}

/// Reads a config file and returns its parameter table as JSON.
pub fn read_file(path: &Path, subcommand: &str) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let table: toml::Table = toml::from_str(&text).map_err(|e| CliError::Config {
        path: path.display().to_string(),
        message: e.message().to_string(),
    })?;
    let mut v = serde_json::to_value(table).expect("toml tables are JSON-representable");
    let obj = v.as_object_mut().expect("table");
    if let Some(sub) = obj.remove("subcommand") {
        if sub.as_str() != Some(subcommand) {
            return Err(CliError::Config {
                path: "subcommand".into(),
                message: format!("file is for `{}`, not `{subcommand}`", sub.as_str().unwrap_or("?")),
            });
        }
    }
    Ok(match obj.remove("params") {
        Some(p) if obj.is_empty() => p,
        Some(_) => {
            return Err(CliError::Config {
                path: obj.keys().next().cloned().unwrap_or_default(),
                message: "unexpected key next to [params]".into(),
            })
        }
        None => v,
    })
}

/// `base` with every key of `top` replacing it.
pub fn overlay(base: &mut Value, top: &Value) {
    if let (Some(b), Some(t)) = (base.as_object_mut(), top.as_object()) {
        for (k, v) in t {
            if v.is_null() {
                continue;
            }
            b.insert(k.clone(), v.clone());
        }
    }
}

/// Merges defaults, file and flags and deserializes the result.
pub fn resolve<P: Serialize + DeserializeOwned>(defaults: &P, file: Option<&Value>, flags: &Value) -> Result<P, CliError> {
    let mut merged = serde_json::to_value(defaults).expect("parameter records serialize");
    let known: Vec<String> = merged.as_object().map(|o| o.keys().cloned().collect()).unwrap_or_default();
    for layer in file.into_iter().chain(std::iter::once(flags)) {
        if let Some(obj) = layer.as_object() {
            if let Some(k) = obj.keys().find(|k| !known.contains(k)) {
                return Err(CliError::Config {
                    path: format!("params.{k}"),
                    message: "unknown field".into(),
                });
            }
        }
        overlay(&mut merged, layer);
    }
    serde_path_to_error::deserialize(merged).map_err(|e| CliError::Config {
        path: format!("params.{}", e.path()),
        message: e.inner().to_string(),
    })
}

/// The layer-2 input: a JSON object of the flags that were given.
pub fn flags_value<A: Serialize>(args: &A) -> Value {
    let mut v = serde_json::to_value(args).expect("flag structs serialize");
    if let Some(o) = v.as_object_mut() {
        o.retain(|_, x| !x.is_null());
    }
    v
}

pub fn to_toml<P: Serialize>(subcommand: &str, params: &P) -> String {
    let cfg = ExperimentConfig {
        subcommand: subcommand.to_string(),
        params: toml::Value::try_from(params).expect("parameter records are TOML-representable"),
    };
    toml::to_string(&cfg).expect("config serializes")
}

/// FNV-1a, used to name run directories.
pub fn hash_hex(text: &str) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    format!("{h:016x}")
}

fn parse_list<T: FromStr>(text: &str, ranges: bool) -> Result<Vec<T>, String>
where
    T::Err: fmt::Display,
{
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    if ranges {
        let (lo, hi) = if let Some((a, b)) = text.split_once("..=") {
            (a, b)
        } else if let Some((a, b)) = text.split_once("..") {
            (a, b)
        } else {
            ("", "")
        };
        if !lo.is_empty() {
            let lo: i64 = lo.trim().parse().map_err(|e| format!("bad range start: {e}"))?;
            let hi: i64 = hi.trim().parse().map_err(|e| format!("bad range end: {e}"))?;
            if hi < lo {
                return Err(format!("empty range {lo}..{hi}"));
            }
            return (lo..=hi)
                .map(|v| v.to_string().parse::<T>().map_err(|e| e.to_string()))
                .collect();
        }
    }
    text.split(',')
        .map(|s| s.trim().parse::<T>().map_err(|e| format!("bad list entry `{s}`: {e}")))
        .collect()
}

/// Integers given as `a..b` (inclusive), `a..=b`, `a,b,c` or a TOML array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntList(pub Vec<i32>);

impl Serialize for IntList {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntList {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            One(i32),
            Many(Vec<i32>),
        }
        match Raw::deserialize(d)? {
            Raw::Text(t) => parse_list(&t, true).map(IntList).map_err(serde::de::Error::custom),
            Raw::One(v) => Ok(IntList(vec![v])),
            Raw::Many(v) => Ok(IntList(v)),
        }
    }
}

/// Reals given as `a,b,c` or a TOML array.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatList(pub Vec<f64>);

impl Serialize for FloatList {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FloatList {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            One(f64),
            Many(Vec<f64>),
        }
        match Raw::deserialize(d)? {
            Raw::Text(t) => parse_list(&t, false).map(FloatList).map_err(serde::de::Error::custom),
            Raw::One(v) => Ok(FloatList(vec![v])),
            Raw::Many(v) => Ok(FloatList(v)),
        }
    }
}

/// Closed interval `lo..hi` used for slope expectations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval(pub f64, pub f64);

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        x >= self.0 && x <= self.1
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.0, self.1)
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let t = String::deserialize(d)?;
        let (a, b) = t
            .split_once("..")
            .ok_or_else(|| serde::de::Error::custom(format!("expected lo..hi, got `{t}`")))?;
        let lo: f64 = a.trim().parse().map_err(serde::de::Error::custom)?;
        let hi: f64 = b.trim().parse().map_err(serde::de::Error::custom)?;
        if !(lo <= hi) {
            return Err(serde::de::Error::custom(format!("empty interval `{t}`")));
        }
        Ok(Interval(lo, hi))
    }
}

/// Exact rational written as `"a/b"`; integers and decimal strings are accepted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ratio(pub Rational64);

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for Ratio {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(Ratio(Rational64::from_integer(v))),
            Raw::Text(t) => zklab::counterexample_probe::parse_rational(&t)
                .map(Ratio)
                .map_err(serde::de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists() {
        let v: IntList = serde_json::from_value(Value::String("2..6".into())).unwrap();
        assert_eq!(v.0, vec![2, 3, 4, 5, 6]);
        let v: IntList = serde_json::from_value(Value::String("-1..=1".into())).unwrap();
        assert_eq!(v.0, vec![-1, 0, 1]);
        let v: IntList = serde_json::from_value(serde_json::json!([4, 8])).unwrap();
        assert_eq!(v.0, vec![4, 8]);
        let v: FloatList = serde_json::from_value(Value::String("0.5, 1e-2".into())).unwrap();
        assert_eq!(v.0, vec![0.5, 0.01]);
        assert!(serde_json::from_value::<IntList>(Value::String("6..2".into())).is_err());
    }

    #[test]
    fn ratio_forms() {
        let r: Ratio = serde_json::from_value(serde_json::json!(4)).unwrap();
        assert_eq!(r.0, Rational64::from_integer(4));
        let r: Ratio = serde_json::from_value(serde_json::json!("3/2")).unwrap();
        assert_eq!(r.0, Rational64::new(3, 2));
        assert_eq!(serde_json::to_value(r).unwrap(), serde_json::json!("3/2"));
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(hash_hex(""), "cbf29ce484222325");
        assert_ne!(hash_hex("a"), hash_hex("b"));
    }
}
