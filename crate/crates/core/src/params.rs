//! Parameter maps, per-transform schemas and random-descriptor resolution.
//!
//! A parameter value is plain JSON. Besides concrete values, any
//! non-free-form parameter may hold a random descriptor which is drawn when
//! the transform is applied:
//!
//! - `{"uniform": [lo, hi]}`: float in `[lo, hi)`
//! - `{"randint": [lo, hi]}`: integer in `[lo, hi]`
//! - `{"choice": [v0, v1, ...]}`: one of the listed values

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::{Error, Result, Rng};

/// Ordered map of parameter name to JSON value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Params(BTreeMap<String, Value>);

impl Params {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: impl Into<String>, value: impl Into<Value>) {
        self.0.insert(key.into(), value.into());
    }

    pub fn with(mut self, key: impl Into<String>, value: impl Into<Value>) -> Self {
        self.insert(key, value);
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.0.get(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Value)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn present(&self, key: &str) -> Option<&Value> {
        self.0.get(key).filter(|v| !v.is_null())
    }

    fn missing(key: &str) -> Error {
        Error::invalid(key, "missing parameter")
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        self.opt_f64(key)?.ok_or_else(|| Self::missing(key))
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.present(key) {
            None => Ok(None),
            Some(v) => v
                .as_f64()
                .map(Some)
                .ok_or_else(|| Error::invalid(key, format!("expected a number, got {v}"))),
        }
    }

    pub fn i64(&self, key: &str) -> Result<i64> {
        self.opt_i64(key)?.ok_or_else(|| Self::missing(key))
    }

    pub fn opt_i64(&self, key: &str) -> Result<Option<i64>> {
        match self.present(key) {
            None => Ok(None),
            Some(v) => as_integer(v)
                .map(Some)
                .ok_or_else(|| Error::invalid(key, format!("expected an integer, got {v}"))),
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        let v = self.i64(key)?;
        usize::try_from(v).map_err(|_| Error::invalid(key, "must be non-negative"))
    }

    pub fn opt_usize(&self, key: &str) -> Result<Option<usize>> {
        match self.opt_i64(key)? {
            None => Ok(None),
            Some(v) => usize::try_from(v)
                .map(Some)
                .map_err(|_| Error::invalid(key, "must be non-negative")),
        }
    }

    pub fn bool(&self, key: &str) -> Result<bool> {
        match self.present(key) {
            None => Err(Self::missing(key)),
            Some(v) => v
                .as_bool()
                .ok_or_else(|| Error::invalid(key, format!("expected a boolean, got {v}"))),
        }
    }

    pub fn str(&self, key: &str) -> Result<&str> {
        self.opt_str(key)?.ok_or_else(|| Self::missing(key))
    }

    pub fn opt_str(&self, key: &str) -> Result<Option<&str>> {
        match self.present(key) {
            None => Ok(None),
            Some(v) => v
                .as_str()
                .map(Some)
                .ok_or_else(|| Error::invalid(key, format!("expected a string, got {v}"))),
        }
    }

    /// An `[r, g, b]` or `[r, g, b, a]` array; alpha defaults to 255.
    pub fn color(&self, key: &str) -> Result<[u8; 4]> {
        let v = self.present(key).ok_or_else(|| Self::missing(key))?;
        parse_color(v).ok_or_else(|| Error::invalid(key, format!("expected an RGB(A) array, got {v}")))
    }

    pub fn json(&self, key: &str) -> Option<&Value> {
        self.present(key)
    }
}

impl FromIterator<(String, Value)> for Params {
    fn from_iter<I: IntoIterator<Item = (String, Value)>>(iter: I) -> Self {
        Params(iter.into_iter().collect())
    }
}

fn as_integer(v: &Value) -> Option<i64> {
    v.as_i64().or_else(|| {
        v.as_f64()
            .filter(|f| f.fract() == 0.0 && f.abs() < 9.0e15)
            .map(|f| f as i64)
    })
}

fn parse_color(v: &Value) -> Option<[u8; 4]> {
    let arr = v.as_array()?;
    if arr.len() != 3 && arr.len() != 4 {
        return None;
    }
    let mut out = [255u8; 4];
    for (slot, c) in out.iter_mut().zip(arr) {
        let c = as_integer(c)?;
        *slot = u8::try_from(c).ok()?;
    }
    Some(out)
}

/// The type and admissible range of one parameter.
#[derive(Debug, Clone, PartialEq)]
pub enum Kind {
    Float {
        min: f64,
        max: f64,
        min_open: bool,
        max_open: bool,
    },
    Int {
        min: i64,
        max: i64,
    },
    Bool,
    /// A string; when `choices` is non-empty the value must be one of them.
    Str { choices: Vec<&'static str> },
    Color,
    /// Free-form JSON (mappings, nested pipelines). Never random.
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamDecl {
    pub name: &'static str,
    pub kind: Kind,
    /// `Value::Null` marks an optional parameter with no default.
    pub default: Value,
}

impl ParamDecl {
    pub fn float(name: &'static str, min: f64, max: f64, default: f64) -> Self {
        Self {
            name,
            kind: Kind::Float {
                min,
                max,
                min_open: false,
                max_open: false,
            },
            default: default.into(),
        }
    }

    /// Float in `(0, max]`.
    pub fn positive(name: &'static str, max: f64, default: f64) -> Self {
        Self::float(name, 0.0, max, default).open_min()
    }

    pub fn int(name: &'static str, min: i64, max: i64, default: i64) -> Self {
        Self {
            name,
            kind: Kind::Int { min, max },
            default: default.into(),
        }
    }

    pub fn boolean(name: &'static str, default: bool) -> Self {
        Self {
            name,
            kind: Kind::Bool,
            default: default.into(),
        }
    }

    pub fn choice(name: &'static str, choices: &[&'static str], default: &'static str) -> Self {
        Self {
            name,
            kind: Kind::Str {
                choices: choices.to_vec(),
            },
            default: default.into(),
        }
    }

    pub fn text(name: &'static str, default: &str) -> Self {
        Self {
            name,
            kind: Kind::Str { choices: vec![] },
            default: default.into(),
        }
    }

    pub fn color(name: &'static str, rgb: [u8; 3]) -> Self {
        Self {
            name,
            kind: Kind::Color,
            default: Value::from(rgb.to_vec()),
        }
    }

    pub fn json(name: &'static str, default: Value) -> Self {
        Self {
            name,
            kind: Kind::Json,
            default,
        }
    }

    pub fn open_min(mut self) -> Self {
        if let Kind::Float { min_open, .. } = &mut self.kind {
            *min_open = true;
        }
        self
    }

    pub fn open_max(mut self) -> Self {
        if let Kind::Float { max_open, .. } = &mut self.kind {
            *max_open = true;
        }
        self
    }

    /// Makes the parameter optional with no default value.
    pub fn optional(mut self) -> Self {
        self.default = Value::Null;
        self
    }

    fn check_concrete(&self, op: &str, v: &Value) -> Result<()> {
        let bad = |why: String| Error::invalid(op, format!("`{}` {}", self.name, why));
        if v.is_null() {
            return if self.default.is_null() {
                Ok(())
            } else {
                Err(bad("must not be null".into()))
            };
        }
        match &self.kind {
            Kind::Float {
                min,
                max,
                min_open,
                max_open,
            } => {
                let x = v.as_f64().ok_or_else(|| bad(format!("expected a number, got {v}")))?;
                let lo_ok = if *min_open { x > *min } else { x >= *min };
                let hi_ok = if *max_open { x < *max } else { x <= *max };
                if !x.is_finite() || !lo_ok || !hi_ok {
                    let (l, r) = (if *min_open { "(" } else { "[" }, if *max_open { ")" } else { "]" });
                    return Err(bad(format!("= {x} outside {l}{min}, {max}{r}")));
                }
            }
            Kind::Int { min, max } => {
                let x = as_integer(v).ok_or_else(|| bad(format!("expected an integer, got {v}")))?;
                if x < *min || x > *max {
                    return Err(bad(format!("= {x} outside [{min}, {max}]")));
                }
            }
            Kind::Bool => {
                v.as_bool().ok_or_else(|| bad(format!("expected a boolean, got {v}")))?;
            }
            Kind::Str { choices } => {
                let s = v.as_str().ok_or_else(|| bad(format!("expected a string, got {v}")))?;
                if !choices.is_empty() && !choices.contains(&s) {
                    return Err(bad(format!("= {s:?} is not one of {choices:?}")));
                }
            }
            Kind::Color => {
                parse_color(v).ok_or_else(|| bad(format!("expected an RGB(A) array, got {v}")))?;
            }
            Kind::Json => {}
        }
        Ok(())
    }
}

/// A parsed random descriptor.
#[derive(Debug, Clone, PartialEq)]
enum Random<'a> {
    Uniform(f64, f64),
    RandInt(i64, i64),
    Choice(&'a [Value]),
}

fn random_descriptor(v: &Value) -> Option<std::result::Result<Random<'_>, String>> {
    let obj = v.as_object()?;
    if obj.len() != 1 {
        return None;
    }
    let (key, arg) = obj.iter().next()?;
    let pair = |arg: &Value| -> std::result::Result<(f64, f64), String> {
        match arg.as_array().map(|a| a.as_slice()) {
            Some([a, b]) => match (a.as_f64(), b.as_f64()) {
                (Some(a), Some(b)) if a <= b => Ok((a, b)),
                _ => Err(format!("`{key}` needs [lo, hi] with lo <= hi")),
            },
            _ => Err(format!("`{key}` needs a two-element array")),
        }
    };
    Some(match key.as_str() {
        "uniform" => pair(arg).map(|(a, b)| Random::Uniform(a, b)),
        "randint" => pair(arg).and_then(|(a, b)| {
            if a.fract() == 0.0 && b.fract() == 0.0 {
                Ok(Random::RandInt(a as i64, b as i64))
            } else {
                Err("`randint` bounds must be integers".into())
            }
        }),
        "choice" => match arg.as_array() {
            Some(a) if !a.is_empty() => Ok(Random::Choice(a.as_slice())),
            _ => Err("`choice` needs a non-empty array".into()),
        },
        _ => return None,
    })
}

/// Validates user-supplied params against a schema without drawing anything.
pub fn validate(op: &str, schema: &[ParamDecl], params: &Params) -> Result<()> {
    for key in params.0.keys() {
        if !schema.iter().any(|d| d.name == key) {
            return Err(Error::invalid(op, format!("unknown parameter `{key}`")));
        }
    }
    for decl in schema {
        let Some(v) = params.get(decl.name) else {
            continue;
        };
        if decl.kind == Kind::Json {
            decl.check_concrete(op, v)?;
            continue;
        }
        match random_descriptor(v) {
            None => decl.check_concrete(op, v)?,
            Some(Err(why)) => return Err(Error::invalid(op, format!("`{}`: {why}", decl.name))),
            Some(Ok(Random::Uniform(a, b))) => {
                if !matches!(decl.kind, Kind::Float { .. }) {
                    return Err(Error::invalid(op, format!("`{}` cannot use `uniform`", decl.name)));
                }
                decl.check_concrete(op, &a.into())?;
                if a < b {
                    // [a, b) never reaches b, so only check b against an inclusive bound
                    if let Kind::Float { max, .. } = decl.kind {
                        if b > max {
                            return Err(Error::invalid(op, format!("`{}` upper bound {b} > {max}", decl.name)));
                        }
                    }
                }
            }
            Some(Ok(Random::RandInt(a, b))) => {
                if !matches!(decl.kind, Kind::Int { .. } | Kind::Float { .. }) {
                    return Err(Error::invalid(op, format!("`{}` cannot use `randint`", decl.name)));
                }
                decl.check_concrete(op, &a.into())?;
                decl.check_concrete(op, &b.into())?;
            }
            Some(Ok(Random::Choice(items))) => {
                for item in items {
                    decl.check_concrete(op, item)?;
                }
            }
        }
    }
    Ok(())
}

/// True when no parameter still holds a random descriptor.
pub fn is_resolved(schema: &[ParamDecl], params: &Params) -> bool {
    schema.iter().all(|d| {
        d.kind == Kind::Json || params.get(d.name).is_none_or(|v| random_descriptor(v).is_none())
    })
}

/// Fills in defaults and draws every random descriptor. Parameter `i` of the
/// schema draws from `rng.derive(i)`, so adding a parameter never shifts the
/// draws of the others.
pub fn resolve(op: &str, schema: &[ParamDecl], params: &Params, rng: &Rng) -> Result<Params> {
    validate(op, schema, params)?;
    let mut out = Params::new();
    for (i, decl) in schema.iter().enumerate() {
        let raw = params.get(decl.name).unwrap_or(&decl.default);
        let value = if decl.kind == Kind::Json {
            raw.clone()
        } else {
            match random_descriptor(raw) {
                None => raw.clone(),
                Some(Err(why)) => return Err(Error::invalid(op, why)),
                Some(Ok(r)) => {
                    let mut stream = rng.derive(i as u64);
                    match r {
                        Random::Uniform(a, b) => {
                            let x = stream.uniform(a, b);
                            if matches!(decl.kind, Kind::Int { .. }) {
                                Value::from(x.round() as i64)
                            } else {
                                Value::from(x)
                            }
                        }
                        Random::RandInt(a, b) => {
                            let x = stream.range_inclusive(a, b);
                            if matches!(decl.kind, Kind::Float { .. }) {
                                Value::from(x as f64)
                            } else {
                                Value::from(x)
                            }
                        }
                        Random::Choice(items) => items[stream.index(items.len())].clone(),
                    }
                }
            }
        };
        decl.check_concrete(op, &value)?;
        out.insert(decl.name, value);
    }
    Ok(out)
}
