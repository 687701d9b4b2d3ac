//! Named user callbacks for the `apply_lambda` transforms.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::Value;

use crate::{Error, ParamDecl, Params, Result, Rng};

pub type Lambda<D> = Arc<dyn Fn(&D, &Params, &mut Rng) -> Result<D> + Send + Sync>;

pub const IDENTITY: &str = "identity";
pub const FUNCTION: &str = "aug_function";
pub const KWARGS: &str = "kwargs";

/// Schema shared by every modality's `apply_lambda`.
pub fn schema() -> Vec<ParamDecl> {
    vec![
        ParamDecl::text(FUNCTION, IDENTITY),
        ParamDecl::json(KWARGS, Value::Object(Default::default())),
    ]
}

/// 0 for the identity callback, 100 for anything else.
pub fn intensity(params: &Params) -> Result<f64> {
    Ok(if params.str(FUNCTION)? == IDENTITY { 0.0 } else { 100.0 })
}

fn kwargs(params: &Params) -> Result<Params> {
    match params.json(KWARGS) {
        None => Ok(Params::new()),
        Some(v @ Value::Object(_)) => Ok(serde_json::from_value(v.clone())?),
        Some(v) => Err(Error::invalid("apply_lambda", format!("`kwargs` must be an object, got {v}"))),
    }
}

/// Registry of callbacks; always contains `identity`.
pub struct Lambdas<D> {
    map: BTreeMap<String, Lambda<D>>,
}

impl<D: Clone + 'static> Default for Lambdas<D> {
    fn default() -> Self {
        let mut map: BTreeMap<String, Lambda<D>> = BTreeMap::new();
        map.insert(IDENTITY.into(), Arc::new(|d: &D, _: &Params, _: &mut Rng| Ok(d.clone())));
        Self { map }
    }
}

impl<D> Lambdas<D> {
    pub fn register<F>(&mut self, name: impl Into<String>, f: F)
    where
        F: Fn(&D, &Params, &mut Rng) -> Result<D> + Send + Sync + 'static,
    {
        self.map.insert(name.into(), Arc::new(f));
    }

    pub fn get(&self, name: &str) -> Result<&Lambda<D>> {
        self.map
            .get(name)
            .ok_or_else(|| Error::invalid("apply_lambda", format!("no callback registered as `{name}`")))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.map.keys().map(String::as_str)
    }

    /// Validates that the named callback exists and `kwargs` is an object.
    pub fn check(&self, params: &Params) -> Result<()> {
        self.get(params.str(FUNCTION)?)?;
        kwargs(params).map(|_| ())
    }

    /// Runs the callback named by `aug_function` with `kwargs` as its params.
    pub fn call(&self, datum: &D, params: &Params, rng: &mut Rng) -> Result<D> {
        let f = self.get(params.str(FUNCTION)?)?;
        f(datum, &kwargs(params)?, rng)
    }
}
