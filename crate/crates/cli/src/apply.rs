//! `polyaug apply`: run a pipeline over files, clip directories or folders.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use polyaug_core::{par, Pipeline, Rng, TransformMetadata};
use serde_json::Value;

use crate::error::{CliError, Result};
use crate::modality::{validate, Datum, Envs, Kind};

/// A pipeline plus an optional declared modality. On disk either the bare
/// pipeline list or `{"modality": "...", "pipeline": [...]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub modality: Option<Kind>,
    pub pipeline: Pipeline,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        let bad = |e: polyaug_core::Error| CliError::Validation(format!("config: {e}"));
        let v: Value = serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))?;
        match v {
            Value::Array(_) => Ok(Config { modality: None, pipeline: Pipeline::from_value(&v).map_err(bad)? }),
            Value::Object(mut obj) => {
                let modality = match obj.remove("modality") {
                    Some(Value::String(s)) => Some(Kind::parse(&s)?),
                    None => None,
                    Some(other) => return Err(CliError::Validation(format!("config: bad modality {other}"))),
                };
                let pipeline = obj.remove("pipeline").ok_or_else(|| CliError::Validation("config: missing `pipeline`".into()))?;
                if let Some(k) = obj.keys().next() {
                    return Err(CliError::Validation(format!("config: unknown key `{k}`")));
                }
                Ok(Config { modality, pipeline: Pipeline::from_value(&pipeline).map_err(bad)? })
            }
            _ => Err(CliError::Validation("config must be a list or an object".into())),
        }
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Fails when the config cannot apply to `kind`.
    pub fn check(&self, kind: Kind, envs: &Envs) -> Result<()> {
        if let Some(m) = self.modality {
            if m != kind {
                return Err(CliError::Validation(format!("config is for {} but the input is {}", m.name(), kind.name())));
            }
        }
        let ops = kind.op_names();
        if let Some(bad) = self.pipeline.transform_names().into_iter().find(|n| !ops.contains(n)) {
            return Err(CliError::Validation(format!("`{bad}` is not a {} transform; config and input modalities differ", kind.name())));
        }
        validate(kind, &self.pipeline, envs)
    }
}

/// Files and clip directories named on the command line; plain directories
/// contribute their entries in name order.
pub fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in inputs {
        if !p.exists() {
            return Err(CliError::Io(format!("{}: no such file or directory", p.display())));
        }
        if p.is_dir() && Kind::infer(p).is_err() {
            let mut entries: Vec<PathBuf> = std::fs::read_dir(p)?.map(|e| e.map(|e| e.path())).collect::<std::io::Result<_>>()?;
            entries.sort();
            out.extend(entries.into_iter().filter(|e| !e.file_name().is_some_and(|n| n.to_string_lossy().ends_with(".json"))));
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

/// Applies the config to every input and writes `out_dir/<file name>`.
/// Input `i` (after expansion) uses seed stream `derive(i)`. All inputs are
/// checked before any is processed.
pub fn apply_files(
    config: &Config,
    inputs: &[PathBuf],
    out_dir: &Path,
    seed: u64,
    envs: &Envs,
) -> Result<Vec<(PathBuf, Vec<TransformMetadata>)>> {
    let inputs = expand_inputs(inputs)?;
    if inputs.is_empty() {
        return Err(CliError::Validation("no inputs".into()));
    }
    let mut names = HashSet::new();
    let mut kinds = Vec::with_capacity(inputs.len());
    for p in &inputs {
        let kind = Kind::infer(p)?;
        config.check(kind, envs)?;
        let name = p.file_name().ok_or_else(|| CliError::Validation(format!("{}: no file name", p.display())))?;
        if !names.insert(name.to_owned()) {
            return Err(CliError::Validation(format!("two inputs are named {}", name.to_string_lossy())));
        }
        kinds.push(kind);
    }
    std::fs::create_dir_all(out_dir)?;
    let root = Rng::new(seed);
    par::try_map(&inputs, |i, p| -> Result<(PathBuf, Vec<TransformMetadata>)> {
        let datum = Datum::load(kinds[i], p)?;
        let (out, meta) = datum.augment(&config.pipeline, envs, &root.derive(i as u64))?;
        out.save(&out_dir.join(p.file_name().expect("checked above")))?;
        Ok((p.clone(), meta))
    })
}

/// `{input path: [metadata, ...]}` as pretty JSON.
pub fn write_metadata(results: &[(PathBuf, Vec<TransformMetadata>)], path: &Path) -> Result<()> {
    let map: BTreeMap<String, &Vec<TransformMetadata>> = results.iter().map(|(p, m)| (p.display().to_string(), m)).collect();
    let text = serde_json::to_string_pretty(&map).map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_forms() {
        let a = Config::parse(r#"[{"op": "hflip"}]"#).unwrap();
        assert_eq!(a.modality, None);
        let b = Config::parse(r#"{"modality": "video", "pipeline": [{"op": "hflip"}]}"#).unwrap();
        assert_eq!(b.modality, Some(Kind::Video));
        assert!(Config::parse(r#"{"pipeline": [], "extra": 1}"#).is_err());
        assert!(Config::parse(r#"{"modality": "smell", "pipeline": []}"#).is_err());
        let envs = Envs::default();
        assert!(a.check(Kind::Image, &envs).is_ok());
        assert!(a.check(Kind::Video, &envs).is_ok());
        assert!(a.check(Kind::Audio, &envs).is_err());
        assert!(b.check(Kind::Image, &envs).is_err());
    }
}
