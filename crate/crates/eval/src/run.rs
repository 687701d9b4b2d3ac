//! The evaluation loop: augment every sampled item, classify, compare with
//! the clean baseline.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use polyaug_core::{par, Rng, TransformSpec};
use polyaug_image::{augmenter, ImageEnv, Raster};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::adapter::Classifier;
use crate::dataset::Item;
use crate::error::{EvalError, Result};
use crate::metrics::{top5_accuracy, Prediction};
use crate::report::{sort_rows, Category, EvalReport, Row};

pub const DEFAULT_SAMPLE_SIZE: usize = 250;
pub const BASELINE: &str = "baseline";

/// One named, categorized transform to evaluate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Augmentation {
    pub name: String,
    pub category: Category,
    pub spec: TransformSpec,
}

impl Augmentation {
    pub fn new(name: impl Into<String>, category: Category, spec: TransformSpec) -> Self {
        Self { name: name.into(), category, spec }
    }
}

/// Parses a JSON list of transform nodes that also carry `category` and an
/// optional `name` (defaulting to the op name).
pub fn parse_augset(text: &str) -> Result<Vec<Augmentation>> {
    let v: Value = serde_json::from_str(text)?;
    let Value::Array(entries) = v else {
        return Err(EvalError::Dataset("augmentation set must be a JSON list".into()));
    };
    let augs = entries
        .into_iter()
        .map(|e| {
            let Value::Object(mut obj) = e else {
                return Err(EvalError::Dataset("augmentation entries must be objects".into()));
            };
            let category: Category = serde_json::from_value(
                obj.remove("category").ok_or_else(|| EvalError::Dataset("entry lacks `category`".into()))?,
            )?;
            let name = obj.remove("name");
            let spec: TransformSpec = serde_json::from_value(Value::Object(obj))?;
            let name = match name {
                Some(Value::String(s)) => s,
                None => spec.name.clone(),
                Some(other) => return Err(EvalError::Dataset(format!("bad `name` {other}"))),
            };
            Ok(Augmentation::new(name, category, spec))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut names: Vec<&str> = augs.iter().map(|a| a.name.as_str()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(EvalError::Dataset(format!("duplicate augmentation name `{}`", w[0])));
    }
    if names.contains(&BASELINE) {
        return Err(EvalError::Dataset(format!("`{BASELINE}` is reserved")));
    }
    Ok(augs)
}

/// The shipped preset: strong settings meant to be clearly visible while
/// the subject stays recognizable. These values are a choice of this crate.
pub fn default_augset() -> Vec<Augmentation> {
    let a = |name: &str, category, params: Value| {
        let spec = TransformSpec { name: name.into(), params: serde_json::from_value(params).expect("object"), p: 1.0 };
        Augmentation::new(name, category, spec)
    };
    use Category::*;
    vec![
        a("hflip", Spatial, json!({})),
        a("rotate", Spatial, json!({"degrees": 45.0})),
        a("crop", Spatial, json!({"x1": 0.25, "y1": 0.25, "x2": 0.75, "y2": 0.75})),
        a("skew", Spatial, json!({"skew_factor": 0.5})),
        a("pad", Spatial, json!({"w_factor": 0.5, "h_factor": 0.5})),
        a("brightness", Color, json!({"factor": 0.3})),
        a("contrast", Color, json!({"factor": 3.0})),
        a("grayscale", Color, json!({})),
        a("saturation", Color, json!({"factor": 4.0})),
        a("color_jitter", Color, json!({"brightness_factor": 1.5, "contrast_factor": 1.5, "saturation_factor": 2.0})),
        a("overlay_emoji", Overlay, json!({})),
        a("overlay_text", Overlay, json!({})),
        a("meme_format", Overlay, json!({})),
        a("overlay_stripes", Overlay, json!({})),
        a("overlay_onto_screenshot", Overlay, json!({})),
        a("blur", PixelLevel, json!({"radius": 5.0})),
        a("random_noise", PixelLevel, json!({"variance": 0.1})),
        a("pixelization", PixelLevel, json!({"ratio": 0.2})),
        a("encoding_quality", PixelLevel, json!({"quality": 5})),
        a("shuffle_pixels", PixelLevel, json!({"factor": 0.3})),
    ]
}

/// Writes rasters as PNGs under `dir` and classifies them.
fn classify_rasters(rasters: &[Raster], dir: &Path, classifier: &mut dyn Classifier) -> Result<Vec<Prediction>> {
    std::fs::create_dir_all(dir)?;
    let files: Vec<PathBuf> = (0..rasters.len()).map(|k| dir.join(format!("{k:06}.png"))).collect();
    par::try_map(rasters, |k, r| r.save(&files[k]))?;
    classifier.classify(&files)
}

/// Accuracy of predictions that are in file order, against item labels.
fn accuracy(items: &[Item], preds: Vec<Prediction>) -> Result<f64> {
    let truth: HashMap<String, String> = items.iter().map(|i| (i.id.clone(), i.label.clone())).collect();
    let relabelled: Vec<Prediction> = preds
        .into_iter()
        .zip(items)
        .map(|(p, i)| Prediction { item_id: i.id.clone(), ranked_labels: p.ranked_labels })
        .collect();
    top5_accuracy(&relabelled, &truth)
}

/// Evaluates every augmentation on `items`. Inputs are re-encoded as PNG for
/// the baseline too, so an identity transform scores exactly the baseline.
/// Adapter failures mark the row and the run goes on; a failing baseline
/// aborts the run.
pub fn run_eval(
    items: &[Item],
    augs: &[Augmentation],
    classifier: &mut dyn Classifier,
    seed: u64,
    env: &ImageEnv,
    workdir: &Path,
) -> Result<EvalReport> {
    if items.is_empty() {
        return Err(EvalError::Dataset("no items to evaluate".into()));
    }
    let aug = augmenter(env);
    for a in augs {
        aug.validate_spec(&a.spec)?;
    }
    let images = par::try_map(items, |_, it| Raster::load(&it.path))?;
    let baseline_acc = accuracy(items, classify_rasters(&images, &workdir.join(BASELINE), classifier)?)?;
    let root = Rng::new(seed);
    let mut rows = vec![Row {
        name: BASELINE.into(),
        category: None,
        baseline_acc,
        augmented_acc: Some(baseline_acc),
        delta: Some(0.0),
        error: None,
    }];
    for (r, a) in augs.iter().enumerate() {
        let stream = root.derive(r as u64);
        let outcome = par::try_map(&images, |k, img| {
            aug.apply_with_probability(&a.spec, img, &mut stream.derive(k as u64)).map(|(out, _)| out)
        })
        .map_err(EvalError::from)
        .and_then(|augmented| classify_rasters(&augmented, &workdir.join(format!("{r:03}")), classifier))
        .and_then(|preds| accuracy(items, preds));
        rows.push(match outcome {
            Ok(acc) => Row {
                name: a.name.clone(),
                category: Some(a.category),
                baseline_acc,
                augmented_acc: Some(acc),
                delta: Some(acc - baseline_acc),
                error: None,
            },
            Err(e) => Row {
                name: a.name.clone(),
                category: Some(a.category),
                baseline_acc,
                augmented_acc: None,
                delta: None,
                error: Some(e.to_string()),
            },
        });
    }
    sort_rows(&mut rows);
    Ok(EvalReport { seed, sample_size: items.len(), baseline_acc, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn augset_parsing() {
        let augs = parse_augset(r#"[{"op": "blur", "params": {"radius": 2}, "category": "pixel-level"},
                                    {"name": "big blur", "op": "blur", "category": "pixel-level", "p": 0.5}]"#)
        .unwrap();
        assert_eq!(augs[0].name, "blur");
        assert_eq!(augs[1].name, "big blur");
        assert_eq!(augs[1].spec.p, 0.5);
        assert!(parse_augset(r#"[{"op": "blur"}]"#).is_err());
        assert!(parse_augset(r#"[{"op": "blur", "category": "texture"}]"#).is_err());
        assert!(parse_augset(r#"[{"op": "blur", "category": "color"}, {"op": "blur", "category": "color"}]"#).is_err());
    }

    #[test]
    fn default_preset_is_valid() {
        let env = ImageEnv::default();
        let aug = augmenter(&env);
        let set = default_augset();
        for c in Category::ALL {
            assert!(set.iter().filter(|a| a.category == c).count() >= 4);
        }
        for a in &set {
            aug.validate_spec(&a.spec).unwrap();
        }
    }
}
