use polyaug_core::{Error, Params, Pipeline, Rng, Shape, TransformSpec};
use polyaug_image::{augmenter, catalog, identity_params, Channels, ImageEnv, Raster};
use proptest::prelude::{any, prop_assert_eq, proptest};
use serde_json::json;

const NAMES: [&str; 35] = [
    "apply_filter_kernel",
    "apply_lambda",
    "blur",
    "brightness",
    "change_aspect_ratio",
    "clip_image_size",
    "color_jitter",
    "contrast",
    "convert_color",
    "crop",
    "encoding_quality",
    "grayscale",
    "hflip",
    "masked_composite",
    "meme_format",
    "opacity",
    "overlay_emoji",
    "overlay_image",
    "overlay_onto_background_image",
    "overlay_onto_screenshot",
    "overlay_stripes",
    "overlay_text",
    "pad",
    "pad_square",
    "perspective_transform",
    "pixelization",
    "random_noise",
    "resize",
    "rotate",
    "saturation",
    "scale",
    "sharpen",
    "shuffle_pixels",
    "skew",
    "vflip",
];

fn photo(w: u32, h: u32, channels: Channels) -> Raster {
    Raster::from_fn(w, h, channels, |x, y| {
        let v = (x * 7 + y * 13) ^ (x * y);
        [(v % 256) as u8, ((x * 3) % 256) as u8, ((y * 5) % 256) as u8, (128 + (x + y) % 128) as u8]
    })
}

fn spec(name: &str, params: serde_json::Value) -> TransformSpec {
    TransformSpec {
        name: name.into(),
        params: serde_json::from_value(params).unwrap(),
        p: 1.0,
    }
}

#[test]
fn catalog_lists_every_image_op() {
    let mut names: Vec<_> = catalog().names().collect();
    names.sort_unstable();
    assert_eq!(names, NAMES);
}

#[test]
fn identity_parameterizations_are_bit_exact() {
    let env = ImageEnv::default();
    let aug = augmenter(&env);
    let mut checked = 0;
    for name in NAMES {
        let Some(params) = identity_params(name) else { continue };
        for channels in [Channels::Rgb, Channels::Rgba] {
            let img = photo(37, 23, channels);
            let s = TransformSpec { name: name.into(), params: params.clone(), p: 1.0 };
            let (out, meta) = aug.apply_with_probability(&s, &img, &mut Rng::new(5)).unwrap();
            assert_eq!(out, img, "{name} {channels:?}");
            assert!(meta.applied);
            assert_eq!(meta.intensity, 0.0, "{name}");
        }
        checked += 1;
    }
    assert!(checked >= 18, "{checked}");
}

#[test]
fn defaults_produce_valid_rasters_and_bounded_intensity() {
    let env = ImageEnv::default();
    let aug = augmenter(&env);
    for name in NAMES {
        let img = photo(64, 48, Channels::Rgb);
        let (out, meta) = aug
            .apply_with_probability(&TransformSpec::new(name), &img, &mut Rng::new(9))
            .unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(out.data().len(), out.width() as usize * out.height() as usize * out.channel_count());
        assert!((0.0..=100.0).contains(&meta.intensity), "{name}");
        assert_eq!(
            meta.dst_shape,
            Shape::Image { width: out.width(), height: out.height(), channels: out.channel_count() as u8 }
        );
    }
}

#[test]
fn involutions_and_quarter_turns() {
    let env = ImageEnv::default();
    let aug = augmenter(&env);
    let img = photo(30, 20, Channels::Rgba);
    for pipeline in [
        Pipeline::of([TransformSpec::new("hflip"), TransformSpec::new("hflip")]),
        Pipeline::of([TransformSpec::new("vflip"), TransformSpec::new("vflip")]),
        Pipeline::of((0..4).map(|_| spec("rotate", json!({"degrees": 90.0})))),
    ] {
        let (out, meta) = aug.compose(&pipeline, &img, &Rng::new(1)).unwrap();
        assert_eq!(out, img);
        assert_eq!(meta.len(), pipeline.len());
    }
}

#[test]
fn grayscale_idempotent_via_catalog() {
    let env = ImageEnv::default();
    let aug = augmenter(&env);
    let img = photo(20, 20, Channels::Rgb);
    let once = aug.compose(&Pipeline::of([TransformSpec::new("grayscale")]), &img, &Rng::new(0)).unwrap().0;
    let twice = aug.compose(&Pipeline::of([TransformSpec::new("grayscale")]), &once, &Rng::new(0)).unwrap().0;
    assert_eq!(once, twice);
}

#[test]
fn intensity_ledger_examples() {
    let env = ImageEnv::default();
    let aug = augmenter(&env);
    assert_eq!(aug.intensity(&spec("rotate", json!({"degrees": 0.0}))).unwrap(), 0.0);
    assert_eq!(aug.intensity(&spec("rotate", json!({"degrees": 180.0}))).unwrap(), 100.0);
    let crop = spec("crop", json!({"x1": 0.0, "y1": 0.0, "x2": 0.75, "y2": 1.0}));
    assert!((aug.intensity(&crop).unwrap() - 25.0).abs() < 1e-9);
    assert_eq!(aug.intensity(&spec("blur", json!({"radius": 5.0}))).unwrap(), 50.0);
    assert_eq!(aug.intensity(&spec("brightness", json!({"factor": 1.25}))).unwrap(), 25.0);
    // size-dependent ops cannot be scored without an input
    assert!(matches!(aug.intensity(&TransformSpec::new("pad_square")), Err(Error::Intensity { .. })));
    let random = spec("rotate", json!({"degrees": {"uniform": [0.0, 90.0]}}));
    assert!(aug.intensity(&random).is_err());
}

#[test]
fn meme_and_screenshot_through_catalog() {
    let env = ImageEnv::default();
    let aug = augmenter(&env);
    let img = photo(500, 400, Channels::Rgb);
    let meme = spec(
        "meme_format",
        json!({"caption_height": 75, "meme_bg_color": [0, 0, 0], "text_color": [255, 255, 255], "text": "LOL"}),
    );
    let (out, meta) = aug.apply_with_probability(&meme, &img, &mut Rng::new(0)).unwrap();
    assert_eq!(out.dims(), (500, 475));
    assert!((meta.intensity - 7500.0 / 475.0).abs() < 1e-9);

    let shot = spec("overlay_onto_screenshot", json!({"template": "mobile"}));
    let (out, _) = aug.apply_with_probability(&shot, &photo(100, 100, Channels::Rgb), &mut Rng::new(0)).unwrap();
    assert_eq!(out.dims(), (400, 800));

    let bad = Pipeline::of([TransformSpec::new("hflip"), spec("overlay_onto_screenshot", json!({"template": "nope"}))]);
    assert!(aug.compose(&bad, &img, &Rng::new(0)).is_err());
    let empty = spec("meme_format", json!({"text": ""}));
    assert!(aug.compose(&Pipeline::of([empty]), &img, &Rng::new(0)).unwrap_err().is_validation());
}

#[test]
fn color_jitter_scalar_example() {
    let env = ImageEnv::default();
    let aug = augmenter(&env);
    let img = Raster::new(2, 1, Channels::Rgb, vec![100, 100, 100, 200, 200, 200]).unwrap();
    let s = spec("color_jitter", json!({"brightness_factor": 2.0, "contrast_factor": 1.0, "saturation_factor": 1.0}));
    let (out, _) = aug.apply_with_probability(&s, &img, &mut Rng::new(0)).unwrap();
    assert_eq!(out.data(), &[200, 200, 200, 255, 255, 255]);
    let bad = spec("color_jitter", json!({"brightness_factor": 0.0}));
    assert!(aug.validate_spec(&bad).is_err());
}

#[test]
fn seeded_pipelines_are_deterministic() {
    let env = ImageEnv::default();
    let aug = augmenter(&env);
    let pipeline = Pipeline::from_json(
        r#"[
            {"op": "random_noise", "params": {"variance": {"uniform": [0.001, 0.02]}}},
            {"op": "perspective_transform", "params": {"sigma": 8}},
            {"op": "shuffle_pixels", "params": {"factor": 0.05}, "p": 0.5},
            {"op": "rotate", "params": {"degrees": {"randint": [-30, 30]}}},
            {"op": "overlay_emoji", "params": {"emoji": {"choice": ["smile", "heart", "star"]}}}
        ]"#,
    )
    .unwrap();
    let img = photo(80, 60, Channels::Rgb);
    for seed in [0, 1, 77] {
        let a = aug.compose(&pipeline, &img, &Rng::new(seed)).unwrap();
        let b = aug.compose(&pipeline, &img, &Rng::new(seed)).unwrap();
        assert_eq!(a, b);
    }
    let a = aug.compose(&pipeline, &img, &Rng::new(1)).unwrap();
    let b = aug.compose(&pipeline, &img, &Rng::new(2)).unwrap();
    assert_ne!(a.0, b.0);
}

#[test]
fn registered_lambda_runs_with_kwargs() {
    let mut lambdas = polyaug_core::Lambdas::default();
    lambdas.register("tint", |img: &Raster, p: &Params, _: &mut Rng| {
        let v = p.i64("value")? as u8;
        let mut out = img.clone();
        for px in out.data_mut().chunks_mut(3) {
            px[0] = v;
        }
        Ok(out)
    });
    let env = ImageEnv::default().with_lambdas(lambdas);
    let aug = augmenter(&env);
    let s = spec("apply_lambda", json!({"aug_function": "tint", "kwargs": {"value": 9}}));
    let (out, meta) = aug.apply_with_probability(&s, &photo(4, 4, Channels::Rgb), &mut Rng::new(0)).unwrap();
    assert!(out.data().chunks(3).all(|p| p[0] == 9));
    assert_eq!(meta.intensity, 100.0);
    assert!(aug.validate_spec(&spec("apply_lambda", json!({"aug_function": "missing"}))).is_err());
}

#[test]
fn files_round_trip_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let img = photo(33, 17, Channels::Rgba);
    let png = dir.path().join("a.png");
    img.save(&png).unwrap();
    assert_eq!(Raster::load(&png).unwrap(), img);
    let jpg = dir.path().join("a.jpg");
    img.save(&jpg).unwrap();
    let back = Raster::load(&jpg).unwrap();
    assert_eq!(back.dims(), img.dims());
    assert_eq!(back.channels(), Channels::Rgb);
}

proptest! {
    #[test]
    fn rotate_quarter_turns_compose_to_identity(w in 1u32..24, h in 1u32..24, seed in any::<u64>()) {
        let env = ImageEnv::default();
        let aug = augmenter(&env);
        let img = Raster::from_fn(w, h, Channels::Rgb, |x, y| [(x as u64 ^ seed) as u8, y as u8, (seed >> 8) as u8, 255]);
        let p = Pipeline::of([spec("rotate", json!({"degrees": 90})), spec("rotate", json!({"degrees": -90}))]);
        prop_assert_eq!(aug.compose(&p, &img, &Rng::new(seed)).unwrap().0, img.clone());
        let p = Pipeline::of([spec("rotate", json!({"degrees": 180})), spec("rotate", json!({"degrees": 540}))]);
        prop_assert_eq!(aug.compose(&p, &img, &Rng::new(seed)).unwrap().0, img);
    }

    #[test]
    fn crop_and_pad_dims_follow_formulas(w in 4u32..60, h in 4u32..60, f in 0.0f64..1.0) {
        let env = ImageEnv::default();
        let aug = augmenter(&env);
        let img = Raster::filled(w, h, Channels::Rgb, [1, 2, 3, 255]);
        let pad = spec("pad", json!({"w_factor": f, "h_factor": f / 2.0}));
        let out = aug.apply_with_probability(&pad, &img, &mut Rng::new(0)).unwrap().0;
        let dx = (f * w as f64).round() as u32;
        let dy = (f / 2.0 * h as f64).round() as u32;
        prop_assert_eq!(out.dims(), (w + 2 * dx, h + 2 * dy));
        let resize = spec("resize", json!({"width": w + 3, "height": h / 2}));
        let out = aug.apply_with_probability(&resize, &img, &mut Rng::new(0)).unwrap().0;
        prop_assert_eq!(out.dims(), (w + 3, h / 2));
    }
}

#[test]
fn shipped_assets_match_builtins() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../assets");
    assert!(polyaug_image::AssetStore::load(&dir).unwrap() == polyaug_image::AssetStore::builtin());
}
