use polyaug_audio::AudioBuffer;
use polyaug_core::{Lambdas, Params, Pipeline, Rng, TransformSpec};
use polyaug_image::{Channels, ImageEnv, Raster};
use polyaug_video::{augmenter, catalog, identity_params, per_frame, temporal, VideoClip, VideoEnv};
use proptest::prelude::{prop_assert, prop_assert_eq, proptest, ProptestConfig};
use serde_json::json;

const OPS: [&str; 43] = [
    "add_noise", "apply_lambda", "audio_swap", "augment_audio", "blend_videos", "blur", "brightness",
    "change_aspect_ratio", "change_video_speed", "color_jitter", "concat", "contrast", "crop",
    "encoding_quality", "fps", "grayscale", "hflip", "hstack", "insert_in_background", "loop",
    "meme_format", "overlay", "overlay_dots", "overlay_emoji", "overlay_onto_background_video",
    "overlay_onto_screenshot", "overlay_shapes", "overlay_text", "pad", "perspective_transform_and_shake",
    "pixelization", "remove_audio", "replace_with_background", "replace_with_color_frames", "resize",
    "rotate", "scale", "shift", "time_crop", "time_decimate", "trim", "vflip", "vstack",
];

fn clip(n: usize, w: u32, h: u32, fps: f64, audio_rate: Option<u32>) -> VideoClip {
    let frames = (0..n)
        .map(|i| Raster::from_fn(w, h, Channels::Rgb, |x, y| [(x * 9 + i as u32 * 17) as u8, (y * 11) as u8, (x ^ y) as u8, 255]))
        .collect();
    let audio = audio_rate.map(|r| AudioBuffer::sine(220.0, 0.4, n as f64 / fps, 2, r).unwrap());
    VideoClip::from_rasters(frames, fps, audio).unwrap()
}

fn spec(name: &str, params: serde_json::Value) -> TransformSpec {
    TransformSpec { name: name.into(), params: serde_json::from_value(params).unwrap(), p: 1.0 }
}

fn in_sync(c: &VideoClip) -> bool {
    match c.audio() {
        None => true,
        Some(a) => (a.duration() - c.len() as f64 / c.fps()).abs() <= 1.0 / c.fps(),
    }
}

#[test]
fn catalog_lists_every_video_op() {
    let names: Vec<_> = catalog().names().collect();
    assert_eq!(names, OPS);
}

#[test]
fn identity_parameterizations_leave_clips_unchanged() {
    let env = VideoEnv::default();
    let aug = augmenter(&env);
    let c = clip(6, 12, 10, 6.0, Some(4000));
    let mut covered = 0;
    for name in OPS {
        let Some(params) = identity_params(name) else { continue };
        covered += 1;
        let s = TransformSpec { name: name.into(), params, p: 1.0 };
        let (out, meta) = aug.apply_with_probability(&s, &c, &mut Rng::new(3)).unwrap();
        assert_eq!(out, c, "{name}");
        assert_eq!(meta.intensity, 0.0, "{name}");
    }
    assert_eq!(covered, 27);
}

#[test]
fn defaults_keep_clip_invariants() {
    let dir = tempfile::tempdir().unwrap();
    let wav = dir.path().join("swap.wav");
    AudioBuffer::sine(440.0, 0.3, 0.5, 1, 8000).unwrap().save(&wav).unwrap();
    let env = VideoEnv::default();
    let aug = augmenter(&env);
    let c = clip(8, 24, 16, 8.0, Some(8000));
    for name in OPS {
        let s = match name {
            "audio_swap" => spec(name, json!({"audio_path": wav.to_str().unwrap()})),
            "augment_audio" => spec(name, json!({"audio_pipeline": [{"op": "change_volume", "params": {"volume_db": -6.0}}]})),
            // default sigmas are in pixels and sized for full-resolution frames
            "perspective_transform_and_shake" => spec(name, json!({"sigma": 2.0, "shake_sigma": 0.5})),
            _ => TransformSpec::new(name),
        };
        let (out, meta) = aug
            .apply_with_probability(&s, &c, &mut Rng::new(9))
            .unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(in_sync(&out), "{name} broke A/V sync");
        assert!((0.0..=100.0).contains(&meta.intensity), "{name}");
        assert!(out.frames().iter().all(|f| f.dims() == out.dims()), "{name}");
    }
}

#[test]
fn hstack_of_two_square_clips() {
    let env = VideoEnv::default();
    let aug = augmenter(&env);
    let c = clip(2, 100, 100, 10.0, None);
    let (out, meta) = aug.apply_with_probability(&spec("hstack", json!({})), &c, &mut Rng::new(0)).unwrap();
    assert_eq!((out.len(), out.dims()), (2, (200, 100)));
    assert_eq!(meta.dst_shape.dims(), Some((200, 100)));
}

#[test]
fn time_crop_ten_seconds_to_four() {
    let env = VideoEnv::default();
    let aug = augmenter(&env);
    let c = clip(100, 8, 8, 10.0, Some(8000));
    let (out, _) = aug
        .apply_with_probability(&spec("time_crop", json!({"offset_factor": 0.2, "duration_factor": 0.4})), &c, &mut Rng::new(0))
        .unwrap();
    assert_eq!(out.len(), 40);
    assert_eq!(out.duration(), 4.0);
    assert_eq!(out.frame(0), c.frame(20));
    assert_eq!(out.audio().unwrap().channel(1), &c.audio().unwrap().channel(1)[16000..48000]);
    let bad = spec("time_crop", json!({"offset_factor": 0.7, "duration_factor": 0.4}));
    assert!(aug.apply_with_probability(&bad, &c, &mut Rng::new(0)).unwrap_err().is_validation());
}

#[test]
fn composed_audio_and_video_pipeline() {
    let env = VideoEnv::default();
    let aug = augmenter(&env);
    let c = clip(100, 16, 12, 10.0, Some(8000));
    let pipeline = Pipeline::of([
        spec("rotate", json!({})).with_p(0.5),
        spec("time_crop", json!({"offset_factor": 0.2, "duration_factor": 0.4})),
        spec(
            "augment_audio",
            json!({"audio_pipeline": [{"op": "add_background_noise"}, {"op": "tempo", "params": {"factor": 2.0}}]}),
        ),
    ]);
    let (out, meta) = aug.compose(&pipeline, &c, &Rng::new(21)).unwrap();
    assert_eq!(out.len(), 40);
    let a = out.audio().unwrap();
    assert_eq!(a.len(), 32000);
    for ch in a.channels() {
        assert!(ch[..16000].iter().any(|&v| v != 0.0));
        assert!(ch[16000..].iter().all(|&v| v == 0.0));
    }
    assert_eq!(meta[2].children.len(), 2);
    assert_eq!(meta[2].children[1].name, "tempo");
    let (again, meta_again) = aug.compose(&pipeline, &c, &Rng::new(21)).unwrap();
    assert_eq!(out, again);
    assert_eq!(meta, meta_again);
}

#[test]
fn augment_audio_needs_a_track() {
    let env = VideoEnv::default();
    let aug = augmenter(&env);
    let c = clip(4, 8, 8, 4.0, None);
    assert!(aug.apply_with_probability(&spec("augment_audio", json!({})), &c, &mut Rng::new(0)).is_err());
    let bad = spec("augment_audio", json!({"audio_pipeline": [{"op": "no_such_op"}]}));
    let with_audio = clip(4, 8, 8, 4.0, Some(4000));
    assert!(aug.apply_with_probability(&bad, &with_audio, &mut Rng::new(0)).is_err());
}

#[test]
fn per_frame_reuses_one_draw() {
    let env = ImageEnv::default();
    let c = clip(5, 20, 10, 5.0, None);
    let rot = TransformSpec::new("rotate").with("degrees", 90.0);
    let out = per_frame(&rot, &c, &env, &Rng::new(1)).unwrap();
    assert!(out.frames().iter().all(|f| f.dims() == (10, 20)));
    let flip = TransformSpec::new("hflip");
    let twice = per_frame(&flip, &per_frame(&flip, &c, &env, &Rng::new(1)).unwrap(), &env, &Rng::new(2)).unwrap();
    assert_eq!(twice, c);
    let random = TransformSpec::new("brightness").with("factor", json!({"uniform": [0.2, 1.8]}));
    let still = VideoClip::still(Raster::filled(6, 6, Channels::Rgb, [100, 100, 100, 255]), 4, 4.0).unwrap();
    let out = per_frame(&random, &still, &env, &Rng::new(5)).unwrap();
    assert!(out.frames().iter().all(|f| **f == *out.frame(0)));
    let noise = TransformSpec::new("random_noise").with("variance", 0.05);
    let out = per_frame(&noise, &still, &env, &Rng::new(5)).unwrap();
    assert_ne!(out.frame(0), out.frame(1));
}

#[test]
fn frame_count_formulas() {
    let env = VideoEnv::default();
    let aug = augmenter(&env);
    let c = clip(30, 8, 8, 10.0, Some(4000));
    let count = |s: TransformSpec| aug.apply_with_probability(&s, &c, &mut Rng::new(0)).unwrap().0.len();
    assert_eq!(count(spec("loop", json!({"num_loops": 2}))), 90);
    assert_eq!(count(spec("trim", json!({"start": 0.5, "end": 2.0}))), 15);
    assert_eq!(count(spec("fps", json!({"fps": 5.0}))), 15);
    assert_eq!(count(spec("change_video_speed", json!({"factor": 3.0}))), 10);
    assert_eq!(count(spec("time_decimate", json!({"on_s": 0.5, "off_s": 0.5}))), 15);
    assert_eq!(count(spec("concat", json!({"clips": ["self", "image:background:checker"]}))), 90);
    assert_eq!(count(spec("insert_in_background", json!({"offset_factor": 0.5}))), 60);
}

#[test]
fn removed_and_swapped_audio() {
    let env = VideoEnv::default();
    let aug = augmenter(&env);
    let c = clip(10, 8, 8, 10.0, Some(4000));
    let (out, _) = aug.apply_with_probability(&spec("remove_audio", json!({})), &c, &mut Rng::new(0)).unwrap();
    assert!(out.audio().is_none());
    let dir = tempfile::tempdir().unwrap();
    let wav = dir.path().join("long.wav");
    AudioBuffer::sine(300.0, 0.5, 3.0, 1, 4000).unwrap().save(&wav).unwrap();
    let swap = spec("audio_swap", json!({"audio_path": wav.to_str().unwrap(), "offset": 1.0}));
    let (out, _) = aug.apply_with_probability(&swap, &c, &mut Rng::new(0)).unwrap();
    assert_eq!((out.audio().unwrap().len(), out.audio().unwrap().num_channels()), (4000, 1));
}

#[test]
fn clip_references_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let other = clip(3, 8, 8, 10.0, None);
    let path = dir.path().join("other");
    other.save(&path).unwrap();
    let env = VideoEnv::default();
    let aug = augmenter(&env);
    let c = clip(4, 8, 8, 10.0, None);
    let s = spec("vstack", json!({"other": path.to_str().unwrap()}));
    let (out, _) = aug.apply_with_probability(&s, &c, &mut Rng::new(0)).unwrap();
    assert_eq!(out.dims(), (8, 16));
    assert_eq!(out.frame(3).pixel(1, 9), other.frame(0).pixel(1, 1));
    let missing = spec("vstack", json!({"other": dir.path().join("nope").to_str().unwrap()}));
    assert!(aug.apply_with_probability(&missing, &c, &mut Rng::new(0)).is_err());
}

#[test]
fn registered_lambda_runs() {
    let mut l = Lambdas::default();
    l.register("first_half", |c: &VideoClip, _: &Params, _: &mut Rng| temporal::time_crop(c, 0.0, 0.5));
    let env = VideoEnv::default().with_lambdas(l);
    let aug = augmenter(&env);
    let c = clip(10, 8, 8, 10.0, Some(4000));
    let (out, meta) = aug
        .apply_with_probability(&spec("apply_lambda", json!({"aug_function": "first_half"})), &c, &mut Rng::new(0))
        .unwrap();
    assert_eq!(out.len(), 5);
    assert_eq!(meta.intensity, 100.0);
}

#[test]
fn seeded_random_ops_are_deterministic() {
    let env = VideoEnv::default();
    let aug = augmenter(&env);
    let c = clip(6, 16, 16, 6.0, Some(4000));
    for name in ["add_noise", "overlay_dots", "overlay_shapes", "perspective_transform_and_shake"] {
        let s = match name {
            "perspective_transform_and_shake" => spec(name, json!({"sigma": 2.0, "shake_sigma": 0.5})),
            _ => TransformSpec::new(name),
        };
        let a = aug.apply_with_probability(&s, &c, &mut Rng::new(7)).unwrap();
        let b = aug.apply_with_probability(&s, &c, &mut Rng::new(7)).unwrap();
        let other = aug.apply_with_probability(&s, &c, &mut Rng::new(8)).unwrap();
        assert_eq!(a, b, "{name}");
        assert_ne!(a.0, other.0, "{name}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn per_frame_commutes_with_time_crop(
        n in 1usize..12,
        offset in 0.0f64..0.6,
        duration in 0.05f64..0.4,
        op in 0usize..4,
    ) {
        let env = ImageEnv::default();
        let c = clip(n, 9, 7, 5.0, Some(1000));
        let s = [
            TransformSpec::new("rotate").with("degrees", 33.0),
            TransformSpec::new("brightness").with("factor", 1.4),
            TransformSpec::new("crop").with("x1", 0.2).with("x2", 0.9),
            TransformSpec::new("hflip"),
        ][op].clone();
        let cropped_first = temporal::time_crop(&c, offset, duration);
        match cropped_first {
            Err(_) => prop_assert!(temporal::time_crop(&per_frame(&s, &c, &env, &Rng::new(0)).unwrap(), offset, duration).is_err()),
            Ok(cf) => {
                let a = per_frame(&s, &cf, &env, &Rng::new(0)).unwrap();
                let b = temporal::time_crop(&per_frame(&s, &c, &env, &Rng::new(0)).unwrap(), offset, duration).unwrap();
                prop_assert_eq!(a.len(), b.len());
                for (x, y) in a.frames().iter().zip(b.frames()) {
                    prop_assert_eq!(x, y);
                }
            }
        }
    }

    #[test]
    fn temporal_ops_keep_audio_in_sync(
        n in 1usize..40,
        fps in 1.0f64..30.0,
        op in 0usize..9,
        a in 0.0f64..1.0,
        b in 0.0f64..1.0,
        seed in 0u64..1000,
    ) {
        let env = VideoEnv::default();
        let aug = augmenter(&env);
        let c = clip(n, 6, 4, fps, Some(3000));
        let s = match op {
            0 => spec("loop", json!({"num_loops": (a * 3.0) as i64})),
            1 => spec("change_video_speed", json!({"factor": 0.25 + 3.0 * a})),
            2 => spec("fps", json!({"fps": 1.0 + 29.0 * a})),
            3 => spec("shift", json!({"offset_factor": a})),
            4 => spec("time_decimate", json!({"on_s": 0.05 + a, "off_s": b})),
            5 => spec("time_crop", json!({"offset_factor": a * (1.0 - b), "duration_factor": b.max(1e-3) * (1.0 - a * (1.0 - b))})),
            6 => spec("concat", json!({"clips": ["self"]})),
            7 => spec("trim", json!({"start": a * n as f64 / fps})),
            _ => spec("insert_in_background", json!({"offset_factor": a})),
        };
        if let Ok((out, _)) = aug.apply_with_probability(&s, &c, &mut Rng::new(seed)) {
            prop_assert!(in_sync(&out));
            prop_assert!(out.frames().iter().all(|f| f.dims() == (6, 4)));
        }
    }
}
