//! The video transform catalog.

use std::path::Path;
use std::sync::{Arc, OnceLock};

use polyaug_audio::{AudioBuffer, AudioEnv};
use polyaug_core::intensity::{fraction, log2_factor, saturating};
use polyaug_core::spec::Node;
use polyaug_core::{lambda, Augmenter, Catalog, Error, Lambdas, Modality, OpCtx, OpDef, ParamDecl, Params, Pipeline, Result, Rng, Shape, TransformSpec};
use polyaug_image::ImageEnv;
use serde_json::{json, Value};

use crate::clip::VideoClip;
use crate::{compose, temporal};

pub struct VideoModality;

/// Shared read-only resources: the image and audio envs used by delegated
/// transforms, plus video callbacks.
#[derive(Clone, Default)]
pub struct VideoEnv {
    pub image: ImageEnv,
    pub audio: AudioEnv,
    pub lambdas: Arc<Lambdas<VideoClip>>,
}

impl VideoEnv {
    pub fn new(image: ImageEnv, audio: AudioEnv) -> Self {
        Self { image, audio, lambdas: Arc::new(Lambdas::default()) }
    }

    pub fn with_lambdas(mut self, lambdas: Lambdas<VideoClip>) -> Self {
        self.lambdas = Arc::new(lambdas);
        self
    }

    /// Resolves a clip reference relative to the clip being transformed:
    /// `self`, `image:<image reference>` (a still as long as `like`), or a
    /// clip directory / media path.
    pub fn clip(&self, reference: &str, like: &VideoClip) -> Result<VideoClip> {
        if reference == "self" {
            return Ok(like.clone());
        }
        if let Some(img) = reference.strip_prefix("image:") {
            return VideoClip::still(self.image.image(img)?, like.len(), like.fps());
        }
        VideoClip::open(Path::new(reference))
    }
}

impl Modality for VideoModality {
    type Datum = VideoClip;
    type Env = VideoEnv;
    const NAME: &'static str = "video";

    fn shape(c: &VideoClip) -> Shape {
        let (width, height) = c.dims();
        Shape::Video {
            frames: c.len(),
            width,
            height,
            fps: c.fps(),
            audio: c.audio().map(|a| {
                Box::new(Shape::Audio { samples: a.len(), channels: a.num_channels(), sample_rate: a.sample_rate() })
            }),
        }
    }
}

pub type VideoOp = OpDef<VideoModality>;

pub fn catalog() -> &'static Catalog<VideoModality> {
    static CATALOG: OnceLock<Catalog<VideoModality>> = OnceLock::new();
    CATALOG.get_or_init(|| Catalog::new(ops()))
}

pub fn augmenter(env: &VideoEnv) -> Augmenter<'_, VideoModality> {
    Augmenter::new(catalog(), env)
}

/// Image ops whose output depends on the random stream, not just the params.
const RANDOM_IMAGE_OPS: [&str; 4] = ["apply_lambda", "perspective_transform", "random_noise", "shuffle_pixels"];

/// Runs an image op with resolved params on every frame; frame `i` uses
/// stream `rng.derive(i)`.
pub fn apply_per_frame(name: &str, params: &Params, clip: &VideoClip, env: &ImageEnv, rng: &Rng) -> Result<VideoClip> {
    let aug = polyaug_image::augmenter(env);
    let dedup = !RANDOM_IMAGE_OPS.contains(&name);
    clip.map_frames(dedup, |i, f| aug.apply_resolved(name, params, f, rng.derive(i as u64)))
}

/// Applies an image spec frame by frame. Params are resolved once, so every
/// frame sees the same draw; one coin decides for the whole clip.
pub fn per_frame(spec: &TransformSpec, clip: &VideoClip, env: &ImageEnv, rng: &Rng) -> Result<VideoClip> {
    let aug = polyaug_image::augmenter(env);
    aug.validate_spec(spec)?;
    if rng.derive(2).next_f64() >= spec.p {
        return Ok(clip.clone());
    }
    let params = aug.resolve(spec, &rng.derive(0))?;
    if let Some(check) = polyaug_image::catalog().get(&spec.name)?.check {
        check(&params, env)?;
    }
    apply_per_frame(&spec.name, &params, clip, env, &rng.derive(1))
}

/// Video op name and the image op it runs on each frame.
const DELEGATES: [(&str, &str); 20] = [
    ("add_noise", "random_noise"),
    ("blur", "blur"),
    ("brightness", "brightness"),
    ("change_aspect_ratio", "change_aspect_ratio"),
    ("color_jitter", "color_jitter"),
    ("contrast", "contrast"),
    ("crop", "crop"),
    ("encoding_quality", "encoding_quality"),
    ("grayscale", "grayscale"),
    ("hflip", "hflip"),
    ("meme_format", "meme_format"),
    ("overlay_emoji", "overlay_emoji"),
    ("overlay_onto_screenshot", "overlay_onto_screenshot"),
    ("overlay_text", "overlay_text"),
    ("pad", "pad"),
    ("pixelization", "pixelization"),
    ("resize", "resize"),
    ("rotate", "rotate"),
    ("scale", "scale"),
    ("vflip", "vflip"),
];

fn image_op(i: usize) -> &'static OpDef<polyaug_image::ImageModality> {
    polyaug_image::catalog().get(DELEGATES[i].1).expect("delegate names an image op")
}

fn delegate_apply<const I: usize>(clip: &VideoClip, p: &Params, ctx: &mut OpCtx<'_, VideoModality>) -> Result<VideoClip> {
    apply_per_frame(DELEGATES[I].1, p, clip, &ctx.env.image, &ctx.rng)
}

fn delegate_intensity<const I: usize>(p: &Params, s: Option<&Shape>, env: &VideoEnv) -> Result<f64> {
    (image_op(I).intensity)(p, s, &env.image)
}

fn delegate_check<const I: usize>(p: &Params, env: &VideoEnv) -> Result<()> {
    match image_op(I).check {
        Some(check) => check(p, &env.image),
        None => Ok(()),
    }
}

fn delegate<const I: usize>() -> VideoOp {
    VideoOp::new(DELEGATES[I].0, delegate_apply::<I>)
        .params(image_op(I).schema.clone())
        .intensity(delegate_intensity::<I>)
        .check(delegate_check::<I>)
}

fn delegates() -> Vec<VideoOp> {
    vec![
        delegate::<0>(), delegate::<1>(), delegate::<2>(), delegate::<3>(), delegate::<4>(),
        delegate::<5>(), delegate::<6>(), delegate::<7>(), delegate::<8>(), delegate::<9>(),
        delegate::<10>(), delegate::<11>(), delegate::<12>(), delegate::<13>(), delegate::<14>(),
        delegate::<15>(), delegate::<16>(), delegate::<17>(), delegate::<18>(), delegate::<19>(),
    ]
}

fn shape_fps(op: &str, shape: Option<&Shape>) -> Result<(usize, f64)> {
    match shape {
        Some(Shape::Video { frames, fps, .. }) => Ok((*frames, *fps)),
        _ => Err(Error::Intensity { op: op.into(), reason: "needs the source clip shape".into() }),
    }
}

fn audio_pipeline(p: &Params) -> Result<Pipeline> {
    Pipeline::from_value(p.json("audio_pipeline").unwrap_or(&Value::Array(Vec::new())))
}

/// Strongest transform in an audio pipeline; random params count as full.
fn pipeline_intensity(nodes: &[Node], aug: &Augmenter<'_, polyaug_audio::AudioModality>) -> f64 {
    nodes
        .iter()
        .map(|n| match n {
            Node::Transform(spec) if spec.p > 0.0 => aug.intensity(spec).unwrap_or(100.0),
            Node::Transform(_) => 0.0,
            Node::Compose { children, p } if *p > 0.0 => pipeline_intensity(children, aug),
            Node::Compose { .. } => 0.0,
        })
        .fold(0.0, f64::max)
}

fn clip_list(p: &Params) -> Result<Vec<String>> {
    match p.json("clips") {
        None => Ok(Vec::new()),
        Some(Value::Array(items)) => items
            .iter()
            .map(|v| v.as_str().map(str::to_string).ok_or_else(|| Error::invalid("concat", "`clips` entries must be strings")))
            .collect(),
        Some(_) => Err(Error::invalid("concat", "`clips` must be a list of clip references")),
    }
}

fn window_params(offset: f64, duration: f64) -> [ParamDecl; 2] {
    [ParamDecl::float("offset_factor", 0.0, 1.0, offset), ParamDecl::float("duration_factor", 0.0, 1.0, duration)]
}

fn position_params() -> [ParamDecl; 2] {
    [ParamDecl::float("x_pos", 0.0, 1.0, 0.0), ParamDecl::float("y_pos", 0.0, 1.0, 0.0)]
}

fn ops() -> Vec<VideoOp> {
    let mut ops = delegates();
    ops.extend([
        VideoOp::new("apply_lambda", |c, p, ctx| ctx.env.lambdas.call(c, p, &mut ctx.rng))
            .params(lambda::schema())
            .check(|p, env| env.lambdas.check(p))
            .intensity(|p, _, _| lambda::intensity(p)),
        VideoOp::new("audio_swap", |c, p, _| {
            let a = AudioBuffer::load(Path::new(p.str("audio_path")?))?;
            let skip = (p.f64("offset")? * a.sample_rate() as f64).round() as usize;
            c.with_audio(Some(a.slice(skip.min(a.len()), a.len())))
        })
        .param(ParamDecl::text("audio_path", ""))
        .param(ParamDecl::float("offset", 0.0, 1e6, 0.0))
        .check(|p, _| match p.str("audio_path")? {
            "" => Err(Error::invalid("audio_swap", "`audio_path` is required")),
            _ => Ok(()),
        }),
        VideoOp::new("augment_audio", |c, p, ctx| {
            let audio = c.audio().ok_or_else(|| Error::failed("augment_audio", "clip has no audio track"))?;
            let aug = polyaug_audio::augmenter(&ctx.env.audio);
            let (out, meta) = aug.compose(&audio_pipeline(p)?, audio, &ctx.rng)?;
            ctx.record_nested(meta);
            c.with_audio(Some(out))
        })
        .param(ParamDecl::json("audio_pipeline", json!([])))
        .check(|p, env| polyaug_audio::augmenter(&env.audio).validate(&audio_pipeline(p)?))
        .intensity(|p, _, env| Ok(pipeline_intensity(&audio_pipeline(p)?.children, &polyaug_audio::augmenter(&env.audio)))),
        VideoOp::new("blend_videos", |c, p, ctx| compose::blend(c, &ctx.env.clip(p.str("other")?, c)?, p.f64("alpha")?))
            .param(ParamDecl::text("other", "image:background:gradient"))
            .param(ParamDecl::float("alpha", 0.0, 1.0, 0.5))
            .intensity(|p, _, _| Ok(fraction(p.f64("alpha")?))),
        VideoOp::new("change_video_speed", |c, p, _| temporal::change_speed(c, p.f64("factor")?))
            .param(ParamDecl::positive("factor", 100.0, 2.0))
            .intensity(|p, _, _| Ok(log2_factor(p.f64("factor")?))),
        VideoOp::new("concat", |c, p, ctx| {
            let others = clip_list(p)?.iter().map(|r| ctx.env.clip(r, c)).collect::<Result<Vec<_>>>()?;
            temporal::concat(c, &others)
        })
        .param(ParamDecl::json("clips", json!(["self"])))
        .check(|p, _| clip_list(p).map(|_| ()))
        .intensity(|p, _, _| Ok(if clip_list(p)?.is_empty() { 0.0 } else { 100.0 })),
        VideoOp::new("fps", |c, p, _| temporal::change_fps(c, p.f64("fps")?))
            .param(ParamDecl::positive("fps", 1000.0, 15.0))
            .intensity(|p, s, _| {
                let (_, fps) = shape_fps("fps", s)?;
                Ok(log2_factor(p.f64("fps")? / fps))
            }),
        VideoOp::new("hstack", |c, p, ctx| compose::stack(c, &ctx.env.clip(p.str("other")?, c)?, true))
            .param(ParamDecl::text("other", "self"))
            .intensity(|_, _, _| Ok(50.0)),
        VideoOp::new("insert_in_background", |c, p, ctx| {
            temporal::insert_in_background(c, &ctx.env.clip(p.str("background")?, c)?, p.f64("offset_factor")?)
        })
        .param(ParamDecl::text("background", "image:background:gradient"))
        .param(ParamDecl::float("offset_factor", 0.0, 1.0, 0.0)),
        VideoOp::new("loop", |c, p, _| temporal::loop_clip(c, p.usize("num_loops")?))
            .param(ParamDecl::int("num_loops", 0, 1000, 1))
            .intensity(|p, _, _| Ok(saturating(p.f64("num_loops")?, 10.0))),
        VideoOp::new("overlay", |c, p, ctx| {
            let other = ctx.env.clip(p.str("other")?, c)?;
            compose::overlay(c, &other, p.f64("opacity")?, p.f64("overlay_size")?, p.f64("x_pos")?, p.f64("y_pos")?)
        })
        .param(ParamDecl::text("other", "self"))
        .param(ParamDecl::float("opacity", 0.0, 1.0, 1.0))
        .param(ParamDecl::positive("overlay_size", 10.0, 0.3))
        .params(position_params())
        .intensity(|p, _, _| Ok(fraction(p.f64("opacity")? * p.f64("overlay_size")?.powi(2)))),
        VideoOp::new("overlay_dots", |c, p, ctx| {
            let (w, h) = c.dims();
            let color = match p.get("color") {
                Some(v) if !v.is_null() => {
                    let [r, g, b, _] = p.color("color")?;
                    Some([r, g, b])
                }
                _ => None,
            };
            let layer = compose::dots_layer(w, h, p.usize("num_dots")?, p.f64("dot_radius")?, color, p.f64("opacity")?, &mut ctx.rng);
            compose::apply_layer(c, &layer)
        })
        .param(ParamDecl::int("num_dots", 0, 100_000, 100))
        .param(ParamDecl::float("dot_radius", 0.0, 1.0, 0.01))
        .param(ParamDecl::color("color", [255, 255, 255]).optional())
        .param(ParamDecl::float("opacity", 0.0, 1.0, 1.0))
        .intensity(|p, _, _| {
            let covered = p.f64("num_dots")? * std::f64::consts::PI * p.f64("dot_radius")?.powi(2);
            Ok(fraction(covered * p.f64("opacity")?))
        }),
        VideoOp::new("overlay_onto_background_video", |c, p, ctx| {
            let bg = ctx.env.clip(p.str("background")?, c)?;
            compose::onto_background_video(c, &bg, p.f64("overlay_size")?, p.f64("x_pos")?, p.f64("y_pos")?)
        })
        .param(ParamDecl::text("background", "image:background:checker"))
        .param(ParamDecl::positive("overlay_size", 10.0, 0.7))
        .param(ParamDecl::float("x_pos", 0.0, 1.0, 0.15))
        .param(ParamDecl::float("y_pos", 0.0, 1.0, 0.15))
        .intensity(|p, _, _| Ok(fraction(1.0 - p.f64("overlay_size")?.powi(2)))),
        VideoOp::new("overlay_shapes", |c, p, ctx| {
            let (w, h) = c.dims();
            let layer = compose::shapes_layer(
                w,
                h,
                p.usize("num_shapes")?,
                p.f64("min_size")?,
                p.f64("max_size")?,
                p.f64("opacity")?,
                &mut ctx.rng,
            );
            compose::apply_layer(c, &layer)
        })
        .param(ParamDecl::int("num_shapes", 0, 10_000, 5))
        .param(ParamDecl::float("min_size", 0.0, 1.0, 0.1))
        .param(ParamDecl::float("max_size", 0.0, 1.0, 0.3))
        .param(ParamDecl::float("opacity", 0.0, 1.0, 1.0))
        .check(|p, _| {
            if p.f64("min_size")? > p.f64("max_size")? {
                return Err(Error::invalid("overlay_shapes", "`min_size` exceeds `max_size`"));
            }
            Ok(())
        })
        .intensity(|p, _, _| {
            let mean = (p.f64("min_size")? + p.f64("max_size")?) / 2.0;
            Ok(fraction(p.f64("num_shapes")? * mean * mean * p.f64("opacity")?))
        }),
        VideoOp::new("perspective_transform_and_shake", |c, p, ctx| {
            compose::perspective_and_shake(c, p.f64("sigma")?, p.f64("shake_sigma")?, p.color("fill")?, &ctx.rng)
        })
        .param(ParamDecl::float("sigma", 0.0, 1000.0, 50.0))
        .param(ParamDecl::float("shake_sigma", 0.0, 1000.0, 5.0))
        .param(ParamDecl::color("fill", [0, 0, 0]))
        .intensity(|p, _, _| Ok(saturating(p.f64("sigma")? + p.f64("shake_sigma")?, 100.0))),
        VideoOp::new("remove_audio", |c, _, _| c.with_audio(None)),
        VideoOp::new("replace_with_background", |c, p, ctx| {
            let bg = ctx.env.clip(p.str("background")?, c)?;
            temporal::replace_frames(c, &bg, p.f64("offset_factor")?, p.f64("duration_factor")?)
        })
        .param(ParamDecl::text("background", "image:background:checker"))
        .params(window_params(0.0, 0.5))
        .intensity(|p, _, _| Ok(window_intensity(p))),
        VideoOp::new("replace_with_color_frames", |c, p, _| {
            temporal::replace_with_color_frames(c, p.f64("offset_factor")?, p.f64("duration_factor")?, p.color("color")?)
        })
        .params(window_params(0.0, 1.0))
        .param(ParamDecl::color("color", [0, 0, 0]))
        .intensity(|p, _, _| Ok(window_intensity(p))),
        VideoOp::new("shift", |c, p, _| temporal::shift(c, p.f64("offset_factor")?, p.color("color")?))
            .param(ParamDecl::float("offset_factor", 0.0, 1.0, 0.1))
            .param(ParamDecl::color("color", [0, 0, 0]))
            .intensity(|p, _, _| Ok(fraction(p.f64("offset_factor")?))),
        VideoOp::new("time_crop", |c, p, _| temporal::time_crop(c, p.f64("offset_factor")?, p.f64("duration_factor")?))
            .param(ParamDecl::float("offset_factor", 0.0, 1.0, 0.0))
            .param(ParamDecl::positive("duration_factor", 1.0, 0.5))
            .check(|p, _| {
                if p.f64("offset_factor")? + p.f64("duration_factor")? > 1.0 + 1e-9 {
                    return Err(Error::invalid("time_crop", "offset_factor + duration_factor exceeds 1"));
                }
                Ok(())
            })
            .intensity(|p, _, _| Ok(fraction(1.0 - p.f64("duration_factor")?))),
        VideoOp::new("time_decimate", |c, p, _| temporal::time_decimate(c, p.f64("on_s")?, p.f64("off_s")?))
            .param(ParamDecl::positive("on_s", 3600.0, 1.0))
            .param(ParamDecl::float("off_s", 0.0, 3600.0, 1.0))
            .intensity(|p, _, _| {
                let (on, off) = (p.f64("on_s")?, p.f64("off_s")?);
                Ok(fraction(off / (on + off)))
            }),
        VideoOp::new("trim", |c, p, _| temporal::trim(c, p.f64("start")?, p.opt_f64("end")?))
            .param(ParamDecl::float("start", 0.0, 1e6, 0.0))
            .param(ParamDecl::positive("end", 1e6, 1.0).optional())
            .check(|p, _| match p.opt_f64("end")? {
                Some(end) if end <= p.f64("start")? => Err(Error::invalid("trim", "`end` must exceed `start`")),
                _ => Ok(()),
            })
            .intensity(|p, s, _| {
                let (n, fps) = shape_fps("trim", s)?;
                let d = n as f64 / fps;
                let end = p.opt_f64("end")?.unwrap_or(d).min(d);
                Ok(fraction(1.0 - (end - p.f64("start")?).max(0.0) / d))
            }),
        VideoOp::new("vstack", |c, p, ctx| compose::stack(c, &ctx.env.clip(p.str("other")?, c)?, false))
            .param(ParamDecl::text("other", "self"))
            .intensity(|_, _, _| Ok(50.0)),
    ]);
    ops.sort_by_key(|o| o.name);
    ops
}

fn window_intensity(p: &Params) -> f64 {
    let offset = p.f64("offset_factor").unwrap_or(0.0);
    let duration = p.f64("duration_factor").unwrap_or(0.0);
    fraction(duration.min(1.0 - offset))
}

/// Params that turn a catalog op into the identity, for ops that have one.
pub fn identity_params(name: &str) -> Option<Params> {
    if let Some(&(_, image)) = DELEGATES.iter().find(|(v, _)| *v == name) {
        return polyaug_image::identity_params(image);
    }
    let p = |v: Value| -> Params { serde_json::from_value(v).expect("object literal") };
    Some(match name {
        "apply_lambda" => p(json!({"aug_function": "identity"})),
        "augment_audio" => p(json!({"audio_pipeline": []})),
        "blend_videos" => p(json!({"alpha": 0.0})),
        "change_video_speed" => p(json!({"factor": 1.0})),
        "concat" => p(json!({"clips": []})),
        "loop" => p(json!({"num_loops": 0})),
        "overlay_dots" => p(json!({"num_dots": 0})),
        "overlay_shapes" => p(json!({"num_shapes": 0})),
        "perspective_transform_and_shake" => p(json!({"sigma": 0.0, "shake_sigma": 0.0})),
        "replace_with_background" | "replace_with_color_frames" => p(json!({"duration_factor": 0.0})),
        "shift" => p(json!({"offset_factor": 0.0})),
        "time_crop" => p(json!({"offset_factor": 0.0, "duration_factor": 1.0})),
        "time_decimate" => p(json!({"off_s": 0.0})),
        "trim" => p(json!({"start": 0.0})),
        _ => return None,
    })
}
