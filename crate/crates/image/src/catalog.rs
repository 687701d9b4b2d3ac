//! The image transform catalog.

use std::sync::{Arc, OnceLock};

use polyaug_core::intensity::{factor, fraction, log2_factor, saturating};
use polyaug_core::{lambda, Augmenter, Catalog, Error, Lambdas, Modality, OpDef, ParamDecl, Params, Result, Shape};
use serde_json::json;

use crate::assets::AssetStore;
use crate::overlay::{covered_fraction, letterbox_fit, scaled_dims, text_scale};
use crate::raster::Raster;
use crate::{color, filter, geometry, overlay, perspective};

pub struct ImageModality;

/// Shared read-only resources for image transforms.
#[derive(Clone)]
pub struct ImageEnv {
    pub assets: Arc<AssetStore>,
    pub lambdas: Arc<Lambdas<Raster>>,
}

impl Default for ImageEnv {
    fn default() -> Self {
        Self::new(Arc::new(AssetStore::builtin()))
    }
}

impl ImageEnv {
    pub fn new(assets: Arc<AssetStore>) -> Self {
        Self { assets, lambdas: Arc::new(Lambdas::default()) }
    }

    pub fn with_lambdas(mut self, lambdas: Lambdas<Raster>) -> Self {
        self.lambdas = Arc::new(lambdas);
        self
    }

    /// Resolves an image reference: `emoji:`, `background:`, `mask:`,
    /// `template:` prefixes or a file path.
    pub fn image(&self, reference: &str) -> Result<Raster> {
        self.assets.image(reference)
    }

    /// Emoji params accept a bare builtin name as well as any reference.
    pub fn emoji(&self, reference: &str) -> Result<Raster> {
        match self.assets.emoji(reference) {
            Ok(e) => Ok(e.clone()),
            Err(_) => self.assets.image(reference),
        }
    }
}

impl Modality for ImageModality {
    type Datum = Raster;
    type Env = ImageEnv;
    const NAME: &'static str = "image";

    fn shape(img: &Raster) -> Shape {
        Shape::Image {
            width: img.width(),
            height: img.height(),
            channels: img.channel_count() as u8,
        }
    }
}

pub type ImageOp = OpDef<ImageModality>;

pub fn catalog() -> &'static Catalog<ImageModality> {
    static CATALOG: OnceLock<Catalog<ImageModality>> = OnceLock::new();
    CATALOG.get_or_init(|| Catalog::new(ops()))
}

pub fn augmenter(env: &ImageEnv) -> Augmenter<'_, ImageModality> {
    Augmenter::new(catalog(), env)
}

fn dims(op: &str, shape: Option<&Shape>) -> Result<(u32, u32)> {
    shape.and_then(Shape::dims).ok_or_else(|| Error::Intensity {
        op: op.into(),
        reason: "needs the source image size".into(),
    })
}

fn u32_param(p: &Params, key: &str) -> Result<u32> {
    u32::try_from(p.i64(key)?).map_err(|_| Error::invalid(key, "out of range"))
}

fn opt_u32(p: &Params, key: &str) -> Result<Option<u32>> {
    p.opt_i64(key)?
        .map(|v| u32::try_from(v).map_err(|_| Error::invalid(key, "out of range")))
        .transpose()
}

/// Target dims of `resize` given optional width/height (missing keeps the
/// source size on that axis).
fn resize_target(p: &Params, src: (u32, u32)) -> Result<(u32, u32)> {
    Ok((opt_u32(p, "width")?.unwrap_or(src.0), opt_u32(p, "height")?.unwrap_or(src.1)))
}

fn clip_target(p: &Params, src: (u32, u32)) -> Result<(u32, u32)> {
    let bound = |key| -> Result<Option<u64>> { Ok(p.opt_i64(key)?.map(|v| v as u64)) };
    Ok(geometry::clip_dims(src, bound("min_resolution")?, bound("max_resolution")?))
}

/// Strength of a rescale: the larger per-axis `|log2|` scale, capped at 2.
fn rescale_intensity(src: (u32, u32), dst: (u32, u32)) -> f64 {
    let sx = (dst.0 as f64 / src.0 as f64).log2().abs();
    let sy = (dst.1 as f64 / src.1 as f64).log2().abs();
    saturating(sx.max(sy), 2.0)
}

fn position_param(p: &Params) -> Result<(f64, f64)> {
    Ok((p.f64("x_pos")?, p.f64("y_pos")?))
}

fn box_fraction(shape: (u32, u32), pos: (f64, f64), size: (u32, u32)) -> f64 {
    let x = (pos.0 * shape.0 as f64).round() as i64;
    let y = (pos.1 * shape.1 as f64).round() as i64;
    covered_fraction(shape.0, shape.1, x, y, size.0, size.1)
}

fn ops() -> Vec<ImageOp> {
    vec![
        ImageOp::new("apply_filter_kernel", |img, p, _| filter::apply_filter_kernel(img, p.str("kernel")?))
            .param(ParamDecl::choice(
                "kernel",
                &[
                    "identity",
                    "blur",
                    "contour",
                    "detail",
                    "edge_enhance",
                    "edge_enhance_more",
                    "emboss",
                    "find_edges",
                    "sharpen",
                    "smooth",
                ],
                "edge_enhance",
            ))
            .intensity(|p, _, _| Ok(if p.str("kernel")? == "identity" { 0.0 } else { 100.0 })),
        ImageOp::new("apply_lambda", |img, p, ctx| ctx.env.lambdas.call(img, p, &mut ctx.rng))
            .params(lambda::schema())
            .intensity(|p, _, _| lambda::intensity(p))
            .check(|p, env| env.lambdas.check(p)),
        ImageOp::new("blur", |img, p, _| filter::blur(img, p.f64("radius")?))
            .param(ParamDecl::float("radius", 0.0, 100.0, 2.0))
            .intensity(|p, _, _| Ok(saturating(p.f64("radius")?, 10.0))),
        ImageOp::new("brightness", |img, p, _| color::brightness(img, p.f64("factor")?))
            .param(ParamDecl::float("factor", 0.0, 10.0, 1.5))
            .intensity(|p, _, _| Ok(factor(p.f64("factor")?))),
        ImageOp::new("change_aspect_ratio", |img, p, _| geometry::change_aspect_ratio(img, p.f64("ratio")?))
            .param(ParamDecl::positive("ratio", 100.0, 1.5))
            .intensity(|p, _, _| Ok(log2_factor(p.f64("ratio")?))),
        ImageOp::new("clip_image_size", |img, p, _| {
            geometry::clip_image_size(
                img,
                p.opt_i64("min_resolution")?.map(|v| v as u64),
                p.opt_i64("max_resolution")?.map(|v| v as u64),
            )
        })
        .param(ParamDecl::int("min_resolution", 1, i64::from(u32::MAX), 1).optional())
        .param(ParamDecl::int("max_resolution", 1, i64::from(u32::MAX), 1).optional())
        .check(|p, _| match (p.opt_i64("min_resolution")?, p.opt_i64("max_resolution")?) {
            (Some(lo), Some(hi)) if lo > hi => Err(Error::invalid("clip_image_size", "min_resolution > max_resolution")),
            _ => Ok(()),
        })
        .intensity(|p, s, _| {
            let src = dims("clip_image_size", s)?;
            Ok(rescale_intensity(src, clip_target(p, src)?))
        }),
        ImageOp::new("color_jitter", |img, p, _| {
            color::color_jitter(img, p.f64("brightness_factor")?, p.f64("contrast_factor")?, p.f64("saturation_factor")?)
        })
        .param(ParamDecl::positive("brightness_factor", 10.0, 1.2))
        .param(ParamDecl::positive("contrast_factor", 10.0, 1.2))
        .param(ParamDecl::positive("saturation_factor", 10.0, 1.2))
        .intensity(|p, _, _| {
            Ok(factor(p.f64("brightness_factor")?)
                .max(factor(p.f64("contrast_factor")?))
                .max(factor(p.f64("saturation_factor")?)))
        }),
        ImageOp::new("contrast", |img, p, _| color::contrast(img, p.f64("factor")?))
            .param(ParamDecl::float("factor", 0.0, 10.0, 1.5))
            .intensity(|p, _, _| Ok(factor(p.f64("factor")?))),
        ImageOp::new("convert_color", |img, p, _| color::convert_color(img, p.str("mode")?))
            .param(ParamDecl::choice("mode", &["RGB", "RGBA", "L"], "L"))
            .intensity(|p, _, _| Ok(if p.str("mode")? == "L" { 100.0 } else { 0.0 })),
        ImageOp::new("crop", |img, p, _| geometry::crop(img, p.f64("x1")?, p.f64("y1")?, p.f64("x2")?, p.f64("y2")?))
            .param(ParamDecl::float("x1", 0.0, 1.0, 0.25))
            .param(ParamDecl::float("y1", 0.0, 1.0, 0.25))
            .param(ParamDecl::float("x2", 0.0, 1.0, 0.75))
            .param(ParamDecl::float("y2", 0.0, 1.0, 0.75))
            .check(|p, _| {
                if p.f64("x1")? < p.f64("x2")? && p.f64("y1")? < p.f64("y2")? {
                    Ok(())
                } else {
                    Err(Error::invalid("crop", "need x1 < x2 and y1 < y2"))
                }
            })
            .intensity(|p, _, _| {
                let kept = (p.f64("x2")? - p.f64("x1")?) * (p.f64("y2")? - p.f64("y1")?);
                Ok(fraction(1.0 - kept))
            }),
        ImageOp::new("encoding_quality", |img, p, _| filter::encoding_quality(img, u32_param(p, "quality")? as u8))
            .param(ParamDecl::int("quality", 1, 100, 50))
            .intensity(|p, _, _| Ok(100.0 - p.f64("quality")?)),
        ImageOp::new("grayscale", |img, _, _| Ok(color::grayscale(img))),
        ImageOp::new("hflip", |img, _, _| Ok(geometry::hflip(img))),
        ImageOp::new("masked_composite", |img, p, ctx| {
            let (w, h) = img.dims();
            let other = geometry::resize(&ctx.env.image(p.str("overlay")?)?, w, h)?;
            let mask = geometry::resize(&ctx.env.image(p.str("mask")?)?, w, h)?;
            color::masked_composite(img, &other, &mask)
        })
        .param(ParamDecl::text("overlay", "background:checker"))
        .param(ParamDecl::text("mask", "mask:circle"))
        .check(|p, env| {
            env.image(p.str("overlay")?)?;
            env.image(p.str("mask")?).map(|_| ())
        })
        .intensity(|p, _, env| {
            let mask = env.image(p.str("mask")?)?;
            let n = mask.channel_count();
            let total: f64 = mask.data().chunks_exact(n).map(|px| color::gray_value(px) as f64 / 255.0).sum();
            Ok(fraction(total / (mask.width() as f64 * mask.height() as f64)))
        }),
        ImageOp::new("meme_format", |img, p, ctx| {
            overlay::meme_format(
                img,
                &ctx.env.assets.font,
                p.str("text")?,
                u32_param(p, "caption_height")?,
                p.color("meme_bg_color")?,
                p.color("text_color")?,
            )
        })
        .param(ParamDecl::text("text", "LOL"))
        .param(ParamDecl::int("caption_height", 1, 10_000, 75))
        .param(ParamDecl::color("meme_bg_color", [0, 0, 0]))
        .param(ParamDecl::color("text_color", [255, 255, 255]))
        .check(|p, _| {
            if p.str("text")?.trim().is_empty() {
                Err(Error::invalid("meme_format", "text must not be empty"))
            } else {
                Ok(())
            }
        })
        .intensity(|p, s, _| {
            let (_, h) = dims("meme_format", s)?;
            let c = p.f64("caption_height")?;
            Ok(fraction(c / (h as f64 + c)))
        }),
        ImageOp::new("opacity", |img, p, _| color::opacity(img, p.f64("level")?))
            .param(ParamDecl::float("level", 0.0, 1.0, 0.5))
            .intensity(|p, _, _| Ok(fraction(1.0 - p.f64("level")?))),
        ImageOp::new("overlay_emoji", |img, p, ctx| {
            let emoji = ctx.env.emoji(p.str("emoji")?)?;
            let (x, y) = position_param(p)?;
            overlay::overlay_image(img, &emoji, p.f64("opacity")?, p.f64("emoji_size")?, x, y).map(|(o, _)| o)
        })
        .param(ParamDecl::text("emoji", "smile"))
        .param(ParamDecl::float("opacity", 0.0, 1.0, 1.0))
        .param(ParamDecl::positive("emoji_size", 10.0, 0.15))
        .param(ParamDecl::float("x_pos", -1.0, 1.0, 0.4))
        .param(ParamDecl::float("y_pos", -1.0, 1.0, 0.4))
        .check(|p, env| env.emoji(p.str("emoji")?).map(|_| ()))
        .intensity(|p, s, env| {
            let shape = dims("overlay_emoji", s)?;
            let emoji = env.emoji(p.str("emoji")?)?;
            let size = scaled_dims(emoji.dims(), shape.1, p.f64("emoji_size")?);
            Ok(fraction(box_fraction(shape, position_param(p)?, size) * p.f64("opacity")?))
        }),
        ImageOp::new("overlay_image", |img, p, ctx| {
            let other = ctx.env.image(p.str("overlay")?)?;
            let (x, y) = position_param(p)?;
            overlay::overlay_image(img, &other, p.f64("opacity")?, p.f64("overlay_size")?, x, y).map(|(o, _)| o)
        })
        .param(ParamDecl::text("overlay", "background:gradient"))
        .param(ParamDecl::float("opacity", 0.0, 1.0, 1.0))
        .param(ParamDecl::positive("overlay_size", 10.0, 0.3))
        .param(ParamDecl::float("x_pos", -1.0, 1.0, 0.35))
        .param(ParamDecl::float("y_pos", -1.0, 1.0, 0.35))
        .check(|p, env| env.image(p.str("overlay")?).map(|_| ()))
        .intensity(|p, s, env| {
            let shape = dims("overlay_image", s)?;
            let other = env.image(p.str("overlay")?)?;
            let size = scaled_dims(other.dims(), shape.1, p.f64("overlay_size")?);
            Ok(fraction(box_fraction(shape, position_param(p)?, size) * p.f64("opacity")?))
        }),
        ImageOp::new("overlay_onto_background_image", |img, p, ctx| {
            let bg = ctx.env.image(p.str("background")?)?;
            let (x, y) = position_param(p)?;
            overlay::overlay_onto_background(img, &bg, p.f64("overlay_size")?, x, y, p.bool("scale_bg")?).map(|(o, _)| o)
        })
        .param(ParamDecl::text("background", "background:gradient"))
        .param(ParamDecl::positive("overlay_size", 10.0, 0.6))
        .param(ParamDecl::float("x_pos", -1.0, 1.0, 0.2))
        .param(ParamDecl::float("y_pos", -1.0, 1.0, 0.2))
        .param(ParamDecl::boolean("scale_bg", false))
        .check(|p, env| env.image(p.str("background")?).map(|_| ()))
        .intensity(|p, s, env| {
            let src = dims("overlay_onto_background_image", s)?;
            let canvas = if p.bool("scale_bg")? { src } else { env.image(p.str("background")?)?.dims() };
            let size = scaled_dims(src, canvas.1, p.f64("overlay_size")?);
            Ok(fraction(1.0 - box_fraction(canvas, position_param(p)?, size)))
        }),
        ImageOp::new("overlay_onto_screenshot", |img, p, ctx| {
            let t = ctx.env.assets.template(p.str("template")?)?;
            overlay::overlay_onto_screenshot(img, t).map(|(o, _)| o)
        })
        .param(ParamDecl::text("template", "mobile"))
        .check(|p, env| env.assets.template(p.str("template")?).map(|_| ()))
        .intensity(|p, s, env| {
            let src = dims("overlay_onto_screenshot", s)?;
            let t = env.assets.template(p.str("template")?)?;
            let fit = letterbox_fit(src, t.content);
            let total = t.image.width() as f64 * t.image.height() as f64;
            Ok(fraction(1.0 - fit.width as f64 * fit.height as f64 / total))
        }),
        ImageOp::new("overlay_stripes", |img, p, _| {
            overlay::overlay_stripes(
                img,
                p.f64("line_width")?,
                p.color("line_color")?,
                p.f64("line_angle")?,
                p.f64("line_density")?,
                p.f64("line_opacity")?,
            )
        })
        .param(ParamDecl::float("line_width", 0.0, 1.0, 0.05))
        .param(ParamDecl::color("line_color", [255, 255, 255]))
        .param(ParamDecl::float("line_angle", -360.0, 360.0, 0.0))
        .param(ParamDecl::float("line_density", 0.0, 1.0, 0.5))
        .param(ParamDecl::float("line_opacity", 0.0, 1.0, 1.0))
        .intensity(|p, _, _| {
            if p.f64("line_width")? == 0.0 {
                return Ok(0.0);
            }
            Ok(fraction(p.f64("line_density")? * p.f64("line_opacity")?))
        }),
        ImageOp::new("overlay_text", |img, p, ctx| {
            let (x, y) = position_param(p)?;
            overlay::overlay_text(
                img,
                &ctx.env.assets.font,
                p.str("text")?,
                p.f64("font_size")?,
                p.color("color")?,
                p.f64("opacity")?,
                x,
                y,
            )
            .map(|(o, _)| o)
        })
        .param(ParamDecl::text("text", "polyaug"))
        .param(ParamDecl::positive("font_size", 10.0, 0.1))
        .param(ParamDecl::color("color", [255, 0, 0]))
        .param(ParamDecl::float("opacity", 0.0, 1.0, 1.0))
        .param(ParamDecl::float("x_pos", -1.0, 1.0, 0.05))
        .param(ParamDecl::float("y_pos", -1.0, 1.0, 0.5))
        .intensity(|p, s, env| {
            let shape = dims("overlay_text", s)?;
            let scale = text_scale(shape.1, p.f64("font_size")?);
            let font = &env.assets.font;
            let size = (font.text_width(p.str("text")?, scale), font.line_height(scale));
            Ok(fraction(box_fraction(shape, position_param(p)?, size) * p.f64("opacity")?))
        }),
        ImageOp::new("pad", |img, p, _| geometry::pad(img, p.f64("w_factor")?, p.f64("h_factor")?, p.color("color")?))
            .param(ParamDecl::float("w_factor", 0.0, 10.0, 0.25))
            .param(ParamDecl::float("h_factor", 0.0, 10.0, 0.25))
            .param(ParamDecl::color("color", [0, 0, 0]))
            .intensity(|p, _, _| {
                let grown = (1.0 + 2.0 * p.f64("w_factor")?) * (1.0 + 2.0 * p.f64("h_factor")?);
                Ok(fraction(1.0 - 1.0 / grown))
            }),
        ImageOp::new("pad_square", |img, p, _| Ok(geometry::pad_square(img, p.color("color")?)))
            .param(ParamDecl::color("color", [0, 0, 0]))
            .intensity(|_, s, _| {
                let (w, h) = dims("pad_square", s)?;
                Ok(fraction(1.0 - w.min(h) as f64 / w.max(h) as f64))
            }),
        ImageOp::new("perspective_transform", |img, p, ctx| {
            perspective::perspective_transform(img, p.f64("sigma")?, p.color("fill")?, &mut ctx.rng)
        })
        .param(ParamDecl::float("sigma", 0.0, 1000.0, 50.0))
        .param(ParamDecl::color("fill", [0, 0, 0]))
        .intensity(|p, _, _| Ok(saturating(p.f64("sigma")?, 100.0))),
        ImageOp::new("pixelization", |img, p, _| color::pixelization(img, p.f64("ratio")?))
            .param(ParamDecl::positive("ratio", 1.0, 0.2))
            .intensity(|p, _, _| Ok(fraction(1.0 - p.f64("ratio")?))),
        ImageOp::new("random_noise", |img, p, ctx| color::random_noise(img, p.f64("mean")?, p.f64("variance")?, &ctx.rng))
            .param(ParamDecl::float("mean", -1.0, 1.0, 0.0))
            .param(ParamDecl::float("variance", 0.0, 1.0, 0.01))
            .intensity(|p, _, _| Ok(saturating(p.f64("variance")?.sqrt() + p.f64("mean")?.abs(), 0.5))),
        ImageOp::new("resize", |img, p, _| {
            let (w, h) = resize_target(p, img.dims())?;
            geometry::resize(img, w, h)
        })
        .param(ParamDecl::int("width", 1, 65_535, 1).optional())
        .param(ParamDecl::int("height", 1, 65_535, 1).optional())
        .intensity(|p, s, _| {
            let src = dims("resize", s)?;
            Ok(rescale_intensity(src, resize_target(p, src)?))
        }),
        ImageOp::new("rotate", |img, p, _| geometry::rotate(img, p.f64("degrees")?, p.color("fill")?))
            .param(ParamDecl::float("degrees", -3600.0, 3600.0, 15.0))
            .param(ParamDecl::color("fill", [255, 255, 255]))
            .intensity(|p, _, _| Ok(saturating(p.f64("degrees")?, 180.0))),
        ImageOp::new("saturation", |img, p, _| color::saturation(img, p.f64("factor")?))
            .param(ParamDecl::float("factor", 0.0, 10.0, 1.5))
            .intensity(|p, _, _| Ok(factor(p.f64("factor")?))),
        ImageOp::new("scale", |img, p, _| geometry::scale(img, p.f64("factor")?))
            .param(ParamDecl::positive("factor", 100.0, 0.5))
            .intensity(|p, _, _| Ok(log2_factor(p.f64("factor")?))),
        ImageOp::new("sharpen", |img, p, _| filter::sharpen(img, p.f64("factor")?))
            .param(ParamDecl::float("factor", 0.0, 100.0, 2.0))
            .intensity(|p, _, _| Ok(factor(p.f64("factor")?))),
        ImageOp::new("shuffle_pixels", |img, p, ctx| color::shuffle_pixels(img, p.f64("factor")?, &mut ctx.rng))
            .param(ParamDecl::float("factor", 0.0, 1.0, 0.1))
            .intensity(|p, _, _| Ok(fraction(p.f64("factor")?))),
        ImageOp::new("skew", |img, p, _| {
            geometry::skew(img, p.f64("skew_factor")?, u32_param(p, "axis")? as u8, p.color("fill")?)
        })
        .param(ParamDecl::float("skew_factor", -2.0, 2.0, 0.5))
        .param(ParamDecl::int("axis", 0, 1, 0))
        .param(ParamDecl::color("fill", [0, 0, 0]))
        .intensity(|p, _, _| Ok(saturating(p.f64("skew_factor")?, 1.0))),
        ImageOp::new("vflip", |img, _, _| Ok(geometry::vflip(img))),
    ]
}

/// Params that turn a catalog op into the identity, for ops that have one.
pub fn identity_params(name: &str) -> Option<Params> {
    let p = |v: serde_json::Value| -> Params { serde_json::from_value(v).expect("object literal") };
    Some(match name {
        "apply_filter_kernel" => p(json!({"kernel": "identity"})),
        "apply_lambda" => p(json!({"aug_function": "identity"})),
        "blur" => p(json!({"radius": 0.0})),
        "brightness" | "contrast" | "saturation" | "sharpen" => p(json!({"factor": 1.0})),
        "change_aspect_ratio" => p(json!({"ratio": 1.0})),
        "clip_image_size" => Params::new(),
        "color_jitter" => p(json!({"brightness_factor": 1.0, "contrast_factor": 1.0, "saturation_factor": 1.0})),
        "crop" => p(json!({"x1": 0.0, "y1": 0.0, "x2": 1.0, "y2": 1.0})),
        "opacity" => p(json!({"level": 1.0})),
        "pad" => p(json!({"w_factor": 0.0, "h_factor": 0.0})),
        "perspective_transform" => p(json!({"sigma": 0.0})),
        "pixelization" => p(json!({"ratio": 1.0})),
        "random_noise" => p(json!({"mean": 0.0, "variance": 0.0})),
        "resize" => Params::new(),
        "rotate" => p(json!({"degrees": 0.0})),
        "scale" => p(json!({"factor": 1.0})),
        "shuffle_pixels" => p(json!({"factor": 0.0})),
        "skew" => p(json!({"skew_factor": 0.0})),
        "overlay_stripes" => p(json!({"line_width": 0.0})),
        _ => return None,
    })
}
