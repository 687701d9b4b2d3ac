//! Compositing: overlays onto the image and the image onto new canvases.

use polyaug_core::{Error, Result};

use crate::assets::{Rect, Template};
use crate::font::{blend_pixel, wrap, BitmapFont, GLYPH_SIZE};
use crate::geometry::{paste, resize};
use crate::raster::{Channels, Raster};

/// Source-over composite of `src` at `(x, y)` with its alpha scaled by
/// `opacity`. Returns the clipped destination rectangle that was touched.
pub fn composite(dst: &mut Raster, src: &Raster, x: i64, y: i64, opacity: f64) -> Option<Rect> {
    let bbox = clip_rect(dst, x, y, src.width(), src.height())?;
    let op = (opacity.clamp(0.0, 1.0) * 255.0).round() as u32;
    for dy in bbox.y..bbox.y + bbox.height {
        for dx in bbox.x..bbox.x + bbox.width {
            let mut p = src.pixel((dx as i64 - x) as u32, (dy as i64 - y) as u32);
            p[3] = ((p[3] as u32 * op + 127) / 255) as u8;
            if p[3] > 0 {
                blend_pixel(dst, dx, dy, p);
            }
        }
    }
    Some(bbox)
}

/// Intersection of a `w x h` box at `(x, y)` with the image, if non-empty.
pub fn clip_rect(img: &Raster, x: i64, y: i64, w: u32, h: u32) -> Option<Rect> {
    let x0 = x.max(0);
    let y0 = y.max(0);
    let x1 = (x + w as i64).min(img.width() as i64);
    let y1 = (y + h as i64).min(img.height() as i64);
    (x1 > x0 && y1 > y0).then(|| Rect::new(x0 as u32, y0 as u32, (x1 - x0) as u32, (y1 - y0) as u32))
}

/// Overlay dims when scaled to `size` times the base height, keeping aspect.
pub fn scaled_dims(overlay: (u32, u32), base_height: u32, size: f64) -> (u32, u32) {
    let h = ((size * base_height as f64).round() as u32).max(1);
    let w = ((overlay.0 as f64 * h as f64 / overlay.1 as f64).round() as u32).max(1);
    (w, h)
}

pub fn position(img: &Raster, x_pos: f64, y_pos: f64) -> (i64, i64) {
    ((x_pos * img.width() as f64).round() as i64, (y_pos * img.height() as f64).round() as i64)
}

/// Fraction of a `width x height` canvas covered by a box at the given
/// fractional position.
pub fn covered_fraction(width: u32, height: u32, x: i64, y: i64, w: u32, h: u32) -> f64 {
    let x1 = (x + w as i64).min(width as i64) - x.max(0);
    let y1 = (y + h as i64).min(height as i64) - y.max(0);
    if x1 <= 0 || y1 <= 0 {
        0.0
    } else {
        (x1 * y1) as f64 / (width as f64 * height as f64)
    }
}

/// Pastes `overlay` scaled to `size` of the image height at the fractional
/// position `(x_pos, y_pos)`.
pub fn overlay_image(img: &Raster, overlay: &Raster, opacity: f64, size: f64, x_pos: f64, y_pos: f64) -> Result<(Raster, Option<Rect>)> {
    if !(size > 0.0) {
        return Err(Error::invalid("overlay_image", "overlay size must be positive"));
    }
    let (w, h) = scaled_dims(overlay.dims(), img.height(), size);
    let scaled = resize(&overlay.with_channels(Channels::Rgba), w, h)?;
    let (x, y) = position(img, x_pos, y_pos);
    let mut out = img.clone();
    let bbox = composite(&mut out, &scaled, x, y, opacity);
    Ok((out, bbox))
}

/// Integer glyph scale for a font size given as a fraction of image height.
pub fn text_scale(height: u32, font_size: f64) -> u32 {
    ((font_size * height as f64 / GLYPH_SIZE as f64).round() as u32).max(1)
}

pub fn overlay_text(
    img: &Raster,
    font: &BitmapFont,
    text: &str,
    font_size: f64,
    color: [u8; 4],
    opacity: f64,
    x_pos: f64,
    y_pos: f64,
) -> Result<(Raster, Option<Rect>)> {
    let scale = text_scale(img.height(), font_size);
    let (x, y) = position(img, x_pos, y_pos);
    let mut out = img.clone();
    let mut c = color;
    c[3] = ((c[3] as f64) * opacity.clamp(0.0, 1.0)).round() as u8;
    if c[3] > 0 {
        font.draw(&mut out, text, x, y, scale, c);
    }
    let bbox = clip_rect(img, x, y, font.text_width(text, scale), font.line_height(scale));
    Ok((out, bbox))
}

/// Parallel stripes at `angle` degrees. Each stripe is
/// `line_width * min(w, h)` pixels wide and the period is width / density.
pub fn overlay_stripes(img: &Raster, line_width: f64, color: [u8; 4], angle: f64, density: f64, opacity: f64) -> Result<Raster> {
    if !(0.0..=1.0).contains(&line_width) || !(0.0..=1.0).contains(&density) {
        return Err(Error::invalid("overlay_stripes", "line_width and line_density must lie in [0, 1]"));
    }
    let stripe = line_width * img.width().min(img.height()) as f64;
    let mut out = img.clone();
    if stripe <= 0.0 || density <= 0.0 || opacity <= 0.0 {
        return Ok(out);
    }
    let period = stripe / density;
    let (s, c) = angle.to_radians().sin_cos();
    let mut col = color;
    col[3] = (col[3] as f64 * opacity.clamp(0.0, 1.0)).round() as u8;
    for y in 0..img.height() {
        for x in 0..img.width() {
            let t = -(x as f64 + 0.5) * s + (y as f64 + 0.5) * c;
            if t.rem_euclid(period) < stripe {
                blend_pixel(&mut out, x, y, col);
            }
        }
    }
    Ok(out)
}

/// Places the image, scaled to `size` of the background height, onto the
/// background. The background is first resized to the image dims when
/// `scale_bg` is set. Returns the placed rectangle too.
pub fn overlay_onto_background(img: &Raster, background: &Raster, size: f64, x_pos: f64, y_pos: f64, scale_bg: bool) -> Result<(Raster, Option<Rect>)> {
    if !(size > 0.0) {
        return Err(Error::invalid("overlay_onto_background_image", "overlay size must be positive"));
    }
    let bg = if scale_bg {
        resize(background, img.width(), img.height())?
    } else {
        background.clone()
    };
    let mut out = bg.with_channels(img.channels());
    let (w, h) = scaled_dims(img.dims(), out.height(), size);
    let scaled = resize(img, w, h)?;
    let (x, y) = position(&out, x_pos, y_pos);
    let bbox = clip_rect(&out, x, y, w, h);
    paste(&mut out, &scaled, x, y);
    Ok((out, bbox))
}

/// Largest aspect-preserving fit of `src` inside `bounds`, centered.
pub fn letterbox_fit(src: (u32, u32), bounds: Rect) -> Rect {
    let s = (bounds.width as f64 / src.0 as f64).min(bounds.height as f64 / src.1 as f64);
    let w = ((src.0 as f64 * s).round() as u32).clamp(1, bounds.width);
    let h = ((src.1 as f64 * s).round() as u32).clamp(1, bounds.height);
    Rect::new(bounds.x + (bounds.width - w) / 2, bounds.y + (bounds.height - h) / 2, w, h)
}

/// Renders the image into the template's content rect (black letterbox);
/// template pixels outside that rect are untouched.
pub fn overlay_onto_screenshot(img: &Raster, template: &Template) -> Result<(Raster, Rect)> {
    let mut out = template.image.with_channels(img.channels());
    let content = template.content;
    for y in content.y..content.y + content.height {
        for x in content.x..content.x + content.width {
            out.set_pixel(x, y, [0, 0, 0, 255]);
        }
    }
    let fit = letterbox_fit(img.dims(), content);
    let scaled = resize(img, fit.width, fit.height)?;
    paste(&mut out, &scaled, fit.x as i64, fit.y as i64);
    Ok((out, fit))
}

/// Adds a caption band of `caption_height` rows above the image and renders
/// `text` centered in it at the largest integer glyph scale that fits.
pub fn meme_format(img: &Raster, font: &BitmapFont, text: &str, caption_height: u32, bg: [u8; 4], text_color: [u8; 4]) -> Result<Raster> {
    if text.trim().is_empty() {
        return Err(Error::invalid("meme_format", "text must not be empty"));
    }
    if caption_height < GLYPH_SIZE {
        return Err(Error::failed(
            "meme_format",
            format!("caption_height {caption_height} cannot fit one {GLYPH_SIZE}px glyph row"),
        ));
    }
    if img.width() < font.advance() {
        return Err(Error::failed("meme_format", "image narrower than one glyph"));
    }
    let (w, h) = img.dims();
    let mut out = Raster::filled(w, h + caption_height, img.channels(), bg);
    paste(&mut out, img, 0, caption_height as i64);

    let margin = caption_height / 10;
    let usable_h = caption_height - 2 * margin.min((caption_height - GLYPH_SIZE) / 2);
    let mut chosen = None;
    for scale in (1..=usable_h / GLYPH_SIZE).rev() {
        let per_line = (w / (font.advance() * scale)) as usize;
        if per_line == 0 {
            continue;
        }
        let lines = wrap(text, per_line);
        if lines.len() as u32 * GLYPH_SIZE * scale <= usable_h {
            chosen = Some((scale, lines));
            break;
        }
    }
    // smallest scale, keeping as many lines as fit
    let (scale, lines) = chosen.unwrap_or_else(|| {
        let per_line = (w / font.advance()) as usize;
        let mut lines = wrap(text, per_line);
        lines.truncate((usable_h / GLYPH_SIZE) as usize);
        (1, lines)
    });
    let block_h = lines.len() as u32 * GLYPH_SIZE * scale;
    let top = (caption_height - block_h) / 2;
    let mut color = text_color;
    color[3] = 255;
    for (i, line) in lines.iter().enumerate() {
        let lw = font.text_width(line, scale);
        let x = (w.saturating_sub(lw) / 2) as i64;
        let y = (top + i as u32 * GLYPH_SIZE * scale) as i64;
        font.draw(&mut out, line, x, y, scale, color);
    }
    Ok(out)
}
