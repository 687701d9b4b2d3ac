//! Bundled overlay assets: emoji sprites, screenshot templates, backgrounds,
//! masks and the glyph atlas.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use polyaug_core::{Error, Result};
use serde::{Deserialize, Serialize};

use crate::font::{BitmapFont, GLYPH_SIZE};
use crate::raster::{Channels, Raster};

/// Environment variable naming an asset directory that replaces the builtins.
pub const ASSET_DIR_ENV: &str = "POLYAUG_ASSET_DIR";
pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x: u32,
    pub y: u32,
    pub width: u32,
    pub height: u32,
}

impl Rect {
    pub fn new(x: u32, y: u32, width: u32, height: u32) -> Self {
        Self { x, y, width, height }
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x && y >= self.y && x < self.x + self.width && y < self.y + self.height
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    pub image: Raster,
    pub content: Rect,
}

impl Template {
    pub fn new(image: Raster, content: Rect) -> Result<Self> {
        let t = Self { image, content };
        t.check()?;
        Ok(t)
    }

    pub fn check(&self) -> Result<()> {
        let r = self.content;
        if r.width == 0 || r.height == 0 {
            return Err(Error::Asset(format!("template content rect {r:?} has zero area")));
        }
        if r.x + r.width > self.image.width() || r.y + r.height > self.image.height() {
            return Err(Error::Asset(format!(
                "template content rect {r:?} exceeds {}x{}",
                self.image.width(),
                self.image.height()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssetStore {
    pub emoji: BTreeMap<String, Raster>,
    pub templates: BTreeMap<String, Template>,
    pub backgrounds: BTreeMap<String, Raster>,
    pub masks: BTreeMap<String, Raster>,
    pub font: BitmapFont,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    emoji: BTreeMap<String, String>,
    templates: BTreeMap<String, TemplateEntry>,
    backgrounds: BTreeMap<String, String>,
    masks: BTreeMap<String, String>,
    font: FontEntry,
}

#[derive(Debug, Serialize, Deserialize)]
struct TemplateEntry {
    path: String,
    content_rect: Rect,
}

/// Glyph atlas: 16 columns of 8x8 cells starting at `first`, lit pixels
/// have luma above 127.
#[derive(Debug, Serialize, Deserialize)]
struct FontEntry {
    atlas: String,
    first: u32,
    count: u32,
    advance: u32,
}

const ATLAS_COLUMNS: u32 = 16;

impl Default for AssetStore {
    fn default() -> Self {
        Self::builtin()
    }
}

impl AssetStore {
    /// Procedurally generated assets identical to the ones shipped in the
    /// repository's `assets/` directory.
    pub fn builtin() -> Self {
        let emoji = [("smile", emoji_smile()), ("heart", emoji_heart()), ("star", emoji_star())];
        let templates = [
            ("mobile", mobile_template()),
            ("feed", feed_template()),
        ];
        let backgrounds = [("gradient", background_gradient()), ("checker", checker(256, 32, [40, 40, 40, 255], [220, 220, 220, 255]))];
        let masks = [
            ("circle", mask_circle()),
            ("left_half", Raster::from_fn(256, 256, Channels::Rgb, |x, _| if x < 128 { [255; 4] } else { [0, 0, 0, 255] })),
            ("checker", checker(256, 64, [255; 4], [0, 0, 0, 255])),
        ];
        Self {
            emoji: emoji.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            templates: templates.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            backgrounds: backgrounds.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            masks: masks.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            font: BitmapFont::default(),
        }
    }

    /// Loads from `$POLYAUG_ASSET_DIR` when set, else the builtins.
    pub fn from_env() -> Result<Arc<Self>> {
        match std::env::var_os(ASSET_DIR_ENV) {
            Some(dir) if !dir.is_empty() => Ok(Arc::new(Self::load(Path::new(&dir))?)),
            _ => Ok(Arc::new(Self::builtin())),
        }
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let text = fs::read_to_string(dir.join(MANIFEST))
            .map_err(|e| Error::Asset(format!("{}: {e}", dir.join(MANIFEST).display())))?;
        let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Asset(format!("manifest: {e}")))?;
        let read = |rel: &str| -> Result<Raster> {
            Raster::load(dir.join(rel)).map_err(|e| Error::Asset(format!("{rel}: {e}")))
        };
        let read_all = |m: &BTreeMap<String, String>| -> Result<BTreeMap<String, Raster>> {
            m.iter().map(|(k, p)| Ok((k.clone(), read(p)?))).collect()
        };
        let mut templates = BTreeMap::new();
        for (name, entry) in &manifest.templates {
            let t = Template::new(read(&entry.path)?.with_channels(Channels::Rgba), entry.content_rect)
                .map_err(|e| Error::Asset(format!("template {name}: {e}")))?;
            templates.insert(name.clone(), t);
        }
        let emoji = read_all(&manifest.emoji)?
            .into_iter()
            .map(|(k, v)| (k, v.with_channels(Channels::Rgba)))
            .collect();
        let atlas = read(&manifest.font.atlas)?;
        let font = font_from_atlas(&atlas, manifest.font.first, manifest.font.count, manifest.font.advance)?;
        Ok(Self {
            emoji,
            templates,
            backgrounds: read_all(&manifest.backgrounds)?,
            masks: read_all(&manifest.masks)?,
            font,
        })
    }

    /// Writes every asset as PNG plus a manifest into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        for sub in ["emoji", "templates", "backgrounds", "masks"] {
            fs::create_dir_all(dir.join(sub))?;
        }
        let write_group = |sub: &str, items: &BTreeMap<String, Raster>| -> Result<BTreeMap<String, String>> {
            let mut out = BTreeMap::new();
            for (name, img) in items {
                let rel = format!("{sub}/{name}.png");
                img.save(dir.join(&rel))?;
                out.insert(name.clone(), rel);
            }
            Ok(out)
        };
        let emoji = write_group("emoji", &self.emoji)?;
        let backgrounds = write_group("backgrounds", &self.backgrounds)?;
        let masks = write_group("masks", &self.masks)?;
        let mut templates = BTreeMap::new();
        for (name, t) in &self.templates {
            let rel = format!("templates/{name}.png");
            t.image.save(dir.join(&rel))?;
            templates.insert(name.clone(), TemplateEntry { path: rel, content_rect: t.content });
        }
        let (first, count) = (0x20, 0x5f);
        font_atlas(&self.font, first, count).save(dir.join("font.png"))?;
        let manifest = Manifest {
            emoji,
            templates,
            backgrounds,
            masks,
            font: FontEntry { atlas: "font.png".into(), first, count, advance: self.font.advance() },
        };
        fs::write(dir.join(MANIFEST), serde_json::to_string_pretty(&manifest)? + "\n")?;
        Ok(())
    }

    pub fn template(&self, name: &str) -> Result<&Template> {
        self.templates.get(name).ok_or_else(|| {
            Error::Asset(format!("unknown template {name:?} (have {:?})", self.templates.keys().collect::<Vec<_>>()))
        })
    }

    pub fn emoji(&self, name: &str) -> Result<&Raster> {
        lookup("emoji", &self.emoji, name)
    }

    /// Resolves `emoji:NAME`, `background:NAME`, `mask:NAME`,
    /// `template:NAME` or a file path to an image.
    pub fn image(&self, reference: &str) -> Result<Raster> {
        match reference.split_once(':') {
            Some(("emoji", n)) => lookup("emoji", &self.emoji, n).cloned(),
            Some(("background", n)) => lookup("background", &self.backgrounds, n).cloned(),
            Some(("mask", n)) => lookup("mask", &self.masks, n).cloned(),
            Some(("template", n)) => Ok(self.template(n)?.image.clone()),
            _ => {
                let path = PathBuf::from(reference);
                Raster::load(&path).map_err(|e| Error::Asset(format!("{reference}: {e}")))
            }
        }
    }
}

fn lookup<'a>(kind: &str, map: &'a BTreeMap<String, Raster>, name: &str) -> Result<&'a Raster> {
    map.get(name).ok_or_else(|| {
        Error::Asset(format!("unknown {kind} {name:?} (have {:?})", map.keys().collect::<Vec<_>>()))
    })
}

fn font_atlas(font: &BitmapFont, first: u32, count: u32) -> Raster {
    let rows = count.div_ceil(ATLAS_COLUMNS);
    let mut img = Raster::filled(ATLAS_COLUMNS * GLYPH_SIZE, rows * GLYPH_SIZE, Channels::Rgb, [0, 0, 0, 255]);
    for i in 0..count {
        let Some(c) = char::from_u32(first + i) else { continue };
        let g = font.glyph(c);
        let (cx, cy) = ((i % ATLAS_COLUMNS) * GLYPH_SIZE, (i / ATLAS_COLUMNS) * GLYPH_SIZE);
        for (y, bits) in g.iter().enumerate() {
            for x in 0..8 {
                if bits & (1 << x) != 0 {
                    img.set_pixel(cx + x, cy + y as u32, [255; 4]);
                }
            }
        }
    }
    img
}

fn font_from_atlas(atlas: &Raster, first: u32, count: u32, advance: u32) -> Result<BitmapFont> {
    let rows = count.div_ceil(ATLAS_COLUMNS);
    if atlas.width() < ATLAS_COLUMNS * GLYPH_SIZE || atlas.height() < rows * GLYPH_SIZE {
        return Err(Error::Asset("font atlas too small for its glyph count".into()));
    }
    let mut glyphs = BTreeMap::new();
    for i in 0..count {
        let c = char::from_u32(first + i).ok_or_else(|| Error::Asset("bad glyph code".into()))?;
        let (cx, cy) = ((i % ATLAS_COLUMNS) * GLYPH_SIZE, (i / ATLAS_COLUMNS) * GLYPH_SIZE);
        let mut g = [0u8; 8];
        for (y, bits) in g.iter_mut().enumerate() {
            for x in 0..8 {
                if crate::color::gray_value(&atlas.pixel(cx + x, cy + y as u32)) > 127 {
                    *bits |= 1 << x;
                }
            }
        }
        glyphs.insert(c, g);
    }
    BitmapFont::new(glyphs, advance)
}

fn checker(size: u32, cell: u32, a: [u8; 4], b: [u8; 4]) -> Raster {
    Raster::from_fn(size, size, Channels::Rgb, |x, y| if (x / cell + y / cell).is_multiple_of(2) { a } else { b })
}

fn background_gradient() -> Raster {
    Raster::from_fn(256, 256, Channels::Rgb, |x, y| [x as u8, y as u8, (255 - x / 2 - y / 2) as u8, 255])
}

fn mask_circle() -> Raster {
    Raster::from_fn(256, 256, Channels::Rgb, |x, y| {
        let (dx, dy) = (x as f64 + 0.5 - 128.0, y as f64 + 0.5 - 128.0);
        if dx * dx + dy * dy <= 100.0 * 100.0 {
            [255; 4]
        } else {
            [0, 0, 0, 255]
        }
    })
}

const SPRITE: u32 = 64;

/// Rasterizes a sprite from a per-pixel predicate over centered unit
/// coordinates in `[-1, 1]`.
fn sprite(f: impl Fn(f64, f64) -> Option<[u8; 4]>) -> Raster {
    Raster::from_fn(SPRITE, SPRITE, Channels::Rgba, |x, y| {
        let u = (x as f64 + 0.5) / SPRITE as f64 * 2.0 - 1.0;
        let v = (y as f64 + 0.5) / SPRITE as f64 * 2.0 - 1.0;
        f(u, v).unwrap_or([0, 0, 0, 0])
    })
}

fn emoji_smile() -> Raster {
    sprite(|u, v| {
        let r2 = u * u + v * v;
        if r2 > 0.95 * 0.95 {
            return None;
        }
        let eye = |cx: f64| (u - cx).powi(2) + (v + 0.3).powi(2) < 0.12 * 0.12;
        let mouth = v > 0.1 && (u * u + (v - 0.05).powi(2)).sqrt() > 0.45 && (u * u + (v - 0.05).powi(2)).sqrt() < 0.58;
        if r2 > 0.88 * 0.88 || eye(-0.33) || eye(0.33) || mouth {
            Some([60, 40, 0, 255])
        } else {
            Some([255, 204, 0, 255])
        }
    })
}

fn emoji_heart() -> Raster {
    sprite(|u, v| {
        let (x, y) = (u * 1.25, -v * 1.25 + 0.25);
        let f = (x * x + y * y - 1.0).powi(3) - x * x * y.powi(3);
        (f <= 0.0).then_some([220, 20, 60, 255])
    })
}

fn emoji_star() -> Raster {
    let pts: Vec<(f64, f64)> = (0..10)
        .map(|i| {
            let r = if i % 2 == 0 { 0.95 } else { 0.4 };
            let a = -std::f64::consts::FRAC_PI_2 + i as f64 * std::f64::consts::PI / 5.0;
            (r * a.cos(), r * a.sin())
        })
        .collect();
    sprite(move |u, v| point_in_polygon(&pts, u, v).then_some([255, 190, 30, 255]))
}

fn point_in_polygon(pts: &[(f64, f64)], x: f64, y: f64) -> bool {
    let mut inside = false;
    let mut j = pts.len() - 1;
    for i in 0..pts.len() {
        let (xi, yi) = pts[i];
        let (xj, yj) = pts[j];
        if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

fn fill_rect(img: &mut Raster, r: Rect, color: [u8; 4]) {
    for y in r.y..(r.y + r.height).min(img.height()) {
        for x in r.x..(r.x + r.width).min(img.width()) {
            img.set_pixel(x, y, color);
        }
    }
}

/// A phone-style feed post: status bar, header, square media slot, action
/// row and caption lines.
fn mobile_template() -> Template {
    let mut img = Raster::filled(400, 800, Channels::Rgba, [250, 250, 250, 255]);
    fill_rect(&mut img, Rect::new(0, 0, 400, 40), [30, 30, 30, 255]);
    fill_rect(&mut img, Rect::new(0, 40, 400, 60), [255, 255, 255, 255]);
    fill_rect(&mut img, Rect::new(20, 60, 40, 40), [180, 180, 200, 255]);
    fill_rect(&mut img, Rect::new(70, 70, 160, 10), [60, 60, 60, 255]);
    let content = Rect::new(20, 140, 360, 360);
    fill_rect(&mut img, content, [225, 225, 225, 255]);
    for i in 0..3 {
        fill_rect(&mut img, Rect::new(20 + i * 50, 520, 30, 30), [90, 90, 90, 255]);
    }
    for (i, w) in [340u32, 300, 220].iter().enumerate() {
        fill_rect(&mut img, Rect::new(20, 580 + i as u32 * 24, *w, 10), [150, 150, 150, 255]);
    }
    fill_rect(&mut img, Rect::new(0, 740, 400, 60), [240, 240, 240, 255]);
    Template::new(img, content).expect("builtin template is valid")
}

/// A desktop-style feed card with a landscape media slot.
fn feed_template() -> Template {
    let mut img = Raster::filled(600, 700, Channels::Rgba, [233, 235, 238, 255]);
    fill_rect(&mut img, Rect::new(0, 0, 600, 48), [59, 89, 152, 255]);
    fill_rect(&mut img, Rect::new(30, 64, 540, 600), [255, 255, 255, 255]);
    fill_rect(&mut img, Rect::new(50, 76, 32, 32), [190, 190, 190, 255]);
    fill_rect(&mut img, Rect::new(92, 84, 180, 10), [70, 70, 70, 255]);
    let content = Rect::new(50, 120, 500, 400);
    fill_rect(&mut img, content, [210, 210, 210, 255]);
    for (i, w) in [480u32, 400, 300].iter().enumerate() {
        fill_rect(&mut img, Rect::new(50, 540 + i as u32 * 22, *w, 10), [160, 160, 160, 255]);
    }
    Template::new(img, content).expect("builtin template is valid")
}
