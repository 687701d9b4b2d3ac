//! Bitmap text rendering without anti-aliasing.

use std::collections::BTreeMap;

use polyaug_core::{Error, Result};

use crate::raster::Raster;

pub const GLYPH_SIZE: u32 = 8;

/// 8x8 monochrome glyphs; bit `x` of row `y` is the pixel at `(x, y)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitmapFont {
    glyphs: BTreeMap<char, [u8; 8]>,
    advance: u32,
}

impl Default for BitmapFont {
    fn default() -> Self {
        let glyphs = (0x20u8..0x7f)
            .map(|b| (b as char, font8x8::legacy::BASIC_LEGACY[b as usize]))
            .collect();
        Self { glyphs, advance: GLYPH_SIZE }
    }
}

impl BitmapFont {
    pub fn new(glyphs: BTreeMap<char, [u8; 8]>, advance: u32) -> Result<Self> {
        let font = Self { glyphs, advance };
        font.check()?;
        Ok(font)
    }

    /// Every printable ASCII character must have a glyph.
    pub fn check(&self) -> Result<()> {
        if self.advance == 0 {
            return Err(Error::Asset("font advance must be positive".into()));
        }
        match (0x20u8..0x7f).map(char::from).find(|c| !self.glyphs.contains_key(c)) {
            Some(c) => Err(Error::Asset(format!("font lacks glyph for {c:?}"))),
            None => Ok(()),
        }
    }

    pub fn advance(&self) -> u32 {
        self.advance
    }

    pub fn glyphs(&self) -> &BTreeMap<char, [u8; 8]> {
        &self.glyphs
    }

    /// Unknown characters render as `?`.
    pub fn glyph(&self, c: char) -> [u8; 8] {
        self.glyphs.get(&c).or_else(|| self.glyphs.get(&'?')).copied().unwrap_or([0; 8])
    }

    pub fn text_width(&self, text: &str, scale: u32) -> u32 {
        text.chars().count() as u32 * self.advance * scale
    }

    pub fn line_height(&self, scale: u32) -> u32 {
        GLYPH_SIZE * scale
    }

    /// Draws `text` with its top-left at `(x, y)`, blending `color` by its
    /// alpha. Pixels outside the image are skipped. Returns the number of
    /// pixels touched.
    pub fn draw(&self, img: &mut Raster, text: &str, x: i64, y: i64, scale: u32, color: [u8; 4]) -> usize {
        let scale = scale.max(1) as i64;
        let mut touched = 0;
        for (i, c) in text.chars().enumerate() {
            let g = self.glyph(c);
            let gx = x + i as i64 * self.advance as i64 * scale;
            for (row, bits) in g.iter().enumerate() {
                for col in 0..8 {
                    if bits & (1 << col) == 0 {
                        continue;
                    }
                    for dy in 0..scale {
                        for dx in 0..scale {
                            let px = gx + col as i64 * scale + dx;
                            let py = y + row as i64 * scale + dy;
                            if px >= 0 && py >= 0 && (px as u32) < img.width() && (py as u32) < img.height() {
                                blend_pixel(img, px as u32, py as u32, color);
                                touched += 1;
                            }
                        }
                    }
                }
            }
        }
        touched
    }
}

/// Source-over blend of `color` (straight alpha) onto one pixel.
pub fn blend_pixel(img: &mut Raster, x: u32, y: u32, color: [u8; 4]) {
    let a = color[3] as u32;
    if a == 255 {
        let mut p = color;
        if img.channels().has_alpha() {
            p[3] = 255;
        }
        img.set_pixel(x, y, p);
        return;
    }
    let mut p = img.pixel(x, y);
    for c in 0..3 {
        p[c] = ((color[c] as u32 * a + p[c] as u32 * (255 - a) + 127) / 255) as u8;
    }
    p[3] = (a + p[3] as u32 * (255 - a) / 255).min(255) as u8;
    img.set_pixel(x, y, p);
}

/// Greedy word wrap to at most `max_chars` per line; longer words are split.
pub fn wrap(text: &str, max_chars: usize) -> Vec<String> {
    let max_chars = max_chars.max(1);
    let mut lines = Vec::new();
    let mut line = String::new();
    for word in text.split_whitespace() {
        let mut word: Vec<char> = word.chars().collect();
        while word.len() > max_chars {
            if !line.is_empty() {
                lines.push(std::mem::take(&mut line));
            }
            lines.push(word.drain(..max_chars).collect());
        }
        let word: String = word.into_iter().collect();
        if word.is_empty() {
            continue;
        }
        let needed = if line.is_empty() { word.chars().count() } else { line.chars().count() + 1 + word.chars().count() };
        if needed > max_chars {
            lines.push(std::mem::take(&mut line));
        }
        if !line.is_empty() {
            line.push(' ');
        }
        line.push_str(&word);
    }
    if !line.is_empty() {
        lines.push(line);
    }
    lines
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::Channels;

    #[test]
    fn default_font_covers_ascii() {
        let f = BitmapFont::default();
        f.check().unwrap();
        assert_eq!(f.text_width("abc", 2), 48);
        let mut partial = f.glyphs().clone();
        partial.remove(&'A');
        assert!(BitmapFont::new(partial, 8).is_err());
    }

    #[test]
    fn drawing_uses_only_text_color() {
        let mut img = Raster::filled(40, 10, Channels::Rgb, [0, 0, 0, 255]);
        let n = BitmapFont::default().draw(&mut img, "Hi!", 1, 1, 1, [255, 0, 0, 255]);
        assert!(n > 0);
        let red = img.data().chunks(3).filter(|p| *p == [255, 0, 0]).count();
        assert_eq!(red, n);
        assert!(img.data().chunks(3).all(|p| p == [255, 0, 0] || p == [0, 0, 0]));
    }

    #[test]
    fn wrapping() {
        assert_eq!(wrap("the quick brown fox", 10), vec!["the quick", "brown fox"]);
        assert_eq!(wrap("abcdefghij", 4), vec!["abcd", "efgh", "ij"]);
        assert!(wrap("   ", 4).is_empty());
    }
}
