//! Lookup tables bundled with the crate, in a small TSV format: one row per
//! source, `source<TAB>alt1,alt2,...`, blank lines and `#` lines ignored.
//! Every table can be replaced by a file in the same format.

use std::collections::HashMap;
use std::path::Path;
use std::sync::OnceLock;

use polyaug_core::{Error, Result};

const KEYBOARD: &str = include_str!("../data/keyboard.tsv");
const HOMOGLYPHS: &str = include_str!("../data/homoglyphs.tsv");
const SIMILAR_CHARS: &str = include_str!("../data/similar_chars.tsv");
const FUN_FONTS: &str = include_str!("../data/fun_fonts.tsv");
const UPSIDE_DOWN: &str = include_str!("../data/upside_down.tsv");
const GENDERED: &str = include_str!("../data/gendered.tsv");
const CONTRACTIONS: &str = include_str!("../data/contractions.tsv");

fn rows(src: &str) -> impl Iterator<Item = (usize, &str, &str)> {
    src.lines().enumerate().filter_map(|(i, line)| {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            return None;
        }
        let (key, alts) = line.split_once('\t').unwrap_or((line, ""));
        Some((i + 1, key, alts))
    })
}

fn bad_row(line: usize, why: &str) -> Error {
    Error::Asset(format!("table line {line}: {why}"))
}

fn single_char(line: usize, s: &str) -> Result<char> {
    let mut it = s.chars();
    match (it.next(), it.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(bad_row(line, "source must be a single character")),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Asset(format!("{}: {e}", path.display())))
}

/// Character to replacement strings.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CharTable {
    map: HashMap<char, Vec<String>>,
}

impl CharTable {
    pub fn parse(src: &str) -> Result<Self> {
        let mut map = HashMap::new();
        for (line, key, alts) in rows(src) {
            let c = single_char(line, key)?;
            let alts: Vec<String> = alts.split(',').filter(|a| !a.is_empty()).map(str::to_string).collect();
            if alts.is_empty() {
                return Err(bad_row(line, "no replacements"));
            }
            if map.insert(c, alts).is_some() {
                return Err(bad_row(line, "duplicate source"));
            }
        }
        Ok(Self { map })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read(path)?)
    }

    pub fn get(&self, c: char) -> Option<&[String]> {
        self.map.get(&c).map(Vec::as_slice)
    }

    pub fn contains(&self, c: char) -> bool {
        self.map.contains_key(&c)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Word (lower case) to a single replacement.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WordTable {
    map: HashMap<String, String>,
}

impl WordTable {
    pub fn parse(src: &str) -> Result<Self> {
        let mut map = HashMap::new();
        for (line, key, alt) in rows(src) {
            if key.is_empty() || alt.is_empty() || alt.contains(',') {
                return Err(bad_row(line, "expected `word<TAB>replacement`"));
            }
            if map.insert(key.to_lowercase(), alt.to_string()).is_some() {
                return Err(bad_row(line, "duplicate source"));
            }
        }
        Ok(Self { map })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read(path)?)
    }

    pub fn from_pairs<K: Into<String>, V: Into<String>>(pairs: impl IntoIterator<Item = (K, V)>) -> Self {
        Self { map: pairs.into_iter().map(|(k, v)| (k.into(), v.into())).collect() }
    }

    pub fn get(&self, word: &str) -> Option<&str> {
        self.map.get(word).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.map.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Involutive character map built from unordered pairs.
pub fn parse_pairs(src: &str) -> Result<HashMap<char, char>> {
    let mut map = HashMap::new();
    for (line, a, b) in rows(src) {
        let (a, b) = (single_char(line, a)?, single_char(line, b)?);
        for (k, v) in [(a, b), (b, a)] {
            if map.insert(k, v).is_some_and(|old| old != v) {
                return Err(bad_row(line, "character already paired"));
            }
        }
    }
    Ok(map)
}

/// Styled alphabets: one column per style, named in a `# styles:` line.
#[derive(Debug, Clone, PartialEq)]
pub struct FontTable {
    styles: Vec<String>,
    map: HashMap<char, Vec<char>>,
}

impl FontTable {
    pub fn parse(src: &str) -> Result<Self> {
        let styles: Vec<String> = src
            .lines()
            .find_map(|l| l.strip_prefix("# styles:"))
            .ok_or_else(|| Error::Asset("font table lacks a `# styles:` line".into()))?
            .split(',')
            .map(|s| s.trim().to_string())
            .collect();
        let mut map = HashMap::new();
        for (line, key, alts) in rows(src) {
            let c = single_char(line, key)?;
            let alts = alts.split(',').map(|a| single_char(line, a)).collect::<Result<Vec<_>>>()?;
            if alts.len() != styles.len() {
                return Err(bad_row(line, "one replacement per style expected"));
            }
            map.insert(c, alts);
        }
        Ok(Self { styles, map })
    }

    pub fn styles(&self) -> &[String] {
        &self.styles
    }

    pub fn style_index(&self, name: &str) -> Option<usize> {
        self.styles.iter().position(|s| s == name)
    }

    /// Characters without a styled form pass through.
    pub fn render(&self, c: char, style: usize) -> char {
        self.map.get(&c).and_then(|alts| alts.get(style)).copied().unwrap_or(c)
    }
}

macro_rules! builtin {
    ($name:ident, $ty:ty, $parse:expr, $src:expr) => {
        pub fn $name() -> &'static $ty {
            static CELL: OnceLock<$ty> = OnceLock::new();
            CELL.get_or_init(|| $parse($src).expect(concat!("bundled table ", stringify!($name))))
        }
    };
}

builtin!(keyboard, CharTable, CharTable::parse, KEYBOARD);
builtin!(homoglyphs, CharTable, CharTable::parse, HOMOGLYPHS);
builtin!(similar_chars, CharTable, CharTable::parse, SIMILAR_CHARS);
builtin!(fun_fonts, FontTable, FontTable::parse, FUN_FONTS);
builtin!(upside_down, HashMap<char, char>, parse_pairs, UPSIDE_DOWN);
builtin!(gendered, WordTable, WordTable::parse, GENDERED);
builtin!(contractions, WordTable, WordTable::parse, CONTRACTIONS);
