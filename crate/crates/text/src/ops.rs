//! Text transforms. Each works on `&str` and draws randomness only from the
//! given stream, so results are reproducible per seed.

use std::collections::HashMap;

use polyaug_core::{Error, Result, Rng};

use crate::doc::{join, lookup_key, match_case, segments, split_core, Segment};
use crate::tables::{CharTable, FontTable, WordTable};

pub const ZERO_WIDTH: [char; 4] = ['\u{200B}', '\u{200C}', '\u{200D}', '\u{2060}'];
pub const RLO: char = '\u{202E}';
pub const PDF: char = '\u{202C}';

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Granularity {
    All,
    Word,
    Char,
}

impl Granularity {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Self::All),
            "word" => Ok(Self::Word),
            "char" => Ok(Self::Char),
            _ => Err(Error::invalid("granularity", format!("unknown granularity `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Typo {
    Substitution,
    Transposition,
    Deletion,
    Insertion,
}

impl Typo {
    pub const ALL: [Typo; 4] = [Typo::Substitution, Typo::Transposition, Typo::Deletion, Typo::Insertion];

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "substitution" => Ok(Self::Substitution),
            "transposition" => Ok(Self::Transposition),
            "deletion" => Ok(Self::Deletion),
            "insertion" => Ok(Self::Insertion),
            _ => Err(Error::invalid("simulate_typos", format!("unknown typo kind `{s}`"))),
        }
    }
}

fn keyboard_neighbour(kb: &CharTable, c: char, rng: &mut Rng) -> Option<char> {
    let lower = c.to_lowercase().next().unwrap_or(c);
    let alts = kb.get(lower)?;
    let n = rng.choose(alts)?.chars().next()?;
    Some(if c.is_uppercase() { n.to_uppercase().next().unwrap_or(n) } else { n })
}

fn typo(chars: &mut Vec<char>, kinds: &[Typo], kb: &CharTable, rng: &mut Rng) -> bool {
    let has_neighbour = |c: &char| kb.contains(c.to_lowercase().next().unwrap_or(*c));
    let feasible: Vec<Typo> = kinds
        .iter()
        .copied()
        .filter(|k| match k {
            Typo::Substitution => chars.iter().any(has_neighbour),
            Typo::Transposition | Typo::Deletion => chars.len() >= 2,
            Typo::Insertion => !chars.is_empty(),
        })
        .collect();
    let Some(&kind) = rng.choose(&feasible) else {
        return false;
    };
    match kind {
        Typo::Substitution => {
            let spots: Vec<usize> = (0..chars.len()).filter(|&i| has_neighbour(&chars[i])).collect();
            let i = spots[rng.index(spots.len())];
            if let Some(n) = keyboard_neighbour(kb, chars[i], rng) {
                chars[i] = n;
            }
        }
        Typo::Transposition => {
            let i = rng.index(chars.len() - 1);
            chars.swap(i, i + 1);
        }
        Typo::Deletion => {
            chars.remove(rng.index(chars.len()));
        }
        Typo::Insertion => {
            let i = rng.index(chars.len());
            let c = keyboard_neighbour(kb, chars[i], rng).unwrap_or(chars[i]);
            chars.insert(i + 1, c);
        }
    }
    true
}

/// One keyboard-style typo in each word selected with probability `p`.
/// Typos never add or remove whitespace.
pub fn simulate_typos(text: &str, p: f64, kinds: &[Typo], kb: &CharTable, rng: &mut Rng) -> String {
    let mut segs = segments(text);
    for seg in segs.iter_mut().filter(|s| s.is_word) {
        if !rng.bernoulli(p) {
            continue;
        }
        let mut chars: Vec<char> = seg.text.chars().collect();
        if typo(&mut chars, kinds, kb, rng) {
            seg.text = chars.into_iter().collect();
        }
    }
    join(&segs)
}

/// Inserts a character from `chars` into gaps between scalars. Gaps are
/// numbered from 1 inside each unit; only every `cadence`-th gap is eligible.
/// With `All` every eligible gap of the whole text is taken with probability
/// `p`; with `Word` each word is selected with probability `p` and then all
/// its eligible gaps are filled.
pub fn insert_chars(text: &str, granularity: Granularity, p: f64, cadence: usize, chars: &[char], rng: &mut Rng) -> Result<String> {
    if chars.is_empty() {
        return Err(Error::invalid("insert_chars", "empty character set"));
    }
    let cadence = cadence.max(1);
    let fill = |unit: &str, per_gap: f64, rng: &mut Rng| -> String {
        let mut out = String::with_capacity(unit.len() * 2);
        for (k, c) in unit.chars().enumerate() {
            if k > 0 && k % cadence == 0 && rng.bernoulli(per_gap) {
                out.push(chars[rng.index(chars.len())]);
            }
            out.push(c);
        }
        out
    };
    Ok(match granularity {
        Granularity::All | Granularity::Char => fill(text, p, rng),
        Granularity::Word => {
            let mut segs = segments(text);
            for seg in segs.iter_mut().filter(|s| s.is_word) {
                if rng.bernoulli(p) {
                    seg.text = fill(&seg.text, 1.0, rng);
                }
            }
            join(&segs)
        }
    })
}

/// Removes the zero-width characters `insert_chars` may add.
pub fn strip_zero_width(text: &str) -> String {
    text.chars().filter(|c| !ZERO_WIDTH.contains(c)).collect()
}

/// Stores the text reversed between a right-to-left override and a pop, so it
/// renders as the original in a bidi-aware viewer.
pub fn replace_bidirectional(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 6);
    out.push(RLO);
    out.extend(text.chars().rev());
    out.push(PDF);
    out
}

/// Replaces each character that has table entries with probability `p`.
pub fn replace_chars(text: &str, p: f64, table: &CharTable, rng: &mut Rng) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match table.get(c) {
            Some(alts) if rng.bernoulli(p) => out.push_str(&alts[rng.index(alts.len())]),
            _ => out.push(c),
        }
    }
    out
}

/// Styles letters and digits with one of the table's fonts. `style` None picks
/// a random font, per selected unit when `vary` is set.
pub fn replace_fun_fonts(
    text: &str,
    fonts: &FontTable,
    style: Option<usize>,
    granularity: Granularity,
    p: f64,
    vary: bool,
    rng: &mut Rng,
) -> String {
    let n = fonts.styles().len();
    let fixed = style.unwrap_or_else(|| rng.index(n));
    let pick = |rng: &mut Rng| if style.is_none() && vary { rng.index(n) } else { fixed };
    let render = |s: &str, k: usize| s.chars().map(|c| fonts.render(c, k)).collect::<String>();
    match granularity {
        Granularity::All => render(text, fixed),
        Granularity::Word => {
            let mut segs = segments(text);
            for seg in segs.iter_mut().filter(|s| s.is_word) {
                if rng.bernoulli(p) {
                    let k = pick(rng);
                    seg.text = render(&seg.text, k);
                }
            }
            join(&segs)
        }
        Granularity::Char => text
            .chars()
            .map(|c| if !c.is_whitespace() && rng.bernoulli(p) { fonts.render(c, pick(rng)) } else { c })
            .collect(),
    }
}

/// Rotates the text by half a turn: maps each character, then reverses order.
pub fn replace_upside_down(text: &str, table: &HashMap<char, char>) -> String {
    text.chars().rev().map(|c| *table.get(&c).unwrap_or(&c)).collect()
}

/// Removes the whitespace run between two words with probability `p` each.
pub fn merge_words(text: &str, p: f64, rng: &mut Rng) -> String {
    let mut segs = segments(text);
    for i in 1..segs.len().saturating_sub(1) {
        if !segs[i].is_word && rng.bernoulli(p) {
            segs[i].text.clear();
        }
    }
    join(&segs)
}

/// Splits each word of at least two scalars with probability `p` at a random
/// inner position.
pub fn split_words(text: &str, p: f64, rng: &mut Rng) -> String {
    let mut segs = segments(text);
    for seg in segs.iter_mut().filter(|s| s.is_word) {
        let chars: Vec<char> = seg.text.chars().collect();
        if chars.len() < 2 || !rng.bernoulli(p) {
            continue;
        }
        let at = 1 + rng.index(chars.len() - 1);
        let mut s: String = chars[..at].iter().collect();
        s.push(' ');
        s.extend(&chars[at..]);
        seg.text = s;
    }
    join(&segs)
}

/// Replaces word cores found in `table` with probability `p`, keeping
/// surrounding punctuation and the source's capitalisation.
pub fn replace_words(text: &str, table: &WordTable, p: f64, ignore_case: bool, rng: &mut Rng) -> String {
    let mut segs = segments(text);
    for seg in segs.iter_mut().filter(|s| s.is_word) {
        let (pre, core, post) = split_core(&seg.text);
        let key = if ignore_case { lookup_key(core) } else { core.to_string() };
        let Some(rep) = table.get(&key) else { continue };
        if !rng.bernoulli(p) {
            continue;
        }
        let rep = if ignore_case { match_case(core, rep) } else { rep.to_string() };
        seg.text = format!("{pre}{rep}{post}");
    }
    join(&segs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContractionMode {
    Contract,
    Expand,
}

/// Expands contractions, or contracts word sequences matching an expansion.
/// Each match is replaced with probability `p`.
pub fn contractions(text: &str, table: &WordTable, mode: ContractionMode, p: f64, rng: &mut Rng) -> String {
    match mode {
        ContractionMode::Expand => replace_words(text, table, p, true, rng),
        ContractionMode::Contract => contract(text, table, p, rng),
    }
}

fn contract(text: &str, table: &WordTable, p: f64, rng: &mut Rng) -> String {
    let mut rules: Vec<(Vec<String>, &str)> = table
        .iter()
        .map(|(short, long)| (long.split_whitespace().map(str::to_string).collect::<Vec<_>>(), short))
        .filter(|(words, _)| words.len() >= 2)
        .collect();
    // longest expansion first, then lexical for determinism
    rules.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)).then_with(|| a.1.cmp(b.1)));

    let mut segs: Vec<Segment> = segments(text);
    let words: Vec<usize> = (0..segs.len()).filter(|&i| segs[i].is_word).collect();
    let mut w = 0;
    while w < words.len() {
        let matched = rules.iter().find(|(exp, _)| {
            w + exp.len() <= words.len()
                && exp.iter().enumerate().all(|(k, e)| {
                    let (pre, core, post) = split_core(&segs[words[w + k]].text);
                    let inner_ok = (k == 0 || pre.is_empty()) && (k + 1 == exp.len() || post.is_empty());
                    inner_ok && lookup_key(core) == *e
                })
        });
        let Some((exp, short)) = matched else {
            w += 1;
            continue;
        };
        if !rng.bernoulli(p) {
            w += 1;
            continue;
        }
        let first = words[w];
        let last = words[w + exp.len() - 1];
        let (pre, core, _) = split_core(&segs[first].text);
        let (_, _, post) = split_core(&segs[last].text);
        let rep = format!("{pre}{}{post}", match_case(core, short));
        segs[first].text = rep;
        for seg in &mut segs[first + 1..=last] {
            seg.text.clear();
        }
        w += exp.len();
    }
    join(&segs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    Upper,
    Lower,
    Title,
    Random,
}

impl Case {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "upper" => Ok(Self::Upper),
            "lower" => Ok(Self::Lower),
            "title" => Ok(Self::Title),
            "random" => Ok(Self::Random),
            _ => Err(Error::invalid("change_case", format!("unknown case `{s}`"))),
        }
    }
}

fn title(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars.as_str().to_lowercase().chars()).collect(),
        None => String::new(),
    }
}

/// Changes the case of each word selected with probability `p`. `Random`
/// flips a coin per selected word between upper and lower case.
pub fn change_case(text: &str, case: Case, p: f64, rng: &mut Rng) -> String {
    let mut segs = segments(text);
    for seg in segs.iter_mut().filter(|s| s.is_word) {
        if !rng.bernoulli(p) {
            continue;
        }
        seg.text = match case {
            Case::Upper => seg.text.to_uppercase(),
            Case::Lower => seg.text.to_lowercase(),
            Case::Title => title(&seg.text),
            Case::Random => {
                if rng.bernoulli(0.5) {
                    seg.text.to_uppercase()
                } else {
                    seg.text.to_lowercase()
                }
            }
        };
    }
    join(&segs)
}

/// The text unchanged, modulo line-ending normalisation.
pub fn get_baseline(text: &str) -> String {
    text.replace("\r\n", "\n")
}
