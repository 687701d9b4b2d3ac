use std::fmt;

/// A Unicode text document. Words are maximal runs of non-whitespace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct TextDoc(pub String);

impl TextDoc {
    pub fn new(text: impl Into<String>) -> Self {
        TextDoc(text.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }

    pub fn char_count(&self) -> usize {
        self.0.chars().count()
    }

    pub fn word_count(&self) -> usize {
        self.0.split_whitespace().count()
    }
}

impl From<&str> for TextDoc {
    fn from(s: &str) -> Self {
        TextDoc(s.to_string())
    }
}

impl From<String> for TextDoc {
    fn from(s: String) -> Self {
        TextDoc(s)
    }
}

impl fmt::Display for TextDoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A run of either whitespace or non-whitespace scalars.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub text: String,
    pub is_word: bool,
}

/// Splits text into alternating whitespace and word runs; concatenating the
/// segments gives the input back.
pub fn segments(text: &str) -> Vec<Segment> {
    let mut out: Vec<Segment> = Vec::new();
    for c in text.chars() {
        let is_word = !c.is_whitespace();
        match out.last_mut() {
            Some(seg) if seg.is_word == is_word => seg.text.push(c),
            _ => out.push(Segment { text: c.to_string(), is_word }),
        }
    }
    out
}

pub fn join(segs: &[Segment]) -> String {
    segs.iter().map(|s| s.text.as_str()).collect()
}

/// Splits a word into leading punctuation, core and trailing punctuation.
/// The core keeps letters, digits, apostrophes and inner punctuation.
pub fn split_core(word: &str) -> (&str, &str, &str) {
    let is_core = |c: char| c.is_alphanumeric() || c == '\'' || c == '\u{2019}';
    let start = word.find(is_core).unwrap_or(word.len());
    let end = word.rfind(is_core).map(|i| i + word[i..].chars().next().map_or(0, char::len_utf8)).unwrap_or(start);
    let end = end.max(start);
    (&word[..start], &word[start..end], &word[end..])
}

/// Lower-cases and normalizes typographic apostrophes for table lookups.
pub fn lookup_key(core: &str) -> String {
    core.chars().map(|c| if c == '\u{2019}' { '\'' } else { c }).collect::<String>().to_lowercase()
}

/// Gives `replacement` the case of `template`: all caps when the template is
/// all caps with at least two letters, otherwise the case of the first scalar.
pub fn match_case(template: &str, replacement: &str) -> String {
    let letters: Vec<char> = template.chars().filter(|c| c.is_alphabetic()).collect();
    if letters.len() >= 2 && letters.iter().all(|c| c.is_uppercase()) {
        return replacement.to_uppercase();
    }
    match template.chars().next() {
        Some(first) if first.is_uppercase() => {
            let mut chars = replacement.chars();
            match chars.next() {
                Some(r) => r.to_uppercase().chain(chars).collect(),
                None => String::new(),
            }
        }
        _ => replacement.to_string(),
    }
}
