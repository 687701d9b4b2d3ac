//! Labelled item manifests and seeded sampling.

use std::path::{Path, PathBuf};

use polyaug_core::Rng;

use crate::error::{EvalError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Item {
    pub id: String,
    pub path: PathBuf,
    pub label: String,
}

/// Parses `path<TAB>label` lines; relative paths resolve against `base`.
/// Blank lines and `#` comments are skipped. The id is the path as written.
pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<Item>> {
    let mut items = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (path, label) = line
            .split_once('\t')
            .ok_or_else(|| EvalError::Dataset(format!("line {}: expected `path<TAB>label`", n + 1)))?;
        let (path, label) = (path.trim(), label.trim());
        if path.is_empty() || label.is_empty() {
            return Err(EvalError::Dataset(format!("line {}: empty path or label", n + 1)));
        }
        items.push(Item { id: path.to_string(), path: base.join(path), label: label.to_string() });
    }
    let mut ids: Vec<&str> = items.iter().map(|i| i.id.as_str()).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(EvalError::Dataset(format!("duplicate item `{}`", w[0])));
    }
    Ok(items)
}

pub fn load_manifest(path: &Path) -> Result<Vec<Item>> {
    let text = std::fs::read_to_string(path)?;
    parse_manifest(&text, path.parent().unwrap_or(Path::new(".")))
}

/// `n` items drawn uniformly without replacement, in draw order.
pub fn sample_dataset(items: &[Item], n: usize, rng: &mut Rng) -> Result<Vec<Item>> {
    if n == 0 {
        return Err(EvalError::Dataset("sample size must be positive".into()));
    }
    if n > items.len() {
        return Err(EvalError::Dataset(format!("asked for {n} items but the dataset has {}", items.len())));
    }
    let mut idx: Vec<usize> = (0..items.len()).collect();
    for i in 0..n {
        let j = i + rng.index(items.len() - i);
        idx.swap(i, j);
    }
    Ok(idx[..n].iter().map(|&i| items[i].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn items(n: usize) -> Vec<Item> {
        (0..n).map(|i| Item { id: format!("{i}"), path: format!("{i}.png").into(), label: "x".into() }).collect()
    }

    #[test]
    fn manifest_parsing() {
        let m = parse_manifest("# header\na.png\tcat\n\nsub/b.png\tdog\n", Path::new("/data")).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m[1].path, Path::new("/data/sub/b.png"));
        assert_eq!(m[1].label, "dog");
        assert!(parse_manifest("a.png cat\n", Path::new(".")).is_err());
        assert!(parse_manifest("a\tx\na\ty\n", Path::new(".")).is_err());
    }

    #[test]
    fn sampling() {
        let all = items(10);
        let whole = sample_dataset(&all, 10, &mut Rng::new(1)).unwrap();
        let mut ids: Vec<_> = whole.iter().map(|i| i.id.parse::<usize>().unwrap()).collect();
        assert_ne!(ids, (0..10).collect::<Vec<_>>());
        ids.sort();
        assert_eq!(ids, (0..10).collect::<Vec<_>>());
        assert_eq!(sample_dataset(&all, 4, &mut Rng::new(3)).unwrap(), sample_dataset(&all, 4, &mut Rng::new(3)).unwrap());
        assert!(sample_dataset(&all, 0, &mut Rng::new(0)).is_err());
        assert!(sample_dataset(&all, 11, &mut Rng::new(0)).is_err());
    }
}
