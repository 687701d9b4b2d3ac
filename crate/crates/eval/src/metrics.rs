//! Predictions and top-k accuracy.

use std::collections::HashMap;

use crate::error::{EvalError, Result};

pub const TOP_K: usize = 5;

/// Ranked labels for one item, best first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prediction {
    pub item_id: String,
    pub ranked_labels: Vec<String>,
}

impl Prediction {
    /// Needs at least [`TOP_K`] distinct labels.
    pub fn new(item_id: impl Into<String>, ranked_labels: Vec<String>) -> Result<Self> {
        let item_id = item_id.into();
        if ranked_labels.len() < TOP_K {
            return Err(EvalError::Adapter(format!("`{item_id}`: {} labels, need at least {TOP_K}", ranked_labels.len())));
        }
        for (i, l) in ranked_labels.iter().enumerate() {
            if ranked_labels[..i].contains(l) {
                return Err(EvalError::Adapter(format!("`{item_id}`: label `{l}` repeated")));
            }
        }
        Ok(Self { item_id, ranked_labels })
    }

    /// Parses an adapter output line `item_id<TAB>label1,label2,...`.
    pub fn parse(line: &str) -> Result<Self> {
        let (id, labels) = line
            .split_once('\t')
            .ok_or_else(|| EvalError::Adapter(format!("malformed line `{line}`")))?;
        Self::new(id, labels.split(',').map(|l| l.trim().to_string()).collect())
    }

    pub fn hit(&self, label: &str) -> bool {
        self.ranked_labels.iter().take(TOP_K).any(|l| l == label)
    }
}

/// Fraction of predictions whose true label is among the first five.
pub fn top5_accuracy(preds: &[Prediction], truth: &HashMap<String, String>) -> Result<f64> {
    if preds.is_empty() {
        return Err(EvalError::Dataset("no predictions".into()));
    }
    let mut hits = 0usize;
    for p in preds {
        let label = truth
            .get(&p.item_id)
            .ok_or_else(|| EvalError::Dataset(format!("no ground truth for `{}`", p.item_id)))?;
        hits += p.hit(label) as usize;
    }
    Ok(hits as f64 / preds.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pred(id: &str, labels: &[u32]) -> Prediction {
        Prediction::new(id, labels.iter().map(u32::to_string).collect()).unwrap()
    }

    fn truth(pairs: &[(&str, u32)]) -> HashMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn worked_examples() {
        let t = truth(&[("a", 3), ("b", 7)]);
        assert_eq!(top5_accuracy(&[pred("a", &[1, 2, 3, 4, 5]), pred("b", &[9, 8, 7, 6, 5])], &t).unwrap(), 1.0);
        assert_eq!(top5_accuracy(&[pred("a", &[1, 2, 3, 4, 5])], &truth(&[("a", 0)])).unwrap(), 0.0);
        let t = truth(&[("a", 1), ("b", 1), ("c", 1), ("d", 1)]);
        let p = [pred("a", &[1, 2, 3, 4, 5]), pred("b", &[2, 1, 3, 4, 5]), pred("c", &[5, 4, 3, 2, 1]), pred("d", &[2, 3, 4, 5, 6])];
        assert_eq!(top5_accuracy(&p, &t).unwrap(), 0.75);
        assert!(top5_accuracy(&[pred("z", &[1, 2, 3, 4, 5])], &t).is_err());
    }

    #[test]
    fn sixth_label_does_not_count() {
        let p = pred("a", &[1, 2, 3, 4, 5, 6]);
        assert!(!p.hit("6"));
    }

    #[test]
    fn adapter_lines() {
        let p = Prediction::parse("img/1.png\tcat,dog,fox,owl,bee").unwrap();
        assert_eq!(p.item_id, "img/1.png");
        assert_eq!(p.ranked_labels[4], "bee");
        assert!(Prediction::parse("x\ta,b,c").is_err());
        assert!(Prediction::parse("x\ta,b,c,d,a").is_err());
        assert!(Prediction::parse("no tab").is_err());
    }
}
