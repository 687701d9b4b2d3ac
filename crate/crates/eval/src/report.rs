//! Evaluation reports and their CSV / JSON / gnuplot outputs.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// The four augmentation families used to group results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    Spatial,
    Color,
    Overlay,
    PixelLevel,
}

impl Category {
    pub const ALL: [Category; 4] = [Category::Spatial, Category::Color, Category::Overlay, Category::PixelLevel];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Spatial => "spatial",
            Category::Color => "color",
            Category::Overlay => "overlay",
            Category::PixelLevel => "pixel-level",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub name: String,
    /// `None` for the baseline row.
    pub category: Option<Category>,
    pub baseline_acc: f64,
    pub augmented_acc: Option<f64>,
    /// `augmented_acc - baseline_acc`.
    pub delta: Option<f64>,
    pub error: Option<String>,
}

impl Row {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub seed: u64,
    pub sample_size: usize,
    pub baseline_acc: f64,
    /// Ascending by delta; failed rows last.
    pub rows: Vec<Row>,
}

impl EvalReport {
    pub fn row(&self, name: &str) -> Option<&Row> {
        self.rows.iter().find(|r| r.name == name)
    }

    /// Mean delta per category over the rows that ran.
    pub fn category_means(&self) -> Vec<(Category, f64)> {
        Category::ALL
            .iter()
            .filter_map(|&c| {
                let d: Vec<f64> = self.rows.iter().filter(|r| r.category == Some(c)).filter_map(|r| r.delta).collect();
                (!d.is_empty()).then(|| (c, d.iter().sum::<f64>() / d.len() as f64))
            })
            .collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["augmentation", "category", "baseline_acc", "augmented_acc", "delta", "error"])?;
        let num = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                r.name.as_str(),
                r.category.map(Category::as_str).unwrap_or("baseline"),
                &r.baseline_acc.to_string(),
                &num(r.augmented_acc),
                &num(r.delta),
                r.error.as_deref().unwrap_or(""),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    /// Whitespace-separated `index name category delta`, one bar per row
    /// (plot with `using 1:4:xtic(2) with boxes`).
    pub fn write_dat(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "# index augmentation category delta")?;
        for (i, r) in self.rows.iter().filter(|r| !r.failed()).enumerate() {
            let cat = r.category.map(Category::as_str).unwrap_or("baseline");
            writeln!(f, "{i} {} {cat} {}", r.name.replace(char::is_whitespace, "_"), r.delta.unwrap_or(0.0))?;
        }
        Ok(())
    }
}

/// Sorts rows ascending by delta; failed rows keep their order at the end.
pub fn sort_rows(rows: &mut [Row]) {
    rows.sort_by(|a, b| match (a.delta, b.delta) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
}
