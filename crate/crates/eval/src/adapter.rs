//! Classifier adapters.
//!
//! The subprocess contract: the program reads one file path per line on
//! standard input and prints one line per file, `path<TAB>label1,...,label5`,
//! echoing the path exactly as received. Order does not matter.

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use crate::error::{EvalError, Result};
use crate::metrics::Prediction;

pub trait Classifier {
    /// One prediction per file, keyed by the file's path string.
    fn classify(&mut self, files: &[PathBuf]) -> Result<Vec<Prediction>>;
}

impl<F> Classifier for F
where
    F: FnMut(&[PathBuf]) -> Result<Vec<Prediction>>,
{
    fn classify(&mut self, files: &[PathBuf]) -> Result<Vec<Prediction>> {
        self(files)
    }
}

/// Runs an external program once per batch of files.
#[derive(Debug, Clone)]
pub struct SubprocessClassifier {
    program: PathBuf,
    args: Vec<String>,
}

impl SubprocessClassifier {
    pub fn new(program: impl Into<PathBuf>, args: Vec<String>) -> Self {
        Self { program: program.into(), args }
    }

    /// Splits a command line on whitespace: program first, then arguments.
    pub fn from_command_line(cmd: &str) -> Result<Self> {
        let mut parts = cmd.split_whitespace().map(str::to_string);
        let program = parts.next().ok_or_else(|| EvalError::Adapter("empty adapter command".into()))?;
        Ok(Self::new(program, parts.collect()))
    }

    pub fn program(&self) -> &Path {
        &self.program
    }
}

impl Classifier for SubprocessClassifier {
    fn classify(&mut self, files: &[PathBuf]) -> Result<Vec<Prediction>> {
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| EvalError::Adapter(format!("cannot start `{}`: {e}", self.program.display())))?;
        let input: String = files.iter().map(|f| format!("{}\n", f.display())).collect();
        let mut stdin = child.stdin.take().expect("stdin is piped");
        // a failed write means the adapter exited early; its status says why
        let written = stdin.write_all(input.as_bytes());
        drop(stdin);
        let out = child
            .wait_with_output()
            .map_err(|e| EvalError::Adapter(format!("`{}`: {e}", self.program.display())))?;
        if !out.status.success() {
            let err = String::from_utf8_lossy(&out.stderr);
            return Err(EvalError::Adapter(format!("`{}` exited with {}: {}", self.program.display(), out.status, err.trim())));
        }
        written.map_err(|e| EvalError::Adapter(format!("writing to `{}`: {e}", self.program.display())))?;
        let text = String::from_utf8(out.stdout).map_err(|_| EvalError::Adapter("output is not UTF-8".into()))?;
        let preds = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(Prediction::parse)
            .collect::<Result<Vec<_>>>()?;
        check_coverage(files, preds)
    }
}

/// Predictions reordered to match `files`; every file must appear once.
pub fn check_coverage(files: &[PathBuf], preds: Vec<Prediction>) -> Result<Vec<Prediction>> {
    let mut by_id: HashMap<String, Prediction> = HashMap::with_capacity(preds.len());
    for p in preds {
        if let Some(dup) = by_id.insert(p.item_id.clone(), p) {
            return Err(EvalError::Adapter(format!("duplicate prediction for `{}`", dup.item_id)));
        }
    }
    let ordered = files
        .iter()
        .map(|f| {
            let key = f.display().to_string();
            by_id.remove(&key).ok_or_else(|| EvalError::Adapter(format!("no prediction for `{key}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(extra) = by_id.keys().next() {
        return Err(EvalError::Adapter(format!("prediction for unknown file `{extra}`")));
    }
    Ok(ordered)
}
