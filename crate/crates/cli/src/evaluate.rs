//! `polyaug eval`: sample a labelled dataset, run the augmentation set
//! through a classifier adapter and write the report.

use std::path::{Path, PathBuf};

use polyaug_core::Rng;
use polyaug_eval::{default_augset, load_manifest, parse_augset, run_eval, sample_dataset, EvalReport, SubprocessClassifier};

use crate::error::{CliError, Result};
use crate::modality::Envs;

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub manifest: PathBuf,
    /// Program and arguments, split on whitespace.
    pub adapter: String,
    /// JSON augmentation set; the built-in preset when absent.
    pub augset: Option<PathBuf>,
    pub n: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
}

/// Looks the program up the way a shell would, so a typo fails up front.
fn find_program(program: &Path) -> Option<PathBuf> {
    if program.components().count() > 1 {
        return program.is_file().then(|| program.to_path_buf());
    }
    std::env::var_os("PATH")
        .into_iter()
        .flat_map(|p| std::env::split_paths(&p).collect::<Vec<_>>())
        .map(|d| d.join(program))
        .find(|c| c.is_file())
}

pub fn run(opts: &EvalOptions, envs: &Envs) -> Result<EvalReport> {
    let mut adapter = SubprocessClassifier::from_command_line(&opts.adapter)?;
    if find_program(adapter.program()).is_none() {
        return Err(CliError::Adapter(format!("adapter program `{}` not found", adapter.program().display())));
    }
    let augs = match &opts.augset {
        Some(p) => parse_augset(&std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?)?,
        None => default_augset(),
    };
    let items = load_manifest(&opts.manifest)?;
    let sample = sample_dataset(&items, opts.n, &mut Rng::new(opts.seed))?;
    std::fs::create_dir_all(&opts.out_dir)?;
    let work = tempfile::tempdir()?;
    let report = run_eval(&sample, &augs, &mut adapter, opts.seed, &envs.image, work.path())?;
    report.write_csv(&opts.out_dir.join("report.csv"))?;
    report.write_json(&opts.out_dir.join("report.json"))?;
    report.write_dat(&opts.out_dir.join("report.dat"))?;
    Ok(report)
}
