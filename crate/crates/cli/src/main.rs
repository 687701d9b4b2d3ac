use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use polyaug::bench::{self, Preset};
use polyaug::evaluate::{self, EvalOptions};
use polyaug::{apply, Envs, Kind, Result};

#[derive(Parser)]
#[command(name = "polyaug", version, about = "Augment images, audio, text and video")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply a pipeline config to files, clip directories or folders.
    Apply {
        /// Pipeline JSON.
        #[arg(short, long)]
        config: PathBuf,
        /// Output directory; outputs keep their input file names.
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write per-input transform metadata as JSON.
        #[arg(long)]
        metadata: Option<PathBuf>,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Measure classifier top-5 accuracy under augmentation.
    Eval {
        /// TSV of `path<TAB>label`.
        #[arg(long)]
        manifest: PathBuf,
        /// Classifier adapter command line.
        #[arg(long)]
        adapter: String,
        /// Augmentation set JSON (defaults to the built-in preset).
        #[arg(long)]
        augset: Option<PathBuf>,
        /// Items sampled from the manifest.
        #[arg(short = 'n', default_value_t = polyaug_eval::DEFAULT_SAMPLE_SIZE)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for report.csv, report.json and report.dat.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Time every transform of a modality.
    Bench {
        #[arg(value_enum)]
        modality: Option<Kind>,
        #[arg(long, default_value_t = 10)]
        iterations: usize,
        #[arg(long, value_enum, default_value_t = Preset::Standard)]
        preset: Preset,
        /// Also write the rows as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<()> {
    let envs = Envs::from_env()?;
    match cli.command {
        Command::Apply { config, output, seed, metadata, inputs } => {
            let config = apply::Config::load(&config)?;
            let results = apply::apply_files(&config, &inputs, &output, seed, &envs)?;
            if let Some(path) = metadata {
                apply::write_metadata(&results, &path)?;
            }
            eprintln!("wrote {} output(s) to {}", results.len(), output.display());
        }
        Command::Eval { manifest, adapter, augset, n, seed, output } => {
            let report = evaluate::run(&EvalOptions { manifest, adapter, augset, n, seed, out_dir: output }, &envs)?;
            println!("{:<28} {:<12} {:>9} {:>9}", "augmentation", "category", "acc", "delta");
            for r in &report.rows {
                let cat = r.category.map(|c| c.as_str()).unwrap_or("baseline");
                match (r.augmented_acc, r.delta) {
                    (Some(a), Some(d)) => println!("{:<28} {:<12} {:>9.4} {:>+9.4}", r.name, cat, a, d),
                    _ => println!("{:<28} {:<12} failed: {}", r.name, cat, r.error.as_deref().unwrap_or("")),
                }
            }
        }
        Command::Bench { modality, iterations, preset, csv } => {
            let kinds = modality.map(|k| vec![k]).unwrap_or_else(|| Kind::ALL.to_vec());
            let mut rows = Vec::new();
            for k in kinds {
                rows.extend(bench::run(k, iterations, preset, &envs)?);
            }
            print!("{}", bench::format_table(&rows));
            if let Some(path) = csv {
                bench::write_csv(&rows, std::fs::File::create(&path)?)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("polyaug: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
