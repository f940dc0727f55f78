//! Command-line front end: `generate`, `evaluate`, `sweep-snr`, `sweep-size`
//! and `inspect`.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Result;
use crate::experiment::{run_size_sweep, run_snr_sweep, ExperimentConfig};
use crate::io::{read_dataset, write_dataset, write_results, ResultsFile, SweepKind};
use crate::learning::{evaluate_model, label_dataset, split_dataset, KnnModel};
use crate::system::SystemConfig;

#[derive(Debug, Parser)]
#[command(
    name = "beamlearn",
    version,
    about = "Learned beam allocation for fixed-beam multiuser MIMO"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample layouts, label them with the exhaustive oracle and write a dataset.
    Generate {
        #[command(flatten)]
        system: SystemArgs,
        /// Number of layouts to label.
        #[arg(long)]
        count: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Split a dataset, build a k-NN model and report achieved sum rates.
    Evaluate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 0.8)]
        train_fraction: f64,
        /// Seed of the train/test shuffle.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Evaluate on the training split instead of the test split.
        #[arg(long)]
        eval_on_train: bool,
    },
    /// Average sum rate versus transmit SNR.
    SweepSnr(SweepArgs),
    /// Average sum rate versus training-set size.
    SweepSize(SweepArgs),
    /// Print dataset statistics and the class histogram.
    Inspect {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Debug, Args)]
struct SystemArgs {
    #[arg(long, default_value_t = 8)]
    n_beams: usize,
    #[arg(long, default_value_t = 3)]
    n_users: usize,
    #[arg(long, default_value_t = SystemConfig::DEFAULT_SNR_DB, allow_negative_numbers = true)]
    snr_db: f64,
    /// Path-loss exponent.
    #[arg(long, default_value_t = SystemConfig::DEFAULT_PATH_LOSS_EXPONENT)]
    alpha: f64,
    #[arg(long, default_value_t = SystemConfig::DEFAULT_MIN_RADIUS)]
    min_radius: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SystemArgs {
    fn config(&self) -> Result<SystemConfig> {
        SystemConfig::from_parts(
            self.n_beams,
            self.n_users,
            self.snr_db,
            self.alpha,
            self.min_radius,
            self.seed,
        )
    }
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Comma-separated SNR grid in dB.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0,5,10,15,20",
        allow_negative_numbers = true
    )]
    snr_grid: Vec<f64>,
    /// Comma-separated, strictly increasing training-set sizes.
    #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 2000)]
    n_test: usize,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 0.8)]
    train_fraction: f64,
    #[arg(long)]
    out: PathBuf,
}

impl SweepArgs {
    fn experiment(&self) -> Result<ExperimentConfig> {
        let cfg = ExperimentConfig {
            base: self.system.config()?,
            snr_grid_db: self.snr_grid.clone(),
            training_sizes: self.sizes.clone(),
            n_test: self.n_test,
            k: self.k,
            train_fraction: self.train_fraction,
            output_path: self.out.clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses `argv` (program name first) and runs the command. Returns the
/// process exit status: 0 on success, 1 on a runtime error, 2 on a usage error.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                2
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    match execute(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    // stdout failures are not worth a distinct error path
    match command {
        Command::Generate {
            system,
            count,
            out: path,
        } => {
            let config = system.config()?;
            let ds = label_dataset(&config, count)?;
            write_dataset(&ds, &path)?;
            let _ = writeln!(out, "wrote {} examples to {}", ds.len(), path.display());
        }
        Command::Evaluate {
            input,
            k,
            train_fraction,
            seed,
            eval_on_train,
        } => {
            let mut ds = read_dataset(&input)?;
            let removed = ds.preprocess();
            let (train, test) = split_dataset(&ds, train_fraction, seed)?;
            let config = ds.config().clone();
            let model = KnnModel::new(train, k)?;
            let test = if eval_on_train {
                model.training().clone()
            } else {
                test
            };
            let r = evaluate_model(&model, &test, &config)?;
            let _ = writeln!(out, "removed_in_preprocessing {removed}");
            let _ = writeln!(out, "n_train {}", model.training().len());
            let _ = writeln!(out, "n_test {}", r.n_test);
            let _ = writeln!(out, "k {k}");
            let _ = writeln!(out, "mean_model_sum_rate {:.6}", r.mean_model_sum_rate);
            let _ = writeln!(out, "mean_oracle_sum_rate {:.6}", r.mean_oracle_sum_rate);
            let _ = writeln!(
                out,
                "mean_baseline_sum_rate {:.6}",
                r.mean_baseline_sum_rate
            );
            let _ = writeln!(out, "rate_ratio {:.6}", r.rate_ratio);
            let _ = writeln!(out, "class_accuracy {:.6}", r.class_accuracy);
            let _ = writeln!(out, "distinct_classes {}", r.distinct_classes);
        }
        Command::SweepSnr(args) => {
            let config = args.experiment()?;
            let rows = run_snr_sweep(&config)?;
            finish_sweep(SweepKind::Snr, config, rows, out)?;
        }
        Command::SweepSize(args) => {
            let config = args.experiment()?;
            let rows = run_size_sweep(&config)?;
            finish_sweep(SweepKind::Size, config, rows, out)?;
        }
        Command::Inspect { input } => {
            let ds = read_dataset(&input)?;
            let c = ds.config();
            let hist = ds.class_histogram();
            let _ = writeln!(out, "n_beams {}", c.n_beams());
            let _ = writeln!(out, "n_users {}", c.n_users());
            let _ = writeln!(out, "snr_db {}", c.snr_db());
            let _ = writeln!(out, "n_examples {}", ds.len());
            let _ = writeln!(out, "distinct_classes {}", hist.len());
            let _ = writeln!(out, "class count");
            for (label, count) in hist {
                let _ = writeln!(out, "{label} {count}");
            }
        }
    }
    Ok(())
}

fn finish_sweep(
    sweep: SweepKind,
    config: ExperimentConfig,
    rows: Vec<crate::experiment::ResultRow>,
    out: &mut dyn Write,
) -> Result<()> {
    let path = config.output_path.clone();
    let n = rows.len();
    write_results(
        &ResultsFile {
            sweep,
            config,
            rows,
        },
        &path,
    )?;
    let _ = writeln!(out, "wrote {n} rows to {}", path.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("beamlearn").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn unknown_flag_is_a_usage_error() {
        let (code, _, err) = run_capture(&["generate", "--bogus", "1"]);
        assert_eq!(code, 2);
        assert!(err.contains("Usage"), "{err}");
    }

    #[test]
    fn invalid_value_is_a_usage_error() {
        let (code, _, _) = run_capture(&["generate", "--count", "ten", "--out", "x"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run_capture(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("sweep-snr"));
    }

    #[test]
    fn budget_refusal_names_the_count() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.txt");
        let (code, _, err) = run_capture(&[
            "generate",
            "--n-beams",
            "16",
            "--n-users",
            "8",
            "--count",
            "1",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code, 1);
        assert!(err.contains("4294967296"), "{err}");
        assert!(!path.exists());
    }
}
