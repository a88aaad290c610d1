use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lowcon::config::{ExperimentConfig, Mode};
use lowcon::dataset::ingest_csv;
use lowcon::harness::{run_emse, run_simulation};
use lowcon::output::{emit, resolve_output};
use lowcon::{diagnose, HarnessError, Result};
use lowcon_core::design::{generate_olhd, OlhdOptions};
use lowcon_core::seed::stream;

#[derive(Parser)]
#[command(name = "lowcon", version, about = "Low-condition-number subsampling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulated grid (or the toy model when the config says so).
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Empirical MSE on a CSV data set against full-data OLS and Huber fits.
    Emse {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        response: String,
        #[arg(long, value_delimiter = ',', required = true)]
        predictors: Vec<String>,
        /// Fit without an intercept column.
        #[arg(long)]
        no_intercept: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One-predictor toy comparison of UNIF, BLEV and LOWCON.
    Toy {
        #[arg(long, value_delimiter = ',', required = true)]
        r: Vec<usize>,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        replicates: usize,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Conditioning, worst-case MSE and bound diagnostics per selection.
    Diagnose {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        sigma2: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print an orthogonal Latin hypercube design on [-1, 1]^p and its κ.
    Olhd {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        seed: u64,
    },
}

fn output_for(cli_out: Option<PathBuf>, cfg: Option<&ExperimentConfig>, default_name: &str) -> Option<PathBuf> {
    let path = cli_out.or_else(|| cfg.and_then(|c| c.output_path.clone()));
    resolve_output(path.as_deref(), default_name)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { config, out } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            if !matches!(cfg.mode, Mode::Simulate | Mode::Toy) {
                return Err(HarnessError::config("simulate needs mode `simulate` or `toy`"));
            }
            let outcome = run_simulation(&cfg)?;
            emit(&outcome.rows, output_for(out, Some(&cfg), "simulation.csv").as_deref())?;
            report_failures(&outcome.failed)?;
        }
        Command::Emse {
            config,
            data,
            response,
            predictors,
            no_intercept,
            out,
        } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let mut dataset = ingest_csv(&data, Some(&response), &predictors)?;
            dataset.has_intercept = cfg.intercept && !no_intercept;
            if dataset.dropped_rows > 0 {
                eprintln!("dropped {} incomplete rows", dataset.dropped_rows);
            }
            let outcome = run_emse(&dataset, &cfg)?;
            emit(&outcome.rows, output_for(out, Some(&cfg), "emse.csv").as_deref())?;
            report_failures(&outcome.failed)?;
        }
        Command::Toy {
            r,
            seed,
            replicates,
            n,
            theta,
            out,
        } => {
            let cfg = ExperimentConfig {
                replicates,
                n,
                theta,
                ..ExperimentConfig::toy(r, seed)
            };
            let outcome = run_simulation(&cfg)?;
            emit(&outcome.rows, output_for(out, None, "toy.csv").as_deref())?;
            report_failures(&outcome.failed)?;
        }
        Command::Diagnose {
            config,
            alpha,
            sigma2,
            out,
        } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            if !(alpha > 0.0 && sigma2 >= 0.0) {
                return Err(HarnessError::config("need alpha > 0 and sigma2 >= 0"));
            }
            let rows = diagnose(&cfg, sigma2, alpha)?;
            emit(&rows, output_for(out, Some(&cfg), "diagnose.csv").as_deref())?;
        }
        Command::Olhd { r, p, seed } => {
            if r < 2 || p == 0 {
                return Err(HarnessError::config("need r >= 2 and p >= 1"));
            }
            let design = generate_olhd(r, p, &mut stream(seed, &[]), &OlhdOptions::default())?;
            for i in 0..design.runs() {
                let row: Vec<String> = design.points.row(i).iter().map(|v| v.to_string()).collect();
                println!("{}", row.join(","));
            }
            println!("# kappa = {}", design.kappa);
            println!("# max_abs_corr = {}", design.max_abs_corr);
        }
    }
    Ok(())
}

fn report_failures(failed: &[lowcon::harness::FailedCell]) -> Result<()> {
    for cell in failed {
        eprintln!("cell {} r = {} failed after retries", cell.method, cell.r);
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(HarnessError::CellsFailed { failed: failed.len() })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

