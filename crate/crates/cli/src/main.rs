use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use stochastic_accel::harness::{
    check_config, reference_for, run_experiment, CheckSummary, ExperimentConfig, RunOptions,
};
use stochastic_accel::problems::libsvm::read_libsvm_file;
use stochastic_accel::Error;

#[derive(Parser)]
#[command(
    name = "stochastic-accel",
    version,
    about = "Accelerated stochastic gradient experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every sweep cell and write the CSV trace.
    Run {
        config: PathBuf,
        /// CSV destination; overrides the config's `output`. `-` means stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// L2-normalize logistic feature rows.
        #[arg(long)]
        normalize_rows: bool,
        /// Measure gaps against this value instead of computing a reference.
        #[arg(long)]
        f_star: Option<f64>,
    },
    /// Evaluate the variance conditions along one trajectory.
    Check {
        config: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        normalize_rows: bool,
        /// Print only iterations where a condition fails.
        #[arg(long)]
        violations_only: bool,
    },
    /// Print the reference optimal value.
    Reference {
        config: PathBuf,
        #[arg(long)]
        normalize_rows: bool,
    },
    /// Validate a LIBSVM file and print its shape.
    ParseData { file: PathBuf },
}

enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig, Failure> {
    if !path.is_file() {
        return Err(Failure::Usage(format!(
            "config file {} not found",
            path.display()
        )));
    }
    let cfg = ExperimentConfig::from_path(path).map_err(|e| match e {
        Error::Json(_) | Error::Config(_) => Failure::Usage(format!("{}: {e}", path.display())),
        other => Failure::Runtime(
            anyhow::Error::new(other).context(format!("reading {}", path.display())),
        ),
    })?;
    cfg.validate()
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(cfg)
}

fn open_output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        None => Box::new(BufWriter::new(io::stdout().lock())),
        Some(p) if p.as_os_str() == "-" => Box::new(BufWriter::new(io::stdout().lock())),
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)
                    .with_context(|| format!("creating {}", dir.display()))?;
            }
            Box::new(BufWriter::new(
                File::create(p).with_context(|| format!("creating {}", p.display()))?,
            ))
        }
    })
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run {
            config,
            output,
            normalize_rows,
            f_star,
        } => {
            let cfg = load_config(&config)?;
            let opts = RunOptions {
                normalize_rows,
                f_star,
            };
            let result = run_experiment(&cfg, opts).context("experiment failed")?;
            let dest = output.or_else(|| cfg.output_path());
            let mut out = open_output(dest.as_deref())?;
            result.write_csv(&mut out).context("writing CSV")?;
            out.flush().context("writing CSV")?;
            eprintln!(
                "{} runs, f* = {:.16e}{}",
                result.runs.len(),
                result.f_star,
                dest.filter(|p| p.as_os_str() != "-")
                    .map(|p| format!(", written to {}", p.display()))
                    .unwrap_or_default()
            );
        }
        Command::Check {
            config,
            output,
            normalize_rows,
            violations_only,
        } => {
            let cfg = load_config(&config)?;
            let rows = check_config(&cfg, normalize_rows).context("check failed")?;
            let mut out = open_output(output.as_deref())?;
            let mut emit = || -> io::Result<()> {
                writeln!(
                    out,
                    "k,lemma3_lhs,lemma3_rhs,lemma3_ok,strong_growth_lhs,strong_growth_rhs,strong_growth_ok,samples,exhaustive"
                )?;
                for r in &rows {
                    if violations_only && r.lemma3.satisfied && r.strong_growth.satisfied {
                        continue;
                    }
                    writeln!(
                        out,
                        "{},{:.16e},{:.16e},{},{:.16e},{:.16e},{},{},{}",
                        r.k,
                        r.lemma3.lhs_variance_estimate,
                        r.lemma3.rhs_bound,
                        r.lemma3.satisfied,
                        r.strong_growth.lhs_variance_estimate,
                        r.strong_growth.rhs_bound,
                        r.strong_growth.satisfied,
                        r.lemma3.num_mc_samples,
                        r.lemma3.exhaustive
                    )?;
                }
                out.flush()
            };
            emit().context("writing reports")?;
            let s = CheckSummary::from_rows(&rows);
            eprintln!(
                "{} iterations: lemma3 violated at {}, strong growth violated at {}",
                s.iterations, s.lemma3_violations, s.strong_growth_violations
            );
        }
        Command::Reference {
            config,
            normalize_rows,
        } => {
            let cfg = load_config(&config)?;
            let problem = cfg
                .build_problem(normalize_rows)
                .context("building problem")?;
            let r = reference_for(&cfg, problem.as_ref()).context("reference run failed")?;
            println!("f* = {:.16e} ({} iterations)", r.f_star, r.iterations);
        }
        Command::ParseData { file } => {
            if !file.is_file() {
                return Err(Failure::Usage(format!(
                    "data file {} not found",
                    file.display()
                )));
            }
            let data =
                read_libsvm_file(&file).with_context(|| format!("parsing {}", file.display()))?;
            println!("{} samples, dim {}", data.len(), data.dim());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
