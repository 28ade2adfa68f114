use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod config;
mod run;

use config::ExperimentConfig;

/// Runs multiplicative-integral experiments described in JSON.
#[derive(Parser)]
#[command(name = "flagint", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and print its report.
    Run {
        config: PathBuf,
        /// Write `level,N,residual,estimated_order,wall_ms` rows here.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Print only the status line.
        #[arg(long)]
        quiet: bool,
        /// Fill the wall_ms column (otherwise 0, so output is reproducible).
        #[arg(long)]
        timings: bool,
    },
    /// Parse a config and build every object it names.
    Validate { config: PathBuf },
    /// Print the JSON schema of experiment configs.
    Schema,
}

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Domain(String),
}

impl From<flagint::Error> for Failure {
    fn from(e: flagint::Error) -> Self {
        if e.is_domain() {
            Failure::Domain(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

impl From<flagint::algebra::AlgebraError> for Failure {
    fn from(e: flagint::algebra::AlgebraError) -> Self {
        flagint::Error::from(e).into()
    }
}

impl From<flagint::formlang::ParseError> for Failure {
    fn from(e: flagint::formlang::ParseError) -> Self {
        Failure::Config(e.to_string())
    }
}

fn load(path: &Path) -> Result<ExperimentConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn write_csv(path: &Path, rows: &[run::CsvRow], timings: bool) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["level", "N", "residual", "estimated_order", "wall_ms"])?;
    for row in rows {
        let order = row.estimated_order.map(|p| format!("{p:.6}")).unwrap_or_default();
        let ms = if timings {
            format!("{:.3}", row.wall_ms)
        } else {
            "0".into()
        };
        w.write_record([
            row.level.to_string(),
            row.n.to_string(),
            format!("{:.6e}", row.residual),
            order,
            ms,
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn fail(f: Failure) -> ExitCode {
    let (status, code, msg) = match f {
        Failure::Config(m) => ("config-error", 3, m),
        Failure::Domain(m) => ("domain-error", 4, m),
    };
    println!("STATUS: {status}");
    println!("error: {msg}");
    ExitCode::from(code)
}

fn limit_threads() {
    #[cfg(feature = "parallel")]
    if let Some(n) = std::env::var("FLAGINT_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
    {
        // the only caller; a second initialisation cannot happen
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    limit_threads();
    match cli.command {
        Command::Schema => {
            let schema = schemars::schema_for!(ExperimentConfig);
            let text = serde_json::to_string_pretty(&schema).expect("schema serializes");
            let _ = writeln!(std::io::stdout(), "{text}");
            ExitCode::SUCCESS
        }
        Command::Validate { config } => match load(&config).and_then(|c| config::validate(&c)) {
            Ok(()) => {
                println!("STATUS: ok");
                ExitCode::SUCCESS
            }
            Err(f) => fail(f),
        },
        Command::Run {
            config,
            csv,
            quiet,
            timings,
        } => {
            let report = match load(&config).and_then(|c| run::run(&c)) {
                Ok(r) => r,
                Err(f) => return fail(f),
            };
            if let Some(path) = csv {
                if let Err(e) = write_csv(&path, &report.rows, timings) {
                    return fail(Failure::Config(format!("cannot write {}: {e}", path.display())));
                }
            }
            let ok = report.failures.is_empty();
            let mut out = std::io::stdout().lock();
            let _ = writeln!(out, "STATUS: {}", if ok { "ok" } else { "tolerance-fail" });
            if !quiet {
                for line in &report.lines {
                    let _ = writeln!(out, "{line}");
                }
                if !ok {
                    let _ = writeln!(out, "failed: {}", report.failures.join(", "));
                }
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
    }
}
