use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hardyvx::cli::emit::emit_audit;
use hardyvx::cli::run::{
    audit_all, audit_table, catalog_listing, summary, EXIT_INCONSISTENT, EXIT_INPUT, EXIT_OK,
};
use hardyvx::cli::{emit, parse_config, run_scenario, Format};
use hardyvx::criteria::audit::AuditConfig;
use hardyvx::Error;

/// Variable-exponent Hardy inequality audits on (0,1).
#[derive(Parser)]
#[command(name = "hardyvx", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output.dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides `output.format` in the config.
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// List the built-in exponents.
    Catalog,
    /// Audit every built-in exponent at the default grid.
    AuditAll {
        #[arg(long)]
        x_min: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        /// Also write one JSON report per entry into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

const DEFAULT_OUT: &str = "hardyvx-out";

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("HARDYVX_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("HARDYVX_THREADS must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        Command::Catalog => {
            print!("{}", catalog_listing());
            Ok(EXIT_OK)
        }
        Command::Run { config, out, format } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|source| Error::Io { path: config.clone(), source })?;
            let cfg = parse_config(&text)?;
            let report = run_scenario(&cfg)?;
            let dir = out.or_else(|| cfg.output.dir.clone()).unwrap_or_else(|| DEFAULT_OUT.into());
            let written = emit(&report, format.unwrap_or(cfg.output.format), &dir)?;
            print!("{}", summary(&report.report));
            println!(
                "  wrote {} file(s) to {} in {:.2}s",
                written.len(),
                dir.display(),
                report.wall_clock_seconds
            );
            Ok(report.exit_code())
        }
        Command::AuditAll { x_min, n, out } => {
            let mut cfg = AuditConfig::default();
            if let Some(x) = x_min {
                cfg.x_min = x;
            }
            if let Some(n) = n {
                cfg.n = n;
            }
            let reports = audit_all(&cfg)?;
            print!("{}", audit_table(&reports));
            if let Some(dir) = out {
                emit_audit(&reports, &dir)?;
            }
            let ok = reports.iter().all(|r| r.consistent());
            Ok(if ok { EXIT_OK } else { EXIT_INCONSISTENT })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_INPUT as u8);
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT as u8)
        }
    }
}
