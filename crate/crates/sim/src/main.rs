use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use majorana_sim::runner::write_trace;
use majorana_sim::{compare, execute, validate, Oracle, RunConfig, RunResult, SimError};

/// Majorana braiding simulator.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a config and probe the t = 0 spectrum.
    Validate { config: PathBuf },
    /// Run a config and write result-<oracle>.json (and trace.csv).
    Run {
        config: PathBuf,
        #[arg(long, default_value = "pfaffian")]
        oracle: Oracle,
        /// Output directory; defaults to [run] out, then the current directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for amplitudes; 0 uses all cores.
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Diff two result files.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cmd: Command) -> Result<u8, SimError> {
    match cmd {
        Command::Validate { config } => {
            let cfg = RunConfig::load(&config)?;
            let report = validate(&cfg)?;
            print!("{}", report.render());
            Ok(0)
        }
        Command::Run { config, oracle, out, seed, workers } => {
            let cfg = RunConfig::load(&config)?;
            let dir = out.or_else(|| cfg.run.out.clone()).unwrap_or_else(|| PathBuf::from("."));
            let output = execute(&cfg, oracle, seed, workers)?;
            write_outputs(&dir, oracle, &output.result, &output.trace)?;
            let r = &output.result;
            if let Some(g) = &r.gate {
                println!("{g}");
            }
            if let Some(f) = r.fidelity {
                println!("fidelity vs {} = {:.12}", r.target, f.0);
            }
            println!("branches per amplitude = {}", r.telemetry.branch_count);
            if let Some(msg) = output.tolerance_failure {
                eprintln!("tolerance failure: {msg}");
                return Ok(2);
            }
            Ok(0)
        }
        Command::Compare { a, b, tol } => {
            let report = compare(&RunResult::load(&a)?, &RunResult::load(&b)?)?;
            print!("{}", report.render(tol));
            Ok(if report.within(tol) { 0 } else { 2 })
        }
    }
}

fn write_outputs(dir: &Path, oracle: Oracle, result: &RunResult, trace: &[majorana_core::evolution::TracePoint]) -> Result<(), SimError> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("result-{oracle}.json"));
    std::fs::write(&path, result.to_json())?;
    println!("wrote {}", path.display());
    if !trace.is_empty() {
        let path = dir.join("trace.csv");
        write_trace(std::fs::File::create(&path)?, trace)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
