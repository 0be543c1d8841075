use clap::{Parser, Subcommand, ValueEnum};
use helmbie_cli::{init_threads, run_solve, run_sweep, run_verify, CliError, RunConfig, Suite};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "helmbie", version, about = "Helmholtz scattering by a bump on a half-plane")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Test hook: corrupt a special-function regime switch.
    #[arg(long, value_enum, global = true, hide = true)]
    inject_fault: Option<Fault>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fault {
    Switchover,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configuration and write densities, fields and metrics.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to the config's `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the numerical verification suite.
    Verify {
        #[arg(long, value_enum, default_value = "fast")]
        suite: SuiteArg,
        #[arg(long, default_value = "verify_out")]
        out: PathBuf,
    },
    /// Solve a configuration once per value of one scalar field.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Dotted path of the field, e.g. `wavenumber.re` or `mesh.n_panels`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        values: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Fast,
    All,
}

fn output_dir(cli_out: Option<PathBuf>, config: &RunConfig) -> Result<PathBuf, CliError> {
    cli_out
        .or_else(|| config.output_dir.clone())
        .ok_or_else(|| CliError::config("output_dir", "pass --out or set output_dir in the config"))
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    if let Some(Fault::Switchover) = cli.inject_fault {
        helmbie::special::inject_switchover_fault(true);
    }
    match cli.command {
        Command::Solve { config, out } => {
            let cfg = RunConfig::from_path(&config)?;
            let out = output_dir(out, &cfg)?;
            let report = run_solve(&cfg, &out)?;
            println!(
                "solved {} nodes: residual {:.3e}, wrote {}",
                cfg.build()?.mesh.len(),
                report.metrics.residual_norm,
                out.display()
            );
            for note in &report.metrics.notes {
                println!("note: {note}");
            }
        }
        Command::Verify { suite, out } => {
            let suite = match suite {
                SuiteArg::Fast => Suite::Fast,
                SuiteArg::All => Suite::All,
            };
            let result = run_verify(suite, &out);
            let path = out.join("verify_report.json");
            if let Ok(text) = std::fs::read_to_string(&path) {
                if let Ok(report) = serde_json::from_str::<serde_json::Value>(&text) {
                    for check in report["checks"].as_array().into_iter().flatten() {
                        let status = if check["passed"].as_bool() == Some(true) { "PASS" } else { "FAIL" };
                        println!("{status} {} measured={} {} {}", check["name"].as_str().unwrap_or("?"), check["measured"], check["relation"].as_str().unwrap_or("?"), check["tolerance"]);
                    }
                }
            }
            result?;
        }
        Command::Sweep { config, param, values, out } => {
            let cfg = RunConfig::from_path(&config)?;
            let entries = run_sweep(&cfg, &param, &values, &out)?;
            for e in entries {
                println!("{}={}: residual {:.3e} -> {}", param, e.value, e.report.metrics.residual_norm, e.directory.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
