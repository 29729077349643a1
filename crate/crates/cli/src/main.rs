use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use perturbwalk_cli::{check, reference, resolve_threads, run, CliError, RunOptions};

#[derive(Parser)]
#[command(
    name = "perturbwalk",
    version,
    about = "Random walks with local impurities: experiments and reference tables"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config
    Run {
        config: PathBuf,
        /// run even if the walk fails the assumption checks
        #[arg(long)]
        waive_assumptions: bool,
        /// worker threads (0 = all cores); falls back to PERTURBWALK_THREADS
        #[arg(long)]
        threads: Option<usize>,
        /// output prefix for <PREFIX>.report.json and <PREFIX>.data.csv
        #[arg(long)]
        out: Option<String>,
    },
    /// Write the product-lazy reference tables
    Reference {
        #[arg(long, default_value = "reference")]
        out: PathBuf,
    },
    /// Check the walk's assumptions and print the report
    Check { config: PathBuf },
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("perturbwalk: {e}");
    ExitCode::from(e.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match cli.command {
        Command::Run { config, waive_assumptions, threads, out } => {
            let threads = match resolve_threads(threads) {
                Ok(t) => t,
                Err(e) => return fail(e),
            };
            match run(&config, &RunOptions { waive_assumptions, threads, out }) {
                Ok(r) => {
                    for (name, ok) in &r.outcome.verdicts {
                        println!("{name}: {}", if *ok { "pass" } else { "FAIL" });
                    }
                    println!("wrote {} and {}", r.report_path.display(), r.data_path.display());
                    ExitCode::from(if r.outcome.passed() { 0 } else { 1 })
                }
                Err(e) => fail(e),
            }
        }
        Command::Reference { out } => match reference::write_reference(&out) {
            Ok(files) => {
                for f in files {
                    println!("wrote {}", f.display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Command::Check { config } => match check(&config) {
            Ok(rep) => {
                println!("{}", serde_json::to_string_pretty(&rep).expect("report serializes"));
                if rep.passed() {
                    ExitCode::SUCCESS
                } else {
                    eprintln!("perturbwalk: assumptions not met: {}", rep.failures().join(", "));
                    ExitCode::from(3)
                }
            }
            Err(e) => fail(e),
        },
    }
}
