use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use nlqm_cli::{compare_series, load_scenario, output_root, read_series, run_scenario, Experiment, Norm, Status};

#[derive(Parser)]
#[command(name = "nlqm", version, about = "Run nonlinear quantum mechanics scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more scenario files.
    Run {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// Output directory (default: $NLQM_OUT, else ./nlqm-out).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the norm of the difference of two series files.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value = "linf")]
        norm: Norm,
    },
    /// List the experiments and their parameters.
    ListExperiments,
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
        Command::Run { configs, out } => run(&configs, output_root(out)),
        Command::Compare { a, b, norm } => {
            let result = read_series(&a)
                .and_then(|ta| Ok((ta, read_series(&b)?)))
                .and_then(|(ta, tb)| compare_series(&ta, &tb, norm));
            match result {
                Ok(v) => {
                    println!("{v:.16e}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::ListExperiments => {
            for e in Experiment::ALL {
                let params: Vec<String> = e
                    .schema()
                    .iter()
                    .map(|p| match p.default {
                        Some(d) => format!("{}={d}", p.name),
                        None if p.optional => format!("[{}]", p.name),
                        None => p.name.to_string(),
                    })
                    .collect();
                println!("{:<26} {}", e.name(), e.summary());
                println!("{:<26} params: {}", "", params.join(" "));
            }
            ExitCode::SUCCESS
        }
    }
}

fn run(configs: &[PathBuf], root: PathBuf) -> ExitCode {
    // Scenarios run concurrently; each writes only inside its own directory.
    let codes: Vec<u8> = configs
        .par_iter()
        .map(|path| {
            let scenario = match load_scenario(path) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return 2;
                }
            };
            match run_scenario(&scenario, &root) {
                Ok(report) => {
                    let line = format!(
                        "{} {} ({})",
                        status_word(report.status),
                        report.scenario,
                        report.experiment
                    );
                    match &report.error {
                        Some(err) => eprintln!("{line}: {err}"),
                        None => println!("{line}"),
                    }
                    report.status.exit_code()
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    2
                }
            }
        })
        .collect();
    ExitCode::from(codes.into_iter().max().unwrap_or(0))
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::Error => "ERROR",
    }
}
