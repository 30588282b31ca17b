use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use subreg::calculus::Theorem;
use subreg::cli::{self, catalog, RunOptions, Suite, EXIT_PARSE};
use subreg::rates::SamplingSchedule;

#[derive(Parser)]
#[command(name = "subreg", version, about = "Certify, refute and bound strong metric subregularity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the tasks of a problem document.
    Run {
        document: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Run a catalog example and check its expected outcome.
    Reproduce {
        id: String,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Check a theorem's bound on its catalog or on random instances.
    Verify {
        theorem: String,
        suite: SuiteArg,
        /// Number of random instances.
        #[arg(default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_name = "r0,decay,K,N")]
        schedule: Option<SamplingSchedule>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// List the catalog examples and theorem ids.
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Catalog,
    Random,
}

#[derive(Args)]
struct RunFlags {
    /// Write the JSON report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Write one CSV per rate estimate into this directory.
    #[arg(long, value_name = "PATH")]
    curves_dir: Option<PathBuf>,
    /// Override the document seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the sampling schedule.
    #[arg(long, value_name = "r0,decay,K,N")]
    schedule: Option<SamplingSchedule>,
    /// Skip points and tasks whose evaluation fails.
    #[arg(long)]
    skip_eval_errors: bool,
    /// Use this defect instead of the measured one when it is smaller.
    #[arg(long, value_name = "X")]
    assume_eps: Option<f64>,
}

impl RunFlags {
    fn options(&self) -> RunOptions {
        RunOptions {
            seed: self.seed,
            schedule: self.schedule.clone(),
            skip_eval_errors: self.skip_eval_errors,
            assume_eps: self.assume_eps,
            curves_dir: self.curves_dir.clone(),
        }
    }
}

fn emit(json: &str, out: Option<&Path>) -> Result<(), String> {
    match out {
        Some(p) => fs::write(p, format!("{json}\n")).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn fail(message: impl std::fmt::Display, c: i32) -> ExitCode {
    eprintln!("error: {message}");
    code(c)
}

fn run_and_emit(report: subreg::Result<cli::Report>, out: Option<&Path>) -> ExitCode {
    match report {
        Ok(r) => {
            for t in &r.tasks {
                let status = if t.expectation_met { "ok" } else { "UNEXPECTED" };
                match &t.error {
                    Some(e) => eprintln!("{:<28} {:<26} error: {e}", t.id, t.op.name()),
                    None => eprintln!("{:<28} {:<26} success={} expect={:?} {status}", t.id, t.op.name(), t.success, t.expect),
                }
            }
            if let Err(e) = emit(&r.to_json(), out) {
                return fail(e, cli::EXIT_EVALUATION);
            }
            code(r.exit_code)
        }
        Err(e) => {
            let c = cli::exit_code_for(&e);
            fail(e, c)
        }
    }
}

fn main() -> ExitCode {
    let args = Cli::parse();
    if let Err(e) = cli::configure_threads() {
        return fail(e, EXIT_PARSE);
    }
    match args.command {
        Command::Run { document, flags } => {
            let text = match fs::read_to_string(&document) {
                Ok(t) => t,
                Err(e) => return fail(format!("cannot read {}: {e}", document.display()), EXIT_PARSE),
            };
            run_and_emit(cli::run_document(&text, &flags.options()), flags.out.as_deref())
        }
        Command::Reproduce { id, flags } => run_and_emit(cli::reproduce(&id, &flags.options()), flags.out.as_deref()),
        Command::Verify {
            theorem,
            suite,
            n,
            seed,
            schedule,
            out,
        } => {
            let theorem: Theorem = match theorem.parse() {
                Ok(t) => t,
                Err(e) => return fail(e, EXIT_PARSE),
            };
            let suite = match suite {
                SuiteArg::Catalog => Suite::Catalog,
                SuiteArg::Random => Suite::Random,
            };
            let s = schedule.unwrap_or_default();
            match cli::verify(theorem, suite, n, seed, &s) {
                Ok(r) => {
                    eprintln!(
                        "{theorem}: {} hold, {} violated, {} not applicable",
                        r.holds, r.violated, r.not_applicable
                    );
                    let json = serde_json::to_string_pretty(&r).expect("reports serialize");
                    if let Err(e) = emit(&json, out.as_deref()) {
                        return fail(e, cli::EXIT_EVALUATION);
                    }
                    code(r.exit_code())
                }
                Err(e) => {
                    let c = cli::exit_code_for(&e);
                    fail(e, c)
                }
            }
        }
        Command::List => {
            println!("examples:");
            for id in catalog::ids() {
                println!("  {id:<26} {}", catalog::summary(&id).unwrap_or_default());
            }
            println!("theorems:");
            for t in Theorem::ALL {
                println!("  {t}");
            }
            ExitCode::SUCCESS
        }
    }
}
