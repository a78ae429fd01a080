use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, ValueEnum};
use fedosov_cli::{run, run_demo, Command, RunOptions, ORDER_ENV};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    /// Check the Poisson structure, connection and P/Q tensors.
    Validate,
    /// Solve the fundamental equation and audit the solution.
    Solve,
    /// Lift the named functions to the formal neighbourhood.
    Lift,
    /// Build the change of variables and the source/target images.
    Groupoid,
    /// Run the full property suite.
    Check,
    /// Run a bundled example end to end (the argument is its name).
    Demo,
}

/// Formal symplectic groupoids of polynomial Poisson structures.
///
/// Exit codes: 0 success, 1 validation or check failure, 2 malformed input,
/// 3 solver infeasibility.
#[derive(Debug, Parser)]
#[command(name = "fedosov", version)]
struct Args {
    #[arg(value_enum)]
    command: Cmd,
    /// Spec document, or the demo name for `demo`.
    input: Option<String>,
    /// Truncation order; overrides the spec document and the environment.
    #[arg(long)]
    order: Option<u32>,
    /// Restrict lifts and groupoid images to these named functions.
    #[arg(long = "function", value_name = "NAME")]
    functions: Vec<String>,
    /// Also write the report to this file.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Do not print the report to stdout.
    #[arg(long)]
    quiet: bool,
    /// Worker threads for the parallel kernels.
    #[arg(long)]
    threads: Option<usize>,
    /// Include wall-clock timings in the report.
    #[arg(long)]
    timing: bool,
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> anyhow::Result<u8> {
    let args = Args::parse();
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    }
    let opts = RunOptions {
        order: args.order,
        functions: args.functions.clone(),
        timing: args.timing,
        env_order: std::env::var(ORDER_ENV).ok(),
    };
    let outcome = match args.command {
        Cmd::Demo => {
            let Some(name) = &args.input else {
                bail!("`demo` needs a name; available: {}", fedosov_cli::demos::names().join(", "));
            };
            run_demo(name, &opts)
        }
        cmd => {
            let Some(path) = &args.input else { bail!("a spec document is required") };
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
            let command = match cmd {
                Cmd::Validate => Command::Validate,
                Cmd::Solve => Command::Solve,
                Cmd::Lift => Command::Lift,
                Cmd::Groupoid => Command::Groupoid,
                Cmd::Check => Command::Check,
                Cmd::Demo => unreachable!(),
            };
            run(command, path, &text, &opts)
        }
    };
    let text = outcome.text();
    if let Some(out) = &args.output {
        std::fs::write(out, &text).with_context(|| format!("writing {}", out.display()))?;
    }
    if !args.quiet {
        print!("{text}");
    }
    if let Some(err) = outcome.report.get("error").and_then(|e| e.get("message")) {
        eprintln!("error: {}", err.as_str().unwrap_or_default());
    }
    Ok(u8::try_from(outcome.exit_code).unwrap_or(2))
}
