use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use frontal_lab::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "frontal-lab", version, about = "Construct and analyse frontal surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the configured surface and write the requested outputs.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the invariant suite on the configured surface.
    Verify { config: PathBuf },
    /// Evaluate an expression and its partial derivatives.
    Eval {
        expr: String,
        /// Point as `u,v`.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_point)]
        at: (f64, f64),
        #[arg(long, default_value_t = 2)]
        order: u8,
    },
}

fn parse_point(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `u,v`, got `{s}`"))?;
    let p = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
    Ok((p(a)?, p(b)?))
}

fn report(context: &str, e: &CliError) -> ExitCode {
    eprintln!("frontal-lab: {context}: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out } => match frontal_lab::run(&config, &out) {
            Ok(files) => {
                for f in files {
                    println!("wrote {}", f.display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => report(&config.display().to_string(), &e),
        },
        Command::Verify { config } => {
            let result: CliResult<(String, usize)> = frontal_lab::verify(&config);
            match result {
                Ok((text, 0)) => {
                    print!("{text}");
                    ExitCode::SUCCESS
                }
                Ok((text, failed)) => {
                    print!("{text}");
                    report(&config.display().to_string(), &CliError::VerifyFailed(failed))
                }
                Err(e) => report(&config.display().to_string(), &e),
            }
        }
        Command::Eval { expr, at, order } => match frontal_lab::eval(&expr, at, order) {
            Ok(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => report("eval", &e),
        },
    }
}
