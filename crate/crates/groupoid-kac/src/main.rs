use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use groupoid_kac::cli::{run_command, Command, Options, Which};
use groupoid_kac::kac::Control;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Text,
    Machine,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CoactionArg {
    #[value(name = "A")]
    A,
    #[value(name = "A-hat")]
    AHat,
    Both,
}

/// Verify pseudo-Kac systems, coactions and crossed-product duality of a finite measured groupoid.
#[derive(Debug, Parser)]
#[command(name = "gkac", version)]
struct Args {
    /// validate, kac-check, legs, coaction-check or duality
    #[arg(value_parser = parse_command)]
    command: Command,
    /// Groupoid file (`groupoid-format 1`)
    file: PathBuf,
    /// Residual threshold for every check
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// flip-U-sign, perturb-one-haar-weight, rotate-alpha-hat or identity-U
    #[arg(long = "negative-control", value_parser = parse_control)]
    negative_control: Option<Control>,
    /// Seed for the sampled multiplicativity audits
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Built-in coaction for coaction-check and duality
    #[arg(long, value_enum, default_value = "both")]
    coaction: CoactionArg,
}

fn parse_command(s: &str) -> Result<Command, String> {
    s.parse().map_err(|_| {
        let names: Vec<_> = Command::ALL.iter().map(|c| c.name()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

fn parse_control(s: &str) -> Result<Control, String> {
    s.parse().map_err(|e: groupoid_kac::Error| e.to_string())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match std::fs::read_to_string(&args.file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("gkac: {}: {e}", args.file.display());
            return ExitCode::from(2);
        }
    };
    let opts = Options {
        tolerance: args.tolerance,
        control: args.negative_control,
        seed: args.seed,
        coaction: match args.coaction {
            CoactionArg::A => Which::Plain,
            CoactionArg::AHat => Which::Hat,
            CoactionArg::Both => Which::Both,
        },
        ..Options::default()
    };
    match run_command(args.command, &text, &opts) {
        Ok(rep) => {
            match args.format {
                Format::Text => print!("{}", rep.to_text()),
                Format::Machine => print!("{}", rep.to_machine()),
            }
            if rep.pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("gkac: {}: {e}", args.file.display());
            ExitCode::from(2)
        }
    }
}
