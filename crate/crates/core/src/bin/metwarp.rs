//! `metwarp`: run verification suites on spec files.
//!
//! Exit status is 0 when no check failed, 1 when some check failed and 2
//! for usage, spec or I/O errors.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use metallic_warp::verify::{resolve_spec, run, RunOptions, Tolerances, BUILTINS, SUITES, TOLERANCE_KEYS};

#[derive(Parser)]
#[command(name = "metwarp", version, about = "Verify metallic structures on warped products")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run suites on a spec file or a built-in spec.
    Verify(VerifyArgs),
    /// List suites, tolerance keys and built-in specs.
    ListSuites,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(clap::Args)]
struct VerifyArgs {
    /// Spec file path, or `builtin:<name>[?key=value&...]`.
    #[arg(long)]
    spec: String,
    /// Suite to run; repeatable. All suites run when omitted.
    #[arg(long = "suite")]
    suites: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 30)]
    samples: usize,
    /// Tolerance override `key=value`; repeatable.
    #[arg(long = "tol")]
    tols: Vec<String>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; the report does not depend on this.
    #[arg(long)]
    threads: Option<usize>,
}

fn list_suites() {
    println!("suites:");
    for (name, about) in SUITES {
        println!("  {name:<24}{about}");
    }
    println!("tolerance keys:");
    for (key, value, about) in TOLERANCE_KEYS {
        println!("  {key:<24}{value:<8e}{about}");
    }
    println!("built-in specs (--spec builtin:<name>):");
    for (name, about) in BUILTINS {
        println!("  {name:<24}{about}");
    }
}

fn verify(args: VerifyArgs) -> Result<i32, String> {
    let mut tolerances = Tolerances::default();
    for t in &args.tols {
        tolerances.set_pair(t).map_err(|e| e.to_string())?;
    }
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    let spec = resolve_spec(&args.spec).map_err(|e| e.to_string())?;
    let opts = RunOptions {
        seed: args.seed,
        samples: args.samples,
        tolerances,
    };
    let report = run(&spec, &args.suites, &opts).map_err(|e| e.to_string())?;
    let text = match args.format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json(),
    };
    match &args.out {
        Some(path) => std::fs::write(path, &text).map_err(|e| format!("{}: {e}", path.display()))?,
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string())?,
    }
    if args.out.is_some() || matches!(args.format, Format::Json) {
        eprintln!("{}", report.summary());
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListSuites => {
            list_suites();
            ExitCode::SUCCESS
        }
        Command::Verify(args) => match verify(args) {
            Ok(code) => ExitCode::from(code as u8),
            Err(e) => {
                eprintln!("metwarp: {e}");
                ExitCode::from(2)
            }
        },
    }
}
