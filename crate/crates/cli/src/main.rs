//! `gsw`: invariant suite, Kazdan–Warner solve pipeline and projection.
//!
//! Exit codes: 0 ok, 2 invariant failure, 3 below threshold (or a spinor in
//! the fixed-point set), 4 solver nonconvergence, 5 projection or divisor
//! failure, 64 usage and I/O errors.

mod commands;
mod config;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVARIANT: u8 = 2;
pub const EXIT_THRESHOLD: u8 = 3;
pub const EXIT_NONCONVERGENCE: u8 = 4;
pub const EXIT_PROJECTION: u8 = 5;
pub const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(
    name = "gsw",
    version,
    about = "Generalised Seiberg–Witten equations on flat tori"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the randomized identity checks.
    Invariants(Common),
    /// Build holomorphic test data and solve for a monopole.
    Solve(Common),
    /// Project a solved bundle to a classical solution.
    Project {
        /// Bundle directory written by `solve`.
        bundle: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

/// Flags shared by every command. Unset flags fall back to `--config`,
/// then to built-in defaults.
#[derive(Args, Debug, Default, Clone)]
pub struct Common {
    /// Plain-text `key = value` file; keys are the long flag names.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Torus dimension, 2 or 4.
    #[arg(long)]
    pub dim: Option<String>,
    /// Grid points along x₁ and x₂ (T⁴ uses 4 along x₃, x₄).
    #[arg(long)]
    pub size: Option<String>,
    /// Period of x₁ and x₂ (T⁴ uses 1 along x₃, x₄).
    #[arg(long)]
    pub length: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub degree: Option<String>,
    /// Number of spinor pairs.
    #[arg(long)]
    pub n: Option<String>,
    /// `t` as a number, or `auto+x` for 4π·d/V + x.
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<String>,
    #[arg(long)]
    pub tol: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<String>,
    /// Test-data spinor, `theta` or `const`.
    #[arg(long)]
    pub alpha: Option<String>,
    /// Threads for independent suite items.
    #[arg(long)]
    pub jobs: Option<String>,
    /// Debug: flip the sign of ω₁ in the permuting check.
    #[arg(long)]
    pub flip_omega_sign: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (common, bundle) = match &cli.command {
        Command::Invariants(c) | Command::Solve(c) => (c, None),
        Command::Project { bundle, common } => (common, Some(bundle.as_path())),
    };
    let cfg = match config::RunConfig::resolve(common) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let code = match cli.command {
        Command::Invariants(_) => commands::invariants(&cfg),
        Command::Solve(_) => commands::solve(&cfg),
        Command::Project { .. } => commands::project(&cfg, bundle.expect("project has a bundle")),
    };
    ExitCode::from(code)
}
