//! Command-line front end for the wavecs experiments.

mod commands;
mod matrix_io;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Exit status for a decoder that stopped without meeting its tolerances under --strict.
pub const EXIT_NOT_CONVERGED: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "wavecs", version, about = "Compressed sensing of wavelet coefficients from Gaussian and Fourier samples")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Wavelet: haar or dbP.
    #[arg(long, global = true, default_value = "haar")]
    pub wavelet: String,
    /// Smoothness α used by the recipes.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub alpha: f64,
    /// δ in L̄ = (ln m)^{6+δ}.
    #[arg(long, global = true, default_value_t = wavecs::recipes::DEFAULT_DELTA)]
    pub delta: f64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Budget(s) m, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub m: Vec<usize>,
    /// Dimension N in experiment mode.
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    /// theory or experiment.
    #[arg(long, global = true, default_value = "experiment")]
    pub mode: String,
    #[arg(long, global = true)]
    pub out: Option<std::path::PathBuf>,
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Exit with status 3 when a decoder does not converge.
    #[arg(long, global = true)]
    pub strict: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the parameters of a strategy as key=value lines.
    Recipe(commands::RecipeArgs),
    /// Draw a multilevel Fourier sampling pattern (CSV).
    Pattern(commands::PatternArgs),
    /// Compute the cross-Gramian (binary with --out, summary otherwise).
    Gramian(commands::GramianArgs),
    /// Local coherences of the cross-Gramian per (band, scale) block.
    Coherence(commands::CoherenceArgs),
    /// Balancing constant θ of the truncated Gramian.
    Balancing(commands::BalancingArgs),
    /// Solve a basis pursuit or square-root LASSO problem given as CSV files.
    Solve(commands::SolveArgs),
    /// Run one encode-decode pipeline and print its CSV row.
    Run(commands::RunArgs),
    /// Run a sweep over methods, budgets and trials.
    Sweep(commands::SweepArgs),
    /// Restricted isometry, coherence and balancing diagnostics.
    Diagnose(commands::DiagnoseArgs),
    /// Exhaustive minimum weighted l1 solution of a tiny system.
    Oracle(commands::OracleArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        // reader went away, as with `| head`
        Err(wavecs::Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_precondition() { 2 } else { 1 })
        }
    }
}
