mod commands;
mod report;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "bispectral", version, about = "Bispectral duality of quasi-polynomial spaces and the (gl_N, gl_M) Gaudin duality")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Bispectral dual of a space of quasi-polynomials
    Transform(TransformArgs),
    /// Critical points of master functions
    #[command(subcommand)]
    Bethe(BetheCommand),
    /// Gaudin Hamiltonians on tensor weight spaces
    #[command(subcommand)]
    Gaudin(GaudinCommand),
    /// Baker-Akhiezer functions
    #[command(subcommand)]
    Baker(BakerCommand),
    /// The N = M = 2 example with n = m = (1,1), λ = (0,1), z = (0,1), end to end
    Demo(DemoArgs),
}

#[derive(Args, Debug)]
pub struct TransformArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// treat the input as a special space with the points listed under "z"
    #[arg(long)]
    pub special: bool,
    #[arg(long)]
    pub output: PathBuf,
    /// report path; stdout if absent
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// require the exact backend
    #[arg(long)]
    pub exact: bool,
    /// tolerance of the numeric checks
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Subcommand, Debug)]
enum BetheCommand {
    /// Multistart Newton search for critical orbits
    Solve(SolveArgs),
    /// Re-check a points file
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub starts: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// a points file written by `bethe solve`
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum GaudinCommand {
    /// Eigenvalues of the KZ and dynamical Hamiltonians
    Spectrum(SpectrumArgs),
    /// Interchange of the Hamiltonians under the duality isomorphism
    VerifyDuality(DualityArgs),
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[arg(long = "N")]
    pub big_n: usize,
    #[arg(long = "M")]
    pub big_m: usize,
    #[arg(long, value_delimiter = ',', required = true)]
    pub m: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    /// comma separated; integers and p/q are exact, decimals approximate
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub lambda: Vec<String>,
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub z: Vec<String>,
    #[arg(long)]
    pub exact: bool,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct DualityArgs {
    /// {m, n, lambda, z}; spectrum files are accepted
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub exact: bool,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum BakerCommand {
    /// ψ_U(x, ξ) = ψ_V(ξ, x) on a jittered grid
    Verify(BakerArgs),
}

#[derive(Args, Debug)]
pub struct BakerArgs {
    /// a space file; with "z" present the special dual is used
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub grid: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long)]
    pub exact: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DemoArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn init_logging() -> Result<(), String> {
    let level = std::env::var("BISPECTRAL_LOG").unwrap_or_else(|_| "error".into());
    if !["error", "info", "debug"].contains(&level.as_str()) {
        return Err(format!("BISPECTRAL_LOG must be error, info or debug, not {:?}", level));
    }
    env_logger::Builder::new().parse_filters(&level).init();
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = init_logging() {
        eprintln!("error: {}", e);
        return ExitCode::from(2);
    }
    let outcome = match cli.command {
        Command::Transform(a) => commands::transform(&a),
        Command::Bethe(BetheCommand::Solve(a)) => commands::bethe_solve(&a),
        Command::Bethe(BetheCommand::Verify(a)) => commands::bethe_verify(&a),
        Command::Gaudin(GaudinCommand::Spectrum(a)) => commands::gaudin_spectrum(&a),
        Command::Gaudin(GaudinCommand::VerifyDuality(a)) => commands::gaudin_verify_duality(&a),
        Command::Baker(BakerCommand::Verify(a)) => commands::baker_verify(&a),
        Command::Demo(a) => commands::demo(&a),
    };
    match outcome {
        Ok(report::Status::Pass) => ExitCode::SUCCESS,
        Ok(report::Status::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(2)
        }
    }
}
