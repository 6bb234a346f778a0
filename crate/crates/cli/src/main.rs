mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use shiftlap::energy::SolverChoice;

/// Environment variable that overrides the output directory of the config file.
pub const OUT_DIR_ENV: &str = "SHIFTLAP_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "shiftlap",
    version,
    about = "Exact Laplacians, Green's functions and Dirichlet problems on the full shift"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON run configuration (N, max_level, point_cap, solver, seed, out_dir).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides the environment and the config file.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Alphabet size.
    #[arg(long = "N", global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub solver: Option<SolverArg>,
    /// Run every sweep on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum SolverArg {
    Exact,
    Float,
    Auto,
}

impl From<SolverArg> for SolverChoice {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Exact => SolverChoice::Exact,
            SolverArg::Float => SolverChoice::Float,
            SolverArg::Auto => SolverChoice::Auto,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List V_m in order.
    VmEnum {
        #[arg(long)]
        m: usize,
    },
    /// Write the dense H_m as CSV, optionally with its blocks and G_m.
    Operator {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        blocks: bool,
    },
    /// Structural checks of H_m and its block identities.
    Check {
        #[arg(long)]
        m: usize,
    },
    /// Level forms of a cylinder function.
    EnergyTrace {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        mmax: Option<usize>,
    },
    /// Effective resistance; without --a/--b, the unbounded pair at level m.
    Resistance {
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        a: Option<String>,
        #[arg(long)]
        b: Option<String>,
    },
    /// Green's function g(x, y).
    GreenEval { x: String, y: String },
    /// Green's operator of a cylinder function on V_level.
    GreenApply {
        f: PathBuf,
        #[arg(long)]
        level: usize,
    },
    /// Normalized Laplacian along a path of points approaching x.
    LaplacianTrace {
        u: PathBuf,
        /// Leading symbols of x, repeated cyclically up to --mmax.
        #[arg(long)]
        prefix: String,
        #[arg(long)]
        mmax: Option<usize>,
        /// Trace the Green potential of the input instead of the input.
        #[arg(long)]
        green: bool,
    },
    /// Solve the Dirichlet problem with source f and boundary data zeta.
    SolveBvp {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        zeta: PathBuf,
        #[arg(long)]
        sample_depth: Option<usize>,
        /// Verify the interior identity on levels 1..=mmax.
        #[arg(long)]
        verify: Option<usize>,
    },
    /// Run the whole acceptance suite.
    ReportAll {
        /// Restrict to these criteria.
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
