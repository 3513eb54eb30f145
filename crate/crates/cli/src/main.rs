use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hyperres::hessian::Method;
use hyperres_cli::{run, Command, Format, RunConfig, TargetKind};

/// Resistance distance, Kirchhoff index and their edge-weight derivatives.
#[derive(Parser)]
#[command(name = "hyperres", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Resistance, Kirchhoff index, biharmonic distance and Laplacian spectrum.
    Analyze(Common),
    /// Edge-weight Hessian with extreme eigenvalues and a finite-difference cross-check.
    Hessian(Common),
    /// Eigenvalue bounds and strong-convexity certificate against observed Hessian spectra.
    Bounds(Common),
    /// Self-verification: Penrose residuals, pseudoinverse identity, L1 norm sandwich.
    Check(Common),
    /// Hyper-dual resistance and Kirchhoff reports along a weight perturbation.
    Perturb(Common),
}

#[derive(Args)]
struct Common {
    /// Graph file: vertex count, then "u v w" lines (1-based vertices).
    #[arg(long)]
    graph: PathBuf,
    /// Perturbation file: "u v dw" lines; unlisted edges get dw = 0.
    #[arg(long)]
    perturbation: Option<PathBuf>,
    /// Vertex pair (1-based).
    #[arg(long, num_args = 2, value_names = ["I", "J"])]
    pair: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
    /// Override the Laplacian rank tolerance.
    #[arg(long)]
    rank_tol: Option<f64>,
    /// Finite-difference step for the Hessian oracle.
    #[arg(long)]
    fd_step: Option<f64>,
    #[arg(long, value_enum, default_value_t = MethodArg::ClosedForm)]
    method: MethodArg,
    #[arg(long, value_enum, default_value_t = TargetArg::Kirchhoff)]
    target: TargetArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    ClosedForm,
    Polarization,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    Resistance,
    Kirchhoff,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (command, common) = match cli.command {
        Cmd::Analyze(c) => (Command::Analyze, c),
        Cmd::Hessian(c) => (Command::Hessian, c),
        Cmd::Bounds(c) => (Command::Bounds, c),
        Cmd::Check(c) => (Command::Check, c),
        Cmd::Perturb(c) => (Command::Perturb, c),
    };
    let config = RunConfig {
        command,
        graph_path: common.graph,
        perturbation_path: common.perturbation,
        pair: common.pair.map(|p| (p[0], p[1])),
        format: match common.format {
            FormatArg::Text => Format::Text,
            FormatArg::Json => Format::Json,
        },
        rank_tol: common.rank_tol,
        fd_step: common.fd_step,
        method: match common.method {
            MethodArg::ClosedForm => Method::ClosedForm,
            MethodArg::Polarization => Method::Polarization,
        },
        target: match common.target {
            TargetArg::Resistance => TargetKind::Resistance,
            TargetArg::Kirchhoff => TargetKind::Kirchhoff,
        },
    };
    let code = run(&config, &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(code as u8)
}
