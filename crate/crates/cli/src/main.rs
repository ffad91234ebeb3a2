use std::io::stdout;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use logsp::manifolds::Family;
use logsp_cli::{CliError, RunConfig, ScanArgs, Status};

#[derive(Parser)]
#[command(name = "logsp", version, about = "Ground states of the planar logarithmic Schrodinger-Poisson system")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "LOGSP_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding `output.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Nehari,
    Pohozaev,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize the energy and write level, residual history and state.
    Solve(Common),
    /// Tabulate the energy along the fiber of the configured seed.
    Scan {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "nehari")]
        family: FamilyArg,
        #[arg(long, default_value_t = 0.01)]
        t_min: f64,
        #[arg(long, default_value_t = 100.0)]
        t_max: f64,
        #[arg(long, default_value_t = 400)]
        count: usize,
    },
    /// Check the well conditions of the configured potential.
    CheckPotential(Common),
    /// Run the identity suite.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, hide = true)]
        perturb_kernel: Option<f64>,
    },
    /// Compare the well level with the level of the limit problem.
    Compare(Common),
}

fn load(common: &Common) -> Result<(logsp_cli::Run, PathBuf), CliError> {
    let run = RunConfig::load(&common.config)?.validate()?;
    let out = common.out.clone().unwrap_or_else(|| run.config.output.directory.clone());
    Ok((run, out))
}

fn dispatch(cli: Cli) -> Result<Status, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads: must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let mut w = stdout().lock();
    match cli.command {
        Command::Solve(c) => {
            let (run, out) = load(&c)?;
            logsp_cli::solve(&run, &out, &mut w)
        }
        Command::Scan {
            common,
            family,
            t_min,
            t_max,
            count,
        } => {
            let (run, out) = load(&common)?;
            let family = match family {
                FamilyArg::Nehari => Family::Nehari,
                FamilyArg::Pohozaev => Family::Pohozaev,
            };
            logsp_cli::scan(&run, ScanArgs { family, t_min, t_max, count }, &out, &mut w)
        }
        Command::CheckPotential(c) => logsp_cli::check_potential(&load(&c)?.0, &mut w),
        Command::Verify { common, perturb_kernel } => logsp_cli::verify(&load(&common)?.0, perturb_kernel, &mut w),
        Command::Compare(c) => logsp_cli::compare(&load(&c)?.0, &mut w),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    logsp_cli::exit_code(dispatch(cli))
}
