use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use logsp::manifolds::{log_spaced, nehari_fiber, np_fiber, Family};
use logsp::potential::check_conditions;
use logsp::solver::{compare_levels, minimize};
use logsp::verify::run_suite;
use logsp::{io, Problem};
use serde_json::json;

use crate::config::{Format, Run};
use crate::{CliError, Status};

/// Rays per direction sweep in `check-potential`.
const RAY_SAMPLES: usize = 64;

fn status(ok: bool) -> Status {
    if ok {
        Status::Success
    } else {
        Status::Negative
    }
}

fn write_file(dir: &Path, name: &str, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), bytes)?;
    Ok(())
}

/// Minimizes on the Nehari manifold (`p >= 4`) or the Nehari-Pohozaev set
/// (`3 <= p < 4`) and writes the requested artifacts plus the effective
/// config to `out`.
pub fn solve(run: &Run, out: &Path, w: &mut impl Write) -> Result<Status, CliError> {
    let result = minimize(&run.config.solver, &run.problem)?;
    let formats = &run.config.output.formats;
    if formats.contains(&Format::Csv) {
        write_file(out, "summary.csv", result.summary_csv())?;
        write_file(out, "residuals.csv", result.residual_csv())?;
    }
    if formats.contains(&Format::Field) {
        fs::create_dir_all(out)?;
        io::write_field(&out.join("state.logsp1"), &result.state)?;
    }
    if formats.contains(&Format::Json) {
        let doc = json!({
            "method": result.method,
            "level": result.level,
            "converged": result.converged,
            "iterations": result.iterations,
            "manifold_residual": result.manifold_residual,
            "pohozaev_residual": result.pohozaev_residual,
            "sign_changed": result.sign_changed,
            "report": result.report,
            "residual_history": result.residual_history,
        });
        write_file(out, "result.json", serde_json::to_string_pretty(&doc).expect("finite json"))?;
    }
    let mut effective = run.config.clone();
    effective.output.directory = out.to_path_buf();
    write_file(out, "config.json", effective.to_json())?;

    writeln!(w, "method      {:?}", result.method)?;
    writeln!(w, "level       {:.15e}", result.level)?;
    writeln!(w, "converged   {} after {} iterations", result.converged, result.iterations)?;
    writeln!(w, "residual    {:.3e}", result.residual_history.last().copied().unwrap_or(f64::NAN))?;
    writeln!(w, "constraint  {:.3e}", result.manifold_residual)?;
    writeln!(w, "pohozaev    {:.3e}", result.pohozaev_residual)?;
    writeln!(w, "one-signed  {}", !result.sign_changed)?;
    writeln!(w, "output      {}", out.display())?;
    Ok(status(result.converged))
}

#[derive(Clone, Copy, Debug)]
pub struct ScanArgs {
    pub family: Family,
    pub t_min: f64,
    pub t_max: f64,
    pub count: usize,
}

/// Writes the fiber of the configured seed as `fiber_<family>.csv`.
pub fn scan(run: &Run, args: ScanArgs, out: &Path, w: &mut impl Write) -> Result<Status, CliError> {
    if !(args.t_min > 0.0 && args.t_min < args.t_max && args.t_max.is_finite()) {
        return Err(CliError::Config(format!(
            "--t-min/--t-max: need 0 < t_min < t_max, got {} and {}",
            args.t_min, args.t_max
        )));
    }
    if args.count < 2 {
        return Err(CliError::Config(format!("--count: need at least 2 points, got {}", args.count)));
    }
    let ts = log_spaced(args.t_min, args.t_max, args.count)?;
    let u = run.config.solver.seed.realize(run.spec)?;
    let scan = match args.family {
        Family::Nehari => nehari_fiber(&run.problem, &u, &ts)?,
        Family::Pohozaev => np_fiber(&run.problem, &u, &ts)?,
    };
    let name = match args.family {
        Family::Nehari => "fiber_nehari.csv",
        Family::Pohozaev => "fiber_pohozaev.csv",
    };
    write_file(out, name, scan.to_csv())?;
    let changes = scan.sign_changes();
    writeln!(w, "{name}: {} points, {changes} derivative sign change(s)", args.count)?;
    if let Some(k) = scan.derivative_values.iter().position(|&d| d < 0.0) {
        if k > 0 {
            writeln!(w, "maximizer in [{:.6e}, {:.6e}]", scan.t_values[k - 1], scan.t_values[k])?;
        }
    }
    Ok(Status::Success)
}

pub fn check_potential(run: &Run, w: &mut impl Write) -> Result<Status, CliError> {
    let report = check_conditions(run.problem.potential(), &run.spec, RAY_SAMPLES)?;
    writeln!(w, "{report}")?;
    writeln!(w, "overall: {}", if report.all_passed() { "PASS" } else { "FAIL" })?;
    Ok(status(report.all_passed()))
}

/// Runs the identity suite. `perturb_kernel` shifts the origin entry of
/// the log kernel table, which the suite must detect.
pub fn verify(run: &Run, perturb_kernel: Option<f64>, w: &mut impl Write) -> Result<Status, CliError> {
    let report = match perturb_kernel {
        None => run_suite(&run.problem)?,
        Some(delta) => {
            let tables = Arc::new(run.problem.tables().with_perturbed_origin(delta));
            let problem = Problem::new(*run.problem.params(), *run.problem.potential(), tables);
            run_suite(&problem)?
        }
    };
    writeln!(w, "{report}")?;
    Ok(status(report.all_passed()))
}

pub fn compare(run: &Run, w: &mut impl Write) -> Result<Status, CliError> {
    let cmp = compare_levels(&run.config.solver, &run.problem)?;
    writeln!(w, "m        {:.15e}", cmp.m_well)?;
    writeln!(w, "m_inf    {:.15e}", cmp.m_limit)?;
    writeln!(w, "margin   {:.6e}", cmp.margin)?;
    Ok(status(cmp.margin > 0.0))
}
