//! Demo computations behind the bindings.

use std::fmt;

use logsp::manifolds::{log_spaced, nehari_fiber, np_fiber};
use logsp::solver::minimize;
use logsp::{GridFunction, GridSpec, KernelTables, PotentialModel, Problem, ProblemParams, SolveConfig};

/// Grid used for fiber scans.
pub const SCAN_HALF_WIDTH: f64 = 8.0;
pub const SCAN_N: usize = 64;
pub const SCAN_POINTS: usize = 200;
/// Largest ground-state grid the page offers.
pub const MAX_N: usize = 128;

#[derive(Debug)]
pub enum DemoError {
    Input(String),
    Core(logsp::Error),
}

impl fmt::Display for DemoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DemoError::Input(s) => f.write_str(s),
            DemoError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<logsp::Error> for DemoError {
    fn from(e: logsp::Error) -> Self {
        DemoError::Core(e)
    }
}

pub type Result<T> = std::result::Result<T, DemoError>;

pub fn potential(name: &str) -> Result<PotentialModel> {
    match name {
        "well1" => Ok(PotentialModel::well1()),
        "well2" => Ok(PotentialModel::well2()),
        "constant" => Ok(PotentialModel::constant(1.0)?),
        other => Err(DemoError::Input(format!("unknown potential {other:?}"))),
    }
}

pub fn potential_profile(name: &str, radius: f64, samples: usize) -> Result<Vec<f64>> {
    let v = potential(name)?;
    if !(radius > 0.0 && radius.is_finite()) || samples < 2 {
        return Err(DemoError::Input("need radius > 0 and at least 2 samples".into()));
    }
    let dr = radius / (samples - 1) as f64;
    Ok((0..samples).map(|i| v.value(i as f64 * dr, 0.0)).collect())
}

pub struct ScanRequest<'a> {
    pub family: &'a str,
    pub potential: &'a str,
    pub p: f64,
    pub b: f64,
    pub amplitude: f64,
    pub t_max: f64,
}

#[derive(Clone, Debug)]
pub struct FiberCurve {
    pub t: Vec<f64>,
    pub energy: Vec<f64>,
    pub derivative: Vec<f64>,
    pub sign_changes: usize,
}

fn problem(spec: GridSpec, potential_name: &str, p: f64, b: f64) -> Result<Problem> {
    let params = ProblemParams::new(p, b)?;
    Ok(Problem::new(params, potential(potential_name)?, KernelTables::shared(spec)))
}

pub fn fiber_scan(req: &ScanRequest<'_>) -> Result<FiberCurve> {
    let spec = GridSpec::new(SCAN_HALF_WIDTH, SCAN_N)?;
    let pr = problem(spec, req.potential, req.p, req.b)?;
    let u = GridFunction::gaussian(spec, 1.0, req.amplitude, [0.0, 0.0])?;
    let ts = log_spaced(1.0 / req.t_max, req.t_max, SCAN_POINTS)?;
    let scan = match req.family {
        "nehari" => nehari_fiber(&pr, &u, &ts)?,
        "pohozaev" => np_fiber(&pr, &u, &ts)?,
        other => return Err(DemoError::Input(format!("unknown family {other:?}"))),
    };
    Ok(FiberCurve {
        sign_changes: scan.sign_changes(),
        t: scan.t_values,
        energy: scan.i_values,
        derivative: scan.derivative_values,
    })
}

#[derive(Clone, Debug)]
pub struct GroundState {
    pub n: usize,
    pub half_width: f64,
    pub values: Vec<f64>,
    pub level: f64,
    pub converged: bool,
    pub iterations: usize,
    pub method: String,
    pub residuals: Vec<f64>,
}

pub fn ground_state(potential_name: &str, p: f64, b: f64, n: usize, half_width: f64) -> Result<GroundState> {
    if n > MAX_N {
        return Err(DemoError::Input(format!("n = {n} is too large for the page (at most {MAX_N})")));
    }
    let spec = GridSpec::new(half_width, n)?;
    let pr = problem(spec, potential_name, p, b)?;
    let result = minimize(&SolveConfig::default(), &pr)?;
    Ok(GroundState {
        n,
        half_width,
        values: result.state.values().to_vec(),
        level: result.level,
        converged: result.converged,
        iterations: result.iterations,
        method: format!("{:?}", result.method).to_lowercase(),
        residuals: result.residual_history,
    })
}
