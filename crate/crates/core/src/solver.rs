//! Ground states by retraction-based preconditioned descent of `I` on the
//! Nehari manifold (`p >= 4`) or the Nehari–Pohozaev manifold (`p >= 3`).
//!
//! Every trial point `u - α d` is pulled back onto the manifold through the
//! maximizer of its fiber, so `α ↦ I(R(u - α d))` has slope `-⟨I'(u), d⟩` at
//! zero and plain backtracking applies.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::energy::{EnergyReport, Problem, ProblemParams};
use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec};
use crate::logkernel::KernelTables;
use crate::manifolds::{self, Family};
use crate::potential::{check_conditions, PotentialModel};

const ARMIJO_C: f64 = 1e-4;
const ENERGY_NOISE: f64 = 1e-13;
const MIN_STEP: f64 = 1e-14;
const PROJECTION_TOL: f64 = 1e-12;
/// Largest constraint defect a re-evaluated projection may show.
const RESOLUTION_TOL: f64 = 1e-6;
const REPROJECTIONS: usize = 4;

/// Initial state of a solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Seed {
    /// `amplitude * exp(-|x - center|² / (2 width²))`.
    Gaussian {
        width: f64,
        amplitude: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    /// A field stored in the `LOGSP1` format.
    File { path: PathBuf },
}

impl Default for Seed {
    fn default() -> Self {
        Seed::Gaussian {
            width: 1.0,
            amplitude: 1.0,
            center: [0.0, 0.0],
        }
    }
}

impl Seed {
    pub fn realize(&self, spec: GridSpec) -> Result<GridFunction> {
        let u = match self {
            Seed::Gaussian {
                width,
                amplitude,
                center,
            } => GridFunction::gaussian(spec, *width, *amplitude, *center)?,
            Seed::File { path } => {
                let u = crate::io::read_field(path)?;
                if u.spec().n() != spec.n() || u.spec().half_width() != spec.half_width() {
                    return Err(Error::SpecMismatch);
                }
                u
            }
        };
        if u.is_zero() {
            return Err(Error::ZeroField);
        }
        Ok(u)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveConfig {
    pub seed: Seed,
    pub max_iter: usize,
    pub step0: f64,
    /// Bound on `|I'(u)|_2 / ‖u‖`.
    pub tol_grad: f64,
    /// Bound on `|I'(u)u| / ‖u‖²` or `|J(u)| / ‖u‖²`.
    pub tol_manifold: f64,
    pub precondition: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            seed: Seed::default(),
            max_iter: 2000,
            step0: 1.0,
            tol_grad: 1e-7,
            tol_manifold: 1e-9,
            precondition: true,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter < 1 {
            return Err(Error::param("max_iter", "must be at least 1"));
        }
        for (name, v) in [("step0", self.step0), ("tol_grad", self.tol_grad), ("tol_manifold", self.tol_manifold)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        if let Seed::Gaussian { width, amplitude, center } = self.seed {
            if !(width > 0.0 && width.is_finite()) {
                return Err(Error::param("seed.width", format!("must be positive, got {width}")));
            }
            if !(amplitude != 0.0 && amplitude.is_finite()) {
                return Err(Error::param("seed.amplitude", "must be nonzero and finite"));
            }
            if !center.iter().all(|c| c.is_finite()) {
                return Err(Error::param("seed.center", "must be finite"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub method: Family,
    pub state: GridFunction,
    pub report: EnergyReport,
    pub level: f64,
    /// `|I'(u)|_2 / ‖u‖` before each step.
    pub residual_history: Vec<f64>,
    /// Relative constraint residual at the final state.
    pub manifold_residual: f64,
    /// `|P(u)| / (‖u‖² + |N0(u)|)`.
    pub pohozaev_residual: f64,
    pub sign_changed: bool,
    pub converged: bool,
    pub iterations: usize,
}

impl SolveResult {
    /// `iteration,residual` rows.
    pub fn residual_csv(&self) -> String {
        let mut s = String::from("iteration,residual\n");
        for (i, r) in self.residual_history.iter().enumerate() {
            s.push_str(&format!("{i},{r:e}\n"));
        }
        s
    }

    pub fn summary_csv(&self) -> String {
        format!(
            "method,level,converged,iterations,final_residual,manifold_residual,pohozaev_residual,sign_changed\n{},{:e},{},{},{:e},{:e},{:e},{}\n",
            match self.method {
                Family::Nehari => "nehari",
                Family::Pohozaev => "pohozaev",
            },
            self.level,
            self.converged,
            self.iterations,
            self.residual_history.last().copied().unwrap_or(f64::NAN),
            self.manifold_residual,
            self.pohozaev_residual,
            self.sign_changed
        )
    }
}

/// Ground levels with and without the well.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelComparison {
    pub m_well: f64,
    pub m_limit: f64,
    pub margin: f64,
}

/// `(-Δ + V0)^{-1} g` in Fourier space.
pub fn precondition_gradient(g: &GridFunction, pot: &PotentialModel) -> GridFunction {
    let v0 = pot.v0();
    g.fourier_multiply(|kx, ky| 1.0 / (kx * kx + ky * ky + v0))
}

/// `min u < -δ` and `max u > δ` with `δ = 1e-8 max|u|`.
pub fn sign_changed(u: &GridFunction) -> bool {
    let delta = 1e-8 * u.max_abs();
    let (lo, hi) = u
        .values()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    lo < -delta && hi > delta
}

/// Largest over sampled radii of the angular standard deviation of the
/// band-limited interpolant about `center`, relative to `max|u|`.
pub fn angular_deviation(u: &GridFunction, center: [f64; 2], radii: &[f64], angles: usize) -> f64 {
    let it = u.spectral_interpolator();
    let amp = u.max_abs();
    if amp == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0f64;
    for &r in radii {
        let vals: Vec<f64> = (0..angles)
            .map(|k| {
                let th = 2.0 * PI * k as f64 / angles as f64;
                it.eval(center[0] + r * th.cos(), center[1] + r * th.sin())
            })
            .collect();
        let mean = vals.iter().sum::<f64>() / angles as f64;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / angles as f64;
        worst = worst.max(var.sqrt() / amp);
    }
    worst
}

/// Center of mass of `u²`.
pub fn mass_center(u: &GridFunction) -> [f64; 2] {
    let spec = u.spec();
    let (mut m, mut x, mut y) = (0.0, 0.0, 0.0);
    for (k, v) in u.values().iter().enumerate() {
        let (px, py) = spec.position(k);
        let w = v * v;
        m += w;
        x += w * px;
        y += w * py;
    }
    if m == 0.0 {
        [0.0, 0.0]
    } else {
        [x / m, y / m]
    }
}

struct Retraction<'a> {
    problem: &'a Problem,
    family: Family,
}

impl Retraction<'_> {
    /// Projects `v`, re-projecting the resampled result while its own
    /// constraint defect exceeds [`RESOLUTION_TOL`].
    fn apply(&self, v: &GridFunction) -> Result<(GridFunction, EnergyReport)> {
        let mut state = v.clone();
        let mut report = self.problem.energy(v)?;
        for _ in 0..REPROJECTIONS {
            let proj = match self.family {
                Family::Nehari => manifolds::nehari_project_with(self.problem, &state, &report, PROJECTION_TOL)?,
                Family::Pohozaev => manifolds::np_project_with(self.problem, &state, &report, PROJECTION_TOL)?,
            };
            state = proj.projected.without_analytic();
            report = self.problem.energy(&state)?;
            let finite = report.fields().iter().all(|x| x.is_finite());
            if state.is_zero() || !finite {
                return Err(Error::Unresolved { t: proj.t_star });
            }
            if self.constraint(&report) <= RESOLUTION_TOL {
                return Ok((state, report));
            }
            if proj.t_star == 1.0 {
                break;
            }
        }
        Err(Error::Unresolved { t: f64::NAN })
    }

    fn constraint(&self, r: &EnergyReport) -> f64 {
        match self.family {
            Family::Nehari => r.Ipair.abs() / r.norm_sq,
            Family::Pohozaev => r.J.abs() / r.norm_sq,
        }
    }
}

/// The `c > 0` with `J(c u) = 0`, which puts a seed on the constraint by
/// scaling alone: `J(cu) = c²A + c⁴D - c^p E` with the pieces read off the
/// report of `u`.
fn fit_amplitude(r: &EnergyReport, params: &ProblemParams) -> Option<f64> {
    let p = params.p();
    let e = 2.0 * params.b() * (p - 1.0) / p * r.lp;
    let d = r.N0 - r.l2_sq * r.l2_sq / (8.0 * PI);
    let a = r.J - d + e;
    if !(a > 0.0) {
        return None;
    }
    let f = |c: f64| a + c * c * d - c.powf(p - 2.0) * e;
    let (mut lo, mut hi) = (1.0, 1.0);
    for _ in 0..60 {
        if f(hi) < 0.0 {
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..60 {
        if f(lo) > 0.0 {
            break;
        }
        hi = lo;
        lo *= 0.5;
    }
    if !(f(lo) > 0.0 && f(hi) < 0.0) {
        return None;
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some((lo * hi).sqrt())
}

/// Backtracking from a warm-started step along `dir`; returns the retracted
/// point, its report and residual, and the accepted step.
#[allow(clippy::too_many_arguments)]
fn line_search(
    problem: &Problem,
    retraction: &Retraction<'_>,
    config: &SolveConfig,
    u: &GridFunction,
    report: &EnergyReport,
    g: &GridFunction,
    gnorm: f64,
    dir: &GridFunction,
    last_step: f64,
) -> Result<Option<(GridFunction, EnergyReport, GridFunction, f64)>> {
    let slope = -g.inner(dir)?;
    let noise = ENERGY_NOISE * (1.0 + report.I.abs());
    // warm start: one doubling past the last accepted step
    let mut alpha = (2.0 * last_step).min(config.step0);
    while alpha >= MIN_STEP {
        let trial = u.axpy(alpha, dir)?;
        if let Ok((w, rw)) = retraction.apply(&trial) {
            let predicted = ARMIJO_C * alpha * slope;
            if predicted > noise {
                if rw.I <= report.I - predicted {
                    let gw = problem.residual(&w)?;
                    return Ok(Some((w, rw, gw, alpha)));
                }
            } else if rw.I <= report.I + noise {
                // energy differences are roundoff here; demand a smaller residual instead
                let gw = problem.residual(&w)?;
                if gw.lp_norm_p(2.0)?.sqrt() < gnorm {
                    return Ok(Some((w, rw, gw, alpha)));
                }
            }
        }
        alpha *= 0.5;
    }
    Ok(None)
}

fn descend(config: &SolveConfig, problem: &Problem, family: Family) -> Result<SolveResult> {
    config.validate()?;
    let seed = config.seed.realize(*problem.spec())?;
    let retraction = Retraction { problem, family };
    let seed = match family {
        Family::Nehari => seed,
        Family::Pohozaev => {
            let r = problem.energy(&seed)?;
            match fit_amplitude(&r, problem.params()) {
                Some(c) => seed.scale(c),
                None => seed,
            }
        }
    };
    let (mut u, mut report) = retraction.apply(&seed)?;
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut last_step = config.step0;
    // previous gradient, preconditioned gradient and search direction
    let mut prev: Option<(GridFunction, GridFunction, GridFunction)> = None;
    let mut g = problem.residual(&u)?;
    loop {
        let gnorm = g.lp_norm_p(2.0)?.sqrt();
        let rel = gnorm / report.norm_sq.sqrt();
        history.push(rel);
        if rel <= config.tol_grad && retraction.constraint(&report) <= config.tol_manifold {
            converged = true;
            break;
        }
        if iterations >= config.max_iter {
            break;
        }
        iterations += 1;
        let pg = if config.precondition {
            precondition_gradient(&g, problem.potential())
        } else {
            g.clone()
        };
        let sd = pg.scale(-1.0);
        // Polak-Ribiere+ direction, restarted when not downhill
        let mut cg = None;
        if let Some((g0, pg0, d0)) = &prev {
            let beta = (g.inner(&pg)? - g.inner(pg0)?) / g0.inner(pg0)?;
            if beta > 0.0 {
                let cand = sd.axpy(beta, d0)?;
                if g.inner(&cand)? < 0.0 {
                    cg = Some(cand);
                }
            }
        }
        let mut accepted = None;
        // a failed conjugate search falls back to the plain direction from a fresh step
        let tries = cg.map(|d| (d, last_step)).into_iter().chain([(sd, 0.5 * config.step0)]);
        for (dir, warm) in tries {
            if let Some((w, rw, gw, alpha)) = line_search(problem, &retraction, config, &u, &report, &g, gnorm, &dir, warm)? {
                accepted = Some((w, rw, gw, alpha, dir));
                break;
            }
        }
        match accepted {
            Some((w, rw, gw, alpha, dir)) => {
                last_step = alpha;
                u = w;
                report = rw;
                prev = Some((std::mem::replace(&mut g, gw), pg, dir));
            }
            None => break,
        }
    }
    let scale = report.norm_sq + report.N0.abs();
    Ok(SolveResult {
        method: family,
        level: report.I,
        manifold_residual: retraction.constraint(&report),
        pohozaev_residual: report.P.abs() / scale,
        sign_changed: sign_changed(&u),
        converged,
        iterations,
        residual_history: history,
        report,
        state: u,
    })
}

/// Minimizes `I` on `{I'(u)u = 0}`; needs `p >= 4` and a seed with a fiber
/// maximizer.
pub fn minimize_nehari(config: &SolveConfig, problem: &Problem) -> Result<SolveResult> {
    if problem.params().p() < 4.0 {
        return Err(Error::param(
            "p",
            format!("Nehari minimization needs p >= 4, got {}", problem.params().p()),
        ));
    }
    descend(config, problem, Family::Nehari)
}

/// Minimizes `I` on `{J(u) = 0}`; needs `p >= 3` and a potential passing
/// the ray-monotonicity and upper-bound conditions (or a constant one).
pub fn minimize_np(config: &SolveConfig, problem: &Problem) -> Result<SolveResult> {
    if problem.params().p() < 3.0 {
        return Err(Error::param(
            "p",
            format!("Nehari-Pohozaev minimization needs p >= 3, got {}", problem.params().p()),
        ));
    }
    let pot = problem.potential();
    if !pot.is_constant() {
        let report = check_conditions(pot, problem.spec(), 64)?;
        if !(report.v2.passed && report.v3.passed) {
            return Err(Error::ConditionFailed(format!(
                "{} fails the ray-monotonicity or upper-bound condition",
                pot.name()
            )));
        }
    }
    descend(config, problem, Family::Pohozaev)
}

/// The manifold matching `p`: Nehari from 4 up, Nehari–Pohozaev below.
pub fn minimize(config: &SolveConfig, problem: &Problem) -> Result<SolveResult> {
    if problem.params().p() >= 4.0 {
        minimize_nehari(config, problem)
    } else {
        minimize_np(config, problem)
    }
}

/// Ground state of `V ≡ V∞`.
pub fn solve_limit_problem(
    config: &SolveConfig,
    params: ProblemParams,
    vinf: f64,
    tables: Arc<KernelTables>,
) -> Result<SolveResult> {
    let problem = Problem::new(params, PotentialModel::constant(vinf)?, tables);
    minimize(config, &problem)
}

/// Runs the well and limit solves, concurrently when possible.
pub fn compare_levels(config: &SolveConfig, problem: &Problem) -> Result<LevelComparison> {
    let pot = problem.potential();
    if pot.is_constant() || !pot.is_well() {
        return Err(Error::ConditionFailed(format!(
            "{} is not a potential well (need V0 < Vinf)",
            pot.name()
        )));
    }
    let limit = problem.limit_problem()?;
    let (well, lim) = join(|| minimize(config, problem), || minimize(config, &limit));
    let (well, lim) = (well?, lim?);
    if !well.converged {
        return Err(Error::NotConverged("well"));
    }
    if !lim.converged {
        return Err(Error::NotConverged("limit"));
    }
    Ok(LevelComparison {
        m_well: well.level,
        m_limit: lim.level,
        margin: lim.level - well.level,
    })
}

fn join<A: Send, B: Send>(a: impl FnOnce() -> A + Send, b: impl FnOnce() -> B + Send) -> (A, B) {
    #[cfg(feature = "parallel")]
    {
        rayon::join(a, b)
    }
    #[cfg(not(feature = "parallel"))]
    (a(), b())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preconditioner_is_diagonal_in_fourier_space() {
        let spec = GridSpec::new(8.0, 32).unwrap();
        let z = GridFunction::zeros(spec);
        assert!(precondition_gradient(&z, &PotentialModel::well1()).is_zero());
        let k = 2.0 * PI / 16.0 * 3.0;
        let mode = GridFunction::sample(spec, move |x, y| (k * x).cos() * (k * y).cos()).unwrap();
        let out = precondition_gradient(&mode, &PotentialModel::well1());
        let expect = 1.0 / (2.0 * k * k + 0.5);
        for (a, b) in out.values().iter().zip(mode.values()) {
            assert!((a - expect * b).abs() < 1e-12);
        }
    }

    #[test]
    fn sign_detection() {
        let spec = GridSpec::new(8.0, 32).unwrap();
        let g = GridFunction::gaussian(spec, 1.0, 1.0, [0.0, 0.0]).unwrap();
        assert!(!sign_changed(&g));
        assert!(!sign_changed(&g.scale(-1.0)));
        let odd = GridFunction::sample(spec, |x, y| x * (-(x * x + y * y)).exp()).unwrap();
        assert!(sign_changed(&odd));
    }

    #[test]
    fn config_validation() {
        let mut c = SolveConfig::default();
        assert!(c.validate().is_ok());
        c.max_iter = 0;
        assert!(c.validate().is_err());
        c = SolveConfig {
            tol_grad: -1.0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        c = SolveConfig {
            seed: Seed::Gaussian {
                width: 1.0,
                amplitude: 0.0,
                center: [0.0, 0.0],
            },
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn constant_potential_is_not_compared() {
        let spec = GridSpec::new(8.0, 32).unwrap();
        let pr = Problem::new(
            ProblemParams::new(4.0, 1.0).unwrap(),
            PotentialModel::constant(1.0).unwrap(),
            KernelTables::shared(spec),
        );
        assert!(compare_levels(&SolveConfig::default(), &pr).is_err());
    }
}
