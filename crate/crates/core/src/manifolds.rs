//! Fiber maps through a state and the projections onto the Nehari manifold
//! `{I'(u)u = 0}` (amplitude fibers `t u`) and the Nehari–Pohozaev manifold
//! `{J(u) = 0}` (dilation fibers `Q(t, u) = t² u(t ·)`).
//!
//! Both fibers are closed-form in `t` given one [`EnergyReport`] of `u`, plus
//! potential integrals at `x / t` for the dilation fiber.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::energy::{EnergyReport, Problem, ProblemParams, ScaledWeight};
use crate::error::{Error, Result};
use crate::grid::GridFunction;

/// Relative tolerance of projections unless overridden.
pub const DEFAULT_TOL: f64 = 1e-10;

const T_MIN: f64 = 1e-8;
const T_MAX: f64 = 1e8;
const MAX_BISECTIONS: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Nehari,
    Pohozaev,
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nehari" => Ok(Family::Nehari),
            "pohozaev" => Ok(Family::Pohozaev),
            other => Err(Error::param("family", format!("expected nehari or pohozaev, got {other:?}"))),
        }
    }
}

/// `I` and its fiber derivative sampled along a fiber.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiberScan {
    pub family: Family,
    pub t_values: Vec<f64>,
    pub i_values: Vec<f64>,
    /// `h'(t)` for the Nehari fiber, `J(Q(t, u))` for the Pohozaev fiber.
    pub derivative_values: Vec<f64>,
}

impl FiberScan {
    /// Number of strict sign changes of the derivative, zeros skipped.
    pub fn sign_changes(&self) -> usize {
        let mut last = 0.0f64;
        let mut count = 0;
        for &d in &self.derivative_values {
            if d == 0.0 {
                continue;
            }
            if last != 0.0 && last.signum() != d.signum() {
                count += 1;
            }
            last = d;
        }
        count
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,I,deriv\n");
        for ((t, i), d) in self.t_values.iter().zip(&self.i_values).zip(&self.derivative_values) {
            let _ = writeln!(s, "{t:e},{i:e},{d:e}");
        }
        s
    }
}

/// `count` log-spaced points in `[t_min, t_max]`.
pub fn log_spaced(t_min: f64, t_max: f64, count: usize) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_min < t_max && t_max.is_finite()) {
        return Err(Error::param("t range", format!("need 0 < t_min < t_max, got [{t_min}, {t_max}]")));
    }
    if count < 2 {
        return Err(Error::param("count", format!("need at least 2 points, got {count}")));
    }
    let (a, b) = (t_min.ln(), t_max.ln());
    Ok((0..count)
        .map(|i| match i {
            0 => t_min,
            i if i == count - 1 => t_max,
            i => (a + (b - a) * i as f64 / (count - 1) as f64).exp(),
        })
        .collect())
}

fn check_t_values(t: &[f64]) -> Result<()> {
    if t.is_empty() || t.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::param("t_values", "need nonempty positive finite values"));
    }
    if t.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("t_values", "must be strictly increasing"));
    }
    Ok(())
}

/// Outcome of a projection onto a manifold.
#[derive(Clone, Debug)]
pub struct ProjectionResult {
    pub t_star: f64,
    pub projected: GridFunction,
    /// `|h'(t*)|` or `|J(Q(t*, u))|`.
    pub residual: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
}

/// `h(t) = I(t u) = t²/2 ‖u‖² + t⁴/4 N0 - b tᵖ/p |u|ₚᵖ`.
#[derive(Clone, Copy, Debug)]
pub struct NehariFiber {
    a: f64,
    n0: f64,
    c: f64,
    p: f64,
    b: f64,
}

impl NehariFiber {
    pub fn from_report(report: &EnergyReport, params: &ProblemParams) -> Self {
        Self {
            a: report.norm_sq,
            n0: report.N0,
            c: report.lp,
            p: params.p(),
            b: params.b(),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        let t2 = t * t;
        0.5 * t2 * self.a + 0.25 * t2 * t2 * self.n0 - self.b * t.powf(self.p) / self.p * self.c
    }

    /// `h'(t) = t g(t)`.
    pub fn derivative(&self, t: f64) -> f64 {
        t * self.g(t)
    }

    /// `g(t) = ‖u‖² + t² N0 - b t^{p-2} |u|ₚᵖ`.
    fn g(&self, t: f64) -> f64 {
        self.a + t * t * self.n0 - self.b * t.powf(self.p - 2.0) * self.c
    }

    fn g_prime(&self, t: f64) -> f64 {
        2.0 * t * self.n0 - self.b * (self.p - 2.0) * t.powf(self.p - 3.0) * self.c
    }

    /// Closed-form maximizer for `p = 4`: `t*² = ‖u‖² / (b|u|₄⁴ - N0)`.
    pub fn closed_form_p4(&self) -> Option<f64> {
        let d = self.b * self.c - self.n0;
        (self.p == 4.0 && d > 0.0).then(|| (self.a / d).sqrt())
    }
}

/// Whether `t ↦ I(t u)` has an interior maximizer: for `p = 4` iff
/// `N0 < b |u|₄⁴`, for `p > 4` iff `N0 < 0` or `b > 0`. Below 4 the
/// criterion `N0 < 0` is only sufficient for existence.
pub fn nehari_condition(report: &EnergyReport, params: &ProblemParams) -> bool {
    let (p, b) = (params.p(), params.b());
    if p == 4.0 {
        report.N0 - b * report.lp < 0.0
    } else if p > 4.0 {
        report.N0 < 0.0 || b > 0.0
    } else {
        report.N0 < 0.0
    }
}

pub fn nehari_fiber(problem: &Problem, u: &GridFunction, t_values: &[f64]) -> Result<FiberScan> {
    check_t_values(t_values)?;
    if u.is_zero() {
        return Err(Error::ZeroField);
    }
    let fiber = NehariFiber::from_report(&problem.energy(u)?, problem.params());
    Ok(FiberScan {
        family: Family::Nehari,
        t_values: t_values.to_vec(),
        i_values: t_values.iter().map(|&t| fiber.value(t)).collect(),
        derivative_values: t_values.iter().map(|&t| fiber.derivative(t)).collect(),
    })
}

pub fn nehari_project(problem: &Problem, u: &GridFunction, tol: f64) -> Result<ProjectionResult> {
    let report = problem.energy(u)?;
    nehari_project_with(problem, u, &report, tol)
}

/// [`nehari_project`] reusing a report of `u`.
pub fn nehari_project_with(
    problem: &Problem,
    u: &GridFunction,
    report: &EnergyReport,
    tol: f64,
) -> Result<ProjectionResult> {
    let params = problem.params();
    if params.p() < 4.0 {
        return Err(Error::param("p", format!("Nehari projection needs p >= 4, got {}", params.p())));
    }
    if u.is_zero() {
        return Err(Error::ZeroField);
    }
    if !nehari_condition(report, params) {
        return Err(Error::NoMaximizer);
    }
    let fiber = NehariFiber::from_report(report, params);
    // roots of h' = t g are the roots of g
    let root = find_root(|t| (fiber.g(t), fiber.g_prime(t)), |t| t * fiber.g(t).abs(), tol * report.norm_sq)?;
    Ok(ProjectionResult {
        t_star: root.t,
        projected: u.scale(root.t),
        residual: root.t * fiber.g(root.t).abs(),
        bracket: root.bracket,
        iterations: root.iterations,
    })
}

/// The dilation fiber `t ↦ I(Q(t, u))` and `t ↦ J(Q(t, u))`.
#[derive(Clone, Debug)]
pub struct PohozaevFiber<'a> {
    problem: &'a Problem,
    u: &'a GridFunction,
    r: EnergyReport,
}

impl<'a> PohozaevFiber<'a> {
    pub fn new(problem: &'a Problem, u: &'a GridFunction) -> Result<Self> {
        let r = problem.energy(u)?;
        Ok(Self::with_report(problem, u, r))
    }

    pub fn with_report(problem: &'a Problem, u: &'a GridFunction, r: EnergyReport) -> Self {
        Self { problem, u, r }
    }

    pub fn report(&self) -> &EnergyReport {
        &self.r
    }

    fn mass_term(&self) -> f64 {
        self.r.l2_sq * self.r.l2_sq / (8.0 * PI)
    }

    /// `I(Q(t, u))`.
    pub fn value(&self, t: f64) -> Result<f64> {
        let (p, b) = (self.problem.params().p(), self.problem.params().b());
        let (t2, lt) = (t * t, t.ln());
        let t4 = t2 * t2;
        let vint = self.problem.scaled_integral(self.u, t, ScaledWeight::Potential)?;
        Ok(0.5 * (t4 * self.r.grad_sq + t2 * vint) + 0.25 * t4 * self.r.N0 - t4 * lt * self.mass_term()
            - b / p * self.r.lp * t.powf(2.0 * p - 2.0))
    }

    /// `J(Q(t, u)) = t h'(t)`.
    pub fn j(&self, t: f64) -> Result<f64> {
        let (p, b) = (self.problem.params().p(), self.problem.params().b());
        let (t2, lt) = (t * t, t.ln());
        let t4 = t2 * t2;
        let cint = self.problem.scaled_integral(self.u, t, ScaledWeight::CalV)?;
        Ok(2.0 * t4 * self.r.grad_sq + t2 * cint + t4 * self.r.N0 - t4 * (4.0 * lt + 1.0) * self.mass_term()
            - 2.0 * b * (p - 1.0) / p * self.r.lp * t.powf(2.0 * p - 2.0))
    }

    /// `d/dt J(Q(t, u))`.
    pub fn j_prime(&self, t: f64) -> Result<f64> {
        let (p, b) = (self.problem.params().p(), self.problem.params().b());
        let (t2, lt) = (t * t, t.ln());
        let t3 = t2 * t;
        let slope = self.problem.scaled_integral(self.u, t, ScaledWeight::CalVSlope)?;
        Ok(8.0 * t3 * self.r.grad_sq + t * slope + 4.0 * t3 * self.r.N0
            - t3 * (16.0 * lt + 8.0) * self.mass_term()
            - 2.0 * b * (p - 1.0) * (2.0 * p - 2.0) / p * self.r.lp * t.powf(2.0 * p - 3.0))
    }
}

pub fn np_fiber(problem: &Problem, u: &GridFunction, t_values: &[f64]) -> Result<FiberScan> {
    check_t_values(t_values)?;
    if u.is_zero() {
        return Err(Error::ZeroField);
    }
    let fiber = PohozaevFiber::new(problem, u)?;
    let pairs = map_t(t_values, |t| Ok((fiber.value(t)?, fiber.j(t)?)))?;
    Ok(FiberScan {
        family: Family::Pohozaev,
        t_values: t_values.to_vec(),
        i_values: pairs.iter().map(|p| p.0).collect(),
        derivative_values: pairs.iter().map(|p| p.1).collect(),
    })
}

pub fn np_project(problem: &Problem, u: &GridFunction, tol: f64) -> Result<ProjectionResult> {
    let report = problem.energy(u)?;
    np_project_with(problem, u, &report, tol)
}

/// [`np_project`] reusing a report of `u`.
pub fn np_project_with(problem: &Problem, u: &GridFunction, report: &EnergyReport, tol: f64) -> Result<ProjectionResult> {
    if problem.params().p() < 3.0 {
        return Err(Error::param(
            "p",
            format!("Nehari-Pohozaev projection needs p >= 3, got {}", problem.params().p()),
        ));
    }
    if u.is_zero() {
        return Err(Error::ZeroField);
    }
    let fiber = PohozaevFiber::with_report(problem, u, *report);
    let eval = |t: f64| -> (f64, f64) {
        match (fiber.j(t), fiber.j_prime(t)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => (f64::NAN, f64::NAN),
        }
    };
    let root = find_root(eval, |t| eval(t).0.abs(), tol * report.norm_sq)?;
    let residual = fiber.j(root.t)?.abs();
    Ok(ProjectionResult {
        t_star: root.t,
        projected: u.dilate(root.t)?,
        residual,
        bracket: root.bracket,
        iterations: root.iterations,
    })
}

/// `min_t [I(u) - (1 - t⁴)/4 J(u) - I(Q(t, u))]` over `t_values`.
pub fn fiber_inequality_margin(problem: &Problem, u: &GridFunction, t_values: &[f64]) -> Result<f64> {
    check_t_values(t_values)?;
    if u.is_zero() {
        return Err(Error::ZeroField);
    }
    let fiber = PohozaevFiber::new(problem, u)?;
    let (i, j) = (fiber.report().I, fiber.report().J);
    let margins = map_t(t_values, |t| {
        let t4 = (t * t) * (t * t);
        Ok(i - (1.0 - t4) / 4.0 * j - fiber.value(t)?)
    })?;
    Ok(margins.into_iter().fold(f64::INFINITY, f64::min))
}

fn map_t<T: Send>(t_values: &[f64], f: impl Fn(f64) -> Result<T> + Sync) -> Result<Vec<T>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        t_values.par_iter().map(|&t| f(t)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    t_values.iter().map(|&t| f(t)).collect()
}

struct Root {
    t: f64,
    bracket: (f64, f64),
    iterations: usize,
}

/// Root of a function positive below it and negative above it: geometric
/// bracketing from `t = 1`, bisection, one Newton polish. `residual(t)` is
/// compared with `tol_abs`.
fn find_root(f: impl Fn(f64) -> (f64, f64), residual: impl Fn(f64) -> f64, tol_abs: f64) -> Result<Root> {
    let value = |t: f64| f(t).0;
    let f1 = value(1.0);
    if !f1.is_finite() {
        return Err(Error::BracketNotFound { lo: 1.0, hi: 1.0 });
    }
    let mut iterations = 0;
    let expand_down = |mut lo: f64, iterations: &mut usize| -> Result<f64> {
        while value(lo) <= 0.0 {
            lo *= 0.5;
            *iterations += 1;
            if lo < T_MIN {
                return Err(Error::BracketNotFound { lo: T_MIN, hi: T_MAX });
            }
        }
        Ok(lo)
    };
    let expand_up = |mut hi: f64, iterations: &mut usize| -> Result<f64> {
        while value(hi) >= 0.0 {
            hi *= 2.0;
            *iterations += 1;
            if hi > T_MAX {
                return Err(Error::BracketNotFound { lo: T_MIN, hi: T_MAX });
            }
        }
        Ok(hi)
    };

    if residual(1.0) <= tol_abs {
        let lo = expand_down(0.5, &mut iterations)?;
        let hi = expand_up(2.0, &mut iterations)?;
        return Ok(Root {
            t: 1.0,
            bracket: (lo, hi),
            iterations,
        });
    }
    let (mut lo, mut hi) = if f1 > 0.0 {
        (1.0, expand_up(2.0, &mut iterations)?)
    } else {
        (expand_down(0.5, &mut iterations)?, 1.0)
    };
    let bracket = (lo, hi);
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        let v = value(mid);
        if v == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if v > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut t = 0.5 * (lo + hi);
    let (v, d) = f(t);
    if d != 0.0 && d.is_finite() {
        let polished = t - v / d;
        if polished > bracket.0 && polished < bracket.1 && residual(polished) <= residual(t) {
            t = polished;
        }
    }
    iterations += 1;
    if residual(t) > tol_abs {
        return Err(Error::NotConverged("fiber projection"));
    }
    Ok(Root { t, bracket, iterations })
}
