//! The identity suite: the algebraic and differential identities the
//! discretization must reproduce, each as a measured value against a bound.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::energy::Problem;
use crate::error::Result;
use crate::grid::{GridFunction, GridSpec};
use crate::manifolds::{fiber_inequality_margin, log_spaced};
use crate::potential::check_conditions;

const SEED: u64 = 0x5eed_1095;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Outcome {
    Pass,
    Fail,
    Skip,
}

/// One row of the suite: `value` is compared against `bound`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub outcome: Outcome,
    pub value: f64,
    pub bound: f64,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.outcome != Outcome::Fail)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<28} {:<6} {:>14} {:>10}  note", "check", "result", "value", "bound")?;
        for c in &self.checks {
            let tag = match c.outcome {
                Outcome::Pass => "PASS",
                Outcome::Fail => "FAIL",
                Outcome::Skip => "SKIP",
            };
            writeln!(f, "{:<28} {:<6} {:>14.6e} {:>10.1e}  {}", c.name, tag, c.value, c.bound, c.note)?;
        }
        write!(f, "overall: {}", if self.all_passed() { "PASS" } else { "FAIL" })
    }
}

fn upper(name: &'static str, value: f64, bound: f64, note: impl Into<String>) -> Check {
    Check {
        name,
        outcome: if value <= bound { Outcome::Pass } else { Outcome::Fail },
        value,
        bound,
        note: note.into(),
    }
}

/// Sum of 1 to 3 Gaussians with random centers, widths and signed
/// amplitudes, all well inside the box.
pub fn random_smooth_field(spec: GridSpec, rng: &mut impl Rng) -> GridFunction {
    let reach = 0.25 * spec.half_width();
    let bumps: Vec<(f64, f64, f64, f64)> = (0..rng.gen_range(1..=3))
        .map(|_| {
            (
                rng.gen_range(-reach..reach),
                rng.gen_range(-reach..reach),
                rng.gen_range(0.6..1.6),
                rng.gen_range(0.3..2.0) * if rng.gen_bool(0.8) { 1.0 } else { -1.0 },
            )
        })
        .collect();
    GridFunction::sample(spec, move |x, y| {
        bumps
            .iter()
            .map(|&(cx, cy, w, a)| {
                let r2 = (x - cx).powi(2) + (y - cy).powi(2);
                a * (-r2 / (2.0 * w * w)).exp()
            })
            .sum()
    })
    .expect("finite by construction")
}

/// Relative deviation `|a - b| / max(|b|, floor)`.
pub fn rel(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / b.abs().max(floor)
}

/// Largest relative mismatch between `N0` and `N1 - N2` over `count` fields.
pub fn kernel_split(problem: &Problem, count: usize, rng: &mut impl Rng) -> Result<f64> {
    let mut worst = 0.0f64;
    for _ in 0..count {
        let u = random_smooth_field(*problem.spec(), rng);
        let [n0, n1, n2] = problem.tables().n_all(&u)?;
        worst = worst.max((n0 - (n1 - n2)).abs() / (n1.abs() + n2.abs()));
    }
    Ok(worst)
}

/// Largest relative mismatch of `J = 2 I'(u)u - P` with the pairing taken
/// from the residual field.
pub fn pohozaev_split(problem: &Problem, count: usize, rng: &mut impl Rng) -> Result<f64> {
    let mut worst = 0.0f64;
    for _ in 0..count {
        let u = random_smooth_field(*problem.spec(), rng);
        let r = problem.energy(&u)?;
        let pairing = problem.residual(&u)?.inner(&u)?;
        let scale = [r.grad_sq, r.weighted_V, r.N0, r.l2_sq * r.l2_sq / (8.0 * PI), r.lp, r.P]
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        worst = worst.max((r.J - (2.0 * pairing - r.P)).abs() / scale);
    }
    Ok(worst)
}

/// Largest relative mismatch of central differences of `I` along random
/// directions against `∫ I'(u) v`.
pub fn gradient_check(problem: &Problem, u: &GridFunction, count: usize, eps: f64, rng: &mut impl Rng) -> Result<f64> {
    let g = problem.residual(u)?;
    let mut worst = 0.0f64;
    for _ in 0..count {
        let v = random_smooth_field(*problem.spec(), rng).without_analytic();
        let ip = problem.energy(&u.axpy(eps, &v)?)?.I;
        let im = problem.energy(&u.axpy(-eps, &v)?)?.I;
        let fd = (ip - im) / (2.0 * eps);
        let exact = g.inner(&v)?;
        worst = worst.max(rel(fd, exact, 1e-300));
    }
    Ok(worst)
}

/// Largest relative error of the scaling laws of `u_t` at the given `t`.
pub fn dilation_laws(problem: &Problem, u: &GridFunction, ts: &[f64]) -> Result<f64> {
    let r = problem.energy(u)?;
    let l3 = u.lp_norm_p(3.0)?;
    let l4 = u.lp_norm_p(4.0)?;
    let mut worst = 0.0f64;
    for &t in ts {
        let ut = u.dilate(t)?;
        let rt = problem.energy(&ut)?;
        let (t2, t4) = (t * t, t.powi(4));
        let n0_law = t4 * r.N0 - t4 * t.ln() / (2.0 * PI) * r.l2_sq * r.l2_sq;
        for (got, want) in [
            (rt.l2_sq, t2 * r.l2_sq),
            (rt.grad_sq, t4 * r.grad_sq),
            (ut.lp_norm_p(3.0)?, t.powi(4) * l3),
            (ut.lp_norm_p(4.0)?, t.powi(6) * l4),
            (rt.N0, n0_law),
        ] {
            worst = worst.max(rel(got, want, 1e-300));
        }
    }
    Ok(worst)
}

/// Largest relative mismatch of the central difference of `s ↦ φ(s, v)`
/// against `J(h(s, v))`.
pub fn augmented_derivative(problem: &Problem, v: &GridFunction, ss: &[f64], ds: f64) -> Result<f64> {
    let r = problem.energy(v)?;
    let mut worst = 0.0f64;
    for &s in ss {
        let fd = (problem.augmented_phi_with(s + ds, v, &r)? - problem.augmented_phi_with(s - ds, v, &r)?) / (2.0 * ds);
        let j = problem.energy(&v.dilate(s.exp())?)?.J;
        worst = worst.max(rel(fd, j, 1e-300));
    }
    Ok(worst)
}

/// Runs the suite on `problem`. Deterministic for fixed inputs.
pub fn run_suite(problem: &Problem) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let spec = *problem.spec();
    let gauss = GridFunction::gaussian(spec, 1.0, 1.0, [0.0, 0.0])?;
    let mut checks = Vec::new();

    checks.push(upper(
        "kernel split N0 = N1 - N2",
        kernel_split(problem, 20, &mut rng)?,
        1e-10,
        "20 random fields, relative to |N1|+|N2|",
    ));
    checks.push(upper(
        "J = 2 I'(u)u - P",
        pohozaev_split(problem, 20, &mut rng)?,
        1e-10,
        "20 random fields",
    ));
    checks.push(upper(
        "gradient vs central diff",
        gradient_check(problem, &gauss, 5, 1e-4, &mut rng)?,
        1e-5,
        "5 directions, eps 1e-4",
    ));
    checks.push(upper(
        "dilation laws",
        dilation_laws(problem, &gauss, &[0.5, 2.0])?,
        1e-5,
        "L2, grad, L3, L4, N0 at t = 1/2, 2",
    ));
    checks.push(upper(
        "d/ds phi = J(h(s,v))",
        augmented_derivative(problem, &gauss, &[-0.5, 0.0, 0.5], 1e-5)?,
        1e-5,
        "s = -0.5, 0, 0.5",
    ));

    let conditions = check_conditions(problem.potential(), &spec, 64)?;
    let ts = log_spaced(0.25, 4.0, 200)?;
    if problem.potential().is_constant() || conditions.v2.passed {
        let mut worst = f64::INFINITY;
        let mut fields = vec![gauss.clone()];
        fields.extend((0..3).map(|_| random_smooth_field(spec, &mut rng)));
        for u in &fields {
            let i = problem.energy(u)?.I;
            worst = worst.min(fiber_inequality_margin(problem, u, &ts)? / (1.0 + i.abs()));
        }
        checks.push(Check {
            name: "fiber inequality margin",
            outcome: if worst >= -1e-8 { Outcome::Pass } else { Outcome::Fail },
            value: worst,
            bound: -1e-8,
            note: "min over t in [1/4, 4], relative to 1+|I(u)|".into(),
        });
    } else {
        checks.push(Check {
            name: "fiber inequality margin",
            outcome: Outcome::Skip,
            value: f64::NAN,
            bound: -1e-8,
            note: "potential fails ray monotonicity".into(),
        });
    }
    Ok(VerifyReport { checks })
}
