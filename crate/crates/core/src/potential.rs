//! Potential-well models, their derived fields, and a sampling checker for
//! the well conditions.
//!
//! Every builtin is radial, written as a profile `V(s)` in `s = |x|^2`, so
//!
//! * `(∇V(x), x) = 2 s V'(s)`,
//! * `𝒱(x) = V(x) - ½(∇V(x), x) = V - s V'`,
//! * `(∇𝒱(x), x) = -2 s² V''(s)`,
//!
//! all available in closed form.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// The builtin families.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", content = "params", rename_all = "snake_case")]
pub enum PotentialKind {
    /// `1 - 1/(2 + |x|²)`.
    Well1,
    /// `1 - 1/(2 + log(1 + |x|²))`.
    Well2,
    /// `V ≡ value`.
    Constant { value: f64 },
    /// `base + height·exp(-|x|²)`: a bump, not a well.
    Bump { base: f64, height: f64 },
}

/// An immutable, evaluable potential.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialModel {
    kind: PotentialKind,
}

impl PotentialModel {
    pub fn well1() -> Self {
        Self {
            kind: PotentialKind::Well1,
        }
    }

    pub fn well2() -> Self {
        Self {
            kind: PotentialKind::Well2,
        }
    }

    pub fn constant(value: f64) -> Result<Self> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::param(
                "value",
                format!("constant potential must be positive, got {value}"),
            ));
        }
        Ok(Self {
            kind: PotentialKind::Constant { value },
        })
    }

    pub fn bump(base: f64, height: f64) -> Result<Self> {
        if !(base > 0.0 && base.is_finite() && height.is_finite()) {
            return Err(Error::param("base", format!("bump base must be positive, got {base}")));
        }
        Ok(Self {
            kind: PotentialKind::Bump { base, height },
        })
    }

    pub fn from_kind(kind: PotentialKind) -> Result<Self> {
        match kind {
            PotentialKind::Well1 => Ok(Self::well1()),
            PotentialKind::Well2 => Ok(Self::well2()),
            PotentialKind::Constant { value } => Self::constant(value),
            PotentialKind::Bump { base, height } => Self::bump(base, height),
        }
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            PotentialKind::Well1 => "well1",
            PotentialKind::Well2 => "well2",
            PotentialKind::Constant { .. } => "constant",
            PotentialKind::Bump { .. } => "bump",
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, PotentialKind::Constant { .. })
    }

    /// `(V, V', V'')` as functions of `s = |x|²`.
    #[inline]
    fn profile(&self, s: f64) -> (f64, f64, f64) {
        match self.kind {
            PotentialKind::Well1 => {
                let d = 2.0 + s;
                (1.0 - 1.0 / d, 1.0 / (d * d), -2.0 / (d * d * d))
            }
            PotentialKind::Well2 => {
                let e = 1.0 + s;
                let d = 2.0 + s.ln_1p();
                let d1 = 1.0 / (e * d * d);
                let d2 = -(d + 2.0) / (e * e * d * d * d);
                (1.0 - 1.0 / d, d1, d2)
            }
            PotentialKind::Constant { value } => (value, 0.0, 0.0),
            PotentialKind::Bump { base, height } => {
                let g = height * (-s).exp();
                (base + g, -g, g)
            }
        }
    }

    /// `V` at squared radius `s`.
    #[inline]
    pub fn value_sq(&self, s: f64) -> f64 {
        self.profile(s).0
    }

    /// `V(x)`.
    #[inline]
    pub fn value(&self, x: f64, y: f64) -> f64 {
        self.value_sq(x * x + y * y)
    }

    /// `(∇V(x), x)` at squared radius `s`.
    #[inline]
    pub fn radial_derivative_sq(&self, s: f64) -> f64 {
        2.0 * s * self.profile(s).1
    }

    /// `(∇V(x), x)`.
    #[inline]
    pub fn radial_derivative(&self, x: f64, y: f64) -> f64 {
        self.radial_derivative_sq(x * x + y * y)
    }

    /// `𝒱(x) = V(x) - ½(∇V(x), x)` at squared radius `s`.
    #[inline]
    pub fn calv_sq(&self, s: f64) -> f64 {
        let (v, d1, _) = self.profile(s);
        v - s * d1
    }

    /// `𝒱(x)`.
    #[inline]
    pub fn calv(&self, x: f64, y: f64) -> f64 {
        self.calv_sq(x * x + y * y)
    }

    /// `(∇𝒱(x), x)` at squared radius `s`.
    #[inline]
    pub fn calv_radial_derivative_sq(&self, s: f64) -> f64 {
        -2.0 * s * s * self.profile(s).2
    }

    /// `V0 = inf V`.
    pub fn v0(&self) -> f64 {
        match self.kind {
            PotentialKind::Well1 | PotentialKind::Well2 => 0.5,
            PotentialKind::Constant { value } => value,
            PotentialKind::Bump { base, height } => base + height.min(0.0),
        }
    }

    /// `V∞ = lim_{|x|→∞} V(x)`.
    pub fn vinf(&self) -> f64 {
        match self.kind {
            PotentialKind::Well1 | PotentialKind::Well2 => 1.0,
            PotentialKind::Constant { value } => value,
            PotentialKind::Bump { base, .. } => base,
        }
    }

    /// `V0 < V∞` and the supremum sits at infinity.
    pub fn is_well(&self) -> bool {
        self.v0() < self.vinf()
    }

    /// Samples `V` at the nodes of a grid.
    pub fn sample(&self, spec: &GridSpec) -> Vec<f64> {
        spec.radius_sq().into_iter().map(|s| self.value_sq(s)).collect()
    }
}

impl fmt::Display for PotentialModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            PotentialKind::Well1 => write!(f, "well1: V(x) = 1 - 1/(2+|x|^2)"),
            PotentialKind::Well2 => write!(f, "well2: V(x) = 1 - 1/(2+log(1+|x|^2))"),
            PotentialKind::Constant { value } => write!(f, "constant: V(x) = {value}"),
            PotentialKind::Bump { base, height } => {
                write!(f, "bump: V(x) = {base} + {height} exp(-|x|^2)")
            }
        }
    }
}

/// Outcome of one sampled condition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub passed: bool,
    /// Smallest observed slack; negative means violated.
    pub margin: f64,
    /// Sample point realizing the margin.
    pub witness: [f64; 2],
}

/// Per-condition results of [`check_conditions`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PotentialReport {
    pub name: String,
    /// `0 < V0 <= V <= V∞` with the supremum approached at infinity.
    pub v0: ConditionCheck,
    /// `|(∇V(x), x)| <= η`; `margin` holds the estimated `η`.
    pub v1: ConditionCheck,
    pub eta: f64,
    /// `t ↦ 𝒱(t x)` nondecreasing along every sampled ray.
    pub v2: ConditionCheck,
    /// `V + ½(∇V, x) <= V∞`.
    pub v3: ConditionCheck,
    /// `(∇V(x), x) >= 0`.
    pub radial_nonnegative: ConditionCheck,
    pub is_well: bool,
}

impl PotentialReport {
    pub fn all_passed(&self) -> bool {
        self.v0.passed && self.v1.passed && self.v2.passed && self.v3.passed && self.radial_nonnegative.passed
    }
}

impl fmt::Display for PotentialReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "potential {}", self.name)?;
        let rows = [
            ("V0 (0 < V0 <= V <= Vinf)", &self.v0),
            ("V1 (|(grad V,x)| <= eta)", &self.v1),
            ("V2 (calV nondecreasing on rays)", &self.v2),
            ("V3 (V + (grad V,x)/2 <= Vinf)", &self.v3),
            ("(grad V,x) >= 0", &self.radial_nonnegative),
        ];
        for (label, c) in rows {
            writeln!(
                f,
                "  {:<34} {}  margin {:+.6e}  at ({:.4e}, {:.4e})",
                label,
                if c.passed { "PASS" } else { "FAIL" },
                c.margin,
                c.witness[0],
                c.witness[1]
            )?;
        }
        writeln!(f, "  eta = {:.6e}", self.eta)?;
        write!(f, "  well (V0 < Vinf): {}", self.is_well)
    }
}

const RAY_DIRECTIONS: usize = 64;
const RAY_T_MIN: f64 = 1e-3;
const RAY_T_MAX: f64 = 1e3;

#[derive(Clone, Copy)]
struct Worst {
    margin: f64,
    at: [f64; 2],
}

impl Worst {
    fn new() -> Self {
        Self {
            margin: f64::INFINITY,
            at: [0.0, 0.0],
        }
    }

    fn offer(&mut self, margin: f64, at: [f64; 2]) {
        if margin < self.margin {
            self.margin = margin;
            self.at = at;
        }
    }

    fn check(self, tol: f64) -> ConditionCheck {
        ConditionCheck {
            passed: self.margin >= -tol,
            margin: self.margin,
            witness: self.at,
        }
    }
}

/// Samples the well conditions at every grid node and along 64 rays with
/// `ray_samples` logarithmic radii in `[1e-3, 1e3]`.
pub fn check_conditions(model: &PotentialModel, spec: &GridSpec, ray_samples: usize) -> Result<PotentialReport> {
    if ray_samples < 32 {
        return Err(Error::param(
            "ray_samples",
            format!("need at least 32 samples per ray, got {ray_samples}"),
        ));
    }
    let (v0, vinf) = (model.v0(), model.vinf());
    let tol = 1e-12 * vinf.abs().max(1.0);

    let mut points: Vec<[f64; 2]> = (0..spec.len())
        .map(|k| {
            let (x, y) = spec.position(k);
            [x, y]
        })
        .collect();
    let ln_span = (RAY_T_MAX / RAY_T_MIN).ln();
    let rays: Vec<Vec<[f64; 2]>> = (0..RAY_DIRECTIONS)
        .map(|d| {
            let theta = 2.0 * PI * d as f64 / RAY_DIRECTIONS as f64;
            (0..ray_samples)
                .map(|i| {
                    let t = RAY_T_MIN * (ln_span * i as f64 / (ray_samples - 1) as f64).exp();
                    [t * theta.cos(), t * theta.sin()]
                })
                .collect()
        })
        .collect();
    points.extend(rays.iter().flatten().copied());

    let mut w0 = Worst::new();
    let mut w3 = Worst::new();
    let mut wr = Worst::new();
    let mut eta = 0.0f64;
    let mut eta_at = [0.0, 0.0];
    w0.offer(v0, [f64::NAN, f64::NAN]);
    for &pt in &points {
        let s = pt[0] * pt[0] + pt[1] * pt[1];
        let v = model.value_sq(s);
        let rad = model.radial_derivative_sq(s);
        w0.offer(v - v0, pt);
        w0.offer(vinf - v, pt);
        w3.offer(vinf - (v + 0.5 * rad), pt);
        wr.offer(rad, pt);
        if rad.abs() > eta {
            eta = rad.abs();
            eta_at = pt;
        }
    }

    let mut w2 = Worst::new();
    for ray in &rays {
        for pair in ray.windows(2) {
            let a = model.calv(pair[0][0], pair[0][1]);
            let b = model.calv(pair[1][0], pair[1][1]);
            w2.offer(b - a, pair[1]);
        }
    }

    Ok(PotentialReport {
        name: model.name().to_string(),
        v0: w0.check(tol),
        v1: ConditionCheck {
            passed: eta.is_finite(),
            margin: eta,
            witness: eta_at,
        },
        eta,
        v2: w2.check(tol),
        v3: w3.check(tol),
        radial_nonnegative: wr.check(tol),
        is_well: model.is_well(),
    })
}
