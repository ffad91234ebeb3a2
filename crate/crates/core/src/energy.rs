//! The energy `I`, its first variation, the auxiliary functionals `J` and
//! `P`, and the augmented functional `φ(s, v) = I(h(s, v))`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec};
use crate::logkernel::{KernelId, KernelTables};
use crate::potential::PotentialModel;
use crate::sum::sum_rows;

/// Exponent `p` and coupling `b` of the power nonlinearity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    p: f64,
    b: f64,
}

impl ProblemParams {
    pub fn new(p: f64, b: f64) -> Result<Self> {
        if !(p > 2.0 && p.is_finite()) {
            return Err(Error::param("p", format!("need p > 2, got {p}")));
        }
        if !(b >= 0.0 && b.is_finite()) {
            return Err(Error::param("b", format!("need b >= 0, got {b}")));
        }
        Ok(Self { p, b })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn b(&self) -> f64 {
        self.b
    }
}

/// Every scalar functional of one state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct EnergyReport {
    pub I: f64,
    pub grad_sq: f64,
    pub weighted_V: f64,
    pub norm_sq: f64,
    pub N0: f64,
    pub N1: f64,
    pub N2: f64,
    pub lp: f64,
    pub l2_sq: f64,
    pub star_sq: f64,
    pub Ipair: f64,
    pub J: f64,
    pub P: f64,
}

impl EnergyReport {
    pub const CSV_HEADER: &'static str = "I,grad_sq,weighted_V,norm_sq,N0,N1,N2,lp,l2_sq,star_sq,Ipair,J,P";

    pub fn fields(&self) -> [f64; 13] {
        [
            self.I,
            self.grad_sq,
            self.weighted_V,
            self.norm_sq,
            self.N0,
            self.N1,
            self.N2,
            self.lp,
            self.l2_sq,
            self.star_sq,
            self.Ipair,
            self.J,
            self.P,
        ]
    }

    /// One CSV row in [`Self::CSV_HEADER`] order, shortest round-trip
    /// formatting.
    pub fn csv_row(&self) -> String {
        self.fields().iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(",")
    }
}

impl fmt::Display for EnergyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = Self::CSV_HEADER.split(',');
        for (i, (name, v)) in names.zip(self.fields()).enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{name:>10} = {v:+.15e}")?;
        }
        Ok(())
    }
}

/// Potential-derived weights evaluated at a dilated argument `x / t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScaledWeight {
    /// `V`.
    Potential,
    /// `𝒱 = V - ½(∇V, x)`.
    CalV,
    /// `2𝒱 - (∇𝒱, x)`, the `t`-derivative kernel of `t² ∫𝒱(x/t) u²`.
    CalVSlope,
}

/// Parameters, potential and kernel tables of one problem on one grid, with
/// the potential fields sampled once.
#[derive(Clone, Debug)]
pub struct Problem {
    params: ProblemParams,
    potential: PotentialModel,
    tables: Arc<KernelTables>,
    radius_sq: Vec<f64>,
    v: Vec<f64>,
    calv: Vec<f64>,
    pohozaev_weight: Vec<f64>,
}

impl Problem {
    pub fn new(params: ProblemParams, potential: PotentialModel, tables: Arc<KernelTables>) -> Self {
        let radius_sq = tables.spec().radius_sq();
        let v = radius_sq.iter().map(|&s| potential.value_sq(s)).collect();
        let calv = radius_sq.iter().map(|&s| potential.calv_sq(s)).collect();
        let pohozaev_weight = radius_sq
            .iter()
            .map(|&s| potential.value_sq(s) + 0.5 * potential.radial_derivative_sq(s))
            .collect();
        Self {
            params,
            potential,
            tables,
            radius_sq,
            v,
            calv,
            pohozaev_weight,
        }
    }

    /// The same problem with `V` replaced by the constant `V∞`.
    pub fn limit_problem(&self) -> Result<Self> {
        Ok(Self::new(
            self.params,
            PotentialModel::constant(self.potential.vinf())?,
            self.tables.clone(),
        ))
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn potential(&self) -> &PotentialModel {
        &self.potential
    }

    pub fn tables(&self) -> &Arc<KernelTables> {
        &self.tables
    }

    pub fn spec(&self) -> &GridSpec {
        self.tables.spec()
    }

    /// Samples of `V` at the nodes.
    pub fn potential_samples(&self) -> &[f64] {
        &self.v
    }

    fn weighted(&self, u: &GridFunction, w: &[f64]) -> f64 {
        let spec = self.spec();
        let v = u.values();
        spec.cell_area() * sum_rows(spec.n(), spec.n(), |k| w[k] * v[k] * v[k])
    }

    /// `∫ W(x/t) u(x)² dx` for one of the potential weights.
    pub fn scaled_integral(&self, u: &GridFunction, t: f64, weight: ScaledWeight) -> Result<f64> {
        u.ensure_same_grid(self.spec())?;
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::param("t", format!("must be positive, got {t}")));
        }
        let spec = self.spec();
        let pot = &self.potential;
        let inv = 1.0 / (t * t);
        let r = &self.radius_sq;
        let v = u.values();
        let s = match weight {
            ScaledWeight::Potential => sum_rows(spec.n(), spec.n(), |k| pot.value_sq(r[k] * inv) * v[k] * v[k]),
            ScaledWeight::CalV => sum_rows(spec.n(), spec.n(), |k| pot.calv_sq(r[k] * inv) * v[k] * v[k]),
            ScaledWeight::CalVSlope => sum_rows(spec.n(), spec.n(), |k| {
                let q = r[k] * inv;
                (2.0 * pot.calv_sq(q) - pot.calv_radial_derivative_sq(q)) * v[k] * v[k]
            }),
        };
        Ok(spec.cell_area() * s)
    }

    pub fn energy(&self, u: &GridFunction) -> Result<EnergyReport> {
        u.ensure_same_grid(self.spec())?;
        let (p, b) = (self.params.p, self.params.b);
        let grad_sq = u.h1_seminorm_sq();
        let weighted_v = self.weighted(u, &self.v);
        let norm_sq = grad_sq + weighted_v;
        let [n0, n1, n2] = self.tables.n_all(u)?;
        let lp = u.lp_norm_p(p)?;
        let l2_sq = u.lp_norm_p(2.0)?;
        let star_sq = u.star_norm_sq();
        let calv = self.weighted(u, &self.calv);
        let poh = self.weighted(u, &self.pohozaev_weight);
        let mass_term = l2_sq * l2_sq / (8.0 * PI);
        Ok(EnergyReport {
            I: 0.5 * norm_sq + 0.25 * n0 - b / p * lp,
            grad_sq,
            weighted_V: weighted_v,
            norm_sq,
            N0: n0,
            N1: n1,
            N2: n2,
            lp,
            l2_sq,
            star_sq,
            Ipair: norm_sq + n0 - b * lp,
            J: 2.0 * grad_sq + calv + n0 - mass_term - 2.0 * b * (p - 1.0) / p * lp,
            P: poh + n0 + mass_term - 2.0 * b / p * lp,
        })
    }

    /// L² representative of `I'(u)`:
    /// `-Δu + V u + (1/2π)(log|·| * u²) u - b |u|^{p-2} u`.
    pub fn residual(&self, u: &GridFunction) -> Result<GridFunction> {
        u.ensure_same_grid(self.spec())?;
        let (p, b) = (self.params.p, self.params.b);
        let lap = u.neg_laplacian();
        let w = self.tables.convolve(KernelId::Log, &u.map(|x| x * x))?;
        let inv2pi = 1.0 / (2.0 * PI);
        let values = u
            .values()
            .iter()
            .zip(lap.values())
            .zip(w.values())
            .zip(&self.v)
            .map(|(((&x, &l), &wk), &vk)| {
                let mut r = l + vk * x + inv2pi * wk * x;
                if b != 0.0 {
                    r -= b * x.signum() * x.abs().powf(p - 1.0);
                }
                r
            })
            .collect();
        GridFunction::from_values(*self.spec(), values)
    }

    /// `φ(s, v) = I(h(s, v))` with `h(s, v)(x) = e^{2s} v(e^s x)`, from the
    /// closed form in `s` (no interpolation of `v`).
    pub fn augmented_phi(&self, s: f64, v: &GridFunction) -> Result<f64> {
        let r = self.energy(v)?;
        self.augmented_phi_with(s, v, &r)
    }

    /// [`Self::augmented_phi`] reusing a report of `v`.
    pub fn augmented_phi_with(&self, s: f64, v: &GridFunction, r: &EnergyReport) -> Result<f64> {
        if !s.is_finite() {
            return Err(Error::param("s", "must be finite"));
        }
        let (p, b) = (self.params.p, self.params.b);
        let e2 = (2.0 * s).exp();
        let e4 = e2 * e2;
        let vpart = self.scaled_integral(v, s.exp(), ScaledWeight::Potential)?;
        Ok(0.5 * e4 * r.grad_sq + 0.5 * e2 * vpart + 0.25 * e4 * r.N0
            - s * e4 / (8.0 * PI) * r.l2_sq * r.l2_sq
            - b * (2.0 * s * (p - 1.0)).exp() / p * r.lp)
    }
}

/// [`Problem::energy`] for the limit problem `V ≡ V∞`.
pub fn limit_energy(
    u: &GridFunction,
    params: ProblemParams,
    vinf: f64,
    tables: Arc<KernelTables>,
) -> Result<EnergyReport> {
    if !(vinf > 0.0) {
        return Err(Error::param("vinf", format!("must be positive, got {vinf}")));
    }
    Problem::new(params, PotentialModel::constant(vinf)?, tables).energy(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(p: f64, b: f64, pot: PotentialModel) -> Problem {
        let spec = GridSpec::new(8.0, 64).unwrap();
        Problem::new(ProblemParams::new(p, b).unwrap(), pot, KernelTables::shared(spec))
    }

    #[test]
    fn params_validation() {
        assert!(ProblemParams::new(2.0, 1.0).is_err());
        assert!(ProblemParams::new(3.0, -1.0).is_err());
        assert!(ProblemParams::new(f64::NAN, 1.0).is_err());
        assert!(ProblemParams::new(2.5, 0.0).is_ok());
    }

    #[test]
    fn zero_field_has_zero_report() {
        let pr = problem(4.0, 1.0, PotentialModel::well1());
        let z = GridFunction::zeros(*pr.spec());
        assert_eq!(pr.energy(&z).unwrap(), EnergyReport::default());
        assert!(pr.residual(&z).unwrap().is_zero());
    }

    #[test]
    fn report_identities() {
        let pr = problem(3.5, 0.7, PotentialModel::well2());
        let u = GridFunction::gaussian(*pr.spec(), 1.1, 1.3, [0.2, 0.1]).unwrap();
        let r = pr.energy(&u).unwrap();
        let scale = r.norm_sq + r.N0.abs() + r.lp;
        assert!((r.I - (0.5 * r.norm_sq + 0.25 * r.N0 - 0.7 / 3.5 * r.lp)).abs() < 1e-12 * scale);
        assert!((r.J - (2.0 * r.Ipair - r.P)).abs() < 1e-12 * scale);
        let pairing = pr.residual(&u).unwrap().inner(&u).unwrap();
        assert!((pairing - r.Ipair).abs() < 1e-10 * scale);
    }

    #[test]
    fn evenness() {
        let pr = problem(4.0, 1.0, PotentialModel::well1());
        let u = GridFunction::gaussian(*pr.spec(), 0.9, 1.0, [0.5, 0.0]).unwrap();
        assert_eq!(pr.energy(&u).unwrap(), pr.energy(&u.scale(-1.0)).unwrap());
    }

    #[test]
    fn limit_energy_is_constant_potential_energy() {
        let pr = problem(4.0, 1.0, PotentialModel::well1());
        let u = GridFunction::gaussian(*pr.spec(), 1.0, 1.0, [0.0, 0.0]).unwrap();
        let a = limit_energy(&u, *pr.params(), 1.0, pr.tables().clone()).unwrap();
        let b = pr.limit_problem().unwrap().energy(&u).unwrap();
        assert_eq!(a, b);
        assert!(pr.energy(&u).unwrap().I < a.I);
        assert!(limit_energy(&u, *pr.params(), 0.0, pr.tables().clone()).is_err());
    }

    #[test]
    fn phi_at_zero_is_energy() {
        let pr = problem(3.0, 1.0, PotentialModel::well1());
        let u = GridFunction::gaussian(*pr.spec(), 1.0, 1.0, [0.0, 0.0]).unwrap();
        let i = pr.energy(&u).unwrap().I;
        assert!((pr.augmented_phi(0.0, &u).unwrap() - i).abs() < 1e-14 * i.abs().max(1.0));
    }

    #[test]
    fn csv_row_has_every_column() {
        let r = EnergyReport::default();
        assert_eq!(r.csv_row().split(',').count(), EnergyReport::CSV_HEADER.split(',').count());
    }
}
