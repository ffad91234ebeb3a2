//! Uniform cell-centered grids on the box `[-L, L]^2` and real fields on them.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{self, wavenumbers};
use crate::sum::sum_rows;

/// Midpoint-rule error coefficient of a cone singularity `|x|` sitting on a
/// cell corner: the Epstein zeta value `sum_{m in (Z+1/2)^2} |m|` continued
/// analytically, i.e. `2^{-1/2} * 4 (1 - 2^{1/2}) zeta(-1/2) beta(-1/2) / 2`.
const HALF_LATTICE_CONE: f64 = 0.067_021_088_809_152_15;

/// Uniform truncated-plane discretization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    half_width: f64,
    n: usize,
}

impl GridSpec {
    /// Cell-centered grid with `n` points per axis on `[-L, L]^2`.
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half width must be positive, got {half_width}"
            )));
        }
        if n < 16 {
            return Err(Error::InvalidGrid(format!("need n >= 16, got {n}")));
        }
        if !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("n must be even, got {n}")));
        }
        Ok(Self { half_width, n })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing `h = 2L/n`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    /// Coordinate of node `i` along either axis.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.spacing()
    }

    /// Physical position of flat index `k` (row-major, first axis slowest).
    #[inline]
    pub fn position(&self, k: usize) -> (f64, f64) {
        (self.coord(k / self.n), self.coord(k % self.n))
    }

    pub fn cell_area(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    /// Squared radius `|x|^2` at every node.
    pub fn radius_sq(&self) -> Vec<f64> {
        (0..self.len())
            .map(|k| {
                let (x, y) = self.position(k);
                x * x + y * y
            })
            .collect()
    }
}

/// Closed-form description of a field, kept so dilations stay exact.
pub type Analytic = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Real samples of a field at the cell centers of a [`GridSpec`].
#[derive(Clone)]
pub struct GridFunction {
    spec: GridSpec,
    values: Vec<f64>,
    analytic: Option<Analytic>,
}

impl fmt::Debug for GridFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GridFunction")
            .field("spec", &self.spec)
            .field("analytic", &self.analytic.is_some())
            .finish_non_exhaustive()
    }
}

impl PartialEq for GridFunction {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec && self.values == other.values
    }
}

impl GridFunction {
    pub fn zeros(spec: GridSpec) -> Self {
        Self {
            spec,
            values: vec![0.0; spec.len()],
            analytic: None,
        }
    }

    /// Wraps raw samples; every sample must be finite.
    pub fn from_values(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                spec.len(),
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                i: k / spec.n(),
                j: k % spec.n(),
            });
        }
        Ok(Self {
            spec,
            values,
            analytic: None,
        })
    }

    /// Samples `f` at the cell centers and keeps `f` for exact dilation.
    pub fn sample<F>(spec: GridSpec, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        let values = (0..spec.len())
            .map(|k| {
                let (x, y) = spec.position(k);
                f(x, y)
            })
            .collect();
        let mut out = Self::from_values(spec, values)?;
        out.analytic = Some(Arc::new(f));
        Ok(out)
    }

    /// The Gaussian `amplitude * exp(-|x - center|^2 / (2 width^2))`.
    pub fn gaussian(spec: GridSpec, width: f64, amplitude: f64, center: [f64; 2]) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::param("width", format!("must be positive, got {width}")));
        }
        let inv = 1.0 / (2.0 * width * width);
        Self::sample(spec, move |x, y| {
            let (dx, dy) = (x - center[0], y - center[1]);
            amplitude * (-(dx * dx + dy * dy) * inv).exp()
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn analytic(&self) -> Option<&Analytic> {
        self.analytic.as_ref()
    }

    /// Same samples without the attached closed form.
    pub fn without_analytic(&self) -> Self {
        Self {
            spec: self.spec,
            values: self.values.clone(),
            analytic: None,
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.spec.n + j]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub(crate) fn ensure_same_grid(&self, other: &GridSpec) -> Result<()> {
        if &self.spec == other {
            Ok(())
        } else {
            Err(Error::SpecMismatch)
        }
    }

    /// Pointwise map; drops the closed form.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            spec: self.spec,
            values: self.values.iter().map(|&v| f(v)).collect(),
            analytic: None,
        }
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &GridFunction) -> Result<Self> {
        other.ensure_same_grid(&self.spec)?;
        Ok(Self {
            spec: self.spec,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + alpha * b)
                .collect(),
            analytic: None,
        })
    }

    /// Midpoint rule `h^2 * sum(samples)`.
    pub fn integrate(&self) -> f64 {
        let v = &self.values;
        self.spec.cell_area() * sum_rows(self.spec.n, self.spec.n, |k| v[k])
    }

    /// `∫ f g`.
    pub fn inner(&self, other: &GridFunction) -> Result<f64> {
        other.ensure_same_grid(&self.spec)?;
        let (a, b) = (&self.values, &other.values);
        Ok(self.spec.cell_area() * sum_rows(self.spec.n, self.spec.n, |k| a[k] * b[k]))
    }

    /// `|u|_p^p` (the p-th power, not the norm).
    pub fn lp_norm_p(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(Error::param("p", format!("Lebesgue exponent must be >= 1, got {p}")));
        }
        let v = &self.values;
        let s = if p == 2.0 {
            sum_rows(self.spec.n, self.spec.n, |k| v[k] * v[k])
        } else if p == 4.0 {
            sum_rows(self.spec.n, self.spec.n, |k| (v[k] * v[k]) * (v[k] * v[k]))
        } else {
            sum_rows(self.spec.n, self.spec.n, |k| v[k].abs().powf(p))
        };
        Ok(self.spec.cell_area() * s)
    }

    /// `|∇u|_2^2`, computed spectrally.
    pub fn h1_seminorm_sq(&self) -> f64 {
        let n = self.spec.n;
        let h = self.spec.spacing();
        let plan = spectral::plan(n);
        let mut buf = spectral::to_complex(&self.values);
        plan.forward(&mut buf);
        let k = wavenumbers(n, h);
        let s = sum_rows(n, n, |idx| {
            let (a, b) = (idx / n, idx % n);
            (k[a] * k[a] + k[b] * k[b]) * buf[idx].norm_sqr()
        });
        h * h * s / (n * n) as f64
    }

    /// `|∇u|_2^2` as `∫ u (-Δ_h u)` with the 5-point Laplacian and zero
    /// values outside the box.
    pub fn h1_seminorm_sq_fd(&self) -> f64 {
        let n = self.spec.n;
        let v = &self.values;
        let at = |i: isize, j: isize| -> f64 {
            if i < 0 || j < 0 || i >= n as isize || j >= n as isize {
                0.0
            } else {
                v[i as usize * n + j as usize]
            }
        };
        let s = sum_rows(n, n, |idx| {
            let (i, j) = ((idx / n) as isize, (idx % n) as isize);
            let c = v[idx];
            let lap = 4.0 * c - at(i - 1, j) - at(i + 1, j) - at(i, j - 1) - at(i, j + 1);
            c * lap
        });
        // h^2 * sum u * lap / h^2
        s
    }

    /// `|u|_*^2 = ∫ log(1+|x|) u^2` over the box.
    pub fn star_norm_sq(&self) -> f64 {
        let n = self.spec.n;
        let h = self.spec.spacing();
        let v = &self.values;
        let spec = self.spec;
        let raw = h * h
            * sum_rows(n, n, |k| {
                let (x, y) = spec.position(k);
                (x * x + y * y).sqrt().ln_1p() * v[k] * v[k]
            });
        // log(1+r) = r + smooth: remove the leading cone error at the origin.
        let c = n / 2;
        let origin_sq = 0.25
            * (self.at(c - 1, c - 1).powi(2)
                + self.at(c - 1, c).powi(2)
                + self.at(c, c - 1).powi(2)
                + self.at(c, c).powi(2));
        raw - HALF_LATTICE_CONE * h * h * h * origin_sq
    }

    /// Pointwise `t * u`.
    pub fn scale(&self, t: f64) -> Self {
        Self {
            spec: self.spec,
            values: self.values.iter().map(|v| t * v).collect(),
            analytic: self.analytic.clone().map(|f| -> Analytic {
                Arc::new(move |x, y| t * f(x, y))
            }),
        }
    }

    /// `u_t(x) = t^2 u(t x)`. Exact when a closed form is attached, otherwise
    /// separable band-limited interpolation of the samples; points mapped
    /// outside the box give 0.
    pub fn dilate(&self, t: f64) -> Result<Self> {
        check_dilation(t)?;
        if t == 1.0 {
            return Ok(self.clone());
        }
        if let Some(f) = &self.analytic {
            let f = f.clone();
            return Self::sample(self.spec, move |x, y| t * t * f(t * x, t * y));
        }
        let n = self.spec.n;
        let a = dilation_matrix(&self.spec, t);
        // rows: U A^T, then columns: A (U A^T)
        let u = &self.values;
        let mut w = vec![0.0; n * n];
        for_each_row(&mut w, n, |j, row| {
            let ur = &u[j * n..(j + 1) * n];
            for (i, out) in row.iter_mut().enumerate() {
                *out = dot(ur, &a[i * n..(i + 1) * n]);
            }
        });
        let mut wt = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..n {
                wt[i * n + j] = w[j * n + i];
            }
        }
        let mut values = vec![0.0; n * n];
        for_each_row(&mut values, n, |i, row| {
            let ai = &a[i * n..(i + 1) * n];
            for (k, out) in row.iter_mut().enumerate() {
                *out = t * t * dot(ai, &wt[k * n..(k + 1) * n]);
            }
        });
        Self::from_values(self.spec, values)
    }

    /// `t^2 u(t x)` by bilinear interpolation of the samples, ignoring any
    /// attached closed form.
    pub fn dilate_bilinear(&self, t: f64) -> Result<Self> {
        check_dilation(t)?;
        let spec = self.spec;
        let values = (0..spec.len())
            .map(|k| {
                let (x, y) = spec.position(k);
                t * t * self.bilinear(t * x, t * y)
            })
            .collect();
        Self::from_values(spec, values)
    }

    /// Bilinear interpolant with zero ghost nodes one cell outside the box.
    pub fn bilinear(&self, x: f64, y: f64) -> f64 {
        let n = self.spec.n as isize;
        let h = self.spec.spacing();
        let l = self.spec.half_width;
        let fi = (x + l) / h - 0.5;
        let fj = (y + l) / h - 0.5;
        if !(fi > -1.0 && fj > -1.0 && fi < n as f64 && fj < n as f64) {
            return 0.0;
        }
        let i0 = fi.floor() as isize;
        let j0 = fj.floor() as isize;
        let (wx, wy) = (fi - i0 as f64, fj - j0 as f64);
        let at = |i: isize, j: isize| {
            if i < 0 || j < 0 || i >= n || j >= n {
                0.0
            } else {
                self.values[(i * n + j) as usize]
            }
        };
        (1.0 - wx) * ((1.0 - wy) * at(i0, j0) + wy * at(i0, j0 + 1))
            + wx * ((1.0 - wy) * at(i0 + 1, j0) + wy * at(i0 + 1, j0 + 1))
    }

    /// Spectral `-Δu`.
    pub fn neg_laplacian(&self) -> Self {
        self.fourier_multiply(|kx, ky| kx * kx + ky * ky)
    }

    /// Applies a real Fourier multiplier `m(kx, ky)` that is symmetric under
    /// swapping its arguments.
    pub fn fourier_multiply(&self, multiplier: impl Fn(f64, f64) -> f64) -> Self {
        let n = self.spec.n;
        let plan = spectral::plan(n);
        let k = wavenumbers(n, self.spec.spacing());
        let mut buf = spectral::to_complex(&self.values);
        plan.forward(&mut buf);
        let norm = 1.0 / (n * n) as f64;
        for (idx, c) in buf.iter_mut().enumerate() {
            *c *= multiplier(k[idx / n], k[idx % n]) * norm;
        }
        plan.inverse(&mut buf);
        Self {
            spec: self.spec,
            values: buf.iter().map(|c| c.re).collect(),
            analytic: None,
        }
    }

    /// Trigonometric interpolant of the samples evaluated off-grid.
    pub fn spectral_interpolator(&self) -> SpectralInterpolant {
        let n = self.spec.n;
        let plan = spectral::plan(n);
        let mut buf = spectral::to_complex(&self.values);
        plan.forward(&mut buf);
        SpectralInterpolant {
            spec: self.spec,
            coeffs: buf,
        }
    }
}

fn check_dilation(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::param("t", format!("dilation factor must be positive, got {t}")))
    }
}

/// Periodic cardinal function of an even-size grid, offset `d` in cells.
fn cardinal(d: f64, n: usize) -> f64 {
    let frac = d - d.round();
    if frac.abs() < 1e-13 {
        return if (d.round() as i64).rem_euclid(n as i64) == 0 { 1.0 } else { 0.0 };
    }
    (PI * d).sin() / (n as f64 * (PI * d / n as f64).tan())
}

/// `A[i][j] = S((t x_i - x_j)/h)`, zero rows where `t x_i` leaves the box.
fn dilation_matrix(spec: &GridSpec, t: f64) -> Vec<f64> {
    let n = spec.n;
    let h = spec.spacing();
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        let x = t * spec.coord(i);
        if x.abs() > spec.half_width {
            continue;
        }
        for j in 0..n {
            a[i * n + j] = cardinal((x - spec.coord(j)) / h, n);
        }
    }
    a
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn for_each_row(out: &mut [f64], n: usize, f: impl Fn(usize, &mut [f64]) + Sync + Send) {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        out.par_chunks_mut(n).enumerate().for_each(|(i, row)| f(i, row));
    }
    #[cfg(not(feature = "parallel"))]
    out.chunks_mut(n).enumerate().for_each(|(i, row)| f(i, row));
}

/// Band-limited interpolation of a sampled field.
pub struct SpectralInterpolant {
    spec: GridSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralInterpolant {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let n = self.spec.n;
        let h = self.spec.spacing();
        let k = wavenumbers(n, h);
        // Phases are relative to node 0 of each axis.
        let x0 = self.spec.coord(0);
        let ex: Vec<Complex64> = k
            .iter()
            .enumerate()
            .map(|(i, &kx)| nyquist_safe_phase(i, n, kx, x - x0))
            .collect();
        let ey: Vec<Complex64> = k
            .iter()
            .enumerate()
            .map(|(i, &ky)| nyquist_safe_phase(i, n, ky, y - x0))
            .collect();
        let mut acc = Complex64::default();
        // Transposed layout: the outer spectral index pairs with the second axis.
        for (a, eay) in ey.iter().enumerate() {
            let row = &self.coeffs[a * n..(a + 1) * n];
            let mut s = Complex64::default();
            for (c, e) in row.iter().zip(&ex) {
                s += c * e;
            }
            acc += s * eay;
        }
        acc.re / (n * n) as f64
    }
}

fn nyquist_safe_phase(i: usize, n: usize, k: f64, d: f64) -> Complex64 {
    if i == n / 2 {
        // Split the Nyquist mode symmetrically so the interpolant is real.
        Complex64::new((k * d).cos(), 0.0)
    } else {
        Complex64::from_polar(1.0, k * d)
    }
}
