//! Free-space convolution with `log r`, `log(1+r)` and `log(1+1/r)` by
//! zero-padded FFT, and the functionals `N_i` and forms `B_i` built on it.
//!
//! The `log r` table is by default the band-limited kernel of the disc
//! truncation `log|x| 1_{|x|<R}` with `R` beyond the box diagonal: its
//! samples agree with `log r` to roundoff away from the origin and carry the
//! correct singular weight at `r = 0`, which makes the quadrature spectrally
//! accurate for smooth densities. The plain cell-mean regularization is
//! available as [`Regularization::CellMean`].

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec};
use crate::spectral::{self, wavenumbers};
use crate::sum::neumaier;

/// Which of the three kernels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelId {
    /// `K0 = log r`.
    Log = 0,
    /// `K1 = log(1 + r)`.
    LogOnePlus = 1,
    /// `K2 = log(1 + 1/r)`.
    LogOnePlusInv = 2,
}

impl KernelId {
    pub const ALL: [KernelId; 3] = [KernelId::Log, KernelId::LogOnePlus, KernelId::LogOnePlusInv];

    pub fn from_index(i: usize) -> Result<Self> {
        Self::ALL
            .get(i)
            .copied()
            .ok_or_else(|| Error::param("kernel_id", format!("expected 0, 1 or 2, got {i}")))
    }
}

/// Treatment of the `log r` singularity at zero displacement.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regularization {
    /// Band-limited truncated kernel.
    #[default]
    Spectral,
    /// Point samples of `log r` with the origin cell replaced by the exact
    /// mean of `log|x|` over that cell.
    CellMean,
}

/// Truncation radius of the spectral kernel in units of the box diagonal.
const TRUNCATION_FACTOR: f64 = 1.5;

/// Displacement tables and their spectra on the `2n x 2n` padded grid.
#[derive(Clone, Debug)]
pub struct KernelTables {
    spec: GridSpec,
    regularization: Regularization,
    m: usize,
    tables: [Vec<f64>; 3],
    spectra: [Vec<f64>; 3],
}

type CacheKey = (u64, usize, Regularization);

fn cache() -> &'static Mutex<HashMap<CacheKey, Arc<KernelTables>>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<KernelTables>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl KernelTables {
    /// Spectral tables for `spec`.
    pub fn build(spec: GridSpec) -> Self {
        Self::build_with(spec, Regularization::Spectral)
    }

    pub fn build_with(spec: GridSpec, regularization: Regularization) -> Self {
        let n = spec.n();
        let m = 2 * n;
        let h = spec.spacing();
        let k0 = match regularization {
            Regularization::Spectral => truncated_log_table(spec),
            Regularization::CellMean => {
                let origin = h.ln() + cell_mean_log_constant();
                displacement_table(n, h, |r| if r == 0.0 { origin } else { r.ln() })
            }
        };
        let k1 = displacement_table(n, h, f64::ln_1p);
        let k2: Vec<f64> = k1.iter().zip(&k0).map(|(a, b)| a - b).collect();
        let tables = [k0, k1, k2];
        let spectra = [
            real_spectrum(&tables[0], m),
            real_spectrum(&tables[1], m),
            real_spectrum(&tables[2], m),
        ];
        Self {
            spec,
            regularization,
            m,
            tables,
            spectra,
        }
    }

    /// Process-wide cached spectral tables.
    pub fn shared(spec: GridSpec) -> Arc<Self> {
        Self::shared_with(spec, Regularization::Spectral)
    }

    pub fn shared_with(spec: GridSpec, regularization: Regularization) -> Arc<Self> {
        let key = (spec.half_width().to_bits(), spec.n(), regularization);
        if let Some(t) = cache().lock().expect("kernel cache poisoned").get(&key) {
            return t.clone();
        }
        let built = Arc::new(Self::build_with(spec, regularization));
        cache()
            .lock()
            .expect("kernel cache poisoned")
            .entry(key)
            .or_insert(built)
            .clone()
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn regularization(&self) -> Regularization {
        self.regularization
    }

    /// Padded size `2n`.
    pub fn padded_size(&self) -> usize {
        self.m
    }

    /// Table value at displacement `(di, dj)` cells, `|di|, |dj| < n`.
    pub fn kernel_at(&self, id: KernelId, di: isize, dj: isize) -> f64 {
        let n = self.spec.n() as isize;
        assert!(di.abs() < n && dj.abs() < n, "displacement ({di}, {dj}) outside the table");
        let m = self.m as isize;
        let (a, b) = (di.rem_euclid(m) as usize, dj.rem_euclid(m) as usize);
        self.tables[id as usize][a * self.m + b]
    }

    fn pad(&self, f: &GridFunction) -> Result<Vec<Complex64>> {
        f.ensure_same_grid(&self.spec)?;
        let n = self.spec.n();
        let mut buf = vec![Complex64::default(); self.m * self.m];
        for (i, row) in f.values().chunks_exact(n).enumerate() {
            for (j, &v) in row.iter().enumerate() {
                buf[i * self.m + j] = Complex64::new(v, 0.0);
            }
        }
        spectral::plan(self.m).forward(&mut buf);
        Ok(buf)
    }

    /// `w(x) = h² Σ_y K(x - y) ρ(y)` on the original grid.
    pub fn convolve(&self, id: KernelId, density: &GridFunction) -> Result<GridFunction> {
        let mut buf = self.pad(density)?;
        let n = self.spec.n();
        let scale = self.spec.cell_area() / (self.m * self.m) as f64;
        for (c, &k) in buf.iter_mut().zip(&self.spectra[id as usize]) {
            *c *= k * scale;
        }
        spectral::plan(self.m).inverse(&mut buf);
        let values = (0..n * n).map(|k| buf[(k / n) * self.m + k % n].re).collect();
        GridFunction::from_values(self.spec, values)
    }

    /// `B_i(f, g) = (1/2π) ∫ (K_i * g) f`, evaluated in Fourier space.
    pub fn b_form(&self, id: KernelId, f: &GridFunction, g: &GridFunction) -> Result<f64> {
        let fh = self.pad(f)?;
        let gh = self.pad(g)?;
        let k = &self.spectra[id as usize];
        let s = neumaier((0..fh.len()).map(|i| k[i] * (fh[i].re * gh[i].re + fh[i].im * gh[i].im)));
        Ok(self.parseval_scale() * s)
    }

    /// `N_i(u) = B_i(u², u²)`.
    pub fn n_functional(&self, id: KernelId, u: &GridFunction) -> Result<f64> {
        Ok(self.n_all(u)?[id as usize])
    }

    /// `[N0, N1, N2]` from one transform of `u²`.
    pub fn n_all(&self, u: &GridFunction) -> Result<[f64; 3]> {
        let rho = u.map(|v| v * v);
        let rh = self.pad(&rho)?;
        let mut out = [0.0; 3];
        for (o, k) in out.iter_mut().zip(&self.spectra) {
            *o = self.parseval_scale() * neumaier(rh.iter().zip(k).map(|(c, &kk)| kk * c.norm_sqr()));
        }
        Ok(out)
    }

    fn parseval_scale(&self) -> f64 {
        let a = self.spec.cell_area();
        a * a / ((self.m * self.m) as f64 * 2.0 * PI)
    }

    /// Copy whose `log r` origin cell is shifted by `delta` while `K1`, `K2`
    /// are left alone, so the split identity breaks. For exercising checks.
    #[doc(hidden)]
    pub fn with_perturbed_origin(&self, delta: f64) -> Self {
        let mut out = self.clone();
        out.tables[0][0] += delta;
        for v in out.spectra[0].iter_mut() {
            *v += delta;
        }
        out
    }
}

/// `f(h |d|)` on the padded displacement grid, zero on the unused index `n`.
fn displacement_table(n: usize, h: f64, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let m = 2 * n;
    let disp = |i: usize| -> Option<f64> {
        match i {
            i if i < n => Some(i as f64),
            i if i > n => Some(i as f64 - m as f64),
            _ => None,
        }
    };
    let mut out = vec![0.0; m * m];
    for i in 0..m {
        let Some(a) = disp(i) else { continue };
        for j in 0..m {
            let Some(b) = disp(j) else { continue };
            out[i * m + j] = f(h * a.hypot(b));
        }
    }
    out
}

/// Samples of the band-limited `log|x| 1_{|x|<R}`, `R` = 1.5 box diagonals,
/// computed on a `4n` periodic grid, whose period exceeds `R` plus the
/// largest displacement, and restricted to displacements below `n` cells.
fn truncated_log_table(spec: GridSpec) -> Vec<f64> {
    let n = spec.n();
    let h = spec.spacing();
    let big = 4 * n;
    let r = TRUNCATION_FACTOR * 2.0 * std::f64::consts::SQRT_2 * spec.half_width();
    let k = wavenumbers(big, h);
    let at_zero = 2.0 * PI * (r * r / 2.0 * r.ln() - r * r / 4.0);
    let (rlogr, tau) = (r * r.ln(), 2.0 * PI);
    let mut buf: Vec<Complex64> = (0..big * big)
        .map(|idx| {
            let kk = k[idx / big].hypot(k[idx % big]);
            let g = if kk == 0.0 {
                at_zero
            } else {
                let kr = kk * r;
                tau * (rlogr * libm::j1(kr) / kk - (1.0 - libm::j0(kr)) / (kk * kk))
            };
            Complex64::new(g, 0.0)
        })
        .collect();
    spectral::plan(big).inverse(&mut buf);
    let norm = 1.0 / ((big * big) as f64 * h * h);
    let m = 2 * n;
    let mut out = vec![0.0; m * m];
    let src = |d: usize| if d < n { Some(d) } else if d > n { Some(big - (m - d)) } else { None };
    for i in 0..m {
        let Some(si) = src(i) else { continue };
        for j in 0..m {
            let Some(sj) = src(j) else { continue };
            out[i * m + j] = buf[si * big + sj].re * norm;
        }
    }
    out
}

fn real_spectrum(table: &[f64], m: usize) -> Vec<f64> {
    let mut buf = spectral::to_complex(table);
    spectral::plan(m).forward(&mut buf);
    buf.into_iter().map(|c| c.re).collect()
}

/// Mean of `log|x|` over the unit square centered at the origin, by adaptive
/// Simpson quadrature of the closed-form radial integral over one octant.
pub fn cell_mean_log_constant() -> f64 {
    static C0: OnceLock<f64> = OnceLock::new();
    *C0.get_or_init(|| {
        // ∫_0^R r log r dr with R = 1/(2 cos θ)
        let f = |theta: f64| {
            let rr = 0.5 / theta.cos();
            rr * rr * (0.5 * rr.ln() - 0.25)
        };
        8.0 * adaptive_simpson(&f, 0.0, PI / 4.0, 1e-15, 50)
    })
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    rec(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, depth)
}
