//! Square 2D FFTs built from rustfft row transforms.
//!
//! `forward` leaves the spectrum in transposed layout (for an input indexed
//! `i * m + j`, output index `kj * m + ki` holds mode `(ki, kj)`); `inverse` undoes
//! exactly that, so multipliers that are symmetric under swapping the two
//! axes can be applied without ever transposing back.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub struct Fft2 {
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2").field("m", &self.m).finish()
    }
}

/// Shared plan for an `m x m` transform.
pub fn plan(m: usize) -> Arc<Fft2> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Fft2>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(m)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Fft2 {
                m,
                forward: planner.plan_fft_forward(m),
                inverse: planner.plan_fft_inverse(m),
            })
        })
        .clone()
}

impl Fft2 {
    pub fn size(&self) -> usize {
        self.m
    }

    /// Unnormalized forward transform; output in transposed layout.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.pass(&self.forward, data);
    }

    /// Unnormalized inverse of [`Fft2::forward`] (scale by `1/m^2` to invert).
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.pass(&self.inverse, data);
    }

    fn pass(&self, fft: &Arc<dyn Fft<f64>>, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.m * self.m);
        self.rows(fft, data);
        transpose(data, self.m);
        self.rows(fft, data);
    }

    fn rows(&self, fft: &Arc<dyn Fft<f64>>, data: &mut [Complex64]) {
        #[cfg(feature = "parallel")]
        data.par_chunks_mut(self.m * 16).for_each(|block| {
            let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
            fft.process_with_scratch(block, &mut scratch);
        });
        #[cfg(not(feature = "parallel"))]
        {
            let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
            fft.process_with_scratch(data, &mut scratch);
        }
    }
}

fn transpose(data: &mut [Complex64], m: usize) {
    for i in 0..m {
        for j in (i + 1)..m {
            data.swap(i * m + j, j * m + i);
        }
    }
}

/// Angular wavenumbers of an `m`-point periodic grid with spacing `h`,
/// in FFT order (the Nyquist mode carries `-pi/h`).
pub fn wavenumbers(m: usize, h: f64) -> Vec<f64> {
    let dk = 2.0 * PI / (m as f64 * h);
    (0..m)
        .map(|i| {
            let signed = if i < m / 2 { i as isize } else { i as isize - m as isize };
            signed as f64 * dk
        })
        .collect()
}

/// Real field -> complex buffer.
pub fn to_complex(values: &[f64]) -> Vec<Complex64> {
    values.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}
