//! WebAssembly bindings for the static demo page in `www/`.
//!
//! The computations live in [`demo`] as plain Rust so they can be tested
//! natively; the `#[wasm_bindgen]` wrappers only convert errors.

pub mod demo;

use wasm_bindgen::prelude::*;

fn js(e: demo::DemoError) -> JsError {
    JsError::new(&e.to_string())
}

/// `V(r, 0)` at `samples` points of `[0, radius]`.
#[wasm_bindgen]
pub fn potential_profile(potential: &str, radius: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    demo::potential_profile(potential, radius, samples).map_err(js)
}

#[wasm_bindgen]
pub struct Fiber {
    inner: demo::FiberCurve,
}

#[wasm_bindgen]
impl Fiber {
    #[wasm_bindgen(getter)]
    pub fn t(&self) -> Vec<f64> {
        self.inner.t.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn energy(&self) -> Vec<f64> {
        self.inner.energy.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn derivative(&self) -> Vec<f64> {
        self.inner.derivative.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn sign_changes(&self) -> usize {
        self.inner.sign_changes
    }
}

/// Energy along the fiber of a Gaussian of the given amplitude.
#[wasm_bindgen]
pub fn fiber_scan(family: &str, potential: &str, p: f64, b: f64, amplitude: f64, t_max: f64) -> Result<Fiber, JsError> {
    let inner = demo::fiber_scan(&demo::ScanRequest {
        family,
        potential,
        p,
        b,
        amplitude,
        t_max,
    })
    .map_err(js)?;
    Ok(Fiber { inner })
}

#[wasm_bindgen]
pub struct GroundState {
    inner: demo::GroundState,
}

#[wasm_bindgen]
impl GroundState {
    #[wasm_bindgen(getter)]
    pub fn n(&self) -> usize {
        self.inner.n
    }

    #[wasm_bindgen(getter)]
    pub fn half_width(&self) -> f64 {
        self.inner.half_width
    }

    /// Row-major samples.
    #[wasm_bindgen(getter)]
    pub fn values(&self) -> Vec<f64> {
        self.inner.values.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn level(&self) -> f64 {
        self.inner.level
    }

    #[wasm_bindgen(getter)]
    pub fn converged(&self) -> bool {
        self.inner.converged
    }

    #[wasm_bindgen(getter)]
    pub fn iterations(&self) -> usize {
        self.inner.iterations
    }

    #[wasm_bindgen(getter)]
    pub fn method(&self) -> String {
        self.inner.method.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn residuals(&self) -> Vec<f64> {
        self.inner.residuals.clone()
    }
}

/// Minimizer on a small `n x n` grid over `[-half_width, half_width]²`.
#[wasm_bindgen]
pub fn ground_state(potential: &str, p: f64, b: f64, n: usize, half_width: f64) -> Result<GroundState, JsError> {
    let inner = demo::ground_state(potential, p, b, n, half_width).map_err(js)?;
    Ok(GroundState { inner })
}
