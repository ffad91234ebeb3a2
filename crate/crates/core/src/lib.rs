//! Ground states of the planar Schrödinger–Poisson equation
//!
//! ```text
//! -Δu + V(x) u + (1/2π) (log|·| * u²) u = b |u|^{p-2} u   in R²
//! ```
//!
//! with a bounded potential well `V`, computed as minimizers of the energy on
//! the Nehari manifold (`p >= 4`) or on the Nehari–Pohozaev manifold
//! (`p >= 3`), together with the identities those manifolds rest on.

pub mod energy;
pub mod error;
pub mod grid;
pub mod io;
pub mod logkernel;
pub mod manifolds;
pub mod potential;
pub mod solver;
pub mod verify;
pub mod spectral;
mod sum;

pub use energy::{EnergyReport, Problem, ProblemParams};
pub use error::{Error, Result};
pub use grid::{GridFunction, GridSpec};
pub use logkernel::{KernelId, KernelTables, Regularization};
pub use potential::{PotentialKind, PotentialModel, PotentialReport};
pub use solver::{LevelComparison, Seed, SolveConfig, SolveResult};
