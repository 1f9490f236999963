//! Nodal LGL-DGSEM solver for the ideal multi-ion GLM-MHD equations.
//!
//! The library provides the building blocks of the discretization and the
//! `miondg` binary drives them:
//!
//! - [`state`]: conservative/primitive/entropy variable sets and their
//!   conversions for `N_i` ion species plus the divergence-cleaning field.
//! - [`physics`]: pointwise fluxes, non-conservative coefficient vectors,
//!   electron pressure and wave-speed estimates.
//! - [`kernels`]: two-point numerical fluxes and non-conservative terms
//!   (entropy-conservative, matrix-dissipation, Rusanov, central).
//! - [`basis`] / [`mesh`]: Legendre-Gauss-Lobatto SBP operators and uniform
//!   Cartesian meshes.
//! - [`dgsem`]: the split-form semidiscretization producing du/dt.
//! - [`time`]: low-storage RK4-5 loop with CFL-based step control and the
//!   divergence-cleaning speed update.
//! - [`diagnostics`]: quadrature functionals (errors, EOC, entropy rates,
//!   divergence norms, budgets).
//! - [`scenarios`]: the bundled experiments (`manufactured`, `weak_blast`,
//!   `khi`).

pub mod basis;
pub mod config;
pub mod diagnostics;
pub mod dgsem;
pub mod kernels;
pub mod mesh;
pub mod output;
pub mod physics;
pub mod scenarios;
pub mod state;
pub mod time;
pub mod verify;

pub use state::{Axis, SpeciesTable};

/// Errors shared by all modules of the solver.
#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("non-positive density for species {species}: rho = {value}")]
    NonPositiveDensity { species: usize, value: f64 },
    #[error("non-positive pressure for species {species}: p = {value}")]
    NonPositivePressure { species: usize, value: f64 },
    #[error("invalid entropy state for species {species}: beta = {value}")]
    InvalidEntropyState { species: usize, value: f64 },
    #[error("degenerate total ion charge density: n_e e = {0}")]
    DegenerateCharge(f64),
    #[error("non-positive argument to the logarithmic mean: {0}")]
    NonPositiveArgument(f64),
    #[error("unsupported polynomial degree {0}: expected 1..=15")]
    UnsupportedDegree(usize),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid species configuration: {0}")]
    InvalidSpecies(String),
    #[error("admissibility lost in element {element}, node {node}: {reason}")]
    AdmissibilityLost {
        element: usize,
        node: usize,
        reason: String,
    },
    #[error("simulation aborted at t = {time} (step {step}): {reason}")]
    SimulationAborted {
        time: f64,
        step: usize,
        reason: String,
    },
    #[error("non-finite wave speed while estimating the time step")]
    NonFiniteWaveSpeed,
    #[error("zero error entry: EOC is undefined")]
    ZeroError,
    #[error("zero reference value for the normalized poloidal energy")]
    ZeroReference,
    #[error("divergence diagnostics require a 2D mesh")]
    Requires2D,
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SolverError>;
