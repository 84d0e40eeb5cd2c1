//! Extinction certificates for generalized Lotka-Volterra systems
//! `x_i' = x_i (c_i + Σ_j s_ij z_j)`.
//!
//! Exact rational arithmetic is used for every sign decision: null vectors,
//! their supports, orientations and the trophic checks. Simulation is in `f64`.

pub mod certificates;
pub mod cli;
pub mod halfplanes;
pub mod integrator;
pub mod linalg;
pub mod model;
pub mod nullspace;
pub mod report;
pub mod trophic;
