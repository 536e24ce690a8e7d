//! Numerical toolkit for a family of higher-derivative wave operators built
//! from truncated exponential series of the d'Alembertian, together with the
//! formal infinite-order exponential operator they approach.
//!
//! The crate provides exact dispersion-polynomial construction with
//! certified root analysis, momentum-space operator symbols and propagators,
//! spectral solution of homogeneous and sourced equations on periodic grids,
//! canonical energy-momentum tensors with conservation diagnostics, and
//! per-mode time evolution through the companion (Ostrogradsky) reduction.
//!
//! Conventions: metric signature (+,-,...,-); coordinate order (t, x1, ...);
//! Fourier modes e^(-i(omega t - k.x)) so each d'Alembertian contributes
//! -p^2 = -(omega^2 - |k|^2) to an operator symbol.

pub mod cli;
pub mod dynamics;
pub mod emt;
pub mod error;
pub mod fieldops;
pub mod grid;
pub mod model;
pub mod modes;
pub mod poly;
pub mod propagator;
pub mod roots;
pub mod solver;
pub mod sturm;
pub mod symbol;

pub use error::{Error, Result};
pub use model::ModelParams;

// Complex values appear throughout the public API; re-export the crate so
// downstream users match the version.
pub use num_complex;
