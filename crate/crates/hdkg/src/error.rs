//! Error taxonomy shared across the crate.
//!
//! The CLI maps these onto exit codes: validation-class errors (bad
//! parameters, ranges, parity, commensurability) exit 2; mathematical
//! obstructions (pole proximity, shell collisions, amplification guards)
//! exit 3.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Parameter outside a supported range (order caps, sizes).
    #[error("range error: {0}")]
    Range(String),

    /// Input fails a structural precondition (shape, sign, parse, format).
    #[error("validation error: {0}")]
    Validation(String),

    /// Operation requires an odd order N; no real dispersion root exists
    /// for even N.
    #[error("parity error: {0}")]
    Parity(String),

    /// A mode's frequency does not fit an integer number of periods in the
    /// box, so spectral operations would leak.
    #[error("commensurability error: {0}")]
    Commensurability(String),

    /// Evaluation requested too close to a real pole with no contour
    /// prescription.
    #[error("pole proximity: {0}")]
    PoleProximity(String),

    /// A populated grid mode sits on the mass shell; spectral inversion
    /// needs a contour choice or a shifted grid.
    #[error("shell collision: {0}")]
    ShellCollision(String),

    /// Inverting the symbol would amplify a populated mode beyond the
    /// overflow guard.
    #[error("amplification guard: {0}")]
    Amplification(String),

    /// A cross-check disagreed; signals a bug in this crate, not bad input.
    #[error("internal error: {0}")]
    Internal(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
