//! Model parameters selecting one member of the operator family.

use crate::error::{Error, Result};
use crate::poly::MAX_POLY_ORDER;
use crate::roots::positive_root;

/// Family selector: derivative order 2N, length scale a, and the space-time
/// dimension D. Metric signature is (+,-,...,-) throughout the crate.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    order: u32,
    a: f64,
    dims: usize,
}

impl ModelParams {
    /// Two-dimensional model (one time axis, one space axis).
    pub fn new(order: u32, a: f64) -> Result<Self> {
        Self::with_dims(order, a, 2)
    }

    pub fn with_dims(order: u32, a: f64, dims: usize) -> Result<Self> {
        if !a.is_finite() || a <= 0.0 {
            return Err(Error::Validation(format!(
                "length scale a must be positive and finite, got {a}"
            )));
        }
        if dims < 2 {
            return Err(Error::Validation(format!(
                "space-time dimension must be at least 2, got {dims}"
            )));
        }
        Ok(Self { order, a, dims })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn dims(&self) -> usize {
        self.dims
    }
}

/// Mass of the oscillatory branch, sqrt(q_N)/a. Defined only for odd N,
/// where the dispersion polynomial has its one positive root.
pub fn mass_scale(params: &ModelParams) -> Result<f64> {
    let n = params.order();
    if n > MAX_POLY_ORDER {
        return Err(Error::Range(format!(
            "mass scale requires N <= {MAX_POLY_ORDER}, got {n}"
        )));
    }
    if n.is_multiple_of(2) {
        return Err(Error::Parity(format!(
            "no mass shell exists for even order {n}"
        )));
    }
    Ok(positive_root(n)?.sqrt() / params.a())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_inputs() {
        assert!(ModelParams::new(1, 0.0).is_err());
        assert!(ModelParams::new(1, -1.0).is_err());
        assert!(ModelParams::new(1, f64::NAN).is_err());
        assert!(ModelParams::with_dims(1, 1.0, 1).is_err());
        assert!(ModelParams::with_dims(1, 1.0, 3).is_ok());
    }

    #[test]
    fn mass_scale_known_values() {
        let m = mass_scale(&ModelParams::new(1, 2.0).unwrap()).unwrap();
        assert_eq!(m, 0.5);
        // The second-order member recovers mass 1/a.
        let m = mass_scale(&ModelParams::new(1, 1.0).unwrap()).unwrap();
        assert_eq!(m, 1.0);
        let m3 = mass_scale(&ModelParams::new(3, 1.0).unwrap()).unwrap();
        assert!((m3 - 1.59607163798332f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn mass_scale_guards() {
        assert!(matches!(
            mass_scale(&ModelParams::new(2, 1.0).unwrap()),
            Err(Error::Parity(_))
        ));
        assert!(matches!(
            mass_scale(&ModelParams::new(21, 1.0).unwrap()),
            Err(Error::Range(_))
        ));
    }
}
