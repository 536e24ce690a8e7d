//! Momentum-space multipliers of the differential operators.
//!
//! Under the Fourier convention phi(x) = integral e^(-ip.x) phi~(p), each
//! box acting on a mode contributes -p^2, so the finite-order operator has
//! symbol L_N(p^2) = sum_{n=0}^N (-1)^n a^(2(n-1)) p^(2n)/n!
//! = P_N(-a^2 p^2)/a^2, and the formal infinite-order operator has symbol
//! exp(-a^2 p^2)/a^2.

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::poly::{exp_partial_sum, exp_partial_sum_complex};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    FiniteOrder,
    InfiniteOrder,
}

/// The multiplier a differential operator becomes under Fourier transform.
#[derive(Debug, Clone)]
pub struct OperatorSymbol {
    params: ModelParams,
    kind: SymbolKind,
}

impl OperatorSymbol {
    pub fn finite(params: ModelParams) -> Self {
        Self {
            params,
            kind: SymbolKind::FiniteOrder,
        }
    }

    pub fn infinite(params: ModelParams) -> Self {
        Self {
            params,
            kind: SymbolKind::InfiniteOrder,
        }
    }

    pub fn new(params: ModelParams, kind: SymbolKind) -> Self {
        Self { params, kind }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn kind(&self) -> SymbolKind {
        self.kind
    }

    /// Symbol value at a real p^2.
    pub fn value(&self, p_squared: f64) -> f64 {
        let a2 = self.params.a() * self.params.a();
        match self.kind {
            SymbolKind::FiniteOrder => exp_partial_sum(self.params.order(), -a2 * p_squared) / a2,
            SymbolKind::InfiniteOrder => (-a2 * p_squared).exp() / a2,
        }
    }

    /// Symbol value at a complex p^2 (used by contour-shifted inversions).
    pub fn value_complex(&self, p_squared: Complex64) -> Complex64 {
        let a2 = self.params.a() * self.params.a();
        match self.kind {
            SymbolKind::FiniteOrder => {
                exp_partial_sum_complex(self.params.order(), -a2 * p_squared) / a2
            }
            SymbolKind::InfiniteOrder => (-a2 * p_squared).exp() / a2,
        }
    }

    /// Minimum of |symbol| over a uniform sampling of [lo, hi]; returns
    /// (argmin, min). Used to certify invertibility on grids.
    pub fn min_on_reals(&self, range: (f64, f64), samples: usize) -> Result<(f64, f64)> {
        let (lo, hi) = range;
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(Error::Validation(format!(
                "scan range must be a finite interval, got [{lo}, {hi}]"
            )));
        }
        if samples < 2 {
            return Err(Error::Validation(format!(
                "scan needs at least 2 samples, got {samples}"
            )));
        }
        let step = (hi - lo) / (samples - 1) as f64;
        let mut best = (lo, f64::INFINITY);
        for i in 0..samples {
            let p2 = lo + step * i as f64;
            let v = self.value(p2).abs();
            if v < best.1 {
                best = (p2, v);
            }
        }
        Ok(best)
    }
}
