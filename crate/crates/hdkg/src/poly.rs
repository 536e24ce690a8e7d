//! The dispersion polynomial family and the exponential partial sum.
//!
//! f_N(q) = sum_{n=0}^{N} (-1)^n N!/(N-n)! q^(N-n) is a degree-N polynomial
//! with exact integer coefficients: the coefficient of q^k is
//! (-1)^(N-k) N!/k!. It is a rescaling of the exponential partial sum
//! P_N(z) = sum_{n=0}^{N} z^n/n! through f_N(q) = (-1)^N N! P_N(-q), so the
//! two share zero sets.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Largest supported order: 20! is the largest factorial representable in i64.
pub const MAX_POLY_ORDER: u32 = 20;

/// Degree-N polynomial with exact integer coefficients in ascending powers;
/// the leading coefficient is always 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncExpPoly {
    order: u32,
    coeffs: Vec<i64>,
}

impl TruncExpPoly {
    pub fn order(&self) -> u32 {
        self.order
    }

    /// Coefficients in ascending powers of q; exact integers.
    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    /// Horner evaluation in f64.
    pub fn eval(&self, q: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * q + c as f64;
        }
        acc
    }

    /// Horner evaluation at a complex point.
    pub fn eval_complex(&self, q: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * q + c as f64;
        }
        acc
    }

    /// Exact integer coefficients of the derivative, ascending powers.
    pub fn derivative_coeffs(&self) -> Vec<i64> {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| (k as i64) * c)
            .collect()
    }
}

/// Builds f_N with exact coefficients via the descending recurrence
/// c_{k-1} = -k * c_k starting from the leading c_N = 1.
pub fn build_poly(order: u32) -> Result<TruncExpPoly> {
    if order > MAX_POLY_ORDER {
        return Err(Error::Range(format!(
            "polynomial order {order} exceeds the exact-integer cap {MAX_POLY_ORDER}"
        )));
    }
    let n = order as usize;
    let mut coeffs = vec![0i64; n + 1];
    coeffs[n] = 1;
    for k in (1..=n).rev() {
        coeffs[k - 1] = coeffs[k]
            .checked_mul(-(k as i64))
            .ok_or_else(|| Error::Internal(format!("coefficient overflow at order {order}")))?;
    }
    Ok(TruncExpPoly { order, coeffs })
}

/// Horner evaluation of f_N at q.
pub fn eval_poly(p: &TruncExpPoly, q: f64) -> f64 {
    p.eval(q)
}

/// Verifies the exact coefficient-wise identity f'_N = c_N * f_{N-1},
/// determining the constant c_N from the leading coefficients instead of
/// assuming it. For this family the constant works out to N.
pub fn derivative_check(order: u32) -> Result<bool> {
    if !(1..=MAX_POLY_ORDER).contains(&order) {
        return Err(Error::Range(format!(
            "derivative check requires 1 <= N <= {MAX_POLY_ORDER}, got {order}"
        )));
    }
    let f_n = build_poly(order)?;
    let f_prev = build_poly(order - 1)?;
    let deriv = f_n.derivative_coeffs();
    let lead_prev = *f_prev.coeffs().last().expect("nonempty");
    let lead_deriv = *deriv.last().expect("nonempty");
    if lead_prev == 0 || lead_deriv % lead_prev != 0 {
        return Ok(false);
    }
    let c = lead_deriv / lead_prev;
    Ok(deriv
        .iter()
        .zip(f_prev.coeffs())
        .all(|(&d, &p)| p.checked_mul(c) == Some(d)))
}

/// Inverse factorials 1/0!, ..., 1/N! for partial-sum evaluation.
fn inv_factorials(order: u32) -> Vec<f64> {
    let mut out = Vec::with_capacity(order as usize + 1);
    let mut inv = 1.0;
    out.push(inv);
    for k in 1..=order as u64 {
        inv /= k as f64;
        out.push(inv);
    }
    out
}

/// Exponential partial sum P_N(z) = sum_{n=0}^{N} z^n/n! by Horner.
pub fn exp_partial_sum(order: u32, z: f64) -> f64 {
    let inv = inv_factorials(order);
    let mut acc = 0.0;
    for &c in inv.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

/// Complex-argument variant of [`exp_partial_sum`].
pub fn exp_partial_sum_complex(order: u32, z: Complex64) -> Complex64 {
    let inv = inv_factorials(order);
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in inv.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

/// N! in f64 (exact up to N = 18, correctly rounded beyond).
pub fn factorial_f64(order: u32) -> f64 {
    (1..=order as u64).map(|k| k as f64).product()
}
