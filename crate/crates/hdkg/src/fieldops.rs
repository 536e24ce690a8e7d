//! Operator application, residuals, and action evaluation on grids.

use crate::error::{Error, Result};
use crate::grid::{fft_forward, fft_inverse, hermitian_symmetrize, GridField};
use crate::model::ModelParams;
use crate::symbol::OperatorSymbol;

/// Imaginary leakage allowed after a real-symbol round trip, relative to the
/// larger of the input and output amplitudes.
const REALITY_REL_TOL: f64 = 1e-12;

/// Applies a diagonal multiplier in mode space: FFT, multiply each bin by
/// f(p^2 of the bin), inverse FFT. Shared by the public operator application
/// and by composition tests.
pub(crate) fn apply_multiplier(g: &GridField, mut f: impl FnMut(f64) -> f64) -> Result<GridField> {
    let spec = g.spec();
    let p2 = spec.p_squared_bins();
    let mut hat = fft_forward(spec, g.values());
    hermitian_symmetrize(spec, &mut hat);
    for (h, &p2) in hat.iter_mut().zip(&p2) {
        *h *= f(p2);
    }
    let back = fft_inverse(spec, hat);
    let out_re_max = back.iter().fold(0.0f64, |m, z| m.max(z.re.abs()));
    let im_max = back.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
    let scale = out_re_max.max(g.max_abs());
    if im_max > REALITY_REL_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Internal(format!(
            "operator application leaked imaginary residue {im_max} at field scale {scale}"
        )));
    }
    GridField::new(spec.clone(), back.into_iter().map(|z| z.re).collect())
}

/// Applies the differential operator by multiplying each discrete mode with
/// the symbol at that mode's p^2 = omega^2 - |k|^2.
pub fn apply_operator(symbol: &OperatorSymbol, g: &GridField) -> Result<GridField> {
    apply_multiplier(g, |p2| symbol.value(p2))
}

/// Residual of the homogeneous equation, with a degenerate-input marker for
/// identically zero fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualNorm {
    pub value: f64,
    pub degenerate: bool,
}

/// Max-abs of the operator applied to the field, normalized by the max-abs
/// of the field itself.
pub fn residual_norm(params: &ModelParams, g: &GridField) -> Result<ResidualNorm> {
    let input_max = g.max_abs();
    if input_max == 0.0 {
        return Ok(ResidualNorm {
            value: 0.0,
            degenerate: true,
        });
    }
    let out = apply_operator(&OperatorSymbol::finite(params.clone()), g)?;
    Ok(ResidualNorm {
        value: out.max_abs() / input_max,
        degenerate: false,
    })
}

/// Neumaier-compensated sum; the action involves large cancellations between
/// mode contributions, and plain summation noise would mask the gradient
/// checks this module exists to support.
pub(crate) fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Discretized action S = -(1/2) sum phi (L phi) * cell volume over the
/// periodic grid (the trapezoidal rule is the plain sum on periodic data).
pub fn evaluate_action(params: &ModelParams, g: &GridField) -> Result<f64> {
    let l_phi = apply_operator(&OperatorSymbol::finite(params.clone()), g)?;
    let dot = neumaier_sum(g.values().iter().zip(l_phi.values()).map(|(&a, &b)| a * b));
    Ok(-0.5 * dot * g.spec().cell_volume())
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Deterministic distinct probe indices into a buffer of the given length.
fn probe_indices(len: usize, count: usize) -> Vec<usize> {
    let mut state: u64 = 0x8831_AD92_0E1F_77C3;
    let mut chosen = Vec::with_capacity(count);
    while chosen.len() < count {
        let idx = (splitmix64(&mut state) % len as u64) as usize;
        if !chosen.contains(&idx) {
            chosen.push(idx);
        }
    }
    chosen
}

/// Central-difference check of the functional derivative of the action:
/// perturbs the field by +/- h at probe points and compares
/// (S(+h) - S(-h))/(2h) against -(L phi)(point) * cell volume.
/// Returns the maximum absolute discrepancy, expected O(h^2).
pub fn action_gradient_check(
    params: &ModelParams,
    g: &GridField,
    probe_points: usize,
    h: f64,
) -> Result<f64> {
    if !h.is_finite() || h <= 0.0 {
        return Err(Error::Validation(format!(
            "step size h must be positive and finite, got {h}"
        )));
    }
    if probe_points == 0 || probe_points > g.spec().len() {
        return Err(Error::Validation(format!(
            "probe count {probe_points} must lie in 1..={}",
            g.spec().len()
        )));
    }
    let l_phi = apply_operator(&OperatorSymbol::finite(params.clone()), g)?;
    let cell = g.spec().cell_volume();
    let mut max_disc = 0.0f64;
    for idx in probe_indices(g.spec().len(), probe_points) {
        let mut plus = g.clone();
        plus.values_mut()[idx] += h;
        let mut minus = g.clone();
        minus.values_mut()[idx] -= h;
        let s_plus = evaluate_action(params, &plus)?;
        let s_minus = evaluate_action(params, &minus)?;
        let fd = (s_plus - s_minus) / (2.0 * h);
        let analytic = -l_phi.values()[idx] * cell;
        max_disc = max_disc.max((fd - analytic).abs());
    }
    Ok(max_disc)
}
