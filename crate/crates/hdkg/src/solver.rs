//! Homogeneous solutions and sourced spectral inversion.
//!
//! Odd orders carry a one-parameter mass shell and admit plane-wave
//! solutions; even orders and the infinite-order operator have strictly
//! nonzero symbols, so the sourced equation is solved uniquely by mode-wise
//! division and the homogeneous problem only by zero.

use crate::error::{Error, Result};
use crate::grid::{fft_forward, fft_inverse, ComplexGridField, GridField};
use crate::model::ModelParams;
use crate::modes::{ModeField, PlaneWaveMode};
use crate::propagator::Contour;
use crate::roots::positive_root;
use crate::symbol::{OperatorSymbol, SymbolKind};
use num_complex::Complex64;
use serde::Serialize;

/// Fourier bins with |J^| below this fraction of the peak are treated as
/// unpopulated: they carry only round-off noise and must not be divided by
/// a tiny or exponentially small symbol.
pub const POPULATION_REL_THRESHOLD: f64 = 1e-14;
/// Hard cap on the inverse amplification factor e^(a^2 p^2) of the
/// infinite-order solve; populated modes beyond it abort loudly.
pub const AMPLIFICATION_CAP: f64 = 1e12;
/// Exclusion band around the mass shell, in q = a^2 p^2 units, for bare
/// spectral division at odd orders.
pub const DELTA_SHELL_Q: f64 = 1e-6;
/// Half-width, in q units, of the +/- i eps pair used by the
/// principal-value contour of the sourced solve.
const PRINCIPAL_VALUE_EPS_Q: f64 = 1e-6;

/// Per-solve diagnostics: smallest symbol magnitude met on populated modes,
/// largest inverse factor applied, and the forward-residual of the result.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SolveDiagnostics {
    pub min_symbol: f64,
    pub max_amplification: f64,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub field: GridField,
    pub diagnostics: SolveDiagnostics,
}

#[derive(Debug, Clone)]
pub struct ComplexSolveOutput {
    pub field: ComplexGridField,
    pub diagnostics: SolveDiagnostics,
}

/// Plane-wave superposition solving the homogeneous equation: every
/// spectrum entry (amplitude, k) becomes a conjugate-pair mode on the mass
/// shell, omega = sqrt(|k|^2 + q_N/a^2).
pub fn homogeneous_solution(
    params: &ModelParams,
    spectrum: &[(Complex64, Vec<f64>)],
) -> Result<ModeField> {
    let n = params.order();
    if n.is_multiple_of(2) {
        return Err(Error::Parity(format!(
            "order {n} admits only the trivial homogeneous solution; plane-wave \
             modes exist only for odd orders"
        )));
    }
    let q = positive_root(n)?;
    let a = params.a();
    let m2 = q / (a * a);
    let modes = spectrum
        .iter()
        .map(|(amplitude, k)| {
            let k2: f64 = k.iter().map(|v| v * v).sum();
            PlaneWaveMode {
                amplitude: *amplitude,
                k: k.clone(),
                omega: (k2 + m2).sqrt(),
                conjugate_pair: true,
            }
        })
        .collect();
    ModeField::new(params.clone(), modes)
}

struct InversionScan {
    phi_hat: Vec<Complex64>,
    min_symbol: f64,
    max_amplification: f64,
}

/// Divides populated bins of J^ by the (possibly contour-shifted) symbol.
fn invert_bins(
    symbol: &OperatorSymbol,
    j_hat: &[Complex64],
    p2: &[f64],
    shift: Option<(f64, f64)>, // (eps, weight of conjugate shift) for contours
) -> Result<InversionScan> {
    let j_max = j_hat.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let threshold = POPULATION_REL_THRESHOLD * j_max;
    let a = symbol.params().a();
    let a2 = a * a;
    let infinite = symbol.kind() == SymbolKind::InfiniteOrder;
    let odd_pole_q = if !infinite && symbol.params().order() % 2 == 1 && shift.is_none() {
        Some(positive_root(symbol.params().order())?)
    } else {
        None
    };

    let mut phi_hat = vec![Complex64::new(0.0, 0.0); j_hat.len()];
    let mut min_symbol = f64::INFINITY;
    let mut max_amp = 0.0f64;
    let mut populated = false;
    for (i, (&jv, &p2v)) in j_hat.iter().zip(p2).enumerate() {
        if jv.norm() <= threshold {
            continue;
        }
        populated = true;
        if infinite {
            let growth = (a2 * p2v).exp();
            if growth > AMPLIFICATION_CAP {
                return Err(Error::Amplification(format!(
                    "populated mode at p_squared {p2v} needs inverse factor e^(a^2 p^2) = \
                     {growth:.3e} beyond the cap {AMPLIFICATION_CAP:.0e}; band-limit the source"
                )));
            }
        }
        if let Some(q_pole) = odd_pole_q {
            if (a2 * p2v - q_pole).abs() < DELTA_SHELL_Q {
                return Err(Error::ShellCollision(format!(
                    "populated mode at p_squared {p2v} lies within {DELTA_SHELL_Q} (q units) \
                     of the mass shell at {}; choose a contour or shift the grid",
                    q_pole / a2
                )));
            }
        }
        let inv = match shift {
            Option::None => {
                let s = symbol.value(p2v);
                min_symbol = min_symbol.min(s.abs());
                Complex64::new(1.0 / s, 0.0)
            }
            Some((eps, conj_weight)) => {
                let up = symbol.value_complex(Complex64::new(p2v, eps));
                min_symbol = min_symbol.min(up.norm());
                let mut inv = up.inv();
                if conj_weight > 0.0 {
                    let down = symbol.value_complex(Complex64::new(p2v, -eps));
                    min_symbol = min_symbol.min(down.norm());
                    inv = (1.0 - conj_weight) * inv + conj_weight * down.inv();
                }
                inv
            }
        };
        max_amp = max_amp.max(inv.norm());
        phi_hat[i] = jv * inv;
    }
    if !populated {
        min_symbol = 0.0;
    }
    Ok(InversionScan {
        phi_hat,
        min_symbol,
        max_amplification: max_amp,
    })
}

/// Solves L phi = J by real spectral division. Valid for even orders and the
/// infinite-order operator everywhere, and for odd orders whenever no
/// populated mode touches the mass shell.
pub fn solve_sourced_spectral(
    params: &ModelParams,
    kind: SymbolKind,
    j: &GridField,
) -> Result<SolveOutput> {
    let spec = j.spec().clone();
    let symbol = OperatorSymbol::new(params.clone(), kind);
    let j_max = j.max_abs();
    if j_max == 0.0 {
        return Ok(SolveOutput {
            field: GridField::zeros(spec),
            diagnostics: SolveDiagnostics {
                min_symbol: 0.0,
                max_amplification: 0.0,
                residual: 0.0,
            },
        });
    }
    let p2 = spec.p_squared_bins();
    let j_hat = fft_forward(&spec, j.values());
    let scan = invert_bins(&symbol, &j_hat, &p2, Option::None)?;

    // Forward check mode by mode, before leaving the frequency domain. A
    // real-space re-application would amplify round-off in unpopulated bins
    // by the symbol there, which for the infinite-order operator grows like
    // e^(a^2 p^2) and swamps the measurement.
    let residual = mode_space_residual(&symbol, &scan.phi_hat, &j_hat, &p2);

    let back = fft_inverse(&spec, scan.phi_hat);
    let field = GridField::new(spec, back.into_iter().map(|z| z.re).collect())?;
    Ok(SolveOutput {
        diagnostics: SolveDiagnostics {
            min_symbol: scan.min_symbol,
            max_amplification: scan.max_amplification,
            residual,
        },
        field,
    })
}

/// max |phi^ * s - J^| / max |J^| over all bins.
fn mode_space_residual(
    symbol: &OperatorSymbol,
    phi_hat: &[Complex64],
    j_hat: &[Complex64],
    p2: &[f64],
) -> f64 {
    let j_hat_max = j_hat.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if j_hat_max == 0.0 {
        return 0.0;
    }
    let mut residual = 0.0f64;
    for ((&phi, &jv), &p2v) in phi_hat.iter().zip(j_hat).zip(p2) {
        if phi == Complex64::new(0.0, 0.0) && jv.norm() == 0.0 {
            continue;
        }
        let back = if phi == Complex64::new(0.0, 0.0) {
            Complex64::new(0.0, 0.0)
        } else {
            phi * symbol.value(p2v)
        };
        residual = residual.max((back - jv).norm());
    }
    residual / j_hat_max
}

/// Sourced solve at odd order with a contour prescription carrying the
/// division past the mass shell. The result is one particular solution and
/// is complex in general; add homogeneous modes freely.
pub fn solve_sourced_odd(
    params: &ModelParams,
    j: &GridField,
    contour: Contour,
) -> Result<ComplexSolveOutput> {
    let n = params.order();
    if n.is_multiple_of(2) {
        return Err(Error::Parity(format!(
            "contour-shifted solve targets odd orders; order {n} needs no contour"
        )));
    }
    let spec = j.spec().clone();
    let symbol = OperatorSymbol::finite(params.clone());
    let j_max = j.max_abs();
    if j_max == 0.0 {
        return Ok(ComplexSolveOutput {
            field: ComplexGridField::from_parts(
                spec.clone(),
                vec![Complex64::new(0.0, 0.0); spec.len()],
            ),
            diagnostics: SolveDiagnostics {
                min_symbol: 0.0,
                max_amplification: 0.0,
                residual: 0.0,
            },
        });
    }
    let a2 = params.a() * params.a();
    let shift = match contour {
        Contour::None => Option::None,
        Contour::FeynmanEps(eps) => {
            if !eps.is_finite() || eps <= 0.0 {
                return Err(Error::Validation(format!(
                    "feynman_eps requires a positive epsilon, got {eps}"
                )));
            }
            Some((eps, 0.0))
        }
        Contour::PrincipalValue => Some((PRINCIPAL_VALUE_EPS_Q / a2, 0.5)),
    };
    let p2 = spec.p_squared_bins();
    let j_hat = fft_forward(&spec, j.values());
    let scan = invert_bins(&symbol, &j_hat, &p2, shift)?;

    // Forward residual against the unshifted operator, measured in mode
    // space; near-shell bins keep whatever mismatch the contour introduced.
    let mut residual = 0.0f64;
    let j_hat_max = j_hat.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    for ((&phi, &jv), &p2v) in scan.phi_hat.iter().zip(&j_hat).zip(&p2) {
        let back = phi * symbol.value(p2v);
        residual = residual.max((back - jv).norm());
    }
    residual /= j_hat_max;

    let back = fft_inverse(&spec, scan.phi_hat);
    Ok(ComplexSolveOutput {
        field: ComplexGridField::from_parts(spec, back),
        diagnostics: SolveDiagnostics {
            min_symbol: scan.min_symbol,
            max_amplification: scan.max_amplification,
            residual,
        },
    })
}
