//! Canonical energy-momentum tensors and their conservation diagnostics.
//!
//! Closed forms cover orders 1 and 2 on grids; the general recursion,
//! driven by symmetrized-metric pairing combinatorics, covers orders up to
//! 4 on plane-wave superpositions where every derivative is analytic. The
//! tensor is the canonical (unsymmetrized) Noether current: its divergence
//! equals the equation-of-motion expression times the field gradient, on
//! or off shell.

pub mod pairing;

use crate::error::{Error, Result};
use crate::fieldops::{apply_operator, neumaier_sum};
use crate::grid::{
    derivative_multipliers, fft_forward, fft_inverse, for_each_index, hermitian_symmetrize,
    GridField, GridSpec,
};
use crate::model::ModelParams;
use crate::modes::{ExactPhases, ModeField};
use crate::poly::factorial_f64;
use crate::symbol::OperatorSymbol;
use num_complex::Complex64;
use pairing::{raise_complex, PairingContraction};
use serde::Serialize;
use std::io::Write;

/// Largest order served by the general mode-field evaluator; the pairing
/// sums top out at 8 indexes (105 pairings).
pub const MAX_GENERAL_ORDER: u32 = 4;
/// Relative bound on the imaginary part tolerated when a mode-field
/// tensor is reduced to real components.
const EMT_REALITY_REL_TOL: f64 = 1e-12;

fn metric_sign(d: usize) -> f64 {
    if d == 0 {
        1.0
    } else {
        -1.0
    }
}

fn eta(alpha: usize, mu: usize) -> f64 {
    if alpha == mu {
        metric_sign(alpha)
    } else {
        0.0
    }
}

/// Point values of the field and derivatives entering the order-1 tensor:
/// the field, its gradient, its second derivatives (row-major D x D), and
/// the wave-operator value.
#[derive(Debug, Clone)]
pub struct PointJet {
    pub phi: f64,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub box_phi: f64,
}

/// Higher derivatives entering the order-2 tensor: third derivatives
/// (row-major D x D x D), derivatives of the wave-operator value, and the
/// squared wave operator.
#[derive(Debug, Clone)]
pub struct HighJet {
    pub d3: Vec<f64>,
    pub box_d1: Vec<f64>,
    pub box_d2: Vec<f64>,
    pub box2: f64,
}

/// Energy-momentum components on a grid. The first index alpha is the one
/// the divergence acts on; the second is the translation direction. The
/// tensor is canonical and not assumed symmetric.
#[derive(Debug, Clone)]
pub struct EMTField {
    spec: GridSpec,
    dims: usize,
    components: Vec<Vec<f64>>,
}

impl EMTField {
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn component(&self, alpha: usize, mu: usize) -> Result<&[f64]> {
        if alpha >= self.dims || mu >= self.dims {
            return Err(Error::Range(format!(
                "component ({alpha}, {mu}) outside a {0} x {0} tensor",
                self.dims
            )));
        }
        Ok(&self.components[alpha * self.dims + mu])
    }

    pub fn max_abs(&self) -> f64 {
        self.components
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Order-1 tensor at a point.
pub fn emt_closed_n1(a: f64, jet: &PointJet) -> Vec<f64> {
    let dims = jet.d1.len();
    let a2 = a * a;
    let mut t = vec![0.0; dims * dims];
    for alpha in 0..dims {
        let sa = metric_sign(alpha);
        for mu in 0..dims {
            let sm = metric_sign(mu);
            let mut v =
                eta(alpha, mu) * (jet.phi * jet.phi / (2.0 * a2) + 0.5 * jet.phi * jet.box_phi);
            v -= 0.5 * jet.phi * sa * sm * jet.d2[alpha * dims + mu];
            v += 0.5 * sa * jet.d1[alpha] * sm * jet.d1[mu];
            t[alpha * dims + mu] = v;
        }
    }
    t
}

/// Order-2 tensor at a point: the order-1 terms plus seven corrections
/// weighted by a^2.
pub fn emt_closed_n2(a: f64, jet: &PointJet, high: &HighJet) -> Vec<f64> {
    let dims = jet.d1.len();
    let a2 = a * a;
    let mut t = emt_closed_n1(a, jet);
    for alpha in 0..dims {
        let sa = metric_sign(alpha);
        for mu in 0..dims {
            let sm = metric_sign(mu);
            let mut v = 0.25 * eta(alpha, mu) * jet.phi * high.box2;
            v -= 0.25 * jet.phi * sa * sm * high.box_d2[alpha * dims + mu];
            v += sa * jet.d1[alpha] * sm * high.box_d1[mu] / 12.0;
            let mut grad_third = 0.0;
            for lam in 0..dims {
                grad_third +=
                    jet.d1[lam] * metric_sign(lam) * high.d3[(alpha * dims + lam) * dims + mu];
            }
            v += sa * sm * grad_third / 6.0;
            let mut second_second = 0.0;
            for lam in 0..dims {
                second_second +=
                    jet.d2[alpha * dims + lam] * metric_sign(lam) * jet.d2[lam * dims + mu];
            }
            v -= sa * sm * second_second / 6.0;
            v -= jet.box_phi * sa * sm * jet.d2[alpha * dims + mu] / 12.0;
            v += 0.25 * sa * high.box_d1[alpha] * sm * jet.d1[mu];
            t[alpha * dims + mu] += a2 * v;
        }
    }
    t
}

/// All spectral derivative arrays needed by the closed forms at one order.
struct SpectralJets {
    phi: Vec<f64>,
    d1: Vec<Vec<f64>>,
    d2: Vec<Vec<f64>>,
    box_phi: Vec<f64>,
    high: Option<HighJets>,
}

struct HighJets {
    d3: Vec<Vec<f64>>,
    box_d1: Vec<Vec<f64>>,
    box_d2: Vec<Vec<f64>>,
    box2: Vec<f64>,
}

/// One mixed spectral derivative with an extra wave-operator power, taken
/// from an already Hermitian-symmetrized spectrum.
fn spectral_derivative(
    spec: &GridSpec,
    hat: &[Complex64],
    orders: &[usize],
    box_power: u32,
    scale_hint: f64,
) -> Result<Vec<f64>> {
    let mult = derivative_multipliers(spec, orders);
    let p2 = spec.p_squared_bins();
    let data: Vec<Complex64> = hat
        .iter()
        .zip(&mult)
        .zip(&p2)
        .map(|((h, m), &p)| h * m * (-p).powi(box_power as i32))
        .collect();
    let back = fft_inverse(spec, data);
    let re_max = back.iter().fold(0.0f64, |m, z| m.max(z.re.abs()));
    let im_max = back.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
    let scale = re_max.max(scale_hint);
    if im_max > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Internal(format!(
            "spectral derivative leaked imaginary residue {im_max} at scale {scale}"
        )));
    }
    Ok(back.into_iter().map(|z| z.re).collect())
}

fn build_jets(spec: &GridSpec, g: &GridField, order: u32) -> Result<SpectralJets> {
    let dims = spec.dims();
    let mut hat = fft_forward(spec, g.values());
    hermitian_symmetrize(spec, &mut hat);
    let scale = g.max_abs();
    let axis_orders = |pairs: &[usize]| -> Vec<usize> {
        let mut o = vec![0usize; dims];
        for &d in pairs {
            o[d] += 1;
        }
        o
    };
    let deriv = |pairs: &[usize], box_power: u32| -> Result<Vec<f64>> {
        spectral_derivative(spec, &hat, &axis_orders(pairs), box_power, scale)
    };

    let d1: Vec<Vec<f64>> = (0..dims).map(|d| deriv(&[d], 0)).collect::<Result<_>>()?;
    let mut d2 = vec![Vec::new(); dims * dims];
    for a in 0..dims {
        for m in a..dims {
            let v = deriv(&[a, m], 0)?;
            if a != m {
                d2[m * dims + a] = v.clone();
            }
            d2[a * dims + m] = v;
        }
    }
    let box_phi = deriv(&[], 1)?;
    let high = if order >= 2 {
        let mut d3 = vec![Vec::new(); dims * dims * dims];
        for a in 0..dims {
            for l in a..dims {
                for m in l..dims {
                    let v = deriv(&[a, l, m], 0)?;
                    let mut key = [a, l, m];
                    loop {
                        d3[(key[0] * dims + key[1]) * dims + key[2]] = v.clone();
                        if !next_permutation(&mut key) {
                            break;
                        }
                    }
                }
            }
        }
        let box_d1: Vec<Vec<f64>> = (0..dims).map(|d| deriv(&[d], 1)).collect::<Result<_>>()?;
        let mut box_d2 = vec![Vec::new(); dims * dims];
        for a in 0..dims {
            for m in a..dims {
                let v = deriv(&[a, m], 1)?;
                if a != m {
                    box_d2[m * dims + a] = v.clone();
                }
                box_d2[a * dims + m] = v;
            }
        }
        let box2 = deriv(&[], 2)?;
        Some(HighJets {
            d3,
            box_d1,
            box_d2,
            box2,
        })
    } else {
        Option::None
    };
    Ok(SpectralJets {
        phi: g.values().to_vec(),
        d1,
        d2,
        box_phi,
        high,
    })
}

/// Next lexicographic permutation of a small index array; returns false
/// after the last one.
fn next_permutation(key: &mut [usize]) -> bool {
    let n = key.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && key[i - 1] >= key[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while key[j] <= key[i - 1] {
        j -= 1;
    }
    key.swap(i - 1, j);
    key[i..].reverse();
    true
}

/// Energy-momentum tensor of a grid field via spectral derivatives, for
/// orders 1 and 2 where closed forms exist.
pub fn emt_closed_grid(params: &ModelParams, g: &GridField) -> Result<EMTField> {
    let n = params.order();
    if !(1..=2).contains(&n) {
        return Err(Error::Range(format!(
            "closed-form tensors cover orders 1 and 2, got {n}; use the mode-field \
             evaluator for orders up to {MAX_GENERAL_ORDER}"
        )));
    }
    let spec = g.spec();
    if spec.dims() != params.dims() {
        return Err(Error::Validation(format!(
            "grid has {} axes but the model has {} dimensions",
            spec.dims(),
            params.dims()
        )));
    }
    let dims = spec.dims();
    let jets = build_jets(spec, g, n)?;
    let a = params.a();
    let mut components = vec![vec![0.0f64; spec.len()]; dims * dims];
    for i in 0..spec.len() {
        let jet = PointJet {
            phi: jets.phi[i],
            d1: jets.d1.iter().map(|v| v[i]).collect(),
            d2: jets.d2.iter().map(|v| v[i]).collect(),
            box_phi: jets.box_phi[i],
        };
        let t = match (&jets.high, n) {
            (Option::None, 1) => emt_closed_n1(a, &jet),
            (Some(h), 2) => {
                let high = HighJet {
                    d3: h.d3.iter().map(|v| v[i]).collect(),
                    box_d1: h.box_d1.iter().map(|v| v[i]).collect(),
                    box_d2: h.box_d2.iter().map(|v| v[i]).collect(),
                    box2: h.box2[i],
                };
                emt_closed_n2(a, &jet, &high)
            }
            _ => return Err(Error::Internal("jet depth out of step with order".into())),
        };
        for (c, value) in t.into_iter().enumerate() {
            components[c][i] = value;
        }
    }
    Ok(EMTField {
        spec: spec.clone(),
        dims,
        components,
    })
}

/// Number of distinct terms the recursion generates through order N: one
/// Lagrangian-density term per level plus the derivative ladder, summing
/// to (N+1)^2.
pub fn recursion_term_count(order: u32) -> usize {
    1 + (1..=order as usize).map(|n| 1 + 2 * n).sum::<usize>()
}

/// Energy-momentum tensor of a plane-wave superposition via the recursion,
/// with analytic mode derivatives, for orders up to 4.
pub fn emt_general(params: &ModelParams, field: &ModeField, spec: &GridSpec) -> Result<EMTField> {
    let n = params.order();
    if n == 0 || n > MAX_GENERAL_ORDER {
        return Err(Error::Range(format!(
            "general tensor evaluation covers orders 1..={MAX_GENERAL_ORDER}, got {n}"
        )));
    }
    if field.params() != params {
        return Err(Error::Validation(
            "mode field was built for different model parameters".into(),
        ));
    }
    let ints = field.integer_modes(spec)?;
    let dims = spec.dims();

    struct Elementary {
        amp: Complex64,
        d: Vec<Complex64>,
        p2: f64,
        ints: Vec<i64>,
    }
    let mut elems: Vec<Elementary> = Vec::new();
    for (m, iv) in field.modes().iter().zip(&ints) {
        let mut d = vec![Complex64::new(0.0, -m.omega)];
        for &k in &m.k {
            d.push(Complex64::new(0.0, k));
        }
        elems.push(Elementary {
            amp: m.amplitude,
            d: d.clone(),
            p2: m.p_squared(),
            ints: iv.clone(),
        });
        if m.conjugate_pair {
            elems.push(Elementary {
                amp: m.amplitude.conj(),
                d: d.iter().map(|z| -z).collect(),
                p2: m.p_squared(),
                ints: iv.iter().map(|v| -v).collect(),
            });
        }
    }

    let contractions: Vec<PairingContraction> = (1..=n as usize)
        .map(PairingContraction::new)
        .collect::<Result<_>>()?;
    let a2 = params.a() * params.a();
    let phases = ExactPhases::new(spec);
    let mut components = vec![vec![Complex64::new(0.0, 0.0); spec.len()]; dims * dims];
    let mut audited = false;

    for ej in &elems {
        for ek in &elems {
            let mut coeff = vec![Complex64::new(0.0, 0.0); dims * dims];
            let mut terms = 0usize;
            for d in 0..dims {
                coeff[d * dims + d] += metric_sign(d) / (2.0 * a2);
            }
            terms += 1;
            let raised_k = raise_complex(&ek.d);
            for level in 1..=n as usize {
                let pref = a2.powi(level as i32 - 1) / (2.0 * factorial_f64(level as u32));
                let box_n = (-ek.p2).powi(level as i32);
                for d in 0..dims {
                    coeff[d * dims + d] += pref * metric_sign(d) * box_n;
                }
                terms += 1;
                let pc = &contractions[level - 1];
                for m in 0..2 * level {
                    let mut vs: Vec<Vec<Complex64>> = Vec::with_capacity(2 * level - 1);
                    for _ in 0..m {
                        vs.push(ej.d.clone());
                    }
                    for _ in 0..(2 * level - m - 1) {
                        vs.push(ek.d.clone());
                    }
                    let g = pc.contract_with_free_index(&vs)?;
                    let sgn = if m % 2 == 0 { 1.0 } else { -1.0 };
                    for alpha in 0..dims {
                        for mu in 0..dims {
                            coeff[alpha * dims + mu] -= pref * sgn * g[alpha] * raised_k[mu];
                        }
                    }
                    terms += 1;
                }
            }
            if !audited {
                if terms != recursion_term_count(n) {
                    return Err(Error::Internal(format!(
                        "recursion generated {terms} terms at order {n}, expected {}",
                        recursion_term_count(n)
                    )));
                }
                audited = true;
            }

            let combined: Vec<i64> = ej.ints.iter().zip(&ek.ints).map(|(x, y)| x + y).collect();
            let steps = phases.steps(&combined);
            let amp = ej.amp * ek.amp;
            for_each_index(spec.shape(), |flat, idx| {
                let w = amp * phases.value(&steps, idx);
                for c in coeff.iter().zip(components.iter_mut()) {
                    c.1[flat] += c.0 * w;
                }
            });
        }
    }

    let re_max = components
        .iter()
        .flat_map(|c| c.iter())
        .fold(0.0f64, |m, z| m.max(z.re.abs()));
    let im_max = components
        .iter()
        .flat_map(|c| c.iter())
        .fold(0.0f64, |m, z| m.max(z.im.abs()));
    if im_max > EMT_REALITY_REL_TOL * re_max.max(f64::MIN_POSITIVE) {
        return Err(Error::Validation(format!(
            "tensor of the mode field is not real (imaginary residue {im_max} vs scale \
             {re_max}); the superposition must sum to a real field"
        )));
    }
    Ok(EMTField {
        spec: spec.clone(),
        dims,
        components: components
            .into_iter()
            .map(|c| c.into_iter().map(|z| z.re).collect())
            .collect(),
    })
}

/// Spectral divergence of the tensor: one grid per translation index mu,
/// holding the alpha-derivative sum of T(alpha, mu).
pub fn divergence(t: &EMTField) -> Result<Vec<GridField>> {
    let spec = t.spec();
    let dims = t.dims();
    let mut out = Vec::with_capacity(dims);
    for mu in 0..dims {
        let mut acc = vec![Complex64::new(0.0, 0.0); spec.len()];
        for alpha in 0..dims {
            let comp = t.component(alpha, mu)?;
            let mut hat = fft_forward(spec, comp);
            hermitian_symmetrize(spec, &mut hat);
            let orders: Vec<usize> = (0..dims).map(|d| usize::from(d == alpha)).collect();
            let mult = derivative_multipliers(spec, &orders);
            for ((a, h), m) in acc.iter_mut().zip(&hat).zip(&mult) {
                *a += h * m;
            }
        }
        let back = fft_inverse(spec, acc);
        let re_max = back.iter().fold(0.0f64, |m, z| m.max(z.re.abs()));
        let im_max = back.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
        let scale = re_max.max(t.max_abs());
        if im_max > 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Internal(format!(
                "divergence leaked imaginary residue {im_max} at scale {scale}"
            )));
        }
        out.push(GridField::new(
            spec.clone(),
            back.into_iter().map(|z| z.re).collect(),
        )?);
    }
    Ok(out)
}

/// Conserved-charge style summary on a (t, x) grid: spatial integrals of the
/// energy and momentum densities averaged over time slices, and the largest
/// divergence component anywhere.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EMTSummary {
    pub energy_total: f64,
    pub momentum_total: f64,
    pub max_divergence: f64,
}

pub fn summarize(t: &EMTField) -> Result<EMTSummary> {
    if t.dims() != 2 {
        return Err(Error::Range(format!(
            "summary integrals are defined on one time and one space axis, got {} axes",
            t.dims()
        )));
    }
    let spec = t.spec();
    let (nt, nx) = (spec.shape()[0], spec.shape()[1]);
    let dx = spec.spacing(1);
    let slice_average = |component: &[f64]| -> f64 {
        let totals: Vec<f64> = (0..nt)
            .map(|it| neumaier_sum(component[it * nx..(it + 1) * nx].iter().copied()) * dx)
            .collect();
        neumaier_sum(totals.iter().copied()) / nt as f64
    };
    let energy_total = slice_average(t.component(0, 0)?);
    let momentum_total = slice_average(t.component(0, 1)?);
    let div = divergence(t)?;
    let max_divergence = div.iter().fold(0.0f64, |m, g| m.max(g.max_abs()));
    Ok(EMTSummary {
        energy_total,
        momentum_total,
        max_divergence,
    })
}

/// CSV export on a (t, x) grid: one row per point and component.
pub fn write_emt_csv<W: Write>(t: &EMTField, mut w: W) -> Result<()> {
    if t.dims() != 2 {
        return Err(Error::Range(format!(
            "CSV export is defined on one time and one space axis, got {} axes",
            t.dims()
        )));
    }
    let spec = t.spec();
    let (nt, nx) = (spec.shape()[0], spec.shape()[1]);
    writeln!(w, "t,x,alpha,mu,value")?;
    for it in 0..nt {
        let tv = it as f64 * spec.spacing(0);
        for ix in 0..nx {
            let xv = ix as f64 * spec.spacing(1);
            for alpha in 0..2 {
                for mu in 0..2 {
                    let value = t.component(alpha, mu)?[it * nx + ix];
                    writeln!(w, "{tv},{xv},{alpha},{mu},{value}")?;
                }
            }
        }
    }
    Ok(())
}

/// Largest pointwise violation of the off-shell conservation identity: the
/// tensor divergence minus the equation-of-motion expression times the
/// raised field gradient. Zero (to round-off) for any band-limited field,
/// solving the field equation or not.
pub fn noether_identity_residual(params: &ModelParams, g: &GridField) -> Result<f64> {
    let n = params.order();
    if !(1..=2).contains(&n) {
        return Err(Error::Range(format!(
            "grid-path identity check covers orders 1 and 2, got {n}; evaluate via the \
             mode-field tensor for higher orders"
        )));
    }
    let t = emt_closed_grid(params, g)?;
    let div = divergence(&t)?;
    let eom = apply_operator(&OperatorSymbol::finite(params.clone()), g)?;
    let spec = g.spec();
    let mut hat = fft_forward(spec, g.values());
    hermitian_symmetrize(spec, &mut hat);
    let scale = g.max_abs();
    let mut worst = 0.0f64;
    for mu in 0..spec.dims() {
        let mut orders = vec![0usize; spec.dims()];
        orders[mu] = 1;
        let grad = spectral_derivative(spec, &hat, &orders, 0, scale)?;
        let sign = metric_sign(mu);
        for ((d, e), gr) in div[mu].values().iter().zip(eom.values()).zip(&grad) {
            worst = worst.max((d - e * sign * gr).abs());
        }
    }
    Ok(worst)
}
