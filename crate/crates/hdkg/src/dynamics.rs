//! Time-evolution view: one spatial Fourier mode of the field obeys a
//! 2N-th-order ODE in time. The module reduces it to a first-order
//! companion system, classifies the characteristic spectrum, and integrates
//! with classical RK4.
//!
//! The characteristic roots make the order dichotomy concrete: lambda is a
//! root exactly when z = a^2 (lambda^2 + k^2) zeroes the exponential partial
//! sum, so odd orders keep one oscillatory pair (the dispersion-root shell)
//! while every other root leaves or enters the imaginary axis in
//! growing/decaying quadruples. Growing modes are reported, never
//! suppressed: they are the honest content of the even-order triviality
//! result seen from the evolution side.

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::poly::{build_poly, exp_partial_sum_complex, factorial_f64};
use crate::roots::real_roots;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;
use std::io::Write;

/// Largest order for the ODE reduction (companion matrices up to 20 x 20).
pub const MAX_ODE_ORDER: u32 = 10;
/// States beyond this magnitude raise the trajectory blow-up flag.
pub const BLOW_UP_THRESHOLD: f64 = 1e12;
/// A root counts as purely imaginary when |Re| < this times (1 + |lambda|).
pub const IMAGINARY_CLASSIFY_TOL: f64 = 1e-8;

/// First-order reduction of the single-mode equation: state vector
/// (psi, psi', ..., psi^(2N-1)) with the companion matrix generating it.
#[derive(Debug, Clone)]
pub struct ModeODE {
    params: ModelParams,
    k: f64,
    companion: DMatrix<f64>,
    char_roots: Vec<Complex64>,
}

impl ModeODE {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// System dimension 2N.
    pub fn dim(&self) -> usize {
        self.companion.nrows()
    }

    pub fn companion(&self) -> &DMatrix<f64> {
        &self.companion
    }

    /// Characteristic roots, sorted by (re, im) for determinism.
    pub fn char_roots(&self) -> &[Complex64] {
        &self.char_roots
    }
}

fn binomial(n: u32, j: u32) -> f64 {
    let mut v = 1.0f64;
    for i in 0..j {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v
}

/// Builds the single-mode ODE at spatial wavenumber k: the wave operator
/// becomes d^2/dt^2 + k^2, and the binomial expansion of its powers gives
/// the even-derivative coefficients.
pub fn build_mode_ode(params: &ModelParams, k: f64) -> Result<ModeODE> {
    let n = params.order();
    if !(1..=MAX_ODE_ORDER).contains(&n) {
        return Err(Error::Range(format!(
            "mode dynamics covers orders 1..={MAX_ODE_ORDER}, got {n}"
        )));
    }
    if !k.is_finite() {
        return Err(Error::Validation(format!(
            "wavenumber must be finite, got {k}"
        )));
    }
    let a2 = params.a() * params.a();
    let k2 = k * k;

    // c[j] multiplies psi^(2j).
    let mut c = vec![0.0f64; n as usize + 1];
    for level in 0..=n {
        let pref = a2.powi(level as i32 - 1) / factorial_f64(level);
        for j in 0..=level {
            c[j as usize] += pref * binomial(level, j) * k2.powi((level - j) as i32);
        }
    }
    let lead = c[n as usize];
    let monic: Vec<f64> = c.iter().map(|v| v / lead).collect();

    let size = 2 * n as usize;
    let mut companion = DMatrix::<f64>::zeros(size, size);
    for i in 0..size - 1 {
        companion[(i, i + 1)] = 1.0;
    }
    for j in 0..n as usize {
        companion[(size - 1, 2 * j)] = -monic[j];
    }

    // The characteristic polynomial is even in lambda, and a QR eigensolve
    // on its companion stalls on that sign-symmetric spectrum. Lift the
    // certified dispersion roots instead: lambda is characteristic exactly
    // when a^2 (lambda^2 + k^2) = -q for a root q of the dispersion
    // polynomial, so each of the N roots gives the pair
    // lambda = +/- i sqrt(q / a^2 + k^2).
    let report = real_roots(&build_poly(n)?)?;
    let mut char_roots = Vec::with_capacity(size);
    for q in &report.complex_roots {
        let lam_plus = Complex64::i() * (*q / a2 + k2).sqrt();
        for lam0 in [lam_plus, -lam_plus] {
            let mut lam = lam0;
            // Newton polish on P_N(a^2 (lambda^2 + k^2)); the partial sum is
            // its own derivative family, P_N' = P_{N-1}.
            for _ in 0..30 {
                let z = a2 * (lam * lam + k2);
                let f = exp_partial_sum_complex(n, z);
                let df = exp_partial_sum_complex(n - 1, z) * a2 * 2.0 * lam;
                if df.norm() < 1e-300 {
                    break;
                }
                let step = f / df;
                lam -= step;
                if step.norm() <= 1e-15 * (1.0 + lam.norm()) {
                    break;
                }
            }
            if (lam - lam0).norm() > 1e-6 * (1.0 + lam0.norm()) {
                return Err(Error::Internal(format!(
                    "characteristic root {lam0} moved to {lam} under Newton \
                     polish; dispersion-root lift and characteristic relation \
                     disagree"
                )));
            }
            char_roots.push(lam);
        }
    }
    char_roots.sort_by(|x, y| {
        x.re.partial_cmp(&y.re)
            .unwrap()
            .then(x.im.partial_cmp(&y.im).unwrap())
    });

    Ok(ModeODE {
        params: params.clone(),
        k,
        companion,
        char_roots,
    })
}

/// Root census of a mode spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SpectrumClassification {
    pub oscillatory_pairs: usize,
    pub growing: usize,
    pub decaying: usize,
}

pub fn classify_spectrum(ode: &ModeODE) -> SpectrumClassification {
    let mut imaginary = 0usize;
    let mut growing = 0usize;
    let mut decaying = 0usize;
    for lam in ode.char_roots() {
        let tol = IMAGINARY_CLASSIFY_TOL * (1.0 + lam.norm());
        if lam.re.abs() < tol {
            imaginary += 1;
        } else if lam.re > 0.0 {
            growing += 1;
        } else {
            decaying += 1;
        }
    }
    SpectrumClassification {
        oscillatory_pairs: imaginary / 2,
        growing,
        decaying,
    }
}

/// Spectrum record for serialization: roots as [re, im] pairs.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub k: f64,
    pub roots: Vec<(f64, f64)>,
    pub classification: SpectrumClassification,
}

impl SpectrumReport {
    pub fn new(ode: &ModeODE) -> Self {
        Self {
            k: ode.k(),
            roots: ode.char_roots().iter().map(|z| (z.re, z.im)).collect(),
            classification: classify_spectrum(ode),
        }
    }
}

/// Integrated states at uniform steps. `blow_up` marks a trajectory stopped
/// early because a state component passed the magnitude threshold; with
/// growing characteristic roots that is expected behavior, not an error.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub blow_up: bool,
}

/// Classical RK4 on the companion system from t = 0 to the first step
/// multiple at or beyond t_end.
pub fn integrate(ode: &ModeODE, initial_state: &[f64], t_end: f64, dt: f64) -> Result<Trajectory> {
    let dim = ode.dim();
    if initial_state.len() != dim {
        return Err(Error::Validation(format!(
            "initial state has {} components, the order-{} system needs {dim}",
            initial_state.len(),
            ode.params().order()
        )));
    }
    if initial_state.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation("initial state must be finite".into()));
    }
    if !dt.is_finite() || dt <= 0.0 || !t_end.is_finite() || t_end <= 0.0 {
        return Err(Error::Validation(format!(
            "time span and step must be positive and finite, got t_end {t_end}, dt {dt}"
        )));
    }
    let lam_max = ode.char_roots().iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let dt_cap = 0.1 / lam_max;
    if dt >= dt_cap {
        return Err(Error::Validation(format!(
            "step {dt} violates the stability guard dt < {dt_cap} (0.1 / max |root|)"
        )));
    }

    let steps = (t_end / dt).ceil() as usize;
    let c = ode.companion();
    let mut y = DVector::<f64>::from_column_slice(initial_state);
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(initial_state.to_vec());
    let mut blow_up = false;
    for step in 1..=steps {
        let k1 = c * &y;
        let k2 = c * (&y + &k1 * (dt / 2.0));
        let k3 = c * (&y + &k2 * (dt / 2.0));
        let k4 = c * (&y + &k3 * dt);
        y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        times.push(step as f64 * dt);
        states.push(y.iter().copied().collect());
        if y.iter().any(|v| v.abs() > BLOW_UP_THRESHOLD) {
            blow_up = true;
            break;
        }
    }
    Ok(Trajectory {
        times,
        states,
        blow_up,
    })
}

/// CSV export: `t,state_0,...,state_{2N-1}`.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, mut w: W) -> Result<()> {
    let dim = traj.states.first().map(Vec::len).unwrap_or(0);
    write!(w, "t")?;
    for j in 0..dim {
        write!(w, ",state_{j}")?;
    }
    writeln!(w)?;
    for (t, state) in traj.times.iter().zip(&traj.states) {
        write!(w, "{t}")?;
        for v in state {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}
