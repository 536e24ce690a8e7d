//! Exact plane-wave superpositions and their sampling onto grids.
//!
//! A conjugate-pair mode contributes amplitude * e^(-i(omega t - k.x)) plus
//! the complex conjugate, so any superposition of pair modes is real.
//! Sampling demands commensurability (an integer number of periods per
//! axis); phases are then reduced exactly in integer arithmetic before any
//! trigonometry, which keeps sampled fields spectrally clean to round-off.

use crate::error::{Error, Result};
use crate::grid::{for_each_index, GridField, GridSpec};
use crate::model::ModelParams;
use num_complex::Complex64;

/// Relative tolerance on the period count when checking that a mode fits
/// the box.
pub const COMMENSURATE_REL_TOL: f64 = 1e-9;

/// One plane wave: amplitude * e^(-i(omega t - k.x)), plus the conjugate
/// when `conjugate_pair` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneWaveMode {
    pub amplitude: Complex64,
    pub k: Vec<f64>,
    pub omega: f64,
    pub conjugate_pair: bool,
}

impl PlaneWaveMode {
    /// Lorentzian momentum square of the mode.
    pub fn p_squared(&self) -> f64 {
        self.omega * self.omega - self.k.iter().map(|k| k * k).sum::<f64>()
    }
}

/// Superposition of plane-wave modes tied to model parameters.
#[derive(Debug, Clone)]
pub struct ModeField {
    params: ModelParams,
    modes: Vec<PlaneWaveMode>,
}

impl ModeField {
    /// Builds the superposition, merging modes with identical (k, omega,
    /// pairing) by summing amplitudes. First-seen order is preserved.
    pub fn new(params: ModelParams, modes: Vec<PlaneWaveMode>) -> Result<Self> {
        let spatial = params.dims() - 1;
        let mut merged: Vec<PlaneWaveMode> = Vec::new();
        for (i, m) in modes.into_iter().enumerate() {
            if m.k.len() != spatial {
                return Err(Error::Validation(format!(
                    "mode {i} has a {}-component wavevector but the model has {spatial} \
                     spatial dimensions",
                    m.k.len()
                )));
            }
            if !m.omega.is_finite()
                || !m.amplitude.is_finite()
                || m.k.iter().any(|k| !k.is_finite())
            {
                return Err(Error::Validation(format!("mode {i} has non-finite data")));
            }
            match merged.iter_mut().find(|e| {
                e.conjugate_pair == m.conjugate_pair
                    && e.omega.to_bits() == m.omega.to_bits()
                    && e.k.len() == m.k.len()
                    && e.k
                        .iter()
                        .zip(&m.k)
                        .all(|(a, b)| a.to_bits() == b.to_bits())
            }) {
                Some(existing) => existing.amplitude += m.amplitude,
                None => merged.push(m),
            }
        }
        Ok(Self {
            params,
            modes: merged,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn modes(&self) -> &[PlaneWaveMode] {
        &self.modes
    }

    /// Integer mode numbers (n_t, n_1, ...) of every mode on the given grid,
    /// or a commensurability error naming the first offending mode.
    pub(crate) fn integer_modes(&self, spec: &GridSpec) -> Result<Vec<Vec<i64>>> {
        if spec.dims() != self.params.dims() {
            return Err(Error::Validation(format!(
                "grid has {} axes but the model has {} dimensions",
                spec.dims(),
                self.params.dims()
            )));
        }
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut out = Vec::with_capacity(self.modes.len());
        for (i, m) in self.modes.iter().enumerate() {
            let mut ints = Vec::with_capacity(spec.dims());
            for axis in 0..spec.dims() {
                let rate = if axis == 0 { m.omega } else { m.k[axis - 1] };
                let periods = rate * spec.box_lengths()[axis] / two_pi;
                let nearest = periods.round();
                if (periods - nearest).abs() > COMMENSURATE_REL_TOL * periods.abs().max(1.0) {
                    return Err(Error::Commensurability(format!(
                        "mode {i} (omega {}, k {:?}) spans {periods} periods on axis {axis}; \
                         nearest integer {nearest}",
                        m.omega, m.k
                    )));
                }
                ints.push(nearest as i64);
            }
            out.push(ints);
        }
        Ok(out)
    }

    /// Pointwise evaluation on a grid with exact integer phase reduction.
    pub fn sample(&self, spec: &GridSpec) -> Result<GridField> {
        let ints = self.integer_modes(spec)?;
        let phases = ExactPhases::new(spec);

        let mut real = vec![0.0f64; spec.len()];
        let mut imag = vec![0.0f64; spec.len()];
        let mut any_unpaired = false;

        for (m, nvec) in self.modes.iter().zip(&ints) {
            let steps = phases.steps(nvec);
            let amp = m.amplitude;
            if !m.conjugate_pair {
                any_unpaired = true;
            }
            for_each_index(spec.shape(), |flat, idx| {
                let v = amp * phases.value(&steps, idx);
                if m.conjugate_pair {
                    real[flat] += 2.0 * v.re;
                } else {
                    real[flat] += v.re;
                    imag[flat] += v.im;
                }
            });
        }

        if any_unpaired {
            let re_max = real.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let im_max = imag.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if im_max > 1e-12 * re_max.max(f64::MIN_POSITIVE) {
                return Err(Error::Validation(format!(
                    "sampled field is not real: max imaginary part {im_max} vs max real {re_max}; \
                     use conjugate-pair modes or conjugate superpositions"
                )));
            }
        }
        GridField::new(spec.clone(), real)
    }
}

/// Exact evaluation of e^(-i(omega t - k.x)) at grid points: every phase is
/// an integer multiple of 2 pi / lcm, reduced in integer arithmetic, so a
/// commensurate mode samples to a spectrally clean array.
pub(crate) struct ExactPhases {
    lcm: i64,
    table: Vec<Complex64>,
    shape: Vec<usize>,
}

impl ExactPhases {
    pub(crate) fn new(spec: &GridSpec) -> Self {
        // Power-of-two axis sizes make the largest of them the lcm.
        let lcm = *spec.shape().iter().max().expect("nonempty shape") as i64;
        let table = (0..lcm)
            .map(|m| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * m as f64 / lcm as f64))
            .collect();
        Self {
            lcm,
            table,
            shape: spec.shape().to_vec(),
        }
    }

    /// Per-axis phase increments, in table units, for the integer mode
    /// numbers (n_t, n_1, ...). The time axis enters with a minus sign.
    pub(crate) fn steps(&self, ints: &[i64]) -> Vec<i64> {
        ints.iter()
            .enumerate()
            .map(|(axis, &n)| {
                let per_index = self.lcm / self.shape[axis] as i64;
                let signed = if axis == 0 { -n } else { n };
                (signed * per_index).rem_euclid(self.lcm)
            })
            .collect()
    }

    /// Phase factor at a multi-index for increments produced by `steps`.
    pub(crate) fn value(&self, steps: &[i64], idx: &[usize]) -> Complex64 {
        let mut r = 0i64;
        for (axis, &j) in idx.iter().enumerate() {
            r += (steps[axis] * j as i64) % self.lcm;
        }
        self.table[(r % self.lcm) as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ModelParams {
        ModelParams::new(1, 1.0).unwrap()
    }

    fn mode(amplitude: Complex64, omega: f64, k: f64, pair: bool) -> PlaneWaveMode {
        PlaneWaveMode {
            amplitude,
            k: vec![k],
            omega,
            conjugate_pair: pair,
        }
    }

    #[test]
    fn zero_amplitude_samples_to_zero() {
        let spec = GridSpec::new(vec![1.0, 1.0], vec![8, 8]).unwrap();
        let mf = ModeField::new(
            params(),
            vec![mode(
                Complex64::new(0.0, 0.0),
                2.0 * std::f64::consts::PI,
                0.0,
                true,
            )],
        )
        .unwrap();
        let g = mf.sample(&spec).unwrap();
        assert!(g.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_pair_mode_is_a_cosine() {
        let (t_box, l_box) = (1.0, 1.0);
        let spec = GridSpec::new(vec![t_box, l_box], vec![64, 64]).unwrap();
        let omega = 2.0 * std::f64::consts::PI / t_box;
        let k = 2.0 * std::f64::consts::PI / l_box;
        let mf = ModeField::new(
            params(),
            vec![mode(Complex64::new(1.0, 0.0), omega, k, true)],
        )
        .unwrap();
        let g = mf.sample(&spec).unwrap();
        let mut max_err = 0.0f64;
        for_each_index(spec.shape(), |flat, idx| {
            let t = idx[0] as f64 * spec.spacing(0);
            let x = idx[1] as f64 * spec.spacing(1);
            let expected = 2.0 * (omega * t - k * x).cos();
            max_err = max_err.max((g.values()[flat] - expected).abs());
        });
        assert!(max_err < 1e-13, "max error {max_err}");
    }

    #[test]
    fn incommensurate_mode_is_rejected() {
        let spec = GridSpec::new(vec![1.0, 1.0], vec![8, 8]).unwrap();
        let mf = ModeField::new(
            params(),
            vec![mode(Complex64::new(1.0, 0.0), 2.5, 0.0, true)],
        )
        .unwrap();
        assert!(matches!(mf.sample(&spec), Err(Error::Commensurability(_))));
    }

    #[test]
    fn identical_modes_merge() {
        let m = mode(Complex64::new(1.0, 0.5), 1.0, 2.0, true);
        let mf = ModeField::new(params(), vec![m.clone(), m]).unwrap();
        assert_eq!(mf.modes().len(), 1);
        assert_eq!(mf.modes()[0].amplitude, Complex64::new(2.0, 1.0));
    }

    #[test]
    fn unpaired_complex_field_is_rejected_but_conjugate_superposition_passes() {
        let spec = GridSpec::new(vec![1.0, 1.0], vec![8, 8]).unwrap();
        let omega = 2.0 * std::f64::consts::PI;
        let single = ModeField::new(
            params(),
            vec![mode(Complex64::new(1.0, 0.0), omega, 0.0, false)],
        )
        .unwrap();
        assert!(single.sample(&spec).is_err());
        // The same mode plus its explicit conjugate is real again.
        let both = ModeField::new(
            params(),
            vec![
                mode(Complex64::new(1.0, 0.0), omega, 0.0, false),
                mode(Complex64::new(1.0, 0.0), -omega, 0.0, false),
            ],
        )
        .unwrap();
        let g = both.sample(&spec).unwrap();
        let t_val = g.values()[8]; // j_t = 1, j_x = 0 on an 8x8 grid
        let expected = 2.0 * (omega * spec.spacing(0)).cos();
        assert!((t_val - expected).abs() < 1e-12);
    }

    #[test]
    fn wavevector_dimension_is_checked() {
        let p3 = ModelParams::with_dims(1, 1.0, 3).unwrap();
        let bad = ModeField::new(p3, vec![mode(Complex64::new(1.0, 0.0), 1.0, 0.0, true)]);
        assert!(bad.is_err());
    }
}
