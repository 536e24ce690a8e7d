//! Periodic space-time grids with FFT-based spectral calculus.
//!
//! Coordinate order is (t, x1, ..., x_{D-1}); values are stored row-major.
//! Discrete momenta on axis mu are 2 pi m / box_length with m in the
//! symmetric integer range. The forward transform is unnormalized; the
//! inverse divides by the total point count.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

/// Geometry of a periodic grid: box lengths and per-axis point counts
/// (powers of two).
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    box_lengths: Vec<f64>,
    shape: Vec<usize>,
}

impl GridSpec {
    pub fn new(box_lengths: Vec<f64>, shape: Vec<usize>) -> Result<Self> {
        if box_lengths.len() != shape.len() {
            return Err(Error::Validation(format!(
                "box has {} lengths but shape has {} axes",
                box_lengths.len(),
                shape.len()
            )));
        }
        if shape.len() < 2 {
            return Err(Error::Validation(format!(
                "grids are space-time grids and need at least 2 axes, got {}",
                shape.len()
            )));
        }
        for (axis, &l) in box_lengths.iter().enumerate() {
            if !l.is_finite() || l <= 0.0 {
                return Err(Error::Validation(format!(
                    "box length on axis {axis} must be positive and finite, got {l}"
                )));
            }
        }
        for (axis, &n) in shape.iter().enumerate() {
            if n == 0 || n & (n - 1) != 0 {
                return Err(Error::Validation(format!(
                    "shape on axis {axis} must be a power of two, got {n}"
                )));
            }
        }
        Ok(Self { box_lengths, shape })
    }

    pub fn dims(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn box_lengths(&self) -> &[f64] {
        &self.box_lengths
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.box_lengths[axis] / self.shape[axis] as f64
    }

    /// Product of all grid spacings: the space-time volume element.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dims()).map(|ax| self.spacing(ax)).product()
    }

    /// Signed integer mode for index j on an axis of n points; the Nyquist
    /// index maps to +n/2.
    pub fn signed_mode(j: usize, n: usize) -> i64 {
        if j <= n / 2 {
            j as i64
        } else {
            j as i64 - n as i64
        }
    }

    /// Angular frequency 2 pi m / L of bin j on the given axis.
    pub fn frequency(&self, axis: usize, j: usize) -> f64 {
        let m = Self::signed_mode(j, self.shape[axis]);
        2.0 * std::f64::consts::PI * m as f64 / self.box_lengths[axis]
    }

    /// Lorentzian p^2 = omega^2 - |k|^2 for every bin, flat row-major order.
    pub fn p_squared_bins(&self) -> Vec<f64> {
        let freq_tables: Vec<Vec<f64>> = (0..self.dims())
            .map(|ax| (0..self.shape[ax]).map(|j| self.frequency(ax, j)).collect())
            .collect();
        let mut out = vec![0.0; self.len()];
        for_each_index(&self.shape, |flat, idx| {
            let omega = freq_tables[0][idx[0]];
            let mut k2 = 0.0;
            for ax in 1..idx.len() {
                let k = freq_tables[ax][idx[ax]];
                k2 += k * k;
            }
            out[flat] = omega * omega - k2;
        });
        out
    }
}

/// Real scalar field sampled on a periodic space-time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    spec: GridSpec,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::Validation(format!(
                "value buffer has {} entries but the grid has {} points",
                values.len(),
                spec.len()
            )));
        }
        Ok(Self { spec, values })
    }

    pub fn zeros(spec: GridSpec) -> Self {
        let values = vec![0.0; spec.len()];
        Self { spec, values }
    }

    pub fn constant(spec: GridSpec, c: f64) -> Self {
        let values = vec![c; spec.len()];
        Self { spec, values }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Complex scalar field on a grid; produced by contour-shifted inversions.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGridField {
    spec: GridSpec,
    values: Vec<Complex64>,
}

impl ComplexGridField {
    pub(crate) fn from_parts(spec: GridSpec, values: Vec<Complex64>) -> Self {
        Self { spec, values }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Real part as a [`GridField`]. Taking the real part of a shifted
    /// solution is a convention, not a mathematical necessity; the imaginary
    /// part is discarded.
    pub fn realize(&self) -> GridField {
        GridField {
            spec: self.spec.clone(),
            values: self.values.iter().map(|v| v.re).collect(),
        }
    }
}

/// Calls f(flat_index, multi_index) for every point in row-major order.
pub(crate) fn for_each_index(shape: &[usize], mut f: impl FnMut(usize, &[usize])) {
    let mut idx = vec![0usize; shape.len()];
    let total: usize = shape.iter().product();
    for flat in 0..total {
        f(flat, &idx);
        for ax in (0..shape.len()).rev() {
            idx[ax] += 1;
            if idx[ax] < shape[ax] {
                break;
            }
            idx[ax] = 0;
        }
    }
}

fn transform_all_axes(spec: &GridSpec, data: &mut [Complex64], forward: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let shape = spec.shape();
    for axis in 0..spec.dims() {
        let n = shape[axis];
        if n == 1 {
            continue;
        }
        let fft = if forward {
            planner.plan_fft_forward(n)
        } else {
            planner.plan_fft_inverse(n)
        };
        let stride: usize = shape[axis + 1..].iter().product();
        let blocks: usize = shape[..axis].iter().product();
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for b in 0..blocks {
            let block_base = b * n * stride;
            for s in 0..stride {
                let base = block_base + s;
                for (i, v) in line.iter_mut().enumerate() {
                    *v = data[base + i * stride];
                }
                fft.process(&mut line);
                for (i, v) in line.iter().enumerate() {
                    data[base + i * stride] = *v;
                }
            }
        }
    }
}

/// Unnormalized forward FFT of a real field.
pub(crate) fn fft_forward(spec: &GridSpec, values: &[f64]) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform_all_axes(spec, &mut data, true);
    data
}

/// Inverse FFT, normalized by the total point count.
pub(crate) fn fft_inverse(spec: &GridSpec, mut data: Vec<Complex64>) -> Vec<Complex64> {
    transform_all_axes(spec, &mut data, false);
    let scale = 1.0 / spec.len() as f64;
    for v in data.iter_mut() {
        *v *= scale;
    }
    data
}

/// Projects a spectrum onto Hermitian symmetry, v(-b) = conj(v(b)).
/// The transform of real data satisfies this exactly in exact arithmetic;
/// the projection strips the round-off component that a large multiplier
/// would otherwise amplify into spurious imaginary output.
pub(crate) fn hermitian_symmetrize(spec: &GridSpec, values: &mut [Complex64]) {
    let shape = spec.shape();
    let dims = shape.len();
    let mut strides = vec![1usize; dims];
    for d in (0..dims.saturating_sub(1)).rev() {
        strides[d] = strides[d + 1] * shape[d + 1];
    }
    for_each_index(shape, |flat, idx| {
        let mirror: usize = (0..dims)
            .map(|d| ((shape[d] - idx[d]) % shape[d]) * strides[d])
            .sum();
        if mirror == flat {
            values[flat].im = 0.0;
        } else if mirror > flat {
            let h = 0.5 * (values[flat] + values[mirror].conj());
            values[flat] = h;
            values[mirror] = h.conj();
        }
    });
}

/// Multiplier of a mixed partial derivative: product over axes of (i kappa)^o
/// with the Nyquist bin zeroed on axes of odd derivative order.
pub(crate) fn derivative_multipliers(spec: &GridSpec, orders: &[usize]) -> Vec<Complex64> {
    assert_eq!(orders.len(), spec.dims());
    let tables: Vec<Vec<Complex64>> = (0..spec.dims())
        .map(|ax| {
            let n = spec.shape()[ax];
            (0..n)
                .map(|j| {
                    let o = orders[ax];
                    if o == 0 {
                        return Complex64::new(1.0, 0.0);
                    }
                    if o % 2 == 1 && n.is_multiple_of(2) && j == n / 2 {
                        return Complex64::new(0.0, 0.0);
                    }
                    Complex64::new(0.0, spec.frequency(ax, j)).powu(o as u32)
                })
                .collect()
        })
        .collect();
    let mut out = vec![Complex64::new(1.0, 0.0); spec.len()];
    for_each_index(spec.shape(), |flat, idx| {
        let mut m = Complex64::new(1.0, 0.0);
        for (ax, &j) in idx.iter().enumerate() {
            m *= tables[ax][j];
        }
        out[flat] = m;
    });
    out
}

#[derive(Serialize, Deserialize)]
struct GridHeader {
    dims: usize,
    shape: Vec<usize>,
    box_lengths: Vec<f64>,
}

/// Binary layout: one JSON header line, then the values as little-endian f64.
pub fn to_bytes(g: &GridField) -> Vec<u8> {
    let header = GridHeader {
        dims: g.spec().dims(),
        shape: g.spec().shape().to_vec(),
        box_lengths: g.spec().box_lengths().to_vec(),
    };
    let mut out = serde_json::to_vec(&header).expect("header serializes");
    out.push(b'\n');
    for v in g.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn from_bytes(bytes: &[u8]) -> Result<GridField> {
    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Validation("grid binary is missing the header line".into()))?;
    let header: GridHeader = serde_json::from_slice(&bytes[..newline])
        .map_err(|e| Error::Validation(format!("bad grid header: {e}")))?;
    if header.dims != header.shape.len() {
        return Err(Error::Validation(format!(
            "grid header dims {} disagrees with shape rank {}",
            header.dims,
            header.shape.len()
        )));
    }
    let spec = GridSpec::new(header.box_lengths, header.shape)?;
    let body = &bytes[newline + 1..];
    if body.len() != spec.len() * 8 {
        return Err(Error::Validation(format!(
            "grid body holds {} bytes but the header implies {}",
            body.len(),
            spec.len() * 8
        )));
    }
    let values: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    GridField::new(spec, values)
}

pub fn write_binary(g: &GridField, path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(&to_bytes(g))?;
    Ok(())
}

pub fn read_binary(path: &Path) -> Result<GridField> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    from_bytes(&bytes)
}

/// CSV rows `t,x,value` for two-dimensional grids.
pub fn write_csv_2d(g: &GridField, out: &mut impl Write) -> Result<()> {
    if g.spec().dims() != 2 {
        return Err(Error::Validation(format!(
            "CSV export is defined for 2-dimensional grids, got {}",
            g.spec().dims()
        )));
    }
    writeln!(out, "t,x,value")?;
    let (dt, dx) = (g.spec().spacing(0), g.spec().spacing(1));
    let nx = g.spec().shape()[1];
    for (flat, v) in g.values().iter().enumerate() {
        let jt = flat / nx;
        let jx = flat % nx;
        writeln!(out, "{},{},{}", jt as f64 * dt, jx as f64 * dx, v)?;
    }
    Ok(())
}
