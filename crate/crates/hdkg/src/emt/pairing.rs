//! Perfect-pairing combinatorics behind the symmetrized metric tensor.
//!
//! The totally symmetrized product of metric tensors over 2n indexes equals
//! the average over all perfect pairings of the index set, each pairing
//! contributing a product of plain metrics. Contracting every index with a
//! vector turns a pairing into a product of Minkowski dots, which is how the
//! energy-momentum recursion consumes it.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Largest supported pair count (8 indexes, 105 pairings).
pub const MAX_PAIRS: usize = 4;

/// Minkowski dot with signature (+,-,...,-).
pub(crate) fn minkowski_dot(u: &[f64], v: &[f64]) -> f64 {
    let mut s = u[0] * v[0];
    for d in 1..u.len() {
        s -= u[d] * v[d];
    }
    s
}

pub(crate) fn minkowski_dot_complex(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    let mut s = u[0] * v[0];
    for d in 1..u.len() {
        s -= u[d] * v[d];
    }
    s
}

/// Index raised with the same signature: (v_0, -v_1, ..., -v_{D-1}).
pub(crate) fn raise_complex(v: &[Complex64]) -> Vec<Complex64> {
    let mut out = v.to_vec();
    for c in out.iter_mut().skip(1) {
        *c = -*c;
    }
    out
}

/// Double factorial (2n-1)!!, the number of perfect pairings of 2n slots.
fn pairing_total(n_pairs: usize) -> usize {
    (0..n_pairs).map(|i| 2 * i + 1).product()
}

/// Enumerated pairings of the slot set {0, ..., 2n-1}, shared by every
/// contraction at a fixed pair count.
#[derive(Debug, Clone)]
pub struct PairingContraction {
    n_pairs: usize,
    pairings: Vec<Vec<(usize, usize)>>,
}

impl PairingContraction {
    pub fn new(n_pairs: usize) -> Result<Self> {
        if n_pairs == 0 || n_pairs > MAX_PAIRS {
            return Err(Error::Validation(format!(
                "pair count {n_pairs} outside the supported range 1..={MAX_PAIRS}"
            )));
        }
        let mut pairings = Vec::with_capacity(pairing_total(n_pairs));
        let free: Vec<usize> = (0..2 * n_pairs).collect();
        let mut current = Vec::with_capacity(n_pairs);
        enumerate_pairings(&free, &mut current, &mut pairings);
        debug_assert_eq!(pairings.len(), pairing_total(n_pairs));
        Ok(Self { n_pairs, pairings })
    }

    pub fn n_pairs(&self) -> usize {
        self.n_pairs
    }

    pub fn pairing_count(&self) -> usize {
        self.pairings.len()
    }

    fn check_vectors<T>(&self, vectors: &[Vec<T>], expected: usize) -> Result<()> {
        if vectors.len() != expected {
            return Err(Error::Validation(format!(
                "expected {expected} vectors for {} pairs, got {}",
                self.n_pairs,
                vectors.len()
            )));
        }
        let dim = vectors.first().map(Vec::len).unwrap_or(0);
        if dim == 0 || vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::Validation(
                "contraction vectors must be nonempty and of equal dimension".into(),
            ));
        }
        Ok(())
    }

    /// Fully contracted value: average over pairings of the product of
    /// Minkowski dots, one vector per slot.
    pub fn contract(&self, vectors: &[Vec<f64>]) -> Result<f64> {
        self.check_vectors(vectors, 2 * self.n_pairs)?;
        let total: f64 = self
            .pairings
            .iter()
            .map(|pairing| {
                pairing
                    .iter()
                    .map(|&(a, b)| minkowski_dot(&vectors[a], &vectors[b]))
                    .product::<f64>()
            })
            .sum();
        Ok(total / self.pairing_count() as f64)
    }

    pub fn contract_complex(&self, vectors: &[Vec<Complex64>]) -> Result<Complex64> {
        self.check_vectors(vectors, 2 * self.n_pairs)?;
        let mut total = Complex64::new(0.0, 0.0);
        for pairing in &self.pairings {
            let mut term = Complex64::new(1.0, 0.0);
            for &(a, b) in pairing {
                term *= minkowski_dot_complex(&vectors[a], &vectors[b]);
            }
            total += term;
        }
        Ok(total / self.pairing_count() as f64)
    }

    /// Contraction with slot 0 left free and raised: the pairing partner of
    /// slot 0 supplies a raised vector, every other pair a Minkowski dot.
    /// `vectors[j]` fills slot j+1.
    pub fn contract_with_free_index(&self, vectors: &[Vec<Complex64>]) -> Result<Vec<Complex64>> {
        self.check_vectors(vectors, 2 * self.n_pairs - 1)?;
        let dim = vectors[0].len();
        let mut acc = vec![Complex64::new(0.0, 0.0); dim];
        for pairing in &self.pairings {
            let mut weight = Complex64::new(1.0, 0.0);
            let mut partner = usize::MAX;
            for &(a, b) in pairing {
                if a == 0 {
                    partner = b;
                } else {
                    weight *= minkowski_dot_complex(&vectors[a - 1], &vectors[b - 1]);
                }
            }
            let raised = raise_complex(&vectors[partner - 1]);
            for (out, r) in acc.iter_mut().zip(&raised) {
                *out += weight * r;
            }
        }
        let norm = self.pairing_count() as f64;
        for c in acc.iter_mut() {
            *c /= norm;
        }
        Ok(acc)
    }
}

fn enumerate_pairings(
    free: &[usize],
    current: &mut Vec<(usize, usize)>,
    out: &mut Vec<Vec<(usize, usize)>>,
) {
    if free.is_empty() {
        out.push(current.clone());
        return;
    }
    let first = free[0];
    for pick in 1..free.len() {
        let second = free[pick];
        let rest: Vec<usize> = free
            .iter()
            .copied()
            .filter(|&s| s != first && s != second)
            .collect();
        current.push((first, second));
        enumerate_pairings(&rest, current, out);
        current.pop();
    }
}

/// Symmetrized-metric contraction of an even list of vectors: the average
/// over perfect pairings of products of Minkowski dots.
pub fn sym_metric_contract(vectors: &[Vec<f64>]) -> Result<f64> {
    if vectors.is_empty() || !vectors.len().is_multiple_of(2) || vectors.len() > 2 * MAX_PAIRS {
        return Err(Error::Validation(format!(
            "symmetrized contraction needs an even vector count in 2..={}, got {}",
            2 * MAX_PAIRS,
            vectors.len()
        )));
    }
    PairingContraction::new(vectors.len() / 2)?.contract(vectors)
}
