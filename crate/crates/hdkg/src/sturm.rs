//! Sturm-sequence real-root counting in exact rational arithmetic.
//!
//! The chain starts from the polynomial and its derivative; each further
//! entry is the negated remainder of the two before it. The number of real
//! roots on (-inf, +inf) is the drop in sign variations between the two
//! ends. Exact BigRational arithmetic removes any cancellation concern from
//! the factorial-sized coefficients.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

type RatPoly = Vec<BigRational>;

fn trim(p: &mut RatPoly) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn degree(p: &RatPoly) -> usize {
    p.len().saturating_sub(1)
}

/// Remainder of num / den under polynomial long division. `den` is nonzero.
/// The leading term cancels exactly at every step, so the loop terminates.
fn poly_rem(num: &RatPoly, den: &RatPoly) -> RatPoly {
    let mut rem = num.clone();
    trim(&mut rem);
    let dd = degree(den);
    let dlead = den.last().expect("nonzero divisor").clone();
    while !rem.is_empty() && degree(&rem) >= dd {
        let shift = degree(&rem) - dd;
        let factor = rem.last().expect("nonempty").clone() / dlead.clone();
        for (i, d) in den.iter().enumerate() {
            let sub = factor.clone() * d.clone();
            rem[i + shift] -= sub;
        }
        trim(&mut rem);
    }
    rem
}

/// Sturm chain of a polynomial given by exact integer coefficients
/// (ascending powers).
pub struct SturmChain {
    chain: Vec<RatPoly>,
}

impl SturmChain {
    pub fn new(coeffs: &[i64]) -> Self {
        let mut p0: RatPoly = coeffs
            .iter()
            .map(|&c| BigRational::from_integer(BigInt::from(c)))
            .collect();
        trim(&mut p0);
        let mut chain = Vec::new();
        if p0.is_empty() {
            return Self { chain };
        }
        let p1: RatPoly = p0
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * BigRational::from_integer(BigInt::from(k)))
            .collect();
        let first_is_constant = degree(&p0) == 0;
        chain.push(p0);
        if first_is_constant {
            return Self { chain };
        }
        chain.push(p1);
        loop {
            let len = chain.len();
            let mut next = poly_rem(&chain[len - 2], &chain[len - 1]);
            for c in next.iter_mut() {
                *c = -c.clone();
            }
            trim(&mut next);
            if next.is_empty() {
                break;
            }
            let stop = degree(&next) == 0;
            chain.push(next);
            if stop {
                break;
            }
        }
        Self { chain }
    }

    /// Signs of the chain at +inf (sign of each leading coefficient).
    fn signs_pos_inf(&self) -> Vec<i8> {
        self.chain
            .iter()
            .map(|p| {
                let lead = p.last().expect("trimmed nonempty");
                if lead.is_positive() {
                    1
                } else {
                    -1
                }
            })
            .collect()
    }

    /// Signs at -inf: leading sign flipped for odd degrees.
    fn signs_neg_inf(&self) -> Vec<i8> {
        self.chain
            .iter()
            .map(|p| {
                let lead = p.last().expect("trimmed nonempty");
                let s: i8 = if lead.is_positive() { 1 } else { -1 };
                if degree(p) % 2 == 1 {
                    -s
                } else {
                    s
                }
            })
            .collect()
    }

    fn variations(signs: &[i8]) -> usize {
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Number of distinct real roots on the whole real line.
    pub fn count_all_real(&self) -> usize {
        if self.chain.is_empty() {
            return 0;
        }
        let neg = Self::variations(&self.signs_neg_inf());
        let pos = Self::variations(&self.signs_pos_inf());
        neg - pos
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::build_poly;

    #[test]
    fn counts_simple_cases() {
        // q - 1: one real root.
        assert_eq!(SturmChain::new(&[-1, 1]).count_all_real(), 1);
        // q^2 - 2q + 2: complex pair only.
        assert_eq!(SturmChain::new(&[2, -2, 1]).count_all_real(), 0);
        // q^2 - 1: two real roots.
        assert_eq!(SturmChain::new(&[-1, 0, 1]).count_all_real(), 2);
        // Constant: no roots.
        assert_eq!(SturmChain::new(&[1]).count_all_real(), 0);
    }

    #[test]
    fn family_parity_dichotomy() {
        for n in 0..=20u32 {
            let p = build_poly(n).unwrap();
            let count = SturmChain::new(p.coeffs()).count_all_real();
            let expected = if n % 2 == 1 { 1 } else { 0 };
            assert_eq!(count, expected, "order {n}");
        }
    }
}
