//! Momentum-space propagator: the inverse kernel of the field equation.
//!
//! D(p^2) = -i a^2 / P_N(-a^2 p^2) = -i / L_N(p^2), which reduces to the
//! familiar i/(p^2 - 1/a^2) at N = 1. Odd orders carry one real pole at
//! p^2 = q_N/a^2; the epsilon prescription is oriented so the N = 1 case
//! becomes i/(p^2 - 1/a^2 + i eps).

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::poly::MAX_POLY_ORDER;
use crate::roots::positive_root;
use crate::symbol::{OperatorSymbol, SymbolKind};
use num_complex::Complex64;

/// Exclusion radius around a real pole for the bare contour, measured in
/// the dimensionless variable q = a^2 p^2. Matches the root tolerance scale.
pub const DELTA_POLE_Q: f64 = 1e-9;
/// Internal half-width, in q units, of the +/- i eps pair averaged for the
/// principal-value prescription.
const PRINCIPAL_VALUE_EPS_Q: f64 = 1e-6;

/// How the one real pole (odd N) is handled when evaluating on the reals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Contour {
    /// Bare real evaluation; refuses points within [`DELTA_POLE_Q`] of the pole.
    None,
    /// Symmetric average of the two i eps shifts; real part is the principal value.
    PrincipalValue,
    /// p^2 -> p^2 + i eps with eps > 0.
    FeynmanEps(f64),
}

/// Propagator evaluation plan: which symbol to invert and how to pass the pole.
#[derive(Debug, Clone)]
pub struct PropagatorSpec {
    symbol: OperatorSymbol,
    contour: Contour,
    pole_q: Option<f64>,
}

impl PropagatorSpec {
    pub fn new(params: ModelParams, kind: SymbolKind, contour: Contour) -> Result<Self> {
        if let Contour::FeynmanEps(eps) = contour {
            if !eps.is_finite() || eps <= 0.0 {
                return Err(Error::Validation(format!(
                    "feynman_eps requires a positive epsilon, got {eps}"
                )));
            }
        }
        let pole_q = match kind {
            SymbolKind::FiniteOrder => {
                let n = params.order();
                if n > MAX_POLY_ORDER {
                    return Err(Error::Range(format!(
                        "propagator pole analysis capped at N <= {MAX_POLY_ORDER}, got {n}"
                    )));
                }
                if n % 2 == 1 {
                    Some(positive_root(n)?)
                } else {
                    None
                }
            }
            SymbolKind::InfiniteOrder => None,
        };
        Ok(Self {
            symbol: OperatorSymbol::new(params, kind),
            contour,
            pole_q,
        })
    }

    pub fn params(&self) -> &ModelParams {
        self.symbol.params()
    }

    pub fn contour(&self) -> Contour {
        self.contour
    }

    pub fn symbol(&self) -> &OperatorSymbol {
        &self.symbol
    }

    /// The real pole p^2 = q_N/a^2; present only for finite odd orders.
    pub fn pole_location(&self) -> Option<f64> {
        let a = self.params().a();
        self.pole_q.map(|q| q / (a * a))
    }

    /// D(p^2) = -i / symbol, with the pole passed per the contour choice.
    pub fn value(&self, p_squared: f64) -> Result<Complex64> {
        let a = self.params().a();
        let a2 = a * a;
        let minus_i = Complex64::new(0.0, -1.0);
        match self.contour {
            Contour::None => {
                if let Some(q_pole) = self.pole_q {
                    let q = a2 * p_squared;
                    if (q - q_pole).abs() < DELTA_POLE_Q {
                        return Err(Error::PoleProximity(format!(
                            "p_squared {p_squared} lies within {DELTA_POLE_Q} (in q units) of \
                             the real pole at {}; choose a contour prescription",
                            q_pole / a2
                        )));
                    }
                }
                Ok(minus_i / self.symbol.value(p_squared))
            }
            Contour::FeynmanEps(eps) => {
                let z = Complex64::new(p_squared, eps);
                Ok(minus_i / self.symbol.value_complex(z))
            }
            Contour::PrincipalValue => {
                let eps = PRINCIPAL_VALUE_EPS_Q / a2;
                let up = minus_i / self.symbol.value_complex(Complex64::new(p_squared, eps));
                let down = minus_i / self.symbol.value_complex(Complex64::new(p_squared, -eps));
                Ok(0.5 * (up + down))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roots::positive_root;

    fn spec(n: u32, a: f64, contour: Contour) -> PropagatorSpec {
        PropagatorSpec::new(
            ModelParams::new(n, a).unwrap(),
            SymbolKind::FiniteOrder,
            contour,
        )
        .unwrap()
    }

    #[test]
    fn value_at_origin() {
        let d = spec(1, 2.0, Contour::None).value(0.0).unwrap();
        assert_eq!(d, Complex64::new(0.0, -4.0));
    }

    #[test]
    fn kg_member_reproduces_standard_form() {
        let s = spec(1, 1.0, Contour::None);
        for &p2 in &[0.0, 2.0, -3.0] {
            let expected = Complex64::new(0.0, 1.0) / (p2 - 1.0);
            let got = s.value(p2).unwrap();
            assert!((got - expected).norm() < 1e-15 * expected.norm().max(1.0));
        }
    }

    #[test]
    fn pole_locations() {
        assert_eq!(spec(1, 1.0, Contour::None).pole_location(), Some(1.0));
        assert_eq!(spec(2, 1.0, Contour::None).pole_location(), None);
        let q3 = positive_root(3).unwrap();
        let p = spec(3, 0.5, Contour::None).pole_location().unwrap();
        assert!((p - q3 / 0.25).abs() < 1e-12);
        let inf = PropagatorSpec::new(
            ModelParams::new(1, 1.0).unwrap(),
            SymbolKind::InfiniteOrder,
            Contour::None,
        )
        .unwrap();
        assert_eq!(inf.pole_location(), None);
    }

    #[test]
    fn magnitude_diverges_at_the_pole() {
        let s = spec(3, 1.0, Contour::None);
        let q3 = positive_root(3).unwrap();
        let near = s.value(q3 + 1e-3).unwrap().norm();
        let origin = s.value(0.0).unwrap().norm();
        assert!(near > 1e2 * origin);
        let below = s.value(q3 - 1e-3).unwrap().norm();
        assert!(below > 1e2 * origin);
    }

    #[test]
    fn bare_contour_refuses_pole_neighborhood() {
        let s = spec(1, 1.0, Contour::None);
        assert!(matches!(s.value(1.0 + 1e-12), Err(Error::PoleProximity(_))));
        assert!(s.value(1.0 + 1e-6).is_ok());
    }

    #[test]
    fn product_with_symbol_is_minus_i() {
        for n in [1u32, 2, 3, 4, 5] {
            let s = spec(n, 1.3, Contour::None);
            for i in 0..50 {
                let p2 = -4.0 + 8.0 * (i as f64 + 0.37) / 50.0;
                let sym = s.symbol().value(p2);
                if sym.abs() < 1e-6 {
                    continue;
                }
                let prod = s.value(p2).unwrap() * sym;
                assert!(
                    (prod - Complex64::new(0.0, -1.0)).norm() < 1e-12,
                    "N={n} p2={p2}"
                );
            }
        }
    }

    #[test]
    fn feynman_orientation_matches_kg_limit() {
        let eps = 1e-4;
        let s = spec(1, 1.0, Contour::FeynmanEps(eps));
        for &p2 in &[0.5, 1.0, 1.7] {
            let expected = Complex64::new(0.0, 1.0) / Complex64::new(p2 - 1.0, eps);
            let got = s.value(p2).unwrap();
            assert!((got - expected).norm() < 1e-12 * expected.norm());
        }
    }

    #[test]
    fn eps_family_converges_linearly_to_bare_value() {
        let p2 = 0.4;
        let bare = spec(3, 1.0, Contour::None).value(p2).unwrap();
        let errs: Vec<f64> = [1e-2, 1e-4, 1e-6]
            .iter()
            .map(|&eps| (spec(3, 1.0, Contour::FeynmanEps(eps)).value(p2).unwrap() - bare).norm())
            .collect();
        let r1 = errs[0] / errs[1];
        let r2 = errs[1] / errs[2];
        assert!((30.0..300.0).contains(&r1), "ratio {r1}");
        assert!((30.0..300.0).contains(&r2), "ratio {r2}");
    }

    #[test]
    fn principal_value_is_finite_at_the_pole() {
        let s = spec(1, 1.0, Contour::PrincipalValue);
        let v = s.value(1.0).unwrap();
        assert!(v.norm().is_finite());
        // Off the pole the principal value approaches the bare evaluation.
        let bare = spec(1, 1.0, Contour::None).value(0.3).unwrap();
        let pv = s.value(0.3).unwrap();
        assert!((pv - bare).norm() < 1e-9);
    }

    #[test]
    fn validates_epsilon() {
        assert!(PropagatorSpec::new(
            ModelParams::new(1, 1.0).unwrap(),
            SymbolKind::FiniteOrder,
            Contour::FeynmanEps(0.0),
        )
        .is_err());
    }
}
