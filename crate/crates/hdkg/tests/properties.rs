//! Property-based checks: algebraic identities that must hold across the
//! whole parameter space, not just at hand-picked points. Case counts are
//! kept small enough for the suite to stay fast.

use hdkg::dynamics::{build_mode_ode, classify_spectrum};
use hdkg::emt::pairing::PairingContraction;
use hdkg::grid::{from_bytes, to_bytes, GridField, GridSpec};
use hdkg::model::ModelParams;
use hdkg::poly::{build_poly, factorial_f64};
use hdkg::roots::real_roots;
use hdkg::solver::solve_sourced_spectral;
use hdkg::symbol::{OperatorSymbol, SymbolKind};
use num_complex::Complex64;
use proptest::prelude::*;

/// Sum over all orderings of the slot list, pairing consecutive entries;
/// every perfect pairing appears the same number of times, so the average
/// over permutations equals the average over pairings. This walks a much
/// larger set than the pairing enumeration it cross-checks.
fn permutation_average(vectors: &[Vec<f64>]) -> f64 {
    fn mink(u: &[f64], v: &[f64]) -> f64 {
        u[0] * v[0] - u[1..].iter().zip(&v[1..]).map(|(a, b)| a * b).sum::<f64>()
    }
    fn visit(
        order: &mut Vec<usize>,
        used: &mut Vec<bool>,
        vectors: &[Vec<f64>],
        acc: &mut (f64, usize),
    ) {
        if order.len() == vectors.len() {
            let product: f64 = order
                .chunks(2)
                .map(|pair| mink(&vectors[pair[0]], &vectors[pair[1]]))
                .product();
            acc.0 += product;
            acc.1 += 1;
            return;
        }
        for i in 0..vectors.len() {
            if !used[i] {
                used[i] = true;
                order.push(i);
                visit(order, used, vectors, acc);
                order.pop();
                used[i] = false;
            }
        }
    }
    let mut acc = (0.0, 0usize);
    let mut used = vec![false; vectors.len()];
    visit(&mut Vec::new(), &mut used, vectors, &mut acc);
    acc.0 / acc.1 as f64
}

fn grid_16() -> GridSpec {
    GridSpec::new(vec![2.0 * std::f64::consts::PI; 2], vec![16, 16]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn vieta_sum_and_product_of_roots(n in 1u32..=12) {
        let report = real_roots(&build_poly(n).unwrap()).unwrap();
        let sum: Complex64 = report.complex_roots.iter().sum();
        let product: Complex64 = report.complex_roots.iter().product();
        let fact = factorial_f64(n);
        prop_assert!((sum.re - n as f64).abs() <= 1e-8 * n as f64);
        prop_assert!(sum.im.abs() <= 1e-8 * n as f64);
        prop_assert!((product.re - fact).abs() <= 1e-8 * fact);
        prop_assert!(product.im.abs() <= 1e-8 * fact);
    }

    #[test]
    fn characteristic_spectrum_is_negation_symmetric(
        n in 1u32..=8,
        k in 0.0f64..6.0,
        a in 0.5f64..2.0,
    ) {
        let ode = build_mode_ode(&ModelParams::new(n, a).unwrap(), k).unwrap();
        let roots = ode.char_roots();
        prop_assert_eq!(roots.len(), 2 * n as usize);
        for lam in roots {
            let closest = roots
                .iter()
                .map(|mu| (lam + mu).norm())
                .fold(f64::INFINITY, f64::min);
            prop_assert!(closest <= 1e-8 * (1.0 + lam.norm()));
        }
        let class = classify_spectrum(&ode);
        prop_assert_eq!(class.growing, class.decaying);
        prop_assert_eq!(
            2 * class.oscillatory_pairs + class.growing + class.decaying,
            2 * n as usize
        );
    }

    #[test]
    fn symbol_real_and_complex_routes_agree(
        n in 1u32..=6,
        a in 0.5f64..2.0,
        p2 in -10.0f64..10.0,
    ) {
        let p = ModelParams::new(n, a).unwrap();
        for kind in [SymbolKind::FiniteOrder, SymbolKind::InfiniteOrder] {
            let sym = OperatorSymbol::new(p.clone(), kind);
            let real = sym.value(p2);
            let complex = sym.value_complex(Complex64::new(p2, 0.0));
            prop_assert!((complex.re - real).abs() <= 1e-12 * (1.0 + real.abs()));
            prop_assert!(complex.im.abs() <= 1e-12 * (1.0 + real.abs()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sourced_solve_is_linear(
        j1 in prop::collection::vec(-1.0f64..1.0, 256),
        j2 in prop::collection::vec(-1.0f64..1.0, 256),
        alpha in -2.0f64..2.0,
        beta in -2.0f64..2.0,
    ) {
        let p = ModelParams::new(2, 1.0).unwrap();
        let spec = grid_16();
        let combined: Vec<f64> = j1
            .iter()
            .zip(&j2)
            .map(|(x, y)| alpha * x + beta * y)
            .collect();
        let phi1 = solve_sourced_spectral(&p, SymbolKind::FiniteOrder,
            &GridField::new(spec.clone(), j1).unwrap()).unwrap().field;
        let phi2 = solve_sourced_spectral(&p, SymbolKind::FiniteOrder,
            &GridField::new(spec.clone(), j2).unwrap()).unwrap().field;
        let phi12 = solve_sourced_spectral(&p, SymbolKind::FiniteOrder,
            &GridField::new(spec, combined).unwrap()).unwrap().field;
        let scale = phi12.max_abs().max(phi1.max_abs()).max(phi2.max_abs()).max(1e-30);
        let worst = phi12
            .values()
            .iter()
            .zip(phi1.values().iter().zip(phi2.values()))
            .fold(0.0f64, |m, (c, (x, y))| m.max((c - (alpha * x + beta * y)).abs()));
        prop_assert!(worst <= 1e-11 * scale);
    }

    #[test]
    fn pairing_contraction_matches_permutation_average(
        n_pairs in 1usize..=3,
        dim in 2usize..=3,
        seed in prop::collection::vec(-2.0f64..2.0, 24),
    ) {
        let vectors: Vec<Vec<f64>> = (0..2 * n_pairs)
            .map(|i| seed[i * dim..(i + 1) * dim].to_vec())
            .collect();
        let fast = PairingContraction::new(n_pairs)
            .unwrap()
            .contract(&vectors)
            .unwrap();
        let slow = permutation_average(&vectors);
        let scale = vectors
            .iter()
            .map(|v| v.iter().fold(0.0f64, |m, x| m.max(x.abs())))
            .fold(1.0f64, |acc, m| acc * m.max(1.0));
        prop_assert!((fast - slow).abs() <= 1e-12 * scale);
    }

    #[test]
    fn grid_binary_serialization_round_trips(
        values in prop::collection::vec(
            prop_oneof![prop::num::f64::NORMAL, Just(0.0)],
            64,
        ),
        wide in prop::bool::ANY,
    ) {
        let shape = if wide { vec![16, 4] } else { vec![8, 8] };
        let spec = GridSpec::new(vec![3.5, 2.0 * std::f64::consts::PI], shape).unwrap();
        let g = GridField::new(spec, values).unwrap();
        let back = from_bytes(&to_bytes(&g)).unwrap();
        prop_assert_eq!(back.spec().shape(), g.spec().shape());
        prop_assert_eq!(back.spec().box_lengths(), g.spec().box_lengths());
        let bits_equal = back
            .values()
            .iter()
            .zip(g.values())
            .all(|(x, y)| x.to_bits() == y.to_bits());
        prop_assert!(bits_equal);
    }
}
