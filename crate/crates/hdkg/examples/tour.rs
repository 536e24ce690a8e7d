//! Small tour of the library surface: census a family member, place a mode
//! on its mass shell, and evaluate the operator symbol.

use hdkg::model::mass_scale;
use hdkg::num_complex::Complex64;
use hdkg::poly::build_poly;
use hdkg::roots::real_roots;
use hdkg::solver::homogeneous_solution;
use hdkg::symbol::OperatorSymbol;
use hdkg::ModelParams;

fn main() -> hdkg::Result<()> {
    let params = ModelParams::new(3, 1.0)?;

    let report = real_roots(&build_poly(3)?)?;
    println!(
        "order 3: {} real root(s), mass shell at q = {}",
        report.sturm_count,
        report.q_n.unwrap()
    );
    println!("physical mass: {}", mass_scale(&params)?);

    let sol = homogeneous_solution(&params, &[(Complex64::new(0.5, 0.0), vec![1.0])])?;
    let mode = &sol.modes()[0];
    println!(
        "mode at k = {:?} oscillates at omega = {}",
        mode.k, mode.omega
    );

    let symbol = OperatorSymbol::finite(params);
    let p2 = mode.omega * mode.omega - 1.0;
    println!("symbol on the shell: {:e}", symbol.value(p2));
    Ok(())
}
