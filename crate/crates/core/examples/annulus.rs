//! Extremal density and modulus of the planar annulus 1 < |x| < 2 with
//! p(r) = 1 + r.

use varmod::annulus::{self, AnnulusProblem};
use varmod::exponent::parse_exponent;
use varmod::quadrature::QuadratureConfig;
use varmod::rootfind::BisectionConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = parse_exponent("1 + r", "r", 1.0, 2.0)?;
    let prob = AnnulusProblem::new(2, 1.0, 2.0, p)?;
    let quad = QuadratureConfig::default();
    let sol = annulus::solve_annulus(&prob, &quad, &BisectionConfig::default())?;

    println!("lambda   = {:.6}", sol.lambda);
    println!("modulus  = {:.6}", sol.modulus);
    println!(
        "residual = {:.2e} after {} bisection steps",
        sol.residual, sol.solver_iters
    );
    println!("EL check = {:.2e}", annulus::euler_lagrange_residual(&sol, &prob, 1000));
    for (r, rho) in sol.sample_density(5) {
        println!("  rho({r:.2}) = {rho:.6}");
    }
    Ok(())
}
