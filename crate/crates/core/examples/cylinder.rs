//! Unit cube cylinder [0,1]² × (0,1) with p(t) = 2 + t, compared against the
//! constant density.

use varmod::cylinder::{self, CylinderProblem};
use varmod::exponent::ExponentFunction;
use varmod::quadrature::QuadratureConfig;
use varmod::rootfind::BisectionConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = ExponentFunction::affine(2.0, 1.0, 0.0, 1.0)?;
    let prob = CylinderProblem::new(1.0, 1.0, p)?;
    let quad = QuadratureConfig::default();
    let sol = cylinder::solve_cylinder(&prob, &quad, &BisectionConfig::default())?;
    let bound = cylinder::constant_density_upper_bound(&prob, &quad)?;

    println!("lambda         = {:.6}", sol.lambda);
    println!("modulus        = {:.6}", sol.modulus);
    println!("constant bound = {bound:.6}");
    println!("gap            = {:.6}", bound - sol.modulus);
    println!("envelope       = {:.6}", cylinder::constant_density_envelope(&prob));
    Ok(())
}
