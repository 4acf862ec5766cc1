//! Modulus of planar annuli as the outer radius grows, solved in parallel.

use varmod::annulus::{self, AnnulusProblem};
use varmod::exponent::parse_exponent;
use varmod::quadrature::QuadratureConfig;
use varmod::rootfind::BisectionConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let radii = [1.001, 1.01, 1.1, 2.0, 10.0, 100.0];
    let template = AnnulusProblem::new(2, 1.0, 100.0, parse_exponent("2 + 1/r", "r", 1.0, 100.0)?)?;
    let rows = annulus::modulus_sweep(
        &template,
        &radii,
        &QuadratureConfig::default(),
        &BisectionConfig::default(),
    );
    for row in rows {
        match row.outcome {
            Ok(pt) => println!(
                "r2 = {:>8}  modulus = {:>12.6}  bound = {:>12.6}",
                row.param, pt.modulus, pt.upper_bound
            ),
            Err(e) => println!("r2 = {:>8}  failed: {e}", row.param),
        }
    }
    Ok(())
}
