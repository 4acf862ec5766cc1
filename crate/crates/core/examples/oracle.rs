//! Brute-force checks: the discrete minimizer converges to the analytic
//! modulus, and averaging random densities never raises their energy.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use varmod::cylinder::{self, CylinderProblem};
use varmod::exponent::parse_exponent;
use varmod::oracle::{self, Grid2D, GridProblem};
use varmod::quadrature::QuadratureConfig;
use varmod::rootfind::BisectionConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let prob = CylinderProblem::new(1.0, 1.0, parse_exponent("2 + t", "t", 0.0, 1.0)?)?;
    let exact = cylinder::solve_cylinder(&prob, &QuadratureConfig::default(), &BisectionConfig::default())?.modulus;
    for cells in [25, 50, 100, 200] {
        let g = GridProblem::cylinder(&prob, cells);
        let d = g.minimize()?;
        println!(
            "N = {cells:>3}  energy = {:.9}  error = {:.2e}",
            g.energy(&d),
            (g.energy(&d) - exact).abs()
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let rho = oracle::random_admissible_density(40, 16, Grid2D::Rect { area: 1.0, length: 1.0 }, &mut rng);
    let rep = oracle::fibre_average_check(&rho, &prob)?;
    println!(
        "fibre average: energy {:.6} -> {:.6}, admissible {}",
        rep.energy_before, rep.energy_after, rep.admissible_after
    );
    Ok(())
}
