//! The logarithmic test density is extremal only when p equals the dimension.

use varmod::annulus::{self, AnnulusProblem};
use varmod::exponent::parse_exponent;
use varmod::quadrature::QuadratureConfig;
use varmod::rootfind::BisectionConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let quad = QuadratureConfig::default();
    let bis = BisectionConfig::default();
    println!(
        "{:>3} {:>10} {:>12} {:>12} {:>10}",
        "n", "p(r)", "modulus", "log bound", "excess"
    );
    for (n, p) in [(2, "2"), (3, "3"), (2, "3"), (3, "2"), (2, "1 + r"), (2, "4 - r")] {
        let prob = AnnulusProblem::new(n, 1.0, 2.0, parse_exponent(p, "r", 1.0, 2.0)?)?;
        let m = annulus::solve_annulus(&prob, &quad, &bis)?.modulus;
        let b = annulus::log_density_upper_bound(&prob, &quad)?;
        println!("{n:>3} {p:>10} {m:>12.6} {b:>12.6} {:>9.4}%", 100.0 * (b / m - 1.0));
    }
    let closed = annulus::constant_exponent_modulus(3, 2.0, 1.0, 2.0)?;
    println!("closed form n=3, p=2: {closed:.6}");
    Ok(())
}
