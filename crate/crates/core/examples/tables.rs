//! Normalization functions of the two reference problems over a range of
//! multipliers, written as CSV.

use varmod::cli::{reference_annulus, reference_cylinder};
use varmod::quadrature::QuadratureConfig;
use varmod::{annulus, cylinder};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let quad = QuadratureConfig::default();
    let (a, c) = (reference_annulus(), reference_cylinder());
    let mut w = csv::Writer::from_writer(std::io::stdout());
    w.write_record(["lambda", "g", "h"])?;
    for k in 0..=12 {
        let lambda = 10f64.powf(-1.0 + k as f64 / 4.0);
        let g = annulus::normalization_value(&a, lambda, &quad)?;
        let h = cylinder::cylinder_normalization_value(&c, lambda, &quad)?;
        w.serialize((lambda, g, h))?;
    }
    w.flush()?;
    Ok(())
}
