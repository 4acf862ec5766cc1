//! Parsing exponent expressions and reading off their range.

use varmod::exponent::{self, parse_exponent};

fn main() {
    let cases = [
        ("2 + t", "t"),
        ("1.5 + r^2/4", "r"),
        ("3 - exp(-x)", "x"),
        ("2 + log(1 + x)", "x"),
        ("1 + x", "x"),
        ("2 +* x", "x"),
        ("2 + y", "x"),
    ];
    for (text, var) in cases {
        match parse_exponent(text, var, 0.0, 2.0) {
            Ok(p) => println!(
                "{text:<16} p- = {:.4}  p+ = {:.4}  log-Hölder ≈ {:.4}",
                p.p_minus(),
                p.p_plus(),
                exponent::log_holder_constant_estimate(&p, 200)
            ),
            Err(e) => println!("{text:<16} rejected: {e}"),
        }
    }
}
