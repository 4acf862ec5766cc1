//! Variable-exponent `p(·)`-modulus of curve families in annuli and cylinders.
//!
//! For a radial exponent on an annulus `A(r₁, r₂) ⊂ ℝⁿ` or an axial exponent
//! on a cylinder `D × (0, L)`, the modulus reduces to a one-dimensional convex
//! problem whose minimizer satisfies the pointwise Euler–Lagrange condition
//!
//! ```text
//! p(r) · w(r) · ρ(r)^(p(r) - 1) = λ,     ∫ ρ = 1,
//! ```
//!
//! with `w(r) = ω_{n-1} r^{n-1}` on the annulus and `w ≡ 1` on the cylinder.
//! The crate evaluates these densities in closed form, finds `λ` by
//! bisection on the normalization integral, and compares the modulus with
//! explicit test-density upper bounds. The [`oracle`] module re-derives the
//! same quantities by brute-force minimization over grid densities.
//!
//! ```
//! use varmod::{annulus::{AnnulusProblem, solve_annulus}, exponent::parse_exponent};
//! use varmod::{quadrature::QuadratureConfig, rootfind::BisectionConfig};
//!
//! let p = parse_exponent("2", "r", 1.0, 2.0).unwrap();
//! let prob = AnnulusProblem::new(2, 1.0, 2.0, p).unwrap();
//! let sol = solve_annulus(&prob, &QuadratureConfig::default(), &BisectionConfig::default()).unwrap();
//! let closed_form = 2.0 * std::f64::consts::PI / 2f64.ln();
//! assert!((sol.modulus / closed_form - 1.0).abs() < 1e-8);
//! ```

pub mod annulus;
pub mod cli;
pub mod cylinder;
pub mod exponent;
pub mod oracle;
pub mod quadrature;
pub mod rootfind;
mod solution;

pub use solution::{ExtremalSolution, SolveError};
