//! Curves joining the boundary spheres of `A(r₁, r₂) ⊂ ℝⁿ` with a radial
//! exponent `p(|x|)`.
//!
//! The extremal density is radial and solves
//! `ω_{n-1} p(r) r^{n-1} ρ(r)^{p(r)-1} = λ`, so
//!
//! ```text
//! ρ*(r) = (λ / (p(r) ω_{n-1} r^{n-1}))^{1/(p(r)-1)},   ∫_{r₁}^{r₂} ρ* dr = 1,
//! M     = ω_{n-1} ∫_{r₁}^{r₂} ρ*(r)^{p(r)} r^{n-1} dr.
//! ```

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::exponent::ExponentFunction;
use crate::quadrature::{integrate, QuadratureConfig};
use crate::rootfind::{solve_increasing, BisectionConfig};
use crate::solution::uniform_points;
use crate::{ExtremalSolution, SolveError};

/// Surface measure `ω_{n-1} = 2π^{n/2} / Γ(n/2)` of the unit sphere in `ℝⁿ`.
pub fn unit_sphere_area(n: u32) -> f64 {
    assert!(n >= 1, "dimension must be at least 1");
    // ω(n + 2) = ω(n) · 2π / n, seeded with ω(1) = 2 and ω(2) = 2π
    let mut area = if n % 2 == 1 { 2.0 } else { 2.0 * PI };
    let mut k = if n % 2 == 1 { 1 } else { 2 };
    while k < n {
        area *= 2.0 * PI / k as f64;
        k += 2;
    }
    area
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnulusProblem {
    n: u32,
    r1: f64,
    r2: f64,
    p: ExponentFunction,
    omega: f64,
}

impl AnnulusProblem {
    /// The exponent is re-evaluated on `[r1, r2]` if it was built on another
    /// interval.
    pub fn new(n: u32, r1: f64, r2: f64, p: ExponentFunction) -> Result<Self, SolveError> {
        if n < 2 {
            return Err(SolveError::Invalid(format!("dimension n = {n} must be at least 2")));
        }
        if !(r1.is_finite() && r1 > 0.0) {
            return Err(SolveError::Invalid(format!("inner radius r1 = {r1} must be positive")));
        }
        if !(r2.is_finite() && r1 < r2) {
            return Err(SolveError::Invalid(format!(
                "radii must satisfy 0 < r1 < r2 (got r1 = {r1}, r2 = {r2})"
            )));
        }
        let p = if p.interval() == (r1, r2) {
            p
        } else {
            p.on_interval(r1, r2)?
        };
        Ok(Self {
            n,
            r1,
            r2,
            p,
            omega: unit_sphere_area(n),
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn radii(&self) -> (f64, f64) {
        (self.r1, self.r2)
    }

    pub fn exponent(&self) -> &ExponentFunction {
        &self.p
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// `ω_{n-1} r^{n-1}`.
    fn weight(&self, r: f64) -> f64 {
        self.omega * r.powi(self.n as i32 - 1)
    }

    /// Candidate extremal density for multiplier `lambda`.
    pub fn density(&self, lambda: f64, r: f64) -> f64 {
        let p = self.p.eval(r);
        (lambda / (p * self.weight(r))).powf(1.0 / (p - 1.0))
    }

    /// Logarithmic test density `1 / (r log(r₂/r₁))`.
    pub fn log_density(&self, r: f64) -> f64 {
        1.0 / (r * (self.r2 / self.r1).ln())
    }
}

/// `Λ(λ) = ∫_{r₁}^{r₂} ρ*_λ(r) dr`.
pub fn normalization_value(prob: &AnnulusProblem, lambda: f64, quad: &QuadratureConfig) -> Result<f64, SolveError> {
    Ok(integrate(|r| prob.density(lambda, r), prob.r1, prob.r2, quad)?)
}

pub fn solve_annulus(
    prob: &AnnulusProblem,
    quad: &QuadratureConfig,
    bis: &BisectionConfig,
) -> Result<ExtremalSolution, SolveError> {
    let root = solve_increasing(|l| integrate(|r| prob.density(l, r), prob.r1, prob.r2, quad), 1.0, bis)?;
    let lambda = root.root;
    let modulus = integrate(
        |r| {
            let p = prob.p.eval(r);
            let w = prob.weight(r);
            w * (lambda / (p * w)).powf(p / (p - 1.0))
        },
        prob.r1,
        prob.r2,
        quad,
    )?;
    let density_prob = prob.clone();
    Ok(ExtremalSolution {
        lambda,
        modulus,
        residual: root.residual,
        solver_iters: root.iters,
        quadrature_step: quad.realized_step(prob.r1, prob.r2)?,
        interval: (prob.r1, prob.r2),
        density: Arc::new(move |r| density_prob.density(lambda, r)),
    })
}

/// Largest relative violation of `ω_{n-1} p(r) r^{n-1} ρ(r)^{p(r)-1} = λ` over
/// `samples` uniform radii.
pub fn euler_lagrange_residual(sol: &ExtremalSolution, prob: &AnnulusProblem, samples: usize) -> f64 {
    uniform_points(prob.r1, prob.r2, samples)
        .map(|r| {
            let p = prob.p.eval(r);
            let lhs = p * prob.weight(r) * sol.density(r).powf(p - 1.0);
            (lhs - sol.lambda).abs() / sol.lambda
        })
        .fold(0.0, f64::max)
}

/// Classical modulus `ω_{n-1} (∫_{r₁}^{r₂} r^{-(n-1)/(p-1)} dr)^{1-p}` for a
/// constant exponent, in closed form.
pub fn constant_exponent_modulus(n: u32, p: f64, r1: f64, r2: f64) -> Result<f64, SolveError> {
    if n < 2 {
        return Err(SolveError::Invalid(format!("dimension n = {n} must be at least 2")));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(SolveError::Invalid(format!("exponent p = {p} must exceed 1")));
    }
    if !(r1 > 0.0 && r1 < r2 && r2.is_finite()) {
        return Err(SolveError::Invalid(format!(
            "radii must satisfy 0 < r1 < r2 (got r1 = {r1}, r2 = {r2})"
        )));
    }
    let k = (n as f64 - 1.0) / (p - 1.0);
    let inner = if (k - 1.0).abs() < 1e-12 {
        (r2 / r1).ln()
    } else {
        (r2.powf(1.0 - k) - r1.powf(1.0 - k)) / (1.0 - k)
    };
    Ok(unit_sphere_area(n) * inner.powf(1.0 - p))
}

/// Energy of the logarithmic test density, an upper bound for the modulus:
/// `ω_{n-1} ∫ r^{n-1-p(r)} / log(r₂/r₁)^{p(r)} dr`.
pub fn log_density_upper_bound(prob: &AnnulusProblem, quad: &QuadratureConfig) -> Result<f64, SolveError> {
    let log_ratio = (prob.r2 / prob.r1).ln();
    let n = prob.n as f64;
    let integral = integrate(
        |r| {
            let p = prob.p.eval(r);
            r.powf(n - 1.0 - p) / log_ratio.powf(p)
        },
        prob.r1,
        prob.r2,
        quad,
    )?;
    Ok(prob.omega * integral)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub lambda: f64,
    pub modulus: f64,
    pub upper_bound: f64,
    pub residual: f64,
    pub quadrature_step: f64,
    pub solver_iters: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Swept parameter (outer radius or cylinder length).
    pub param: f64,
    pub outcome: Result<SweepPoint, SolveError>,
}

/// Solves the template problem once per outer radius. Rows come back in input
/// order; a failing row does not stop the sweep.
pub fn modulus_sweep(
    template: &AnnulusProblem,
    r2_values: &[f64],
    quad: &QuadratureConfig,
    bis: &BisectionConfig,
) -> Vec<SweepRow> {
    r2_values
        .par_iter()
        .map(|&r2| {
            let outcome = AnnulusProblem::new(template.n, template.r1, r2, template.p.clone()).and_then(|prob| {
                let sol = solve_annulus(&prob, quad, bis)?;
                Ok(SweepPoint {
                    lambda: sol.lambda,
                    modulus: sol.modulus,
                    upper_bound: log_density_upper_bound(&prob, quad)?,
                    residual: sol.residual,
                    quadrature_step: sol.quadrature_step,
                    solver_iters: sol.solver_iters,
                })
            });
            SweepRow { param: r2, outcome }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityCertificate {
    /// `ω_{n-1} ∫ |u'(r)|^{p(r)} r^{n-1} dr` for the radial potential.
    pub energy: f64,
    /// `u(r₁)`, should be 1.
    pub u_inner: f64,
    /// `u(r₂)`, exactly 0.
    pub u_outer: f64,
}

/// Radial potential `u(r) = ∫_r^{r₂} ρ*(s) ds` of a solved annulus.
pub fn potential(
    sol: &ExtremalSolution,
    prob: &AnnulusProblem,
    r: f64,
    quad: &QuadratureConfig,
) -> Result<f64, SolveError> {
    if r >= prob.r2 {
        return Ok(0.0);
    }
    Ok(integrate(|s| sol.density(s), r.max(prob.r1), prob.r2, quad)?)
}

/// Builds the potential from the extremal density and evaluates its energy,
/// which bounds the condenser capacity from above. `|∇u| = ρ*`, so the energy
/// reproduces the modulus.
pub fn capacity_upper_via_potential(
    sol: &ExtremalSolution,
    prob: &AnnulusProblem,
    quad: &QuadratureConfig,
) -> Result<CapacityCertificate, SolveError> {
    let u_inner = potential(sol, prob, prob.r1, quad)?;
    let u_outer = potential(sol, prob, prob.r2, quad)?;
    let energy = integrate(
        |r| {
            let grad = sol.density(r);
            prob.weight(r) * grad.powf(prob.p.eval(r))
        },
        prob.r1,
        prob.r2,
        quad,
    )?;
    Ok(CapacityCertificate {
        energy,
        u_inner,
        u_outer,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::parse_exponent;

    fn defaults() -> (QuadratureConfig, BisectionConfig) {
        (QuadratureConfig::default(), BisectionConfig::default())
    }

    fn problem(n: u32, r1: f64, r2: f64, p: &str) -> AnnulusProblem {
        AnnulusProblem::new(n, r1, r2, parse_exponent(p, "r", r1, r2).unwrap()).unwrap()
    }

    #[test]
    fn sphere_areas() {
        assert!((unit_sphere_area(1) - 2.0).abs() < 1e-15);
        assert!((unit_sphere_area(2) - 2.0 * PI).abs() < 1e-15);
        assert!((unit_sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
        // ω₄ = 8π²/3
        assert!((unit_sphere_area(5) - 8.0 * PI * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        let p = parse_exponent("2", "r", 1.0, 2.0).unwrap();
        assert!(AnnulusProblem::new(1, 1.0, 2.0, p.clone()).is_err());
        assert!(AnnulusProblem::new(2, 0.0, 2.0, p.clone()).is_err());
        let err = AnnulusProblem::new(2, 2.0, 1.0, p.clone()).unwrap_err();
        assert!(err.to_string().contains("r1 < r2"));
        // "1 + r" is not > 1 near r = 0
        let q = parse_exponent("1 + r", "r", 1.0, 2.0).unwrap();
        assert!(AnnulusProblem::new(2, 1e-9, 2.0, q).is_err());
    }

    #[test]
    fn normalization_small_lambda() {
        let (quad, _) = defaults();
        let prob = problem(2, 1.0, 2.0, "1+r");
        assert!(normalization_value(&prob, 1e-12, &quad).unwrap() < 1e-3);
    }

    #[test]
    fn normalization_is_increasing() {
        let (quad, _) = defaults();
        let prob = problem(3, 0.5, 2.0, "1.5 + r");
        let values: Vec<f64> = (0..=16)
            .map(|k| normalization_value(&prob, 10f64.powf(-2.0 + k as f64 * 0.25), &quad).unwrap())
            .collect();
        assert!(values.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn constant_exponent_closed_forms() {
        let v = constant_exponent_modulus(2, 2.0, 1.0, 2.0).unwrap();
        assert!((v - 2.0 * PI / 2f64.ln()).abs() < 1e-12);
        let v = constant_exponent_modulus(3, 3.0, 1.0, std::f64::consts::E).unwrap();
        assert!((v - 4.0 * PI).abs() < 1e-12);
        for n in 2..5 {
            let a = constant_exponent_modulus(n, n as f64, 1.0, 2.0).unwrap();
            let b = constant_exponent_modulus(n, n as f64, 2.0, 4.0).unwrap();
            assert!((a - b).abs() < 1e-12 * a);
        }
        assert!(constant_exponent_modulus(2, 1.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn p2_solution_matches_closed_form() {
        let (quad, bis) = defaults();
        let sol = solve_annulus(&problem(2, 1.0, 2.0, "2"), &quad, &bis).unwrap();
        assert!((sol.modulus - 2.0 * PI / 2f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn constant_exponents_agree_with_closed_form() {
        let (quad, bis) = defaults();
        for n in [2u32, 3] {
            for p in [1.5, 2.0, n as f64, 4.0] {
                let prob = AnnulusProblem::new(n, 1.0, 2.0, ExponentFunction::constant(p, 1.0, 2.0).unwrap()).unwrap();
                let sol = solve_annulus(&prob, &quad, &bis).unwrap();
                let exact = constant_exponent_modulus(n, p, 1.0, 2.0).unwrap();
                assert!((sol.modulus / exact - 1.0).abs() < 1e-7, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn conformal_case_matches_log_density() {
        let (quad, bis) = defaults();
        for n in [2u32, 3, 4] {
            let prob = problem(n, 1.0, 3.0, &n.to_string());
            let sol = solve_annulus(&prob, &quad, &bis).unwrap();
            for r in uniform_points(1.0, 3.0, 100) {
                let rel = (sol.density(r) / prob.log_density(r) - 1.0).abs();
                assert!(rel < 1e-8, "n={n} r={r} rel={rel}");
            }
            let bound = log_density_upper_bound(&prob, &quad).unwrap();
            assert!((bound / sol.modulus - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn euler_lagrange_and_normalization() {
        let (quad, bis) = defaults();
        let prob = problem(3, 0.5, 1.5, "2 + exp(-r)");
        let sol = solve_annulus(&prob, &quad, &bis).unwrap();
        assert!(euler_lagrange_residual(&sol, &prob, 1000) <= 1e-8);
        let mass = integrate(|r| sol.density(r), 0.5, 1.5, &quad).unwrap();
        assert!((mass - 1.0).abs() < 1e-8);
        assert!(sol.sample_density(1000).iter().all(|&(_, v)| v > 0.0));
    }

    #[test]
    fn density_envelope() {
        let (quad, bis) = defaults();
        let prob = problem(2, 1.0, 2.0, "1+r");
        let sol = solve_annulus(&prob, &quad, &bis).unwrap();
        let (pm, pp) = (prob.exponent().p_minus(), prob.exponent().p_plus());
        let base = sol.lambda / (pm * prob.omega() * 1.0);
        let envelope = base.powf(1.0 / (pm - 1.0)) + base.powf(1.0 / (pp - 1.0));
        let max = sol.sample_density(1000).iter().map(|s| s.1).fold(0.0, f64::max);
        assert!(max <= envelope);
    }

    #[test]
    fn log_bound_dominates_with_margin_away_from_n() {
        let (quad, bis) = defaults();
        for (n, p) in [(2u32, "1+r"), (2, "2 + 2*r"), (3, "1.5 + r/2")] {
            let prob = problem(n, 1.0, 2.0, p);
            let m = solve_annulus(&prob, &quad, &bis).unwrap().modulus;
            let b = log_density_upper_bound(&prob, &quad).unwrap();
            assert!(b > m, "{p}: bound {b} <= modulus {m}");
        }
        let prob = problem(2, 1.0, 2.0, "2 + 2*r");
        let m = solve_annulus(&prob, &quad, &bis).unwrap().modulus;
        let b = log_density_upper_bound(&prob, &quad).unwrap();
        assert!(b - m > 1e-2 * m);
    }

    #[test]
    fn sweep_decreases_and_keeps_order() {
        let (quad, bis) = defaults();
        let template = problem(2, 1.0, 2.0, "2");
        let rows = modulus_sweep(&template, &[2.0, 4.0, 8.0, 16.0], &quad, &bis);
        let ms: Vec<f64> = rows.iter().map(|r| r.outcome.as_ref().unwrap().modulus).collect();
        assert!(ms.windows(2).all(|w| w[0] > w[1]));
        for (row, m) in rows.iter().zip(&ms) {
            let exact = 2.0 * PI / row.param.ln();
            assert!((m / exact - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn sweep_limits() {
        let (_, bis) = defaults();
        let template = problem(2, 1.0, 2.0, "2");
        let rows = modulus_sweep(&template, &[1.001], &QuadratureConfig::default(), &bis);
        assert!(rows[0].outcome.as_ref().unwrap().modulus > 1e3);
        let rows = modulus_sweep(&template, &[1e6], &QuadratureConfig::with_step(1.0), &bis);
        let m = rows[0].outcome.as_ref().unwrap().modulus;
        assert!(m < 10f64.powf(-0.5) * 2.0 * PI, "{m}");
        // default step cannot cover [1, 1e6]; the row fails, others survive
        let rows = modulus_sweep(&template, &[2.0, 1e6, 0.5], &QuadratureConfig::default(), &bis);
        assert!(rows[0].outcome.is_ok());
        assert!(rows[1].outcome.is_err());
        assert!(rows[2].outcome.as_ref().unwrap_err().is_validation());
    }

    #[test]
    fn capacity_certificate() {
        let (quad, bis) = defaults();
        let prob = problem(2, 1.0, 2.0, "2");
        let sol = solve_annulus(&prob, &quad, &bis).unwrap();
        let cert = capacity_upper_via_potential(&sol, &prob, &quad).unwrap();
        assert!((cert.energy - 2.0 * PI / 2f64.ln()).abs() < 1e-6);
        assert!((cert.energy / sol.modulus - 1.0).abs() < 1e-8);
        assert!((cert.u_inner - 1.0).abs() < 1e-6);
        assert_eq!(cert.u_outer, 0.0);
        let mid = potential(&sol, &prob, 1.5, &quad).unwrap();
        assert!(mid > 0.0 && mid < 1.0);
    }
}
