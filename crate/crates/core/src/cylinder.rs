//! Curves joining the ends of a cylinder `D × (0, L)` with an axial exponent
//! `p(t)`.
//!
//! Only `|D| = A` matters: after averaging over cross-sections the modulus is
//! `A · min ∫₀ᴸ φ^{p(t)} dt` over `φ ≥ 0` with `∫ φ = 1`, whose minimizer is
//! `φ*(t) = (λ / p(t))^{1/(p(t)-1)}`.

use std::sync::Arc;

use rayon::prelude::*;

use crate::annulus::{SweepPoint, SweepRow};
use crate::exponent::ExponentFunction;
use crate::quadrature::{integrate, QuadratureConfig};
use crate::rootfind::{solve_increasing, BisectionConfig};
use crate::solution::uniform_points;
use crate::{ExtremalSolution, SolveError};

#[derive(Debug, Clone, PartialEq)]
pub struct CylinderProblem {
    area: f64,
    length: f64,
    p: ExponentFunction,
}

impl CylinderProblem {
    pub fn new(area: f64, length: f64, p: ExponentFunction) -> Result<Self, SolveError> {
        if area.is_infinite() && area > 0.0 {
            return Err(SolveError::Invalid(
                "unbounded cross-section: every nonzero density has infinite energy".into(),
            ));
        }
        if !(area.is_finite() && area > 0.0) {
            return Err(SolveError::Invalid(format!(
                "cross-section area A = {area} must be positive"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(SolveError::Invalid(format!("length L = {length} must be positive")));
        }
        let p = if p.interval() == (0.0, length) {
            p
        } else {
            p.on_interval(0.0, length)?
        };
        Ok(Self { area, length, p })
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn exponent(&self) -> &ExponentFunction {
        &self.p
    }

    pub fn density(&self, lambda: f64, t: f64) -> f64 {
        let p = self.p.eval(t);
        (lambda / p).powf(1.0 / (p - 1.0))
    }
}

/// `h(λ) = ∫₀ᴸ (λ / p(t))^{1/(p(t)-1)} dt`.
pub fn cylinder_normalization_value(
    prob: &CylinderProblem,
    lambda: f64,
    quad: &QuadratureConfig,
) -> Result<f64, SolveError> {
    Ok(integrate(|t| prob.density(lambda, t), 0.0, prob.length, quad)?)
}

pub fn solve_cylinder(
    prob: &CylinderProblem,
    quad: &QuadratureConfig,
    bis: &BisectionConfig,
) -> Result<ExtremalSolution, SolveError> {
    let root = solve_increasing(|l| integrate(|t| prob.density(l, t), 0.0, prob.length, quad), 1.0, bis)?;
    let lambda = root.root;
    let energy = integrate(
        |t| {
            let p = prob.p.eval(t);
            (lambda / p).powf(p / (p - 1.0))
        },
        0.0,
        prob.length,
        quad,
    )?;
    let density_prob = prob.clone();
    Ok(ExtremalSolution {
        lambda,
        modulus: prob.area * energy,
        residual: root.residual,
        solver_iters: root.iters,
        quadrature_step: quad.realized_step(0.0, prob.length)?,
        interval: (0.0, prob.length),
        density: Arc::new(move |t| density_prob.density(lambda, t)),
    })
}

/// Largest relative violation of `p(t) φ(t)^{p(t)-1} = λ` over `samples`
/// uniform points.
pub fn euler_lagrange_residual(sol: &ExtremalSolution, prob: &CylinderProblem, samples: usize) -> f64 {
    uniform_points(0.0, prob.length, samples)
        .map(|t| {
            let p = prob.p.eval(t);
            (p * sol.density(t).powf(p - 1.0) - sol.lambda).abs() / sol.lambda
        })
        .fold(0.0, f64::max)
}

/// Energy of the constant density `1/L`: `A ∫₀ᴸ L^{-p(t)} dt`.
pub fn constant_density_upper_bound(prob: &CylinderProblem, quad: &QuadratureConfig) -> Result<f64, SolveError> {
    let l = prob.length;
    Ok(prob.area * integrate(|t| l.powf(-prob.p.eval(t)), 0.0, l, quad)?)
}

/// `A L^{1-p⁻}` for `L ≥ 1`, `A L^{1-p⁺}` for `L < 1`.
pub fn constant_density_envelope(prob: &CylinderProblem) -> f64 {
    let l = prob.length;
    let p = if l >= 1.0 { prob.p.p_minus() } else { prob.p.p_plus() };
    prob.area * l.powf(1.0 - p)
}

/// Constant-density bound minus the modulus; zero exactly when `p` is
/// constant.
pub fn extremality_gap(
    prob: &CylinderProblem,
    quad: &QuadratureConfig,
    bis: &BisectionConfig,
) -> Result<f64, SolveError> {
    let bound = constant_density_upper_bound(prob, quad)?;
    Ok(bound - solve_cylinder(prob, quad, bis)?.modulus)
}

/// One solve per length; rows in input order.
pub fn length_sweep(
    template: &CylinderProblem,
    lengths: &[f64],
    quad: &QuadratureConfig,
    bis: &BisectionConfig,
) -> Vec<SweepRow> {
    lengths
        .par_iter()
        .map(|&length| {
            let outcome = CylinderProblem::new(template.area, length, template.p.clone()).and_then(|prob| {
                let sol = solve_cylinder(&prob, quad, bis)?;
                Ok(SweepPoint {
                    lambda: sol.lambda,
                    modulus: sol.modulus,
                    upper_bound: constant_density_upper_bound(&prob, quad)?,
                    residual: sol.residual,
                    quadrature_step: sol.quadrature_step,
                    solver_iters: sol.solver_iters,
                })
            });
            SweepRow { param: length, outcome }
        })
        .collect()
}
