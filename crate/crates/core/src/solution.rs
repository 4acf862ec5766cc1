use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::exponent::ExponentError;
use crate::quadrature::QuadratureError;
use crate::rootfind::RootError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error(transparent)]
    Exponent(#[from] ExponentError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Root(#[from] RootError),
}

impl SolveError {
    /// True for errors caused by the problem description rather than the
    /// numerics.
    pub fn is_validation(&self) -> bool {
        matches!(self, SolveError::Invalid(_) | SolveError::Exponent(_))
    }
}

pub(crate) type DensityFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Lagrange multiplier, extremal density and modulus of a solved problem.
#[derive(Clone)]
pub struct ExtremalSolution {
    pub lambda: f64,
    pub modulus: f64,
    /// `|∫ρ - 1|` at the returned multiplier.
    pub residual: f64,
    pub solver_iters: usize,
    /// Realized Simpson step on the problem interval.
    pub quadrature_step: f64,
    pub interval: (f64, f64),
    pub(crate) density: DensityFn,
}

impl ExtremalSolution {
    /// Extremal density at `x`.
    pub fn density(&self, x: f64) -> f64 {
        (self.density)(x)
    }

    /// Density sampled at `k` uniform points including both endpoints.
    pub fn sample_density(&self, k: usize) -> Vec<(f64, f64)> {
        let (a, b) = self.interval;
        match k {
            0 => Vec::new(),
            1 => vec![(a, self.density(a))],
            _ => (0..k)
                .map(|i| {
                    let x = if i == k - 1 {
                        b
                    } else {
                        a + (b - a) * i as f64 / (k - 1) as f64
                    };
                    (x, self.density(x))
                })
                .collect(),
        }
    }
}

impl fmt::Debug for ExtremalSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExtremalSolution")
            .field("lambda", &self.lambda)
            .field("modulus", &self.modulus)
            .field("residual", &self.residual)
            .field("solver_iters", &self.solver_iters)
            .field("quadrature_step", &self.quadrature_step)
            .field("interval", &self.interval)
            .finish_non_exhaustive()
    }
}

/// Uniform sample points on `[a, b]`, endpoints included.
pub(crate) fn uniform_points(a: f64, b: f64, k: usize) -> impl Iterator<Item = f64> {
    let k = k.max(2);
    (0..k).map(move |i| {
        if i == k - 1 {
            b
        } else {
            a + (b - a) * i as f64 / (k - 1) as f64
        }
    })
}
