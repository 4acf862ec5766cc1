//! Composite Simpson integration on a closed interval with a fixed step.
//!
//! The subinterval count is the smallest even integer `N` with
//! `(b - a) / N <= step_hint`, so the realized step never exceeds the hint.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative slack applied before rounding `(b - a) / h` up, so that ratios
/// such as `1.0 / 0.01` are not pushed to the next integer by rounding noise.
const RATIO_GUARD: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("integrand is not finite at x = {x} (value {value})")]
    NonFiniteIntegrand { x: f64, value: f64 },
    #[error("interval of width {width} needs {required} subintervals, limit is {limit}")]
    IntervalTooFine { width: f64, required: f64, limit: usize },
    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("invalid quadrature config: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Target subinterval width.
    pub step_hint: f64,
    pub max_subintervals: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            step_hint: 1e-2,
            max_subintervals: 1_000_000,
        }
    }
}

impl QuadratureConfig {
    pub fn with_step(step_hint: f64) -> Self {
        Self {
            step_hint,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), QuadratureError> {
        if !(self.step_hint.is_finite() && self.step_hint > 0.0) {
            return Err(QuadratureError::InvalidConfig("step_hint must be positive and finite"));
        }
        if self.max_subintervals < 2 {
            return Err(QuadratureError::InvalidConfig("max_subintervals must be at least 2"));
        }
        Ok(())
    }

    /// Even number of subintervals used on `[a, b]`.
    pub fn subintervals(&self, a: f64, b: f64) -> Result<usize, QuadratureError> {
        self.validate()?;
        if !(a.is_finite() && b.is_finite()) || a > b {
            return Err(QuadratureError::InvalidInterval { a, b });
        }
        let width = b - a;
        let ratio = (width / self.step_hint) * (1.0 - RATIO_GUARD);
        if !ratio.is_finite() || ratio > self.max_subintervals as f64 {
            return Err(QuadratureError::IntervalTooFine {
                width,
                required: ratio.ceil(),
                limit: self.max_subintervals,
            });
        }
        let mut n = (ratio.ceil() as usize).max(2);
        if n % 2 == 1 {
            n += 1;
        }
        if n > self.max_subintervals {
            return Err(QuadratureError::IntervalTooFine {
                width,
                required: n as f64,
                limit: self.max_subintervals,
            });
        }
        Ok(n)
    }

    /// Realized step on `[a, b]`.
    pub fn realized_step(&self, a: f64, b: f64) -> Result<f64, QuadratureError> {
        Ok((b - a) / self.subintervals(a, b)? as f64)
    }
}

/// Composite Simpson approximation of `∫_a^b f`.
pub fn integrate<F>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    let n = cfg.subintervals(a, b)?;
    if a == b {
        return Ok(0.0);
    }
    let h = (b - a) / n as f64;
    let eval = |i: usize| {
        // pin the last node to b exactly
        let x = if i == n { b } else { a + i as f64 * h };
        let value = f(x);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(QuadratureError::NonFiniteIntegrand { x, value })
        }
    };

    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..n {
        let v = eval(i)?;
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    let ends = eval(0)? + eval(n)?;
    Ok(h / 3.0 * (ends + 4.0 * odd + 2.0 * even))
}
