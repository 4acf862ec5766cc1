//! Bracketed bisection for strictly increasing scalar equations `F(x) = target`
//! on `(0, ∞)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

const EXPANSION_CEILING: f64 = 1e30;
const EXPANSION_FLOOR: f64 = 1e-30;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootError {
    #[error("could not bracket the target {target}: F({lo:e}) = {f_lo}, F({hi:e}) = {f_hi}")]
    BracketFailure {
        target: f64,
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
    #[error("bisection did not converge in {iters} iterations (bracket [{lo}, {hi}])")]
    MaxItersExceeded { iters: usize, lo: f64, hi: f64 },
    #[error("invalid bisection config: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Function(#[from] crate::quadrature::QuadratureError),
}

impl From<std::convert::Infallible> for RootError {
    fn from(e: std::convert::Infallible) -> Self {
        match e {}
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BisectionConfig {
    /// Tolerance on `|F(x) - target|`.
    pub residual_tol: f64,
    /// Relative bracket width `(hi - lo) / x` at termination.
    pub lambda_tol: f64,
    pub max_iters: usize,
    pub initial_bracket: (f64, f64),
}

impl Default for BisectionConfig {
    fn default() -> Self {
        Self {
            residual_tol: 1e-6,
            lambda_tol: 1e-10,
            max_iters: 200,
            initial_bracket: (1e-8, 1.0),
        }
    }
}

impl BisectionConfig {
    pub fn validate(&self) -> Result<(), RootError> {
        let (lo, hi) = self.initial_bracket;
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(RootError::InvalidConfig("initial bracket must satisfy 0 < lo < hi"));
        }
        if !(self.residual_tol > 0.0 && self.lambda_tol > 0.0) {
            return Err(RootError::InvalidConfig("tolerances must be positive"));
        }
        if self.max_iters == 0 {
            return Err(RootError::InvalidConfig("max_iters must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub root: f64,
    /// `|F(root) - target|`.
    pub residual: f64,
    /// Bisection steps after the bracket was established.
    pub iters: usize,
    /// Final bracket.
    pub bracket: (f64, f64),
}

/// Solves `F(x) = target` for a continuous, strictly increasing `F` on
/// `(0, ∞)`.
///
/// The initial bracket is widened geometrically (hi doubled, lo halved) until
/// `F(lo) < target < F(hi)`. Bisection then runs until both the residual and
/// the relative bracket width are within tolerance, or `F` hits the target
/// exactly.
pub fn solve_increasing<F, E>(f: F, target: f64, cfg: &BisectionConfig) -> Result<Root, RootError>
where
    F: Fn(f64) -> Result<f64, E>,
    RootError: From<E>,
{
    cfg.validate()?;
    let (mut lo, mut hi) = cfg.initial_bracket;
    let mut f_lo = f(lo)?;
    let mut f_hi = f(hi)?;

    let bracket_failure = |lo: f64, hi: f64, f_lo: f64, f_hi: f64| RootError::BracketFailure {
        target,
        lo,
        hi,
        f_lo,
        f_hi,
    };

    while f_hi <= target {
        if f_hi == target {
            return Ok(Root {
                root: hi,
                residual: 0.0,
                iters: 0,
                bracket: (hi, hi),
            });
        }
        if !f_hi.is_finite() || hi * 2.0 > EXPANSION_CEILING {
            return Err(bracket_failure(lo, hi, f_lo, f_hi));
        }
        // the old hi is a valid lower end
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        f_hi = f(hi)?;
    }
    while f_lo >= target {
        if f_lo == target {
            return Ok(Root {
                root: lo,
                residual: 0.0,
                iters: 0,
                bracket: (lo, lo),
            });
        }
        if !f_lo.is_finite() || lo * 0.5 < EXPANSION_FLOOR {
            return Err(bracket_failure(lo, hi, f_lo, f_hi));
        }
        hi = lo;
        f_hi = f_lo;
        lo *= 0.5;
        f_lo = f(lo)?;
    }
    if !(f_lo.is_finite() && f_hi.is_finite()) {
        return Err(bracket_failure(lo, hi, f_lo, f_hi));
    }

    for iter in 1..=cfg.max_iters {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        if !f_mid.is_finite() {
            return Err(bracket_failure(lo, hi, f_lo, f_hi));
        }
        if f_mid == target {
            return Ok(Root {
                root: mid,
                residual: 0.0,
                iters: iter,
                bracket: (mid, mid),
            });
        }
        if f_mid < target {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
        let (root, f_root) = if (f_lo - target).abs() <= (f_hi - target).abs() {
            (lo, f_lo)
        } else {
            (hi, f_hi)
        };
        let residual = (f_root - target).abs();
        let width = hi - lo;
        // no representable midpoint left
        let next = 0.5 * (lo + hi);
        let exhausted = next <= lo || next >= hi;
        if (residual <= cfg.residual_tol && width <= cfg.lambda_tol * root) || exhausted {
            return Ok(Root {
                root,
                residual,
                iters: iter,
                bracket: (lo, hi),
            });
        }
    }
    Err(RootError::MaxItersExceeded {
        iters: cfg.max_iters,
        lo,
        hi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    fn ok(f: impl Fn(f64) -> f64) -> impl Fn(f64) -> Result<f64, Infallible> {
        move |x| Ok(f(x))
    }

    #[test]
    fn identity_hits_bracket_end() {
        let r = solve_increasing(ok(|x| x), 1.0, &BisectionConfig::default()).unwrap();
        assert_eq!(r.root, 1.0);
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn expands_upward_and_downward() {
        let cfg = BisectionConfig::default();
        let r = solve_increasing(ok(|x| x * x), 1e6, &cfg).unwrap();
        assert!((r.root - 1e3).abs() < 1e-6);
        let r = solve_increasing(ok(|x| x.ln()), (1e-12f64).ln(), &cfg).unwrap();
        assert!((r.root / 1e-12 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bracket_failure_when_range_is_bounded() {
        let err = solve_increasing(ok(|x| x / (1.0 + x)), 2.0, &BisectionConfig::default());
        assert!(matches!(err, Err(RootError::BracketFailure { .. })));
        let err = solve_increasing(ok(|x| 1.0 + x), 0.5, &BisectionConfig::default());
        assert!(matches!(err, Err(RootError::BracketFailure { .. })));
    }

    #[test]
    fn max_iters() {
        let cfg = BisectionConfig {
            max_iters: 3,
            ..Default::default()
        };
        let err = solve_increasing(ok(|x| x.powi(3)), 0.3, &cfg);
        assert!(matches!(err, Err(RootError::MaxItersExceeded { .. })));
    }

    #[test]
    fn invalid_config() {
        let cfg = BisectionConfig {
            initial_bracket: (1.0, 0.5),
            ..Default::default()
        };
        assert!(matches!(
            solve_increasing(ok(|x| x), 1.0, &cfg),
            Err(RootError::InvalidConfig(_))
        ));
    }

    #[test]
    fn deterministic() {
        let f = ok(|x: f64| x.powf(0.7) + x.ln_1p());
        let a = solve_increasing(&f, 3.0, &BisectionConfig::default()).unwrap();
        let b = solve_increasing(&f, 3.0, &BisectionConfig::default()).unwrap();
        assert_eq!(a.root.to_bits(), b.root.to_bits());
        assert!(a.bracket.0 <= a.root && a.root <= a.bracket.1);
    }
}
