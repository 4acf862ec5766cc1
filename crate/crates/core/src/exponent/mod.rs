//! Variable exponents `p(·)` on a closed interval.
//!
//! An [`ExponentFunction`] pairs an evaluator with its range `[p⁻, p⁺]` on the
//! interval of definition. The range is found by dense sampling followed by a
//! golden-section refinement around the sampled extremes, and every exponent
//! is required to satisfy `p⁻ > 1 + 10⁻⁶`.

mod expr;

use std::fmt;

use thiserror::Error;

pub use expr::{parse, Expr, ParseError};

/// Uniform sample count used to locate `p⁻` and `p⁺`.
pub const RANGE_SAMPLES: usize = 4096;
/// Smallest admissible `p⁻ - 1`.
pub const MIN_EXCESS: f64 = 1e-6;
/// Range width below which an exponent is treated as constant.
pub const CONSTANT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExponentError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("exponent is not finite at {x} (value {value})")]
    Domain { x: f64, value: f64 },
    #[error("exponent range [{p_minus}, {p_plus}] violates 1 < p- <= p+ < inf (need p- > 1 + 1e-6)")]
    Range { p_minus: f64, p_plus: f64 },
    #[error("invalid interval [{a}, {b}]")]
    Interval { a: f64, b: f64 },
}

/// How the exponent is specified.
#[derive(Debug, Clone, PartialEq)]
pub enum ExponentSource {
    Constant(f64),
    /// `offset + slope * x`.
    Affine {
        offset: f64,
        slope: f64,
    },
    Expression {
        text: String,
        var: String,
        tree: Expr,
    },
}

impl ExponentSource {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ExponentSource::Constant(p) => *p,
            ExponentSource::Affine { offset, slope } => offset + slope * x,
            ExponentSource::Expression { tree, .. } => tree.eval(x),
        }
    }
}

impl fmt::Display for ExponentSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExponentSource::Constant(p) => write!(f, "{p}"),
            ExponentSource::Affine { offset, slope } => write!(f, "{offset} + {slope}*x"),
            ExponentSource::Expression { text, .. } => f.write_str(text),
        }
    }
}

/// Exponent `p(·)` on `[a, b]` with its bounds. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentFunction {
    source: ExponentSource,
    a: f64,
    b: f64,
    p_minus: f64,
    p_plus: f64,
}

impl ExponentFunction {
    pub fn new(source: ExponentSource, a: f64, b: f64) -> Result<Self, ExponentError> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(ExponentError::Interval { a, b });
        }
        let (p_minus, p_plus) = match &source {
            ExponentSource::Constant(p) => {
                if !p.is_finite() {
                    return Err(ExponentError::Domain { x: a, value: *p });
                }
                (*p, *p)
            }
            _ => sampled_range(|x| source.eval(x), a, b)?,
        };
        if !(p_minus > 1.0 + MIN_EXCESS && p_plus.is_finite()) {
            return Err(ExponentError::Range { p_minus, p_plus });
        }
        Ok(Self {
            source,
            a,
            b,
            p_minus,
            p_plus,
        })
    }

    pub fn constant(p: f64, a: f64, b: f64) -> Result<Self, ExponentError> {
        Self::new(ExponentSource::Constant(p), a, b)
    }

    pub fn affine(offset: f64, slope: f64, a: f64, b: f64) -> Result<Self, ExponentError> {
        Self::new(ExponentSource::Affine { offset, slope }, a, b)
    }

    /// Same exponent rule on a different interval, with bounds recomputed.
    pub fn on_interval(&self, a: f64, b: f64) -> Result<Self, ExponentError> {
        Self::new(self.source.clone(), a, b)
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.source.eval(x)
    }

    pub fn p_minus(&self) -> f64 {
        self.p_minus
    }

    pub fn p_plus(&self) -> f64 {
        self.p_plus
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn source(&self) -> &ExponentSource {
        &self.source
    }

    pub fn is_constant(&self) -> bool {
        self.p_plus - self.p_minus <= CONSTANT_TOL
    }
}

/// Parses `text` in the variable `var` as an exponent on `[a, b]`.
///
/// Constant expressions are stored as [`ExponentSource::Constant`] so their
/// range is exact.
pub fn parse_exponent(text: &str, var: &str, a: f64, b: f64) -> Result<ExponentFunction, ExponentError> {
    let tree = parse(text, var)?;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(ExponentError::Interval { a, b });
    }
    let source = if tree.is_constant() {
        let p = tree.eval(a);
        if !p.is_finite() {
            return Err(ExponentError::Domain { x: a, value: p });
        }
        ExponentSource::Constant(p)
    } else {
        ExponentSource::Expression {
            text: text.to_string(),
            var: var.to_string(),
            tree,
        }
    };
    ExponentFunction::new(source, a, b)
}

fn sampled_range(f: impl Fn(f64) -> f64, a: f64, b: f64) -> Result<(f64, f64), ExponentError> {
    let n = RANGE_SAMPLES;
    let h = (b - a) / n as f64;
    let node = |i: usize| if i == n { b } else { a + i as f64 * h };
    let (mut i_min, mut i_max) = (0, 0);
    let (mut v_min, mut v_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..=n {
        let x = node(i);
        let v = f(x);
        if !v.is_finite() {
            return Err(ExponentError::Domain { x, value: v });
        }
        if v < v_min {
            v_min = v;
            i_min = i;
        }
        if v > v_max {
            v_max = v;
            i_max = i;
        }
    }
    let local = |i: usize| (node(i.saturating_sub(1)), node((i + 1).min(n)));
    let (lo, hi) = local(i_min);
    let refined_min = golden_section(&f, lo, hi, false);
    let (lo, hi) = local(i_max);
    let refined_max = golden_section(&f, lo, hi, true);
    let p_minus = refined_min.filter(|v| v.is_finite()).map_or(v_min, |v| v.min(v_min));
    let p_plus = refined_max.filter(|v| v.is_finite()).map_or(v_max, |v| v.max(v_max));
    Ok((p_minus, p_plus))
}

/// Golden-section search for a local extremum of `f` on `[lo, hi]`; returns
/// the best value seen.
fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, maximize: bool) -> Option<f64> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let sign = if maximize { -1.0 } else { 1.0 };
    let g = |x: f64| sign * f(x);
    let mut best = g(lo).min(g(hi));
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut g1, mut g2) = (g(x1), g(x2));
    for _ in 0..80 {
        if !(g1.is_finite() && g2.is_finite()) {
            return None;
        }
        best = best.min(g1).min(g2);
        if g1 < g2 {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - INV_PHI * (hi - lo);
            g1 = g(x1);
        } else {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + INV_PHI * (hi - lo);
            g2 = g(x2);
        }
        if hi - lo <= 1e-15 * (1.0 + lo.abs()) {
            break;
        }
    }
    Some(sign * best)
}

/// Lower estimate of the log-Hölder constant: the largest
/// `|p(x) - p(y)| · log(e + 1/|x - y|)` over pairs of `samples` uniform nodes.
/// Diagnostic only.
pub fn log_holder_constant_estimate(p: &ExponentFunction, samples: usize) -> f64 {
    let samples = samples.max(2);
    if p.is_constant() && matches!(p.source, ExponentSource::Constant(_)) {
        return 0.0;
    }
    let (a, b) = p.interval();
    let h = (b - a) / (samples - 1) as f64;
    let xs: Vec<f64> = (0..samples)
        .map(|i| if i == samples - 1 { b } else { a + i as f64 * h })
        .collect();
    let vs: Vec<f64> = xs.iter().map(|&x| p.eval(x)).collect();
    let mut best = 0.0f64;
    for i in 0..samples {
        for j in (i + 1)..samples {
            let d = xs[j] - xs[i];
            let c = (vs[j] - vs[i]).abs() * (std::f64::consts::E + 1.0 / d).ln();
            best = best.max(c);
        }
    }
    best
}
