//! Brute-force checks that never touch the closed-form densities.
//!
//! * [`discrete_minimize`] solves the grid version of the one-dimensional
//!   problem `min Σ wᵢ vᵢ^{pᵢ} Δ` subject to `Σ vᵢ Δ = 1`, `v ≥ 0`, through its
//!   own discrete Euler–Lagrange condition `wᵢ pᵢ vᵢ^{pᵢ-1} = μ`.
//! * [`projected_gradient_minimize`] reaches the same minimizer by gradient
//!   descent with projection onto the scaled simplex.
//! * [`spherical_average_check`] and [`fibre_average_check`] test on 2-D grids
//!   that averaging over spheres or cross-sections keeps a density admissible
//!   and does not raise its energy.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use thiserror::Error;

use crate::annulus::AnnulusProblem;
use crate::cylinder::CylinderProblem;
use crate::rootfind::{solve_increasing, BisectionConfig, RootError};

/// Smallest admissible `pᵢ - 1` on a grid.
const MIN_EXCESS: f64 = 1e-6;
/// Relative slack in discrete admissibility tests.
const ADMISSIBLE_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("invalid grid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Bracket(#[from] RootError),
    #[error("projected gradient stalled at energy {energy} (reference {reference})")]
    NonConvergence { energy: f64, reference: f64 },
    #[error("input density is not admissible: line {line} has mass {mass} < 1")]
    NotAdmissible { line: usize, mass: f64 },
}

/// Nonnegative piecewise-constant density on a uniform grid of cells.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridDensity {
    pub values: Vec<f64>,
    pub cell_width: f64,
}

impl GridDensity {
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_width
    }

    pub fn energy(&self, weights: &[f64], exponents: &[f64]) -> f64 {
        discrete_energy(&self.values, weights, exponents, self.cell_width)
    }

    /// Same density divided by its mass.
    pub fn normalized(&self) -> GridDensity {
        let m = self.mass();
        GridDensity {
            values: self.values.iter().map(|v| v / m).collect(),
            cell_width: self.cell_width,
        }
    }
}

/// Discretized one-dimensional problem: weights and exponents at cell
/// midpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct GridProblem {
    pub weights: Vec<f64>,
    pub exponents: Vec<f64>,
    pub cell_width: f64,
}

impl GridProblem {
    /// `wᵢ = ω_{n-1} rᵢ^{n-1}` at the midpoints of `cells` radial cells.
    pub fn annulus(prob: &AnnulusProblem, cells: usize) -> Self {
        let (r1, r2) = prob.radii();
        let dr = (r2 - r1) / cells as f64;
        let mids = (0..cells).map(|i| r1 + (i as f64 + 0.5) * dr);
        let (weights, exponents) = mids
            .map(|r| (prob.omega() * r.powi(prob.n() as i32 - 1), prob.exponent().eval(r)))
            .unzip();
        Self {
            weights,
            exponents,
            cell_width: dr,
        }
    }

    /// `wᵢ = A` at the midpoints of `cells` axial cells.
    pub fn cylinder(prob: &CylinderProblem, cells: usize) -> Self {
        let dt = prob.length() / cells as f64;
        let exponents = (0..cells)
            .map(|i| prob.exponent().eval((i as f64 + 0.5) * dt))
            .collect();
        Self {
            weights: vec![prob.area(); cells],
            exponents,
            cell_width: dt,
        }
    }

    pub fn minimize(&self) -> Result<GridDensity, OracleError> {
        discrete_minimize(&self.weights, &self.exponents, self.cell_width)
    }

    pub fn energy(&self, density: &GridDensity) -> f64 {
        density.energy(&self.weights, &self.exponents)
    }
}

pub fn discrete_energy(values: &[f64], weights: &[f64], exponents: &[f64], cell_width: f64) -> f64 {
    values
        .iter()
        .zip(weights)
        .zip(exponents)
        .map(|((v, w), p)| w * v.powf(*p))
        .sum::<f64>()
        * cell_width
}

fn check_inputs(weights: &[f64], exponents: &[f64], cell_width: f64) -> Result<(), OracleError> {
    if weights.is_empty() || weights.len() != exponents.len() {
        return Err(OracleError::Invalid(format!(
            "need matching nonempty weights and exponents (got {} and {})",
            weights.len(),
            exponents.len()
        )));
    }
    if !(cell_width.is_finite() && cell_width > 0.0) {
        return Err(OracleError::Invalid(format!(
            "cell width {cell_width} must be positive"
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(OracleError::Invalid(format!("weight {w} must be positive")));
    }
    if let Some(p) = exponents.iter().find(|p| !(p.is_finite() && **p >= 1.0 + MIN_EXCESS)) {
        return Err(OracleError::Invalid(format!("exponent {p} must be at least 1 + 1e-6")));
    }
    Ok(())
}

fn cell_values<'a>(mu: f64, weights: &'a [f64], exponents: &'a [f64]) -> impl Iterator<Item = f64> + 'a {
    weights
        .iter()
        .zip(exponents)
        .map(move |(w, p)| (mu / (w * p)).powf(1.0 / (p - 1.0)))
}

/// Exact minimizer of `Σ wᵢ vᵢ^{pᵢ} Δ` on `{v ≥ 0, Σ vᵢ Δ = 1}`.
pub fn discrete_minimize(weights: &[f64], exponents: &[f64], cell_width: f64) -> Result<GridDensity, OracleError> {
    check_inputs(weights, exponents, cell_width)?;
    if weights.len() == 1 {
        return Ok(GridDensity {
            values: vec![1.0 / cell_width],
            cell_width,
        });
    }
    let bis = BisectionConfig {
        residual_tol: 1e-14,
        lambda_tol: 1e-15,
        max_iters: 400,
        ..BisectionConfig::default()
    };
    let mass =
        |mu: f64| Ok::<_, std::convert::Infallible>(cell_values(mu, weights, exponents).sum::<f64>() * cell_width);
    let mu = solve_increasing(mass, 1.0, &bis)?.root;
    Ok(GridDensity {
        values: cell_values(mu, weights, exponents).collect(),
        cell_width,
    })
}

/// Relative spread of `wᵢ pᵢ vᵢ^{pᵢ-1}` across cells.
pub fn discrete_el_spread(density: &GridDensity, weights: &[f64], exponents: &[f64]) -> f64 {
    let terms: Vec<f64> = density
        .values
        .iter()
        .zip(weights)
        .zip(exponents)
        .map(|((v, w), p)| w * p * v.powf(p - 1.0))
        .collect();
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = terms.iter().cloned().fold(f64::INFINITY, f64::min);
    (max - min) / max
}

/// Euclidean projection onto `{v ≥ 0, Σ vᵢ = total}`.
pub fn project_onto_simplex(v: &[f64], total: f64) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut shift = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - total) / (k + 1) as f64;
        if u - candidate > 0.0 {
            shift = candidate;
        }
    }
    v.iter().map(|x| (x - shift).max(0.0)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedGradient {
    pub density: GridDensity,
    /// Energy before the first step and after each step.
    pub energies: Vec<f64>,
}

impl ProjectedGradient {
    pub fn energy(&self) -> f64 {
        *self.energies.last().expect("at least the initial energy")
    }
}

/// Step `0.1 / L` with `L` the largest curvature `wᵢ pᵢ (pᵢ-1) v^{pᵢ-2}`,
/// using `v = max(reference)` for `pᵢ ≥ 2` and `v = min(reference)/2` below.
pub fn default_pg_step(weights: &[f64], exponents: &[f64], reference: &GridDensity) -> f64 {
    let v_max = reference.values.iter().cloned().fold(0.0, f64::max);
    let v_min = reference.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let curvature = weights
        .iter()
        .zip(exponents)
        .map(|(w, p)| {
            let v = if *p >= 2.0 { v_max } else { 0.5 * v_min };
            w * p * (p - 1.0) * v.powf(p - 2.0)
        })
        .fold(0.0, f64::max);
    0.1 / curvature
}

/// Relative energy excess over [`discrete_minimize`] tolerated at the end of
/// [`projected_gradient_minimize`].
pub const PG_TOLERANCE: f64 = 1e-3;

/// Projected gradient descent from the uniform density.
pub fn projected_gradient_minimize(
    weights: &[f64],
    exponents: &[f64],
    cell_width: f64,
    iters: usize,
    step: f64,
) -> Result<ProjectedGradient, OracleError> {
    check_inputs(weights, exponents, cell_width)?;
    if !(step.is_finite() && step > 0.0) || iters == 0 {
        return Err(OracleError::Invalid(
            "step must be positive and iters at least 1".into(),
        ));
    }
    let cells = weights.len();
    let total = 1.0 / cell_width;
    let mut v = vec![total / cells as f64; cells];
    let energy = |v: &[f64]| discrete_energy(v, weights, exponents, cell_width);
    let mut energies = Vec::with_capacity(iters + 1);
    energies.push(energy(&v));
    for _ in 0..iters {
        let trial: Vec<f64> = v
            .iter()
            .zip(weights)
            .zip(exponents)
            .map(|((x, w), p)| x - step * w * p * x.powf(p - 1.0))
            .collect();
        v = project_onto_simplex(&trial, total);
        energies.push(energy(&v));
    }
    let reference = discrete_minimize(weights, exponents, cell_width)?.energy(weights, exponents);
    let result = ProjectedGradient {
        density: GridDensity { values: v, cell_width },
        energies,
    };
    if result.energy() > reference * (1.0 + PG_TOLERANCE) {
        return Err(OracleError::NonConvergence {
            energy: result.energy(),
            reference,
        });
    }
    Ok(result)
}

/// Layout of a [`GridDensity2D`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Grid2D {
    /// Rows are radii `r₁ + (i + ½)Δr`, columns angles `(j + ½)Δθ` on the
    /// planar annulus.
    Polar { r1: f64, r2: f64 },
    /// Rows are heights `(i + ½)Δt` on `(0, L)`, columns equal-measure cells
    /// of a cross-section with area `A`.
    Rect { area: f64, length: f64 },
}

/// Row-major `rows × cols` nonnegative density.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridDensity2D {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
    pub grid: Grid2D,
}

impl GridDensity2D {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>, grid: Grid2D) -> Result<Self, OracleError> {
        if rows == 0 || cols == 0 || values.len() != rows * cols {
            return Err(OracleError::Invalid(format!(
                "{} values do not fill a {rows}×{cols} grid",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(OracleError::Invalid(format!("density value {v} must be nonnegative")));
        }
        Ok(Self {
            rows,
            cols,
            values,
            grid,
        })
    }

    /// Fills the grid from `f(row_coordinate, col_coordinate)` at cell
    /// centers (radius/angle or height/cross-section fraction in `[0, 1]`).
    pub fn from_fn(rows: usize, cols: usize, grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Result<Self, OracleError> {
        let g = Self::new(rows, cols, vec![0.0; rows * cols], grid)?;
        let mut values = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                values.push(f(g.row_coordinate(i), g.col_coordinate(j)));
            }
        }
        Self::new(rows, cols, values, grid)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    fn row_step(&self) -> f64 {
        match self.grid {
            Grid2D::Polar { r1, r2 } => (r2 - r1) / self.rows as f64,
            Grid2D::Rect { length, .. } => length / self.rows as f64,
        }
    }

    pub fn row_coordinate(&self, i: usize) -> f64 {
        let start = match self.grid {
            Grid2D::Polar { r1, .. } => r1,
            Grid2D::Rect { .. } => 0.0,
        };
        start + (i as f64 + 0.5) * self.row_step()
    }

    pub fn col_coordinate(&self, j: usize) -> f64 {
        let frac = (j as f64 + 0.5) / self.cols as f64;
        match self.grid {
            Grid2D::Polar { .. } => 2.0 * PI * frac,
            Grid2D::Rect { .. } => frac,
        }
    }

    /// Measure of one cell in row `i`.
    fn cell_measure(&self, i: usize) -> f64 {
        match self.grid {
            Grid2D::Polar { .. } => self.row_coordinate(i) * self.row_step() * 2.0 * PI / self.cols as f64,
            Grid2D::Rect { area, .. } => area / self.cols as f64 * self.row_step(),
        }
    }

    /// `Σ ρ^{p(row)} dx` with `p` evaluated at row centers.
    pub fn energy(&self, p: impl Fn(f64) -> f64) -> f64 {
        (0..self.rows)
            .map(|i| {
                let pi = p(self.row_coordinate(i));
                let row: f64 = (0..self.cols).map(|j| self.get(i, j).powf(pi)).sum();
                row * self.cell_measure(i)
            })
            .sum()
    }

    /// Riemann sum `Σᵢ ρ(i, j) Δ` along each column (ray or vertical segment).
    pub fn line_masses(&self) -> Vec<f64> {
        let step = self.row_step();
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.get(i, j)).sum::<f64>() * step)
            .collect()
    }

    /// Index and mass of the first line with mass below 1, if any.
    pub fn first_inadmissible_line(&self) -> Option<(usize, f64)> {
        self.line_masses()
            .into_iter()
            .enumerate()
            .find(|(_, m)| *m < 1.0 - ADMISSIBLE_SLACK)
    }

    /// Each row replaced by its mean.
    pub fn row_average(&self) -> GridDensity2D {
        let mut values = Vec::with_capacity(self.values.len());
        for i in 0..self.rows {
            let row = &self.values[i * self.cols..(i + 1) * self.cols];
            // mean of deviations keeps constant rows bit-exact
            let base = row[0];
            let mean = base + row.iter().map(|v| v - base).sum::<f64>() / self.cols as f64;
            values.extend(std::iter::repeat_n(mean, self.cols));
        }
        GridDensity2D { values, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AveragingReport {
    pub energy_before: f64,
    pub energy_after: f64,
    pub admissible_after: bool,
}

impl AveragingReport {
    /// Energy did not increase (up to `1e-12` relative rounding) and the
    /// average stayed admissible.
    pub fn holds(&self) -> bool {
        self.admissible_after && self.energy_after <= self.energy_before * (1.0 + 1e-12) + 1e-12
    }
}

fn averaging_check(rho: &GridDensity2D, p: impl Fn(f64) -> f64) -> Result<AveragingReport, OracleError> {
    if let Some((line, mass)) = rho.first_inadmissible_line() {
        return Err(OracleError::NotAdmissible { line, mass });
    }
    let avg = rho.row_average();
    Ok(AveragingReport {
        energy_before: rho.energy(&p),
        energy_after: avg.energy(&p),
        admissible_after: avg.first_inadmissible_line().is_none(),
    })
}

/// Averages a planar polar-grid density over circles and compares energies.
pub fn spherical_average_check(rho: &GridDensity2D, prob: &AnnulusProblem) -> Result<AveragingReport, OracleError> {
    let (r1, r2) = prob.radii();
    if prob.n() != 2 || rho.grid != (Grid2D::Polar { r1, r2 }) {
        return Err(OracleError::Invalid(
            "spherical check needs a planar annulus and a matching polar grid".into(),
        ));
    }
    averaging_check(rho, |r| prob.exponent().eval(r))
}

/// Averages a cylinder density over cross-sections and compares energies.
pub fn fibre_average_check(rho: &GridDensity2D, prob: &CylinderProblem) -> Result<AveragingReport, OracleError> {
    let expected = Grid2D::Rect {
        area: prob.area(),
        length: prob.length(),
    };
    if rho.grid != expected {
        return Err(OracleError::Invalid(
            "fibre check needs a rectangle grid matching the cylinder".into(),
        ));
    }
    averaging_check(rho, |t| prob.exponent().eval(t))
}

/// Log-normal cell values, each column rescaled so its line mass is
/// `1 + U(0, 0.25)`.
pub fn random_admissible_density<R: Rng>(rows: usize, cols: usize, grid: Grid2D, rng: &mut R) -> GridDensity2D {
    let normal: Normal<f64> = Normal::new(0.0, 0.75).expect("valid sigma");
    let mut values: Vec<f64> = (0..rows * cols).map(|_| normal.sample(rng).exp()).collect();
    let mut g = GridDensity2D::new(rows, cols, values.clone(), grid).expect("positive finite values");
    let masses = g.line_masses();
    for (j, m) in masses.iter().enumerate() {
        let target = 1.0 + 0.25 * rng.random::<f64>();
        for i in 0..rows {
            values[i * cols + j] *= target / m;
        }
    }
    g.values = values;
    g
}
