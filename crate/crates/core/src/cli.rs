//! Command-line front end. The `varmod` binary only parses arguments and
//! forwards to [`run`]; everything else lives here so it can be tested
//! without spawning processes.
//!
//! Exit codes: 0 success, 2 invalid input, 3 solver failure, 4 failed oracle
//! invariant.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annulus::{self, AnnulusProblem, SweepRow};
use crate::cylinder::{self, CylinderProblem};
use crate::exponent::{parse_exponent, ExponentError};
use crate::oracle::{self, Grid2D, GridDensity, GridProblem};
use crate::quadrature::QuadratureConfig;
use crate::rootfind::BisectionConfig;
use crate::SolveError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("solver failed: {0}")]
    Solver(String),
    #[error("{failed} oracle check(s) failed")]
    OracleFailed { failed: usize },
    #[error("output error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Solver(_) => 3,
            CliError::OracleFailed { .. } => 4,
            CliError::Io(_) => 1,
        }
    }

    fn solve(context: &str, err: SolveError) -> Self {
        if err.is_validation() {
            CliError::Validation(format!("{context}: {err}"))
        } else {
            CliError::Solver(format!("{context}: {err}"))
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(io::Error::other(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(io::Error::other(e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Text,
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "varmod",
    version,
    about = "Variable-exponent modulus of annuli and cylinders"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Output format.
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Write output to this file instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// JSON file with default values for any flag; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Simpson step hint.
    #[arg(long, global = true)]
    pub step: Option<f64>,
    #[arg(long, global = true)]
    pub max_subintervals: Option<usize>,
    /// Bisection tolerance on |F(λ) - 1|.
    #[arg(long, global = true)]
    pub residual_tol: Option<f64>,
    /// Bisection tolerance on the relative bracket width.
    #[arg(long, global = true)]
    pub lambda_tol: Option<f64>,
    #[arg(long, global = true)]
    pub max_iters: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the annulus problem with a radial exponent p(r).
    Annulus(AnnulusArgs),
    /// Solve the cylinder problem with an axial exponent p(t).
    Cylinder(CylinderArgs),
    /// Solve a family of problems over the outer radius or the length.
    Sweep(SweepArgs),
    /// Evaluate the normalization functions of the two reference examples.
    Tables,
    /// Run the brute-force oracle checks.
    OracleCheck(OracleArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct AnnulusArgs {
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub r1: Option<f64>,
    #[arg(long)]
    pub r2: Option<f64>,
    /// Exponent expression in the variable `r`.
    #[arg(long)]
    pub p: Option<String>,
    /// Also report the extremal density at K uniform points.
    #[arg(long)]
    pub density_samples: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CylinderArgs {
    #[arg(long)]
    pub area: Option<f64>,
    #[arg(long)]
    pub length: Option<f64>,
    /// Exponent expression in the variable `t`.
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub density_samples: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Annulus,
    Cylinder,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub geometry: Option<Geometry>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub r1: Option<f64>,
    #[arg(long)]
    pub area: Option<f64>,
    /// Exponent expression (`r` for annuli, `t` for cylinders).
    #[arg(long)]
    pub p: Option<String>,
    /// Explicit parameter values (outer radius or length).
    #[arg(long, value_delimiter = ',')]
    pub values: Option<Vec<f64>>,
    /// First value of a geometric range.
    #[arg(long)]
    pub from: Option<f64>,
    #[arg(long)]
    pub ratio: Option<f64>,
    #[arg(long)]
    pub count: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct OracleArgs {
    /// Cells in the one-dimensional grids.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Tolerance on the relative spread of the discrete Euler–Lagrange terms.
    #[arg(long)]
    pub el_tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random 2-D densities per geometry.
    #[arg(long)]
    pub draws: Option<usize>,
}

/// Flag defaults read from `--config`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub format: Option<Format>,
    pub step: Option<f64>,
    pub max_subintervals: Option<usize>,
    pub residual_tol: Option<f64>,
    pub lambda_tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub n: Option<u32>,
    pub r1: Option<f64>,
    pub r2: Option<f64>,
    pub area: Option<f64>,
    pub length: Option<f64>,
    pub p: Option<String>,
    pub density_samples: Option<usize>,
    pub geometry: Option<Geometry>,
    pub values: Option<Vec<f64>>,
    pub from: Option<f64>,
    pub ratio: Option<f64>,
    pub count: Option<usize>,
    pub grid: Option<usize>,
    pub el_tol: Option<f64>,
    pub seed: Option<u64>,
    pub draws: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text =
            fs::read_to_string(path).map_err(|e| CliError::Validation(format!("--config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("--config {}: {e}", path.display())))
    }
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Validation(format!("missing required parameter --{flag}")))
}

struct Settings {
    format: Format,
    quad: QuadratureConfig,
    bis: BisectionConfig,
}

fn settings(common: &CommonArgs, file: &FileConfig) -> Result<Settings, CliError> {
    let mut quad = QuadratureConfig::default();
    if let Some(s) = common.step.or(file.step) {
        quad.step_hint = s;
    }
    if let Some(m) = common.max_subintervals.or(file.max_subintervals) {
        quad.max_subintervals = m;
    }
    quad.validate()
        .map_err(|e| CliError::Validation(format!("--step/--max-subintervals: {e}")))?;
    let mut bis = BisectionConfig::default();
    if let Some(t) = common.residual_tol.or(file.residual_tol) {
        bis.residual_tol = t;
    }
    if let Some(t) = common.lambda_tol.or(file.lambda_tol) {
        bis.lambda_tol = t;
    }
    if let Some(m) = common.max_iters.or(file.max_iters) {
        bis.max_iters = m;
    }
    bis.validate()
        .map_err(|e| CliError::Validation(format!("--residual-tol/--lambda-tol/--max-iters: {e}")))?;
    Ok(Settings {
        format: common.format.or(file.format).unwrap_or_default(),
        quad,
        bis,
    })
}

fn exponent_error(e: ExponentError) -> CliError {
    CliError::Validation(format!("--p: {e}"))
}

/// Six significant digits for human-readable output.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..6).contains(&mag) {
        format!("{:.*}", (5 - mag).max(0) as usize, x)
    } else {
        format!("{x:.5e}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    pub quadrature_step: f64,
    pub bisection_iters: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnulusReport {
    pub n: u32,
    pub r1: f64,
    pub r2: f64,
    pub p: String,
    pub p_minus: f64,
    pub p_plus: f64,
    pub lambda: f64,
    pub modulus: f64,
    pub log_bound: f64,
    pub ratio: f64,
    pub diagnostics: Diagnostics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CylinderReport {
    pub area: f64,
    pub length: f64,
    pub p: String,
    pub p_minus: f64,
    pub p_plus: f64,
    pub lambda: f64,
    pub modulus: f64,
    pub constant_bound: f64,
    pub gap: f64,
    pub diagnostics: Diagnostics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<Vec<(f64, f64)>>,
}

pub fn annulus_report(
    args: &AnnulusArgs,
    file: &FileConfig,
    quad: &QuadratureConfig,
    bis: &BisectionConfig,
) -> Result<AnnulusReport, CliError> {
    let n = require(args.n.or(file.n), "n")?;
    let r1 = require(args.r1.or(file.r1), "r1")?;
    let r2 = require(args.r2.or(file.r2), "r2")?;
    let text = require(args.p.clone().or(file.p.clone()), "p")?;
    if n < 2 {
        return Err(CliError::Validation(format!("--n: dimension {n} must be at least 2")));
    }
    if !(r1 > 0.0 && r1 < r2 && r2.is_finite()) {
        return Err(CliError::Validation(format!(
            "--r1/--r2: radii must satisfy 0 < r1 < r2 (got r1 = {r1}, r2 = {r2})"
        )));
    }
    let p = parse_exponent(&text, "r", r1, r2).map_err(exponent_error)?;
    let prob = AnnulusProblem::new(n, r1, r2, p).map_err(|e| CliError::solve("annulus", e))?;
    let sol = annulus::solve_annulus(&prob, quad, bis).map_err(|e| CliError::solve("annulus", e))?;
    let log_bound = annulus::log_density_upper_bound(&prob, quad).map_err(|e| CliError::solve("annulus bound", e))?;
    Ok(AnnulusReport {
        n,
        r1,
        r2,
        p: text,
        p_minus: prob.exponent().p_minus(),
        p_plus: prob.exponent().p_plus(),
        lambda: sol.lambda,
        modulus: sol.modulus,
        log_bound,
        ratio: log_bound / sol.modulus,
        diagnostics: Diagnostics {
            quadrature_step: sol.quadrature_step,
            bisection_iters: sol.solver_iters,
            residual: sol.residual,
        },
        density: args
            .density_samples
            .or(file.density_samples)
            .map(|k| sol.sample_density(k)),
    })
}

pub fn cylinder_report(
    args: &CylinderArgs,
    file: &FileConfig,
    quad: &QuadratureConfig,
    bis: &BisectionConfig,
) -> Result<CylinderReport, CliError> {
    let area = require(args.area.or(file.area), "area")?;
    let length = require(args.length.or(file.length), "length")?;
    let text = require(args.p.clone().or(file.p.clone()), "p")?;
    if area.is_nan() || area <= 0.0 {
        return Err(CliError::Validation(format!(
            "--area: cross-section area {area} must be positive"
        )));
    }
    if !(length > 0.0 && length.is_finite()) {
        return Err(CliError::Validation(format!(
            "--length: length {length} must be positive"
        )));
    }
    let p = parse_exponent(&text, "t", 0.0, length).map_err(exponent_error)?;
    let prob = CylinderProblem::new(area, length, p).map_err(|e| CliError::solve("cylinder", e))?;
    let sol = cylinder::solve_cylinder(&prob, quad, bis).map_err(|e| CliError::solve("cylinder", e))?;
    let bound =
        cylinder::constant_density_upper_bound(&prob, quad).map_err(|e| CliError::solve("cylinder bound", e))?;
    Ok(CylinderReport {
        area,
        length,
        p: text,
        p_minus: prob.exponent().p_minus(),
        p_plus: prob.exponent().p_plus(),
        lambda: sol.lambda,
        modulus: sol.modulus,
        constant_bound: bound,
        gap: bound - sol.modulus,
        diagnostics: Diagnostics {
            quadrature_step: sol.quadrature_step,
            bisection_iters: sol.solver_iters,
            residual: sol.residual,
        },
        density: args
            .density_samples
            .or(file.density_samples)
            .map(|k| sol.sample_density(k)),
    })
}

/// CSV/JSON row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub param: f64,
    pub lambda: Option<f64>,
    pub modulus: Option<f64>,
    pub upper_bound: Option<f64>,
    pub residual: Option<f64>,
    pub quadrature_step: Option<f64>,
    pub bisection_iters: Option<usize>,
    pub error: Option<String>,
}

impl From<&SweepRow> for SweepRecord {
    fn from(row: &SweepRow) -> Self {
        match &row.outcome {
            Ok(pt) => SweepRecord {
                param: row.param,
                lambda: Some(pt.lambda),
                modulus: Some(pt.modulus),
                upper_bound: Some(pt.upper_bound),
                residual: Some(pt.residual),
                quadrature_step: Some(pt.quadrature_step),
                bisection_iters: Some(pt.solver_iters),
                error: None,
            },
            Err(e) => SweepRecord {
                param: row.param,
                lambda: None,
                modulus: None,
                upper_bound: None,
                residual: None,
                quadrature_step: None,
                bisection_iters: None,
                error: Some(e.to_string()),
            },
        }
    }
}

pub fn sweep_records(
    args: &SweepArgs,
    file: &FileConfig,
    quad: &QuadratureConfig,
    bis: &BisectionConfig,
) -> Result<Vec<SweepRecord>, CliError> {
    let geometry = require(args.geometry.or(file.geometry), "geometry")?;
    let text = require(args.p.clone().or(file.p.clone()), "p")?;
    let values = match args.values.clone().or(file.values.clone()) {
        Some(v) => v,
        None => {
            let from = require(args.from.or(file.from), "values (or --from/--ratio/--count)")?;
            let ratio = require(args.ratio.or(file.ratio), "ratio")?;
            let count = require(args.count.or(file.count), "count")?;
            if ratio.is_nan() || ratio <= 0.0 {
                return Err(CliError::Validation(format!("--ratio: {ratio} must be positive")));
            }
            (0..count).map(|k| from * ratio.powi(k as i32)).collect()
        }
    };
    if values.is_empty() {
        return Err(CliError::Validation("--values: no sweep values given".into()));
    }
    let largest = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let rows = match geometry {
        Geometry::Annulus => {
            let n = require(args.n.or(file.n), "n")?;
            let r1 = require(args.r1.or(file.r1), "r1")?;
            if !(r1 > 0.0 && largest > r1 && largest.is_finite()) {
                return Err(CliError::Validation(format!(
                    "--r1/--values: need 0 < r1 < r2 for at least one value (r1 = {r1}, largest r2 = {largest})"
                )));
            }
            let p = parse_exponent(&text, "r", r1, largest).map_err(exponent_error)?;
            let template = AnnulusProblem::new(n, r1, largest, p).map_err(|e| CliError::solve("sweep", e))?;
            annulus::modulus_sweep(&template, &values, quad, bis)
        }
        Geometry::Cylinder => {
            let area = require(args.area.or(file.area), "area")?;
            if !(largest > 0.0 && largest.is_finite()) {
                return Err(CliError::Validation(format!(
                    "--values: lengths must be positive (largest {largest})"
                )));
            }
            let p = parse_exponent(&text, "t", 0.0, largest).map_err(exponent_error)?;
            let template = CylinderProblem::new(area, largest, p).map_err(|e| CliError::solve("sweep", e))?;
            cylinder::length_sweep(&template, &values, quad, bis)
        }
    };
    Ok(rows.iter().map(SweepRecord::from).collect())
}

/// Normalization-function values at the multipliers listed for the two
/// reference examples.
pub const ANNULUS_TABLE_LAMBDAS: [f64; 5] = [1.0, 2.0, 3.0, 3.5, 3.35];
pub const CYLINDER_TABLE_LAMBDAS: [f64; 4] = [1.0, 1.3, 1.5, 1.532];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRecord {
    pub table: String,
    pub lambda: f64,
    pub value: f64,
    pub abs_residual: f64,
    pub quadrature_step: f64,
}

/// Annulus `n = 2`, `A(1, 2)`, `p(r) = 1 + r`.
pub fn reference_annulus() -> AnnulusProblem {
    let p = parse_exponent("1+r", "r", 1.0, 2.0).expect("valid exponent");
    AnnulusProblem::new(2, 1.0, 2.0, p).expect("valid problem")
}

/// Cylinder `[0,1]² × (0, 1)`, `p(t) = 2 + t`.
pub fn reference_cylinder() -> CylinderProblem {
    let p = parse_exponent("2+t", "t", 0.0, 1.0).expect("valid exponent");
    CylinderProblem::new(1.0, 1.0, p).expect("valid problem")
}

pub fn table_records(quad: &QuadratureConfig, bis: &BisectionConfig) -> Result<Vec<TableRecord>, CliError> {
    let ann = reference_annulus();
    let cyl = reference_cylinder();
    let step_a = quad
        .realized_step(1.0, 2.0)
        .map_err(|e| CliError::solve("tables", e.into()))?;
    let step_c = quad
        .realized_step(0.0, 1.0)
        .map_err(|e| CliError::solve("tables", e.into()))?;
    let mut out = Vec::new();
    for &l in &ANNULUS_TABLE_LAMBDAS {
        let g = annulus::normalization_value(&ann, l, quad).map_err(|e| CliError::solve("tables", e))?;
        out.push(TableRecord {
            table: "g".into(),
            lambda: l,
            value: g,
            abs_residual: (g - 1.0).abs(),
            quadrature_step: step_a,
        });
    }
    for &l in &CYLINDER_TABLE_LAMBDAS {
        let h = cylinder::cylinder_normalization_value(&cyl, l, quad).map_err(|e| CliError::solve("tables", e))?;
        out.push(TableRecord {
            table: "h".into(),
            lambda: l,
            value: h,
            abs_residual: (h - 1.0).abs(),
            quadrature_step: step_c,
        });
    }
    let sa = annulus::solve_annulus(&ann, quad, bis).map_err(|e| CliError::solve("tables", e))?;
    let ba = annulus::log_density_upper_bound(&ann, quad).map_err(|e| CliError::solve("tables", e))?;
    let sc = cylinder::solve_cylinder(&cyl, quad, bis).map_err(|e| CliError::solve("tables", e))?;
    let bc = cylinder::constant_density_upper_bound(&cyl, quad).map_err(|e| CliError::solve("tables", e))?;
    for (table, lambda, value, residual, step) in [
        ("annulus_modulus", sa.lambda, sa.modulus, sa.residual, step_a),
        ("annulus_log_bound", sa.lambda, ba, sa.residual, step_a),
        ("cylinder_modulus", sc.lambda, sc.modulus, sc.residual, step_c),
        ("cylinder_constant_bound", sc.lambda, bc, sc.residual, step_c),
    ] {
        out.push(TableRecord {
            table: table.into(),
            lambda,
            value,
            abs_residual: residual,
            quadrature_step: step,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
}

impl CheckRecord {
    fn at_most(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            passed: measured <= threshold,
            measured,
            threshold,
        }
    }

    fn below(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            passed: measured < threshold,
            measured,
            threshold,
        }
    }
}

/// Rows and columns of the random 2-D test densities.
const RANDOM_GRID: (usize, usize) = (40, 16);
const PG_CELLS: usize = 50;
const PG_ITERS: usize = 10_000;

pub fn oracle_checks(
    args: &OracleArgs,
    file: &FileConfig,
    quad: &QuadratureConfig,
    bis: &BisectionConfig,
) -> Result<Vec<CheckRecord>, CliError> {
    let grid = args.grid.or(file.grid).unwrap_or(200);
    let el_tol = args.el_tol.or(file.el_tol).unwrap_or(1e-8);
    let seed = args.seed.or(file.seed).unwrap_or(42);
    let draws = args.draws.or(file.draws).unwrap_or(100);
    if grid == 0 {
        return Err(CliError::Validation("--grid: need at least one cell".into()));
    }
    if el_tol.is_nan() || el_tol < 0.0 {
        return Err(CliError::Validation(format!("--el-tol: {el_tol} must be nonnegative")));
    }
    let oracle_err = |e: oracle::OracleError| CliError::Solver(format!("oracle: {e}"));

    let ann = reference_annulus();
    let cyl = reference_cylinder();
    let m_ann = annulus::solve_annulus(&ann, quad, bis)
        .map_err(|e| CliError::solve("annulus", e))?
        .modulus;
    let m_cyl = cylinder::solve_cylinder(&cyl, quad, bis)
        .map_err(|e| CliError::solve("cylinder", e))?
        .modulus;

    let mut checks = Vec::new();
    for (label, g, pg_grid, analytic) in [
        (
            "annulus",
            GridProblem::annulus(&ann, grid),
            GridProblem::annulus(&ann, PG_CELLS),
            m_ann,
        ),
        (
            "cylinder",
            GridProblem::cylinder(&cyl, grid),
            GridProblem::cylinder(&cyl, PG_CELLS),
            m_cyl,
        ),
    ] {
        let d = g.minimize().map_err(oracle_err)?;
        checks.push(CheckRecord::at_most(
            format!("{label}: discrete Euler-Lagrange spread"),
            oracle::discrete_el_spread(&d, &g.weights, &g.exponents),
            el_tol,
        ));
        checks.push(CheckRecord::at_most(
            format!("{label}: discrete mass"),
            (d.mass() - 1.0).abs(),
            1e-12,
        ));
        if grid == 1 {
            checks.push(CheckRecord::at_most(
                format!("{label}: single cell equals 1/width"),
                (d.values[0] * g.cell_width - 1.0).abs(),
                0.0,
            ));
        } else {
            checks.push(CheckRecord::at_most(
                format!("{label}: oracle energy vs analytic modulus (relative)"),
                (g.energy(&d) / analytic - 1.0).abs(),
                1e-2,
            ));
            let reference = pg_grid.minimize().map_err(oracle_err)?;
            let step = oracle::default_pg_step(&pg_grid.weights, &pg_grid.exponents, &reference);
            let measured = match oracle::projected_gradient_minimize(
                &pg_grid.weights,
                &pg_grid.exponents,
                pg_grid.cell_width,
                PG_ITERS,
                step,
            ) {
                Ok(pg) => (pg.energy() / pg_grid.energy(&reference) - 1.0).abs(),
                Err(oracle::OracleError::NonConvergence { energy, reference }) => energy / reference - 1.0,
                Err(e) => return Err(oracle_err(e)),
            };
            checks.push(CheckRecord::at_most(
                format!("{label}: projected gradient vs discrete minimizer (relative)"),
                measured,
                oracle::PG_TOLERANCE,
            ));
        }
        let inflated = GridDensity {
            values: d.values.iter().map(|v| v * 1.25).collect(),
            cell_width: d.cell_width,
        };
        checks.push(CheckRecord::below(
            format!("{label}: rescaling to unit mass lowers energy (energy ratio)"),
            g.energy(&inflated.normalized()) / g.energy(&inflated),
            1.0,
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (rows, cols) = RANDOM_GRID;
    let polar = Grid2D::Polar { r1: 1.0, r2: 2.0 };
    let rect = Grid2D::Rect { area: 1.0, length: 1.0 };
    let mut worst_sph = f64::NEG_INFINITY;
    let mut worst_fib = f64::NEG_INFINITY;
    let mut failures = 0usize;
    for _ in 0..draws {
        let rho = oracle::random_admissible_density(rows, cols, polar, &mut rng);
        let rep = oracle::spherical_average_check(&rho, &ann).map_err(oracle_err)?;
        worst_sph = worst_sph.max(rep.energy_after / rep.energy_before - 1.0);
        failures += usize::from(!rep.holds());
        let rho = oracle::random_admissible_density(rows, cols, rect, &mut rng);
        let rep = oracle::fibre_average_check(&rho, &cyl).map_err(oracle_err)?;
        worst_fib = worst_fib.max(rep.energy_after / rep.energy_before - 1.0);
        failures += usize::from(!rep.holds());
    }
    if draws > 0 {
        checks.push(CheckRecord::at_most(
            format!("spherical averaging never raises energy ({draws} draws, worst relative change)"),
            worst_sph,
            1e-12,
        ));
        checks.push(CheckRecord::at_most(
            format!("fibre averaging never raises energy ({draws} draws, worst relative change)"),
            worst_fib,
            1e-12,
        ));
        checks.push(CheckRecord::at_most(
            "averaged densities stay admissible (failures)",
            failures as f64,
            0.0,
        ));
    }
    Ok(checks)
}

fn write_csv<W: Write, T: Serialize>(out: &mut W, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<W: Write, T: Serialize>(out: &mut W, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn write_density_csv<W: Write>(out: &mut W, density: &Option<Vec<(f64, f64)>>) -> Result<(), CliError> {
    if let Some(d) = density {
        writeln!(out)?;
        #[derive(Serialize)]
        struct Sample {
            x: f64,
            density: f64,
        }
        let rows: Vec<Sample> = d.iter().map(|&(x, density)| Sample { x, density }).collect();
        write_csv(out, &rows)?;
    }
    Ok(())
}

fn write_density_text<W: Write>(out: &mut W, density: &Option<Vec<(f64, f64)>>) -> io::Result<()> {
    if let Some(d) = density {
        writeln!(out, "density samples:")?;
        for (x, v) in d {
            writeln!(out, "  {:>12}  {}", fmt_sig(*x), fmt_sig(*v))?;
        }
    }
    Ok(())
}

fn write_diagnostics<W: Write>(out: &mut W, d: &Diagnostics) -> io::Result<()> {
    writeln!(out, "quadrature step    = {}", fmt_sig(d.quadrature_step))?;
    writeln!(out, "bisection iters    = {}", d.bisection_iters)?;
    writeln!(out, "bisection residual = {}", fmt_sig(d.residual))
}

/// Runs one command, writing its report to `out`.
pub fn run<W: Write>(cli: &Cli, out: &mut W) -> Result<(), CliError> {
    let file = match &cli.common.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let Settings { format, quad, bis } = settings(&cli.common, &file)?;
    match &cli.command {
        Command::Annulus(args) => {
            let rep = annulus_report(args, &file, &quad, &bis)?;
            match format {
                Format::Json => write_json(out, &rep)?,
                Format::Csv => {
                    #[derive(Serialize)]
                    struct Row<'a> {
                        n: u32,
                        r1: f64,
                        r2: f64,
                        p: &'a str,
                        lambda: f64,
                        modulus: f64,
                        log_bound: f64,
                        ratio: f64,
                        quadrature_step: f64,
                        bisection_iters: usize,
                        residual: f64,
                    }
                    write_csv(
                        out,
                        &[Row {
                            n: rep.n,
                            r1: rep.r1,
                            r2: rep.r2,
                            p: &rep.p,
                            lambda: rep.lambda,
                            modulus: rep.modulus,
                            log_bound: rep.log_bound,
                            ratio: rep.ratio,
                            quadrature_step: rep.diagnostics.quadrature_step,
                            bisection_iters: rep.diagnostics.bisection_iters,
                            residual: rep.diagnostics.residual,
                        }],
                    )?;
                    write_density_csv(out, &rep.density)?;
                }
                Format::Text => {
                    writeln!(
                        out,
                        "annulus n = {}, r1 = {}, r2 = {}, p(r) = {}",
                        rep.n, rep.r1, rep.r2, rep.p
                    )?;
                    writeln!(
                        out,
                        "p range            = [{}, {}]",
                        fmt_sig(rep.p_minus),
                        fmt_sig(rep.p_plus)
                    )?;
                    writeln!(out, "lambda             = {}", fmt_sig(rep.lambda))?;
                    writeln!(out, "modulus            = {}", fmt_sig(rep.modulus))?;
                    writeln!(out, "log-density bound  = {}", fmt_sig(rep.log_bound))?;
                    writeln!(out, "bound / modulus    = {}", fmt_sig(rep.ratio))?;
                    write_diagnostics(out, &rep.diagnostics)?;
                    write_density_text(out, &rep.density)?;
                }
            }
        }
        Command::Cylinder(args) => {
            let rep = cylinder_report(args, &file, &quad, &bis)?;
            match format {
                Format::Json => write_json(out, &rep)?,
                Format::Csv => {
                    #[derive(Serialize)]
                    struct Row<'a> {
                        area: f64,
                        length: f64,
                        p: &'a str,
                        lambda: f64,
                        modulus: f64,
                        constant_bound: f64,
                        gap: f64,
                        quadrature_step: f64,
                        bisection_iters: usize,
                        residual: f64,
                    }
                    write_csv(
                        out,
                        &[Row {
                            area: rep.area,
                            length: rep.length,
                            p: &rep.p,
                            lambda: rep.lambda,
                            modulus: rep.modulus,
                            constant_bound: rep.constant_bound,
                            gap: rep.gap,
                            quadrature_step: rep.diagnostics.quadrature_step,
                            bisection_iters: rep.diagnostics.bisection_iters,
                            residual: rep.diagnostics.residual,
                        }],
                    )?;
                    write_density_csv(out, &rep.density)?;
                }
                Format::Text => {
                    writeln!(out, "cylinder A = {}, L = {}, p(t) = {}", rep.area, rep.length, rep.p)?;
                    writeln!(
                        out,
                        "p range            = [{}, {}]",
                        fmt_sig(rep.p_minus),
                        fmt_sig(rep.p_plus)
                    )?;
                    writeln!(out, "lambda             = {}", fmt_sig(rep.lambda))?;
                    writeln!(out, "modulus            = {}", fmt_sig(rep.modulus))?;
                    writeln!(out, "constant bound     = {}", fmt_sig(rep.constant_bound))?;
                    writeln!(out, "extremality gap    = {}", fmt_sig(rep.gap))?;
                    write_diagnostics(out, &rep.diagnostics)?;
                    write_density_text(out, &rep.density)?;
                }
            }
        }
        Command::Sweep(args) => {
            let rows = sweep_records(args, &file, &quad, &bis)?;
            match format {
                Format::Json => write_json(out, &rows)?,
                Format::Csv => write_csv(out, &rows)?,
                Format::Text => {
                    writeln!(
                        out,
                        "{:>14} {:>14} {:>14} {:>14} {:>12}",
                        "param", "lambda", "modulus", "upper_bound", "step"
                    )?;
                    for r in &rows {
                        match &r.error {
                            None => writeln!(
                                out,
                                "{:>14} {:>14} {:>14} {:>14} {:>12}",
                                fmt_sig(r.param),
                                fmt_sig(r.lambda.unwrap_or(f64::NAN)),
                                fmt_sig(r.modulus.unwrap_or(f64::NAN)),
                                fmt_sig(r.upper_bound.unwrap_or(f64::NAN)),
                                fmt_sig(r.quadrature_step.unwrap_or(f64::NAN)),
                            )?,
                            Some(e) => writeln!(out, "{:>14} error: {e}", fmt_sig(r.param))?,
                        }
                    }
                }
            }
        }
        Command::Tables => {
            let rows = table_records(&quad, &bis)?;
            match format {
                Format::Json => write_json(out, &rows)?,
                Format::Csv => write_csv(out, &rows)?,
                Format::Text => {
                    writeln!(
                        out,
                        "{:<24} {:>10} {:>12} {:>12}",
                        "table", "lambda", "value", "|value-1|"
                    )?;
                    for r in &rows {
                        writeln!(
                            out,
                            "{:<24} {:>10} {:>12} {:>12}",
                            r.table,
                            fmt_sig(r.lambda),
                            fmt_sig(r.value),
                            fmt_sig(r.abs_residual)
                        )?;
                    }
                    writeln!(out, "quadrature step    = {}", fmt_sig(rows[0].quadrature_step))?;
                }
            }
        }
        Command::OracleCheck(args) => {
            let checks = oracle_checks(args, &file, &quad, &bis)?;
            match format {
                Format::Json => write_json(out, &checks)?,
                Format::Csv => write_csv(out, &checks)?,
                Format::Text => {
                    for c in &checks {
                        writeln!(
                            out,
                            "{} {}: measured {} (threshold {})",
                            if c.passed { "PASS" } else { "FAIL" },
                            c.name,
                            fmt_sig(c.measured),
                            fmt_sig(c.threshold)
                        )?;
                    }
                }
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                return Err(CliError::OracleFailed { failed });
            }
        }
    }
    Ok(())
}
