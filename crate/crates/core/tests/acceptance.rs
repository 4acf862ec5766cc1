//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::f64::consts::E;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use varmod::annulus::{self, AnnulusProblem};
use varmod::cylinder::{self, CylinderProblem};
use varmod::exponent::parse_exponent;
use varmod::oracle::{self, Grid2D, GridProblem};
use varmod::quadrature::QuadratureConfig;
use varmod::rootfind::BisectionConfig;

const TABLE_TOL: f64 = 2e-3;
const ANNULUS_G: [(f64, f64); 5] = [
    (1.0, 0.6401),
    (2.0, 0.8183),
    (3.0, 0.9612),
    (3.5, 1.0241),
    (3.35, 0.9997),
];
const CYLINDER_H: [(f64, f64); 4] = [(1.0, 0.8431), (1.3, 0.9517), (1.5, 0.9981), (1.532, 0.9998)];
const ANNULUS_LAMBDA: (f64, f64) = (3.33, 3.37);
const ANNULUS_MODULUS: (f64, f64) = (3.71, 0.02);
const ANNULUS_BOUND: (f64, f64) = (4.12, 0.02);
const ANNULUS_RATIO: (f64, f64) = (1.11, 0.02);
const CYLINDER_LAMBDA: (f64, f64) = (1.52, 1.545);
const CYLINDER_MODULUS: (f64, f64) = (0.917, 0.005);
const CYLINDER_GAP: (f64, f64) = (0.083, 0.005);
const CLOSED_FORM_TOL: f64 = 1e-5;
const SHARP_BOUND_TOL: f64 = 1e-5;
const SHARP_DENSITY_TOL: f64 = 1e-8;
const BOUND_EXCESS: f64 = 0.05;
const EL_TOL: f64 = 1e-8;
const ORACLE_TOL: f64 = 1e-2;
const ORACLE_RATIO: f64 = 1.8;
const AVERAGING_DRAWS: usize = 100;
const CAPACITY_TOL: f64 = 1e-8;
const POTENTIAL_TOL: f64 = 1e-6;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn within(x: f64, (target, tol): (f64, f64)) -> bool {
    (x - target).abs() <= tol
}

fn inside(x: f64, (lo, hi): (f64, f64)) -> bool {
    (lo..=hi).contains(&x)
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn defaults() -> (QuadratureConfig, BisectionConfig) {
    (QuadratureConfig::default(), BisectionConfig::default())
}

fn ann(n: u32, r1: f64, r2: f64, p: &str) -> AnnulusProblem {
    AnnulusProblem::new(n, r1, r2, parse_exponent(p, "r", r1, r2).unwrap()).unwrap()
}

fn cyl(area: f64, length: f64, p: &str) -> CylinderProblem {
    CylinderProblem::new(area, length, parse_exponent(p, "t", 0.0, length).unwrap()).unwrap()
}

fn annulus_table() -> Outcome {
    let (quad, _) = defaults();
    let prob = ann(2, 1.0, 2.0, "1+r");
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut got = Vec::new();
    for (l, expected) in ANNULUS_G {
        let g = annulus::normalization_value(&prob, l, &quad).unwrap();
        worst = worst.max((g - expected).abs());
        got.push(format!("g({l})={g:.4}"));
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= TABLE_TOL && elapsed < Duration::from_secs(1),
        format!("{} max dev {worst:.4} in {elapsed:?}", got.join(" ")),
    )
}

fn annulus_headline() -> Outcome {
    let (quad, bis) = defaults();
    let prob = ann(2, 1.0, 2.0, "1+r");
    let start = Instant::now();
    let sol = annulus::solve_annulus(&prob, &quad, &bis).unwrap();
    let g = annulus::normalization_value(&prob, sol.lambda, &quad).unwrap();
    let bound = annulus::log_density_upper_bound(&prob, &quad).unwrap();
    let ratio = bound / sol.modulus;
    let elapsed = start.elapsed();
    outcome(
        inside(sol.lambda, ANNULUS_LAMBDA)
            && (g - 1.0).abs() < 1e-3
            && within(sol.modulus, ANNULUS_MODULUS)
            && within(bound, ANNULUS_BOUND)
            && within(ratio, ANNULUS_RATIO)
            && elapsed < Duration::from_secs(1),
        format!(
            "lambda={:.6} |g-1|={:.1e} modulus={:.6} bound={:.6} ratio={:.5} in {elapsed:?}",
            sol.lambda,
            (g - 1.0).abs(),
            sol.modulus,
            bound,
            ratio
        ),
    )
}

fn cylinder_table() -> Outcome {
    let (quad, _) = defaults();
    let prob = cyl(1.0, 1.0, "2+t");
    let mut worst: f64 = 0.0;
    let mut got = Vec::new();
    for (l, expected) in CYLINDER_H {
        let h = cylinder::cylinder_normalization_value(&prob, l, &quad).unwrap();
        worst = worst.max((h - expected).abs());
        got.push(format!("h({l})={h:.4}"));
    }
    outcome(worst <= TABLE_TOL, format!("{} max dev {worst:.4}", got.join(" ")))
}

fn cylinder_headline() -> Outcome {
    let (quad, bis) = defaults();
    let prob = cyl(1.0, 1.0, "2+t");
    let sol = cylinder::solve_cylinder(&prob, &quad, &bis).unwrap();
    let bound = cylinder::constant_density_upper_bound(&prob, &quad).unwrap();
    let gap = bound - sol.modulus;
    outcome(
        inside(sol.lambda, CYLINDER_LAMBDA)
            && within(sol.modulus, CYLINDER_MODULUS)
            && bound == 1.0
            && within(gap, CYLINDER_GAP),
        format!(
            "lambda={:.6} modulus={:.6} bound={bound} gap={gap:.6}",
            sol.lambda, sol.modulus
        ),
    )
}

fn closed_forms() -> Outcome {
    let (quad, bis) = defaults();
    let mut worst: f64 = 0.0;
    for (n, p) in [(2, 2.0), (2, 3.0), (3, 2.0), (3, 3.0)] {
        for (r1, r2) in [(1.0, 2.0), (1.0, E)] {
            let prob = ann(n, r1, r2, &p.to_string());
            let m = annulus::solve_annulus(&prob, &quad, &bis).unwrap().modulus;
            let exact = annulus::constant_exponent_modulus(n, p, r1, r2).unwrap();
            worst = worst.max(rel(m, exact));
        }
    }
    outcome(worst <= CLOSED_FORM_TOL, format!("max relative error {worst:.2e}"))
}

fn sharpness() -> Outcome {
    let (quad, bis) = defaults();
    let mut bound_err: f64 = 0.0;
    let mut density_err: f64 = 0.0;
    for (n, p) in [(2, "2"), (3, "3")] {
        for (r1, r2) in [(1.0, 2.0), (0.5, 3.0)] {
            let prob = ann(n, r1, r2, p);
            let sol = annulus::solve_annulus(&prob, &quad, &bis).unwrap();
            let bound = annulus::log_density_upper_bound(&prob, &quad).unwrap();
            bound_err = bound_err.max(rel(bound, sol.modulus));
            for k in 0..100 {
                let r = r1 + (r2 - r1) * k as f64 / 99.0;
                density_err = density_err.max(rel(sol.density(r), prob.log_density(r)));
            }
        }
    }
    let prob = ann(2, 1.0, 2.0, "1+r");
    let m = annulus::solve_annulus(&prob, &quad, &bis).unwrap().modulus;
    let excess = annulus::log_density_upper_bound(&prob, &quad).unwrap() / m - 1.0;
    outcome(
        bound_err <= SHARP_BOUND_TOL && density_err < SHARP_DENSITY_TOL && excess > BOUND_EXCESS,
        format!(
            "p=n: bound err {bound_err:.2e}, density err {density_err:.2e}; p=1+r: excess {:.3}%",
            100.0 * excess
        ),
    )
}

fn euler_lagrange_suite() -> Outcome {
    let (quad, bis) = defaults();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let pa = 1.2 + 3.0 * rng.random::<f64>();
        let pb = 1.2 + 3.0 * rng.random::<f64>();
        let residual = if k % 2 == 0 {
            let n = 2 + (k / 2 % 3) as u32;
            let r1 = 0.5 + 1.5 * rng.random::<f64>();
            let r2 = r1 * (1.1 + 3.0 * rng.random::<f64>());
            let p = format!("{pa} + ({})*(r - {r1})", (pb - pa) / (r2 - r1));
            let prob = ann(n, r1, r2, &p);
            let sol = annulus::solve_annulus(&prob, &quad, &bis).unwrap();
            annulus::euler_lagrange_residual(&sol, &prob, 1000)
        } else {
            let area = 0.5 + 2.5 * rng.random::<f64>();
            let length = 0.2 + 2.8 * rng.random::<f64>();
            let p = format!("{pa} + ({})*(t/{length})^2", pb - pa);
            let prob = cyl(area, length, &p);
            let sol = cylinder::solve_cylinder(&prob, &quad, &bis).unwrap();
            cylinder::euler_lagrange_residual(&sol, &prob, 1000)
        };
        worst = worst.max(residual);
    }
    outcome(
        worst < EL_TOL,
        format!("worst relative residual over 20 problems {worst:.2e}"),
    )
}

fn oracle_equivalence() -> Outcome {
    let (quad, bis) = defaults();
    let a = ann(2, 1.0, 2.0, "1+r");
    let c = cyl(1.0, 1.0, "2+t");
    let ma = annulus::solve_annulus(&a, &quad, &bis).unwrap().modulus;
    let mc = cylinder::solve_cylinder(&c, &quad, &bis).unwrap().modulus;
    let err = |g: GridProblem, exact: f64| {
        let d = g.minimize().unwrap();
        (g.energy(&d) - exact).abs()
    };
    let (a100, a200) = (
        err(GridProblem::annulus(&a, 100), ma),
        err(GridProblem::annulus(&a, 200), ma),
    );
    let (c100, c200) = (
        err(GridProblem::cylinder(&c, 100), mc),
        err(GridProblem::cylinder(&c, 200), mc),
    );
    let (ra, rc) = (a100 / a200, c100 / c200);
    outcome(
        a200 / ma <= ORACLE_TOL && c200 / mc <= ORACLE_TOL && ra >= ORACLE_RATIO && rc >= ORACLE_RATIO,
        format!(
            "N=200 rel err annulus {:.2e} cylinder {:.2e}; ratios {ra:.3} {rc:.3}",
            a200 / ma,
            c200 / mc
        ),
    )
}

fn averaging() -> Outcome {
    let a = ann(2, 1.0, 2.0, "1+r");
    let c = cyl(1.0, 1.0, "2+t");
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let start = Instant::now();
    let mut failures = 0;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..AVERAGING_DRAWS {
        let rho = oracle::random_admissible_density(40, 16, Grid2D::Polar { r1: 1.0, r2: 2.0 }, &mut rng);
        let rep = oracle::spherical_average_check(&rho, &a).unwrap();
        failures += usize::from(!(rep.energy_after <= rep.energy_before && rep.admissible_after));
        worst = worst.max(rep.energy_after / rep.energy_before);
        let rho = oracle::random_admissible_density(40, 16, Grid2D::Rect { area: 1.0, length: 1.0 }, &mut rng);
        let rep = oracle::fibre_average_check(&rho, &c).unwrap();
        failures += usize::from(!(rep.energy_after <= rep.energy_before && rep.admissible_after));
        worst = worst.max(rep.energy_after / rep.energy_before);
    }
    let elapsed = start.elapsed();
    outcome(
        failures == 0 && elapsed < Duration::from_secs(30),
        format!("{failures} failures in 2x{AVERAGING_DRAWS} draws, worst energy ratio {worst:.4}, {elapsed:?}"),
    )
}

fn monotone_sweep() -> Outcome {
    let (quad, bis) = defaults();
    let radii = [1.001, 1.01, 1.1, 2.0, 10.0, 100.0];
    let template = ann(2, 1.0, 100.0, "2");
    let m: Vec<f64> = annulus::modulus_sweep(&template, &radii, &quad, &bis)
        .into_iter()
        .map(|row| row.outcome.map(|pt| pt.modulus).unwrap_or(f64::NAN))
        .collect();
    let decreasing = m.windows(2).all(|w| w[1] < w[0]);
    let (first, last) = (m[0], m[m.len() - 1]);
    outcome(
        decreasing && first > 1e3 * last,
        format!("moduli {m:.4?}, first/last {:.1}", first / last),
    )
}

fn capacity() -> Outcome {
    let (quad, bis) = defaults();
    let mut detail = Vec::new();
    let mut ok = true;
    for (label, prob) in [
        ("p=1+r", ann(2, 1.0, 2.0, "1+r")),
        ("p=2+r/2, n=3", ann(3, 1.0, 3.0, "2+r/2")),
    ] {
        let sol = annulus::solve_annulus(&prob, &quad, &bis).unwrap();
        let cert = annulus::capacity_upper_via_potential(&sol, &prob, &quad).unwrap();
        let e = rel(cert.energy, sol.modulus);
        ok &= e <= CAPACITY_TOL && (cert.u_inner - 1.0).abs() <= POTENTIAL_TOL && cert.u_outer == 0.0;
        detail.push(format!(
            "{label}: rel {e:.1e} u(r1)={:.9} u(r2)={}",
            cert.u_inner, cert.u_outer
        ));
    }
    outcome(ok, detail.join("; "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("annulus normalization table, p = 1 + r", annulus_table),
        ("annulus headline values, p = 1 + r", annulus_headline),
        ("cylinder normalization table, p = 2 + t", cylinder_table),
        ("cylinder headline values, p = 2 + t", cylinder_headline),
        ("constant-exponent closed form", closed_forms),
        ("log-density bound sharp iff p = n", sharpness),
        ("Euler-Lagrange residual on random problems", euler_lagrange_suite),
        ("discrete oracle agreement and convergence", oracle_equivalence),
        ("averaging never increases energy", averaging),
        ("modulus decreasing in outer radius", monotone_sweep),
        ("potential energy reproduces modulus", capacity),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += usize::from(!o.passed);
        println!(
            "{} {:>2} {name}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
