//! Seeded randomized identity checks across all modules.
//!
//! Every check draws from its own ChaCha stream (`seed`, check index), so
//! the results do not depend on how many run in parallel.

use crate::error::Result;
use crate::hkalg::{
    check_moment_defining, check_permuting_with, check_rotating, check_swann_identities,
    moment_map, random_point, random_tangent, random_unit_quaternion, FlatHk,
};
use crate::kwsolver::{certify, solve, KwOptions, KwProblem};
use crate::monopole::{
    gauge_apply, holomorphy_identity_deviation, kw_problem, random_configuration, residuals,
    threshold, Configuration,
};
use crate::torusgeom::{degree, Connection, TorusGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::fmt::Write;

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Samples per hkalg check.
    pub samples: usize,
    /// Negative control: flips the sign of ω₁ in the permuting check.
    pub flip_omega1: bool,
    pub jobs: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            seed: 0,
            samples: 100,
            flip_omega1: false,
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub name: &'static str,
    pub worst: f64,
    pub tol: f64,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub seed: u64,
    pub rows: Vec<CheckRow>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("check,worst,tol,pass\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{:e},{:e},{}", r.name, r.worst, r.tol, r.passed);
        }
        s
    }

    pub fn to_table(&self) -> String {
        let mut s = format!("invariant suite, seed {}\n", self.seed);
        let _ = writeln!(s, "{:<34} {:>12} {:>10}  result", "check", "worst", "tol");
        for r in &self.rows {
            let verdict = if r.passed { "pass" } else { "FAIL" };
            let _ = writeln!(
                s,
                "{:<34} {:>12.3e} {:>10.1e}  {verdict}",
                r.name, r.worst, r.tol
            );
        }
        s
    }
}

/// Band-limited real periodic function with `amp`-sized coefficients.
pub fn random_periodic(grid: &TorusGrid, rng: &mut ChaCha8Rng, amp: f64) -> Vec<f64> {
    random_band_limited(grid, rng, amp, 3)
}

/// Random unitary gauge phase `θ`, drawn from modes `|k| ≤ 1` so that
/// `e^{iθ}` decays below rounding well inside the grid band and the discrete
/// action stays exact to rounding.
pub fn random_gauge_phase(grid: &TorusGrid, rng: &mut ChaCha8Rng) -> Vec<f64> {
    random_band_limited(grid, rng, 1.0, 1)
}

fn random_band_limited(grid: &TorusGrid, rng: &mut ChaCha8Rng, amp: f64, kmax: i64) -> Vec<f64> {
    let dim = grid.dim();
    let l = grid.lengths().to_vec();
    let terms: Vec<(Vec<f64>, f64, f64)> = (0..5)
        .map(|_| {
            let k = (0..dim)
                .map(|_| rng.gen_range(-kmax..=kmax) as f64)
                .collect();
            (k, rng.gen_range(-amp..amp), rng.gen_range(0.0..2.0 * PI))
        })
        .collect();
    grid.sample(|x| {
        terms
            .iter()
            .map(|(k, c, ph)| {
                let arg: f64 = (0..dim).map(|a| 2.0 * PI * k[a] * x[a] / l[a]).sum();
                c * (arg + ph).cos()
            })
            .sum()
    })
}

/// Kazdan–Warner data with `B > 0` and `∫w > 0`.
pub fn random_kw_problem(grid: &TorusGrid, rng: &mut ChaCha8Rng) -> Result<KwProblem> {
    let b = random_periodic(grid, rng, 0.3)
        .iter()
        .map(|x| x.exp())
        .collect();
    let mean = rng.gen_range(0.5..2.0);
    let w = random_periodic(grid, rng, 0.5)
        .iter()
        .map(|x| mean + x)
        .collect();
    KwProblem::new(grid, b, w)
}

type Check = fn(&SuiteOptions, &mut ChaCha8Rng) -> Result<f64>;

const CHECKS: &[(&str, f64, Check)] = &[
    ("hkalg.moment_defining", 1e-9, moment_defining),
    ("hkalg.permuting", 1e-10, permuting),
    ("hkalg.rotating", 1e-12, rotating),
    ("hkalg.potential_gradient", 1e-10, potential_gradient),
    ("hkalg.homogeneity", 0.0, homogeneity),
    ("torusgeom.degree_quantization", 1e-10, degree_quantization),
    ("torusgeom.unitary_invariance", 1e-11, unitary_invariance),
    ("kwsolver.constant_fixed_point", 1e-12, constant_fixed_point),
    ("kwsolver.uniqueness", 1e-8, uniqueness),
    ("kwsolver.threshold_gating", 0.0, threshold_gating),
    ("monopole.holomorphy_identity", 1e-10, holomorphy_identity),
    ("monopole.gauge_composition", 1e-12, gauge_composition),
];

pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.0).collect()
}

fn run_one(opts: &SuiteOptions, index: usize) -> CheckRow {
    let (name, tol, check) = CHECKS[index];
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(index as u64);
    // an error counts as an infinite deviation
    let worst = check(opts, &mut rng).unwrap_or(f64::INFINITY);
    CheckRow {
        name,
        worst,
        tol,
        passed: worst <= tol,
    }
}

pub fn run_suite(opts: &SuiteOptions) -> SuiteReport {
    let jobs = opts.jobs.clamp(1, CHECKS.len());
    let mut rows: Vec<Option<CheckRow>> = vec![None; CHECKS.len()];
    std::thread::scope(|s| {
        for (lane, chunk) in rows.chunks_mut(CHECKS.len().div_ceil(jobs)).enumerate() {
            let start = lane * CHECKS.len().div_ceil(jobs);
            s.spawn(move || {
                for (k, slot) in chunk.iter_mut().enumerate() {
                    *slot = Some(run_one(opts, start + k));
                }
            });
        }
    });
    SuiteReport {
        seed: opts.seed,
        rows: rows
            .into_iter()
            .map(|r| r.expect("every check ran"))
            .collect(),
    }
}

fn pair_samples(
    opts: &SuiteOptions,
    rng: &mut ChaCha8Rng,
) -> Vec<(Vec<crate::Quaternion>, Vec<crate::Quaternion>)> {
    (0..opts.samples)
        .map(|_| {
            let n = rng.gen_range(1..=3);
            (random_tangent(rng, n), random_tangent(rng, n))
        })
        .collect()
}

fn moment_defining(opts: &SuiteOptions, rng: &mut ChaCha8Rng) -> Result<f64> {
    let samples: Vec<_> = (0..opts.samples)
        .map(|_| {
            let n = rng.gen_range(1..=3);
            (random_point(rng, n), random_tangent(rng, n))
        })
        .collect();
    Ok(check_moment_defining(&samples, 1e-5))
}

fn permuting(opts: &SuiteOptions, rng: &mut ChaCha8Rng) -> Result<f64> {
    let hk = FlatHk {
        flip_omega1: opts.flip_omega1,
    };
    let mut worst: f64 = 0.0;
    for _ in 0..opts.samples {
        let q = random_unit_quaternion(rng);
        let n = rng.gen_range(1..=3);
        let pair = [(random_tangent(rng, n), random_tangent(rng, n))];
        worst = worst.max(check_permuting_with(hk, q, &pair)?);
    }
    Ok(worst)
}

fn rotating(opts: &SuiteOptions, rng: &mut ChaCha8Rng) -> Result<f64> {
    Ok(check_rotating(&pair_samples(opts, rng)).max())
}

fn potential_gradient(opts: &SuiteOptions, rng: &mut ChaCha8Rng) -> Result<f64> {
    let samples: Vec<_> = (0..opts.samples)
        .map(|_| {
            let n = rng.gen_range(1..=3);
            random_point(rng, n)
        })
        .collect();
    Ok(check_swann_identities(&samples)?.gradient_deviation)
}

fn homogeneity(opts: &SuiteOptions, rng: &mut ChaCha8Rng) -> Result<f64> {
    // dyadic scale factors keep μ(r·p) = r²μ(p) exact in floating point
    let mut worst: f64 = 0.0;
    for _ in 0..opts.samples {
        let n = rng.gen_range(1..=3);
        let p = random_point(rng, n);
        let r = [0.25, 0.5, 2.0, 4.0][rng.gen_range(0..4)];
        let a = moment_map(&p.scaled(r)).components();
        let b = moment_map(&p).components();
        for k in 0..3 {
            worst = worst.max((a[k] - r * r * b[k]).abs());
        }
    }
    Ok(worst)
}

fn degree_quantization(_: &SuiteOptions, rng: &mut ChaCha8Rng) -> Result<f64> {
    let grid = TorusGrid::new(&[32, 32], &[2.0 * PI, 3.0])?;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let d = rng.gen_range(-3..=3);
        let a = (0..2).map(|_| random_periodic(&grid, rng, 0.5)).collect();
        let conn = Connection::background(&grid, d)?.with_perturbation(&grid, a)?;
        worst = worst.max((degree(&grid, &conn) - d as f64).abs());
    }
    Ok(worst)
}

fn residual_shift(a: &Configuration, b: &Configuration) -> Result<f64> {
    let (ra, rb) = (residuals(a)?.norms(), residuals(b)?.norms());
    Ok(ra
        .iter()
        .zip(&rb)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

fn unitary_invariance(_: &SuiteOptions, rng: &mut ChaCha8Rng) -> Result<f64> {
    let grid = TorusGrid::uniform(2, 64, 2.0 * PI)?;
    let cfg = random_configuration(&grid, rng.gen_range(0..=2), 2, 1.5, rng)?;
    let zero = vec![0.0; grid.len()];
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let theta = random_gauge_phase(&grid, rng);
        worst = worst.max(residual_shift(&cfg, &gauge_apply(&cfg, &zero, &theta)?)?);
    }
    Ok(worst)
}

fn constant_fixed_point(_: &SuiteOptions, _: &mut ChaCha8Rng) -> Result<f64> {
    let grid = TorusGrid::uniform(2, 64, 2.0 * PI)?;
    let sol = solve(
        &KwProblem::constant(&grid, 1.0, 2.0),
        &KwOptions::with_tol(1e-12),
    )?;
    let exact = 0.5 * 2f64.ln();
    Ok(sol
        .f
        .iter()
        .map(|f| (f - exact).abs())
        .fold(sol.residual_norm, f64::max))
}

fn uniqueness(_: &SuiteOptions, rng: &mut ChaCha8Rng) -> Result<f64> {
    let grid = TorusGrid::uniform(2, 32, 2.0 * PI)?;
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let prob = random_kw_problem(&grid, rng)?;
        let a = solve(&prob, &KwOptions::with_tol(1e-11))?;
        let start = random_periodic(&grid, rng, 1.0);
        let b = solve(
            &prob,
            &KwOptions {
                initial: Some(start),
                ..KwOptions::with_tol(1e-11)
            },
        )?;
        worst = worst.max(
            a.f.iter()
                .zip(&b.f)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max),
        );
    }
    Ok(worst)
}

fn threshold_gating(_: &SuiteOptions, rng: &mut ChaCha8Rng) -> Result<f64> {
    // number of disagreements between certify and the threshold
    let grid = TorusGrid::uniform(2, 32, 2.0 * PI)?;
    let critical = 4.0 * PI / grid.volume();
    let mut mismatches = 0.0;
    for _ in 0..10 {
        let d = rng.gen_range(0..=3);
        let t = d as f64 * critical + rng.gen_range(-1.0..1.0);
        let cfg = random_configuration(&grid, d, 1, t, rng)?;
        if certify(&kw_problem(&cfg)?).is_solvable() != threshold(&cfg).is_above() {
            mismatches += 1.0;
        }
    }
    Ok(mismatches)
}

fn holomorphy_identity(_: &SuiteOptions, rng: &mut ChaCha8Rng) -> Result<f64> {
    let grid = TorusGrid::uniform(2, 64, 2.0 * PI)?;
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let cfg = random_configuration(&grid, rng.gen_range(-2..=2), 1, 1.0, rng)?;
        worst = worst.max(holomorphy_identity_deviation(&cfg));
    }
    Ok(worst)
}

fn gauge_composition(_: &SuiteOptions, rng: &mut ChaCha8Rng) -> Result<f64> {
    let grid = TorusGrid::uniform(2, 32, 2.0 * PI)?;
    let cfg = random_configuration(&grid, 1, 2, 1.0, rng)?;
    let fields: Vec<Vec<f64>> = (0..4).map(|_| random_periodic(&grid, rng, 0.3)).collect();
    let sum = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + y).collect() };
    let two = gauge_apply(
        &gauge_apply(&cfg, &fields[0], &fields[1])?,
        &fields[2],
        &fields[3],
    )?;
    let one = gauge_apply(
        &cfg,
        &sum(&fields[0], &fields[2]),
        &sum(&fields[1], &fields[3]),
    )?;
    let mut worst: f64 = 0.0;
    for (x, y) in two.f.iter().chain(&two.g).zip(one.f.iter().chain(&one.g)) {
        worst = x
            .iter()
            .zip(y)
            .map(|(a, b)| (a - b).norm())
            .fold(worst, f64::max);
    }
    for (x, y) in two.conn.perturbation().iter().zip(one.conn.perturbation()) {
        worst = x
            .iter()
            .zip(y)
            .map(|(a, b)| (a - b).abs())
            .fold(worst, f64::max);
    }
    Ok(worst)
}
