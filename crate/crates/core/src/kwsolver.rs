//! Kazdan–Warner equation `Δf + B e^{2f} = w` on a flat torus.
//!
//! `Δ = d*d ≥ 0`. For `B ≥ 0` not a.e. zero and `∫w > 0` the equation is the
//! Euler–Lagrange equation of the strictly convex energy
//!
//! ```text
//! E(f) = ∫ ½|∇f|² + ½ B e^{2f} − w f
//! ```
//!
//! and is solved by damped Newton iteration on `E`. Each Newton system
//! `(Δ + 2Be^{2f}) δ = −r` is solved by conjugate gradients preconditioned
//! with the spectral inverse of `Δ + c`, `c` the mean of `2Be^{2f}`.

use crate::error::{Error, Result};
use crate::torusgeom::{FieldGrid, TorusGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::Write;

/// Samples with `B > EPS_B` count towards the positivity fraction.
pub const EPS_B: f64 = 1e-12;
pub const MIN_POSITIVE_FRACTION: f64 = 0.01;
/// Trial steps are shortened so that `max 2f` stays below this.
pub const MAX_EXPONENT: f64 = 300.0;

const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct KwProblem {
    grid: TorusGrid,
    b: Vec<f64>,
    w: Vec<f64>,
}

impl KwProblem {
    pub fn new(grid: &TorusGrid, b: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        grid.check_len(b.len())?;
        grid.check_len(w.len())?;
        if b.iter().chain(&w).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite Kazdan-Warner data".into()));
        }
        Ok(KwProblem {
            grid: grid.clone(),
            b,
            w,
        })
    }

    /// Builds the problem from real scalar fields.
    pub fn from_fields(grid: &TorusGrid, b: &FieldGrid, w: &FieldGrid) -> Result<Self> {
        for f in [b, w] {
            if f.max_imag() > 1e-14 {
                return Err(Error::InvalidInput(
                    "Kazdan-Warner data must be real".into(),
                ));
            }
        }
        KwProblem::new(grid, b.real_values(), w.real_values())
    }

    pub fn constant(grid: &TorusGrid, b: f64, w: f64) -> Self {
        KwProblem {
            grid: grid.clone(),
            b: vec![b; grid.len()],
            w: vec![w; grid.len()],
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn integral_w(&self) -> f64 {
        self.grid.integrate_real(&self.w)
    }

    pub fn positive_fraction(&self) -> f64 {
        self.b.iter().filter(|&&x| x > EPS_B).count() as f64 / self.b.len() as f64
    }
}

/// Which hypothesis of the existence theorem failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    /// `∫w > 0`
    Integral,
    /// `B ≥ 0` and positive off a negligible set.
    Positivity,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    Solvable,
    NoSolution {
        failed: Hypothesis,
        integral_w: f64,
        detail: String,
    },
}

impl Certificate {
    pub fn is_solvable(&self) -> bool {
        matches!(self, Certificate::Solvable)
    }
}

pub fn certify(prob: &KwProblem) -> Certificate {
    let integral_w = prob.integral_w();
    let min_b = prob.b.iter().cloned().fold(f64::INFINITY, f64::min);
    let frac = prob.positive_fraction();
    if min_b < 0.0 || frac < MIN_POSITIVE_FRACTION {
        return Certificate::NoSolution {
            failed: Hypothesis::Positivity,
            integral_w,
            detail: format!("min B = {min_b:.3e}, fraction with B > {EPS_B:e} is {frac:.4}"),
        };
    }
    if integral_w <= 0.0 {
        return Certificate::NoSolution {
            failed: Hypothesis::Integral,
            integral_w,
            detail: format!("integral of w = {integral_w:.6e} is not positive"),
        };
    }
    Certificate::Solvable
}

fn exp2f(f: &[f64]) -> Result<Vec<f64>> {
    let max_f = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if 2.0 * max_f > 700.0 || !max_f.is_finite() {
        return Err(Error::Overflow { max_f });
    }
    Ok(f.iter().map(|x| (2.0 * x).exp()).collect())
}

pub fn energy(prob: &KwProblem, f: &[f64]) -> Result<f64> {
    prob.grid.check_len(f.len())?;
    let e = exp2f(f)?;
    let lf = prob.grid.laplacian_real(f);
    let density: Vec<f64> = (0..f.len())
        .map(|i| 0.5 * f[i] * lf[i] + 0.5 * prob.b[i] * e[i] - prob.w[i] * f[i])
        .collect();
    Ok(prob.grid.integrate_real(&density))
}

/// `E(f + δ) − E(f)` without cancellation.
pub fn energy_change(prob: &KwProblem, f: &[f64], delta: &[f64]) -> Result<f64> {
    let e = exp2f(f)?;
    exp2f(&f.iter().zip(delta).map(|(a, b)| a + b).collect::<Vec<_>>())?;
    let lf = prob.grid.laplacian_real(f);
    let ld = prob.grid.laplacian_real(delta);
    let density: Vec<f64> = (0..f.len())
        .map(|i| {
            let d = delta[i];
            lf[i] * d + 0.5 * d * ld[i] + 0.5 * prob.b[i] * e[i] * (2.0 * d).exp_m1()
                - prob.w[i] * d
        })
        .collect();
    Ok(prob.grid.integrate_real(&density))
}

/// The residual `Δf + Be^{2f} − w`, which is also the L² gradient of E.
pub fn gradient(prob: &KwProblem, f: &[f64]) -> Result<Vec<f64>> {
    prob.grid.check_len(f.len())?;
    let e = exp2f(f)?;
    let lf = prob.grid.laplacian_real(f);
    Ok((0..f.len())
        .map(|i| lf[i] + prob.b[i] * e[i] - prob.w[i])
        .collect())
}

/// `v ↦ Δv + p v` with `p = 2Be^{2f}`.
fn apply_jacobian(grid: &TorusGrid, p: &[f64], v: &[f64]) -> Vec<f64> {
    let lv = grid.laplacian_real(v);
    lv.iter()
        .zip(p)
        .zip(v)
        .map(|((l, p), v)| l + p * v)
        .collect()
}

/// The linearisation `Δv + 2Be^{2f} v` at `f`.
pub fn jacobian_apply(prob: &KwProblem, f: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let p: Vec<f64> = exp2f(f)?
        .iter()
        .zip(&prob.b)
        .map(|(e, b)| 2.0 * b * e)
        .collect();
    Ok(apply_jacobian(&prob.grid, &p, v))
}

/// Preconditioned CG for `J x = rhs`, stopping at `‖r‖ ≤ rtol ‖rhs‖`.
fn pcg(grid: &TorusGrid, p: &[f64], rhs: &[f64], rtol: f64, max_iter: usize) -> (Vec<f64>, usize) {
    let shift = (p.iter().sum::<f64>() / p.len() as f64).max(1e-12);
    let precond = |r: &[f64]| grid.shifted_laplacian_inverse(shift, r);
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let target = rtol * dot(rhs, rhs).sqrt();
    let mut x = vec![0.0; rhs.len()];
    let mut r = rhs.to_vec();
    let mut z = precond(&r);
    let mut d = z.clone();
    let mut rz = dot(&r, &z);
    for it in 0..max_iter {
        if dot(&r, &r).sqrt() <= target {
            return (x, it);
        }
        let jd = apply_jacobian(grid, p, &d);
        let alpha = rz / dot(&d, &jd);
        x.iter_mut().zip(&d).for_each(|(x, d)| *x += alpha * d);
        r.iter_mut().zip(&jd).for_each(|(r, j)| *r -= alpha * j);
        z = precond(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        d.iter_mut().zip(&z).for_each(|(d, z)| *d = z + beta * *d);
    }
    (x, max_iter)
}

#[derive(Debug, Clone)]
pub struct KwOptions {
    /// Target for the residual norm `‖Δf + Be^{2f} − w‖₂`.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative tolerance of the inner CG solves.
    pub forcing: f64,
    pub max_cg_iter: usize,
    /// Starting point; defaults to the constant `½ ln(∫w / ∫B)`.
    pub initial: Option<Vec<f64>>,
    /// Lanczos steps used for the smallest Ritz value at the solution.
    pub ritz_steps: usize,
}

impl Default for KwOptions {
    fn default() -> Self {
        KwOptions {
            tol: 1e-8,
            max_iter: 100,
            forcing: 1e-3,
            max_cg_iter: 500,
            initial: None,
            ritz_steps: 30,
        }
    }
}

impl KwOptions {
    pub fn with_tol(tol: f64) -> Self {
        KwOptions {
            tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct KwSolution {
    pub f: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    /// `E(f_k)` for every iterate, starting with the initial guess. Later
    /// entries are `E(f_0)` plus the accumulated decrements; direct
    /// evaluation loses the last steps to cancellation.
    pub energy_trace: Vec<f64>,
    /// Accurately evaluated `E(f_{k+1}) − E(f_k)` for every accepted step.
    pub energy_steps: Vec<f64>,
    pub residual_trace: Vec<f64>,
    /// Accepted damping factor per step.
    pub step_lengths: Vec<f64>,
    /// Smallest Ritz value of `Δ + 2Be^{2f}` at the solution.
    pub min_ritz: f64,
}

impl KwSolution {
    pub fn field(&self) -> FieldGrid {
        FieldGrid::real(&self.f)
    }

    /// Convergence trace as CSV: `iteration,residual,energy,step`.
    pub fn write_trace<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "iteration,residual,energy,step")?;
        for (k, (r, e)) in self
            .residual_trace
            .iter()
            .zip(&self.energy_trace)
            .enumerate()
        {
            let step = if k == 0 {
                0.0
            } else {
                self.step_lengths[k - 1]
            };
            writeln!(out, "{k},{r:.17e},{e:.17e},{step:.17e}")?;
        }
        Ok(())
    }
}

pub fn initial_guess(prob: &KwProblem) -> f64 {
    let iw = prob.integral_w().max(f64::MIN_POSITIVE);
    let ib = prob.grid.integrate_real(&prob.b);
    0.5 * (iw / ib).ln()
}

pub fn solve(prob: &KwProblem, opts: &KwOptions) -> Result<KwSolution> {
    if let Certificate::NoSolution { failed, detail, .. } = certify(prob) {
        return Err(Error::NotCertified(format!(
            "{failed:?} hypothesis fails: {detail}"
        )));
    }
    let grid = &prob.grid;
    let mut f = match &opts.initial {
        Some(f0) => {
            grid.check_len(f0.len())?;
            f0.clone()
        }
        None => vec![initial_guess(prob); grid.len()],
    };
    let mut g = gradient(prob, &f)?;
    let mut res = grid.norm_real(&g);
    let mut sol = KwSolution {
        f: Vec::new(),
        residual_norm: res,
        iterations: 0,
        energy_trace: vec![energy(prob, &f)?],
        energy_steps: Vec::new(),
        residual_trace: vec![res],
        step_lengths: Vec::new(),
        min_ritz: f64::NAN,
    };
    while res > opts.tol {
        if sol.iterations >= opts.max_iter {
            return Err(Error::NonConvergence {
                iterations: sol.iterations,
                residual: res,
                residual_trace: sol.residual_trace,
            });
        }
        let p: Vec<f64> = exp2f(&f)?
            .iter()
            .zip(&prob.b)
            .map(|(e, b)| 2.0 * b * e)
            .collect();
        let rhs: Vec<f64> = g.iter().map(|x| -x).collect();
        let (delta, _) = pcg(grid, &p, &rhs, opts.forcing, opts.max_cg_iter);
        let slope = grid.dot_real(&g, &delta);
        if slope >= 0.0 {
            return Err(Error::NonConvergence {
                iterations: sol.iterations,
                residual: res,
                residual_trace: sol.residual_trace,
            });
        }
        let max_f = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut s: f64 = 1.0;
        let accepted = loop {
            let trial: Vec<f64> = delta.iter().map(|d| s * d).collect();
            let peak = f
                .iter()
                .zip(&trial)
                .map(|(a, b)| a + b)
                .fold(f64::NEG_INFINITY, f64::max);
            if 2.0 * peak <= MAX_EXPONENT.max(2.0 * max_f) {
                let change = energy_change(prob, &f, &trial)?;
                if change <= ARMIJO * s * slope && change < 0.0 {
                    break Some((trial, change));
                }
            }
            s *= 0.5;
            if s < MIN_STEP {
                break None;
            }
        };
        let Some((step, change)) = accepted else {
            return Err(Error::NonConvergence {
                iterations: sol.iterations,
                residual: res,
                residual_trace: sol.residual_trace,
            });
        };
        f.iter_mut().zip(&step).for_each(|(a, b)| *a += b);
        g = gradient(prob, &f)?;
        res = grid.norm_real(&g);
        sol.iterations += 1;
        let last = sol.energy_trace[sol.energy_trace.len() - 1];
        sol.energy_trace.push(last + change);
        sol.energy_steps.push(change);
        sol.residual_trace.push(res);
        sol.step_lengths.push(s);
    }
    let p: Vec<f64> = exp2f(&f)?
        .iter()
        .zip(&prob.b)
        .map(|(e, b)| 2.0 * b * e)
        .collect();
    sol.min_ritz = smallest_ritz(grid, &p, opts.ritz_steps);
    sol.residual_norm = res;
    sol.f = f;
    Ok(sol)
}

/// Smallest Ritz value of `Δ + p` from a Lanczos run with full
/// reorthogonalisation and a fixed start vector.
fn smallest_ritz(grid: &TorusGrid, p: &[f64], steps: usize) -> f64 {
    let n = p.len();
    let m = steps.min(n).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let nv = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= nv);
    let mut basis: Vec<Vec<f64>> = vec![v];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    for j in 0..m {
        let mut w = apply_jacobian(grid, p, &basis[j]);
        let a = dot(&w, &basis[j]);
        alpha.push(a);
        for q in &basis {
            let c = dot(&w, q);
            w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
        }
        let b = dot(&w, &w).sqrt();
        if j + 1 == m || b < 1e-12 * a.abs().max(1.0) {
            break;
        }
        beta.push(b);
        w.iter_mut().for_each(|x| *x /= b);
        basis.push(w);
    }
    tridiagonal_min_eigenvalue(&alpha, &beta)
}

/// Smallest eigenvalue of the symmetric tridiagonal matrix by Sturm bisection.
fn tridiagonal_min_eigenvalue(alpha: &[f64], beta: &[f64]) -> f64 {
    let n = alpha.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { beta[i - 1].abs() } else { 0.0 }
            + if i < beta.len() { beta[i].abs() } else { 0.0 };
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    // Number of eigenvalues below x.
    let count = |x: f64| {
        let mut c = 0;
        let mut q = 1.0;
        for i in 0..n {
            let b2 = if i > 0 {
                beta[i - 1] * beta[i - 1]
            } else {
                0.0
            };
            q = alpha[i] - x - if i > 0 { b2 / q } else { 0.0 };
            if q == 0.0 {
                q = f64::EPSILON * (x.abs() + 1.0);
            }
            if q < 0.0 {
                c += 1;
            }
        }
        c
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count(mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * (lo.abs() + hi.abs()).max(1e-300) {
            break;
        }
    }
    0.5 * (lo + hi)
}
