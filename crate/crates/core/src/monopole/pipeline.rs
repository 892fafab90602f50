use super::{gauge_apply, half, residuals, threshold, zero_section, Configuration, Threshold, I};
use crate::error::{Error, Result};
use crate::kwsolver::{self, certify, Certificate, KwOptions, KwProblem, KwSolution};
use crate::torusgeom::spectral::{fft_line, signed_mode, Direction};
use crate::torusgeom::{Connection, FieldGrid, TorusGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use std::f64::consts::PI;

/// Holomorphic section of `L_d` with all theta characteristics equal to 1,
/// normalised to `max |s| = 1`; its `d` zeros are simple and separated.
pub fn theta_section(grid: &TorusGrid, degree: i64) -> Result<FieldGrid> {
    let gammas = vec![Complex64::new(1.0, 0.0); degree.max(0) as usize];
    theta_section_with(grid, degree, &gammas)
}

/// `s = Σ_m γ_{m mod d} e^{2πi m x₂/L₂} exp(−(b/2)(x₁ − m L₁/d)²)` over the
/// `x₂`-modes the grid resolves. Constant in `x₃, x₄` on T⁴.
pub fn theta_section_with(
    grid: &TorusGrid,
    degree: i64,
    gammas: &[Complex64],
) -> Result<FieldGrid> {
    if degree < 0 {
        return Err(Error::InvalidInput(format!(
            "degree {degree} bundles have no holomorphic sections"
        )));
    }
    if degree == 0 {
        return Ok(FieldGrid::section(
            0,
            vec![Complex64::new(1.0, 0.0); grid.len()],
        ));
    }
    if gammas.len() != degree as usize {
        return Err(Error::InvalidInput(format!(
            "{} theta coefficients for degree {degree}",
            gammas.len()
        )));
    }
    let conn = Connection::background(grid, degree)?;
    let b = conn.field_strength();
    let (n1, n2) = (grid.sizes()[0], grid.sizes()[1]);
    let (l1, h1) = (grid.lengths()[0], grid.spacing(0));
    let d = degree as f64;
    let mut plane = vec![Complex64::new(0.0, 0.0); n1 * n2];
    for i1 in 0..n1 {
        let x1 = i1 as f64 * h1;
        let row = &mut plane[i1 * n2..(i1 + 1) * n2];
        for (j, z) in row.iter_mut().enumerate() {
            let m = signed_mode(j, n2);
            let c = x1 - m as f64 * l1 / d;
            *z = gammas[m.rem_euclid(degree) as usize] * (-0.5 * b * c * c).exp();
        }
        fft_line(row, Direction::Inverse);
    }
    let peak = plane.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if peak == 0.0 {
        return Err(Error::InvalidInput(
            "theta coefficients give the zero section".into(),
        ));
    }
    let rest = grid.len() / (n1 * n2);
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (p, z) in plane.iter().enumerate() {
        for r in 0..rest {
            values[p * rest + r] = z / peak;
        }
    }
    Ok(FieldGrid::section(degree, values))
}

/// Random band-limited periodic complex function.
fn random_modes(grid: &TorusGrid, rng: &mut ChaCha8Rng, amp: f64) -> Vec<Complex64> {
    let dim = grid.dim();
    let l = grid.lengths().to_vec();
    let terms: Vec<(Vec<f64>, Complex64)> = (0..3)
        .map(|_| {
            let k = (0..dim).map(|_| rng.gen_range(-2..=2) as f64).collect();
            let c = Complex64::new(rng.gen_range(-amp..amp), rng.gen_range(-amp..amp));
            (k, c)
        })
        .collect();
    let c0 = Complex64::new(rng.gen_range(0.5..1.5), rng.gen_range(-0.5..0.5));
    grid.sample_complex(|x| {
        terms.iter().fold(c0, |acc, (k, c)| {
            let arg: f64 = (0..dim).map(|a| 2.0 * PI * k[a] * x[a] / l[a]).sum();
            acc + c * (I * arg).exp()
        })
    })
}

fn random_real(grid: &TorusGrid, rng: &mut ChaCha8Rng, amp: f64) -> Vec<f64> {
    random_modes(grid, rng, amp).iter().map(|z| z.im).collect()
}

/// Smooth random configuration on `L_d` (theta section times random
/// band-limited factors, random periodic connection perturbation). It
/// solves nothing; it exercises residuals and identities.
pub fn random_configuration(
    grid: &TorusGrid,
    degree: i64,
    n: usize,
    t: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Configuration> {
    let base = theta_section(grid, degree.abs())?;
    // conj of a section of L_|d| is a section of L_−|d|
    let base: Vec<Complex64> = if degree < 0 {
        base.values().iter().map(|z| z.conj()).collect()
    } else {
        base.values().to_vec()
    };
    let mul = |p: Vec<Complex64>, s: f64| -> Vec<Complex64> {
        p.iter().zip(&base).map(|(a, b)| a * b * s).collect()
    };
    let f = (0..n)
        .map(|_| mul(random_modes(grid, rng, 0.3), 1.0))
        .collect();
    let g = (0..n)
        .map(|_| mul(random_modes(grid, rng, 0.3), 0.5))
        .collect();
    let a = (0..grid.dim())
        .map(|_| random_real(grid, rng, 0.3))
        .collect();
    let conn = Connection::background(grid, degree)?.with_perturbation(grid, a)?;
    Configuration::new(grid, conn, f, g, t)
}

/// Holomorphic input data `f_i = c_i·s`, `g = 0`, on the background
/// connection, with seeded coefficients `c_i` (`|c_i| ∈ [0.5, 1.5]`) and
/// `s` the theta section of [`theta_section`], or `s ≡ 1` when `constant`.
pub fn holomorphic_data(
    grid: &TorusGrid,
    degree: i64,
    n: usize,
    t: f64,
    constant: bool,
    seed: u64,
) -> Result<Configuration> {
    if constant && degree != 0 {
        return Err(Error::InvalidInput(format!(
            "a constant spinor is not a section of L_{degree}"
        )));
    }
    let s = theta_section(grid, degree)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = (0..n)
        .map(|_| {
            let c = Complex64::from_polar(rng.gen_range(0.5..1.5), rng.gen_range(0.0..2.0 * PI));
            s.values().iter().map(|z| c * z).collect()
        })
        .collect();
    let g = (0..n).map(|_| zero_section(grid)).collect();
    Configuration::new(grid, Connection::background(grid, degree)?, f, g, t)
}

/// Kazdan–Warner data produced by the gauge `e^f`: `Δf + B′e^{2f} = w′` with
/// `B′ = |μ₁∘u|` and `w′ = ½(t − 2iΛF_A)`, half of `𝔞(u)` and of
/// `t − 2iΛF_A`.
pub fn kw_problem(cfg: &Configuration) -> Result<KwProblem> {
    let b: Vec<f64> = cfg.a_density().iter().map(|x| 0.5 * x).collect();
    let w: Vec<f64> = cfg
        .lambda_f()
        .iter()
        .map(|l| 0.5 * (cfg.t - 2.0 * I * l).re)
        .collect();
    KwProblem::new(&cfg.grid, b, w)
}

#[derive(Debug, Clone)]
pub struct HkSolution {
    pub config: Configuration,
    pub kw: KwSolution,
    pub margin: f64,
}

pub fn solve_hk(holo: &Configuration, tol: f64) -> Result<HkSolution> {
    solve_hk_with(holo, &KwOptions::with_tol(tol))
}

/// Finds the real gauge `e^f` taking a holomorphic configuration to a
/// solution. The KW solve runs at half of `opts.tol`, since its residual is
/// exactly the moment residual of the gauged configuration.
pub fn solve_hk_with(holo: &Configuration, opts: &KwOptions) -> Result<HkSolution> {
    let tol = opts.tol;
    let margin = match threshold(holo) {
        Threshold::Above(m) => m,
        Threshold::Below(m) => return Err(Error::BelowThreshold { margin: m }),
    };
    if holo.g.iter().flatten().any(|z| z.norm_sqr() != 0.0) {
        return Err(Error::InvalidInput(
            "beta-type components must vanish above the threshold".into(),
        ));
    }
    let density = holo.a_density();
    if density.iter().all(|&x| x == 0.0) {
        return Err(Error::Unstable);
    }
    let r = residuals(holo)?;
    let pre = tol / 10.0;
    if r.r_dbar > pre || r.r_muc > pre || r.r_02 > pre {
        return Err(Error::InvalidInput(format!(
            "input is not holomorphic: dirac {:.3e}, mu_c {:.3e}, F02 {:.3e}",
            r.r_dbar, r.r_muc, r.r_02
        )));
    }
    let prob = kw_problem(holo)?;
    if let Certificate::NoSolution { failed, detail, .. } = certify(&prob) {
        return Err(Error::NotCertified(format!(
            "{failed:?} hypothesis fails: {detail}"
        )));
    }
    let kw_opts = KwOptions {
        tol: 0.5 * tol,
        ..opts.clone()
    };
    let kw = kwsolver::solve(&prob, &kw_opts)?;
    let config = gauge_apply(holo, &kw.f, &vec![0.0; holo.grid.len()])?;
    Ok(HkSolution { config, kw, margin })
}

/// The projection to a classical solution: `|α|² = 2|μ₁∘u|`, `β = 0`, with
/// the phase of `α` taken from `Σ conj(w_i) f_i` where `w` is the unit
/// spinor direction at the point of largest `|μ₁∘u|`.
pub fn project_pi(sol: &Configuration, tol: f64) -> Result<Configuration> {
    if let Threshold::Below(m) = threshold(sol) {
        return Err(Error::BelowThreshold { margin: m });
    }
    let grid = &sol.grid;
    let rho2 = sol.a_density();
    let anchor = rho2
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > rho2[best] { i } else { best });
    if rho2[anchor] == 0.0 {
        return Err(Error::Unstable);
    }
    let w: Vec<Complex64> = sol.f.iter().map(|f| f[anchor]).collect();
    let wn = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if wn == 0.0 {
        return Err(Error::Unstable);
    }
    let w: Vec<Complex64> = w.iter().map(|z| z / wn).collect();
    let lead = w.iter().enumerate().fold(
        0,
        |best, (i, z)| if z.norm() > w[best].norm() { i } else { best },
    );
    let phase = w[lead] / w[lead].norm();
    let alpha: Vec<Complex64> = (0..grid.len())
        .map(|x| {
            let u: Complex64 = w.iter().zip(&sol.f).map(|(wi, f)| wi.conj() * f[x]).sum();
            let un = u.norm();
            if un == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                rho2[x].sqrt() * (u / un) * phase
            }
        })
        .collect();
    let out = Configuration::classical(grid, sol.conn.clone(), alpha, zero_section(grid), sol.t)?;
    let r = residuals(&out)?;
    if r.r_dbar > tol {
        return Err(Error::HolomorphyFailure { residual: r.r_dbar });
    }
    if r.max_norm() > tol {
        return Err(Error::InvalidInput(format!(
            "input does not solve the equations: residuals {:?}",
            r.norms()
        )));
    }
    Ok(out)
}

/// Embeds a classical solution as `f = (α, 0, …, 0)`, `g = 0`.
pub fn lift_sw(sw: &Configuration, n: usize) -> Result<Configuration> {
    if sw.n() != 1 {
        return Err(Error::InvalidInput(format!(
            "expected a classical pair, got n = {}",
            sw.n()
        )));
    }
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    if let Threshold::Below(m) = threshold(sw) {
        return Err(Error::BelowThreshold { margin: m });
    }
    let grid = &sw.grid;
    let mut f = vec![sw.alpha().to_vec()];
    f.extend((1..n).map(|_| zero_section(grid)));
    let g = (0..n).map(|_| zero_section(grid)).collect();
    Configuration::new(grid, sw.conn.clone(), f, g, sw.t)
}

/// Max deviation of `∂̄(|α|²/2) = ½(ᾱ D̄α + α·conj(Dα))` for `α = f₁`.
pub fn holomorphy_identity_deviation(cfg: &Configuration) -> f64 {
    let grid = &cfg.grid;
    let alpha = cfg.alpha();
    let half_density: Vec<Complex64> = alpha
        .iter()
        .map(|a| Complex64::new(0.5 * a.norm_sqr(), 0.0))
        .collect();
    let flat = Connection::flat(grid);
    let mut worst: f64 = 0.0;
    for j in 0..grid.complex_dim() {
        let lhs = half(grid, &flat, &half_density, j, true);
        let db = half(grid, &cfg.conn, alpha, j, true);
        let dl = half(grid, &cfg.conn, alpha, j, false);
        for x in 0..grid.len() {
            let rhs = 0.5 * (alpha[x].conj() * db[x] + alpha[x] * dl[x].conj());
            worst = worst.max((lhs[x] - rhs).norm());
        }
    }
    worst
}
