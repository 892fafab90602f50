//! Configurations of the generalised Seiberg–Witten / vortex equations on a
//! flat torus, their residuals, and the complexified gauge action.
//!
//! A configuration carries `n` pairs of sections `(f_i, g_i)` of the line
//! bundle `L_d` (`n = 1` is the classical pair `(α, β)`), a [`Connection`]
//! and the perturbation parameter `t`. The target is ℍⁿ with the U(1)₀
//! moment map
//!
//! ```text
//! μ₁∘u = −½ Σ (|f_i|² − |g_i|²),   μ_c∘u = −Σ conj(f_i) g_i,
//! ```
//!
//! and the equations solved are
//!
//! ```text
//! Dirac:   (D̄₁f_i − D̄₂†g_i, D̄₂f_i + D̄₁†g_i) = 0   (T²: (D̄₁f_i, D̄₁†g_i) = 0)
//! moment:  ΛF_A + iμ₁∘u + i t/2 = 0
//! complex: μ_c∘u = 0
//! type:    F_A^{0,2} = 0
//! ```
//!
//! `t/2` puts the stability threshold at the strict inequality
//! `t > 4π deg/V`.

mod bundle;
mod divisor;
mod pipeline;

pub use bundle::{read_bundle, write_bundle, BundleMeta};
pub use divisor::{extract_divisor, extract_divisor_with, Divisor};
pub use pipeline::{
    holomorphic_data, holomorphy_identity_deviation, kw_problem, lift_sw, project_pi,
    random_configuration, solve_hk, solve_hk_with, theta_section, theta_section_with, HkSolution,
};

use crate::error::{Error, Result};
use crate::torusgeom::{
    covariant_derivative, curvature, f02, lambda_contract, Bundle, Connection, FieldGrid, TorusGrid,
};
use rustfft::num_complex::Complex64;
use std::f64::consts::PI;

const I: Complex64 = Complex64::new(0.0, 1.0);

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_EPS_Z: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub grid: TorusGrid,
    pub conn: Connection,
    /// α-type components `f_i`, weight +1 under U(1)₀.
    pub f: Vec<Vec<Complex64>>,
    /// β-type components `g_i`, weight −1 under U(1)₀.
    pub g: Vec<Vec<Complex64>>,
    pub t: f64,
}

impl Configuration {
    pub fn new(
        grid: &TorusGrid,
        conn: Connection,
        f: Vec<Vec<Complex64>>,
        g: Vec<Vec<Complex64>>,
        t: f64,
    ) -> Result<Self> {
        if f.is_empty() || f.len() != g.len() {
            return Err(Error::InvalidInput(format!(
                "need n >= 1 pairs of spinor components, got {} and {}",
                f.len(),
                g.len()
            )));
        }
        for c in f.iter().chain(&g) {
            grid.check_len(c.len())?;
        }
        if conn.perturbation().len() != grid.dim()
            || conn.perturbation().iter().any(|c| c.len() != grid.len())
        {
            return Err(Error::InvalidInput(
                "connection built for another grid".into(),
            ));
        }
        if !t.is_finite() {
            return Err(Error::InvalidInput(format!("t = {t} is not finite")));
        }
        Ok(Configuration {
            grid: grid.clone(),
            conn,
            f,
            g,
            t,
        })
    }

    /// Classical pair `(α, β)`.
    pub fn classical(
        grid: &TorusGrid,
        conn: Connection,
        alpha: Vec<Complex64>,
        beta: Vec<Complex64>,
        t: f64,
    ) -> Result<Self> {
        Configuration::new(grid, conn, vec![alpha], vec![beta], t)
    }

    pub fn n(&self) -> usize {
        self.f.len()
    }

    pub fn degree(&self) -> i64 {
        self.conn.degree()
    }

    pub fn alpha(&self) -> &[Complex64] {
        &self.f[0]
    }

    pub fn beta(&self) -> &[Complex64] {
        &self.g[0]
    }

    pub fn section(&self, values: &[Complex64]) -> FieldGrid {
        FieldGrid::section(self.degree(), values.to_vec())
    }

    /// `μ₁∘u` pointwise.
    pub fn mu1(&self) -> Vec<f64> {
        (0..self.grid.len())
            .map(|x| {
                -0.5 * self
                    .f
                    .iter()
                    .zip(&self.g)
                    .map(|(f, g)| f[x].norm_sqr() - g[x].norm_sqr())
                    .sum::<f64>()
            })
            .collect()
    }

    /// `μ_c∘u` pointwise.
    pub fn muc(&self) -> Vec<Complex64> {
        (0..self.grid.len())
            .map(|x| {
                -self
                    .f
                    .iter()
                    .zip(&self.g)
                    .map(|(f, g)| f[x].conj() * g[x])
                    .sum::<Complex64>()
            })
            .collect()
    }

    /// `𝔞(u) = 2|μ₁∘u|`.
    pub fn a_density(&self) -> Vec<f64> {
        self.mu1().iter().map(|m| 2.0 * m.abs()).collect()
    }

    /// `ΛF_A` pointwise.
    pub fn lambda_f(&self) -> Vec<Complex64> {
        lambda_contract(&self.grid, &curvature(&self.grid, &self.conn))
            .expect("curvature is a 2-form")
            .components
            .remove(0)
    }
}

fn half(
    grid: &TorusGrid,
    conn: &Connection,
    s: &[Complex64],
    j: usize,
    anti: bool,
) -> Vec<Complex64> {
    let sign = if anti { 1.0 } else { -1.0 };
    let dx = covariant_derivative(grid, conn, s, 2 * j);
    let dy = covariant_derivative(grid, conn, s, 2 * j + 1);
    dx.iter()
        .zip(&dy)
        .map(|(a, b)| 0.5 * (a + sign * I * b))
        .collect()
}

/// Dirac residual components of one pair `(f, g)`.
pub fn dirac_components(cfg: &Configuration, i: usize) -> Vec<Vec<Complex64>> {
    let (grid, conn) = (&cfg.grid, &cfg.conn);
    let (f, g) = (&cfg.f[i], &cfg.g[i]);
    let d1f = half(grid, conn, f, 0, true);
    let d1g = half(grid, conn, g, 0, false);
    if grid.dim() == 2 {
        // D̄₁† = −D₁
        return vec![d1f, d1g.iter().map(|z| -z).collect()];
    }
    let d2f = half(grid, conn, f, 1, true);
    let d2g = half(grid, conn, g, 1, false);
    vec![
        d1f.iter().zip(&d2g).map(|(a, b)| a + b).collect(),
        d2f.iter().zip(&d1g).map(|(a, b)| a - b).collect(),
    ]
}

/// Norms and pointwise maxima of the four residuals.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ResidualReport {
    pub r_dbar: f64,
    pub r_moment: f64,
    pub r_muc: f64,
    pub r_02: f64,
    pub max_dbar: f64,
    pub max_moment: f64,
    pub max_muc: f64,
    pub max_02: f64,
}

impl ResidualReport {
    pub fn norms(&self) -> [f64; 4] {
        [self.r_dbar, self.r_moment, self.r_muc, self.r_02]
    }

    pub fn max_norm(&self) -> f64 {
        self.norms().iter().cloned().fold(0.0, f64::max)
    }

    pub fn within(&self, tol: f64) -> bool {
        self.max_norm() <= tol
    }

    pub fn to_csv(&self) -> String {
        format!(
            "residual,norm,pointwise_max\n\
             dirac,{:.17e},{:.17e}\n\
             moment,{:.17e},{:.17e}\n\
             complex_moment,{:.17e},{:.17e}\n\
             curvature_02,{:.17e},{:.17e}\n",
            self.r_dbar,
            self.max_dbar,
            self.r_moment,
            self.max_moment,
            self.r_muc,
            self.max_muc,
            self.r_02,
            self.max_02
        )
    }
}

/// L² norm and pointwise max of a vector-valued density given by components.
fn norm_and_max(grid: &TorusGrid, comps: &[Vec<Complex64>]) -> (f64, f64) {
    let mut total = 0.0;
    let mut peak: f64 = 0.0;
    for x in 0..grid.len() {
        let s: f64 = comps.iter().map(|c| c[x].norm_sqr()).sum();
        total += s;
        peak = peak.max(s);
    }
    ((total * grid.weight()).sqrt(), peak.sqrt())
}

pub fn residuals(cfg: &Configuration) -> Result<ResidualReport> {
    let grid = &cfg.grid;
    for c in cfg.f.iter().chain(&cfg.g) {
        grid.check_len(c.len())?;
    }
    let dirac: Vec<Vec<Complex64>> = (0..cfg.n())
        .flat_map(|i| dirac_components(cfg, i))
        .collect();
    let (r_dbar, max_dbar) = norm_and_max(grid, &dirac);

    let lf = cfg.lambda_f();
    let mu1 = cfg.mu1();
    let moment: Vec<Complex64> = (0..grid.len())
        .map(|x| lf[x] + I * mu1[x] + I * (0.5 * cfg.t))
        .collect();
    let (r_moment, max_moment) = norm_and_max(grid, &[moment]);
    let (r_muc, max_muc) = norm_and_max(grid, &[cfg.muc()]);
    let f02v = f02(grid, &curvature(grid, &cfg.conn))?;
    let (r_02, max_02) = norm_and_max(grid, &f02v.components);
    Ok(ResidualReport {
        r_dbar,
        r_moment,
        r_muc,
        r_02,
        max_dbar,
        max_moment,
        max_muc,
        max_02,
    })
}

/// Position of `t` relative to the stability threshold `4π deg/V`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    Above(f64),
    Below(f64),
}

impl Threshold {
    pub fn margin(&self) -> f64 {
        match *self {
            Threshold::Above(m) | Threshold::Below(m) => m,
        }
    }

    pub fn is_above(&self) -> bool {
        matches!(self, Threshold::Above(_))
    }
}

/// `4π d / V`.
pub fn critical_t(degree: i64, volume: f64) -> f64 {
    4.0 * PI * degree as f64 / volume
}

pub fn threshold(cfg: &Configuration) -> Threshold {
    threshold_for(cfg.t, cfg.degree(), cfg.grid.volume())
}

pub fn threshold_for(t: f64, degree: i64, volume: f64) -> Threshold {
    let margin = t - critical_t(degree, volume);
    if margin > 0.0 {
        Threshold::Above(margin)
    } else {
        Threshold::Below(margin)
    }
}

/// Applies `g = e^{f + iθ}`: `A ↦ A + (∂ − ∂̄)f − i dθ`, `f_i ↦ g f_i`,
/// `g_i ↦ e^{−f + iθ} g_i`.
pub fn gauge_apply(cfg: &Configuration, f: &[f64], theta: &[f64]) -> Result<Configuration> {
    let grid = &cfg.grid;
    grid.check_len(f.len())?;
    grid.check_len(theta.len())?;
    let dim = grid.dim();
    let df: Vec<Vec<f64>> = (0..dim).map(|k| grid.derivative_real(f, k)).collect();
    let dth: Vec<Vec<f64>> = (0..dim).map(|k| grid.derivative_real(theta, k)).collect();
    let mut delta = vec![vec![0.0; grid.len()]; dim];
    for j in 0..dim / 2 {
        let (x, y) = (2 * j, 2 * j + 1);
        for p in 0..grid.len() {
            delta[x][p] = -df[y][p] - dth[x][p];
            delta[y][p] = df[x][p] - dth[y][p];
        }
    }
    let up: Vec<Complex64> = f
        .iter()
        .zip(theta)
        .map(|(a, b)| Complex64::new(*a, *b).exp())
        .collect();
    let down: Vec<Complex64> = f
        .iter()
        .zip(theta)
        .map(|(a, b)| Complex64::new(-*a, *b).exp())
        .collect();
    let scale = |v: &Vec<Complex64>, w: &[Complex64]| v.iter().zip(w).map(|(a, b)| a * b).collect();
    Ok(Configuration {
        grid: grid.clone(),
        conn: cfg.conn.shifted(&delta),
        f: cfg.f.iter().map(|v| scale(v, &up)).collect(),
        g: cfg.g.iter().map(|v| scale(v, &down)).collect(),
        t: cfg.t,
    })
}

pub(crate) fn zero_section(grid: &TorusGrid) -> Vec<Complex64> {
    vec![Complex64::new(0.0, 0.0); grid.len()]
}

pub(crate) fn bundle_of(cfg: &Configuration) -> Bundle {
    Bundle::Line(cfg.degree())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn t2(n: usize) -> TorusGrid {
        TorusGrid::uniform(2, n, 2.0 * PI).unwrap()
    }

    fn constant_cfg(grid: &TorusGrid, c: Complex64, t: f64) -> Configuration {
        Configuration::classical(
            grid,
            Connection::flat(grid),
            vec![c; grid.len()],
            zero_section(grid),
            t,
        )
        .unwrap()
    }

    fn smooth(grid: &TorusGrid, rng: &mut ChaCha8Rng, amp: f64) -> Vec<f64> {
        let l = grid.lengths().to_vec();
        let (k1, k2, ph) = (
            rng.gen_range(-2..=2) as f64,
            rng.gen_range(-2..=2) as f64,
            rng.gen_range(0.0..6.0),
        );
        let c = rng.gen_range(-amp..amp);
        grid.sample(|x| c * (2.0 * PI * (k1 * x[0] / l[0] + k2 * x[1] / l[1]) + ph).sin())
    }

    #[test]
    fn constant_solution_residuals() {
        // |c|² = t solves the moment equation with ΛF = 0.
        let g = t2(64);
        let c = Complex64::new(0.6, 0.8);
        let r = residuals(&constant_cfg(&g, c, c.norm_sqr())).unwrap();
        assert!(r.within(1e-12), "{r:?}");
        let r = residuals(&constant_cfg(&g, Complex64::new(0.0, 0.0), 0.0)).unwrap();
        assert_eq!(r.norms(), [0.0; 4]);
    }

    #[test]
    fn moment_residual_matches_direct_formula() {
        let g = t2(32);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cfg = random_configuration(&g, 2, 2, 1.3, &mut rng).unwrap();
        let r = residuals(&cfg).unwrap();
        // ΛF = −ib + i(∂₁a₂ − ∂₂a₁)
        let a = cfg.conn.perturbation();
        let d1a2 = g.derivative_real(&a[1], 0);
        let d2a1 = g.derivative_real(&a[0], 1);
        let b = cfg.conn.field_strength();
        let mut acc = 0.0;
        for x in 0..g.len() {
            let dens: f64 = cfg
                .f
                .iter()
                .zip(&cfg.g)
                .map(|(f, h)| f[x].norm_sqr() - h[x].norm_sqr())
                .sum();
            let im = -b + d1a2[x] - d2a1[x] - 0.5 * dens + 0.5 * cfg.t;
            acc += im * im;
        }
        let direct = (acc * g.weight()).sqrt();
        assert!((r.r_moment - direct).abs() <= 1e-13 * direct.max(1.0));
    }

    #[test]
    fn threshold_cases() {
        let g = t2(16);
        assert_eq!(
            threshold(&constant_cfg(&g, Complex64::new(1.0, 0.0), 1.0)),
            Threshold::Above(1.0)
        );
        let v = g.volume();
        let th = threshold_for(4.0 * PI / v, 1, v);
        assert_eq!(th, Threshold::Below(0.0));
        // ∫(t − 2iΛF) = tV − 4πd
        let conn = Connection::background(&g, 2).unwrap();
        let cfg =
            Configuration::classical(&g, conn, zero_section(&g), zero_section(&g), 0.7).unwrap();
        let w: Vec<f64> = cfg
            .lambda_f()
            .iter()
            .map(|l| (cfg.t - 2.0 * I * l).re)
            .collect();
        assert!((g.integrate_real(&w) - (0.7 * v - 8.0 * PI)).abs() < 1e-12);
        assert_eq!(g.integrate_real(&w) > 0.0, threshold(&cfg).is_above());
    }

    #[test]
    fn gauge_identity_and_composition() {
        let g = t2(32);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cfg = random_configuration(&g, 1, 2, 2.0, &mut rng).unwrap();
        let zero = vec![0.0; g.len()];
        assert_eq!(gauge_apply(&cfg, &zero, &zero).unwrap(), cfg);
        let (f1, t1, f2, t2_) = (
            smooth(&g, &mut rng, 0.5),
            smooth(&g, &mut rng, 1.0),
            smooth(&g, &mut rng, 0.5),
            smooth(&g, &mut rng, 1.0),
        );
        let a = gauge_apply(&gauge_apply(&cfg, &f2, &t2_).unwrap(), &f1, &t1).unwrap();
        let fs: Vec<f64> = f1.iter().zip(&f2).map(|(x, y)| x + y).collect();
        let ts: Vec<f64> = t1.iter().zip(&t2_).map(|(x, y)| x + y).collect();
        let b = gauge_apply(&cfg, &fs, &ts).unwrap();
        for (u, v) in
            a.f.iter()
                .flatten()
                .zip(b.f.iter().flatten())
                .chain(a.g.iter().flatten().zip(b.g.iter().flatten()))
        {
            assert!((u - v).norm() <= 1e-12 * u.norm().max(1.0));
        }
        for (u, v) in a
            .conn
            .perturbation()
            .iter()
            .flatten()
            .zip(b.conn.perturbation().iter().flatten())
        {
            assert!((u - v).abs() <= 1e-12);
        }
    }

    #[test]
    fn unitary_gauge_invariance() {
        let g = t2(64);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cfg = random_configuration(&g, 1, 2, 2.0, &mut rng).unwrap();
        let base = residuals(&cfg).unwrap();
        let theta = smooth(&g, &mut rng, 1.0);
        let moved = residuals(&gauge_apply(&cfg, &vec![0.0; g.len()], &theta).unwrap()).unwrap();
        for (a, b) in base.norms().iter().zip(moved.norms()) {
            assert!((a - b).abs() <= 1e-11, "{base:?} vs {moved:?}");
        }
    }

    #[test]
    fn real_constant_gauge_scales_moment() {
        let g = t2(16);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cfg = random_configuration(&g, 1, 1, 2.0, &mut rng).unwrap();
        let cfg = Configuration {
            g: vec![zero_section(&g)],
            ..cfg
        };
        let c = 0.4;
        let moved = gauge_apply(&cfg, &vec![c; g.len()], &vec![0.0; g.len()]).unwrap();
        for (a, b) in cfg.mu1().iter().zip(moved.mu1()) {
            assert!((b - (2.0 * c).exp() * a).abs() < 1e-13);
        }
        for (a, b) in cfg.lambda_f().iter().zip(moved.lambda_f()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn complex_gauge_curvature_shift() {
        // ΛF after e^f equals ΛF + Λ(∂̄∂ − ∂∂̄)f = ΛF − iΔf.
        let g = t2(32);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cfg = random_configuration(&g, 2, 1, 1.0, &mut rng).unwrap();
        let f = smooth(&g, &mut rng, 1.0);
        let moved = gauge_apply(&cfg, &f, &vec![0.0; g.len()]).unwrap();
        let lap = g.laplacian_real(&f);
        for ((a, b), l) in cfg.lambda_f().iter().zip(moved.lambda_f()).zip(&lap) {
            assert!((b - (a - I * l)).norm() < 1e-12);
        }
    }

    #[test]
    fn mismatched_shapes_are_rejected() {
        let g = t2(16);
        assert!(Configuration::new(&g, Connection::flat(&g), vec![], vec![], 1.0).is_err());
        assert!(Configuration::classical(
            &g,
            Connection::flat(&g),
            vec![Complex64::new(0.0, 0.0); 3],
            zero_section(&g),
            1.0
        )
        .is_err());
        let other = t2(8);
        assert!(Configuration::classical(
            &g,
            Connection::flat(&other),
            zero_section(&g),
            zero_section(&g),
            1.0
        )
        .is_err());
    }
}
