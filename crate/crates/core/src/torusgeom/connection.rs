use super::spectral::{self, fft_line, wavenumbers, Direction};
use super::{Bundle, FieldGrid, Rank, TorusGrid};
use crate::error::{Error, Result};
use rustfft::num_complex::Complex64;
use std::f64::consts::PI;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Abelian connection `∇ = d + A` on the degree-`d` line bundle.
///
/// `A = −i b x₁ dx₂ + i a` with `b = 2πd/(L₁L₂)` and `a` a real periodic
/// 1-form. Sections satisfy `s(x₁ + L₁, x₂) = e^{2πi d x₂/L₂} s(x₁, x₂)` and
/// are periodic in every other direction; on T⁴ with `d ≠ 0` this needs
/// `L₃L₄ = 1` so that the degree is `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    degree: i64,
    b: f64,
    a: Vec<Vec<f64>>,
}

impl Connection {
    pub fn flat(grid: &TorusGrid) -> Self {
        Connection {
            degree: 0,
            b: 0.0,
            a: vec![vec![0.0; grid.len()]; grid.dim()],
        }
    }

    pub fn background(grid: &TorusGrid, degree: i64) -> Result<Self> {
        let l = grid.lengths();
        if grid.dim() == 4 && degree != 0 && (l[2] * l[3] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "a degree-{degree} bundle on T^4 needs L3*L4 = 1, got {}",
                l[2] * l[3]
            )));
        }
        Ok(Connection {
            degree,
            b: 2.0 * PI * degree as f64 / (l[0] * l[1]),
            a: vec![vec![0.0; grid.len()]; grid.dim()],
        })
    }

    /// Replaces the periodic part `a`, one real array per axis.
    pub fn with_perturbation(mut self, grid: &TorusGrid, a: Vec<Vec<f64>>) -> Result<Self> {
        if a.len() != grid.dim() {
            return Err(Error::InvalidInput(format!(
                "perturbation has {} components on a {}-torus",
                a.len(),
                grid.dim()
            )));
        }
        for c in &a {
            grid.check_len(c.len())?;
        }
        self.a = a;
        Ok(self)
    }

    /// Adds `δa` to the periodic part.
    pub fn shifted(&self, delta: &[Vec<f64>]) -> Self {
        let mut out = self.clone();
        for (c, d) in out.a.iter_mut().zip(delta) {
            c.iter_mut().zip(d).for_each(|(x, y)| *x += y);
        }
        out
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    /// Background field strength `b`, so that `F₀ = −i b dx₁∧dx₂`.
    pub fn field_strength(&self) -> f64 {
        self.b
    }

    pub fn perturbation(&self) -> &[Vec<f64>] {
        &self.a
    }

    fn check_section(&self, grid: &TorusGrid, s: &FieldGrid) -> Result<()> {
        if s.bundle.degree() != self.degree {
            return Err(Error::InvalidInput(format!(
                "section of degree {} paired with a degree-{} connection",
                s.bundle.degree(),
                self.degree
            )));
        }
        if self.a.len() != grid.dim() {
            return Err(Error::InvalidInput(
                "connection built for another grid".into(),
            ));
        }
        for c in &s.components {
            grid.check_len(c.len())?;
        }
        Ok(())
    }
}

/// Cycles of `x₂`-modes glued by the `x₁` boundary condition
/// `ŝ_m(x₁ + L₁) = ŝ_{m−d}(x₁)`.
fn mode_chains(n2: usize, degree: i64) -> Vec<Vec<usize>> {
    let step = (degree.rem_euclid(n2 as i64)) as usize;
    let mut seen = vec![false; n2];
    let mut chains = Vec::new();
    for start in 0..n2 {
        if seen[start] {
            continue;
        }
        let mut chain = Vec::new();
        let mut m = start;
        while !seen[m] {
            seen[m] = true;
            chain.push(m);
            m = (m + n2 - step) % n2;
        }
        chains.push(chain);
    }
    chains
}

/// `∂₁` of a quasi-periodic section: each mode chain is one long periodic
/// line of length `|chain|·L₁`.
fn chain_derivative(grid: &TorusGrid, degree: i64, data: &[Complex64]) -> Vec<Complex64> {
    let (n1, n2) = (grid.sizes()[0], grid.sizes()[1]);
    let l1 = grid.lengths()[0];
    let rest = data.len() / (n1 * n2);
    let chains = mode_chains(n2, degree);
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    let mut plane = vec![Complex64::new(0.0, 0.0); n1 * n2];
    for r in 0..rest {
        for (p, z) in plane.iter_mut().enumerate() {
            *z = data[p * rest + r];
        }
        for row in plane.chunks_mut(n2) {
            fft_line(row, Direction::Forward);
        }
        for chain in &chains {
            let len = chain.len() * n1;
            let ks = wavenumbers(len, chain.len() as f64 * l1);
            let mut line = vec![Complex64::new(0.0, 0.0); len];
            for (k, &m) in chain.iter().enumerate() {
                for i1 in 0..n1 {
                    line[k * n1 + i1] = plane[i1 * n2 + m];
                }
            }
            fft_line(&mut line, Direction::Forward);
            line.iter_mut().zip(&ks).for_each(|(z, k)| *z *= I * k);
            fft_line(&mut line, Direction::Inverse);
            for (k, &m) in chain.iter().enumerate() {
                for i1 in 0..n1 {
                    plane[i1 * n2 + m] = line[k * n1 + i1];
                }
            }
        }
        for row in plane.chunks_mut(n2) {
            fft_line(row, Direction::Inverse);
        }
        for (p, z) in plane.iter().enumerate() {
            out[p * rest + r] = *z;
        }
    }
    out
}

/// `∇_k s` along axis `k` (zero-based) in the Landau chart.
pub fn covariant_derivative(
    grid: &TorusGrid,
    conn: &Connection,
    s: &[Complex64],
    axis: usize,
) -> Vec<Complex64> {
    let mut out = if axis == 0 {
        chain_derivative(grid, conn.degree, s)
    } else {
        spectral::derivative(s, grid.sizes(), grid.lengths(), axis)
    };
    let a = &conn.a[axis];
    let x1_stride = grid.len() / grid.sizes()[0];
    let h1 = grid.spacing(0);
    for (idx, z) in out.iter_mut().enumerate() {
        let mut pot = a[idx];
        if axis == 1 {
            pot -= conn.b * (idx / x1_stride) as f64 * h1;
        }
        *z += I * pot * s[idx];
    }
    out
}

/// `D̄_j = ½(∇_{2j−1} + i∇_{2j})` and `D_j = ½(∇_{2j−1} − i∇_{2j})`.
fn half_derivatives(
    grid: &TorusGrid,
    conn: &Connection,
    s: &[Complex64],
    j: usize,
    antiholomorphic: bool,
) -> Vec<Complex64> {
    let sign = if antiholomorphic { 1.0 } else { -1.0 };
    let dx = covariant_derivative(grid, conn, s, 2 * j);
    let dy = covariant_derivative(grid, conn, s, 2 * j + 1);
    dx.iter()
        .zip(&dy)
        .map(|(a, b)| 0.5 * (a + sign * I * b))
        .collect()
}

/// `∂̄_A s`, components by `dz̄_j`.
pub fn dbar(grid: &TorusGrid, conn: &Connection, s: &FieldGrid) -> Result<FieldGrid> {
    s.require_rank(Rank::Scalar)?;
    conn.check_section(grid, s)?;
    let comps = (0..grid.complex_dim())
        .map(|j| half_derivatives(grid, conn, s.values(), j, true))
        .collect();
    Ok(FieldGrid {
        rank: Rank::Form01,
        bundle: s.bundle,
        components: comps,
    })
}

/// `∂_A s`, components by `dz_j`.
pub fn del(grid: &TorusGrid, conn: &Connection, s: &FieldGrid) -> Result<FieldGrid> {
    s.require_rank(Rank::Scalar)?;
    conn.check_section(grid, s)?;
    let comps = (0..grid.complex_dim())
        .map(|j| half_derivatives(grid, conn, s.values(), j, false))
        .collect();
    Ok(FieldGrid {
        rank: Rank::Form10,
        bundle: s.bundle,
        components: comps,
    })
}

fn neg_d(grid: &TorusGrid, conn: &Connection, s: &[Complex64], j: usize) -> Vec<Complex64> {
    half_derivatives(grid, conn, s, j, false)
        .iter()
        .map(|z| -z)
        .collect()
}

/// Formal adjoint of `∂̄_A` on sections, `∂̄*τ = −Σ_j D_j τ_j`.
pub fn dbar_adjoint(grid: &TorusGrid, conn: &Connection, tau: &FieldGrid) -> Result<FieldGrid> {
    tau.require_rank(Rank::Form01)?;
    conn.check_section(grid, tau)?;
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (j, c) in tau.components.iter().enumerate() {
        for (a, b) in acc.iter_mut().zip(neg_d(grid, conn, c, j)) {
            *a += b;
        }
    }
    Ok(FieldGrid {
        rank: Rank::Scalar,
        bundle: tau.bundle,
        components: vec![acc],
    })
}

/// `∂̄_A` on (0,1)-forms of T⁴: `(τ₁, τ₂) ↦ D̄₁τ₂ − D̄₂τ₁`.
pub fn dbar_01(grid: &TorusGrid, conn: &Connection, tau: &FieldGrid) -> Result<FieldGrid> {
    if grid.dim() != 4 {
        return Err(Error::InvalidInput(
            "(0,2)-forms need a complex surface".into(),
        ));
    }
    tau.require_rank(Rank::Form01)?;
    conn.check_section(grid, tau)?;
    let a = half_derivatives(grid, conn, &tau.components[1], 0, true);
    let b = half_derivatives(grid, conn, &tau.components[0], 1, true);
    Ok(FieldGrid {
        rank: Rank::Form02,
        bundle: tau.bundle,
        components: vec![a.iter().zip(&b).map(|(x, y)| x - y).collect()],
    })
}

/// Adjoint of [`dbar_01`]: `g ↦ (−D̄₂†g, D̄₁†g) = (D₂g, −D₁g)`.
pub fn dbar_adjoint_02(grid: &TorusGrid, conn: &Connection, g: &FieldGrid) -> Result<FieldGrid> {
    if grid.dim() != 4 {
        return Err(Error::InvalidInput(
            "(0,2)-forms need a complex surface".into(),
        ));
    }
    g.require_rank(Rank::Form02)?;
    conn.check_section(grid, g)?;
    let first = half_derivatives(grid, conn, g.values(), 1, false);
    let second = neg_d(grid, conn, g.values(), 0);
    Ok(FieldGrid {
        rank: Rank::Form01,
        bundle: g.bundle,
        components: vec![first, second],
    })
}

/// `F_A = −i b dx₁∧dx₂ + i da`.
pub fn curvature(grid: &TorusGrid, conn: &Connection) -> FieldGrid {
    let dim = grid.dim();
    let mut f = FieldGrid::zeros(grid, Rank::TwoForm, Bundle::Trivial);
    let da: Vec<Vec<Vec<f64>>> = (0..dim)
        .map(|j| {
            (0..dim)
                .map(|k| grid.derivative_real(&conn.a[k], j))
                .collect()
        })
        .collect();
    for j in 0..dim {
        for k in j + 1..dim {
            let c = &mut f.components[grid.two_form_index(j, k)];
            let bg = if (j, k) == (0, 1) { -conn.b } else { 0.0 };
            for (idx, z) in c.iter_mut().enumerate() {
                *z = I * (bg + da[j][k][idx] - da[k][j][idx]);
            }
        }
    }
    f
}

/// `ΛF = F₁₂ (+ F₃₄)`.
pub fn lambda_contract(grid: &TorusGrid, f: &FieldGrid) -> Result<FieldGrid> {
    f.require_rank(Rank::TwoForm)?;
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    for j in 0..grid.complex_dim() {
        let c = &f.components[grid.two_form_index(2 * j, 2 * j + 1)];
        grid.check_len(c.len())?;
        out.iter_mut().zip(c).for_each(|(a, b)| *a += b);
    }
    Ok(FieldGrid::scalar(out))
}

/// `dz̄₁∧dz̄₂` coefficient `¼(F₁₃ − F₂₄ + i(F₁₄ + F₂₃))`; identically zero on T².
pub fn f02(grid: &TorusGrid, f: &FieldGrid) -> Result<FieldGrid> {
    f.require_rank(Rank::TwoForm)?;
    if grid.dim() == 2 {
        return Ok(FieldGrid::zeros(grid, Rank::Form02, Bundle::Trivial));
    }
    let c = |j, k| &f.components[grid.two_form_index(j, k)];
    let (f13, f24, f14, f23) = (c(0, 2), c(1, 3), c(0, 3), c(1, 2));
    let v = (0..grid.len())
        .map(|i| 0.25 * (f13[i] - f24[i] + I * (f14[i] + f23[i])))
        .collect();
    Ok(FieldGrid {
        rank: Rank::Form02,
        bundle: Bundle::Trivial,
        components: vec![v],
    })
}

/// `(i/2π) ∫ ΛF_A`.
pub fn degree(grid: &TorusGrid, conn: &Connection) -> f64 {
    let lf = lambda_contract(grid, &curvature(grid, conn)).expect("curvature is a 2-form");
    (I * grid.integrate_complex(lf.values()) / (2.0 * PI)).re
}
