//! Spectral differential geometry on flat tori T² and T⁴.
//!
//! Grids are row-major with the last axis fastest. Axes `(1,2)` and `(3,4)`
//! pair into complex coordinates `z_j = x_{2j-1} + i x_{2j}`. The Kähler form
//! is `ω_X = dx₁∧dx₂ (+ dx₃∧dx₄)` and `Λ(dx₁∧dx₂) = 1`, so `Λω_X = dim/2`.
//!
//! Forms are stored by coefficient:
//!
//! * 1-forms by `dx_k` components;
//! * (0,1)-forms by `dz̄_j` components, (1,0)-forms by `dz_j`;
//! * (0,2)-forms by the single `dz̄₁∧dz̄₂` coefficient;
//! * 2-forms by `(12)` in dim 2 and `(12, 13, 14, 23, 24, 34)` in dim 4.
//!
//! Inner products of forms are the plain coefficient sums weighted by the
//! quadrature weight `V/N`.

mod connection;
pub mod io;
pub(crate) mod spectral;

pub use connection::{
    covariant_derivative, curvature, dbar, dbar_01, dbar_adjoint, dbar_adjoint_02, degree, del,
    f02, lambda_contract, Connection,
};

use crate::error::{Error, Result};
use rustfft::num_complex::Complex64;
use spectral::unravel;

#[derive(Debug, Clone, PartialEq)]
pub struct TorusGrid {
    dim: usize,
    sizes: Vec<usize>,
    lengths: Vec<f64>,
}

impl TorusGrid {
    pub fn new(sizes: &[usize], lengths: &[f64]) -> Result<Self> {
        let dim = sizes.len();
        if dim != 2 && dim != 4 {
            return Err(Error::InvalidInput(format!(
                "torus dimension {dim}, expected 2 or 4"
            )));
        }
        if lengths.len() != dim {
            return Err(Error::InvalidInput(format!(
                "{} periods given for a {dim}-torus",
                lengths.len()
            )));
        }
        if let Some(n) = sizes.iter().find(|&&n| n < 4 || n % 2 != 0) {
            return Err(Error::InvalidInput(format!(
                "grid size {n} must be even and >= 4"
            )));
        }
        if let Some(l) = lengths.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::InvalidInput(format!("period {l} must be positive")));
        }
        Ok(TorusGrid {
            dim,
            sizes: sizes.to_vec(),
            lengths: lengths.to_vec(),
        })
    }

    /// `n` points per axis with period `length` on every axis.
    pub fn uniform(dim: usize, n: usize, length: f64) -> Result<Self> {
        TorusGrid::new(&vec![n; dim], &vec![length; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn complex_dim(&self) -> usize {
        self.dim / 2
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    pub fn weight(&self) -> f64 {
        self.volume() / self.len() as f64
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.sizes[axis] as f64
    }

    /// Coordinates of the flat grid position `idx`.
    pub fn point(&self, idx: usize) -> Vec<f64> {
        unravel(idx, &self.sizes)
            .iter()
            .enumerate()
            .map(|(a, &j)| j as f64 * self.spacing(a))
            .collect()
    }

    /// Samples a real function of the coordinates.
    pub fn sample<F: Fn(&[f64]) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.len()).map(|i| f(&self.point(i))).collect()
    }

    pub fn sample_complex<F: Fn(&[f64]) -> Complex64>(&self, f: F) -> Vec<Complex64> {
        (0..self.len()).map(|i| f(&self.point(i))).collect()
    }

    /// Number of 2-form components, `dim (dim − 1)/2`.
    pub fn two_form_len(&self) -> usize {
        self.dim * (self.dim - 1) / 2
    }

    /// Index of the `(j, k)` 2-form component, `j < k`, zero-based axes.
    pub fn two_form_index(&self, j: usize, k: usize) -> usize {
        debug_assert!(j < k && k < self.dim);
        let mut idx = 0;
        for a in 0..j {
            idx += self.dim - 1 - a;
        }
        idx + (k - j - 1)
    }

    pub fn integrate_real(&self, f: &[f64]) -> f64 {
        f.iter().sum::<f64>() * self.weight()
    }

    pub fn integrate_complex(&self, f: &[Complex64]) -> Complex64 {
        f.iter().sum::<Complex64>() * self.weight()
    }

    /// Discrete L² norm of a real field.
    pub fn norm_real(&self, f: &[f64]) -> f64 {
        (f.iter().map(|x| x * x).sum::<f64>() * self.weight()).sqrt()
    }

    pub fn dot_real(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>() * self.weight()
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::InvalidInput(format!(
                "field has {len} samples, grid has {}",
                self.len()
            )));
        }
        Ok(())
    }

    /// `Δf` for real `f`, with `Δ = d*d ≥ 0`.
    pub fn laplacian_real(&self, f: &[f64]) -> Vec<f64> {
        let mut z: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        spectral::apply_symbol(&mut z, &self.sizes, &self.lengths, |k| {
            Complex64::new(k.iter().map(|x| x * x).sum(), 0.0)
        });
        z.iter().map(|z| z.re).collect()
    }

    /// Solves `(Δ + c) u = f` spectrally; requires `c > 0`.
    pub fn shifted_laplacian_inverse(&self, c: f64, f: &[f64]) -> Vec<f64> {
        let mut z: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        spectral::apply_symbol(&mut z, &self.sizes, &self.lengths, |k| {
            Complex64::new(1.0 / (k.iter().map(|x| x * x).sum::<f64>() + c), 0.0)
        });
        z.iter().map(|z| z.re).collect()
    }

    /// Spectral derivative of a periodic complex array along `axis`.
    pub fn derivative(&self, f: &[Complex64], axis: usize) -> Vec<Complex64> {
        spectral::derivative(f, &self.sizes, &self.lengths, axis)
    }

    pub fn derivative_real(&self, f: &[f64], axis: usize) -> Vec<f64> {
        let z: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.derivative(&z, axis).iter().map(|z| z.re).collect()
    }
}

/// Form degree and type of a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rank {
    Scalar,
    OneForm,
    Form10,
    Form01,
    Form02,
    TwoForm,
}

impl Rank {
    pub fn components(self, dim: usize) -> usize {
        match self {
            Rank::Scalar | Rank::Form02 => 1,
            Rank::OneForm => dim,
            Rank::Form10 | Rank::Form01 => dim / 2,
            Rank::TwoForm => dim * (dim - 1) / 2,
        }
    }

    pub(crate) fn code(self) -> u32 {
        match self {
            Rank::Scalar => 0,
            Rank::OneForm => 1,
            Rank::Form10 => 2,
            Rank::Form01 => 3,
            Rank::Form02 => 4,
            Rank::TwoForm => 5,
        }
    }

    pub(crate) fn from_code(c: u32) -> Result<Self> {
        Ok(match c {
            0 => Rank::Scalar,
            1 => Rank::OneForm,
            2 => Rank::Form10,
            3 => Rank::Form01,
            4 => Rank::Form02,
            5 => Rank::TwoForm,
            _ => return Err(Error::Format(format!("unknown rank code {c}"))),
        })
    }
}

/// Bundle in which a field takes values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bundle {
    Trivial,
    /// Degree-`d` line bundle in the Landau chart of [`Connection`].
    Line(i64),
}

impl Bundle {
    pub fn degree(self) -> i64 {
        match self {
            Bundle::Trivial => 0,
            Bundle::Line(d) => d,
        }
    }
}

/// Complex samples of a field, one array per form component.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub rank: Rank,
    pub bundle: Bundle,
    pub components: Vec<Vec<Complex64>>,
}

impl FieldGrid {
    pub fn new(
        grid: &TorusGrid,
        rank: Rank,
        bundle: Bundle,
        components: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        let want = rank.components(grid.dim());
        if components.len() != want {
            return Err(Error::InvalidInput(format!(
                "{rank:?} field on a {}-torus needs {want} components, got {}",
                grid.dim(),
                components.len()
            )));
        }
        for c in &components {
            grid.check_len(c.len())?;
        }
        Ok(FieldGrid {
            rank,
            bundle,
            components,
        })
    }

    pub fn zeros(grid: &TorusGrid, rank: Rank, bundle: Bundle) -> Self {
        let n = rank.components(grid.dim());
        FieldGrid {
            rank,
            bundle,
            components: vec![vec![Complex64::new(0.0, 0.0); grid.len()]; n],
        }
    }

    pub fn scalar(values: Vec<Complex64>) -> Self {
        FieldGrid {
            rank: Rank::Scalar,
            bundle: Bundle::Trivial,
            components: vec![values],
        }
    }

    pub fn real(values: &[f64]) -> Self {
        FieldGrid::scalar(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn section(degree: i64, values: Vec<Complex64>) -> Self {
        FieldGrid {
            rank: Rank::Scalar,
            bundle: Bundle::Line(degree),
            components: vec![values],
        }
    }

    /// The single component of a scalar-like field.
    pub fn values(&self) -> &[Complex64] {
        &self.components[0]
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.components[0].iter().map(|z| z.re).collect()
    }

    /// Largest imaginary part, for checking that a field is real.
    pub fn max_imag(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .fold(0.0, |m, z| m.max(z.im.abs()))
    }

    pub fn require_rank(&self, rank: Rank) -> Result<()> {
        if self.rank != rank {
            return Err(Error::InvalidInput(format!(
                "expected a {rank:?} field, got {:?}",
                self.rank
            )));
        }
        Ok(())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        out.components.iter_mut().flatten().for_each(|z| *z *= s);
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .fold(0.0, |m, z| m.max(z.norm()))
    }
}

/// `⟨a, b⟩ = Σ conj(a) b · V/N` over all components.
pub fn inner(grid: &TorusGrid, a: &FieldGrid, b: &FieldGrid) -> Complex64 {
    let s: Complex64 = a
        .components
        .iter()
        .zip(&b.components)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| p.conj() * q))
        .sum();
    s * grid.weight()
}

pub fn norm(grid: &TorusGrid, a: &FieldGrid) -> f64 {
    inner(grid, a, a).re.max(0.0).sqrt()
}

/// Pointwise maximum of the component-summed modulus.
pub fn pointwise_max(a: &FieldGrid) -> f64 {
    let n = a.components[0].len();
    (0..n)
        .map(|i| {
            a.components
                .iter()
                .map(|c| c[i].norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}

/// `Δf` for a real scalar on the trivial bundle.
pub fn laplacian(grid: &TorusGrid, f: &FieldGrid) -> Result<FieldGrid> {
    f.require_rank(Rank::Scalar)?;
    if f.bundle != Bundle::Trivial {
        return Err(Error::InvalidInput(
            "laplacian needs a function, not a section".into(),
        ));
    }
    grid.check_len(f.values().len())?;
    let mut z = f.values().to_vec();
    spectral::apply_symbol(&mut z, grid.sizes(), grid.lengths(), |k| {
        Complex64::new(k.iter().map(|x| x * x).sum(), 0.0)
    });
    Ok(FieldGrid::scalar(z))
}

/// Uniform quadrature `Σ f · V/N` of a scalar field.
pub fn integrate(grid: &TorusGrid, f: &FieldGrid) -> Result<Complex64> {
    f.require_rank(Rank::Scalar)?;
    grid.check_len(f.values().len())?;
    Ok(grid.integrate_complex(f.values()))
}

/// The Kähler form `ω_X` as a 2-form field.
pub fn kaehler_form(grid: &TorusGrid) -> FieldGrid {
    let mut w = FieldGrid::zeros(grid, Rank::TwoForm, Bundle::Trivial);
    for j in 0..grid.complex_dim() {
        let c = grid.two_form_index(2 * j, 2 * j + 1);
        w.components[c]
            .iter_mut()
            .for_each(|z| *z = Complex64::new(1.0, 0.0));
    }
    w
}
