//! Closed-form hyperKähler linear algebra on the flat target ℍⁿ.
//!
//! Conventions (all fixed here and tested by the defining identities):
//!
//! * a point `(α, β) ∈ ℂⁿ ⊕ ℂⁿ` is the quaternion vector `q_l = α_l + β_l j`;
//! * the holomorphic coordinates of the flat example are `z = ᾱ`, `w = iβ`, in
//!   which `ω₁ = (i/2) Σ dz∧dz̄ + dw∧dw̄` and `ω₂ + iω₃ = Σ dz∧dw`;
//! * equivalently `I_a` is right multiplication by `−u_a` with the adapted
//!   frame `u = (i, k, −j)`, and `ω_a(v, w) = g(I_a v, w)`;
//! * the permuting Sp(1) action is `p ↦ p·σ(q)` with `σ(q) = s̄ q s`,
//!   `s = (1 − i)/√2`, so that `(L_q)^*ω = q̄ ω q`;
//! * U(1)₀ acts by left multiplication `p ↦ e^{iθ} p`;
//! * Killing fields of U(1)₀ and Sp(1) are `K_η(p) = d/dt exp(−tη)·p`, and
//!   moment maps satisfy `dμ_a = ι_{K} ω_a` (no minus sign).

mod checks;
mod quaternion;

pub use checks::{
    check_moment_defining, check_permuting, check_permuting_with, check_rotating,
    check_swann_identities, random_point, random_tangent, random_unit_quaternion, FlatHk,
    RotatingReport, SwannReport,
};
pub use quaternion::Quaternion;

use crate::error::{Error, Result};
use rustfft::num_complex::Complex64;
use std::str::FromStr;

/// Tangent vectors at a point of ℍⁿ, one quaternion per factor.
pub type Tangent = Vec<Quaternion>;

const UNIT_TOL: f64 = 1e-12;

/// A point `α + βj` of ℍⁿ = ℂⁿ ⊕ jℂⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetPoint {
    pub alpha: Vec<Complex64>,
    pub beta: Vec<Complex64>,
}

impl TargetPoint {
    pub fn new(alpha: Vec<Complex64>, beta: Vec<Complex64>) -> Result<Self> {
        if alpha.len() != beta.len() {
            return Err(Error::InvalidInput(format!(
                "alpha has {} components, beta has {}",
                alpha.len(),
                beta.len()
            )));
        }
        Ok(TargetPoint { alpha, beta })
    }

    pub fn origin(n: usize) -> Self {
        TargetPoint {
            alpha: vec![Complex64::new(0.0, 0.0); n],
            beta: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Single-factor point from real and imaginary parts.
    pub fn single(alpha: Complex64, beta: Complex64) -> Self {
        TargetPoint {
            alpha: vec![alpha],
            beta: vec![beta],
        }
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn to_quaternions(&self) -> Vec<Quaternion> {
        self.alpha
            .iter()
            .zip(&self.beta)
            .map(|(a, b)| Quaternion::new(a.re, a.im, b.re, b.im))
            .collect()
    }

    pub fn from_quaternions(q: &[Quaternion]) -> Self {
        TargetPoint {
            alpha: q.iter().map(|q| Complex64::new(q.w, q.x)).collect(),
            beta: q.iter().map(|q| Complex64::new(q.y, q.z)).collect(),
        }
    }

    pub fn scaled(&self, r: f64) -> Self {
        TargetPoint {
            alpha: self.alpha.iter().map(|a| a * r).collect(),
            beta: self.beta.iter().map(|b| b * r).collect(),
        }
    }

    /// Holomorphic coordinates `(z, w) = (ᾱ, iβ)` of the flat example.
    pub fn holomorphic_coordinates(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        let i = Complex64::new(0.0, 1.0);
        (
            self.alpha.iter().map(|a| a.conj()).collect(),
            self.beta.iter().map(|b| i * b).collect(),
        )
    }
}

/// Tangent vector with prescribed holomorphic-coordinate components
/// `(dz, dw)`; inverse of the linear map `(dα, dβ) ↦ (conj dα, i dβ)`.
pub fn tangent_from_holomorphic(dz: &[Complex64], dw: &[Complex64]) -> Tangent {
    let mi = Complex64::new(0.0, -1.0);
    dz.iter()
        .zip(dw)
        .map(|(z, w)| {
            let da = z.conj();
            let db = mi * w;
            Quaternion::new(da.re, da.im, db.re, db.im)
        })
        .collect()
}

/// Unit imaginary quaternion `ξ` selecting `I_ξ = ξ₁I₁ + ξ₂I₂ + ξ₃I₃`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexStructureLabel {
    xi: [f64; 3],
}

impl ComplexStructureLabel {
    pub fn new(xi: [f64; 3]) -> Result<Self> {
        let n = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
        if (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidInput(format!("|xi| = {n}, expected 1")));
        }
        Ok(ComplexStructureLabel { xi })
    }

    pub fn basis(a: usize) -> Result<Self> {
        let mut xi = [0.0; 3];
        match a {
            1..=3 => xi[a - 1] = 1.0,
            _ => return Err(Error::InvalidInput(format!("complex structure index {a}"))),
        }
        Ok(ComplexStructureLabel { xi })
    }

    pub fn xi(&self) -> [f64; 3] {
        self.xi
    }

    /// Image of `ξ` in the adapted frame, `ξ₁ i + ξ₂ k − ξ₃ j`.
    pub fn frame_element(&self) -> Quaternion {
        frame_element(self.xi)
    }
}

pub(crate) fn frame_element(xi: [f64; 3]) -> Quaternion {
    Quaternion::new(0.0, xi[0], -xi[2], xi[1])
}

pub(crate) fn frame_rotor() -> Quaternion {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Quaternion::new(h, -h, 0.0, 0.0)
}

/// `I_ξ v`.
pub fn apply_complex_structure(xi: &ComplexStructureLabel, v: &[Quaternion]) -> Tangent {
    let u = -xi.frame_element();
    v.iter().map(|&q| q * u).collect()
}

/// Flat metric `g(v, w)`.
pub fn metric(v: &[Quaternion], w: &[Quaternion]) -> f64 {
    v.iter().zip(w).map(|(a, b)| a.dot(*b)).sum()
}

/// `ω_i(v, w) = g(I_i v, w)` for `i ∈ {1, 2, 3}`.
pub fn kaehler_form(i: usize, v: &[Quaternion], w: &[Quaternion]) -> Result<f64> {
    let label = ComplexStructureLabel::basis(i)?;
    Ok(metric(&apply_complex_structure(&label, v), w))
}

/// `ω_c = ω₂ + i ω₃`.
pub fn kaehler_form_c(v: &[Quaternion], w: &[Quaternion]) -> Complex64 {
    Complex64::new(
        kaehler_form(2, v, w).expect("index 2"),
        kaehler_form(3, v, w).expect("index 3"),
    )
}

/// Symmetry groups acting on the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    /// Rotating circle `(α, β) ↦ (α, e^{iθ}β)`.
    U1Rot,
    /// Tri-Hamiltonian circle `p ↦ e^{iθ} p`.
    U1Zero,
    /// Homothety `p ↦ r p`.
    RPlus,
}

impl FromStr for Group {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "U1_rot" | "u1_rot" => Ok(Group::U1Rot),
            "U1_0" | "u1_0" => Ok(Group::U1Zero),
            "R_plus" | "r_plus" => Ok(Group::RPlus),
            other => Err(Error::InvalidInput(format!(
                "unknown group label '{other}'"
            ))),
        }
    }
}

pub fn killing_field(group: Group, p: &TargetPoint) -> Tangent {
    let q = p.to_quaternions();
    match group {
        Group::U1Rot => q
            .iter()
            .map(|q| {
                // d/dθ (α + e^{iθ}β j) = (iβ) j
                let ib = Quaternion::new(-q.z, q.y, 0.0, 0.0);
                ib * Quaternion::J
            })
            .collect(),
        Group::U1Zero => q.iter().map(|&q| -(Quaternion::I * q)).collect(),
        Group::RPlus => q,
    }
}

/// Killing field of `ξ ∈ 𝔰𝔭(1)` for the permuting action, `−p σ(ξ)`.
pub fn sp1_killing(xi: [f64; 3], p: &[Quaternion]) -> Tangent {
    let u = frame_element(xi);
    p.iter().map(|&q| -(q * u)).collect()
}

/// Permuting action `L_q(p) = p σ(q)`.
pub fn sp1_act(q: Quaternion, p: &[Quaternion]) -> Tangent {
    let s = frame_rotor();
    let sq = s.conj() * q * s;
    p.iter().map(|&x| x * sq).collect()
}

/// Moment map of U(1)₀: `μ₁` and `μ_c = μ₂ + iμ₃`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentValue {
    pub mu1: f64,
    pub muc: Complex64,
}

impl MomentValue {
    /// Combined `μ = iμ₁ + jμ₂ + kμ₃`.
    pub fn combined(&self) -> Quaternion {
        Quaternion::new(0.0, self.mu1, self.muc.re, self.muc.im)
    }

    pub fn components(&self) -> [f64; 3] {
        [self.mu1, self.muc.re, self.muc.im]
    }
}

pub fn moment_map(p: &TargetPoint) -> MomentValue {
    let mut mu1 = 0.0;
    let mut muc = Complex64::new(0.0, 0.0);
    for (a, b) in p.alpha.iter().zip(&p.beta) {
        mu1 -= 0.5 * (a.norm_sqr() - b.norm_sqr());
        muc -= a.conj() * b;
    }
    MomentValue { mu1, muc }
}

/// HyperKähler potential `ρ₀ = ½ Σ |q_l|²`.
pub fn hk_potential(p: &TargetPoint) -> f64 {
    0.5 * p
        .alpha
        .iter()
        .zip(&p.beta)
        .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn complex_structure_squares_to_minus_one() {
        let xi = ComplexStructureLabel::new([0.6, 0.0, 0.8]).unwrap();
        let v = vec![
            Quaternion::new(0.3, -1.0, 2.0, 0.5),
            Quaternion::new(1.0, 2.0, 3.0, 4.0),
        ];
        let w = apply_complex_structure(&xi, &apply_complex_structure(&xi, &v));
        for (a, b) in v.iter().zip(&w) {
            assert!((*a + *b).norm() < 1e-14);
        }
    }

    #[test]
    fn non_unit_label_is_rejected() {
        assert!(ComplexStructureLabel::new([1.0, 1.0, 0.0]).is_err());
        assert!(ComplexStructureLabel::basis(4).is_err());
        assert!(kaehler_form(0, &[Quaternion::ONE], &[Quaternion::ONE]).is_err());
    }

    #[test]
    fn i_structure_is_linear_in_label() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let xi = ComplexStructureLabel::new([h, h, 0.0]).unwrap();
        let v = vec![Quaternion::new(0.1, 0.7, -0.4, 2.0)];
        let lhs = apply_complex_structure(&xi, &v)[0];
        let i1 = apply_complex_structure(&ComplexStructureLabel::basis(1).unwrap(), &v)[0];
        let i2 = apply_complex_structure(&ComplexStructureLabel::basis(2).unwrap(), &v)[0];
        assert!((lhs - (i1 + i2).scale(h)).norm() < 1e-15);
    }

    #[test]
    fn i1_on_re_z_matches_flat_example() {
        // I₁ multiplies the holomorphic coordinate z by i.
        let v = tangent_from_holomorphic(&[c(1.0, 0.0)], &[c(0.0, 0.0)]);
        let iv = apply_complex_structure(&ComplexStructureLabel::basis(1).unwrap(), &v);
        let expected = tangent_from_holomorphic(&[c(0.0, 1.0)], &[c(0.0, 0.0)]);
        assert!((iv[0] - expected[0]).norm() < 1e-15);
    }

    #[test]
    fn kaehler_forms_in_holomorphic_coordinates() {
        let zero = [c(0.0, 0.0)];
        let re_z = tangent_from_holomorphic(&[c(1.0, 0.0)], &zero);
        let im_z = tangent_from_holomorphic(&[c(0.0, 1.0)], &zero);
        let re_w = tangent_from_holomorphic(&zero, &[c(1.0, 0.0)]);
        let im_w = tangent_from_holomorphic(&zero, &[c(0.0, 1.0)]);
        assert!((kaehler_form(1, &re_z, &im_z).unwrap() - 1.0).abs() < 1e-15);
        assert!((kaehler_form(1, &re_w, &im_w).unwrap() - 1.0).abs() < 1e-15);
        assert!((kaehler_form_c(&re_z, &re_w) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((kaehler_form_c(&re_z, &im_w) - c(0.0, 1.0)).norm() < 1e-15);
        let v = vec![Quaternion::new(0.2, 1.3, -0.7, 0.4)];
        for i in 1..=3 {
            assert!(kaehler_form(i, &v, &v).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn killing_fields() {
        let p = TargetPoint::single(c(1.0, 0.0), c(1.0, 0.0));
        let k = killing_field(Group::U1Rot, &p);
        // (δα, δβ) = (0, i)
        let t = TargetPoint::from_quaternions(&k);
        assert!((t.alpha[0]).norm() < 1e-15);
        assert!((t.beta[0] - c(0.0, 1.0)).norm() < 1e-15);

        let k0 = killing_field(Group::U1Zero, &TargetPoint::origin(2));
        assert!(k0.iter().all(|q| q.norm() == 0.0));

        let p = TargetPoint::single(c(0.3, -1.0), c(2.0, 0.5));
        assert_eq!(killing_field(Group::RPlus, &p), p.to_quaternions());

        assert!("SU2".parse::<Group>().is_err());
        assert_eq!("U1_0".parse::<Group>().unwrap(), Group::U1Zero);
    }

    #[test]
    fn moment_map_values() {
        let m = moment_map(&TargetPoint::single(c(1.0, 0.0), c(0.0, 0.0)));
        assert_eq!(m.mu1, -0.5);
        assert_eq!(m.muc, c(0.0, 0.0));

        let m = moment_map(&TargetPoint::origin(3));
        assert_eq!((m.mu1, m.muc), (0.0, c(0.0, 0.0)));

        let p = TargetPoint::new(
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0)],
        )
        .unwrap();
        let m = moment_map(&p);
        assert_eq!((m.mu1, m.muc), (0.0, c(0.0, 0.0)));

        let m = moment_map(&TargetPoint::single(c(1.0, 0.0), c(1.0, 0.0)));
        assert_eq!(m.muc, c(-1.0, 0.0));
        assert_eq!(m.combined(), Quaternion::new(0.0, m.mu1, -1.0, 0.0));
    }

    #[test]
    fn potential_values() {
        assert_eq!(
            hk_potential(&TargetPoint::single(c(1.0, 0.0), c(0.0, 0.0))),
            0.5
        );
        assert_eq!(hk_potential(&TargetPoint::origin(1)), 0.0);
        assert_eq!(
            hk_potential(&TargetPoint::single(c(3.0, 0.0), c(4.0, 0.0))),
            12.5
        );
    }

    #[test]
    fn quaternion_round_trip_is_exact() {
        let p = TargetPoint::new(
            vec![c(0.1, -2.0), c(3.5, 1e-300)],
            vec![c(-7.0, 0.25), c(0.0, 9.0)],
        )
        .unwrap();
        assert_eq!(TargetPoint::from_quaternions(&p.to_quaternions()), p);
        assert!(TargetPoint::new(vec![c(0.0, 0.0)], vec![]).is_err());
    }
}
