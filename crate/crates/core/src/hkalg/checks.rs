use super::{
    apply_complex_structure, kaehler_form, killing_field, metric, moment_map, sp1_act, sp1_killing,
    ComplexStructureLabel, Group, Quaternion, Tangent, TargetPoint,
};
use crate::error::{Error, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

/// Switches used by the invariant suite; the default is the module's
/// convention, `flip_omega1` is a negative control.
#[derive(Debug, Clone, Copy, Default)]
pub struct FlatHk {
    pub flip_omega1: bool,
}

impl FlatHk {
    fn omega(&self, v: &[Quaternion], w: &[Quaternion]) -> Quaternion {
        let s1 = if self.flip_omega1 { -1.0 } else { 1.0 };
        Quaternion::new(
            0.0,
            s1 * kaehler_form(1, v, w).unwrap(),
            kaehler_form(2, v, w).unwrap(),
            kaehler_form(3, v, w).unwrap(),
        )
    }
}

pub fn random_point(rng: &mut ChaCha8Rng, n: usize) -> TargetPoint {
    let mut c = || Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    let alpha = (0..n).map(|_| c()).collect();
    let beta = (0..n).map(|_| c()).collect();
    TargetPoint { alpha, beta }
}

pub fn random_tangent(rng: &mut ChaCha8Rng, n: usize) -> Tangent {
    (0..n)
        .map(|_| {
            Quaternion::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            )
        })
        .collect()
}

pub fn random_unit_quaternion(rng: &mut ChaCha8Rng) -> Quaternion {
    loop {
        let q = Quaternion::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = q.norm();
        if n > 0.1 && n <= 1.0 {
            return q.scale(1.0 / n);
        }
    }
}

/// Max over samples of `|(L_q)^*ω(v,w) − q̄ ω(v,w) q|`.
pub fn check_permuting(q: Quaternion, samples: &[(Tangent, Tangent)]) -> Result<f64> {
    check_permuting_with(FlatHk::default(), q, samples)
}

pub fn check_permuting_with(
    hk: FlatHk,
    q: Quaternion,
    samples: &[(Tangent, Tangent)],
) -> Result<f64> {
    if (q.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "|q| = {}, expected 1",
            q.norm()
        )));
    }
    let mut worst: f64 = 0.0;
    for (v, w) in samples {
        // L_q is linear, so its differential is L_q itself.
        let pulled = hk.omega(&sp1_act(q, v), &sp1_act(q, w));
        let conj = q.conj() * hk.omega(v, w) * q;
        worst = worst.max((pulled - conj).norm());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RotatingReport {
    /// `max |L_X ω₁|`
    pub omega1: f64,
    /// `max |L_X ω₂ + ω₃|`
    pub omega2: f64,
    /// `max |L_X ω₃ − ω₂|`
    pub omega3: f64,
}

impl RotatingReport {
    pub fn max(&self) -> f64 {
        self.omega1.max(self.omega2).max(self.omega3)
    }
}

/// Lie-derivative relations of the rotating circle. The generator is the
/// linear field `X(p) = A p`, so `(L_X ω)(v, w) = ω(Av, w) + ω(v, Aw)`.
pub fn check_rotating(samples: &[(Tangent, Tangent)]) -> RotatingReport {
    let gen = |v: &Tangent| killing_field(Group::U1Rot, &TargetPoint::from_quaternions(v));
    let mut r = RotatingReport::default();
    for (v, w) in samples {
        let (av, aw) = (gen(v), gen(w));
        let lie = |i| kaehler_form(i, &av, w).unwrap() + kaehler_form(i, v, &aw).unwrap();
        let om = |i| kaehler_form(i, v, w).unwrap();
        r.omega1 = r.omega1.max(lie(1).abs());
        r.omega2 = r.omega2.max((lie(2) + om(3)).abs());
        r.omega3 = r.omega3.max((lie(3) - om(2)).abs());
    }
    r
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SwannReport {
    /// `max |grad ρ₀ + I_ξ K_ξ|` over `ξ ∈ {i, j, k}`.
    pub gradient_deviation: f64,
    /// `max |⟨μ, ξ⊗η⟩ + ½ g(K_ξ, K_η)|`, the pairing formula as printed.
    pub pairing_deviation: f64,
    /// Same with the opposite global sign, `max |⟨μ, ξ⊗η⟩ − ½ g(K_ξ, K_η)|`.
    pub pairing_deviation_flipped: f64,
}

pub fn check_swann_identities(samples: &[TargetPoint]) -> Result<SwannReport> {
    let mut r = SwannReport::default();
    for p in samples {
        let q = p.to_quaternions();
        if q.iter().all(|x| x.norm_sqr() == 0.0) {
            return Err(Error::InvalidInput("sample at the origin".into()));
        }
        let k_eta = killing_field(Group::U1Zero, p);
        let mu = moment_map(p).components();
        for a in 1..=3 {
            let label = ComplexStructureLabel::basis(a)?;
            let k_xi = sp1_killing(label.xi(), &q);
            let ik = apply_complex_structure(&label, &k_xi);
            // grad ρ₀ = p
            let dev = q
                .iter()
                .zip(&ik)
                .map(|(g, i)| (*g + *i).norm_sqr())
                .sum::<f64>()
                .sqrt();
            r.gradient_deviation = r.gradient_deviation.max(dev);
            let half_g = 0.5 * metric(&k_xi, &k_eta);
            r.pairing_deviation = r.pairing_deviation.max((mu[a - 1] + half_g).abs());
            r.pairing_deviation_flipped =
                r.pairing_deviation_flipped.max((mu[a - 1] - half_g).abs());
        }
    }
    Ok(r)
}

/// Central-difference check of `dμ_a(v) = ω_a(K, v)` for the U(1)₀ field.
pub fn check_moment_defining(samples: &[(TargetPoint, Tangent)], step: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for (p, v) in samples {
        let q = p.to_quaternions();
        let shift = |s: f64| {
            let moved: Vec<_> = q.iter().zip(v).map(|(a, b)| *a + b.scale(s)).collect();
            moment_map(&TargetPoint::from_quaternions(&moved)).components()
        };
        let (plus, minus) = (shift(step), shift(-step));
        let k = killing_field(Group::U1Zero, p);
        for a in 0..3 {
            let fd = (plus[a] - minus[a]) / (2.0 * step);
            let exact = kaehler_form(a + 1, &k, v).unwrap();
            worst = worst.max((fd - exact).abs());
        }
    }
    worst
}
