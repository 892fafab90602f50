//! Acceptance suite. Each test prints one PASS/FAIL line for its criterion,
//! then asserts. Run with `cargo test -p gsw-core --test acceptance -- --nocapture`.

use gsw_core::hkalg::{
    apply_complex_structure, check_moment_defining, check_permuting, check_rotating,
    check_swann_identities, moment_map, random_point, random_tangent, random_unit_quaternion,
    sp1_killing, ComplexStructureLabel,
};
use gsw_core::kwsolver::{certify, solve, KwOptions, KwProblem};
use gsw_core::monopole::{
    critical_t, extract_divisor, gauge_apply, holomorphic_data, holomorphy_identity_deviation,
    kw_problem, lift_sw, project_pi, random_configuration, residuals, solve_hk, threshold,
    Configuration,
};
use gsw_core::suite::{random_gauge_phase, random_kw_problem, random_periodic};
use gsw_core::torusgeom::{degree, integrate, Connection};
use gsw_core::{Error, FieldGrid, TorusGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use std::f64::consts::PI;
use std::time::Instant;

fn verdict(name: &str, pass: bool, detail: String) {
    println!("[{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name}: {detail}");
}

fn t2_64() -> TorusGrid {
    TorusGrid::uniform(2, 64, 2.0 * PI).unwrap()
}

fn solved_vortex(grid: &TorusGrid, d: i64, n: usize, seed: u64) -> Configuration {
    let t = critical_t(d, grid.volume()) + 1.0;
    let holo = holomorphic_data(grid, d, n, t, false, seed).unwrap();
    solve_hk(&holo, 1e-8).unwrap().config
}

#[test]
fn constant_kw_exactness() {
    let g = t2_64();
    let start = Instant::now();
    let sol = solve(
        &KwProblem::constant(&g, 1.0, 2.0),
        &KwOptions::with_tol(1e-12),
    )
    .unwrap();
    let secs = start.elapsed().as_secs_f64();
    let exact = 0.5 * 2f64.ln();
    let dev = sol.f.iter().map(|f| (f - exact).abs()).fold(0.0, f64::max);
    verdict(
        "constant KW exactness",
        dev <= 1e-12 && sol.residual_norm <= 1e-12 && secs < 1.0,
        format!(
            "max|f - ln2/2| = {dev:.2e}, residual = {:.2e}, {secs:.3} s",
            sol.residual_norm
        ),
    );
}

#[test]
fn kw_uniqueness_and_energy_descent() {
    let g = t2_64();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst, mut descent) = (0.0f64, true);
    for _ in 0..10 {
        let prob = random_kw_problem(&g, &mut rng).unwrap();
        let a = solve(&prob, &KwOptions::with_tol(1e-11)).unwrap();
        let shifted: Vec<f64> = random_periodic(&g, &mut rng, 1.0)
            .iter()
            .map(|x| x + 1.5)
            .collect();
        let b = solve(
            &prob,
            &KwOptions {
                initial: Some(shifted),
                ..KwOptions::with_tol(1e-11)
            },
        )
        .unwrap();
        worst =
            a.f.iter()
                .zip(&b.f)
                .map(|(x, y)| (x - y).abs())
                .fold(worst, f64::max);
        for s in [&a, &b] {
            descent &= s.energy_steps.iter().all(|&d| d < 0.0);
            descent &= s.energy_trace.windows(2).all(|w| w[1] <= w[0]);
        }
    }
    verdict(
        "KW uniqueness",
        worst <= 1e-8 && descent,
        format!("10 instances x 2 starts, max deviation {worst:.2e}, energy strictly decreasing: {descent}"),
    );
}

#[test]
fn kw_hypothesis_gating() {
    let g = TorusGrid::uniform(2, 32, 2.0 * PI).unwrap();
    let mut ok = true;
    let mut notes = Vec::new();

    let nonpositive = KwProblem::constant(&g, 1.0, 0.0);
    let zero_b = KwProblem::constant(&g, 0.0, 1.0);
    for (label, p) in [("int w = 0", &nonpositive), ("B = 0", &zero_b)] {
        let refused = !certify(p).is_solvable()
            && matches!(solve(p, &KwOptions::default()), Err(Error::NotCertified(_)));
        ok &= refused;
        notes.push(format!("{label} refused: {refused}"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut mismatches, mut identity) = (0, 0.0f64);
    for k in 0..40 {
        let d = rng.gen_range(0..=3);
        let crit = critical_t(d, g.volume());
        let cfg = if k % 4 == 0 {
            // exactly on the threshold, flat background
            holomorphic_data(&g, d, 1, crit, false, k).unwrap()
        } else {
            let t = crit + rng.gen_range(-1.0..1.0);
            random_configuration(&g, d, 1, t, &mut rng).unwrap()
        };
        if certify(&kw_problem(&cfg).unwrap()).is_solvable() != threshold(&cfg).is_above() {
            mismatches += 1;
        }
        let w: Vec<Complex64> = cfg
            .lambda_f()
            .iter()
            .map(|l| cfg.t - 2.0 * Complex64::i() * l)
            .collect();
        let lhs = integrate(&g, &FieldGrid::scalar(w)).unwrap();
        let rhs = cfg.t * g.volume() - 4.0 * PI * d as f64;
        identity = identity.max((lhs - rhs).norm());
    }
    ok &= mismatches == 0 && identity <= 1e-10;
    notes.push(format!("certify vs threshold mismatches {mismatches}/40, integral identity deviation {identity:.2e}"));
    verdict("KW hypothesis gating", ok, notes.join("; "));
}

#[test]
fn vortex_construction_and_divisor() {
    let g = t2_64();
    let (mut worst, mut slowest) = (0.0f64, 0.0f64);
    let (mut counts_ok, mut winding) = (true, 0.0f64);
    let mut counts = Vec::new();
    for d in 1..=3 {
        let t = critical_t(d, g.volume()) + 1.0;
        let start = Instant::now();
        let holo = holomorphic_data(&g, d, 1, t, false, 0).unwrap();
        let sol = solve_hk(&holo, 1e-8).unwrap().config;
        slowest = slowest.max(start.elapsed().as_secs_f64());
        worst = worst.max(residuals(&sol).unwrap().max_norm());
        let div = extract_divisor(&sol).unwrap();
        counts_ok &= div.total == d;
        counts.push(div.total);
        winding = winding.max((div.winding_sum - 2.0 * PI * d as f64).abs());
    }
    verdict(
        "vortex construction",
        worst <= 1e-8 && slowest < 30.0,
        format!("d = 1, 2, 3 on 64^2: max residual {worst:.2e}, slowest {slowest:.2} s"),
    );
    verdict(
        "divisor map",
        counts_ok && winding <= 1e-6,
        format!("totals {counts:?}, max |winding sum - 2 pi d| {winding:.2e}"),
    );
}

#[test]
fn projection_holomorphy() {
    let g = t2_64();
    let mut dbar = 0.0f64;
    for d in 1..=3 {
        let sol = solved_vortex(&g, d, 3, d as u64);
        let sw = project_pi(&sol, 1e-8).unwrap();
        dbar = dbar.max(residuals(&sw).unwrap().r_dbar);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut identity = 0.0f64;
    for _ in 0..10 {
        let d = rng.gen_range(-2..=2);
        let t = rng.gen_range(0.0..3.0);
        let cfg = random_configuration(&g, d, 1, t, &mut rng).unwrap();
        identity = identity.max(holomorphy_identity_deviation(&cfg));
    }
    verdict(
        "projection holomorphy",
        dbar <= 1e-8 && identity <= 1e-10,
        format!("n = 3, d = 1..3: max |dbar_A alpha| {dbar:.2e}; (0,1)-identity on 10 random configurations {identity:.2e}"),
    );
}

#[test]
fn sw_round_trip() {
    let g = t2_64();
    let mut worst = 0.0f64;
    for seed in 0..5u64 {
        let d = 1 + (seed % 3) as i64;
        let sw = solved_vortex(&g, d, 1, seed);
        let back = project_pi(&lift_sw(&sw, 3).unwrap(), 1e-8).unwrap();
        let k = (0..g.len())
            .max_by(|&i, &j| sw.alpha()[i].norm().total_cmp(&sw.alpha()[j].norm()))
            .unwrap();
        let phase = back.alpha()[k] / sw.alpha()[k];
        let phase = phase / phase.norm();
        let dev = sw
            .alpha()
            .iter()
            .zip(back.alpha())
            .map(|(a, b)| (phase * a - b).norm())
            .fold(0.0, f64::max);
        let conn_dev = sw
            .conn
            .perturbation()
            .iter()
            .zip(back.conn.perturbation())
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max);
        worst = worst.max(dev).max(conn_dev);
    }
    verdict(
        "SW round trip",
        worst <= 1e-10,
        format!("5 seeded solutions, max deviation up to phase {worst:.2e}"),
    );
}

#[test]
fn hkalg_identity_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let start = Instant::now();
    let n_of = |rng: &mut ChaCha8Rng| rng.gen_range(1..=3);

    let samples: Vec<_> = (0..100)
        .map(|_| {
            let n = n_of(&mut rng);
            (random_point(&mut rng, n), random_tangent(&mut rng, n))
        })
        .collect();
    let moment = check_moment_defining(&samples, 1e-5);

    let mut permuting = 0.0f64;
    for _ in 0..100 {
        let n = n_of(&mut rng);
        let q = random_unit_quaternion(&mut rng);
        let pair = [(random_tangent(&mut rng, n), random_tangent(&mut rng, n))];
        permuting = permuting.max(check_permuting(q, &pair).unwrap());
    }

    let pairs: Vec<_> = (0..100)
        .map(|_| {
            let n = n_of(&mut rng);
            (random_tangent(&mut rng, n), random_tangent(&mut rng, n))
        })
        .collect();
    let rotating = check_rotating(&pairs).max();

    // grad ρ₀ = p = −I_ξ K_ξ for random unit ξ, plus the coordinate directions
    let points: Vec<_> = (0..100)
        .map(|_| {
            let n = n_of(&mut rng);
            random_point(&mut rng, n)
        })
        .collect();
    let mut gradient = check_swann_identities(&points).unwrap().gradient_deviation;
    for p in &points {
        let q = p.to_quaternions();
        let xi = random_unit_quaternion(&mut rng);
        let v = [xi.x, xi.y, xi.z];
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let label = ComplexStructureLabel::new([v[0] / norm, v[1] / norm, v[2] / norm]).unwrap();
        let ik = apply_complex_structure(&label, &sp1_killing(label.xi(), &q));
        let dev = q
            .iter()
            .zip(&ik)
            .map(|(a, b)| (*a + *b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        gradient = gradient.max(dev);
    }

    let mut homogeneity_exact = true;
    for p in &points {
        let r = [0.25, 0.5, 2.0, 4.0][rng.gen_range(0..4)];
        let (a, b) = (
            moment_map(&p.scaled(r)).components(),
            moment_map(p).components(),
        );
        homogeneity_exact &= (0..3).all(|k| a[k] == r * r * b[k]);
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        "hkalg identity suite",
        moment <= 1e-9 && permuting <= 1e-10 && rotating <= 1e-12 && gradient <= 1e-10 && homogeneity_exact && secs < 1.0,
        format!(
            "moment {moment:.2e}, permuting {permuting:.2e}, rotating {rotating:.2e}, gradient {gradient:.2e}, homogeneity exact {homogeneity_exact}, {secs:.3} s"
        ),
    );
}

#[test]
fn gauge_invariance_and_degree_quantization() {
    let g = t2_64();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let cfg = random_configuration(&g, 2, 2, 1.5, &mut rng).unwrap();
    let before = residuals(&cfg).unwrap().norms();
    let zero = vec![0.0; g.len()];
    let mut unitary = 0.0f64;
    for _ in 0..20 {
        let theta = random_gauge_phase(&g, &mut rng);
        let after = residuals(&gauge_apply(&cfg, &zero, &theta).unwrap())
            .unwrap()
            .norms();
        unitary = before
            .iter()
            .zip(&after)
            .map(|(a, b)| (a - b).abs())
            .fold(unitary, f64::max);
    }
    let small = TorusGrid::new(&[32, 32], &[2.0 * PI, 3.0]).unwrap();
    let mut quant = 0.0f64;
    for _ in 0..100 {
        let d = rng.gen_range(-3..=3);
        let a = (0..2)
            .map(|_| random_periodic(&small, &mut rng, 0.5))
            .collect();
        let conn = Connection::background(&small, d)
            .unwrap()
            .with_perturbation(&small, a)
            .unwrap();
        quant = quant.max((degree(&small, &conn) - d as f64).abs());
    }
    verdict(
        "gauge invariance",
        unitary <= 1e-11 && quant <= 1e-10,
        format!("20 unitary gauges: max residual shift {unitary:.2e}; 100 perturbations: max |deg - d| {quant:.2e}"),
    );
}
