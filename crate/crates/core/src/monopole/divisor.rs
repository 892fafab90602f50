use super::{Configuration, DEFAULT_EPS_Z};
use crate::error::{Error, Result};
use rustfft::num_complex::Complex64;
use std::collections::VecDeque;
use std::f64::consts::PI;

/// Zeros of `α` in the `x₁x₂` plane (the slice `x₃ = x₄ = 0` on T⁴).
#[derive(Debug, Clone, PartialEq)]
pub struct Divisor {
    /// Cluster centroids `(x₁, x₂)`, reduced to the fundamental domain.
    pub points: Vec<Vec<f64>>,
    pub multiplicities: Vec<i64>,
    pub total: i64,
    /// Sum of the phase change around every plaquette; `2π·total`.
    pub winding_sum: f64,
}

impl Divisor {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x1,x2,multiplicity\n");
        for (p, m) in self.points.iter().zip(&self.multiplicities) {
            s.push_str(&format!("{:.12e},{:.12e},{m}\n", p[0], p[1]));
        }
        s
    }
}

pub fn extract_divisor(cfg: &Configuration) -> Result<Divisor> {
    extract_divisor_with(cfg, DEFAULT_EPS_Z)
}

fn wrap(phase: f64) -> f64 {
    let p = phase.rem_euclid(2.0 * PI);
    if p > PI {
        p - 2.0 * PI
    } else {
        p
    }
}

/// Plaquette winding numbers of `α`, clustered over 8-connected flagged
/// cells. A cell is flagged when it winds or when a corner has
/// `|α|² < eps_z · max|α|²`. Clusters whose windings have mixed signs are
/// rejected; windings of cells touching a near-zero corner count towards
/// the cluster total but not towards that test.
pub fn extract_divisor_with(cfg: &Configuration, eps_z: f64) -> Result<Divisor> {
    if cfg.n() != 1 {
        return Err(Error::InvalidInput(format!(
            "divisor extraction needs a classical pair, got n = {}",
            cfg.n()
        )));
    }
    let grid = &cfg.grid;
    let (n1, n2) = (grid.sizes()[0], grid.sizes()[1]);
    let (l1, l2) = (grid.lengths()[0], grid.lengths()[1]);
    let (h1, h2) = (grid.spacing(0), grid.spacing(1));
    let rest = grid.len() / (n1 * n2);
    let d = cfg.degree() as f64;
    let alpha = cfg.alpha();
    // corner value with the x₁ transition applied past the last row
    let at = |i: usize, j: usize| -> Complex64 {
        let v = alpha[((i % n1) * n2 + j % n2) * rest];
        if i >= n1 {
            v * Complex64::from_polar(1.0, 2.0 * PI * d * j as f64 * h2 / l2)
        } else {
            v
        }
    };
    let peak = (0..n1 * n2)
        .map(|p| alpha[p * rest].norm_sqr())
        .fold(0.0, f64::max);
    let floor = eps_z * peak;

    // edges are evaluated in the +x₁ / +x₂ direction only, so each one
    // enters neighbouring plaquettes with opposite signs and the cluster
    // sums telescope to boundary windings
    let edge = |u: Complex64, v: Complex64| wrap(v.arg() - u.arg());
    let mut winding = vec![0i64; n1 * n2];
    let mut flagged = vec![false; n1 * n2];
    let mut reliable = vec![true; n1 * n2];
    let mut winding_sum = 0.0;
    for i in 0..n1 {
        for j in 0..n2 {
            let c = [at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)];
            let loop_phase =
                edge(c[0], c[1]) + edge(c[1], c[2]) - edge(c[3], c[2]) - edge(c[0], c[3]);
            winding_sum += loop_phase;
            let w = (loop_phase / (2.0 * PI)).round() as i64;
            let small = c.iter().any(|z| z.norm_sqr() < floor);
            winding[i * n2 + j] = w;
            flagged[i * n2 + j] = w != 0 || small;
            reliable[i * n2 + j] = !small;
        }
    }

    let mut seen = vec![false; n1 * n2];
    let mut points = Vec::new();
    let mut multiplicities = Vec::new();
    for start in 0..n1 * n2 {
        if !flagged[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        // BFS, unwrapping cell offsets relative to the first cell
        let mut queue = VecDeque::from([(start, 0i64, 0i64)]);
        let (si, sj) = ((start / n2) as i64, (start % n2) as i64);
        let (mut sx, mut sy, mut count) = (0.0, 0.0, 0usize);
        let (mut pos, mut neg, mut total) = (0i64, 0i64, 0i64);
        while let Some((cell, oi, oj)) = queue.pop_front() {
            sx += (si + oi) as f64;
            sy += (sj + oj) as f64;
            count += 1;
            total += winding[cell];
            // a near-zero corner has no meaningful phase of its own
            match winding[cell] {
                w if w > 0 && reliable[cell] => pos += w,
                w if w < 0 && reliable[cell] => neg += w,
                _ => {}
            }
            let (ci, cj) = ((cell / n2) as i64, (cell % n2) as i64);
            for di in -1..=1i64 {
                for dj in -1..=1i64 {
                    let ni = (ci + di).rem_euclid(n1 as i64) as usize;
                    let nj = (cj + dj).rem_euclid(n2 as i64) as usize;
                    let next = ni * n2 + nj;
                    if flagged[next] && !seen[next] {
                        seen[next] = true;
                        queue.push_back((next, oi + di, oj + dj));
                    }
                }
            }
        }
        if pos != 0 && neg != 0 {
            return Err(Error::ZeroClusterAmbiguous(format!(
                "cluster near cell ({si}, {sj}) has windings of both signs ({pos}, {neg})"
            )));
        }
        let m = total;
        if m == 0 {
            continue;
        }
        // cell centres sit half a step inside the plaquette
        let x = ((sx / count as f64 + 0.5) * h1).rem_euclid(l1);
        let y = ((sy / count as f64 + 0.5) * h2).rem_euclid(l2);
        points.push(vec![x, y]);
        multiplicities.push(m);
    }
    let total = multiplicities.iter().sum();
    Ok(Divisor {
        points,
        multiplicities,
        total,
        winding_sum,
    })
}
