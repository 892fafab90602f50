//! FFT plumbing on row-major grids (last axis fastest).

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Direction {
    Forward,
    Inverse,
}

pub(crate) fn plan(n: usize, dir: Direction) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        match dir {
            Direction::Forward => p.plan_fft_forward(n),
            Direction::Inverse => p.plan_fft_inverse(n),
        }
    })
}

/// In-place 1-D transform; the inverse is normalised by `1/n`.
pub(crate) fn fft_line(buf: &mut [Complex64], dir: Direction) {
    let n = buf.len();
    plan(n, dir).process(buf);
    if dir == Direction::Inverse {
        let s = 1.0 / n as f64;
        buf.iter_mut().for_each(|z| *z *= s);
    }
}

/// Angular wavenumbers `2π k / L` for signed `k`, with the Nyquist mode
/// set to zero so first derivatives stay real and anti-self-adjoint.
pub(crate) fn wavenumbers(n: usize, length: f64) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let k = signed_mode(j, n);
            if n.is_multiple_of(2) && j == n / 2 {
                0.0
            } else {
                2.0 * PI * k as f64 / length
            }
        })
        .collect()
}

/// Signed representative of mode index `j` in `[-n/2, n/2)`.
pub(crate) fn signed_mode(j: usize, n: usize) -> i64 {
    let j = j as i64;
    let n = n as i64;
    if j >= n / 2 {
        j - n
    } else {
        j
    }
}

pub(crate) fn strides(sizes: &[usize]) -> Vec<usize> {
    let mut s = vec![1; sizes.len()];
    for k in (0..sizes.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * sizes[k + 1];
    }
    s
}

/// Apply `op` to every line of `data` along `axis`.
pub(crate) fn for_each_line<F>(data: &mut [Complex64], sizes: &[usize], axis: usize, mut op: F)
where
    F: FnMut(&mut [Complex64]),
{
    let st = strides(sizes);
    let n = sizes[axis];
    let stride = st[axis];
    let outer = data.len() / (n * stride);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for o in 0..outer {
        for inner in 0..stride {
            let base = o * n * stride + inner;
            for (j, b) in buf.iter_mut().enumerate() {
                *b = data[base + j * stride];
            }
            op(&mut buf);
            for (j, b) in buf.iter().enumerate() {
                data[base + j * stride] = *b;
            }
        }
    }
}

pub(crate) fn fft_axis(data: &mut [Complex64], sizes: &[usize], axis: usize, dir: Direction) {
    for_each_line(data, sizes, axis, |line| fft_line(line, dir));
}

pub(crate) fn fftn(data: &mut [Complex64], sizes: &[usize], dir: Direction) {
    for axis in 0..sizes.len() {
        fft_axis(data, sizes, axis, dir);
    }
}

/// Multi-index of a flat position.
pub(crate) fn unravel(mut idx: usize, sizes: &[usize]) -> Vec<usize> {
    let mut out = vec![0; sizes.len()];
    for k in (0..sizes.len()).rev() {
        out[k] = idx % sizes[k];
        idx /= sizes[k];
    }
    out
}

/// Multiply the spectrum by a real symbol built from per-axis wavenumbers.
pub(crate) fn apply_symbol<F>(data: &mut [Complex64], sizes: &[usize], lengths: &[f64], symbol: F)
where
    F: Fn(&[f64]) -> Complex64,
{
    let ks: Vec<Vec<f64>> = sizes
        .iter()
        .zip(lengths)
        .map(|(&n, &l)| wavenumbers(n, l))
        .collect();
    fftn(data, sizes, Direction::Forward);
    let mut kv = vec![0.0; sizes.len()];
    for (idx, z) in data.iter_mut().enumerate() {
        let m = unravel(idx, sizes);
        for a in 0..sizes.len() {
            kv[a] = ks[a][m[a]];
        }
        *z *= symbol(&kv);
    }
    fftn(data, sizes, Direction::Inverse);
}

/// Spectral first derivative along a periodic `axis`.
pub(crate) fn derivative(
    data: &[Complex64],
    sizes: &[usize],
    lengths: &[f64],
    axis: usize,
) -> Vec<Complex64> {
    let ks = wavenumbers(sizes[axis], lengths[axis]);
    let mut out = data.to_vec();
    for_each_line(&mut out, sizes, axis, |line| {
        fft_line(line, Direction::Forward);
        for (z, k) in line.iter_mut().zip(&ks) {
            *z *= Complex64::new(0.0, *k);
        }
        fft_line(line, Direction::Inverse);
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavenumbers_zero_nyquist() {
        let k = wavenumbers(8, 2.0 * PI);
        assert_eq!(k, vec![0.0, 1.0, 2.0, 3.0, 0.0, -3.0, -2.0, -1.0]);
    }

    #[test]
    fn strides_and_unravel() {
        let sizes = [4, 6, 8];
        assert_eq!(strides(&sizes), vec![48, 8, 1]);
        assert_eq!(unravel(48 + 3 * 8 + 5, &sizes), vec![1, 3, 5]);
    }

    #[test]
    fn derivative_of_sine() {
        let sizes = [8, 16];
        let lengths = [1.0, 3.0];
        let data: Vec<Complex64> = (0..128)
            .map(|i| {
                let x2 = (i % 16) as f64 * 3.0 / 16.0;
                Complex64::new((2.0 * PI * 2.0 * x2 / 3.0).sin(), 0.0)
            })
            .collect();
        let d = derivative(&data, &sizes, &lengths, 1);
        for (i, z) in d.iter().enumerate() {
            let x2 = (i % 16) as f64 * 3.0 / 16.0;
            let k = 2.0 * PI * 2.0 / 3.0;
            assert!((z.re - k * (k * x2).cos()).abs() < 1e-12);
            assert!(z.im.abs() < 1e-12);
        }
    }
}
