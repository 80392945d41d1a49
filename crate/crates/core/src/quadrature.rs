//! Gauss–Legendre rules and adaptive panel integration of complex integrands.

use std::sync::OnceLock;

use num_complex::Complex;

use crate::scalar::{lit, Real};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// computed by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

pub(crate) fn gl16() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

pub(crate) fn gl4() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(4))
}

/// One fixed-order panel `∫_{lo}^{hi} f(t) dt`.
pub fn panel<T: Real, F>(rule: &[(f64, f64)], lo: T, hi: T, f: &mut F) -> Complex<T>
where
    F: FnMut(T) -> Complex<T>,
{
    let half = (hi - lo) / lit(2.0);
    let mid = (hi + lo) / lit(2.0);
    let mut acc = Complex::new(T::zero(), T::zero());
    for &(x, w) in rule {
        acc = acc + f(mid + half * lit(x)) * lit::<T>(w);
    }
    acc * half
}

/// Adaptive bisection over 16-point panels until halves agree to `tol`
/// (absolute, scaled by the panel fraction) or `max_depth` is reached.
pub fn adaptive<T: Real, F>(lo: T, hi: T, tol: T, max_depth: u32, f: &mut F) -> Complex<T>
where
    F: FnMut(T) -> Complex<T>,
{
    let whole = panel(gl16(), lo, hi, f);
    adaptive_rec(lo, hi, whole, tol, max_depth, f)
}

fn adaptive_rec<T: Real, F>(lo: T, hi: T, whole: Complex<T>, tol: T, depth: u32, f: &mut F) -> Complex<T>
where
    F: FnMut(T) -> Complex<T>,
{
    let mid = (lo + hi) / lit(2.0);
    let left = panel(gl16(), lo, mid, f);
    let right = panel(gl16(), mid, hi, f);
    let split = left + right;
    if depth == 0 || (split - whole).norm() <= tol {
        return split;
    }
    let half_tol = tol / lit(2.0);
    adaptive_rec(lo, mid, left, half_tol, depth - 1, f) + adaptive_rec(mid, hi, right, half_tol, depth - 1, f)
}
