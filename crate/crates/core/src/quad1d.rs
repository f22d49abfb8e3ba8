//! One-dimensional quadrature building blocks shared by the radial,
//! constants and kernel modules: fixed-order Gauss-Legendre panels, an
//! adaptive bisection scheme, and geometric grading toward an endpoint
//! singularity.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// Legendre polynomial value and derivative at `x`.
fn legendre_eval(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn compute_gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x =
            (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_eval(n, x);
            let dx = -p / dp;
            x += dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_eval(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Cached Gauss-Legendre rule on `[-1, 1]`.
pub(crate) fn gauss_legendre(n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<Mutex<HashMap<usize, &'static (Vec<f64>, Vec<f64>)>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("gauss cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| Box::leak(Box::new(compute_gauss_legendre(n))))
}

/// Fixed-order Gauss-Legendre integral of `f` over `[a, b]`.
pub(crate) fn integrate_gl(f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(n);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut sum = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        sum += w * f(c + h * x);
    }
    sum * h
}

/// Adaptive bisection with 15-point Gauss panels.
///
/// Returns `(value, error_estimate)`. The error estimate is the sum of the
/// accepted panel discrepancies; it is a heuristic, not a bound.
pub(crate) fn adaptive(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> (f64, f64) {
    const ORDER: usize = 15;
    const MAX_DEPTH: usize = 48;
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: usize,
        err_acc: &mut f64,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let left = integrate_gl(f, a, m, ORDER);
        let right = integrate_gl(f, m, b, ORDER);
        let diff = (left + right - whole).abs();
        if diff <= tol || depth >= MAX_DEPTH {
            *err_acc += diff;
            return left + right;
        }
        recurse(f, a, m, left, 0.5 * tol, depth + 1, err_acc)
            + recurse(f, m, b, right, 0.5 * tol, depth + 1, err_acc)
    }
    let whole = integrate_gl(f, a, b, ORDER);
    let tol = abs_tol.max(rel_tol * whole.abs());
    let mut err = 0.0;
    let value = recurse(f, a, b, whole, tol.max(1e-300), 0, &mut err);
    (value, err)
}

/// Integral of `f` over `[a, b]` with geometric panels accumulating toward
/// `a`, for integrands with an (integrable) endpoint singularity at `a`.
///
/// Panels are `[a + (b-a) q^{m+1}, a + (b-a) q^m]` with ratio `q = 1/2`;
/// iteration stops when a panel contributes less than `tail_tol` times the
/// accumulated panel *magnitudes* (immune to sign cancellation), or after
/// `max_panels`.
pub(crate) fn integrate_graded_lower(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    tail_tol: f64,
    max_panels: usize,
) -> f64 {
    let span = b - a;
    if span <= 0.0 {
        return 0.0;
    }
    let mut total = 0.0;
    let mut magnitude = 0.0;
    let mut hi = b;
    for m in 1..=max_panels {
        let lo = a + span * 0.5f64.powi(m as i32);
        let (v, _) = adaptive(f, lo, hi, rel_tol, 0.0);
        total += v;
        magnitude += v.abs();
        if m > 4 && v.abs() <= tail_tol * magnitude.max(1e-300) {
            break;
        }
        hi = lo;
    }
    total
}

/// Midpoint rule on a geometric grid: approximates `int_a^b f(t) dt` using
/// `k` log-spaced panels. Exactness improves as `O((log step)^2)` for smooth
/// integrands in the log variable.
pub(crate) fn log_midpoint(f: &dyn Fn(f64) -> f64, a: f64, b: f64, k: usize) -> f64 {
    let ua = a.ln();
    let ub = b.ln();
    let du = (ub - ua) / k as f64;
    let mut sum = 0.0;
    for i in 0..k {
        let t = (ua + (i as f64 + 0.5) * du).exp();
        sum += f(t) * t;
    }
    sum * du
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_exact_on_polynomials() {
        // GL15 is exact through degree 29.
        let f = |x: f64| 3.0 * x.powi(7) - x.powi(4) + 2.0;
        let v = integrate_gl(&f, -1.0, 2.0, 15);
        let exact = 3.0 * (2.0f64.powi(8) - 1.0) / 8.0 - (2.0f64.powi(5) + 1.0) / 5.0 + 2.0 * 3.0;
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn adaptive_handles_oscillation() {
        let f = |x: f64| (40.0 * x).sin();
        let (v, _) = adaptive(&f, 0.0, 3.0, 1e-12, 1e-14);
        let exact = (1.0 - (120.0f64).cos()) / 40.0;
        assert!((v - exact).abs() < 1e-11);
    }

    #[test]
    fn graded_handles_endpoint_singularity() {
        // int_0^1 x^{-1/2} dx = 2.
        let f = |x: f64| x.powf(-0.5);
        let v = integrate_graded_lower(&f, 0.0, 1.0, 1e-12, 1e-14, 200);
        assert!((v - 2.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn log_midpoint_weight_sum() {
        // f = 1/t integrates dt/t: sum of weights must be exactly log(b/a).
        let v = log_midpoint(&|t| 1.0 / t, 0.01, 1.0, 64);
        assert!((v - 100.0f64.ln()).abs() < 1e-12);
    }
}
