//! The scale-indexed kernels behind the square functions:
//!
//! ```text
//! K_t(x) = avg_{B(x,t)} [ I_a(y) - sum_{j=0}^{N-1} (1/L_j) D^j I_a(x) |y-x|^{2j}
//!                         - (1/L_N) (D^N I_a)_{B(x,t)} |y-x|^{2N} ] dy,
//! ```
//!
//! with the `N = 0` case `K_t(x) = (I_a * chi_t)(x) - I_a(x)`. `D^j I_a` is
//! exact through the symbolic Laplacian of the power-log family; at
//! `alpha = 2N` the smooth part of `D^N I_a` vanishes and its Dirac part
//! contributes the closed-form `(-1)^N M_N t^{2N} / (L_N |B| t^n)` inside
//! the ball.
//!
//! Evaluation uses two routes:
//!
//! - `t <= r/2`: termwise-integrated Pizzetti series
//!   `K_t = sum_{j>N} (D^j I_a(x)/L_j) M_j t^{2j} - (M_N t^{2N}/L_N)
//!    sum_{j>=1} (D^{N+j} I_a(x)/L_j) M_j t^{2j}`,
//!   which is cancellation-free and exact to machine precision;
//! - otherwise: 1-D radial quadrature of the ball average over the sphere
//!   radius `s = |y|`, with geometric grading toward the singularity when
//!   the origin lies inside the ball.
//!
//! The two routes are regression-tested against each other at the switch.

use super::calibrate::FundamentalSolution;
use super::radial_fn::RadialPowerLog;
use crate::error::{Error, Result};
use crate::quad1d;
use crate::radial::{ball_volume, laplacian_power_l, moment_m};

/// Surface measure of the sphere of radius `s` intersected with `B(x, t)`,
/// `r = |x|`, in the partially covered range `|r - t| < s < r + t`.
fn partial_weight(dim: usize, s: f64, r: f64, t: f64) -> f64 {
    match dim {
        1 => 1.0,
        2 => {
            let c = ((s * s + r * r - t * t) / (2.0 * s * r)).clamp(-1.0, 1.0);
            2.0 * s * c.acos()
        }
        3 => {
            let num = t * t - (r - s) * (r - s);
            std::f64::consts::PI * s * num.max(0.0) / r
        }
        _ => unreachable!(),
    }
}

fn full_weight(dim: usize, s: f64) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI * s,
        3 => 4.0 * std::f64::consts::PI * s * s,
        _ => unreachable!(),
    }
}

/// Integrate over `[lo, hi]` under `s = m - a cos(phi)`: the square-root
/// behavior the spherical-cap weights have at the range endpoints becomes
/// analytic in `phi`.
fn cos_substituted(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, rel: f64) -> f64 {
    let m = 0.5 * (lo + hi);
    let a = 0.5 * (hi - lo);
    let g = |phi: f64| f(m - a * phi.cos()) * a * phi.sin();
    quad1d::adaptive(&g, 0.0, std::f64::consts::PI, rel, 0.0).0
}

/// `int_{B(x,t)} phi(|y|) dy` for a family member, `r = |x|`.
pub(crate) fn ball_integral_radial(
    term: &RadialPowerLog,
    dim: usize,
    r: f64,
    t: f64,
) -> f64 {
    if term.is_zero() {
        return 0.0;
    }
    let rel = 1e-11;
    let mut total = 0.0;
    if r < t {
        // fully covered spheres; integrand ~ s^{beta + n - 1} near zero
        let f = |s: f64| term.eval(s) * full_weight(dim, s);
        total += quad1d::integrate_graded_lower(&f, 0.0, t - r, rel, 1e-15, 60);
    }
    let lo = (r - t).abs();
    let hi = r + t;
    let f = |s: f64| term.eval(s) * partial_weight(dim, s, r, t);
    if lo < 1e-14 * hi {
        // tangent configuration: grade toward the singularity, then a
        // smooth substituted piece up to the outer radius
        let split = hi / 8.0;
        total += quad1d::integrate_graded_lower(&f, 0.0, split, rel, 1e-15, 60);
        total += cos_substituted(&f, split, hi, rel);
    } else {
        total += cos_substituted(&f, lo, hi, rel);
    }
    total
}

/// Ball mean of a family member over `B(x, t)`.
pub(crate) fn ball_mean_radial(term: &RadialPowerLog, dim: usize, r: f64, t: f64) -> f64 {
    ball_integral_radial(term, dim, r, t) / (ball_volume(dim) * t.powi(dim as i32))
}

/// Everything the kernel assembly needs to know about the radial function.
pub(crate) struct KernelData<'a> {
    pub dim: usize,
    pub alpha: f64,
    /// `laps[j]` is the smooth part of `Delta^j phi`.
    pub laps: &'a [RadialPowerLog],
    /// `Delta^N phi` carries a Dirac part `(-1)^N delta` (`alpha = 2N`).
    pub dirac_at_n: bool,
}

impl<'a> KernelData<'a> {
    pub fn from_solution(fs: &'a FundamentalSolution) -> Self {
        let n_corr = (fs.alpha() / 2.0).floor() as u32;
        let dirac = n_corr >= 1 && (fs.alpha() - 2.0 * n_corr as f64).abs() < 1e-9;
        // Vec of precomputed laplacians lives inside the solution.
        KernelData {
            dim: fs.dim(),
            alpha: fs.alpha(),
            laps: fs.laplacian_powers(),
            dirac_at_n: dirac,
        }
    }

    fn corrections(&self) -> usize {
        (self.alpha / 2.0).floor() as usize
    }
}

const SERIES_MAX: usize = 60;

/// Tail `sum_{j >= start} (laps[j](r) / L_{j - offset}) M_{j - offset} t^{2(j - offset)}`
/// with the reindexing used by the two kernel pieces.
fn pizzetti_tail(
    data: &KernelData,
    r: f64,
    t: f64,
    start: usize,
    offset: usize,
) -> Option<f64> {
    let mut acc = 0.0;
    let mut converged = false;
    for j in start..SERIES_MAX.min(data.laps.len()) {
        let jj = (j - offset) as u32;
        let coef = moment_m(data.dim, jj) / laplacian_power_l(data.dim, jj);
        let term = data.laps[j].eval(r) * coef * t.powi(2 * jj as i32);
        acc += term;
        if j > start + 2 && term.abs() <= 1e-17 * acc.abs().max(1e-280) {
            converged = true;
            break;
        }
    }
    converged.then_some(acc)
}

/// `K_t` at radius `r = |x| > 0`.
pub(crate) fn kernel_at_radius(data: &KernelData, r: f64, t: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "kernel argument radius must be positive, got {r}"
        )));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "kernel scale must be positive, got {t}"
        )));
    }
    let n = data.corrections();

    // Series route, valid strictly inside the singularity-free ball.
    if t <= 0.5 * r {
        let head = pizzetti_tail(data, r, t, n + 1, 0);
        if n == 0 {
            if let Some(h) = head {
                return Ok(h);
            }
        } else if let Some(h) = head {
            let inner = if data.dirac_at_n {
                Some(0.0) // smooth part of Delta^N phi vanishes; chi term is 0 for t < r
            } else {
                pizzetti_tail(data, r, t, n + 1, n)
            };
            if let Some(i2) = inner {
                let mn = moment_m(data.dim, n as u32);
                let ln = laplacian_power_l(data.dim, n as u32);
                return Ok(h - mn * t.powi(2 * n as i32) / ln * i2);
            }
        }
        // fall through to quadrature on the rare non-converged case
    }

    let phi = &data.laps[0];
    let mean_phi = ball_mean_radial(phi, data.dim, r, t);
    if n == 0 {
        return Ok(mean_phi - phi.eval(r));
    }
    let mut out = mean_phi;
    for j in 0..n {
        let mj = moment_m(data.dim, j as u32);
        let lj = laplacian_power_l(data.dim, j as u32);
        out -= mj * t.powi(2 * j as i32) / lj * data.laps[j].eval(r);
    }
    let mn = moment_m(data.dim, n as u32);
    let ln = laplacian_power_l(data.dim, n as u32);
    let last_mean = if data.dirac_at_n {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        if r < t {
            sign / (ball_volume(data.dim) * t.powi(data.dim as i32))
        } else {
            0.0
        }
    } else {
        ball_mean_radial(&data.laps[n], data.dim, r, t)
    };
    out -= mn * t.powi(2 * n as i32) / ln * last_mean;
    Ok(out)
}

/// The kernel `K_t(x)` for the fundamental solution of
/// `(-Delta)^{alpha/2}` in dimension `dim`. `x` must be nonzero: the
/// pointwise correction terms are singular at the origin.
pub fn kernel_k(dim: usize, alpha: f64, x: &[f64], t: f64) -> Result<f64> {
    if x.len() != dim {
        return Err(Error::InvalidParameter(format!(
            "point has {} coordinates, expected {dim}",
            x.len()
        )));
    }
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r == 0.0 {
        return Err(Error::InvalidParameter(
            "kernel undefined at the origin".into(),
        ));
    }
    let fs = FundamentalSolution::cached(dim, alpha)?;
    kernel_at_radius(&KernelData::from_solution(&fs), r, t)
}
