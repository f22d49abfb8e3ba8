//! The radial Fourier profile of the normalized ball indicator and the
//! ball-moment / iterated-Laplacian constants.
//!
//! `F(tau)` is the Fourier transform of `chi = 1_{B(0,1)} / |B(0,1)|`
//! evaluated at radius `tau`, normalized so `F(0) = 1`. Convolving a field
//! with the rescaled indicator `chi_t` multiplies Fourier coefficients by
//! `F(t |xi|)`, which is how every spectral ball mean in this crate is
//! computed.
//!
//! Branch layout per dimension (switch points chosen where the branches
//! agree to 1e-11, see tests):
//!
//! - `n = 1`: Maclaurin series for `tau <= 2`, `sin(tau)/tau` beyond.
//! - `n = 2`: Maclaurin series for `tau <= 14`, Hankel asymptotics of
//!   `2 J_1(tau)/tau` beyond.
//! - `n = 3`: Maclaurin series for `tau <= 2`,
//!   `3 (sin tau - tau cos tau)/tau^3` beyond.

use crate::error::{Error, Result};

/// Volume of the unit ball in `R^dim`.
pub fn ball_volume(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI / 3.0,
        _ => panic!("dim {dim} out of range"),
    }
}

/// Ball moment `M_j`: the mean of `|h|^{2j}` over the unit ball, `n/(n+2j)`.
pub fn moment_m(dim: usize, j: u32) -> f64 {
    dim as f64 / (dim as f64 + 2.0 * j as f64)
}

/// `L_j = Delta^j (|x|^{2j})`, computed by iterating
/// `Delta |x|^{2m} = 2m (2m + n - 2) |x|^{2m-2}`.
pub fn laplacian_power_l(dim: usize, j: u32) -> f64 {
    let n = dim as f64;
    let mut l = 1.0;
    for m in 1..=j {
        let tm = 2.0 * m as f64;
        l *= tm * (tm + n - 2.0);
    }
    l
}

/// The pair `(M_j, L_j)` for one dimension and order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallConstants {
    pub dim: usize,
    pub j: u32,
    pub m_j: f64,
    pub l_j: f64,
}

impl BallConstants {
    pub fn new(dim: usize, j: u32) -> Self {
        Self {
            dim,
            j,
            m_j: moment_m(dim, j),
            l_j: laplacian_power_l(dim, j),
        }
    }

    /// `M_j / L_j`, the coefficient the multiplier deficit is built from.
    pub fn ratio(&self) -> f64 {
        self.m_j / self.l_j
    }
}

/// Signed Maclaurin coefficient `s_m = (-1)^m M_m / L_m` of the profile:
/// `F(tau) = sum_m s_m tau^{2m}`. Satisfies
/// `s_m = -s_{m-1} / (2m (n + 2m))`.
pub(crate) fn profile_series_coeff(dim: usize, m: u32) -> f64 {
    let n = dim as f64;
    let mut s = 1.0;
    for i in 1..=m {
        s = -s / ((2.0 * i as f64) * (n + 2.0 * i as f64));
    }
    s
}

fn profile_series(dim: usize, tau: f64) -> f64 {
    let n = dim as f64;
    let t2 = tau * tau;
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..=60u32 {
        term *= -t2 / ((2.0 * m as f64) * (n + 2.0 * m as f64));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-30) {
            break;
        }
    }
    sum
}

/// `J_nu(x)` for large `x` via the Hankel asymptotic expansion. Terms are
/// generated by recurrence and truncated at the smallest one.
fn bessel_j_asymptotic(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let omega = x - nu * std::f64::consts::FRAC_PI_2 - std::f64::consts::FRAC_PI_4;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0; // a_k / x^k
    let mut prev = f64::INFINITY;
    for k in 0..30u32 {
        let kf = k as f64;
        a *= (mu - (2.0 * kf + 1.0) * (2.0 * kf + 1.0)) / (8.0 * (kf + 1.0) * x);
        let mag = a.abs();
        if mag >= prev || mag < 1e-18 {
            break;
        }
        prev = mag;
        let term_index = k + 1;
        if term_index % 2 == 0 {
            // contributes to P with sign (-1)^{k/2}
            let sign = if (term_index / 2) % 2 == 0 { 1.0 } else { -1.0 };
            p += sign * a;
        } else {
            let sign = if ((term_index - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
            q += sign * a;
        }
    }
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (omega.cos() * p - omega.sin() * q)
}

fn profile_closed(dim: usize, tau: f64) -> f64 {
    match dim {
        1 => tau.sin() / tau,
        2 => 2.0 * bessel_j_asymptotic(1.0, tau) / tau,
        3 => 3.0 * (tau.sin() - tau * tau.cos()) / (tau * tau * tau),
        _ => unreachable!(),
    }
}

fn series_switch(dim: usize) -> f64 {
    match dim {
        2 => 14.0,
        _ => 2.0,
    }
}

/// The radial profile `F(tau)` for `dim` in `{1, 2, 3}`, `tau >= 0`.
pub fn ball_profile(dim: usize, tau: f64) -> Result<f64> {
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidParameter(format!("dim {dim} not in {{1,2,3}}")));
    }
    if !tau.is_finite() || tau < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "profile radius must be finite and >= 0, got {tau}"
        )));
    }
    if tau <= series_switch(dim) {
        Ok(profile_series(dim, tau))
    } else {
        Ok(profile_closed(dim, tau))
    }
}

/// Profile evaluator bound to one dimension; `eval` panics only on the
/// invalid inputs `ball_profile` rejects.
#[derive(Debug, Clone, Copy)]
pub struct RadialProfile {
    dim: usize,
}

impl RadialProfile {
    pub fn new(dim: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidParameter(format!("dim {dim} not in {{1,2,3}}")));
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, tau: f64) -> f64 {
        ball_profile(self.dim, tau).expect("validated dim; tau checked by caller")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad1d::integrate_gl;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Direct quadrature of the ball Fourier integral through the 1-D slice
    /// formula: F(tau) = int_{-1}^{1} cos(tau s) w_n(s) ds with
    /// w_n(s) = |B_{n-1}| (1 - s^2)^{(n-1)/2} / |B_n|. For n = 2 the
    /// substitution s = sin(theta) removes the sqrt endpoint singularity.
    fn profile_oracle(dim: usize, tau: f64) -> f64 {
        let g: Box<dyn Fn(f64) -> f64> = match dim {
            1 => Box::new(move |s: f64| (tau * s).cos() * 0.5),
            2 => Box::new(move |th: f64| {
                2.0 / std::f64::consts::PI * (tau * th.sin()).cos() * th.cos() * th.cos()
            }),
            3 => Box::new(move |s: f64| (tau * s).cos() * 0.75 * (1.0 - s * s)),
            _ => unreachable!(),
        };
        let half = if dim == 2 {
            std::f64::consts::FRAC_PI_2
        } else {
            1.0
        };
        // Panel count scaled to the oscillation; GL32 per panel.
        let panels = 4 + (tau / 2.0).ceil() as usize;
        let mut total = 0.0;
        for i in 0..panels {
            let a = -half + 2.0 * half * i as f64 / panels as f64;
            let b = -half + 2.0 * half * (i + 1) as f64 / panels as f64;
            total += integrate_gl(&g, a, b, 32);
        }
        total
    }

    #[test]
    fn profile_at_zero_is_one() {
        for dim in 1..=3 {
            assert_eq!(ball_profile(dim, 0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn profile_dim1_vanishes_at_pi() {
        let oracle = profile_oracle(1, std::f64::consts::PI);
        let val = ball_profile(1, std::f64::consts::PI).unwrap();
        assert!(oracle.abs() < 1e-12);
        assert!((val - oracle).abs() < 1e-12);
    }

    #[test]
    fn profile_dim3_small_tau_curvature() {
        // F(tau) = 1 - tau^2 * mean(x1^2)/2 + O(tau^4) with mean(x1^2) = 1/5.
        let tau = 0.01f64;
        let val = ball_profile(3, tau).unwrap();
        assert!((val - (1.0 - tau * tau / 10.0)).abs() < 1e-9);
        // quadrature oracle for the same moment
        let m = integrate_gl(&|s: f64| s * s * 0.75 * (1.0 - s * s), -1.0, 1.0, 32);
        assert!((m - 0.2).abs() < 1e-14);
    }

    #[test]
    fn profile_matches_quadrature_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for dim in 1..=3 {
            for _ in 0..50 {
                let tau: f64 = rng.gen_range(0.0..50.0);
                let val = ball_profile(dim, tau).unwrap();
                let oracle = profile_oracle(dim, tau);
                assert!(
                    (val - oracle).abs() < 1e-8,
                    "dim {dim} tau {tau}: {val} vs {oracle}"
                );
            }
        }
    }

    #[test]
    fn series_and_closed_branches_agree_at_switch() {
        for dim in 1..=3 {
            let sw = series_switch(dim);
            for tau in [sw * 0.98, sw, sw * 1.02] {
                let s = profile_series(dim, tau);
                let c = profile_closed(dim, tau);
                assert!(
                    (s - c).abs() < 1e-11,
                    "dim {dim} tau {tau}: series {s} closed {c}"
                );
            }
        }
    }

    #[test]
    fn profile_rejects_bad_tau() {
        assert!(ball_profile(1, -0.5).is_err());
        assert!(ball_profile(2, f64::NAN).is_err());
        assert!(ball_profile(3, f64::INFINITY).is_err());
        assert!(ball_profile(0, 1.0).is_err());
    }

    #[test]
    fn profile_bounded_and_decaying() {
        for dim in 1..=3 {
            let mut sup_tau_f: f64 = 0.0;
            for i in 0..4000 {
                let tau = 0.05 * (i as f64 + 1.0);
                let f = ball_profile(dim, tau).unwrap();
                assert!(f.abs() <= 1.0 + 1e-12);
                if tau >= 1.0 {
                    sup_tau_f = sup_tau_f.max(tau * f.abs());
                }
            }
            // |F(tau)| <= C / tau with a finite measured constant.
            assert!(sup_tau_f.is_finite() && sup_tau_f < 10.0, "C = {sup_tau_f}");
        }
    }

    #[test]
    fn moments_match_radial_integral_oracle() {
        // M_j = int_0^1 r^{2j} r^{n-1} dr / int_0^1 r^{n-1} dr
        for dim in 1..=3usize {
            for j in 0..=4u32 {
                let num = integrate_gl(
                    &|r: f64| r.powi(2 * j as i32) * r.powi(dim as i32 - 1),
                    0.0,
                    1.0,
                    32,
                );
                let den = integrate_gl(&|r: f64| r.powi(dim as i32 - 1), 0.0, 1.0, 32);
                let oracle = num / den;
                assert!((moment_m(dim, j) - oracle).abs() < 1e-13);
            }
        }
        assert_eq!(moment_m(3, 0), 1.0);
        assert!((moment_m(3, 1) - 0.6).abs() < 1e-15);
        assert!((moment_m(1, 2) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn moments_match_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dim in 1..=3usize {
            for j in [1u32, 2] {
                let mut sum = 0.0;
                let n_samples = 400_000;
                let mut count = 0;
                while count < n_samples {
                    let mut x = [0.0f64; 3];
                    let mut r2 = 0.0;
                    for v in x.iter_mut().take(dim) {
                        *v = rng.gen_range(-1.0..1.0);
                        r2 += *v * *v;
                    }
                    if r2 <= 1.0 {
                        sum += r2.powi(j as i32);
                        count += 1;
                    }
                }
                let mc = sum / n_samples as f64;
                assert!(
                    (mc - moment_m(dim, j)).abs() < 1e-3 * 3.0,
                    "dim {dim} j {j}: {mc} vs {}",
                    moment_m(dim, j)
                );
            }
        }
    }

    /// Iterated finite-difference Laplacian of |x|^{2j} at a generic point.
    fn fd_iterated_laplacian(dim: usize, j: u32) -> f64 {
        let h = 1e-2;
        let x0 = [0.31, -0.17, 0.23];
        // Evaluate Delta^j f on a shrinking stencil recursively.
        fn lap(
            f: &dyn Fn(&[f64; 3]) -> f64,
            x: &[f64; 3],
            dim: usize,
            h: f64,
            order: u32,
        ) -> f64 {
            if order == 0 {
                return f(x);
            }
            let mut acc = 0.0;
            for a in 0..dim {
                let mut xp = *x;
                let mut xm = *x;
                xp[a] += h;
                xm[a] -= h;
                acc += lap(f, &xp, dim, h, order - 1) + lap(f, &xm, dim, h, order - 1)
                    - 2.0 * lap(f, x, dim, h, order - 1);
            }
            acc / (h * h)
        }
        let f = move |x: &[f64; 3]| {
            let r2: f64 = x[..dim].iter().map(|v| v * v).sum();
            r2.powi(j as i32)
        };
        lap(&f, &x0, dim, h, j)
    }

    #[test]
    fn laplacian_powers() {
        for dim in 1..=3usize {
            assert_eq!(laplacian_power_l(dim, 0), 1.0);
            assert_eq!(laplacian_power_l(dim, 1), 2.0 * dim as f64);
            let mut prev = 0.0;
            for j in 0..5u32 {
                let l = laplacian_power_l(dim, j);
                assert!(l > prev);
                prev = l;
            }
        }
        assert_eq!(laplacian_power_l(3, 2), 120.0);
        // Finite-difference oracle (Delta^j of |x|^{2j} is the constant L_j).
        for dim in 1..=3usize {
            for j in 1..=2u32 {
                let fd = fd_iterated_laplacian(dim, j);
                let l = laplacian_power_l(dim, j);
                assert!(
                    (fd - l).abs() < 1e-3 * l,
                    "dim {dim} j {j}: fd {fd} vs {l}"
                );
            }
        }
    }

    #[test]
    fn ratio_identity_with_axis_moment_oracle() {
        // M_j / L_j = mean(x1^{2j} over B(0,1)) / (2j)!  -- oracle via the
        // slice quadrature for the axis moment.
        for dim in 1..=3usize {
            for j in 1..=3u32 {
                // n = 2 via s = sin(theta) to keep the integrand smooth.
                let axis_moment = match dim {
                    1 => integrate_gl(&|s: f64| s.powi(2 * j as i32) * 0.5, -1.0, 1.0, 48),
                    2 => integrate_gl(
                        &|th: f64| {
                            2.0 / std::f64::consts::PI
                                * th.sin().powi(2 * j as i32)
                                * th.cos()
                                * th.cos()
                        },
                        -std::f64::consts::FRAC_PI_2,
                        std::f64::consts::FRAC_PI_2,
                        48,
                    ),
                    3 => integrate_gl(
                        &|s: f64| s.powi(2 * j as i32) * 0.75 * (1.0 - s * s),
                        -1.0,
                        1.0,
                        48,
                    ),
                    _ => unreachable!(),
                };
                let fact: f64 = (1..=2 * j).map(|k| k as f64).product();
                let lhs = moment_m(dim, j) / laplacian_power_l(dim, j);
                let rhs = axis_moment / fact;
                assert!(
                    (lhs - rhs).abs() < 1e-8,
                    "dim {dim} j {j}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn homogeneous_quadratic_ball_mean() {
        // For a homogeneous quadratic P, the mean over B(0,t) is
        // (Delta P / L_1) M_1 t^2: the harmonic part integrates to zero.
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for dim in 1..=3usize {
            // random symmetric coefficient matrix
            let mut a = [[0.0f64; 3]; 3];
            for i in 0..dim {
                for k in i..dim {
                    let v = rng.gen_range(-1.0..1.0);
                    a[i][k] = v;
                    a[k][i] = v;
                }
            }
            let p = move |x: &[f64; 3]| {
                let mut s = 0.0;
                for i in 0..3 {
                    for k in 0..3 {
                        s += a[i][k] * x[i] * x[k];
                    }
                }
                s
            };
            let trace: f64 = (0..dim).map(|i| a[i][i]).sum();
            let delta_p = 2.0 * trace;
            let t = 0.75;
            let predicted = delta_p / laplacian_power_l(dim, 1) * moment_m(dim, 1) * t * t;

            // Deterministic oracle: radial x slice quadrature of the mean.
            // mean of P over B(0,t) = trace(A) * mean(x1^2) = trace(A) * t^2 / (n+2).
            let mean_exact = trace * t * t / (dim as f64 + 2.0);
            assert!((mean_exact - predicted).abs() < 1e-12 * predicted.abs().max(1.0));

            // Monte-Carlo oracle for the left side.
            let mut sum = 0.0;
            let n_samples = 2_000_000usize;
            let mut count = 0usize;
            while count < n_samples {
                let mut x = [0.0f64; 3];
                let mut r2 = 0.0;
                for v in x.iter_mut().take(dim) {
                    *v = rng.gen_range(-1.0..1.0);
                    r2 += *v * *v;
                }
                if r2 <= 1.0 {
                    for v in x.iter_mut() {
                        *v *= t;
                    }
                    sum += p(&x);
                    count += 1;
                }
            }
            let mc = sum / n_samples as f64;
            let scale = predicted.abs().max(t * t);
            assert!(
                (mc - predicted).abs() < 3e-3 * scale,
                "dim {dim}: mc {mc} vs {predicted}"
            );
        }
    }
}
