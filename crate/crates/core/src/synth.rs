//! Test-corpus field constructors: single Fourier modes, band-limited random
//! fields, periodized Gaussian bumps and compactly supported polynomial
//! windows. The experiment drivers and the test suites share these.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fields::{forward_spectrum, inverse_spectrum, GridSpec, ScalarField};

/// `amplitude * cos(xi_k . x + phase)` for an integer frequency vector `k`.
pub fn single_mode(grid: &GridSpec, k: &[i64], amplitude: f64, phase: f64) -> Result<ScalarField> {
    if k.len() != grid.dim() {
        return Err(Error::InvalidParameter(format!(
            "mode vector length {} != dim {}",
            k.len(),
            grid.dim()
        )));
    }
    for (a, &ka) in k.iter().enumerate() {
        if ka.unsigned_abs() as usize >= grid.sizes()[a] / 2 {
            return Err(Error::InvalidParameter(format!(
                "mode {ka} not resolvable on {} samples",
                grid.sizes()[a]
            )));
        }
    }
    let period = grid.period().to_vec();
    let k = k.to_vec();
    Ok(ScalarField::from_fn(grid.clone(), move |x| {
        let mut ph = phase;
        for a in 0..x.len() {
            ph += 2.0 * std::f64::consts::PI * k[a] as f64 * x[a] / period[a];
        }
        amplitude * ph.cos()
    }))
}

/// Mean-zero random field whose integer frequencies satisfy
/// `k_min <= |k| <= k_max`. Deterministic in `seed`.
pub fn random_band_annulus(
    grid: &GridSpec,
    k_min: f64,
    k_max: f64,
    seed: u64,
) -> Result<ScalarField> {
    if k_max <= 0.0 || k_min < 0.0 || k_min > k_max {
        return Err(Error::InvalidParameter(format!(
            "bad annulus [{k_min}, {k_max}]"
        )));
    }
    for (a, &s) in grid.sizes().iter().enumerate() {
        if k_max >= (s / 2) as f64 {
            return Err(Error::InvalidParameter(format!(
                "band limit {k_max} not resolvable on {s} samples along axis {a}"
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let white = ScalarField::new(
        grid.clone(),
        (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
    )?;
    let mut spec = forward_spectrum(&white);
    for flat in 0..grid.len() {
        let mi = grid.multi_index(flat);
        let mut k2 = 0.0;
        for a in 0..grid.dim() {
            let ka = grid.signed_freq(a, mi[a]) as f64;
            k2 += ka * ka;
        }
        let km = k2.sqrt();
        if km == 0.0 || km < k_min || km > k_max {
            spec.coeffs_mut()[flat] = num_complex::Complex64::new(0.0, 0.0);
        }
    }
    inverse_spectrum(&spec)
}

/// Mean-zero low-pass random field with `|k| <= k_max`.
pub fn random_band_limited(grid: &GridSpec, k_max: f64, seed: u64) -> Result<ScalarField> {
    random_band_annulus(grid, 0.0, k_max, seed)
}

/// Periodized Gaussian bump of width `width` centered at `center`.
pub fn gaussian_bump(
    grid: &GridSpec,
    center: &[f64],
    width: f64,
    amplitude: f64,
) -> Result<ScalarField> {
    if center.len() != grid.dim() {
        return Err(Error::InvalidParameter("center length != dim".into()));
    }
    if !(width > 0.0) {
        return Err(Error::InvalidParameter(format!("width must be > 0, got {width}")));
    }
    let dim = grid.dim();
    let period = grid.period().to_vec();
    let center = center.to_vec();
    Ok(ScalarField::from_fn(grid.clone(), move |x| {
        // one image shell is enough for width below an eighth of the period
        let mut sum = 0.0;
        let images: i32 = 1;
        let mut idx = [0i32; 3];
        loop {
            let mut d2 = 0.0;
            for a in 0..dim {
                let d = x[a] - center[a] + idx[a] as f64 * period[a];
                d2 += d * d;
            }
            sum += (-0.5 * d2 / (width * width)).exp();
            // advance the image multi-counter
            let mut a = 0;
            loop {
                if a == dim {
                    return amplitude * sum;
                }
                idx[a] += 1;
                if idx[a] <= images {
                    break;
                }
                idx[a] = -images;
                a += 1;
            }
        }
    }))
}

/// A polynomial in the displacement from `center`, multiplied by a radial
/// `C^2` cutoff that is identically 1 for `|x - center| <= r_flat` and 0
/// beyond `r_cut`.
#[derive(Debug, Clone)]
pub struct PolynomialWindow {
    pub center: Vec<f64>,
    /// Monomials `(coefficient, exponents per axis)`.
    pub terms: Vec<(f64, [u32; 3])>,
    pub r_flat: f64,
    pub r_cut: f64,
}

impl PolynomialWindow {
    pub fn poly_at(&self, d: &[f64; 3]) -> f64 {
        let mut sum = 0.0;
        for &(c, p) in &self.terms {
            let mut v = c;
            for a in 0..3 {
                for _ in 0..p[a] {
                    v *= d[a];
                }
            }
            sum += v;
        }
        sum
    }

    fn cutoff(&self, rho: f64) -> f64 {
        if rho <= self.r_flat {
            1.0
        } else if rho >= self.r_cut {
            0.0
        } else {
            let u = (rho - self.r_flat) / (self.r_cut - self.r_flat);
            1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
        }
    }

    /// Sample the windowed polynomial on a grid (min-image displacements).
    pub fn sample(&self, grid: &GridSpec) -> Result<ScalarField> {
        if self.center.len() != grid.dim() {
            return Err(Error::InvalidParameter("center length != dim".into()));
        }
        if !(0.0 < self.r_flat && self.r_flat < self.r_cut)
            || self.r_cut > grid.min_half_period()
        {
            return Err(Error::InvalidParameter(format!(
                "window radii ({}, {}) must satisfy 0 < r_flat < r_cut <= half period",
                self.r_flat, self.r_cut
            )));
        }
        let this = self.clone();
        let dim = grid.dim();
        let period = grid.period().to_vec();
        Ok(ScalarField::from_fn(grid.clone(), move |x| {
            let mut d = [0.0f64; 3];
            for a in 0..dim {
                let mut delta = x[a] - this.center[a];
                let p = period[a];
                delta -= (delta / p).round() * p;
                d[a] = delta;
            }
            let rho = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            let w = this.cutoff(rho);
            if w == 0.0 {
                0.0
            } else {
                this.poly_at(&d) * w
            }
        }))
    }

    /// Grid indices whose distance to the center stays below
    /// `r_flat - margin`: every ball of radius `margin` around them sees the
    /// bare polynomial.
    pub fn interior_indices(&self, grid: &GridSpec, margin: f64) -> Vec<usize> {
        let mut out = Vec::new();
        for flat in 0..grid.len() {
            let x = grid.coords(flat);
            let mut d2 = 0.0;
            for a in 0..grid.dim() {
                let mut delta = x[a] - self.center[a];
                let p = grid.period()[a];
                delta -= (delta / p).round() * p;
                d2 += delta * delta;
            }
            if d2.sqrt() + margin <= self.r_flat {
                out.push(flat);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{lp_norm, make_grid};

    #[test]
    fn single_mode_round_trip() {
        let g = make_grid(2, &[32, 32], &[1.0, 1.0]).unwrap();
        let f = single_mode(&g, &[3, -2], 2.0, 0.4).unwrap();
        let spec = forward_spectrum(&f);
        // exactly two active conjugate modes
        let active: Vec<usize> = (0..g.len())
            .filter(|&i| spec.coeffs()[i].norm() > 1e-10)
            .collect();
        assert_eq!(active.len(), 2);
        assert!(single_mode(&g, &[16, 0], 1.0, 0.0).is_err());
    }

    #[test]
    fn band_limited_is_mean_zero_and_banded() {
        let g = make_grid(1, &[64], &[2.0]).unwrap();
        let f = random_band_limited(&g, 5.0, 11).unwrap();
        let spec = forward_spectrum(&f);
        assert!(spec.coeffs()[0].norm() < 1e-13);
        for flat in 0..g.len() {
            let k = g.signed_freq(0, g.multi_index(flat)[0]).unsigned_abs() as f64;
            if k > 5.0 {
                assert!(spec.coeffs()[flat].norm() < 1e-13);
            }
        }
        // deterministic in the seed
        let f2 = random_band_limited(&g, 5.0, 11).unwrap();
        assert_eq!(f.values(), f2.values());
    }

    #[test]
    fn gaussian_bump_positive_and_periodic() {
        let g = make_grid(1, &[128], &[4.0]).unwrap();
        let f = gaussian_bump(&g, &[0.1], 0.3, 1.5).unwrap();
        assert!(f.values().iter().all(|&v| v > 0.0));
        assert!(lp_norm(&f, f64::INFINITY).unwrap() <= 1.5 + 1e-9);
    }

    #[test]
    fn window_flat_region_is_polynomial() {
        let g = make_grid(1, &[128], &[4.0]).unwrap();
        let w = PolynomialWindow {
            center: vec![2.0],
            terms: vec![(1.0, [0, 0, 0]), (0.5, [1, 0, 0]), (-0.25, [2, 0, 0])],
            r_flat: 0.8,
            r_cut: 1.6,
        };
        let f = w.sample(&g).unwrap();
        for &i in &w.interior_indices(&g, 0.0) {
            let x = g.coords(i)[0];
            let d = x - 2.0;
            let expect = 1.0 + 0.5 * d - 0.25 * d * d;
            assert!((f.values()[i] - expect).abs() < 1e-13);
        }
        // outside the cut radius the field vanishes
        assert_eq!(f.values()[0], 0.0);
    }
}
