//! Calibration of fundamental-solution constants against a spectral solve.
//!
//! The shapes are known: `I_alpha(x) = c |x|^{alpha-n}`, with an extra
//! `log |x|` factor exactly when `alpha - n` is an even non-negative integer.
//! The constants are not hard-coded; they are fitted to the solution of
//! `(-Delta)^{alpha/2} u = (mollified delta)` computed spectrally on a
//! reference torus, inside a window of radii where the mollification,
//! the periodic images and the spectral truncation are all controlled.
//!
//! In the logarithmic cases the pure-power part `r^{2m}` is a polynomial and
//! therefore indistinguishable from the smooth periodic background; its
//! coefficient is fixed to zero by convention (the kernels annihilate those
//! polynomial parts, so nothing downstream depends on it).

use num_complex::Complex64;

use super::radial_fn::RadialPowerLog;
use crate::error::{Error, Result};
use crate::fields::{inverse_spectrum, GridSpec, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionForm {
    Power,
    PowerLog,
}

/// A calibrated fundamental solution of `(-Delta)^{alpha/2}`.
#[derive(Debug, Clone)]
pub struct FundamentalSolution {
    dim: usize,
    alpha: f64,
    form: SolutionForm,
    term: RadialPowerLog,
    /// Iterated symbolic Laplacians, entry `j` holding `Delta^j I_alpha`.
    laplacians: Vec<RadialPowerLog>,
    calibration_residual: f64,
}

/// `alpha - n` an even non-negative integer triggers the logarithmic form.
pub fn is_log_case(dim: usize, alpha: f64) -> bool {
    let d = alpha - dim as f64;
    if d < -1e-9 {
        return false;
    }
    let half = d / 2.0;
    (half - half.round()).abs() < 1e-9
}

fn reference_layout(dim: usize) -> (usize, f64, f64) {
    // (samples per axis, window lower radius in grid units, upper in periods)
    match dim {
        1 => (8192, 40.0, 1.0 / 8.0),
        2 => (1024, 24.0, 1.0 / 8.0),
        3 => (160, 12.0, 1.0 / 7.0),
        _ => unreachable!(),
    }
}

/// Gaussian mollification of a family member, as the truncated heat series
/// `sum_k (sigma^2/2)^k Delta^k f / k!`; valid for radii a few `sigma` out.
fn mollified_eval(term: &RadialPowerLog, dim: usize, sigma: f64, r: f64) -> f64 {
    let mut acc = term.eval(r);
    let mut lap = *term;
    let mut coef = 1.0;
    for k in 1..=4u32 {
        lap = lap.laplacian(dim);
        coef *= sigma * sigma / 2.0 / k as f64;
        acc += coef * lap.eval(r);
    }
    acc
}

/// Householder QR least squares for a skinny dense system.
fn solve_least_squares(rows: &[Vec<f64>], rhs: &[f64]) -> Option<(Vec<f64>, f64)> {
    let m = rows.len();
    let p = rows.first()?.len();
    if m < p {
        return None;
    }
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    let mut b: Vec<f64> = rhs.to_vec();
    for col in 0..p {
        let mut norm = 0.0;
        for row in a.iter().skip(col) {
            norm += row[col] * row[col];
        }
        let norm = norm.sqrt();
        if norm == 0.0 {
            return None;
        }
        let sign = if a[col][col] >= 0.0 { 1.0 } else { -1.0 };
        let mut v: Vec<f64> = (col..m).map(|i| a[i][col]).collect();
        v[0] += sign * norm;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            return None;
        }
        for j in col..p {
            let mut dot = 0.0;
            for (i, vi) in v.iter().enumerate() {
                dot += vi * a[col + i][j];
            }
            let f = 2.0 * dot / vnorm2;
            for (i, vi) in v.iter().enumerate() {
                a[col + i][j] -= f * vi;
            }
        }
        let mut dot = 0.0;
        for (i, vi) in v.iter().enumerate() {
            dot += vi * b[col + i];
        }
        let f = 2.0 * dot / vnorm2;
        for (i, vi) in v.iter().enumerate() {
            b[col + i] -= f * vi;
        }
    }
    // back substitution on the p x p triangle
    let mut x = vec![0.0f64; p];
    for i in (0..p).rev() {
        let mut s = b[i];
        for j in (i + 1)..p {
            s -= a[i][j] * x[j];
        }
        if a[i][i] == 0.0 {
            return None;
        }
        x[i] = s / a[i][i];
    }
    // residual rms
    let mut res = 0.0;
    for (row, &bv) in rows.iter().zip(rhs) {
        let fit: f64 = row.iter().zip(&x).map(|(r, c)| r * c).sum();
        res += (fit - bv) * (fit - bv);
    }
    Some((x, (res / m as f64).sqrt()))
}

impl FundamentalSolution {
    /// Calibrate (or fetch from the process-wide cache) the fundamental
    /// solution for `(dim, alpha)`.
    pub fn cached(dim: usize, alpha: f64) -> Result<std::sync::Arc<Self>> {
        use std::collections::HashMap;
        use std::sync::{Arc, Mutex, OnceLock};
        static CACHE: OnceLock<Mutex<HashMap<(usize, u64), Arc<FundamentalSolution>>>> =
            OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let key = (dim, alpha.to_bits());
        if let Some(hit) = cache.lock().expect("fs cache poisoned").get(&key) {
            return Ok(hit.clone());
        }
        let fresh = Arc::new(Self::calibrate(dim, alpha)?);
        cache
            .lock()
            .expect("fs cache poisoned")
            .insert(key, fresh.clone());
        Ok(fresh)
    }

    pub fn calibrate(dim: usize, alpha: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidParameter(format!("dim {dim} not in {{1,2,3}}")));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "fractional order must be positive, got {alpha}"
            )));
        }
        let (s, lo_cells, hi_frac) = reference_layout(dim);
        let grid = GridSpec::new(dim, &vec![s; dim], &vec![1.0; dim])?;
        let h = 1.0 / s as f64;
        let sigma = 2.0 * h;
        let r_lo = lo_cells * h;
        let r_hi = hi_frac;

        // Spectral solve of (-Delta)^{alpha/2} u = delta_sigma on the torus,
        // zero mode removed (fixes the additive normalization).
        let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
        for (flat, c) in coeffs.iter_mut().enumerate() {
            let xi = grid.freq_mag_at(flat);
            if xi > 0.0 {
                let mag = xi.powf(-alpha) * (-0.5 * sigma * sigma * xi * xi).exp();
                *c = Complex64::new(mag, 0.0);
            }
        }
        let u = inverse_spectrum(&SpectralField::from_coeffs(grid.clone(), coeffs)?)?;

        // Gather window samples (min-image radius from the source node 0).
        let mut radii = Vec::new();
        let mut values = Vec::new();
        for flat in 0..grid.len() {
            let d = grid.min_image_offset(0, flat);
            let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            if r >= r_lo && r <= r_hi {
                radii.push(r);
                values.push(u.values()[flat]);
            }
        }
        // keep the row count bounded
        let cap = 24_000;
        let stride = (radii.len() / cap).max(1);
        let radii: Vec<f64> = radii.iter().step_by(stride).copied().collect();
        let values: Vec<f64> = values.iter().step_by(stride).copied().collect();
        if radii.len() < 64 {
            return Err(Error::CalibrationFailure(format!(
                "only {} samples in the fit window",
                radii.len()
            )));
        }

        let beta = alpha - dim as f64;
        let log_case = is_log_case(dim, alpha);
        let power_base = RadialPowerLog::power(1.0, beta);
        let log_base = RadialPowerLog {
            c: 1.0,
            beta,
            a: 0.0,
            b: 1.0,
        };

        // Design: [singular cols..., 1, r^2, r^4], with the polynomial
        // background absorbing images, zero-mode shift and grid anisotropy.
        let mut cols: Vec<Box<dyn Fn(f64) -> f64>> = Vec::new();
        if !log_case {
            cols.push(Box::new(move |r| mollified_eval(&power_base, dim, sigma, r)));
        } else {
            cols.push(Box::new(move |r| mollified_eval(&log_base, dim, sigma, r)));
        }
        cols.push(Box::new(|_| 1.0));
        cols.push(Box::new(|r| r * r));
        cols.push(Box::new(|r| r * r * r * r));

        let rows: Vec<Vec<f64>> = radii
            .iter()
            .map(|&r| cols.iter().map(|c| c(r)).collect())
            .collect();
        let (sol, rms_res) = solve_least_squares(&rows, &values)
            .ok_or_else(|| Error::CalibrationFailure("degenerate least squares".into()))?;

        // Scale of the singular part over the window.
        let mut scale2 = 0.0;
        for row in &rows {
            let v = sol[0] * row[0];
            scale2 += v * v;
        }
        let scale = (scale2 / rows.len() as f64).sqrt();
        let residual = rms_res / scale.max(1e-300);
        if !(residual < 1e-2) {
            return Err(Error::CalibrationFailure(format!(
                "relative fit residual {residual:.3e} (dim {dim}, alpha {alpha})"
            )));
        }

        let term = if log_case {
            RadialPowerLog {
                c: 1.0,
                beta,
                a: 0.0,
                b: sol[0],
            }
        } else {
            RadialPowerLog::power(sol[0], beta)
        };

        // Precompute enough iterated Laplacians for the Pizzetti series.
        let mut laplacians = vec![term];
        for _ in 0..64 {
            let next = laplacians.last().unwrap().laplacian(dim);
            laplacians.push(next);
        }

        Ok(Self {
            dim,
            alpha,
            form: if log_case {
                SolutionForm::PowerLog
            } else {
                SolutionForm::Power
            },
            term,
            laplacians,
            calibration_residual: residual,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn form(&self) -> SolutionForm {
        self.form
    }

    /// The calibrated radial term `c r^beta (a + b ln r)`.
    pub fn term(&self) -> &RadialPowerLog {
        &self.term
    }

    /// `Delta^j I_alpha` as a family member (smooth part only; the Dirac
    /// part at `alpha = 2N`, `j = N` is handled by the kernel assembly).
    pub fn laplacian_power(&self, j: usize) -> &RadialPowerLog {
        &self.laplacians[j]
    }

    /// All precomputed iterated Laplacians, entry `j` holding `Delta^j I_alpha`.
    pub fn laplacian_powers(&self) -> &[RadialPowerLog] {
        &self.laplacians
    }

    pub fn calibration_residual(&self) -> f64 {
        self.calibration_residual
    }

    /// Evaluate `I_alpha` at radius `r > 0`.
    pub fn eval_radius(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "fundamental solution undefined at radius {r}"
            )));
        }
        Ok(self.term.eval(r))
    }
}

/// `I_alpha(x)` for `x != 0`.
pub fn fundamental_solution(dim: usize, alpha: f64, x: &[f64]) -> Result<f64> {
    if x.len() != dim {
        return Err(Error::InvalidParameter(format!(
            "point has {} coordinates, expected {dim}",
            x.len()
        )));
    }
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    FundamentalSolution::cached(dim, alpha)?.eval_radius(r)
}
