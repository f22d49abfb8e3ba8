//! Numerical scanner for the strengthened Hörmander conditions
//!
//! ```text
//! || K_t(x - y) - K_t(x) ||_{L^2(dt/t^{2a+1})}  <=  C |y|^gamma / |x|^{n + gamma},
//! |x| >= 2 |y|,
//! ```
//!
//! with the exponent `gamma` depending on `(alpha, n)`: `1` generically,
//! `1/2` for the Dirac piece at even integer `alpha` and for the odd
//! logarithmic case `n = 1`, `alpha = 2N + 1`, and `(alpha - 2N)/n` for the
//! far-field fractional piece. The scan is falsification-oriented: it
//! samples admissible pairs, measures the ratio of the left side to the
//! bound, and reports the sup, which stays finite and scale-invariant when
//! the condition holds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::calibrate::FundamentalSolution;
use super::kernel::{kernel_at_radius, KernelData};
use crate::error::{Error, Result};
use crate::multiscale::ScaleQuadrature;

/// The vector-valued kernel difference norm
/// `( sum_k w_k t_k^{-2 alpha} |K_{t_k}(x-y) - K_{t_k}(x)|^2 )^{1/2}`.
pub fn hormander_norm(
    dim: usize,
    alpha: f64,
    x: &[f64],
    y: &[f64],
    quad: &ScaleQuadrature,
) -> Result<f64> {
    if x.len() != dim || y.len() != dim {
        return Err(Error::InvalidParameter(format!(
            "points must have {dim} coordinates"
        )));
    }
    let rx = norm(x);
    let ry = norm(y);
    if rx < 2.0 * ry {
        return Err(Error::InvalidParameter(format!(
            "|x| = {rx} must be at least 2 |y| = {}",
            2.0 * ry
        )));
    }
    if ry == 0.0 {
        return Ok(0.0);
    }
    let r_shift = norm(&x.iter().zip(y).map(|(a, b)| a - b).collect::<Vec<_>>());
    let fs = FundamentalSolution::cached(dim, alpha)?;
    let data = KernelData::from_solution(&fs);
    let mut acc = 0.0;
    for (&t, &w) in quad.nodes().iter().zip(quad.weights()) {
        let k1 = kernel_at_radius(&data, r_shift, t)?;
        let k0 = kernel_at_radius(&data, rx, t)?;
        let d = k1 - k0;
        acc += w * t.powf(-2.0 * alpha) * d * d;
    }
    Ok(acc.sqrt())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// The exponent the strengthened condition is claimed with for `(alpha, n)`.
pub fn claimed_gamma(dim: usize, alpha: f64) -> f64 {
    let n_corr = (alpha / 2.0).floor();
    let nf = dim as f64;
    if n_corr == 0.0 {
        if alpha < 1.0 {
            alpha / nf
        } else {
            1.0
        }
    } else if (alpha - 2.0 * n_corr).abs() < 1e-9 {
        0.5 // Dirac chi_t piece at even integer alpha
    } else if dim == 1 && (alpha - (2.0 * n_corr + 1.0)).abs() < 1e-9 {
        0.5 // logarithmic fundamental solution, n = 1, odd alpha
    } else {
        ((alpha - 2.0 * n_corr) / nf).min(1.0)
    }
}

/// One sampled admissible pair and its measured norm / claimed bound.
#[derive(Debug, Clone)]
pub struct HormanderSample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub norm: f64,
    pub bound: f64,
}

impl HormanderSample {
    pub fn ratio(&self) -> f64 {
        self.norm / self.bound
    }
}

/// Scan result: every sample satisfies `|x| >= 2 |y|`.
#[derive(Debug, Clone)]
pub struct HormanderReport {
    pub dim: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub seed: u64,
    pub samples: Vec<HormanderSample>,
    pub sup_ratio: f64,
    pub median_ratio: f64,
}

fn random_direction(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    if dim == 1 {
        return vec![if rng.gen_bool(0.5) { 1.0 } else { -1.0 }];
    }
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = norm(&v);
        if n > 1e-3 && n <= 1.0 {
            return v.iter().map(|a| a / n).collect();
        }
    }
}

/// Sample `num_samples` admissible pairs log-uniformly (`|x|` over
/// `[1e-2, 1e2]`, `|y|/|x|` over `[1e-4, 1/2]`) and measure the sup of
/// norm / bound. Deterministic in `seed`; the per-sample scale quadrature
/// spans `[|x|/30, 30 |x|]` with 48 nodes, covering the three regimes
/// `t < |x|/3`, `|x|/3 <= t < 2|x|` and `t >= 2|x|`.
pub fn hormander_scan(
    dim: usize,
    alpha: f64,
    num_samples: usize,
    seed: u64,
) -> Result<HormanderReport> {
    if num_samples < 100 {
        return Err(Error::InvalidParameter(format!(
            "scan needs at least 100 samples, got {num_samples}"
        )));
    }
    // Calibrate once up front so parallel workers only read the cache.
    let _ = FundamentalSolution::cached(dim, alpha)?;
    let gamma = claimed_gamma(dim, alpha);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..num_samples)
        .map(|_| {
            let rx = 10f64.powf(rng.gen_range(-2.0..2.0));
            let rho = 10f64.powf(rng.gen_range(-4.0..(0.5f64).log10()));
            let dx = random_direction(&mut rng, dim);
            let dy = random_direction(&mut rng, dim);
            let x: Vec<f64> = dx.iter().map(|d| d * rx).collect();
            let y: Vec<f64> = dy.iter().map(|d| d * rho * rx).collect();
            (x, y)
        })
        .collect();

    let samples: Vec<HormanderSample> = pairs
        .par_iter()
        .map(|(x, y)| {
            let rx = norm(x);
            let ry = norm(y);
            let quad = ScaleQuadrature::new(rx / 30.0, 30.0 * rx, 48)
                .expect("valid by construction");
            let n = hormander_norm(dim, alpha, x, y, &quad)?;
            let bound = ry.powf(gamma) / rx.powf(dim as f64 + gamma);
            Ok(HormanderSample {
                x: x.clone(),
                y: y.clone(),
                norm: n,
                bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut ratios: Vec<f64> = samples.iter().map(|s| s.ratio()).collect();
    ratios.sort_by(|a, b| a.partial_cmp(b).expect("finite ratios"));
    let sup_ratio = *ratios.last().expect("nonempty");
    let median_ratio = ratios[ratios.len() / 2];
    Ok(HormanderReport {
        dim,
        alpha,
        gamma,
        seed,
        samples,
        sup_ratio,
        median_ratio,
    })
}
