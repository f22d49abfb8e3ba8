//! Principal value of the ball Riesz integral
//! `p.v. int_{B(x,t)} y / |y|^{n+1} dy`.
//!
//! Components orthogonal to `x` vanish by reflection symmetry. The axial
//! component reduces to a 1-D integral over the sphere radius `s = |y|`:
//! spheres fully inside the ball contribute zero by symmetry, which both
//! realizes the principal value and removes the singularity, leaving the
//! partially covered range `|r - t| < s < r + t`.

use crate::error::{Error, Result};
use crate::quad1d;

/// Axial directional weight: `int_{sphere_s cap B(x,t)} cos(theta) dsigma / s^n`.
fn axial_weight(dim: usize, s: f64, r: f64, t: f64) -> f64 {
    let c = ((s * s + r * r - t * t) / (2.0 * s * r)).clamp(-1.0, 1.0);
    match dim {
        1 => 1.0 / s,
        2 => {
            let sin = (1.0 - c * c).max(0.0).sqrt();
            2.0 * sin / s
        }
        3 => {
            let sin2 = (1.0 - c * c).max(0.0);
            std::f64::consts::PI * sin2 / s
        }
        _ => unreachable!(),
    }
}

/// `p.v. int_{B(x,t)} y/|y|^{n+1} dy` as a vector. Rejects `|x|` within
/// `1e-9` (relative) of `t`, where the integral blows up logarithmically.
pub fn pv_ball_riesz(dim: usize, x: &[f64], t: f64) -> Result<Vec<f64>> {
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidParameter(format!("dim {dim} not in {{1,2,3}}")));
    }
    if x.len() != dim {
        return Err(Error::InvalidParameter(format!(
            "point has {} coordinates, expected {dim}",
            x.len()
        )));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {t}")));
    }
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r == 0.0 {
        // centered ball: zero by symmetry
        return Ok(vec![0.0; dim]);
    }
    if (r - t).abs() < 1e-9 * r.max(t) {
        return Err(Error::InvalidParameter(format!(
            "|x| = {r} within tolerance of t = {t}: singular sphere"
        )));
    }
    let lo = (r - t).abs();
    let hi = r + t;
    // integrate in log s: the 1/s factor flattens out
    let f = |u: f64| {
        let s = u.exp();
        axial_weight(dim, s, r, t) * s
    };
    let (axial, _) = quad1d::adaptive(&f, lo.ln(), hi.ln(), 1e-12, 0.0);
    Ok(x.iter().map(|&xi| axial * xi / r).collect())
}
