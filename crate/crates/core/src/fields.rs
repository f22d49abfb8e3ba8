//! Periodic sampled scalar fields on rectangular grids and their discrete
//! Fourier representation.
//!
//! A field lives on the flat torus `T^n = prod_a [0, period_a)`, sampled at
//! `sizes_a` equispaced nodes per axis (row-major storage, last axis
//! fastest). The spectral representation uses Fourier *series* coefficients:
//!
//! ```text
//! f(x) = sum_k c_k exp(i xi_k . x),        xi_k = 2 pi k / period   (per axis)
//! c_k  = DFT(f)[k] / N_total
//! ```
//!
//! This is the one place the transform normalization is fixed. With it,
//! Parseval holds with the physical volume element:
//!
//! ```text
//! sum_i |f_i|^2 h_vol  =  V * sum_k |c_k|^2,       h_vol = V / N_total.
//! ```
//!
//! so `lp_norm(f, 2)^2 == V * sum |c_k|^2` up to rounding.

use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Validated description of a sampled flat torus, `dim` in `{1, 2, 3}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    dim: usize,
    sizes: Vec<usize>,
    period: Vec<f64>,
    spacing: Vec<f64>,
}

impl GridSpec {
    pub fn new(dim: usize, sizes: &[usize], period: &[f64]) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dim {dim} not in {{1,2,3}}")));
        }
        if sizes.len() != dim || period.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "expected {dim} sizes and periods, got {} and {}",
                sizes.len(),
                period.len()
            )));
        }
        if let Some(&s) = sizes.iter().find(|&&s| s < 4) {
            return Err(Error::InvalidGrid(format!("size {s} < 4")));
        }
        if let Some(&p) = period.iter().find(|&&p| !(p > 0.0) || !p.is_finite()) {
            return Err(Error::InvalidGrid(format!("period {p} not positive finite")));
        }
        let spacing = sizes
            .iter()
            .zip(period)
            .map(|(&s, &p)| p / s as f64)
            .collect::<Vec<_>>();
        if spacing.iter().any(|&h| !(h > 0.0) || !h.is_finite()) {
            return Err(Error::InvalidGrid("degenerate spacing".into()));
        }
        Ok(Self {
            dim,
            sizes: sizes.to_vec(),
            period: period.to_vec(),
            spacing,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn period(&self) -> &[f64] {
        &self.period
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    /// Total number of grid nodes.
    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Volume of the full torus.
    pub fn volume(&self) -> f64 {
        self.period.iter().product()
    }

    /// Half of the smallest period: the largest ball radius that embeds.
    pub fn min_half_period(&self) -> f64 {
        0.5 * self.period.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Decompose a flat index into per-axis indices (row-major, last fastest).
    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        let mut rem = flat;
        for a in (0..self.dim).rev() {
            out[a] = rem % self.sizes[a];
            rem /= self.sizes[a];
        }
        out
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let mut flat = 0;
        for a in 0..self.dim {
            flat = flat * self.sizes[a] + (idx[a] % self.sizes[a]);
        }
        flat
    }

    /// Physical coordinates of a node (entries past `dim` are zero).
    pub fn coords(&self, flat: usize) -> [f64; 3] {
        let mi = self.multi_index(flat);
        let mut out = [0.0; 3];
        for a in 0..self.dim {
            out[a] = mi[a] as f64 * self.spacing[a];
        }
        out
    }

    /// Signed integer frequency of DFT bin `idx` along `axis`.
    pub fn signed_freq(&self, axis: usize, idx: usize) -> i64 {
        let s = self.sizes[axis];
        if idx <= s / 2 {
            idx as i64
        } else {
            idx as i64 - s as i64
        }
    }

    /// `|xi_k|` for the mode with flat spectral index `flat`.
    pub fn freq_mag_at(&self, flat: usize) -> f64 {
        let mi = self.multi_index(flat);
        let mut sq = 0.0;
        for a in 0..self.dim {
            let k = self.signed_freq(a, mi[a]) as f64;
            let w = 2.0 * std::f64::consts::PI * k / self.period[a];
            sq += w * w;
        }
        sq.sqrt()
    }

    /// Minimal-image displacement from node `from` to node `to`, per axis.
    pub fn min_image_offset(&self, from: usize, to: usize) -> [f64; 3] {
        let a = self.multi_index(from);
        let b = self.multi_index(to);
        let mut out = [0.0; 3];
        for ax in 0..self.dim {
            let s = self.sizes[ax] as i64;
            let mut d = b[ax] as i64 - a[ax] as i64;
            if d > s / 2 {
                d -= s;
            } else if d < -(s / 2) {
                d += s;
            }
            out[ax] = d as f64 * self.spacing[ax];
        }
        out
    }

    /// Minimal-image (torus) distance between two nodes.
    pub fn torus_distance(&self, i: usize, j: usize) -> f64 {
        let d = self.min_image_offset(i, j);
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }
}

/// Build a validated grid; `dim` must match the lengths of `sizes`/`period`.
pub fn make_grid(dim: usize, sizes: &[usize], period: &[f64]) -> Result<GridSpec> {
    GridSpec::new(dim, sizes, period)
}

/// A real scalar field sampled on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "value count {} does not match grid ({} nodes)",
                values.len(),
                grid.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite value {v}")));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        let values = vec![0.0; grid.len()];
        Self { grid, values }
    }

    pub fn constant(grid: GridSpec, c: f64) -> Self {
        let values = vec![c; grid.len()];
        Self { grid, values }
    }

    /// Sample a function of physical coordinates at every node.
    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|i| {
                let c = grid.coords(i);
                f(&c[..grid.dim()])
            })
            .collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

/// Fourier-series coefficients of a [`ScalarField`].
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
    freq_mag: Vec<f64>,
}

impl SpectralField {
    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "coefficient count {} does not match grid ({} modes)",
                coeffs.len(),
                grid.len()
            )));
        }
        let freq_mag = (0..grid.len()).map(|i| grid.freq_mag_at(i)).collect();
        Ok(Self {
            grid,
            coeffs,
            freq_mag,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// `|xi_k|` per mode, in coefficient order; entry 0 is the zero mode.
    pub fn freq_mag(&self) -> &[f64] {
        &self.freq_mag
    }

    /// Largest `|xi|` over modes with coefficient magnitude above `rel_tol`
    /// times the largest magnitude. Returns 0 for the zero field.
    pub fn max_active_freq(&self, rel_tol: f64) -> f64 {
        let max_c = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if max_c == 0.0 {
            return 0.0;
        }
        self.coeffs
            .iter()
            .zip(&self.freq_mag)
            .filter(|(c, _)| c.norm() > rel_tol * max_c)
            .map(|(_, &m)| m)
            .fold(0.0, f64::max)
    }

    /// Smallest nonzero `|xi|` over active modes, or `None` if only the zero
    /// mode is active.
    pub fn min_active_freq(&self, rel_tol: f64) -> Option<f64> {
        let max_c = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if max_c == 0.0 {
            return None;
        }
        self.coeffs
            .iter()
            .zip(&self.freq_mag)
            .filter(|(c, _)| c.norm() > rel_tol * max_c)
            .map(|(_, &m)| m)
            .filter(|&m| m > 0.0)
            .fold(None, |acc, m| Some(acc.map_or(m, |a: f64| a.min(m))))
    }

    /// New spectrum with each coefficient multiplied by `m(|xi_k|)`.
    ///
    /// A real radial multiplier preserves conjugate symmetry, so the result
    /// still inverts to a real field.
    pub fn apply_radial_multiplier(&self, m: impl Fn(f64) -> f64) -> SpectralField {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&self.freq_mag)
            .map(|(c, &fm)| c * m(fm))
            .collect();
        SpectralField {
            grid: self.grid.clone(),
            coeffs,
            freq_mag: self.freq_mag.clone(),
        }
    }

    /// `L^2` norm computed on the coefficient side (Parseval).
    pub fn l2_norm(&self) -> f64 {
        let v = self.grid.volume();
        (v * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
    }
}

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

fn plan(n: usize, forward: bool) -> std::sync::Arc<dyn Fft<f64>> {
    let mut p = planner().lock().expect("fft planner poisoned");
    if forward {
        p.plan_fft_forward(n)
    } else {
        p.plan_fft_inverse(n)
    }
}

fn transform_axis(data: &mut [Complex64], sizes: &[usize], axis: usize, forward: bool) {
    let n = sizes[axis];
    let stride: usize = sizes[axis + 1..].iter().product();
    let outer: usize = sizes[..axis].iter().product();
    let block = stride * n;
    let fft = plan(n, forward);
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for o in 0..outer {
        for s in 0..stride {
            let base = o * block + s;
            for (i, slot) in line.iter_mut().enumerate() {
                *slot = data[base + i * stride];
            }
            fft.process_with_scratch(&mut line, &mut scratch);
            for (i, v) in line.iter().enumerate() {
                data[base + i * stride] = *v;
            }
        }
    }
}

fn transform_nd(data: &mut [Complex64], sizes: &[usize], forward: bool) {
    for axis in 0..sizes.len() {
        transform_axis(data, sizes, axis, forward);
    }
}

/// Discrete Fourier coefficients of a real field, normalized so that
/// Parseval holds with the physical volume element (see module docs).
pub fn forward_spectrum(field: &ScalarField) -> SpectralField {
    let grid = field.grid().clone();
    let n = grid.len() as f64;
    let mut data: Vec<Complex64> = field
        .values()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    transform_nd(&mut data, grid.sizes(), true);
    for c in &mut data {
        *c /= n;
    }
    SpectralField::from_coeffs(grid, data).expect("length preserved by transform")
}

const CONJ_SYMMETRY_TOL: f64 = 1e-9;

/// Invert a spectrum to a real field.
///
/// Rejects coefficient sets whose conjugate symmetry is violated beyond
/// `1e-9` relative to the largest coefficient: that signals a corrupted
/// multiplier application rather than a representable real field.
pub fn inverse_spectrum(spec: &SpectralField) -> Result<ScalarField> {
    let grid = spec.grid().clone();
    let sizes = grid.sizes();
    let max_c = spec
        .coeffs()
        .iter()
        .map(|c| c.norm())
        .fold(0.0f64, f64::max);
    let tol = CONJ_SYMMETRY_TOL * max_c.max(1e-300);
    let mut max_dev = 0.0f64;
    for flat in 0..grid.len() {
        let mi = grid.multi_index(flat);
        let mut conj_idx = [0usize; 3];
        for a in 0..grid.dim() {
            conj_idx[a] = (sizes[a] - mi[a]) % sizes[a];
        }
        let cflat = grid.flat_index(&conj_idx[..grid.dim()]);
        let dev = (spec.coeffs()[flat] - spec.coeffs()[cflat].conj()).norm();
        if dev > max_dev {
            max_dev = dev;
        }
    }
    if max_dev > tol {
        return Err(Error::ConjugateSymmetry { max_dev, tol });
    }
    let mut data = spec.coeffs().to_vec();
    transform_nd(&mut data, sizes, false);
    let values = data.iter().map(|c| c.re).collect();
    ScalarField::new(grid, values)
}

/// Discrete `L^p` norm with volume weights; `p = f64::INFINITY` gives the max norm.
pub fn lp_norm(field: &ScalarField, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidParameter(format!("lp_norm requires p >= 1, got {p}")));
    }
    if p == f64::INFINITY {
        return Ok(field.values().iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    let hv = field.grid().cell_volume();
    let sum: f64 = field.values().iter().map(|v| v.abs().powf(p)).sum();
    Ok((sum * hv).powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn random_field(grid: &GridSpec, seed: u64) -> ScalarField {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let values = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        ScalarField::new(grid.clone(), values).unwrap()
    }

    #[test]
    fn make_grid_examples() {
        let g = make_grid(1, &[256], &[2.0 * PI]).unwrap();
        assert!((g.spacing()[0] - 2.0 * PI / 256.0).abs() < 1e-15);

        let g = make_grid(3, &[32, 32, 32], &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(g.len(), 32 * 32 * 32);

        let g = make_grid(2, &[64, 128], &[1.0, 2.0]).unwrap();
        assert!((g.spacing()[0] - 1.0 / 64.0).abs() < 1e-15);
        assert!((g.spacing()[1] - 2.0 / 128.0).abs() < 1e-15);
    }

    #[test]
    fn make_grid_rejects_bad_input() {
        assert!(make_grid(0, &[], &[]).is_err());
        assert!(make_grid(4, &[8, 8, 8, 8], &[1.0; 4]).is_err());
        assert!(make_grid(1, &[2], &[1.0]).is_err());
        assert!(make_grid(1, &[8], &[0.0]).is_err());
        assert!(make_grid(1, &[8], &[-1.0]).is_err());
        assert!(make_grid(2, &[8], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn constant_field_has_single_dc_coefficient() {
        let g = make_grid(2, &[8, 8], &[1.0, 1.0]).unwrap();
        let f = ScalarField::constant(g, 3.25);
        let s = forward_spectrum(&f);
        assert!((s.coeffs()[0] - Complex64::new(3.25, 0.0)).norm() < 1e-12);
        for c in &s.coeffs()[1..] {
            assert!(c.norm() < 1e-12);
        }
    }

    #[test]
    fn cosine_has_two_conjugate_modes() {
        let g = make_grid(1, &[64], &[2.0]).unwrap();
        let f = ScalarField::from_fn(g.clone(), |x| (2.0 * PI * x[0] / 2.0).cos());
        let s = forward_spectrum(&f);
        // k = +1 and k = -1 (bin 63), each 1/2.
        assert!((s.coeffs()[1] - Complex64::new(0.5, 0.0)).norm() < 1e-12);
        assert!((s.coeffs()[63] - Complex64::new(0.5, 0.0)).norm() < 1e-12);
        let other: f64 = (0..64)
            .filter(|&i| i != 1 && i != 63)
            .map(|i| s.coeffs()[i].norm())
            .sum();
        assert!(other < 1e-11);
    }

    #[test]
    fn parseval_holds_for_random_fields_each_dim() {
        let grids = [
            make_grid(1, &[48], &[2.0 * PI]).unwrap(),
            make_grid(2, &[12, 16], &[1.0, 2.0]).unwrap(),
            make_grid(3, &[8, 6, 10], &[1.0, 0.5, 3.0]).unwrap(),
        ];
        for (d, g) in grids.iter().enumerate() {
            for trial in 0..100 {
                let f = random_field(g, (d * 1000 + trial) as u64);
                let l2 = lp_norm(&f, 2.0).unwrap();
                let sp = forward_spectrum(&f).l2_norm();
                assert!(
                    (l2 - sp).abs() <= 1e-10 * l2.max(1e-30),
                    "dim {} trial {}: {} vs {}",
                    d + 1,
                    trial,
                    l2,
                    sp
                );
            }
        }
    }

    #[test]
    fn round_trip_identity() {
        let g = make_grid(2, &[16, 12], &[1.0, 1.5]).unwrap();
        let f = random_field(&g, 7);
        let back = inverse_spectrum(&forward_spectrum(&f)).unwrap();
        let err: f64 = f
            .values()
            .iter()
            .zip(back.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let scale = f.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(err <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn inverse_rejects_broken_symmetry() {
        let g = make_grid(1, &[16], &[1.0]).unwrap();
        let f = random_field(&g, 3);
        let mut s = forward_spectrum(&f);
        s.coeffs_mut()[3] += Complex64::new(0.1, 0.2);
        match inverse_spectrum(&s) {
            Err(Error::ConjugateSymmetry { .. }) => {}
            other => panic!("expected symmetry rejection, got {other:?}"),
        }
    }

    #[test]
    fn inverse_of_zero_and_dc() {
        let g = make_grid(1, &[8], &[1.0]).unwrap();
        let zero = SpectralField::from_coeffs(g.clone(), vec![Complex64::new(0.0, 0.0); 8]).unwrap();
        assert!(inverse_spectrum(&zero).unwrap().values().iter().all(|&v| v == 0.0));

        let mut c = vec![Complex64::new(0.0, 0.0); 8];
        c[0] = Complex64::new(-2.5, 0.0);
        let dc = SpectralField::from_coeffs(g, c).unwrap();
        for &v in inverse_spectrum(&dc).unwrap().values() {
            assert!((v + 2.5).abs() < 1e-13);
        }
    }

    #[test]
    fn lp_norm_examples() {
        // Unit-volume torus, constant 1.
        let g = make_grid(2, &[8, 8], &[1.0, 1.0]).unwrap();
        let one = ScalarField::constant(g, 1.0);
        for p in [1.0, 2.0, 3.5, 17.0] {
            assert!((lp_norm(&one, p).unwrap() - 1.0).abs() < 1e-14);
        }
        assert!((lp_norm(&one, f64::INFINITY).unwrap() - 1.0).abs() < 1e-15);

        // cos(2 pi x) on [0,1), p = 2 -> 1/sqrt(2).
        let g = make_grid(1, &[512], &[1.0]).unwrap();
        let f = ScalarField::from_fn(g, |x| (2.0 * PI * x[0]).cos());
        assert!((lp_norm(&f, 2.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);

        assert!(lp_norm(&f, 0.5).is_err());
        assert!(lp_norm(&f, f64::NAN).is_err());
    }

    #[test]
    fn scalar_field_validation() {
        let g = make_grid(1, &[8], &[1.0]).unwrap();
        assert!(ScalarField::new(g.clone(), vec![0.0; 7]).is_err());
        assert!(ScalarField::new(g, vec![f64::NAN; 8]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn prop_parseval_and_roundtrip(
            dim in 1usize..=3,
            seed in 0u64..1000,
            s0 in 4usize..10,
            s1 in 4usize..10,
            s2 in 4usize..8,
        ) {
            let sizes = [s0, s1, s2];
            let period = [1.0, 1.7, 0.9];
            let g = make_grid(dim, &sizes[..dim], &period[..dim]).unwrap();
            let f = random_field(&g, seed);
            let spec = forward_spectrum(&f);
            let l2 = lp_norm(&f, 2.0).unwrap();
            prop_assert!((spec.l2_norm() - l2).abs() <= 1e-10 * l2.max(1e-30));
            let back = inverse_spectrum(&spec).unwrap();
            for (a, b) in f.values().iter().zip(back.values()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn prop_lp_homogeneous_and_monotone(
            seed in 0u64..1000,
            lambda in 0.0f64..8.0,
            p in 1.0f64..6.0,
        ) {
            let g = make_grid(1, &[32], &[2.0]).unwrap();
            let f = random_field(&g, seed);
            let scaled = ScalarField::new(
                g.clone(),
                f.values().iter().map(|v| lambda * v).collect(),
            ).unwrap();
            let nf = lp_norm(&f, p).unwrap();
            let ns = lp_norm(&scaled, p).unwrap();
            prop_assert!((ns - lambda * nf).abs() <= 1e-12 * (1.0 + ns));

            // |g| <= |f| pointwise implies norm(g) <= norm(f).
            let shrunk = ScalarField::new(
                g,
                f.values().iter().map(|v| 0.5 * v).collect(),
            ).unwrap();
            prop_assert!(lp_norm(&shrunk, p).unwrap() <= nf + 1e-15);
        }
    }
}
