//! Scale quadratures, ball means, fractional Laplacians and the corrected
//! multiscale square functions built from them.
//!
//! The square function of smoothness order `alpha` (with `N = floor(alpha/2)`
//! correction terms) is
//!
//! ```text
//! S(x)^2 = int_0^inf | avg_{B(x,t)} R_N(y, x) |^2  t^{-2 alpha}  dt/t,
//! R_N(y,x) = f(y) - f(x) - sum_{j=1}^{N-1} g_j(x) |y-x|^{2j}
//!            - (g_N)_{B(x,t)} |y-x|^{2N},
//! ```
//!
//! discretized with a log-spaced [`ScaleQuadrature`] (the `t^{-2 alpha}`
//! factor is folded into the integrand). Two evaluation modes are provided:
//!
//! - **spectral**: ball averages become radial Fourier multipliers
//!   `F(t |xi|)`; with auto corrections `g_j = Delta^j f / L_j` the whole
//!   remainder average collapses to the multiplier deficit `Phi(t |xi|)` of
//!   [`crate::constants`]. The periodic ball mean is well defined for every
//!   `t > 0` (the average lives on the universal cover), so spectral mode
//!   accepts any positive scale.
//! - **direct**: grid-sample averages over the stencil
//!   `{y : |y - x| < t}` with center-in-ball membership (`O(h)` accurate).
//!   Here the ball must embed in the torus, so `t` is capped by half the
//!   smallest period. All stencil moments are taken from the discrete
//!   stencil itself, which keeps the polynomial annihilation identities
//!   exact at machine precision on isotropic grids.

use num_complex::Complex64;

use crate::constants::{equivalence_constant, DeficitSpec};
use crate::error::{Error, Result};
use crate::fields::{
    forward_spectrum, inverse_spectrum, lp_norm, GridSpec, ScalarField, SpectralField,
};
use crate::radial::{ball_profile, laplacian_power_l, moment_m};

/// A smoothness order `alpha > 0` with its induced correction count
/// `N = floor(alpha/2)` and integrability exponent `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothnessOrder {
    alpha: f64,
    n_corr: u32,
    p: f64,
}

impl SmoothnessOrder {
    pub fn new(alpha: f64, p: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "smoothness order must be positive, got {alpha}"
            )));
        }
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "exponent must satisfy 1 < p < inf, got {p}"
            )));
        }
        Ok(Self {
            alpha,
            n_corr: (alpha / 2.0).floor() as u32,
            p,
        })
    }

    /// The `p = 2` order.
    pub fn l2(alpha: f64) -> Result<Self> {
        Self::new(alpha, 2.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Number of correction fields `N`; satisfies `2N <= alpha < 2N + 2`.
    pub fn corrections(&self) -> u32 {
        self.n_corr
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

/// Log-spaced nodes and weights approximating `int dt/t` over
/// `[t_min, t_max]`; weights sum to `log(t_max / t_min)` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleQuadrature {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    t_min: f64,
    t_max: f64,
}

impl ScaleQuadrature {
    pub fn new(t_min: f64, t_max: f64, k: usize) -> Result<Self> {
        if !(t_min > 0.0) || !(t_max > t_min) || !t_max.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "degenerate scale range [{t_min}, {t_max}]"
            )));
        }
        if k < 8 {
            return Err(Error::InvalidParameter(format!(
                "scale quadrature needs at least 8 nodes, got {k}"
            )));
        }
        let du = (t_max / t_min).ln() / k as f64;
        let nodes = (0..k)
            .map(|i| t_min * ((i as f64 + 0.5) * du).exp())
            .collect();
        let weights = vec![du; k];
        Ok(Self {
            nodes,
            weights,
            t_min,
            t_max,
        })
    }

    /// Range wide enough to resolve both asymptotic regimes of the field's
    /// spectral band: `t_min |xi|_max = 1e-3` and `t_max |xi|_min = 1e3`.
    pub fn wide_for_field(field: &ScalarField, k: usize) -> Result<Self> {
        let spec = forward_spectrum(field);
        let xi_max = spec.max_active_freq(1e-12);
        let xi_min = spec.min_active_freq(1e-12).ok_or_else(|| {
            Error::InvalidParameter("field has no nonzero modes; scale range undefined".into())
        })?;
        Self::new(1e-3 / xi_max, 1e3 / xi_min, k)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    /// Same range, twice the nodes (halves the log step).
    pub fn refined(&self) -> Self {
        Self::new(self.t_min, self.t_max, 2 * self.nodes.len()).expect("valid by construction")
    }

    /// Nodes multiplied by `lambda > 0`; weights are unchanged (the measure
    /// `dt/t` is scale invariant).
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("bad scale factor {lambda}")));
        }
        Ok(Self {
            nodes: self.nodes.iter().map(|t| t * lambda).collect(),
            weights: self.weights.clone(),
            t_min: self.t_min * lambda,
            t_max: self.t_max * lambda,
        })
    }
}

/// How ball averages are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BallMeanMode {
    /// Fourier multiplier `F(t |xi|)`; exact for the band-limited interpolant.
    Spectral,
    /// Grid-sample average with center-in-ball membership.
    Direct,
}

fn check_direct_radius(grid: &GridSpec, t: f64) -> Result<()> {
    let limit = grid.min_half_period();
    if t >= limit {
        return Err(Error::BallTooLarge { t, limit });
    }
    Ok(())
}

fn check_positive_t(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "ball radius must be positive and finite, got {t}"
        )));
    }
    Ok(())
}

/// Integer offsets `d` with `|d . h| < t` (strict), including the origin.
fn ball_stencil(grid: &GridSpec, t: f64) -> Vec<[i64; 3]> {
    let mut out = Vec::new();
    let h = grid.spacing();
    let dim = grid.dim();
    let mut reach = [0i64; 3];
    for a in 0..dim {
        reach[a] = (t / h[a]).ceil() as i64;
    }
    let r = |a: usize| -> std::ops::RangeInclusive<i64> {
        if a < dim {
            -reach[a]..=reach[a]
        } else {
            0..=0
        }
    };
    for d0 in r(0) {
        for d1 in r(1) {
            for d2 in r(2) {
                let mut s = 0.0;
                let d = [d0, d1, d2];
                for a in 0..dim {
                    let v = d[a] as f64 * h[a];
                    s += v * v;
                }
                if s.sqrt() < t {
                    out.push(d);
                }
            }
        }
    }
    out
}

/// Flat indices of `x + d` (wrapped) for every stencil offset, per point.
fn shifted_index(grid: &GridSpec, mi: &[usize; 3], d: &[i64; 3]) -> usize {
    let mut idx = [0usize; 3];
    for a in 0..grid.dim() {
        let s = grid.sizes()[a] as i64;
        idx[a] = (((mi[a] as i64 + d[a]) % s + s) % s) as usize;
    }
    grid.flat_index(&idx[..grid.dim()])
}

fn direct_ball_mean(field: &ScalarField, t: f64) -> Result<ScalarField> {
    let grid = field.grid();
    check_positive_t(t)?;
    check_direct_radius(grid, t)?;
    let stencil = ball_stencil(grid, t);
    let inv = 1.0 / stencil.len() as f64;
    let mut values = vec![0.0; grid.len()];
    for flat in 0..grid.len() {
        let mi = grid.multi_index(flat);
        let mut sum = 0.0;
        for d in &stencil {
            sum += field.values()[shifted_index(grid, &mi, d)];
        }
        values[flat] = sum * inv;
    }
    ScalarField::new(grid.clone(), values)
}

/// Mean of `field` over the ball `B(x, t)` at every grid point `x`.
pub fn ball_mean(field: &ScalarField, t: f64, mode: BallMeanMode) -> Result<ScalarField> {
    check_positive_t(t)?;
    match mode {
        BallMeanMode::Direct => direct_ball_mean(field, t),
        BallMeanMode::Spectral => {
            let dim = field.grid().dim();
            let spec = forward_spectrum(field);
            let out = spec.apply_radial_multiplier(|xi| {
                ball_profile(dim, t * xi).expect("t, xi finite and nonnegative")
            });
            inverse_spectrum(&out)
        }
    }
}

/// `(-Delta)^{alpha/2}`: multiply mode `k` by `|xi_k|^alpha`, annihilating
/// the zero mode.
pub fn frac_laplacian(field: &ScalarField, alpha: f64) -> Result<ScalarField> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "fractional order must be positive, got {alpha}"
        )));
    }
    let spec = forward_spectrum(field);
    let out = spec.apply_radial_multiplier(|xi| if xi > 0.0 { xi.powf(alpha) } else { 0.0 });
    inverse_spectrum(&out)
}

/// Correction fields for [`square_function`]: explicit or the canonical
/// `g_j = Delta^j f / L_j`.
#[derive(Debug, Clone)]
pub enum Corrections {
    Auto,
    Given(Vec<ScalarField>),
}

/// The canonical corrections `g_j = Delta^j f / L_j`, `j = 1..=N`, computed
/// spectrally.
pub fn auto_corrections(field: &ScalarField, order: &SmoothnessOrder) -> Result<Vec<ScalarField>> {
    let dim = field.grid().dim();
    let spec = forward_spectrum(field);
    let mut out = Vec::new();
    for j in 1..=order.corrections() {
        let lj = laplacian_power_l(dim, j);
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let gj = spec.apply_radial_multiplier(|xi| sign * xi.powi(2 * j as i32) / lj);
        out.push(inverse_spectrum(&gj)?);
    }
    Ok(out)
}

/// Whether the scale range resolves both asymptotic regimes of the field's
/// spectral band (`t_min |xi|_max <= 1e-2` and `t_max |xi|_min >= 1e2`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TRangeCheck {
    pub t_min_times_xi_max: f64,
    pub t_max_times_xi_min: f64,
    pub resolves_small_scales: bool,
    pub resolves_large_scales: bool,
}

impl TRangeCheck {
    fn for_spectrum(spec: &SpectralField, quad: &ScaleQuadrature) -> Self {
        let xi_max = spec.max_active_freq(1e-12);
        let xi_min = spec.min_active_freq(1e-12).unwrap_or(0.0);
        let lo = quad.t_min() * xi_max;
        let hi = quad.t_max() * xi_min;
        TRangeCheck {
            t_min_times_xi_max: lo,
            t_max_times_xi_min: hi,
            resolves_small_scales: lo <= 1e-2 || xi_max == 0.0,
            resolves_large_scales: hi >= 1e2 || xi_max == 0.0,
        }
    }

    pub fn ok(&self) -> bool {
        self.resolves_small_scales && self.resolves_large_scales
    }
}

/// A pointwise square function plus scale-range diagnostics.
#[derive(Debug, Clone)]
pub struct SquareFunctionResult {
    pub field: ScalarField,
    pub t_range: TRangeCheck,
}

fn resolve_corrections(
    field: &ScalarField,
    gs: &Corrections,
    order: &SmoothnessOrder,
) -> Result<Option<Vec<ScalarField>>> {
    let n = order.corrections() as usize;
    match gs {
        Corrections::Auto => Ok(None),
        Corrections::Given(list) => {
            if list.len() != n {
                return Err(Error::CorrectionCount {
                    expected: n,
                    got: list.len(),
                });
            }
            for g in list {
                if g.grid() != field.grid() {
                    return Err(Error::InvalidParameter(
                        "correction field lives on a different grid".into(),
                    ));
                }
            }
            Ok(Some(list.clone()))
        }
    }
}

/// Spectral-mode square function.
///
/// With auto corrections the remainder average is the single multiplier
/// `Phi(t |xi|)` (evaluated through its series branch near zero, which keeps
/// small scales accurate); with explicit corrections it is assembled as
/// `(F - 1) f^ - sum_{j<N} M_j t^{2j} g_j^ - M_N t^{2N} F g_N^`.
fn square_function_spectral(
    field: &ScalarField,
    gs: &Option<Vec<ScalarField>>,
    order: &SmoothnessOrder,
    quad: &ScaleQuadrature,
) -> Result<SquareFunctionResult> {
    let grid = field.grid().clone();
    let dim = grid.dim();
    let n = order.corrections();
    let alpha = order.alpha();
    let fhat = forward_spectrum(field);
    let t_range = TRangeCheck::for_spectrum(&fhat, quad);
    let ghat: Vec<SpectralField> = match gs {
        Some(list) => list.iter().map(forward_spectrum).collect(),
        None => Vec::new(),
    };
    let deficit = DeficitSpec::new(dim, alpha)?;
    let m_consts: Vec<f64> = (0..=n).map(|j| moment_m(dim, j)).collect();

    let mut acc = vec![0.0f64; grid.len()];
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (&t, &w) in quad.nodes().iter().zip(quad.weights()) {
        let wt = w * t.powf(-2.0 * alpha);
        match gs {
            None => {
                for (i, c) in coeffs.iter_mut().enumerate() {
                    let tau = t * fhat.freq_mag()[i];
                    *c = fhat.coeffs()[i] * deficit.eval(tau).expect("tau finite");
                }
            }
            Some(_) => {
                for (i, c) in coeffs.iter_mut().enumerate() {
                    let tau = t * fhat.freq_mag()[i];
                    let f_tau = ball_profile(dim, tau).expect("tau finite");
                    let mut a = fhat.coeffs()[i] * (f_tau - 1.0);
                    for (j, gh) in ghat.iter().enumerate().take(n as usize - 1) {
                        let jj = (j + 1) as i32;
                        a -= gh.coeffs()[i] * (m_consts[j + 1] * t.powi(2 * jj));
                    }
                    if n >= 1 {
                        let gn = &ghat[n as usize - 1];
                        a -= gn.coeffs()[i] * (m_consts[n as usize] * t.powi(2 * n as i32) * f_tau);
                    }
                    *c = a;
                }
            }
        }
        let at = inverse_spectrum(&SpectralField::from_coeffs(grid.clone(), coeffs.clone())?)?;
        for (s, &v) in acc.iter_mut().zip(at.values()) {
            *s += wt * v * v;
        }
    }
    let values = acc.into_iter().map(f64::sqrt).collect();
    Ok(SquareFunctionResult {
        field: ScalarField::new(grid, values)?,
        t_range,
    })
}

/// Shared direct-mode machinery: per-scale stencil, its discrete moments,
/// and the remainder ball mean at one point.
struct DirectScale {
    stencil: Vec<[i64; 3]>,
    /// Discrete stencil means of `|y - x|^{2j}` for `j = 0..=N`.
    moments: Vec<f64>,
}

impl DirectScale {
    fn build(grid: &GridSpec, t: f64, n: u32) -> Result<Self> {
        check_positive_t(t)?;
        check_direct_radius(grid, t)?;
        let stencil = ball_stencil(grid, t);
        let h = grid.spacing();
        let inv = 1.0 / stencil.len() as f64;
        let mut moments = vec![0.0; n as usize + 1];
        for d in &stencil {
            let mut r2 = 0.0;
            for a in 0..grid.dim() {
                let v = d[a] as f64 * h[a];
                r2 += v * v;
            }
            let mut pw = 1.0;
            for m in moments.iter_mut() {
                *m += pw;
                pw *= r2;
            }
        }
        for m in moments.iter_mut() {
            *m *= inv;
        }
        Ok(Self { stencil, moments })
    }

    fn remainder_mean(
        &self,
        grid: &GridSpec,
        f: &[f64],
        gs: &[ScalarField],
        n: u32,
        flat: usize,
    ) -> f64 {
        let mi = grid.multi_index(flat);
        let inv = 1.0 / self.stencil.len() as f64;
        // mean of f(y), and mean of g_N(y) when N >= 1
        let mut mean_f = 0.0;
        let mut mean_gn = 0.0;
        for d in &self.stencil {
            let idx = shifted_index(grid, &mi, d);
            mean_f += f[idx];
            if n >= 1 {
                mean_gn += gs[n as usize - 1].values()[idx];
            }
        }
        mean_f *= inv;
        mean_gn *= inv;
        let mut out = mean_f - f[flat];
        for j in 1..n {
            out -= gs[j as usize - 1].values()[flat] * self.moments[j as usize];
        }
        if n >= 1 {
            out -= mean_gn * self.moments[n as usize];
        }
        out
    }
}

fn square_function_direct(
    field: &ScalarField,
    gs_fields: &[ScalarField],
    order: &SmoothnessOrder,
    quad: &ScaleQuadrature,
) -> Result<SquareFunctionResult> {
    let grid = field.grid().clone();
    let n = order.corrections();
    let alpha = order.alpha();
    let fhat = forward_spectrum(field);
    let t_range = TRangeCheck::for_spectrum(&fhat, quad);
    let mut acc = vec![0.0f64; grid.len()];
    for (&t, &w) in quad.nodes().iter().zip(quad.weights()) {
        let scale = DirectScale::build(&grid, t, n)?;
        let wt = w * t.powf(-2.0 * alpha);
        for flat in 0..grid.len() {
            let r = scale.remainder_mean(&grid, field.values(), gs_fields, n, flat);
            acc[flat] += wt * r * r;
        }
    }
    let values = acc.into_iter().map(f64::sqrt).collect();
    Ok(SquareFunctionResult {
        field: ScalarField::new(grid, values)?,
        t_range,
    })
}

/// The square function `S_alpha(f, g_1..g_N)` over the given scale
/// quadrature, in either evaluation mode.
pub fn square_function(
    field: &ScalarField,
    gs: &Corrections,
    order: &SmoothnessOrder,
    quad: &ScaleQuadrature,
    mode: BallMeanMode,
) -> Result<SquareFunctionResult> {
    let resolved = resolve_corrections(field, gs, order)?;
    match mode {
        BallMeanMode::Spectral => square_function_spectral(field, &resolved, order, quad),
        BallMeanMode::Direct => {
            let gs_fields = match resolved {
                Some(list) => list,
                None => auto_corrections(field, order)?,
            };
            square_function_direct(field, &gs_fields, order, quad)
        }
    }
}

/// Direct-mode ball average of the corrected remainder at a single point.
/// This is the direct mode's per-scale building block, exposed for oracle
/// checks (polynomial annihilation at window centers).
pub fn remainder_ball_mean_direct(
    field: &ScalarField,
    gs: &[ScalarField],
    order: &SmoothnessOrder,
    t: f64,
    flat: usize,
) -> Result<f64> {
    let n = order.corrections();
    if gs.len() != n as usize {
        return Err(Error::CorrectionCount {
            expected: n as usize,
            got: gs.len(),
        });
    }
    let grid = field.grid();
    let scale = DirectScale::build(grid, t, n)?;
    Ok(scale.remainder_mean(grid, field.values(), gs, n, flat))
}

/// Zero-smoothness square function
/// `S_0(f)^2(x) = int |f_{B(x,t)} - f_{B(x,2t)}|^2 dt/t`, evaluated
/// spectrally.
pub fn s0_square_function(field: &ScalarField, quad: &ScaleQuadrature) -> Result<ScalarField> {
    let grid = field.grid().clone();
    let dim = grid.dim();
    let fhat = forward_spectrum(field);
    let mut acc = vec![0.0f64; grid.len()];
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (&t, &w) in quad.nodes().iter().zip(quad.weights()) {
        for (i, c) in coeffs.iter_mut().enumerate() {
            let xi = fhat.freq_mag()[i];
            let m = ball_profile(dim, t * xi).expect("finite")
                - ball_profile(dim, 2.0 * t * xi).expect("finite");
            *c = fhat.coeffs()[i] * m;
        }
        let at = inverse_spectrum(&SpectralField::from_coeffs(grid.clone(), coeffs.clone())?)?;
        for (s, &v) in acc.iter_mut().zip(at.values()) {
            *s += w * v * v;
        }
    }
    ScalarField::new(grid, acc.into_iter().map(f64::sqrt).collect())
}

/// Recover the correction fields from the small-scale behavior of the ball
/// averages: a per-point weighted least squares of
/// `avg_{B(x,t)} (f(y) - f(x))  ~  sum_j M_j t^{2j} u_j(x)`
/// over the quadrature nodes, with the same `t^{-2 alpha}` weighting the
/// square function uses.
pub fn recover_g(
    field: &ScalarField,
    order: &SmoothnessOrder,
    quad: &ScaleQuadrature,
) -> Result<Vec<ScalarField>> {
    let n = order.corrections() as usize;
    if n == 0 {
        return Ok(Vec::new());
    }
    let grid = field.grid().clone();
    let dim = grid.dim();
    let fhat = forward_spectrum(field);

    // b_k(x) = ball mean at t_k minus f(x), spectrally.
    let mut b_fields = Vec::with_capacity(quad.len());
    for &t in quad.nodes() {
        let bt = fhat.apply_radial_multiplier(|xi| {
            ball_profile(dim, t * xi).expect("finite") - 1.0
        });
        b_fields.push(inverse_spectrum(&bt)?);
    }

    // Normalize scales by the geometric mean to condition the Gram matrix.
    let t_ref = (quad.t_min() * quad.t_max()).sqrt();
    let alpha = order.alpha();
    let m_consts: Vec<f64> = (1..=n).map(|j| moment_m(dim, j as u32)).collect();

    let mut gram = vec![vec![0.0f64; n]; n];
    for (&t, &w) in quad.nodes().iter().zip(quad.weights()) {
        let wt = w * t.powf(-2.0 * alpha);
        let ts = t / t_ref;
        for j in 0..n {
            for l in 0..n {
                gram[j][l] += wt * m_consts[j] * m_consts[l] * ts.powi(2 * (j + l + 2) as i32);
            }
        }
    }
    // Condition check on the diagonally scaled Gram matrix.
    let mut scaled = gram.clone();
    for j in 0..n {
        for l in 0..n {
            scaled[j][l] /= (gram[j][j] * gram[l][l]).sqrt();
        }
    }
    let det = det_small(&scaled);
    if !det.is_finite() || det.abs() < 1e-12 {
        return Err(Error::IllConditionedFit(format!(
            "scaled Gram determinant {det:.3e}; widen the scale range"
        )));
    }

    // Right-hand sides per point.
    let len = grid.len();
    let mut rhs = vec![vec![0.0f64; len]; n];
    for ((&t, &w), b) in quad.nodes().iter().zip(quad.weights()).zip(&b_fields) {
        let wt = w * t.powf(-2.0 * alpha);
        let ts = t / t_ref;
        for j in 0..n {
            let c = wt * m_consts[j] * ts.powi(2 * (j + 1) as i32);
            let row = &mut rhs[j];
            for (r, &bv) in row.iter_mut().zip(b.values()) {
                *r += c * bv;
            }
        }
    }

    let chol = cholesky_small(&gram).ok_or_else(|| {
        Error::IllConditionedFit("Gram matrix not positive definite".into())
    })?;
    let mut out_vals = vec![vec![0.0f64; len]; n];
    let mut local_rhs = vec![0.0f64; n];
    for x in 0..len {
        for j in 0..n {
            local_rhs[j] = rhs[j][x];
        }
        let sol = cholesky_solve(&chol, &local_rhs);
        for j in 0..n {
            // undo the t/t_ref rescaling of the basis
            out_vals[j][x] = sol[j] / t_ref.powi(2 * (j + 1) as i32);
        }
    }
    out_vals
        .into_iter()
        .map(|v| ScalarField::new(grid.clone(), v))
        .collect()
}

fn det_small(m: &[Vec<f64>]) -> f64 {
    match m.len() {
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        3 => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
        _ => f64::NAN,
    }
}

fn cholesky_small(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    let mut l = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = m[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i][j] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

fn cholesky_solve(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut y = vec![0.0f64; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    let mut x = vec![0.0f64; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    x
}

/// Norm pair and ratio of the equivalence experiment.
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub alpha: f64,
    pub p: f64,
    /// `|| S_alpha(f, auto) ||_p`
    pub norm_square_function: f64,
    /// `|| (-Delta)^{alpha/2} f ||_p`
    pub norm_frac_laplacian: f64,
    pub ratio: f64,
    /// `sqrt(I(alpha, n))`, the exact `p = 2` ratio; `None` for other `p`.
    pub predicted_ratio: Option<f64>,
    pub t_range: TRangeCheck,
    pub quad_t_min: f64,
    pub quad_t_max: f64,
    pub quad_len: usize,
}

/// Compare `||S_alpha(f, auto)||_p` against `||(-Delta)^{alpha/2} f||_p`.
pub fn equivalence_report(
    field: &ScalarField,
    order: &SmoothnessOrder,
    quad: &ScaleQuadrature,
    mode: BallMeanMode,
) -> Result<EquivalenceReport> {
    let sf = square_function(field, &Corrections::Auto, order, quad, mode)?;
    let norm_s = lp_norm(&sf.field, order.p())?;
    let frac = frac_laplacian(field, order.alpha())?;
    let norm_f = lp_norm(&frac, order.p())?;
    if norm_f == 0.0 {
        return Err(Error::InvalidParameter(
            "field is constant; equivalence ratio undefined".into(),
        ));
    }
    let predicted = if order.p() == 2.0 {
        Some(
            equivalence_constant(field.grid().dim(), order.alpha(), 1e-6)?
                .value
                .sqrt(),
        )
    } else {
        None
    };
    Ok(EquivalenceReport {
        alpha: order.alpha(),
        p: order.p(),
        norm_square_function: norm_s,
        norm_frac_laplacian: norm_f,
        ratio: norm_s / norm_f,
        predicted_ratio: predicted,
        t_range: sf.t_range,
        quad_t_min: quad.t_min(),
        quad_t_max: quad.t_max(),
        quad_len: quad.len(),
    })
}
