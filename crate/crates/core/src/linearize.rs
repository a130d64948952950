//! First derivatives of the transformed operator `G̃(D²u, Du) = G(𝒜(D²u, Du))`.
//!
//! `G^{ij} = ∂G/∂a_ij` comes from the spectral first-derivative formula
//! `G^{ij} = Σ_k g_k q_ki q_kj` with `g_k = A e^{−AF}/(1 + κ_k²)`. The
//! coefficients of the linearized operator `G̃_ij ∂_ij + G̃_i ∂_i` are
//!
//! ```text
//! G̃_ij = (1/w) b^ik G^kl b^lj
//! G̃_i  = −(u_i/w²) Σ_j g_j κ_j − (2/w) b^ik G^kl a_lm u_m
//! ```

use rand::Rng;

use crate::cone::g_derivatives;
use crate::error::{Error, Result};
use crate::geometry::{assemble_point, concave_g, OperatorParams, PointGeometry};
use crate::seeded_rng;
use crate::smalldense::{DenseMatrix, SymMatrix};

/// Minimum phase margin for the analytic derivatives to be trusted.
pub const MIN_LINEARIZATION_MARGIN: f64 = 1e-10;
/// Step for the finite-difference validation harness.
pub const FD_STEP: f64 = 1e-5;

#[derive(Clone, Debug)]
pub struct LinearizedPoint {
    /// `G̃_ij`, coefficients of `∂_ij`.
    pub g_tilde_second: SymMatrix,
    /// `G̃_i`, coefficients of `∂_i`.
    pub g_tilde_first: Vec<f64>,
    /// `G^{ij}` in the frame of `a_ij`.
    pub g_upper: SymMatrix,
    /// `g_i = ∂G/∂κ_i`.
    pub g_diag: Vec<f64>,
}

impl LinearizedPoint {
    pub fn sum_g(&self) -> f64 {
        self.g_diag.iter().sum()
    }
}

fn check_margin(geom: &PointGeometry, params: &OperatorParams) -> Result<()> {
    let margin = params.margin(&geom.kappa);
    if margin < MIN_LINEARIZATION_MARGIN {
        return Err(Error::ConeBoundary { margin });
    }
    Ok(())
}

fn g_upper_unchecked(geom: &PointGeometry, params: &OperatorParams) -> (SymMatrix, Vec<f64>) {
    let g = g_derivatives(&geom.kappa, params);
    (geom.frame.reconstruct_with(&g), g)
}

/// `G^{ij} = ∂G/∂a_ij`.
pub fn dg_da(geom: &PointGeometry, params: &OperatorParams) -> Result<SymMatrix> {
    check_margin(geom, params)?;
    Ok(g_upper_unchecked(geom, params).0)
}

fn coeffs_unchecked(geom: &PointGeometry, params: &OperatorParams) -> LinearizedPoint {
    let (g_upper, g_diag) = g_upper_unchecked(geom, params);
    let w = geom.w;
    let g_tilde_second = g_upper.congruence(&geom.b_upper).scale(1.0 / w);

    let weighted: f64 = g_diag.iter().zip(&geom.kappa).map(|(g, k)| g * k).sum();
    // b · G · a · Du
    let bga = DenseMatrix::from(geom.b_upper)
        .mul(&DenseMatrix::from(g_upper))
        .mul(&DenseMatrix::from(geom.amat));
    let contraction = bga.mul_vec(&geom.grad);
    let g_tilde_first = geom
        .grad
        .iter()
        .zip(&contraction)
        .map(|(ui, c)| -ui / (w * w) * weighted - 2.0 / w * c)
        .collect();

    LinearizedPoint {
        g_tilde_second,
        g_tilde_first,
        g_upper,
        g_diag,
    }
}

/// Linearized coefficients at an admissible point.
pub fn linearized_coeffs(geom: &PointGeometry, params: &OperatorParams) -> Result<LinearizedPoint> {
    check_margin(geom, params)?;
    Ok(coeffs_unchecked(geom, params))
}

/// `G̃` as a function of the raw derivatives.
pub fn g_tilde(grad: &[f64], hess: &SymMatrix, params: &OperatorParams) -> Result<f64> {
    let geom = assemble_point(grad, hess)?;
    Ok(concave_g(&geom.kappa, params))
}

/// Worst scaled error between the analytic directional derivative of `G̃`
/// and central differences over `trials` random unit directions in
/// `(D²u, Du)` space.
///
/// The error of one trial is `|analytic − fd| / (‖∇G̃‖ · ‖direction‖)`, the
/// directional error relative to the full gradient, so that directions
/// nearly orthogonal to the gradient do not inflate it.
pub fn fd_validate(
    geom: &PointGeometry,
    params: &OperatorParams,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let lin = linearized_coeffs(geom, params)?;
    let n = geom.dim();
    let mut rng = seeded_rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let dh = SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let dp: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        worst = worst.max(directional_error(geom, params, &lin, &dh, &dp)?);
    }
    Ok(worst)
}

fn gradient_norm(lin: &LinearizedPoint) -> f64 {
    let s = &lin.g_tilde_second;
    s.contract(s)
        .sqrt()
        .hypot(lin.g_tilde_first.iter().map(|x| x * x).sum::<f64>().sqrt())
}

/// Scaled error of a single direction `(dh, dp)`; zero for the zero direction.
pub fn directional_error(
    geom: &PointGeometry,
    params: &OperatorParams,
    lin: &LinearizedPoint,
    dh: &SymMatrix,
    dp: &[f64],
) -> Result<f64> {
    let dir_norm = dh
        .contract(dh)
        .sqrt()
        .hypot(dp.iter().map(|x| x * x).sum::<f64>().sqrt());
    if dir_norm == 0.0 {
        return Ok(0.0);
    }
    let dh = dh.scale(1.0 / dir_norm);
    let dp: Vec<f64> = dp.iter().map(|x| x / dir_norm).collect();
    let analytic = lin.g_tilde_second.contract(&dh)
        + lin
            .g_tilde_first
            .iter()
            .zip(&dp)
            .map(|(a, b)| a * b)
            .sum::<f64>();
    let eps = FD_STEP;
    let plus_p: Vec<f64> = geom
        .grad
        .iter()
        .zip(&dp)
        .map(|(p, d)| p + eps * d)
        .collect();
    let minus_p: Vec<f64> = geom
        .grad
        .iter()
        .zip(&dp)
        .map(|(p, d)| p - eps * d)
        .collect();
    let plus = g_tilde(&plus_p, &geom.hess.add(&dh.scale(eps)), params)?;
    let minus = g_tilde(&minus_p, &geom.hess.add(&dh.scale(-eps)), params)?;
    let fd = (plus - minus) / (2.0 * eps);
    let scale = gradient_norm(lin);
    if scale == 0.0 {
        return Ok((analytic - fd).abs());
    }
    Ok((analytic - fd).abs() / scale)
}

/// `Σ_ij G̃_ij(u)·(u̲_ij − u_ij)`, the subsolution gap monitor.
///
/// Evaluated whether or not `u` is admissible; it is a diagnostic stream.
pub fn subsolution_gap(
    geom_u: &PointGeometry,
    geom_sub: &PointGeometry,
    params: &OperatorParams,
) -> f64 {
    let lin = coeffs_unchecked(geom_u, params);
    lin.g_tilde_second
        .contract(&geom_sub.hess.sub(&geom_u.hess))
}

/// `Σ_i g_i` at any point, admissible or not.
pub fn sum_g(geom: &PointGeometry, params: &OperatorParams) -> f64 {
    g_derivatives(&geom.kappa, params).iter().sum()
}

/// Both sides of the trace identity `Σ G̃_ij u_ij = Σ g_i κ_i`.
pub fn trace_identity(geom: &PointGeometry, lin: &LinearizedPoint) -> (f64, f64) {
    let lhs = lin.g_tilde_second.contract(&geom.hess);
    let rhs = lin.g_diag.iter().zip(&geom.kappa).map(|(g, k)| g * k).sum();
    (lhs, rhs)
}

/// `count` random points `(Du, D²u)` whose curvatures have phase margin at
/// least `min_margin`. Gradient entries are drawn from `[−2, 2]`, Hessian
/// entries from `[−4, 4]`.
pub fn sample_admissible_points(
    params: &OperatorParams,
    count: usize,
    min_margin: f64,
    seed: u64,
) -> Result<Vec<PointGeometry>> {
    let n = params.n;
    let mut rng = seeded_rng(seed);
    let mut out = Vec::with_capacity(count);
    let max_draws = 1000 * count.max(1);
    let mut draws = 0;
    while out.len() < count {
        if draws == max_draws {
            return Err(Error::SamplerStalled {
                accepted: out.len(),
                draws,
            });
        }
        draws += 1;
        let grad: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let hess = SymMatrix::from_fn(n, |_, _| rng.gen_range(-4.0..4.0));
        let geom = assemble_point(&grad, &hess)?;
        if params.margin(&geom.kappa) >= min_margin {
            out.push(geom);
        }
    }
    Ok(out)
}

/// Outcome of [`linearization_suite`].
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LinearizationReport {
    pub points: usize,
    pub trials_per_point: usize,
    pub worst_fd_error: f64,
    /// Largest `|Σ G̃_ij u_ij − Σ g_i κ_i| / (1 + |Σ g_i κ_i|)`.
    pub worst_trace_error: f64,
}

pub fn linearization_suite(
    params: &OperatorParams,
    points: usize,
    trials: usize,
    seed: u64,
) -> Result<LinearizationReport> {
    let sample = sample_admissible_points(params, points, 1e-3, seed)?;
    let mut worst_fd_error = 0.0f64;
    let mut worst_trace_error = 0.0f64;
    for (k, geom) in sample.iter().enumerate() {
        worst_fd_error = worst_fd_error.max(fd_validate(
            geom,
            params,
            trials,
            seed.wrapping_add(1 + k as u64),
        )?);
        let lin = linearized_coeffs(geom, params)?;
        let (lhs, rhs) = trace_identity(geom, &lin);
        worst_trace_error = worst_trace_error.max((lhs - rhs).abs() / (1.0 + rhs.abs()));
    }
    Ok(LinearizationReport {
        points: sample.len(),
        trials_per_point: trials,
        worst_fd_error,
        worst_trace_error,
    })
}
