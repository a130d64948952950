//! Oracles and verification suites: manufactured radial solutions, the
//! discrete harmonic extension, mass testing of the cone properties and
//! grid convergence studies.

use serde::{Deserialize, Serialize};

use crate::cone::{
    calibrate_a, check_cone_properties, convexity_probe, probe_inequalities, sample_admissible,
    CalibrationResult, InequalityProbes,
};
use crate::error::{Error, Result};
use crate::geometry::{sigma_for, validate_delta, OperatorParams};
use crate::grid::{Grid2D, GridField};
use crate::smalldense::{sparse_solve, SparseSystem};
use crate::solver::{continuity_solve, Problem, SolveReport, SolverConfig};

/// Floor on the admissibility margin of a manufactured right-hand side.
pub const MANUFACTURED_MARGIN_FLOOR: f64 = 0.05;

/// Radially symmetric profiles `u(r)` with closed-form principal curvatures.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RadialProfile {
    /// `u = c r²/2`.
    Quadratic { c: f64 },
    /// `u = (exp(c r²/2) − 1)/c`. Not a polynomial, so central differences
    /// carry a genuine truncation error.
    Exponential { c: f64 },
}

impl RadialProfile {
    pub fn c(&self) -> f64 {
        match *self {
            Self::Quadratic { c } | Self::Exponential { c } => c,
        }
    }

    pub fn u(&self, r: f64) -> f64 {
        match *self {
            Self::Quadratic { c } => 0.5 * c * r * r,
            Self::Exponential { c } => (0.5 * c * r * r).exp_m1() / c,
        }
    }

    /// `u_r / r`, finite at the origin.
    pub fn ur_over_r(&self, r: f64) -> f64 {
        match *self {
            Self::Quadratic { c } => c,
            Self::Exponential { c } => (0.5 * c * r * r).exp(),
        }
    }

    pub fn ur(&self, r: f64) -> f64 {
        r * self.ur_over_r(r)
    }

    pub fn urr(&self, r: f64) -> f64 {
        match *self {
            Self::Quadratic { c } => c,
            Self::Exponential { c } => (1.0 + c * r * r) * (0.5 * c * r * r).exp(),
        }
    }

    /// `(κ_rad, κ_tan)` of the graph at radius `r`, unsorted.
    pub fn curvatures(&self, r: f64) -> (f64, f64) {
        let ur = self.ur(r);
        let s = 1.0 + ur * ur;
        (self.urr(r) / s.powf(1.5), self.ur_over_r(r) / s.sqrt())
    }
}

#[derive(Clone, Debug)]
pub struct ManufacturedProblem {
    pub profile: RadialProfile,
    pub u_star: GridField,
    pub h_field: GridField,
    pub phi: GridField,
    pub delta_used: f64,
}

impl ManufacturedProblem {
    /// Dirichlet problem whose exact solution is `u_star`, with `u_star` as
    /// the supplied subsolution.
    pub fn problem(&self, params: OperatorParams) -> Result<Problem> {
        Problem::new(
            params,
            self.h_field.clone(),
            self.phi.clone(),
            Some(self.u_star.clone()),
        )
    }
}

/// `u = c(x² + y²)/2` sampled on `grid`, with `h` from the radial closed forms.
pub fn manufactured_radial(grid: Grid2D, c: f64) -> Result<ManufacturedProblem> {
    manufactured_profile(grid, RadialProfile::Quadratic { c })
}

pub fn manufactured_profile(grid: Grid2D, profile: RadialProfile) -> Result<ManufacturedProblem> {
    let c = profile.c();
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Validation(format!(
            "profile parameter c must be positive, got {c}"
        )));
    }
    let radius = |x: f64, y: f64| x.hypot(y);
    let u_star = GridField::from_fn(grid, |x, y| profile.u(radius(x, y)));
    let h_field = GridField::from_fn(grid, |x, y| {
        let (a, b) = profile.curvatures(radius(x, y));
        a.atan() + b.atan()
    });
    if !u_star
        .values
        .iter()
        .chain(&h_field.values)
        .all(|v| v.is_finite())
    {
        return Err(Error::NonFinite("manufactured fields"));
    }
    let floor = sigma_for(2, 0.0);
    let delta_used = h_field
        .values
        .iter()
        .fold(f64::INFINITY, |m, &h| m.min(h - floor));
    if delta_used.is_nan() || delta_used <= MANUFACTURED_MARGIN_FLOOR {
        return Err(Error::MarginTooSmall {
            margin: delta_used,
            floor: MANUFACTURED_MARGIN_FLOOR,
        });
    }
    Ok(ManufacturedProblem {
        profile,
        phi: u_star.clone(),
        u_star,
        h_field,
        delta_used,
    })
}

/// Five-point discrete harmonic extension of the boundary values of `phi`.
pub fn harmonic_extension(phi: &GridField, grid: Grid2D) -> Result<GridField> {
    if phi.grid != grid {
        return Err(Error::Dimension(
            "boundary data lives on a different grid".into(),
        ));
    }
    let (cx, cy) = (1.0 / (grid.hx * grid.hx), 1.0 / (grid.hy * grid.hy));
    let mut trip = Vec::with_capacity(5 * grid.interior_count());
    let mut rhs = vec![0.0; grid.interior_count()];
    for (i, j) in grid.interior() {
        let row = grid.unknown(i, j);
        trip.push((row, row, -2.0 * (cx + cy)));
        for (ni, nj, c) in [
            (i + 1, j, cx),
            (i - 1, j, cx),
            (i, j + 1, cy),
            (i, j - 1, cy),
        ] {
            if grid.is_interior(ni, nj) {
                trip.push((row, grid.unknown(ni, nj), c));
            } else {
                rhs[row] -= c * phi.at(ni, nj);
            }
        }
    }
    let sol = sparse_solve(&SparseSystem::from_triplets(
        grid.interior_count(),
        trip,
        rhs,
    )?)?;
    let mut out = phi.clone();
    for (i, j) in grid.interior() {
        out.set(i, j, sol[grid.unknown(i, j)]);
    }

    let boundary = grid
        .nodes()
        .filter(|&(i, j)| grid.is_boundary(i, j))
        .map(|(i, j)| phi.at(i, j));
    let (lo, hi) = boundary.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| {
        (l.min(v), h.max(v))
    });
    let slack = 1e-10 * (1.0 + lo.abs().max(hi.abs()));
    for (i, j) in grid.interior() {
        let v = out.at(i, j);
        if v < lo - slack || v > hi + slack {
            return Err(Error::MaximumPrinciple(format!(
                "node ({i}, {j}) has {v} outside boundary range [{lo}, {hi}]"
            )));
        }
    }
    Ok(out)
}

/// Node-wise sandwich `u̲ − ε ≤ u ≤ ū + ε` with `ε = 10 h² max|u|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub eps: f64,
    /// `max (u − ū)` over interior nodes.
    pub max_upper_excess: f64,
    /// `max (u̲ − u)` over interior nodes, when a subsolution is given.
    pub max_lower_excess: Option<f64>,
    pub upper_ok: bool,
    pub lower_ok: bool,
}

impl ComparisonReport {
    pub fn passed(&self) -> bool {
        self.upper_ok && self.lower_ok
    }
}

pub fn comparison_check(
    u: &GridField,
    phi: &GridField,
    subsolution: Option<&GridField>,
) -> Result<ComparisonReport> {
    let grid = u.grid;
    let ubar = harmonic_extension(phi, grid)?;
    let eps = 10.0 * grid.h().powi(2) * u.max_abs();
    let upper = grid.interior().fold(f64::NEG_INFINITY, |m, (i, j)| {
        m.max(u.at(i, j) - ubar.at(i, j))
    });
    let lower = subsolution.map(|s| {
        grid.interior().fold(f64::NEG_INFINITY, |m, (i, j)| {
            m.max(s.at(i, j) - u.at(i, j))
        })
    });
    Ok(ComparisonReport {
        eps,
        max_upper_excess: upper,
        max_lower_excess: lower,
        upper_ok: upper <= eps,
        lower_ok: lower.is_none_or(|l| l <= eps),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub nodes: usize,
    pub h: f64,
    pub max_error: f64,
    pub sup_grad: f64,
    pub sup_hess: f64,
    pub stages: usize,
    pub newton_iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub profile: RadialProfile,
    pub delta: f64,
    pub a_param: f64,
    pub rows: Vec<ConvergenceRow>,
    /// `log₂(e_k / e_{k+1})` between successive grids.
    pub orders: Vec<f64>,
}

/// One manufactured run kept in full for downstream checks.
#[derive(Clone, Debug)]
pub struct ManufacturedRun {
    pub manufactured: ManufacturedProblem,
    pub problem: Problem,
    pub u: GridField,
    pub report: SolveReport,
}

/// Exponent used when none is given: calibrated on 1000 samples at the
/// manufactured margin.
pub fn auto_a(delta: f64, seed: u64) -> Result<f64> {
    Ok(calibrate_a(2, delta, 1000, seed)?.a_param)
}

/// Solves the manufactured problem on each `sizes[k]² ` grid over `[−1, 1]²`.
///
/// `delta` and `a_param` default to the margin of the coarsest grid and the
/// calibrated exponent; both are then held fixed across the refinement.
pub fn convergence_runs(
    profile: RadialProfile,
    sizes: &[usize],
    config: &SolverConfig,
    delta: Option<f64>,
    a_param: Option<f64>,
    seed: u64,
) -> Result<(ConvergenceStudy, Vec<ManufacturedRun>)> {
    if sizes.len() < 3 || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Validation(format!(
            "grid sizes must be strictly increasing with at least 3 entries, got {sizes:?}"
        )));
    }
    let mut manufactured = sizes
        .iter()
        .map(|&s| manufactured_profile(Grid2D::unit_square(s)?, profile))
        .collect::<Result<Vec<_>>>()?;
    let min_margin = manufactured
        .iter()
        .fold(f64::INFINITY, |m, p| m.min(p.delta_used));
    let delta = delta.unwrap_or(min_margin);
    if delta > min_margin {
        return Err(Error::Validation(format!(
            "δ = {delta} exceeds the manufactured margin {min_margin}"
        )));
    }
    let a_param = match a_param {
        Some(a) => a,
        None => auto_a(delta, seed)?,
    };
    let params = OperatorParams::new(2, delta, a_param)?;
    let mut rows = Vec::new();
    let mut runs = Vec::new();
    for m in manufactured.drain(..) {
        let problem = m.problem(params)?;
        let (u, report) = continuity_solve(&problem, config)?;
        let max_error = u.max_diff(&m.u_star);
        let (sup_grad, sup_hess) = report.monitors().fold((0.0f64, 0.0f64), |(g, h), r| {
            (g.max(r.sup_grad), h.max(r.sup_hess))
        });
        rows.push(ConvergenceRow {
            nodes: problem.grid.nx,
            h: problem.grid.h(),
            max_error,
            sup_grad,
            sup_hess,
            stages: report.per_t.len(),
            newton_iterations: report.per_t.iter().map(|s| s.iterations).sum(),
        });
        runs.push(ManufacturedRun {
            manufactured: m,
            problem,
            u,
            report,
        });
    }
    let orders = rows
        .windows(2)
        .map(|w| (w[0].max_error / w[1].max_error).log2())
        .collect();
    Ok((
        ConvergenceStudy {
            profile,
            delta,
            a_param,
            rows,
            orders,
        },
        runs,
    ))
}

pub fn convergence_study(
    profile: RadialProfile,
    sizes: &[usize],
    config: &SolverConfig,
    delta: Option<f64>,
    a_param: Option<f64>,
    seed: u64,
) -> Result<ConvergenceStudy> {
    convergence_runs(profile, sizes, config, delta, a_param, seed).map(|(s, _)| s)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteCase {
    pub n: usize,
    pub delta: f64,
    pub samples: usize,
    /// Violation counts of the five cone properties.
    pub violations: [usize; 5],
    pub worst_violation: f64,
    pub convexity_violations: usize,
    pub convexity_checks: usize,
    pub convexity_worst_margin: f64,
    pub calibrated_a: Option<f64>,
    pub calibration_quotient: Option<f64>,
    pub calibration_error: Option<String>,
    pub min_weighted_sum: f64,
    pub max_ratio: f64,
    pub min_last_derivative: f64,
    pub min_sum_derivative: f64,
}

impl SuiteCase {
    pub fn passed(&self) -> bool {
        self.violations.iter().all(|&v| v == 0)
            && self.convexity_violations == 0
            && self.calibrated_a.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub cases: Vec<SuiteCase>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(SuiteCase::passed)
    }
}

/// Options for [`cone_suites_with`].
#[derive(Clone, Copy, Debug)]
pub struct SuiteOptions {
    pub calibrate: bool,
    /// Samples fed to the calibration (at least 1000).
    pub calibration_samples: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            calibrate: true,
            calibration_samples: 1000,
        }
    }
}

pub fn cone_suites(
    n: usize,
    deltas: &[f64],
    samples_per_case: usize,
    seed: u64,
) -> Result<SuiteReport> {
    cone_suites_with(n, deltas, samples_per_case, seed, SuiteOptions::default())
}

/// Mass test of the cone properties, the convexity probe, the concavity
/// calibration and the inequality probes for each `δ`.
///
/// Inputs are validated up front; once running, failures are reported as
/// data in the returned cases.
pub fn cone_suites_with(
    n: usize,
    deltas: &[f64],
    samples_per_case: usize,
    seed: u64,
    options: SuiteOptions,
) -> Result<SuiteReport> {
    if samples_per_case < 1000 {
        return Err(Error::Validation(format!(
            "at least 1000 samples per case required, got {samples_per_case}"
        )));
    }
    if !(1..=4).contains(&n) {
        return Err(Error::Validation(format!(
            "dimension must be in 1..=4, got {n}"
        )));
    }
    for &d in deltas {
        validate_delta(d)?;
    }
    let mut cases = Vec::with_capacity(deltas.len());
    for (k, &delta) in deltas.iter().enumerate() {
        let case_seed = seed.wrapping_add(0x1000 * k as u64);
        let samples = sample_admissible(n, delta, samples_per_case, case_seed)?;
        let mut violations = [0usize; 5];
        let mut worst = 0.0f64;
        for kappa in &samples {
            let rep = check_cone_properties(kappa, delta)?;
            for (count, ok) in violations.iter_mut().zip(rep.props) {
                *count += usize::from(!ok);
            }
            worst = worst.max(rep.worst_violation);
        }
        let (cv, cc, cw) = convexity_probe(&samples, delta, case_seed ^ 0x5bd1_e995)?;
        let (calibrated_a, calibration_quotient, calibration_error, a_for_probes) =
            if options.calibrate {
                match calibrate_a(n, delta, options.calibration_samples, case_seed) {
                    Ok(CalibrationResult {
                        a_param,
                        max_hess_eigenvalue,
                        ..
                    }) => (Some(a_param), Some(max_hess_eigenvalue), None, a_param),
                    Err(e) => (None, None, Some(e.to_string()), 1.0),
                }
            } else {
                (None, None, Some("calibration skipped".into()), 1.0)
            };
        let InequalityProbes {
            min_weighted_sum,
            max_ratio,
            min_last_derivative,
            min_sum_derivative,
        } = probe_inequalities(&samples, &OperatorParams::new(n, delta, a_for_probes)?);
        cases.push(SuiteCase {
            n,
            delta,
            samples: samples.len(),
            violations,
            worst_violation: worst,
            convexity_violations: cv,
            convexity_checks: cc,
            convexity_worst_margin: cw,
            calibrated_a,
            calibration_quotient,
            calibration_error,
            min_weighted_sum,
            max_ratio,
            min_last_derivative,
            min_sum_derivative,
        });
    }
    Ok(SuiteReport { cases })
}

/// Reference computations that avoid the symmetric curvature matrix and
/// the Jacobi eigensolver.
pub mod oracle {
    use crate::smalldense::{DenseMatrix, SymMatrix};
    use std::f64::consts::PI;

    /// Real eigenvalues of the (generally nonsymmetric) matrix `m`, sorted
    /// descending, from its characteristic polynomial. Supports n ≤ 3.
    pub fn char_poly_eigenvalues(m: &DenseMatrix) -> Vec<f64> {
        let n = m.dim();
        let e = |i: usize, j: usize| m.get(i, j);
        let mut out = match n {
            1 => vec![e(0, 0)],
            2 => {
                let tr = e(0, 0) + e(1, 1);
                let det = e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0);
                let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
                vec![0.5 * tr + disc, 0.5 * tr - disc]
            }
            3 => {
                // λ³ − c2 λ² + c1 λ − c0 with trigonometric roots.
                let c2 = e(0, 0) + e(1, 1) + e(2, 2);
                let c1 = e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0) + e(0, 0) * e(2, 2)
                    - e(0, 2) * e(2, 0)
                    + e(1, 1) * e(2, 2)
                    - e(1, 2) * e(2, 1);
                let c0 = m.determinant();
                let shift = c2 / 3.0;
                let p = c1 - c2 * c2 / 3.0;
                let q = -2.0 * c2.powi(3) / 27.0 + c2 * c1 / 3.0 - c0;
                if p.abs() <= 1e-300 {
                    let r = (-q).cbrt();
                    vec![shift + r; 3]
                } else {
                    let rad = 2.0 * (-p / 3.0).max(0.0).sqrt();
                    let arg = (3.0 * q / (p * rad)).clamp(-1.0, 1.0);
                    let theta = arg.acos() / 3.0;
                    (0..3)
                        .map(|k| shift + rad * (theta - 2.0 * PI * k as f64 / 3.0).cos())
                        .collect()
                }
            }
            _ => panic!("char_poly_eigenvalues supports n ≤ 3"),
        };
        out.sort_by(|a, b| b.total_cmp(a));
        out
    }

    /// Principal curvatures as eigenvalues of `h_ik g^kj` with
    /// `h = D²u/w`, `g^ = I − Du Duᵀ/w²`.
    pub fn shape_operator_curvatures(grad: &[f64], hess: &SymMatrix) -> Vec<f64> {
        let n = grad.len();
        let w = (1.0 + grad.iter().map(|g| g * g).sum::<f64>()).sqrt();
        let ginv = DenseMatrix::from_fn(n, |i, j| f64::from(i == j) - grad[i] * grad[j] / (w * w));
        let hh = DenseMatrix::from_fn(n, |i, j| hess.get(i, j) / w);
        char_poly_eigenvalues(&hh.mul(&ginv))
    }

    /// `−exp(−A Σ arctan λ(H)) − ψ` with the eigenvalues of the 2×2
    /// symmetric `H` in closed form.
    pub fn hessian_phase_residual(hess: &SymMatrix, a_param: f64, psi: f64) -> f64 {
        let (a, b, c) = (hess.get(0, 0), hess.get(1, 1), hess.get(0, 1));
        let mid = 0.5 * (a + b);
        let rad = (0.25 * (a - b) * (a - b) + c * c).sqrt();
        let f = (mid + rad).atan() + (mid - rad).atan();
        -(-a_param * f).exp() - psi
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{assemble_point, phase_f};
    use crate::grid::{fd_hessian, Grid2D};
    use crate::smalldense::SymMatrix;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn radial_center_and_corner() {
        let m = manufactured_radial(Grid2D::unit_square(17).unwrap(), 1.0).unwrap();
        assert_abs_diff_eq!(m.h_field.at(8, 8), FRAC_PI_2, epsilon = 1e-15);
        let (a, b) = RadialProfile::Quadratic { c: 1.0 }.curvatures(2f64.sqrt());
        assert_abs_diff_eq!(a, 0.192450, epsilon = 1e-6);
        assert_abs_diff_eq!(b, 0.577350, epsilon = 1e-6);
        assert_abs_diff_eq!(m.h_field.at(16, 16), 0.7137244, epsilon = 1e-7);
        assert_abs_diff_eq!(m.delta_used, m.h_field.at(0, 0), epsilon = 0.0);
        for (i, j) in m.u_star.grid.nodes() {
            if m.u_star.grid.is_boundary(i, j) {
                assert_eq!(m.phi.at(i, j), m.u_star.at(i, j));
            }
        }
    }

    #[test]
    fn radial_matches_curvature_pipeline() {
        for profile in [
            RadialProfile::Quadratic { c: 1.0 },
            RadialProfile::Exponential { c: 0.7 },
        ] {
            let m = manufactured_profile(Grid2D::unit_square(13).unwrap(), profile).unwrap();
            let g = m.u_star.grid;
            for (i, j) in g.nodes() {
                let (x, y) = (g.x(i), g.y(j));
                let r = x.hypot(y);
                let (ur, q) = (profile.ur(r), profile.ur_over_r(r));
                // Hessian of a radial function: q I + (u_rr − q) x̂ x̂ᵀ.
                let (ex, ey) = if r > 0.0 { (x / r, y / r) } else { (1.0, 0.0) };
                let d = profile.urr(r) - q;
                let hess = SymMatrix::from_rows(&[
                    &[q + d * ex * ex, d * ex * ey],
                    &[d * ex * ey, q + d * ey * ey],
                ]);
                let geom = assemble_point(&[ur * ex, ur * ey], &hess).unwrap();
                assert_abs_diff_eq!(phase_f(&geom.kappa), m.h_field.at(i, j), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn margin_floor_enforced() {
        let g = Grid2D::unit_square(9).unwrap();
        assert!(matches!(
            manufactured_radial(g, 0.02),
            Err(Error::MarginTooSmall { .. })
        ));
        assert!(manufactured_radial(g, -1.0).is_err());
    }

    #[test]
    fn harmonic_extension_examples() {
        let g = Grid2D::unit_square(11).unwrap();
        let k = harmonic_extension(&GridField::constant(g, 2.5), g).unwrap();
        assert!(k.values.iter().all(|v| (v - 2.5).abs() <= 1e-13));
        let saddle = GridField::from_fn(g, |x, y| x * x - y * y);
        assert!(harmonic_extension(&saddle, g).unwrap().max_diff(&saddle) <= 1e-13);
        let sub = GridField::from_fn(g, |x, _| x * x);
        let ext = harmonic_extension(&sub, g).unwrap();
        // x² is subharmonic, so it lies below its harmonic extension.
        assert!(g.interior().all(|(i, j)| ext.at(i, j) > sub.at(i, j)));
    }

    #[test]
    fn harmonic_field_hessian_is_trace_free() {
        let g = Grid2D::unit_square(9).unwrap();
        let phi = GridField::from_fn(g, |x, y| (x + 0.3).exp() * y.cos());
        let ext = harmonic_extension(&phi, g).unwrap();
        for (i, j) in g.interior() {
            assert!(fd_hessian(&ext, i, j).unwrap().trace().abs() <= 1e-10);
        }
    }

    #[test]
    fn suites_reject_bad_input() {
        assert!(cone_suites(2, &[0.0], 1000, 1).is_err());
        assert!(cone_suites(2, &[0.1], 999, 1).is_err());
    }

    #[test]
    fn small_suite_runs_clean() {
        let rep = cone_suites_with(
            2,
            &[0.1],
            2000,
            5,
            SuiteOptions {
                calibrate: false,
                ..Default::default()
            },
        )
        .unwrap();
        let case = &rep.cases[0];
        assert_eq!(case.violations, [0; 5]);
        assert_eq!(case.convexity_violations, 0);
        assert!(case.min_sum_derivative > 0.0);
    }

    #[test]
    fn study_rejects_bad_sizes() {
        let cfg = SolverConfig::default();
        let p = RadialProfile::Quadratic { c: 1.0 };
        assert!(convergence_study(p, &[9, 17], &cfg, None, Some(2.0), 0).is_err());
        assert!(convergence_study(p, &[9, 9, 17], &cfg, None, Some(2.0), 0).is_err());
    }

    #[test]
    fn char_poly_matches_known_spectra() {
        let m = crate::smalldense::DenseMatrix::from_fn(3, |i, j| {
            [[2.0, 1.0, 0.0], [0.0, 3.0, 1.0], [0.0, 0.0, -1.0]][i][j]
        });
        let ev = oracle::char_poly_eigenvalues(&m);
        for (a, b) in ev.iter().zip([3.0, 2.0, -1.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }
}
