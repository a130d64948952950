//! Damped Newton iteration for the transformed Dirichlet problem
//!
//! ```text
//! G̃(D²u, t·Du) = ψ(x)  in Ω,   u = φ  on ∂Ω,    ψ = −exp(−A·h),
//! ```
//!
//! embedded in a continuation over `t ∈ [0, 1]`. At `t = 0` the operator only
//! sees the Hessian, at `t = 1` it is the full curvature equation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{assemble_point, concave_g, psi_of_h, OperatorParams, PointGeometry};
use crate::grid::{apply_dirichlet, fd_gradient, fd_hessian, Grid2D, GridField};
use crate::harness::harmonic_extension;
use crate::linearize::{linearized_coeffs, subsolution_gap, sum_g};
use crate::smalldense::{sparse_solve, SparseSystem};

/// A validated Dirichlet problem on a box.
#[derive(Clone, Debug)]
pub struct Problem {
    pub grid: Grid2D,
    pub params: OperatorParams,
    pub h: GridField,
    /// Boundary data; only the boundary ring is read.
    pub phi: GridField,
    pub psi: GridField,
    pub subsolution: Option<GridField>,
}

impl Problem {
    pub fn new(
        params: OperatorParams,
        h: GridField,
        phi: GridField,
        subsolution: Option<GridField>,
    ) -> Result<Self> {
        if params.n != 2 {
            return Err(Error::Validation(format!(
                "the grid solver is two-dimensional, got n = {}",
                params.n
            )));
        }
        let grid = h.grid;
        if phi.grid != grid || subsolution.as_ref().is_some_and(|s| s.grid != grid) {
            return Err(Error::Dimension(
                "problem fields live on different grids".into(),
            ));
        }
        let mut psi = GridField::zeros(grid);
        for (k, &hv) in h.values.iter().enumerate() {
            psi.values[k] = psi_of_h(hv, &params).map_err(|e| {
                let (i, j) = (k % grid.nx, k / grid.nx);
                Error::Validation(format!(
                    "h at node ({i}, {j}) violates h ∈ [(n−2)π/2 + δ, nπ/2): {e}"
                ))
            })?;
        }
        Ok(Self {
            grid,
            params,
            h,
            phi,
            psi,
            subsolution,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub tol_residual: f64,
    pub max_newton: usize,
    pub armijo_factor: f64,
    pub armijo_slope: f64,
    pub min_step: f64,
    pub t_initial_increment: f64,
    pub t_shrink: f64,
    pub t_min_increment: f64,
    pub safeguard_margin: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol_residual: 1e-9,
            max_newton: 50,
            armijo_factor: 0.5,
            armijo_slope: 1e-4,
            min_step: 1e-6,
            t_initial_increment: 0.25,
            t_shrink: 0.5,
            t_min_increment: 1e-3,
            safeguard_margin: 1e-8,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tol_residual", self.tol_residual),
            ("armijo_slope", self.armijo_slope),
            ("min_step", self.min_step),
            ("t_initial_increment", self.t_initial_increment),
            ("t_min_increment", self.t_min_increment),
            ("safeguard_margin", self.safeguard_margin),
        ];
        if let Some((name, v)) = positive.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Validation(format!(
                "solver setting {name} must be positive, got {v}"
            )));
        }
        for (name, v) in [
            ("armijo_factor", self.armijo_factor),
            ("t_shrink", self.t_shrink),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Validation(format!(
                    "solver setting {name} must lie in (0, 1), got {v}"
                )));
            }
        }
        if self.max_newton == 0 {
            return Err(Error::Validation("max_newton must be at least 1".into()));
        }
        Ok(())
    }
}

/// Estimate quantities swept over the interior of one iterate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorRecord {
    pub sup_grad: f64,
    pub sup_hess: f64,
    pub min_phase_margin: f64,
    pub min_sum_g: f64,
    pub subsol_gap: Option<f64>,
    pub residual_inf: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub t: f64,
    pub iterations: usize,
    pub final_residual: f64,
    pub history: Vec<MonitorRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub per_t: Vec<StageReport>,
    pub accepted: bool,
    pub failure_reason: Option<String>,
    /// Curvature of the quadratic bump used for the initial state.
    pub initial_beta: Option<f64>,
}

impl SolveReport {
    pub fn monitors(&self) -> impl Iterator<Item = &MonitorRecord> {
        self.per_t.iter().flat_map(|s| s.history.iter())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepReport {
    pub alpha: f64,
    pub backtracks: usize,
    pub residual_before: f64,
    pub residual_after: f64,
    pub update_inf: f64,
}

/// Per-node state at one iterate.
struct NodeState {
    i: usize,
    j: usize,
    geom: PointGeometry,
    margin: f64,
    residual: f64,
}

fn node_geometry(u: &GridField, i: usize, j: usize, t: f64) -> Result<PointGeometry> {
    let g = fd_gradient(u, i, j)?;
    let hess = fd_hessian(u, i, j)?;
    assemble_point(&[t * g[0], t * g[1]], &hess)
}

fn evaluate(u: &GridField, problem: &Problem, t: f64) -> Result<Vec<NodeState>> {
    let p = &problem.params;
    u.grid
        .interior()
        .map(|(i, j)| {
            let geom = node_geometry(u, i, j, t)?;
            let margin = p.margin(&geom.kappa);
            let residual = concave_g(&geom.kappa, p) - problem.psi.at(i, j);
            Ok(NodeState {
                i,
                j,
                geom,
                margin,
                residual,
            })
        })
        .collect()
}

fn admissible(states: &[NodeState], config: &SolverConfig) -> Result<()> {
    let bad: Vec<(usize, usize)> = states
        .iter()
        .filter(|s| s.margin.is_nan() || s.margin < config.safeguard_margin)
        .map(|s| (s.i, s.j))
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::InadmissibleIterate { nodes: bad })
    }
}

fn residual_inf(states: &[NodeState]) -> f64 {
    states.iter().fold(0.0, |m, s| m.max(s.residual.abs()))
}

fn to_field(grid: Grid2D, states: &[NodeState]) -> GridField {
    let mut r = GridField::zeros(grid);
    for s in states {
        r.set(s.i, s.j, s.residual);
    }
    r
}

/// `G(κ(𝒜(D²u, t·Du))) − ψ` at interior nodes, zero on the boundary.
///
/// Fails with `InadmissibleIterate` if any node has phase margin below the
/// safeguard.
pub fn residual_field(
    u: &GridField,
    problem: &Problem,
    t: f64,
    config: &SolverConfig,
) -> Result<GridField> {
    let states = evaluate(u, problem, t)?;
    admissible(&states, config)?;
    Ok(to_field(u.grid, &states))
}

/// Residual without the admissibility check, for diagnostics and export.
pub fn residual_field_unchecked(u: &GridField, problem: &Problem, t: f64) -> Result<GridField> {
    Ok(to_field(u.grid, &evaluate(u, problem, t)?))
}

fn monitor_from(
    u: &GridField,
    problem: &Problem,
    t: f64,
    states: &[NodeState],
) -> Result<MonitorRecord> {
    let mut rec = MonitorRecord {
        sup_grad: 0.0,
        sup_hess: 0.0,
        min_phase_margin: f64::INFINITY,
        min_sum_g: f64::INFINITY,
        subsol_gap: None,
        residual_inf: residual_inf(states),
    };
    for s in states {
        let g = fd_gradient(u, s.i, s.j)?;
        rec.sup_grad = rec.sup_grad.max(g[0].hypot(g[1]));
        rec.sup_hess = rec.sup_hess.max(s.geom.hess.norm_inf());
        rec.min_phase_margin = rec.min_phase_margin.min(s.margin);
        rec.min_sum_g = rec.min_sum_g.min(sum_g(&s.geom, &problem.params));
        if let Some(sub) = &problem.subsolution {
            let gs = node_geometry(sub, s.i, s.j, t)?;
            let gap = subsolution_gap(&s.geom, &gs, &problem.params);
            rec.subsol_gap = Some(rec.subsol_gap.map_or(gap, |m: f64| m.min(gap)));
        }
    }
    Ok(rec)
}

/// Monitor sweep at parameter `t`. Runs on inadmissible iterates too; the
/// margin field then reports the violation.
pub fn monitors_at(u: &GridField, problem: &Problem, t: f64) -> Result<MonitorRecord> {
    let states = evaluate(u, problem, t)?;
    monitor_from(u, problem, t, &states)
}

/// Monitor sweep of the full equation (`t = 1`).
pub fn monitors(u: &GridField, problem: &Problem) -> Result<MonitorRecord> {
    monitors_at(u, problem, 1.0)
}

fn assemble_newton(
    u: &GridField,
    problem: &Problem,
    t: f64,
    states: &[NodeState],
) -> Result<SparseSystem> {
    let grid = u.grid;
    let (hx, hy) = (grid.hx, grid.hy);
    let mut trip = Vec::with_capacity(states.len() * 9);
    let mut rhs = Vec::with_capacity(states.len());
    for s in states {
        let lin = linearized_coeffs(&s.geom, &problem.params)?;
        let a11 = lin.g_tilde_second.get(0, 0);
        let a22 = lin.g_tilde_second.get(1, 1);
        let a12 = lin.g_tilde_second.get(0, 1);
        let b1 = t * lin.g_tilde_first[0];
        let b2 = t * lin.g_tilde_first[1];
        let row = grid.unknown(s.i, s.j);
        let cxy = 2.0 * a12 / (4.0 * hx * hy);
        let stencil = [
            (0i64, 0i64, -2.0 * a11 / (hx * hx) - 2.0 * a22 / (hy * hy)),
            (1, 0, a11 / (hx * hx) + b1 / (2.0 * hx)),
            (-1, 0, a11 / (hx * hx) - b1 / (2.0 * hx)),
            (0, 1, a22 / (hy * hy) + b2 / (2.0 * hy)),
            (0, -1, a22 / (hy * hy) - b2 / (2.0 * hy)),
            (1, 1, cxy),
            (-1, -1, cxy),
            (1, -1, -cxy),
            (-1, 1, -cxy),
        ];
        for (di, dj, c) in stencil {
            let ni = (s.i as i64 + di) as usize;
            let nj = (s.j as i64 + dj) as usize;
            // Update vanishes on the boundary.
            if grid.is_interior(ni, nj) && c != 0.0 {
                trip.push((row, grid.unknown(ni, nj), c));
            }
        }
        rhs.push(-s.residual);
    }
    SparseSystem::from_triplets(grid.interior_count(), trip, rhs)
}

/// One damped Newton step at parameter `t`.
///
/// The step length is halved until every node keeps phase margin at least
/// `safeguard_margin` and the max-norm residual decreases by the Armijo
/// factor (or already meets `tol_residual`).
pub fn newton_step(
    u: &GridField,
    problem: &Problem,
    t: f64,
    config: &SolverConfig,
) -> Result<(GridField, StepReport)> {
    let states = evaluate(u, problem, t)?;
    admissible(&states, config)?;
    newton_step_from(u, problem, t, config, &states).map(|(v, r, _)| (v, r))
}

fn newton_step_from(
    u: &GridField,
    problem: &Problem,
    t: f64,
    config: &SolverConfig,
    states: &[NodeState],
) -> Result<(GridField, StepReport, Vec<NodeState>)> {
    let r0 = residual_inf(states);
    let sys = assemble_newton(u, problem, t, states)?;
    let du = sparse_solve(&sys)?;
    line_search(u, &du, problem, t, config, r0)
}

fn line_search(
    u: &GridField,
    du: &[f64],
    problem: &Problem,
    t: f64,
    config: &SolverConfig,
    r0: f64,
) -> Result<(GridField, StepReport, Vec<NodeState>)> {
    let update_inf = du.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let grid = u.grid;
    let mut alpha = 1.0;
    let mut backtracks = 0;
    loop {
        if alpha < config.min_step {
            return Err(Error::LineSearchFailed { alpha });
        }
        let mut trial = u.clone();
        for (i, j) in grid.interior() {
            let k = grid.index(i, j);
            trial.values[k] += alpha * du[grid.unknown(i, j)];
        }
        let trial_states = evaluate(&trial, problem, t)?;
        if admissible(&trial_states, config).is_ok() {
            let r1 = residual_inf(&trial_states);
            if r1 <= (1.0 - config.armijo_slope * alpha) * r0 || r1 <= config.tol_residual {
                let report = StepReport {
                    alpha,
                    backtracks,
                    residual_before: r0,
                    residual_after: r1,
                    update_inf,
                };
                return Ok((trial, report, trial_states));
            }
        }
        alpha *= config.armijo_factor;
        backtracks += 1;
    }
}

/// Newton solution at fixed `t`.
#[derive(Clone, Debug)]
pub struct FixedTSolution {
    pub u: GridField,
    pub iterations: usize,
    pub history: Vec<MonitorRecord>,
    pub steps: Vec<StepReport>,
}

/// Iterates [`newton_step`] from `u0` until the max-norm residual reaches
/// `tol_residual`. The initial iterate and every accepted step are logged.
pub fn solve_fixed_t(
    u0: &GridField,
    problem: &Problem,
    t: f64,
    config: &SolverConfig,
) -> Result<FixedTSolution> {
    let mut u = u0.clone();
    let mut states = evaluate(&u, problem, t)?;
    admissible(&states, config)?;
    let mut history = vec![monitor_from(&u, problem, t, &states)?];
    let mut steps = Vec::new();
    let mut best = (residual_inf(&states), u.clone());
    for iteration in 0..=config.max_newton {
        let r = residual_inf(&states);
        if r <= config.tol_residual {
            return Ok(FixedTSolution {
                u,
                iterations: iteration,
                history,
                steps,
            });
        }
        if iteration == config.max_newton {
            break;
        }
        let (next, report, next_states) = newton_step_from(&u, problem, t, config, &states)?;
        u = next;
        states = next_states;
        history.push(monitor_from(&u, problem, t, &states)?);
        steps.push(report);
        if report.residual_after < best.0 {
            best = (report.residual_after, u.clone());
        }
    }
    Err(Error::NotConverged {
        t,
        residual: best.0,
        best: Box::new(best.1),
    })
}

/// Precomputed pieces of the bump family `u_β = H[φ] + β(q − H[q])` with
/// `q = |x − x₀|²/2` centered in the box and `H` the discrete harmonic
/// extension of the boundary values.
///
/// Every `u_β` carries the Dirichlet data exactly and its discrete Hessian
/// is `βI` plus a trace-free part.
#[derive(Clone, Debug)]
pub struct BumpFamily {
    h_phi: GridField,
    bump: GridField,
    phi: GridField,
}

impl BumpFamily {
    pub fn new(problem: &Problem) -> Result<Self> {
        let grid = problem.grid;
        let (cx, cy) = (0.5 * (grid.xmin + grid.xmax), 0.5 * (grid.ymin + grid.ymax));
        let q = GridField::from_fn(grid, |x, y| 0.5 * ((x - cx).powi(2) + (y - cy).powi(2)));
        let h_q = harmonic_extension(&q, grid)?;
        let bump = GridField::from_values(
            grid,
            q.values
                .iter()
                .zip(&h_q.values)
                .map(|(a, b)| a - b)
                .collect(),
        )?;
        Ok(Self {
            h_phi: harmonic_extension(&problem.phi, grid)?,
            bump,
            phi: problem.phi.clone(),
        })
    }

    pub fn member(&self, beta: f64) -> Result<GridField> {
        let mut u = self.h_phi.clone();
        for (v, b) in u.values.iter_mut().zip(&self.bump.values) {
            *v += beta * b;
        }
        apply_dirichlet(&u, &self.phi)
    }
}

/// Admissible starting field at `t = 0`: the first member of the
/// [`BumpFamily`] on the scan `β = tan(σ/n) + 0.1k` whose every node is
/// admissible.
pub fn initial_state(problem: &Problem, config: &SolverConfig) -> Result<(GridField, f64)> {
    const MAX_SCAN: usize = 100_000;
    let family = BumpFamily::new(problem)?;
    let p = &problem.params;
    let beta0 = (p.sigma / p.n as f64).tan();
    for k in 0..MAX_SCAN {
        let beta = beta0 + 0.1 * k as f64;
        let u = family.member(beta)?;
        let states = evaluate(&u, problem, 0.0)?;
        if admissible(&states, config).is_ok() {
            return Ok((u, beta));
        }
    }
    Err(Error::Validation(
        "no admissible initial state found by the β scan".into(),
    ))
}

/// Runs the continuation from `t = 0` to `t = 1`, returning the final field
/// (on success) and the report in every case.
pub fn continuity_solve_reporting(
    problem: &Problem,
    config: &SolverConfig,
) -> (Result<GridField>, SolveReport) {
    let mut report = SolveReport {
        per_t: Vec::new(),
        accepted: false,
        failure_reason: None,
        initial_beta: None,
    };
    let result = run_continuation(problem, config, &mut report);
    match &result {
        Ok(_) => report.accepted = true,
        Err(e) => report.failure_reason = Some(e.to_string()),
    }
    (result, report)
}

/// Continuation solve; see [`continuity_solve_reporting`].
pub fn continuity_solve(
    problem: &Problem,
    config: &SolverConfig,
) -> Result<(GridField, SolveReport)> {
    let (result, report) = continuity_solve_reporting(problem, config);
    result.map(|u| (u, report))
}

fn record(report: &mut SolveReport, t: f64, sol: &FixedTSolution) {
    report.per_t.push(StageReport {
        t,
        iterations: sol.iterations,
        final_residual: sol.history.last().map_or(f64::NAN, |m| m.residual_inf),
        history: sol.history.clone(),
    });
}

fn run_continuation(
    problem: &Problem,
    config: &SolverConfig,
    report: &mut SolveReport,
) -> Result<GridField> {
    config.validate()?;
    let (u0, beta) = initial_state(problem, config)?;
    report.initial_beta = Some(beta);
    let first = solve_fixed_t(&u0, problem, 0.0, config)?;
    record(report, 0.0, &first);
    let mut u = first.u;
    let mut t = 0.0;
    let mut dt = config.t_initial_increment;
    while t < 1.0 {
        let t_next = (t + dt).min(1.0);
        match solve_fixed_t(&u, problem, t_next, config) {
            Ok(sol) => {
                record(report, t_next, &sol);
                u = sol.u;
                t = t_next;
                dt = (2.0 * dt).min(config.t_initial_increment);
            }
            Err(
                Error::NotConverged { .. }
                | Error::LineSearchFailed { .. }
                | Error::InadmissibleIterate { .. }
                | Error::SolveFailed(_),
            ) => {
                dt *= config.t_shrink;
                if dt < config.t_min_increment {
                    return Err(Error::HomotopyStalled { t, increment: dt });
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::phase_f;
    use crate::harness::manufactured_radial;
    use std::f64::consts::FRAC_PI_2;

    fn quadratic_problem(nodes: usize, c: f64, a: f64) -> Problem {
        let grid = Grid2D::unit_square(nodes).unwrap();
        let params = OperatorParams::new(2, 0.1, a).unwrap();
        let h = GridField::constant(grid, 2.0 * c.atan());
        let phi = GridField::from_fn(grid, |x, y| 0.5 * c * (x * x + y * y));
        Problem::new(params, h, phi, None).unwrap()
    }

    #[test]
    fn out_of_range_h_rejected() {
        let grid = Grid2D::unit_square(9).unwrap();
        let params = OperatorParams::new(2, 0.1, 2.0).unwrap();
        let h = GridField::constant(grid, std::f64::consts::PI);
        let phi = GridField::zeros(grid);
        assert!(matches!(
            Problem::new(params, h, phi, None),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn t0_residual_is_hessian_phase() {
        let p = quadratic_problem(9, 1.5, 2.0);
        let u = GridField::from_fn(p.grid, |x, y| {
            x * x + 0.3 * x * y + 0.8 * y * y + 0.1 * x.powi(3)
        });
        let r = residual_field(&u, &p, 0.0, &SolverConfig::default()).unwrap();
        for (i, j) in p.grid.interior() {
            let h = fd_hessian(&u, i, j).unwrap();
            let (a, b, c) = (h.get(0, 0), h.get(1, 1), h.get(0, 1));
            let mid = 0.5 * (a + b);
            let rad = (0.25 * (a - b).powi(2) + c * c).sqrt();
            let expected = -(-2.0 * phase_f(&[mid + rad, mid - rad])).exp() - p.psi.at(i, j);
            assert!((r.at(i, j) - expected).abs() <= 1e-14);
        }
    }

    #[test]
    fn constant_hessian_identity_at_t0() {
        let p = quadratic_problem(9, 1.5, 2.0);
        let r = residual_field(&p.phi, &p, 0.0, &SolverConfig::default()).unwrap();
        assert!(r.max_abs() <= 1e-15);
    }

    #[test]
    fn inadmissible_iterate_lists_nodes() {
        let p = quadratic_problem(7, 1.0, 2.0);
        let flat = GridField::zeros(p.grid);
        match residual_field(&flat, &p, 1.0, &SolverConfig::default()) {
            Err(Error::InadmissibleIterate { nodes }) => assert_eq!(nodes.len(), 25),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            solve_fixed_t(&flat, &p, 1.0, &SolverConfig::default()),
            Err(Error::InadmissibleIterate { .. })
        ));
    }

    #[test]
    fn t0_quadratic_converges_quickly() {
        let p = quadratic_problem(17, 1.2, 2.0);
        let cfg = SolverConfig::default();
        // Scan member nearest to the exact curvature c.
        let beta0 = (p.params.sigma / 2.0).tan();
        let beta = beta0 + 0.1 * ((1.2 - beta0) / 0.1).round();
        let u0 = BumpFamily::new(&p).unwrap().member(beta).unwrap();
        let sol = solve_fixed_t(&u0, &p, 0.0, &cfg).unwrap();
        assert!(sol.iterations <= 4, "{} iterations", sol.iterations);
        assert!(sol.steps.iter().all(|s| s.alpha == 1.0));
        assert!(sol.u.max_diff(&p.phi) <= 1e-9);
    }

    #[test]
    fn t0_from_scan_start_is_quadratically_convergent() {
        let p = quadratic_problem(17, 1.2, 2.0);
        let cfg = SolverConfig::default();
        let (u0, _) = initial_state(&p, &cfg).unwrap();
        let sol = solve_fixed_t(&u0, &p, 0.0, &cfg).unwrap();
        assert!(sol.u.max_diff(&p.phi) <= 1e-9);
        let tail: Vec<f64> = sol
            .steps
            .iter()
            .rev()
            .take(3)
            .map(|s| s.residual_before)
            .collect();
        // r_{k+1} / r_k² stays bounded over the last steps.
        assert!(tail[0] / (tail[1] * tail[1]) < 1e3);
        assert!(tail[1] / (tail[2] * tail[2]) < 1e3);
    }

    #[test]
    fn converged_iterate_takes_full_step() {
        let p = quadratic_problem(9, 1.0, 2.0);
        let cfg = SolverConfig::default();
        let (u, rep) = newton_step(&p.phi, &p, 0.0, &cfg).unwrap();
        assert_eq!(rep.alpha, 1.0);
        assert!(rep.update_inf <= 1e-12);
        assert!(u.max_diff(&p.phi) <= 1e-12);
    }

    #[test]
    fn huge_update_is_backtracked() {
        let p = quadratic_problem(9, 1.0, 2.0);
        let cfg = SolverConfig::default();
        let (u0, _) = initial_state(&p, &cfg).unwrap();
        let states = evaluate(&u0, &p, 0.0).unwrap();
        let r0 = residual_inf(&states);
        // A deep concave dent drives every node out of the cone at full step.
        let du: Vec<f64> = p
            .grid
            .interior()
            .map(|(i, j)| -1e3 * (1.0 - p.grid.x(i).powi(2)) * (1.0 - p.grid.y(j).powi(2)))
            .collect();
        let (u1, rep, _) =
            line_search(&u0, &du, &p, 0.0, &cfg, r0).unwrap_or_else(|e| panic!("{e:?}"));
        assert!(rep.backtracks > 0 && rep.alpha < 1.0);
        assert!(residual_field(&u1, &p, 0.0, &cfg).is_ok());
        let tight = SolverConfig {
            min_step: 0.5,
            ..cfg
        };
        assert!(matches!(
            line_search(&u0, &du, &p, 0.0, &tight, r0),
            Err(Error::LineSearchFailed { .. })
        ));
    }

    #[test]
    fn continuation_reaches_manufactured_solution() {
        let m = manufactured_radial(Grid2D::unit_square(17).unwrap(), 1.0).unwrap();
        let params = OperatorParams::new(2, m.delta_used, 2.5).unwrap();
        let problem = m.problem(params).unwrap();
        let (u, report) = continuity_solve(&problem, &SolverConfig::default()).unwrap();
        assert!(report.accepted);
        assert_eq!(report.per_t.last().unwrap().t, 1.0);
        assert!(report.per_t.windows(2).all(|w| w[0].t < w[1].t));
        assert!(u.max_diff(&m.u_star) <= 1e-8);
        for rec in report.monitors() {
            assert!(rec.min_phase_margin >= 1e-8);
            assert!(rec.min_sum_g > 0.0);
        }
    }

    #[test]
    fn monitors_on_quadratic_and_constant() {
        let p = quadratic_problem(17, 1.0, 2.0);
        let rec = monitors(&p.phi, &p).unwrap();
        let edge = 1.0 - p.grid.hx;
        assert!((rec.sup_grad - edge * 2f64.sqrt()).abs() <= 1e-12);
        assert!((rec.sup_hess - 1.0).abs() <= 1e-12);
        let flat = GridField::constant(p.grid, 3.0);
        let rec = monitors(&flat, &p).unwrap();
        assert_eq!(rec.sup_grad, 0.0);
        assert_eq!(rec.sup_hess, 0.0);
        assert!(rec.min_phase_margin < 0.0);
        assert!((rec.min_phase_margin + 0.1).abs() <= 1e-15);
        let _ = FRAC_PI_2;
    }

    #[test]
    fn config_validation() {
        let bad = SolverConfig {
            armijo_factor: 1.5,
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(SolverConfig::default().validate().is_ok());
    }
}
