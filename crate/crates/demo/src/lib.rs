//! Browser bindings for three interactive operations: principal curvatures
//! of a graph at a point, the admissible-cone margin over the curvature
//! plane, and a small radial manufactured solve.
//!
//! The plain functions carry the logic and are tested natively; the
//! `wasm_bindgen` wrappers only convert errors.

use lagcurv::geometry::{assemble_point, phase_f, sigma_for, validate_delta, OperatorParams};
use lagcurv::grid::Grid2D;
use lagcurv::harness::{auto_a, manufactured_profile, RadialProfile};
use lagcurv::smalldense::SymMatrix;
use lagcurv::solver::{continuity_solve, SolverConfig};
use wasm_bindgen::prelude::*;

/// `[κ1, κ2, Σ arctan κ]` of the graph with gradient `(ux, uy)` and
/// Hessian `[[uxx, uxy], [uxy, uyy]]`.
pub fn curvatures(ux: f64, uy: f64, uxx: f64, uxy: f64, uyy: f64) -> Result<Vec<f64>, String> {
    let hess = SymMatrix::from_rows(&[&[uxx, uxy], &[uxy, uyy]]);
    let geom = assemble_point(&[ux, uy], &hess).map_err(|e| e.to_string())?;
    Ok(vec![geom.kappa[0], geom.kappa[1], geom.phase()])
}

/// `F(κ) − σ` on a `res × res` grid over `[lo, hi]²` in the `(κ1, κ2)`
/// plane, row-major with `κ2` increasing down the rows.
pub fn margin_map(delta: f64, lo: f64, hi: f64, res: usize) -> Result<Vec<f64>, String> {
    validate_delta(delta).map_err(|e| e.to_string())?;
    if !(2..=1024).contains(&res) || hi.is_nan() || lo.is_nan() || hi <= lo {
        return Err(format!("bad map request: res = {res}, range [{lo}, {hi}]"));
    }
    let sigma = sigma_for(2, delta);
    let step = (hi - lo) / (res - 1) as f64;
    let mut out = Vec::with_capacity(res * res);
    for j in 0..res {
        for i in 0..res {
            let k = [lo + i as f64 * step, lo + j as f64 * step];
            out.push(phase_f(&k) - sigma);
        }
    }
    Ok(out)
}

/// Result of [`radial_solve`].
#[wasm_bindgen]
#[derive(Clone, Debug)]
pub struct RadialSolution {
    nodes: usize,
    values: Vec<f64>,
    errors: Vec<f64>,
    max_error: f64,
    a_param: f64,
    delta: f64,
    stages: usize,
}

#[wasm_bindgen]
impl RadialSolution {
    #[wasm_bindgen(getter)]
    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// Solution values, row-major.
    #[wasm_bindgen(getter)]
    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }

    /// `u − u*` node-wise, row-major.
    #[wasm_bindgen(getter)]
    pub fn errors(&self) -> Vec<f64> {
        self.errors.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn max_error(&self) -> f64 {
        self.max_error
    }

    #[wasm_bindgen(getter)]
    pub fn a_param(&self) -> f64 {
        self.a_param
    }

    #[wasm_bindgen(getter)]
    pub fn delta(&self) -> f64 {
        self.delta
    }

    #[wasm_bindgen(getter)]
    pub fn stages(&self) -> usize {
        self.stages
    }
}

/// Solves the radial manufactured problem on `[−1, 1]²` with `nodes²`
/// grid points.
pub fn radial_solve(nodes: usize, c: f64, exponential: bool) -> Result<RadialSolution, String> {
    if !(5..=65).contains(&nodes) {
        return Err(format!("nodes must lie in 5..=65, got {nodes}"));
    }
    let profile = if exponential {
        RadialProfile::Exponential { c }
    } else {
        RadialProfile::Quadratic { c }
    };
    let grid = Grid2D::unit_square(nodes).map_err(|e| e.to_string())?;
    let m = manufactured_profile(grid, profile).map_err(|e| e.to_string())?;
    let a = auto_a(m.delta_used, 0).map_err(|e| e.to_string())?;
    let params = OperatorParams::new(2, m.delta_used, a).map_err(|e| e.to_string())?;
    let problem = m.problem(params).map_err(|e| e.to_string())?;
    let (u, report) =
        continuity_solve(&problem, &SolverConfig::default()).map_err(|e| e.to_string())?;
    let errors: Vec<f64> = u
        .values
        .iter()
        .zip(&m.u_star.values)
        .map(|(a, b)| a - b)
        .collect();
    Ok(RadialSolution {
        nodes,
        max_error: u.max_diff(&m.u_star),
        values: u.values,
        errors,
        a_param: a,
        delta: m.delta_used,
        stages: report.per_t.len(),
    })
}

#[wasm_bindgen(js_name = curvatures)]
pub fn curvatures_js(ux: f64, uy: f64, uxx: f64, uxy: f64, uyy: f64) -> Result<Vec<f64>, JsError> {
    curvatures(ux, uy, uxx, uxy, uyy).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = marginMap)]
pub fn margin_map_js(delta: f64, lo: f64, hi: f64, res: usize) -> Result<Vec<f64>, JsError> {
    margin_map(delta, lo, hi, res).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = radialSolve)]
pub fn radial_solve_js(nodes: usize, c: f64, exponential: bool) -> Result<RadialSolution, JsError> {
    radial_solve(nodes, c, exponential).map_err(|e| JsError::new(&e))
}
