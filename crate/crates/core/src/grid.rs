//! Uniform lattice on an axis-aligned box with second-order stencils.
//!
//! Node `(i, j)` sits at `(xmin + i·hx, ymin + j·hy)`; values are stored
//! row-major with `j` as the row index.

use crate::error::{Error, Result};
use crate::smalldense::SymMatrix;

/// Smallest node count per axis.
pub const MIN_NODES: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid2D {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
}

impl Grid2D {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64, nx: usize, ny: usize) -> Result<Self> {
        if nx < MIN_NODES || ny < MIN_NODES {
            return Err(Error::Validation(format!(
                "grid needs at least {MIN_NODES} nodes per axis, got {nx}×{ny}"
            )));
        }
        if !(xmax > xmin && ymax > ymin) || [xmin, xmax, ymin, ymax].iter().any(|v| !v.is_finite())
        {
            return Err(Error::Validation(format!(
                "degenerate box [{xmin}, {xmax}]×[{ymin}, {ymax}]"
            )));
        }
        Ok(Self {
            xmin,
            xmax,
            ymin,
            ymax,
            nx,
            ny,
            hx: (xmax - xmin) / (nx - 1) as f64,
            hy: (ymax - ymin) / (ny - 1) as f64,
        })
    }

    /// `[−1, 1]²` with `nodes` points per axis.
    pub fn unit_square(nodes: usize) -> Result<Self> {
        Self::new(-1.0, 1.0, -1.0, 1.0, nodes, nodes)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        if i == self.nx - 1 {
            self.xmax
        } else {
            self.xmin + i as f64 * self.hx
        }
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        if j == self.ny - 1 {
            self.ymax
        } else {
            self.ymin + j as f64 * self.hy
        }
    }

    #[inline]
    pub fn is_interior(&self, i: usize, j: usize) -> bool {
        i > 0 && j > 0 && i + 1 < self.nx && j + 1 < self.ny
    }

    #[inline]
    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        !self.is_interior(i, j)
    }

    /// Interior nodes in row-major order.
    pub fn interior(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..self.ny - 1).flat_map(move |j| (1..self.nx - 1).map(move |i| (i, j)))
    }

    /// All nodes in row-major order.
    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.ny).flat_map(move |j| (0..self.nx).map(move |i| (i, j)))
    }

    pub fn interior_count(&self) -> usize {
        (self.nx - 2) * (self.ny - 2)
    }

    /// Position of an interior node among the unknowns.
    #[inline]
    pub fn unknown(&self, i: usize, j: usize) -> usize {
        (j - 1) * (self.nx - 2) + (i - 1)
    }

    /// Largest spacing.
    pub fn h(&self) -> f64 {
        self.hx.max(self.hy)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    pub grid: Grid2D,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn zeros(grid: Grid2D) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid2D, k: f64) -> Self {
        Self {
            grid,
            values: vec![k; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid2D, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let values = grid.nodes().map(|(i, j)| f(grid.x(i), grid.y(j))).collect();
        Self { grid, values }
    }

    pub fn from_values(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "field has {} values, grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("grid field"));
        }
        Ok(Self { grid, values })
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.grid.index(i, j);
        self.values[k] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Max-norm distance between two fields on the same grid.
    pub fn max_diff(&self, other: &GridField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    fn check_interior(&self, i: usize, j: usize) -> Result<()> {
        if self.grid.is_interior(i, j) {
            Ok(())
        } else {
            Err(Error::BoundaryNode { i, j })
        }
    }
}

/// Central difference gradient at an interior node.
pub fn fd_gradient(f: &GridField, i: usize, j: usize) -> Result<[f64; 2]> {
    f.check_interior(i, j)?;
    let g = &f.grid;
    Ok([
        (f.at(i + 1, j) - f.at(i - 1, j)) / (2.0 * g.hx),
        (f.at(i, j + 1) - f.at(i, j - 1)) / (2.0 * g.hy),
    ])
}

/// Second-order Hessian stencil at an interior node; the mixed derivative
/// uses the four diagonal neighbors.
pub fn fd_hessian(f: &GridField, i: usize, j: usize) -> Result<SymMatrix> {
    f.check_interior(i, j)?;
    let g = &f.grid;
    let c = f.at(i, j);
    let uxx = (f.at(i + 1, j) - 2.0 * c + f.at(i - 1, j)) / (g.hx * g.hx);
    let uyy = (f.at(i, j + 1) - 2.0 * c + f.at(i, j - 1)) / (g.hy * g.hy);
    let uxy = (f.at(i + 1, j + 1) - f.at(i + 1, j - 1) - f.at(i - 1, j + 1) + f.at(i - 1, j - 1))
        / (4.0 * g.hx * g.hy);
    let mut m = SymMatrix::zeros(2);
    m.set(0, 0, uxx);
    m.set(1, 1, uyy);
    m.set(0, 1, uxy);
    Ok(m)
}

/// Copies the boundary ring of `phi` onto `f`, leaving interior values alone.
pub fn apply_dirichlet(f: &GridField, phi: &GridField) -> Result<GridField> {
    if f.grid != phi.grid {
        return Err(Error::Dimension(
            "boundary data lives on a different grid".into(),
        ));
    }
    let mut out = f.clone();
    let g = f.grid;
    for (i, j) in g.nodes().filter(|&(i, j)| g.is_boundary(i, j)) {
        out.set(i, j, phi.at(i, j));
    }
    Ok(out)
}
