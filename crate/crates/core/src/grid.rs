//! Uniform meshes with ghost layers and the per-cell geometry the solvers use.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::properties::{Sigma, VesselProperties};
use crate::steady::ButcherTableau;

/// Uniform mesh of `[x0, x0 + length]` with `ghosts` extra cells on each side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh {
    pub x0: f64,
    pub length: f64,
    pub cells: usize,
    pub ghosts: usize,
}

impl Mesh {
    pub fn new(x0: f64, length: f64, cells: usize, ghosts: usize) -> Result<Self> {
        if cells == 0 || !(length > 0.0) {
            return Err(Error::Mesh(format!("invalid mesh: {cells} cells over length {length}")));
        }
        Ok(Self { x0, length, cells, ghosts })
    }

    pub fn dx(&self) -> f64 {
        self.length / self.cells as f64
    }

    /// Number of cells including ghosts.
    pub fn total(&self) -> usize {
        self.cells + 2 * self.ghosts
    }

    /// Indices of the physical cells.
    pub fn physical(&self) -> Range<usize> {
        self.ghosts..self.ghosts + self.cells
    }

    pub fn left(&self, j: usize) -> f64 {
        self.x0 + (j as f64 - self.ghosts as f64) * self.dx()
    }

    pub fn right(&self, j: usize) -> f64 {
        self.left(j + 1)
    }

    pub fn center(&self, j: usize) -> f64 {
        self.x0 + (j as f64 - self.ghosts as f64 + 0.5) * self.dx()
    }

    /// Centers of the physical cells.
    pub fn centers(&self) -> Vec<f64> {
        self.physical().map(|j| self.center(j)).collect()
    }
}

/// Properties sampled at one quadrature / collocation node.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Node {
    pub x: f64,
    pub sigma: Sigma,
    pub dsigma: Sigma,
    pub g: f64,
}

/// Everything about one cell that does not depend on the solution.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGeometry {
    pub x_left: f64,
    pub x_right: f64,
    pub dx: f64,
    /// Smooth segment of the property fields containing the cell.
    pub segment: usize,
    pub sigma_left: Sigma,
    pub sigma_right: Sigma,
    pub center: Node,
    pub nodes: [Node; 2],
    pub n_nodes: usize,
    /// Property fields jump at `x_left`.
    pub jump_left: bool,
}

impl CellGeometry {
    pub fn x_center(&self) -> f64 {
        0.5 * (self.x_left + self.x_right)
    }
}

fn node(props: &VesselProperties, segment: usize, x: f64) -> Node {
    Node {
        x,
        sigma: props.sigma_on(segment, x),
        dsigma: props.dsigma_on(segment, x),
        g: props.gravity(x),
    }
}

/// Samples `props` on every cell (ghosts included); jumps must sit on interfaces.
pub fn build_geometry(
    props: &VesselProperties,
    mesh: &Mesh,
    tableau: &ButcherTableau,
) -> Result<Vec<CellGeometry>> {
    let dx = mesh.dx();
    for &b in props.breaks() {
        let r = (b - mesh.x0) / dx;
        if b > mesh.x0 && b < mesh.x0 + mesh.length && (r - r.round()).abs() > 1e-8 {
            return Err(Error::Mesh(format!(
                "property jump at x = {b} does not coincide with a cell interface (dx = {dx})"
            )));
        }
    }
    let mut out: Vec<CellGeometry> = Vec::with_capacity(mesh.total());
    for j in 0..mesh.total() {
        let (xl, xr, xc) = (mesh.left(j), mesh.right(j), mesh.center(j));
        let segment = props.segment_at(xc);
        let mut nodes = [Node::default(); 2];
        for m in 0..tableau.stages {
            nodes[m] = node(props, segment, xl + tableau.c[m] * dx);
        }
        let jump_left = j > 0 && out[j - 1].segment != segment;
        out.push(CellGeometry {
            x_left: xl,
            x_right: xr,
            dx,
            segment,
            sigma_left: props.sigma_on(segment, xl),
            sigma_right: props.sigma_on(segment, xr),
            center: node(props, segment, xc),
            nodes,
            n_nodes: tableau.stages,
            jump_left,
        });
    }
    Ok(out)
}
