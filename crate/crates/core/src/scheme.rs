//! Semi-discrete finite volume operator on a single vessel.
//!
//! Well-balanced cells subtract the discrete operator evaluated on the local
//! stationary solution, so an exact discrete stationary state yields a zero
//! right-hand side up to rounding.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::flux::{ghr_fluctuations, Fluctuations};
use crate::grid::{build_geometry, CellGeometry, Mesh};
use crate::model::{Model, State};
use crate::properties::VesselProperties;
use crate::reconstruction::{standard_cell, well_balanced_cell, CellReconstruction, StandardReconstruction};
use crate::steady::{ButcherTableau, Monotonicity, StationaryProfile, SteadyContext};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    /// Spatial and temporal order, 1 to 3.
    pub order: u8,
    pub well_balanced: bool,
    pub cfl: f64,
}

impl SchemeConfig {
    pub fn new(order: u8, well_balanced: bool) -> Self {
        Self { order, well_balanced, cfl: 0.5 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.order) {
            return Err(Error::Config(format!("order must be 1, 2 or 3, got {}", self.order)));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Config(format!("CFL must be in (0, 1], got {}", self.cfl)));
        }
        Ok(())
    }
}

/// Local stationary profile of one cell with the stencil averages it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct CachedProfile {
    inputs: [State; 3],
    len: usize,
    /// `None` when Problem P had no solution for these inputs.
    pub profile: Option<StationaryProfile>,
}

impl CachedProfile {
    fn matches(&self, stencil: &[State]) -> bool {
        self.len == stencil.len() && self.inputs[..self.len] == *stencil
    }
}

/// Per-cell memo of local profiles: reused verbatim while the stencil
/// averages are unchanged, otherwise used as Newton seeds.
pub type ProfileCache = Vec<Option<CachedProfile>>;

/// Discretization of one vessel in nondimensional variables.
#[derive(Debug, Clone)]
pub struct VesselScheme {
    pub model: Model,
    pub props: VesselProperties,
    pub mesh: Mesh,
    pub cells: Vec<CellGeometry>,
    pub tableau: ButcherTableau,
    pub recon: StandardReconstruction,
    pub config: SchemeConfig,
    /// Orientation of critical slopes; derived from the averages when unset.
    pub trend: Option<Monotonicity>,
    node_xi: [f64; 2],
}

impl VesselScheme {
    pub fn new(model: Model, props: VesselProperties, mesh: Mesh, config: SchemeConfig) -> Result<Self> {
        config.validate()?;
        let tableau = ButcherTableau::for_order(config.order);
        let cells = build_geometry(&props, &mesh, &tableau)?;
        let mut node_xi = [0.0; 2];
        for m in 0..tableau.stages {
            node_xi[m] = tableau.c[m] - 0.5;
        }
        Ok(Self {
            model,
            props,
            mesh,
            cells,
            tableau,
            recon: StandardReconstruction::for_order(config.order),
            config,
            trend: None,
            node_xi,
        })
    }

    pub fn steady_context<'a>(&'a self, averages: &'a [State]) -> SteadyContext<'a> {
        SteadyContext {
            model: &self.model,
            props: &self.props,
            cells: &self.cells,
            tableau: &self.tableau,
            averages,
            trend: self.trend,
        }
    }

    fn node_xi(&self) -> &[f64] {
        &self.node_xi[..self.tableau.stages]
    }

    fn eps(&self) -> f64 {
        let dx = self.mesh.dx();
        dx * dx
    }

    /// Reconstructs the cells in `range`; stencils are clipped to `0..averages.len()`.
    pub fn reconstruct(
        &self,
        averages: &[State],
        range: Range<usize>,
        mut cache: Option<&mut ProfileCache>,
    ) -> Vec<CellReconstruction> {
        let n = averages.len();
        let r = self.recon.stencil_radius();
        let ctx = self.steady_context(averages);
        range
            .map(|i| {
                if self.config.well_balanced {
                    let lo = i.saturating_sub(r);
                    let hi = (i + r).min(n - 1);
                    let stencil = &averages[lo..=hi];
                    let hit = cache.as_ref().and_then(|c| c[i].as_ref()).filter(|c| c.matches(stencil));
                    let profile = match hit {
                        Some(c) => c.profile.clone(),
                        None => {
                            let seed = cache.as_ref().and_then(|c| c[i].as_ref()).and_then(|c| c.profile.as_ref());
                            let p = ctx.solve_problem(i, averages[i], lo, hi, seed).ok();
                            if let Some(c) = cache.as_mut() {
                                let mut inputs = [State::ZERO; 3];
                                inputs[..stencil.len()].copy_from_slice(stencil);
                                c[i] = Some(CachedProfile { inputs, len: stencil.len(), profile: p.clone() });
                            }
                            p
                        }
                    };
                    if let Some(rec) = profile.and_then(|p| {
                        well_balanced_cell(self.recon, averages, i, &p, self.eps(), self.node_xi())
                    }) {
                        return rec;
                    }
                }
                self.standard(averages, i)
            })
            .collect()
    }

    fn standard(&self, averages: &[State], i: usize) -> CellReconstruction {
        let u0 = averages[i];
        let um = if i > 0 { averages[i - 1] } else { u0 };
        let up = if i + 1 < averages.len() { averages[i + 1] } else { u0 };
        CellReconstruction {
            p: standard_cell(self.recon, um, u0, up, self.eps(), self.node_xi()),
            stationary: None,
        }
    }

    /// Fluctuations at the interface between cells `j` and `j + 1`.
    pub fn interface(&self, j: usize, left: &CellReconstruction, right: &CellReconstruction) -> Result<Fluctuations> {
        ghr_fluctuations(
            &self.model,
            &left.p.right,
            &self.cells[j].sigma_right,
            &right.p.left,
            &self.cells[j + 1].sigma_left,
        )
    }

    /// Time derivative of the average of cell `i` given the fluctuation
    /// `D-` at its right face and `D+` at its left face.
    pub fn cell_rate(&self, i: usize, rec: &CellReconstruction, d_minus_right: State, d_plus_left: State) -> Result<State> {
        let m = &self.model;
        let c = &self.cells[i];
        let p = &rec.p;
        if rec.stationary.as_ref() == Some(p) {
            // P equals W*: the cell terms cancel exactly.
            return Ok((d_minus_right + d_plus_left) * (-1.0 / c.dx));
        }
        let mut fd = d_minus_right + d_plus_left + (m.flux(&p.right, &c.sigma_right)? - m.flux(&p.left, &c.sigma_left)?);
        let mut src = State::ZERO;
        for k in 0..self.tableau.stages {
            let nd = &c.nodes[k];
            let term = |w: &State| -> Result<State> {
                Ok(m.nonconservative_source(w, &nd.sigma, &nd.dsigma)? - m.algebraic_source(w, nd.g)?)
            };
            let mut t = term(&p.nodes[k])?;
            if let Some(st) = &rec.stationary {
                t = t - term(&st.nodes[k])?;
            }
            src += t * self.tableau.b[k];
        }
        if let Some(st) = &rec.stationary {
            fd = fd - (m.flux(&st.right, &c.sigma_right)? - m.flux(&st.left, &c.sigma_left)?);
        }
        Ok(fd * (-1.0 / c.dx) - src)
    }

    /// Right-hand side on a mesh with ghost layers; ghost entries of the result are zero.
    pub fn rhs_with_ghosts(&self, averages: &[State], cache: Option<&mut ProfileCache>) -> Result<Vec<State>> {
        let g = self.mesh.ghosts;
        let n = self.mesh.cells;
        if g < 1 + self.recon.stencil_radius() {
            return Err(Error::Mesh("not enough ghost cells for the reconstruction stencil".into()));
        }
        let lo = g - 1;
        let recs = self.reconstruct(averages, lo..g + n + 1, cache);
        let flucts: Vec<Fluctuations> = (0..=n)
            .map(|k| self.interface(lo + k, &recs[k], &recs[k + 1]))
            .collect::<Result<_>>()?;
        let mut out = vec![State::ZERO; averages.len()];
        for k in 0..n {
            let i = g + k;
            out[i] = self.cell_rate(i, &recs[k + 1], flucts[k + 1].minus, flucts[k].plus)?;
        }
        Ok(out)
    }

    /// `max |lambda|` over the given cells, with properties at cell centers.
    pub fn max_speed(&self, averages: &[State], range: Range<usize>) -> Result<f64> {
        let mut s: f64 = 0.0;
        for i in range {
            let (l1, l5) = self.model.eigenvalues(&averages[i], &self.cells[i].center.sigma)?;
            s = s.max(l1.abs()).max(l5.abs());
        }
        Ok(s)
    }

    /// CFL-limited time step over the physical cells.
    pub fn time_step(&self, averages: &[State]) -> Result<f64> {
        let s = self.max_speed(averages, self.mesh.physical())?;
        Ok(self.config.cfl * self.mesh.dx() / s)
    }

    /// `dx` times the right-hand side on each physical cell: zero (to rounding)
    /// exactly when `averages` is a discrete stationary solution.
    pub fn stationary_residual(&self, averages: &[State]) -> Result<Vec<f64>> {
        let r = self.rhs_with_ghosts(averages, None)?;
        let dx = self.mesh.dx();
        Ok(self.mesh.physical().map(|i| r[i].max_abs() * dx).collect())
    }
}

/// One strong-stability-preserving Runge-Kutta step in Shu-Osher form.
///
/// `euler(u, dt)` must return the forward Euler update `u + dt L(u)`; any
/// stable one-step update (for instance an exponential integrator for stiff
/// lumped models) may be substituted.
pub fn ssp_step<F>(u: &[f64], dt: f64, order: u8, mut euler: F) -> Result<Vec<f64>>
where
    F: FnMut(&[f64], f64) -> Result<Vec<f64>>,
{
    // `x + b (y - x)`, so that fixed points of the stages are kept bitwise.
    let comb = |x: &[f64], b: f64, y: &[f64]| -> Vec<f64> { x.iter().zip(y).map(|(x, y)| x + b * (y - x)).collect() };
    match order {
        1 => euler(u, dt),
        2 => {
            let u1 = euler(u, dt)?;
            let e1 = euler(&u1, dt)?;
            Ok(comb(u, 0.5, &e1))
        }
        3 => {
            let u1 = euler(u, dt)?;
            let e1 = euler(&u1, dt)?;
            let u2 = comb(u, 0.25, &e1);
            let e2 = euler(&u2, dt)?;
            Ok(comb(u, 2.0 / 3.0, &e2))
        }
        o => Err(Error::Config(format!("unsupported time integration order {o}"))),
    }
}

/// Forward Euler update built from a right-hand side evaluator.
pub fn euler_from_rhs<F>(mut rhs: F) -> impl FnMut(&[f64], f64) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    move |u: &[f64], dt: f64| {
        let r = rhs(u)?;
        Ok(u.iter().zip(&r).map(|(u, r)| u + dt * r).collect())
    }
}
