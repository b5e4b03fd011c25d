//! Single-vessel benchmark runs: setup, time loop, error norms and CSV output.

mod config;
mod convergence;
mod network_config;
mod output;
pub mod presets;

pub use config::{CaseOverrides, CustomCase, FieldSpec, InitialSpec, RunConfig};
pub use convergence::{convergence_study, fitted_order, restrict, study_with_reference, ConvergenceRow, ConvergenceStudy};
pub use network_config::{GeometrySpec, InletSpec, InitialSpec as NetworkInitialSpec, NetworkConfig, NetworkRun, TerminalSpec};
pub use output::{write_snapshot, write_time_series, SnapshotRow, TimeSample};
pub use presets::{preset, BoundaryKind, InitialCondition, TestCase};

use crate::error::{Error, Result};
use crate::model::State;
use crate::properties::Profile;
use crate::scaling::Scaling;
use crate::scheme::{SchemeConfig, VesselScheme};
use crate::grid::Mesh;
use crate::simulation::{GhostBoundary, VesselSimulation};

const GHOSTS: usize = 2;

/// `dx * sum |a_i - b_i|`.
pub fn l1_norm(a: &[f64], b: &[f64], dx: f64) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidParameter(format!("L1 norm of fields with {} and {} entries", a.len(), b.len())));
    }
    Ok(dx * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>())
}

/// L1 errors of `A/A0` and `u`, nondimensional.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorReport {
    pub area_ratio: f64,
    pub velocity: f64,
}

impl ErrorReport {
    /// The same norms in SI units: `dx` in metres and `u` in m/s, the
    /// convention of published error tables for these benchmarks.
    pub fn si(&self, scaling: &Scaling) -> ErrorReport {
        ErrorReport {
            area_ratio: self.area_ratio * scaling.length,
            velocity: self.velocity * scaling.length * scaling.velocity,
        }
    }
}

/// A test case set up on a mesh, ready to run.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub case: TestCase,
    pub scaling: Scaling,
    pub sim: VesselSimulation,
    /// Stationary solution (physical cells, nondimensional), when the test has one.
    pub stationary: Option<Vec<State>>,
}

fn gauss3_average(p: &Profile, a: f64, b: f64) -> f64 {
    const X: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
    const W: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    0.5 * X.iter().zip(W).map(|(x, w)| w * p.value(m + h * x)).sum::<f64>()
}

/// Builds scales, scheme and initial data for `case` under `config`.
pub fn prepare(case: &TestCase, config: SchemeConfig) -> Result<Prepared> {
    let model = case.model()?;
    let dim_mesh = Mesh::new(0.0, case.length, case.cells, 0)?;
    let centers = dim_mesh.centers();
    let init_sample: Vec<State> = centers
        .iter()
        .map(|&x| match &case.initial {
            InitialCondition::StationaryFromInlet { area, q, .. } => State::new(*area, *q),
            InitialCondition::StationaryFromCritical { area, q, .. } => State::new(*area, *q),
            InitialCondition::Riemann { left, right, at } => {
                if x < *at {
                    *left
                } else {
                    *right
                }
            }
        })
        .collect();
    let scaling = Scaling::for_vessel(&case.props, case.length, &centers, &init_sample, &case.fluid)?;
    let nd_model = scaling.model(&model)?;
    let nd_props = scaling.properties(&case.props);
    let mesh = Mesh::new(0.0, 1.0, case.cells, GHOSTS)?;
    let mut scheme = VesselScheme::new(nd_model, nd_props, mesh, config)?;
    scheme.trend = case.trend;
    let total = mesh.total();
    let mut stationary_ghosts: Option<Vec<State>> = None;
    let (full, stationary) = match &case.initial {
        InitialCondition::StationaryFromInlet { area, q, perturbation } => {
            let w = scaling.to_nd(State::new(*area, *q));
            let placeholder = vec![w; total];
            let profile = scheme.steady_context(&placeholder).profile_from_trace(GHOSTS, w.a, w.q, 0, total - 1)?;
            let full = profile.averages()?;
            let stationary = full[mesh.physical()].to_vec();
            stationary_ghosts = Some([&full[..GHOSTS], &full[GHOSTS + case.cells..]].concat());
            let mut init = full;
            if let Some(p) = perturbation {
                for j in mesh.physical() {
                    let (a, b) = (mesh.left(j) * case.length, mesh.right(j) * case.length);
                    init[j].a += gauss3_average(p, a, b) / scaling.area;
                }
            }
            (init, Some(stationary))
        }
        InitialCondition::StationaryFromCritical { x, area, q } => {
            let w = scaling.to_nd(State::new(*area, *q));
            let xc = x / case.length;
            let j = GHOSTS + (xc / mesh.dx()).floor() as usize;
            let placeholder = vec![w; total];
            let profile = scheme.steady_context(&placeholder).solve_problem(j, w, 0, total - 1, None)?;
            let full = profile.averages()?;
            let stationary = full[mesh.physical()].to_vec();
            stationary_ghosts = Some([&full[..GHOSTS], &full[GHOSTS + case.cells..]].concat());
            (full, Some(stationary))
        }
        InitialCondition::Riemann { left, right, at } => {
            let (l, r) = (scaling.to_nd(*left), scaling.to_nd(*right));
            let xg = at / case.length;
            let full = (0..total).map(|j| if mesh.center(j) < xg { l } else { r }).collect();
            (full, None)
        }
    };
    let g = GHOSTS;
    let n = case.cells;
    let (boundary, extra) = match case.boundary {
        BoundaryKind::Stationary => (
            GhostBoundary::Fixed { left: full[..g].to_vec(), right: full[g + n..].to_vec() },
            Vec::new(),
        ),
        BoundaryKind::Transmissive => {
            // The reference profile of the ghosts is the unperturbed stationary one.
            let st = stationary
                .as_ref()
                .ok_or_else(|| Error::Config("transmissive boundaries need a stationary initial state".into()))?;
            let base = stationary_ghosts.as_ref().expect("stored with the stationary state");
            let m = config.order as usize;
            (
                GhostBoundary::Transmissive {
                    left: base[..g].to_vec(),
                    right: base[g..].to_vec(),
                    left_interior: st[..m].to_vec(),
                    right_interior: st.iter().rev().take(m).copied().collect(),
                    degree: m - 1,
                },
                Vec::new(),
            )
        }
        BoundaryKind::SourceDriven => (
            GhostBoundary::SourceDriven { left_area: full[0].a, right_area: full[total - 1].a },
            vec![full[0].q, full[total - 1].q],
        ),
    };
    let sim = VesselSimulation::new(scheme, boundary, full[g..g + n].to_vec(), extra)?;
    Ok(Prepared { case: case.clone(), scaling, sim, stationary })
}

impl Prepared {
    /// Nondimensional end time of the case.
    pub fn t_end(&self) -> f64 {
        self.case.t_end / self.scaling.time
    }

    fn a0_centers(&self) -> Vec<f64> {
        let s = &self.sim.scheme;
        s.mesh.physical().map(|j| s.cells[j].center.sigma.a0).collect()
    }

    /// L1 errors of the current state against `reference` (physical cells, nondimensional).
    pub fn errors_against(&self, reference: &[State]) -> Result<ErrorReport> {
        let a0 = self.a0_centers();
        let cur = &self.sim.averages;
        if reference.len() != cur.len() {
            return Err(Error::InvalidParameter("reference and solution differ in length".into()));
        }
        let ratio = |w: &[State]| -> Vec<f64> { w.iter().zip(&a0).map(|(w, a0)| w.a / a0).collect() };
        let vel = |w: &[State]| -> Vec<f64> { w.iter().map(State::velocity).collect() };
        let dx = self.sim.scheme.mesh.dx();
        Ok(ErrorReport {
            area_ratio: l1_norm(&ratio(cur), &ratio(reference), dx)?,
            velocity: l1_norm(&vel(cur), &vel(reference), dx)?,
        })
    }

    /// Errors against the stored stationary solution.
    pub fn stationary_errors(&self) -> Result<ErrorReport> {
        let st = self
            .stationary
            .as_ref()
            .ok_or_else(|| Error::Config(format!("{} has no stationary reference", self.case.name)))?;
        self.errors_against(st)
    }

    /// Runs to the end time; `observe` sees the simulation after each step.
    pub fn run<F: FnMut(&VesselSimulation)>(&mut self, observe: F) -> Result<()> {
        let t_end = self.t_end();
        self.sim.run_until(t_end, observe)
    }

    /// Dimensional snapshot of the physical cells.
    pub fn snapshot(&self) -> Result<Vec<SnapshotRow>> {
        let s = &self.sim.scheme;
        let sc = &self.scaling;
        s.mesh
            .physical()
            .zip(&self.sim.averages)
            .map(|(j, w)| {
                let c = &s.cells[j].center;
                let d = sc.to_dim(*w);
                let a0 = c.sigma.a0 * sc.area;
                Ok(SnapshotRow {
                    x: c.x * sc.length,
                    a: d.a,
                    q: d.q,
                    a_over_a0: d.a / a0,
                    u: d.velocity(),
                    p: s.model.pressure(w.a, &c.sigma)? * sc.pressure(),
                    gamma: s.model.energy(w, &c.sigma)? * sc.pressure(),
                })
            })
            .collect()
    }

    /// Dimensional `(t, p, q)` at the middle cell.
    pub fn midpoint_sample(&self) -> Result<TimeSample> {
        midpoint_sample(&self.sim, &self.scaling)
    }

    /// Nondimensional jump in total energy between the two traces at the
    /// interface closest to `x` (dimensional).
    pub fn energy_jump_at(&self, x: f64) -> Result<f64> {
        let s = &self.sim.scheme;
        let full = self.sim.full_averages();
        let iface = s.mesh.ghosts + (x / self.case.length / s.mesh.dx()).round() as usize;
        let recs = s.reconstruct(&full, iface - 1..iface + 1, None);
        let gl = s.model.energy(&recs[0].p.right, &s.cells[iface - 1].sigma_right)?;
        let gr = s.model.energy(&recs[1].p.left, &s.cells[iface].sigma_left)?;
        Ok((gl - gr).abs())
    }
}

/// Dimensional pressure and flow at the middle cell of a simulation.
pub fn midpoint_sample(sim: &VesselSimulation, scaling: &Scaling) -> Result<TimeSample> {
    let s = &sim.scheme;
    let k = sim.averages.len() / 2;
    let w = sim.averages[k];
    let c = &s.cells[s.mesh.ghosts + k].center;
    Ok(TimeSample {
        t: sim.time * scaling.time,
        p_mid: s.model.pressure(w.a, &c.sigma)? * scaling.pressure(),
        q_mid: w.q * scaling.flow(),
    })
}

/// Outcome of one configured run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub prepared: Prepared,
    pub errors: Option<ErrorReport>,
    pub series: Vec<TimeSample>,
}

/// Runs a case, recording the midpoint time series, and reports errors
/// against the stationary solution when there is one.
pub fn run_case(case: &TestCase, config: SchemeConfig) -> Result<RunOutcome> {
    let mut prepared = prepare(case, config)?;
    let scaling = prepared.scaling;
    let mut series = vec![prepared.midpoint_sample()?];
    let mut failure = None;
    prepared.run(|sim| match midpoint_sample(sim, &scaling) {
        Ok(s) => series.push(s),
        Err(e) => failure = Some(e),
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let errors = match prepared.stationary {
        Some(_) => Some(prepared.stationary_errors()?),
        None => None,
    };
    Ok(RunOutcome { prepared, errors, series })
}
