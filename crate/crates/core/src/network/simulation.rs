//! Time integration of a network: per-vessel schemes coupled through star
//! states at their ends.

use std::collections::BTreeMap;

use super::coupling::{advance_capacitor, mass_residual, solve_boundary, solve_junction, solve_rcr, EndTrace, Prescribed};
use super::topology::{End, Topology};
use super::{BoundaryCondition, NetworkSpec, Signal};
use crate::error::{Error, Result};
use crate::grid::Mesh;
use crate::harness::{SnapshotRow, TimeSample};
use crate::model::{Model, State};
use crate::scaling::{Scaling, ScalingSamples};
use crate::scheme::{ssp_step, ProfileCache, SchemeConfig, VesselScheme};

/// Initial data for every vessel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    /// Uniform pressure [dyn/cm^2], no flow.
    Rest { pressure: f64 },
    /// Hydrostatic state with the given root pressure: in each vessel, the
    /// stationary profile (`q = 0`) of the well-balanced reconstruction of
    /// the configured order, started from the exact pressure at the inlet.
    Hydrostatic { root_pressure: f64 },
}

/// Midpoint values of one vessel at one instant (CGS).
#[derive(Debug, Clone, PartialEq)]
pub struct VesselSample {
    pub vessel: usize,
    pub sample: TimeSample,
}

#[derive(Debug, Clone)]
struct Vessel {
    scheme: VesselScheme,
    cache: ProfileCache,
    offset: usize,
    /// Exact hydrostatic pressure at the inlet [dyn/cm^2].
    inlet_pressure: f64,
}

#[derive(Debug, Clone)]
enum Terminal {
    Signal(Signal, fn(f64) -> Prescribed),
    Windkessel { r_prox: f64, r_dist: f64, compliance: f64, p_ven: f64, slot: usize },
}

#[derive(Debug, Clone)]
struct BoundaryEnd {
    node: usize,
    vessel: usize,
    end: End,
    kind: Terminal,
}

/// Nondimensional state of a network run.
#[derive(Debug, Clone)]
pub struct NetworkSimulation {
    pub spec: NetworkSpec,
    pub scaling: Scaling,
    pub config: SchemeConfig,
    vessels: Vec<Vessel>,
    junctions: Vec<(usize, Vec<(usize, End)>)>,
    boundaries: Vec<BoundaryEnd>,
    /// Cell averages of all vessels followed by capacitor pressures.
    unknowns: Vec<f64>,
    pub time: f64,
    pub steps: usize,
    /// Largest junction mass residual seen at any stage.
    pub max_mass_residual: f64,
    /// Star states at `(inlet, outlet)` of each vessel from the last stage.
    stars: Vec<[State; 2]>,
}

impl NetworkSimulation {
    pub fn new(spec: NetworkSpec, config: SchemeConfig, initial: InitialState) -> Result<Self> {
        spec.validate()?;
        config.validate()?;
        let table = spec.table();
        let topo = Topology::new(&table);
        let dim_model = Model::new(spec.law, spec.fluid)?;

        let (mut a0s, mut ks, mut gs) = (Vec::new(), Vec::new(), Vec::new());
        let mut centers = Vec::with_capacity(spec.vessels.len());
        for v in &spec.vessels {
            let mesh = Mesh::new(0.0, v.length, v.cells, 0)?;
            let xs = mesh.centers();
            for &x in &xs {
                let s = v.props.sigma(x);
                a0s.push(s.a0);
                ks.push(s.k);
                gs.push(v.props.gravity(x));
            }
            centers.push(xs);
        }
        let mean_length = spec.vessels.iter().map(|v| v.length).sum::<f64>() / spec.vessels.len() as f64;
        let scaling = Scaling::from_samples(
            ScalingSamples { length: mean_length, a0: &a0s, k: &ks, g: &gs, velocity: &[] },
            &spec.fluid,
        )?;
        let model = scaling.model(&dim_model)?;

        // Dimensional hydrostatic pressure at the inlet of every vessel.
        let positions = spec.node_positions();
        let root_pos = positions.as_ref().map(|p| p[&spec.root]);
        let rho = spec.fluid.rho;
        let root_pressure = match initial {
            InitialState::Rest { pressure } => pressure,
            InitialState::Hydrostatic { root_pressure } => root_pressure,
        };
        let inlet_pressure = |k: usize| -> f64 {
            match (&positions, root_pos) {
                (Some(p), Some(r)) => root_pressure + rho * spec.gravity.dot(&(p[&spec.vessels[k].inlet] - r)),
                _ => root_pressure,
            }
        };

        let mut vessels = Vec::with_capacity(spec.vessels.len());
        let mut unknowns = Vec::new();
        for (k, v) in spec.vessels.iter().enumerate() {
            let props = scaling.properties(&v.props);
            let mesh = Mesh::new(0.0, v.length / scaling.length, v.cells, 0)?;
            let scheme = VesselScheme::new(model, props, mesh, config)?;
            let p_in = inlet_pressure(k);
            let offset = unknowns.len();
            match initial {
                InitialState::Hydrostatic { .. } => {
                    let a_in = dim_model.area_for_pressure(p_in, &v.props.sigma(0.0))? / scaling.area;
                    let wb = VesselScheme::new(model, scheme.props.clone(), mesh, SchemeConfig { well_balanced: true, ..config })?;
                    let placeholder = vec![State::new(a_in, 0.0); v.cells];
                    let profile = wb.steady_context(&placeholder).profile_from_trace(0, a_in, 0.0, 0, v.cells - 1)?;
                    for w in profile.averages()? {
                        unknowns.extend([w.a, w.q]);
                    }
                }
                InitialState::Rest { pressure } => {
                    for &x in &centers[k] {
                        let a = dim_model.area_for_pressure(pressure, &v.props.sigma(x))? / scaling.area;
                        unknowns.extend([a, 0.0]);
                    }
                }
            }
            let cache = vec![None; v.cells];
            vessels.push(Vessel { scheme, cache, offset, inlet_pressure: p_in });
        }

        let junctions = topo
            .junctions()
            .into_iter()
            .map(|n| (topo.node_id(n), topo.incident(n).to_vec()))
            .collect();
        let mut boundaries = Vec::new();
        for (&node, bc) in &spec.boundaries {
            let (vessel, end) = topo.incident(topo.node_index(node))[0];
            let kind = match bc {
                BoundaryCondition::Flow(s) => Terminal::Signal(s.clone(), Prescribed::Flow),
                BoundaryCondition::Pressure(s) => Terminal::Signal(s.clone(), Prescribed::Pressure),
                BoundaryCondition::Area(s) => Terminal::Signal(s.clone(), Prescribed::Area),
                BoundaryCondition::Windkessel { params, venous_pressure, initial_pressure } => {
                    let slot = unknowns.len();
                    unknowns.push(initial_pressure / scaling.pressure());
                    Terminal::Windkessel {
                        r_prox: params.r_prox / scaling.resistance(),
                        r_dist: params.r_dist / scaling.resistance(),
                        compliance: params.compliance / scaling.compliance(),
                        p_ven: venous_pressure / scaling.pressure(),
                        slot,
                    }
                }
            };
            boundaries.push(BoundaryEnd { node, vessel, end, kind });
        }
        let stars = vec![[State::ZERO; 2]; vessels.len()];
        Ok(Self {
            spec,
            scaling,
            config,
            vessels,
            junctions,
            boundaries,
            unknowns,
            time: 0.0,
            steps: 0,
            max_mass_residual: 0.0,
            stars,
        })
    }

    pub fn vessel_count(&self) -> usize {
        self.vessels.len()
    }

    /// Nondimensional cell averages of vessel `k`.
    pub fn averages(&self, k: usize) -> Vec<State> {
        let v = &self.vessels[k];
        let n = v.scheme.mesh.cells;
        (0..n)
            .map(|i| State::new(self.unknowns[v.offset + 2 * i], self.unknowns[v.offset + 2 * i + 1]))
            .collect()
    }

    /// Capacitor pressures [dyn/cm^2] keyed by terminal node.
    pub fn capacitor_pressures(&self) -> BTreeMap<usize, f64> {
        self.boundaries
            .iter()
            .filter_map(|b| match b.kind {
                Terminal::Windkessel { slot, .. } => Some((b.node, self.unknowns[slot] * self.scaling.pressure())),
                _ => None,
            })
            .collect()
    }

    /// Star state [cm^2, cm^3/s] at one end of vessel `k` from the last stage evaluated.
    pub fn star(&self, k: usize, end: End) -> State {
        let i = if end == End::Inlet { 0 } else { 1 };
        self.scaling.to_dim(self.stars[k][i])
    }

    /// Pressure of a dimensional state at one end of vessel `k`.
    pub fn end_pressure(&self, k: usize, end: End, w: State) -> Result<f64> {
        let v = &self.vessels[k];
        let c = match end {
            End::Inlet => &v.scheme.cells[0].sigma_left,
            End::Outlet => &v.scheme.cells[v.scheme.mesh.cells - 1].sigma_right,
        };
        Ok(v.scheme.model.pressure(self.scaling.to_nd(w).a, c)? * self.scaling.pressure())
    }

    /// Global CFL step over all vessels.
    pub fn time_step(&self) -> Result<f64> {
        let mut dt = f64::INFINITY;
        for (k, v) in self.vessels.iter().enumerate() {
            dt = dt.min(v.scheme.time_step(&self.averages(k))?);
        }
        Ok(dt)
    }

    fn stage_times(order: u8) -> &'static [f64] {
        match order {
            1 => &[0.0],
            2 => &[0.0, 1.0],
            _ => &[0.0, 1.0, 0.5],
        }
    }

    /// Advances by `dt` (nondimensional).
    pub fn step(&mut self, dt: f64) -> Result<()> {
        let order = self.config.order;
        let t0 = self.time;
        let t_scale = self.scaling.time;
        let sc = self.scaling;
        let Self { vessels, junctions, boundaries, unknowns, max_mass_residual, stars, .. } = self;
        let offsets = Self::stage_times(order);
        let mut stage = 0usize;
        let next = ssp_step(unknowns, dt, order, |v, dt| {
            let t = t0 + offsets[stage.min(offsets.len() - 1)] * dt;
            stage += 1;
            let mut recs = Vec::with_capacity(vessels.len());
            for ves in vessels.iter_mut() {
                let n = ves.scheme.mesh.cells;
                let avg: Vec<State> = (0..n).map(|i| State::new(v[ves.offset + 2 * i], v[ves.offset + 2 * i + 1])).collect();
                recs.push(ves.scheme.reconstruct(&avg, 0..n, Some(&mut ves.cache)));
            }
            let trace = |k: usize, end: End| -> EndTrace {
                let s = &vessels[k].scheme;
                let n = s.mesh.cells;
                match end {
                    End::Inlet => EndTrace { state: recs[k][0].p.left, sigma: s.cells[0].sigma_left, sign: -1.0 },
                    End::Outlet => EndTrace { state: recs[k][n - 1].p.right, sigma: s.cells[n - 1].sigma_right, sign: 1.0 },
                }
            };
            let slot = |end: End| if end == End::Inlet { 0 } else { 1 };
            for (node, ends) in junctions.iter() {
                let traces: Vec<EndTrace> = ends.iter().map(|&(k, e)| trace(k, e)).collect();
                let model = &vessels[ends[0].0].scheme.model;
                let st = solve_junction(model, &traces, &format!("{node}"))?;
                *max_mass_residual = max_mass_residual.max(mass_residual(&traces, &st));
                for (&(k, e), w) in ends.iter().zip(st) {
                    stars[k][slot(e)] = w;
                }
            }
            let mut out = v.to_vec();
            for b in boundaries.iter() {
                let tr = trace(b.vessel, b.end);
                let model = &vessels[b.vessel].scheme.model;
                let w = match &b.kind {
                    Terminal::Signal(sig, make) => {
                        let raw = sig.value(t * t_scale);
                        let nd = match make(0.0) {
                            Prescribed::Flow(_) => raw / sc.flow(),
                            Prescribed::Pressure(_) => raw / sc.pressure(),
                            Prescribed::Area(_) => raw / sc.area,
                        };
                        solve_boundary(model, &tr, make(nd)).map_err(|e| match e {
                            Error::Junction { reason, .. } => Error::Junction { node: format!("{} at t = {:.6e}", b.node, t * t_scale), reason },
                            e => e,
                        })?
                    }
                    Terminal::Windkessel { r_prox, r_dist, compliance, p_ven, slot: s } => {
                        let p = v[*s];
                        let (w, dq) = solve_rcr(model, &tr, p, *r_prox)?;
                        // Flow out of the vessel into the terminal.
                        let q_out = w.q * tr.sign;
                        out[*s] = advance_capacitor(p, q_out, dq * tr.sign, *r_dist, *compliance, *p_ven, dt);
                        w
                    }
                };
                stars[b.vessel][slot(b.end)] = w;
            }
            for (k, ves) in vessels.iter().enumerate() {
                let s = &ves.scheme;
                let m = &s.model;
                let n = s.mesh.cells;
                let r = &recs[k];
                let first = &s.cells[0];
                let last = &s.cells[n - 1];
                let d_in = m.flux(&r[0].p.left, &first.sigma_left)? - m.flux(&stars[k][0], &first.sigma_left)?;
                let d_out = m.flux(&stars[k][1], &last.sigma_right)? - m.flux(&r[n - 1].p.right, &last.sigma_right)?;
                let mut flucts = Vec::with_capacity(n.saturating_sub(1));
                for j in 0..n.saturating_sub(1) {
                    flucts.push(s.interface(j, &r[j], &r[j + 1])?);
                }
                for i in 0..n {
                    let dm = if i + 1 < n { flucts[i].minus } else { d_out };
                    let dp = if i > 0 { flucts[i - 1].plus } else { d_in };
                    let rate = s.cell_rate(i, &r[i], dm, dp)?;
                    let a = &mut out[ves.offset + 2 * i];
                    *a += dt * rate.a;
                    if !(*a > 0.0) {
                        return Err(Error::PositivityLoss { cell: i, area: *a, time: t * t_scale });
                    }
                    out[ves.offset + 2 * i + 1] += dt * rate.q;
                }
            }
            Ok(out)
        })?;
        self.unknowns = next;
        self.time += dt;
        self.steps += 1;
        Ok(())
    }

    /// Runs until `t_end` seconds, calling `observe` after every step.
    pub fn run_until<F: FnMut(&NetworkSimulation) -> Result<()>>(&mut self, t_end: f64, mut observe: F) -> Result<()> {
        let t_end = t_end / self.scaling.time;
        while self.time < t_end * (1.0 - 1e-14) {
            let dt = self.time_step()?.min(t_end - self.time);
            self.step(dt)?;
            observe(self)?;
        }
        Ok(())
    }

    /// Time in seconds.
    pub fn seconds(&self) -> f64 {
        self.time * self.scaling.time
    }

    /// Dimensional snapshot of vessel `k`.
    pub fn snapshot(&self, k: usize) -> Result<Vec<SnapshotRow>> {
        let s = &self.vessels[k].scheme;
        let sc = &self.scaling;
        self.averages(k)
            .iter()
            .zip(&s.cells)
            .map(|(w, cell)| {
                let c = &cell.center;
                let d = sc.to_dim(*w);
                Ok(SnapshotRow {
                    x: c.x * sc.length,
                    a: d.a,
                    q: d.q,
                    a_over_a0: w.a / c.sigma.a0,
                    u: d.velocity(),
                    p: s.model.pressure(w.a, &c.sigma)? * sc.pressure(),
                    gamma: s.model.energy(w, &c.sigma)? * sc.pressure(),
                })
            })
            .collect()
    }

    /// Midpoint pressure and flow of every vessel.
    pub fn midpoint_samples(&self) -> Result<Vec<VesselSample>> {
        (0..self.vessels.len())
            .map(|k| {
                let s = &self.vessels[k].scheme;
                let i = s.mesh.cells / 2;
                let w = self.averages(k)[i];
                Ok(VesselSample {
                    vessel: k,
                    sample: TimeSample {
                        t: self.seconds(),
                        p_mid: s.model.pressure(w.a, &s.cells[i].center.sigma)? * self.scaling.pressure(),
                        q_mid: w.q * self.scaling.flow(),
                    },
                })
            })
            .collect()
    }

    /// `max |p - p_hyd|` [dyn/cm^2] over both reconstructed traces of every
    /// cell, with `p_hyd(x) = p_hyd(inlet) + rho int_0^x g` the exact
    /// hydrostatic pressure for the configured root pressure.
    pub fn hydrostatic_deviation(&self) -> Result<f64> {
        Ok(self.hydrostatic_deviations()?.into_iter().fold(0.0, f64::max))
    }

    /// Per-vessel maxima of the deviation in [`Self::hydrostatic_deviation`].
    pub fn hydrostatic_deviations(&self) -> Result<Vec<f64>> {
        let sc = &self.scaling;
        let rho = self.spec.fluid.rho;
        self.vessels
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let s = &v.scheme;
                let g = &self.spec.vessels[k].props.g;
                let avg = self.averages(k);
                let recs = s.reconstruct(&avg, 0..avg.len(), None);
                let mut dev: f64 = 0.0;
                for (r, cell) in recs.iter().zip(&s.cells) {
                    for (w, sigma, x) in [(r.p.left, &cell.sigma_left, cell.x_left), (r.p.right, &cell.sigma_right, cell.x_right)] {
                        let x = x * sc.length;
                        let exact = v.inlet_pressure + rho * g.integral(0.0, x);
                        dev = dev.max((s.model.pressure(w.a, sigma)? * sc.pressure() - exact).abs());
                    }
                }
                Ok(dev)
            })
            .collect()
    }

    /// `max |q|` over all cells [cm^3/s].
    pub fn max_abs_flow(&self) -> f64 {
        self.unknowns_cells().map(|w| w.q.abs()).fold(0.0, f64::max) * self.scaling.flow()
    }

    fn unknowns_cells(&self) -> impl Iterator<Item = State> + '_ {
        (0..self.vessels.len()).flat_map(move |k| self.averages(k))
    }
}
