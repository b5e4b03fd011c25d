//! Networks of vessels joined at junctions, with prescribed boundary values
//! and Windkessel terminals.
//!
//! Each vessel is discretized on its own uniform mesh with the single-vessel
//! scheme; at vessel ends the numerical flux is the physical flux of a star
//! state from a junction, boundary or terminal Riemann problem. All vessels
//! share one set of nondimensional scales.

pub mod coupling;
pub mod geometry;
mod simulation;
pub mod topology;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use serde::Deserialize;

pub use coupling::{advance_capacitor, mass_residual, riemann_beta, solve_boundary, solve_junction, solve_rcr, EndTrace, Prescribed};
pub use geometry::{bowed_polyline, synthetic_layout, venous_offset, Polyline, WallLaw};
pub use simulation::{InitialState, NetworkSimulation, VesselSample};
pub use topology::{End, NetworkTable, RcrParams, Topology, VesselRecord};

use crate::error::{Error, Result};
use crate::model::FluidParams;
use crate::properties::{PiecewiseField, VesselProperties};
use crate::tube_law::TubeLaw;

/// Time-dependent boundary value in CGS units.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Signal {
    Constant { value: f64 },
    /// `peak sin(pi t / systole)` during the first `systole` of each period, zero after.
    HalfSine { peak: f64, period: f64, systole: f64 },
    /// Linear interpolation in a table, optionally repeated with the table's time span.
    Table { times: Vec<f64>, values: Vec<f64>, #[serde(default)] periodic: bool },
}

impl Signal {
    /// Two columns `time value` per line; `#` comments allowed.
    pub fn from_file(path: &Path, periodic: bool) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let v: Vec<f64> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Network(format!("{}:{}: {e}", path.display(), n + 1)))?;
            if v.len() != 2 {
                return Err(Error::Network(format!("{}:{}: expected two columns", path.display(), n + 1)));
            }
            times.push(v[0]);
            values.push(v[1]);
        }
        let s = Signal::Table { times, values, periodic };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Signal::HalfSine { period, systole, .. } if !(*systole > 0.0 && systole <= period) => {
                Err(Error::Config("half-sine signal needs 0 < systole <= period".into()))
            }
            Signal::Table { times, values, .. } => {
                if times.is_empty() || times.len() != values.len() || times.windows(2).any(|w| w[1] <= w[0]) {
                    Err(Error::Config("signal table needs matching, increasing times".into()))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Signal::Constant { value } => *value,
            Signal::HalfSine { peak, period, systole } => {
                let tau = t.rem_euclid(*period);
                if tau < *systole {
                    peak * (std::f64::consts::PI * tau / systole).sin()
                } else {
                    0.0
                }
            }
            Signal::Table { times, values, periodic } => {
                let n = times.len();
                let mut t = t;
                if *periodic && n > 1 {
                    let span = times[n - 1] - times[0];
                    t = times[0] + (t - times[0]).rem_euclid(span);
                }
                if t <= times[0] {
                    return values[0];
                }
                if t >= times[n - 1] {
                    return values[n - 1];
                }
                let j = times.partition_point(|&x| x <= t) - 1;
                let f = (t - times[j]) / (times[j + 1] - times[j]);
                values[j] + f * (values[j + 1] - values[j])
            }
        }
    }
}

/// Condition at a node with a single vessel end.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryCondition {
    Flow(Signal),
    Pressure(Signal),
    Area(Signal),
    Windkessel { params: RcrParams, venous_pressure: f64, initial_pressure: f64 },
}

/// One vessel in dimensional (CGS) units.
#[derive(Debug, Clone, PartialEq)]
pub struct VesselSpec {
    pub name: String,
    pub inlet: usize,
    pub outlet: usize,
    pub length: f64,
    pub radius: f64,
    pub props: VesselProperties,
    pub cells: usize,
    pub polyline: Option<Polyline>,
}

/// Complete dimensional network problem.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    pub law: TubeLaw,
    pub fluid: FluidParams,
    pub vessels: Vec<VesselSpec>,
    /// Conditions keyed by node label.
    pub boundaries: BTreeMap<usize, BoundaryCondition>,
    /// Node where pressure is referenced (the aortic root).
    pub root: usize,
    /// Gravity vector [cm/s^2]; zero when off.
    pub gravity: Vector3<f64>,
}

impl NetworkSpec {
    pub fn table(&self) -> NetworkTable {
        NetworkTable {
            vessels: self
                .vessels
                .iter()
                .map(|v| VesselRecord {
                    name: v.name.clone(),
                    inlet: v.inlet,
                    outlet: v.outlet,
                    length: v.length,
                    radius: v.radius,
                    rcr: None,
                })
                .collect(),
        }
    }

    /// Checks connectivity and that boundary conditions sit exactly on the leaves.
    pub fn validate(&self) -> Result<()> {
        let table = self.table();
        let topo = Topology::new(&table);
        if !topo.is_connected(&table) {
            return Err(Error::Network("network is not connected".into()));
        }
        for leaf in topo.leaves() {
            let id = topo.node_id(leaf);
            if !self.boundaries.contains_key(&id) {
                return Err(Error::Network(format!("node {id} is a free end without a boundary condition")));
            }
        }
        for &id in self.boundaries.keys() {
            match topo.try_node_index(id) {
                None => return Err(Error::Network(format!("boundary condition on unknown node {id}"))),
                Some(k) if topo.incident(k).len() != 1 => {
                    return Err(Error::Network(format!("boundary condition on junction node {id}")))
                }
                _ => {}
            }
        }
        if topo.try_node_index(self.root).is_none() {
            return Err(Error::Network(format!("root node {} is not in the network", self.root)));
        }
        Ok(())
    }

    /// Position of every node label, taken from the polylines (if all vessels have one).
    pub fn node_positions(&self) -> Option<BTreeMap<usize, Vector3<f64>>> {
        let mut pos = BTreeMap::new();
        for v in &self.vessels {
            let p = v.polyline.as_ref()?;
            pos.insert(v.inlet, p.start());
            pos.insert(v.outlet, p.end());
        }
        Some(pos)
    }
}

/// Stiffness of each vessel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stiffness {
    FromRadius(WallLaw),
    Fixed(f64),
}

/// Where vessel centrelines come from.
#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    /// No centrelines; gravity is not applied.
    None,
    /// Synthetic upright layout built from vessel names.
    Synthetic,
    /// One `<vessel name>.txt` file per vessel in this directory.
    Directory(PathBuf),
}

/// What terminal vessels are coupled to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TerminalMode {
    /// Windkessel from the table; venous pressure `p_ven` plus, with
    /// gravity, the hydrostatic offset of the terminal relative to the root.
    Windkessel { venous_pressure: f64, initial_pressure: f64 },
    /// Closed ends (`q = 0`).
    ZeroFlow,
}

/// How to turn a [`NetworkTable`] into a [`NetworkSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkOptions {
    pub law: TubeLaw,
    pub fluid: FluidParams,
    pub stiffness: Stiffness,
    /// External (reference) pressure `pe` [dyn/cm^2].
    pub reference_pressure: f64,
    /// Target cell size [cm]; each vessel gets `ceil(L / dx)` cells.
    pub dx: f64,
    pub gravity: Vector3<f64>,
    pub geometry: Geometry,
    pub root: usize,
    pub root_condition: BoundaryCondition,
    pub terminals: TerminalMode,
}

impl NetworkOptions {
    /// Arterial tube law, radius-based stiffness, `pe = 1e5`, blood in CGS.
    pub fn arterial(root: usize, root_condition: BoundaryCondition) -> Self {
        Self {
            law: TubeLaw::arterial(),
            fluid: FluidParams::cgs(1.05),
            stiffness: Stiffness::FromRadius(WallLaw::default()),
            reference_pressure: 1e5,
            dx: 1.0,
            gravity: Vector3::zeros(),
            geometry: Geometry::None,
            root,
            root_condition,
            terminals: TerminalMode::Windkessel { venous_pressure: 0.0, initial_pressure: 0.0 },
        }
    }
}

impl NetworkTable {
    /// Builds the dimensional problem.
    pub fn build(&self, opts: &NetworkOptions) -> Result<NetworkSpec> {
        if !(opts.dx > 0.0) {
            return Err(Error::Config("cell size must be positive".into()));
        }
        let topo = Topology::new(self);
        let root_index = topo
            .try_node_index(opts.root)
            .ok_or_else(|| Error::Network(format!("root node {} is not in the table", opts.root)))?;
        let polylines: Option<Vec<Polyline>> = match &opts.geometry {
            Geometry::None => None,
            Geometry::Synthetic => Some(synthetic_layout(self, &topo, root_index)?),
            Geometry::Directory(dir) => Some(
                self.vessels
                    .iter()
                    .map(|v| {
                        let path = dir.join(format!("{}.txt", v.name));
                        Polyline::parse(&std::fs::read_to_string(&path)?)
                    })
                    .collect::<Result<_>>()?,
            ),
        };
        if let Some(ps) = &polylines {
            for (v, p) in self.vessels.iter().zip(ps) {
                let l = p.arc_length();
                if (l - v.length).abs() > 0.01 * v.length {
                    return Err(Error::Network(format!(
                        "centreline of {} has length {l:.4} cm, table says {}",
                        v.name, v.length
                    )));
                }
            }
        }
        let mut vessels = Vec::with_capacity(self.vessels.len());
        for (k, v) in self.vessels.iter().enumerate() {
            let stiffness = match opts.stiffness {
                Stiffness::FromRadius(w) => w.stiffness(v.radius)?,
                Stiffness::Fixed(k) => k,
            };
            let a0 = std::f64::consts::PI * v.radius * v.radius;
            let polyline = polylines.as_ref().map(|p| p[k].clone());
            let cells = ((v.length / opts.dx).ceil() as usize).max(1);
            let g = match &polyline {
                Some(p) if opts.gravity.norm() > 0.0 => {
                    let knots: Vec<f64> = (0..=cells).map(|i| v.length * i as f64 / cells as f64).collect();
                    PiecewiseField::smooth(p.gravity_profile(opts.gravity, v.length, &knots)?)?
                }
                _ => PiecewiseField::constant(0.0),
            };
            let props = VesselProperties::new(
                PiecewiseField::constant(stiffness),
                PiecewiseField::constant(a0),
                PiecewiseField::constant(opts.reference_pressure),
                g,
            )?;
            vessels.push(VesselSpec {
                name: v.name.clone(),
                inlet: v.inlet,
                outlet: v.outlet,
                length: v.length,
                radius: v.radius,
                props,
                cells,
                polyline,
            });
        }
        let mut spec = NetworkSpec {
            law: opts.law,
            fluid: opts.fluid,
            vessels,
            boundaries: BTreeMap::new(),
            root: opts.root,
            gravity: opts.gravity,
        };
        let positions = spec.node_positions();
        let root_pos = positions.as_ref().map(|p| p[&opts.root]);
        for leaf in topo.leaves() {
            let id = topo.node_id(leaf);
            if id == opts.root {
                spec.boundaries.insert(id, opts.root_condition.clone());
                continue;
            }
            let (vessel, _) = topo.incident(leaf)[0];
            let record = &self.vessels[vessel];
            let bc = match opts.terminals {
                TerminalMode::ZeroFlow => BoundaryCondition::Flow(Signal::Constant { value: 0.0 }),
                TerminalMode::Windkessel { venous_pressure, initial_pressure } => {
                    let params = record.rcr.ok_or_else(|| {
                        Error::Network(format!("free end {id} of {} has no terminal model", record.name))
                    })?;
                    let offset = match (&positions, root_pos) {
                        (Some(p), Some(r)) => opts.fluid.rho * opts.gravity.dot(&(p[&id] - r)),
                        _ => 0.0,
                    };
                    BoundaryCondition::Windkessel {
                        params,
                        venous_pressure: venous_pressure + offset,
                        initial_pressure: initial_pressure + offset,
                    }
                }
            };
            spec.boundaries.insert(id, bc);
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// The single vein with fixed inflow and a Windkessel outlet: `L = 1.4 cm`,
/// `R0 = 0.015 cm`, `m = 10`, `n = -3/2`, `K = 1e4`, `pe = 0`, 10 cells.
pub fn single_vessel_rcr(cells: usize) -> Result<NetworkSpec> {
    let table = NetworkTable::parse("vein 0 1 1.4 0.015 750 4250 3e-9")?;
    let opts = NetworkOptions {
        law: TubeLaw::new(10.0, -1.5)?,
        fluid: FluidParams::cgs(1.05),
        stiffness: Stiffness::Fixed(1e4),
        reference_pressure: 0.0,
        dx: 1.4 / cells as f64,
        gravity: Vector3::zeros(),
        geometry: Geometry::None,
        root: 0,
        root_condition: BoundaryCondition::Flow(Signal::Constant { value: 0.0004 }),
        terminals: TerminalMode::Windkessel { venous_pressure: 0.0, initial_pressure: 0.0 },
    };
    let mut spec = table.build(&opts)?;
    spec.vessels[0].cells = cells;
    Ok(spec)
}
