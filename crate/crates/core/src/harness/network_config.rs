//! TOML description of a network experiment.
//!
//! ```toml
//! table = "../data/adan86.tsv"   # relative to this file
//! root = 102
//! t_end = 2.0
//! order = 2
//! gravity = [0.0, 0.0, -981.0]
//! geometry = "synthetic"
//! inlet = { kind = "pressure", signal = { kind = "constant", value = 1e5 } }
//! terminals = { kind = "zero_flow" }
//! initial = { kind = "hydrostatic", root_pressure = 1e5 }
//! ```

use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::network::{
    single_vessel_rcr, BoundaryCondition, Geometry, InitialState, NetworkOptions, NetworkSpec, NetworkTable, Signal,
    TerminalMode,
};
use crate::scheme::SchemeConfig;
use crate::tube_law::TubeLaw;

fn default_order() -> u8 {
    2
}

fn default_true() -> bool {
    true
}

fn default_cfl() -> f64 {
    0.5
}

fn default_dx() -> f64 {
    1.0
}

fn default_sample() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InletSpec {
    Flow { signal: Option<Signal>, file: Option<PathBuf>, #[serde(default)] periodic: bool },
    Pressure { signal: Option<Signal>, file: Option<PathBuf>, #[serde(default)] periodic: bool },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TerminalSpec {
    Windkessel { venous_pressure: f64, initial_pressure: f64 },
    ZeroFlow,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    Rest { pressure: f64 },
    Hydrostatic { root_pressure: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometrySpec {
    None,
    Synthetic,
    Directory(PathBuf),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    /// `single_vessel_rcr` instead of a table.
    pub preset: Option<String>,
    pub table: Option<PathBuf>,
    pub root: Option<usize>,
    pub t_end: f64,
    #[serde(default = "default_order")]
    pub order: u8,
    #[serde(default = "default_true")]
    pub well_balanced: bool,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    /// Target cell size [cm].
    #[serde(default = "default_dx")]
    pub dx: f64,
    /// Cells of the preset vessel.
    pub cells: Option<usize>,
    /// Tube law exponents `[m, n]`; arterial by default.
    pub law: Option<[f64; 2]>,
    #[serde(default)]
    pub gravity: [f64; 3],
    pub geometry: Option<GeometrySpec>,
    pub inlet: Option<InletSpec>,
    pub terminals: Option<TerminalSpec>,
    pub initial: Option<InitialSpec>,
    /// Seconds between midpoint samples.
    #[serde(default = "default_sample")]
    pub sample_every: f64,
}

/// Everything a network run needs.
pub struct NetworkRun {
    pub spec: NetworkSpec,
    pub scheme: SchemeConfig,
    pub initial: InitialState,
    pub t_end: f64,
    pub sample_every: f64,
}

fn signal(base: &Path, signal: &Option<Signal>, file: &Option<PathBuf>, periodic: bool) -> Result<Signal> {
    match (signal, file) {
        (Some(s), None) => {
            s.validate()?;
            Ok(s.clone())
        }
        (None, Some(f)) => Signal::from_file(&base.join(f), periodic),
        _ => Err(Error::Config("inlet needs exactly one of `signal` and `file`".into())),
    }
}

impl NetworkConfig {
    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        if !(cfg.t_end > 0.0) || !(cfg.sample_every > 0.0) {
            return Err(Error::Config("t_end and sample_every must be positive".into()));
        }
        Ok(cfg)
    }

    /// Resolves the experiment; relative paths are taken from `base`.
    pub fn resolve(&self, base: &Path) -> Result<NetworkRun> {
        let scheme = SchemeConfig { order: self.order, well_balanced: self.well_balanced, cfl: self.cfl };
        scheme.validate()?;
        let (spec, default_initial) = match (&self.preset, &self.table) {
            (Some(p), None) if p == "single_vessel_rcr" => {
                (single_vessel_rcr(self.cells.unwrap_or(10))?, InitialState::Rest { pressure: 0.0 })
            }
            (Some(p), None) => return Err(Error::Config(format!("unknown network preset '{p}'"))),
            (None, Some(table)) => {
                let table = NetworkTable::load(&base.join(table))?;
                let root = self.root.ok_or_else(|| Error::Config("a table needs `root`".into()))?;
                let inlet = match &self.inlet {
                    Some(InletSpec::Flow { signal: s, file, periodic }) => BoundaryCondition::Flow(signal(base, s, file, *periodic)?),
                    Some(InletSpec::Pressure { signal: s, file, periodic }) => {
                        BoundaryCondition::Pressure(signal(base, s, file, *periodic)?)
                    }
                    None => return Err(Error::Config("a table needs an `inlet`".into())),
                };
                let mut opts = NetworkOptions::arterial(root, inlet);
                if let Some([m, n]) = self.law {
                    opts.law = TubeLaw::new(m, n)?;
                }
                opts.dx = self.dx;
                opts.gravity = Vector3::from(self.gravity);
                opts.geometry = match &self.geometry {
                    None | Some(GeometrySpec::None) => Geometry::None,
                    Some(GeometrySpec::Synthetic) => Geometry::Synthetic,
                    Some(GeometrySpec::Directory(d)) => Geometry::Directory(base.join(d)),
                };
                opts.terminals = match self.terminals {
                    Some(TerminalSpec::ZeroFlow) => TerminalMode::ZeroFlow,
                    Some(TerminalSpec::Windkessel { venous_pressure, initial_pressure }) => {
                        TerminalMode::Windkessel { venous_pressure, initial_pressure }
                    }
                    None => opts.terminals,
                };
                (table.build(&opts)?, InitialState::Rest { pressure: opts.reference_pressure })
            }
            _ => return Err(Error::Config("exactly one of `preset` and `table` must be given".into())),
        };
        let initial = match self.initial {
            Some(InitialSpec::Rest { pressure }) => InitialState::Rest { pressure },
            Some(InitialSpec::Hydrostatic { root_pressure }) => InitialState::Hydrostatic { root_pressure },
            None => default_initial,
        };
        Ok(NetworkRun { spec, scheme, initial, t_end: self.t_end, sample_every: self.sample_every })
    }
}
