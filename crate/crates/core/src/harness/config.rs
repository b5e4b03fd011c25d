//! TOML run configurations.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::presets::{preset, BoundaryKind, InitialCondition, TestCase};
use crate::error::{Error, Result};
use crate::model::{FluidParams, State};
use crate::properties::{PiecewiseField, Profile, VesselProperties};
use crate::scheme::SchemeConfig;
use crate::steady::Monotonicity;
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

/// Field given as pieces separated by jump points.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    #[serde(default)]
    pub breaks: Vec<f64>,
    pub pieces: Vec<Profile>,
}

impl FieldSpec {
    fn build(&self) -> Result<PiecewiseField> {
        PiecewiseField::new(self.breaks.clone(), self.pieces.clone())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    Stationary { area: f64, q: f64, perturbation: Option<Profile> },
    Critical { x: f64, area: f64, q: f64, decreasing: bool },
    Riemann { left: [f64; 2], right: [f64; 2], at: f64 },
}

/// Problem defined from scratch in SI units.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomCase {
    pub m: f64,
    pub n: f64,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_mu")]
    pub mu: f64,
    pub length: f64,
    pub cells: usize,
    pub t_end: f64,
    pub k: FieldSpec,
    pub a0: FieldSpec,
    pub pe: FieldSpec,
    pub g: FieldSpec,
    pub initial: InitialSpec,
    #[serde(default)]
    pub source_driven_ghosts: bool,
}

fn default_rho() -> f64 {
    1050.0
}

fn default_mu() -> f64 {
    0.0045
}

impl CustomCase {
    pub fn build(&self, name: &str) -> Result<TestCase> {
        let law = TubeLaw::new(self.m, self.n)?;
        let mut fluid = FluidParams::si(self.rho);
        fluid.mu = self.mu;
        let props = VesselProperties::new(self.k.build()?, self.a0.build()?, self.pe.build()?, self.g.build()?)?;
        let (initial, trend) = match &self.initial {
            InitialSpec::Stationary { area, q, perturbation } => (
                InitialCondition::StationaryFromInlet { area: *area, q: *q, perturbation: perturbation.clone() },
                None,
            ),
            InitialSpec::Critical { x, area, q, decreasing } => (
                InitialCondition::StationaryFromCritical { x: *x, area: *area, q: *q },
                Some(if *decreasing { Monotonicity::Decreasing } else { Monotonicity::Increasing }),
            ),
            InitialSpec::Riemann { left, right, at } => (
                InitialCondition::Riemann {
                    left: State::new(left[0], left[1]),
                    right: State::new(right[0], right[1]),
                    at: *at,
                },
                None,
            ),
        };
        Ok(TestCase {
            name: name.into(),
            law,
            fluid,
            props,
            length: self.length,
            cells: self.cells,
            t_end: self.t_end,
            initial,
            boundary: if self.source_driven_ghosts { BoundaryKind::SourceDriven } else { BoundaryKind::Stationary },
            trend,
        })
    }
}

/// Settings that override a preset.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseOverrides {
    pub cells: Option<usize>,
    pub t_end: Option<f64>,
}

/// A single-vessel run.
///
/// ```toml
/// preset = "test1"
/// order = 3
/// well_balanced = true
/// snapshot = "out/test1.csv"
/// ```
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub custom: Option<CustomCase>,
    #[serde(default = "default_order")]
    pub order: u8,
    #[serde(default = "default_true")]
    pub well_balanced: bool,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(flatten)]
    pub overrides: CaseOverrides,
    /// Final-state CSV.
    pub snapshot: Option<PathBuf>,
    /// Midpoint time-series CSV.
    pub series: Option<PathBuf>,
    /// Meshes of a convergence study.
    #[serde(default)]
    pub meshes: Vec<usize>,
    /// Cells of the convergence reference (order 3, well-balanced).
    pub reference_cells: Option<usize>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.scheme().validate()?;
        if cfg.preset.is_some() == cfg.custom.is_some() {
            return Err(Error::Config("exactly one of `preset` and `custom` must be given".into()));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn scheme(&self) -> SchemeConfig {
        SchemeConfig { order: self.order, well_balanced: self.well_balanced, cfl: self.cfl }
    }

    /// The fully resolved test case.
    pub fn case(&self) -> Result<TestCase> {
        let mut case = match (&self.preset, &self.custom) {
            (Some(p), None) => {
                let mut c = preset(p)?;
                if let Some(n) = self.overrides.cells {
                    // The critical cell of the transcritical test moves with the mesh.
                    if c.name == "test5" {
                        c = super::presets::test5_with_cells(n);
                    }
                }
                c
            }
            (None, Some(c)) => c.build(self.name.as_deref().unwrap_or("custom"))?,
            _ => return Err(Error::Config("exactly one of `preset` and `custom` must be given".into())),
        };
        if let Some(n) = self.overrides.cells {
            if n == 0 {
                return Err(Error::Config("cells must be positive".into()));
            }
            case.cells = n;
        }
        if let Some(t) = self.overrides.t_end {
            if !(t > 0.0) {
                return Err(Error::Config("t_end must be positive".into()));
            }
            case.t_end = t;
        }
        if let Some(name) = &self.name {
            case.name = name.clone();
        }
        Ok(case)
    }
}
