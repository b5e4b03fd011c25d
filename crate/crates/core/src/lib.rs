//! Fully well-balanced finite volume schemes for one-dimensional blood flow in
//! vessels with discontinuous properties, friction and gravity, and their
//! extension to networks of vessels.
//!
//! Module map:
//! - [`tube_law`], [`model`], [`properties`], [`scaling`]: pointwise physics and units.
//! - [`steady`]: stationary profiles by Gauss-Legendre collocation.
//! - [`flux`]: HLL flux and hydrostatic-reconstruction fluctuations.
//! - [`reconstruction`]: MUSCL / CWENO3 and the well-balanced reconstruction.
//! - [`scheme`], [`simulation`]: semi-discrete operator and time integration on one vessel.
//! - [`network`]: junctions, boundary conditions and lumped terminal models.
//! - [`harness`]: benchmark presets, error norms, convergence studies and output.

pub mod error;
pub mod flux;
pub mod grid;
pub mod harness;
pub mod model;
pub mod network;
pub mod properties;
pub mod reconstruction;
pub mod scaling;
pub mod scheme;
pub mod simulation;
pub mod steady;
pub mod tube_law;

pub use error::{Error, Result};
pub use model::{FluidParams, Model, State};
pub use properties::{PiecewiseField, Profile, Sigma, VesselProperties};
pub use tube_law::TubeLaw;
