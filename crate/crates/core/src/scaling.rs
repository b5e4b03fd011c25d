//! Characteristic scales used to nondimensionalize every simulation.
//!
//! Lengths are scaled by `L`, times by `T = L / U`, areas by `A`, velocities
//! by `U`, pressures (stiffness, external pressure, energy) by `rho U^2`.
//! In these units the model keeps its dimensional form with `rho = 1`,
//! `K' = K / (rho U^2) = Sh^-2 K / K_bar`, friction coefficient `mu_bar` and
//! gravity `beta_bar g / g_bar`.

use crate::error::{Error, Result};
use crate::model::{FluidParams, Model, State};
use crate::properties::VesselProperties;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaling {
    pub length: f64,
    pub time: f64,
    pub area: f64,
    pub velocity: f64,
    pub stiffness: f64,
    pub gravity: f64,
    pub rho: f64,
    /// Shapiro number `U / sqrt(K_bar / rho)`.
    pub shapiro: f64,
    /// Friction number `gamma pi mu T / (rho A)`.
    pub mu_bar: f64,
    /// Gravity number `g_bar T / U`.
    pub beta_bar: f64,
}

/// Raw samples from which the characteristic values are averaged.
#[derive(Debug, Clone, Copy)]
pub struct ScalingSamples<'a> {
    pub length: f64,
    pub a0: &'a [f64],
    pub k: &'a [f64],
    pub g: &'a [f64],
    /// `|q / A0|` samples of the initial field.
    pub velocity: &'a [f64],
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

impl Scaling {
    pub fn from_samples(s: ScalingSamples<'_>, fluid: &FluidParams) -> Result<Self> {
        if s.a0.is_empty() || s.a0.len() != s.k.len() {
            return Err(Error::InvalidParameter("scaling needs matching non-empty samples".into()));
        }
        if !(s.length > 0.0) {
            return Err(Error::InvalidParameter("scaling needs a positive length".into()));
        }
        let area = mean(s.a0);
        let stiffness = mean(s.k);
        if !(area > 0.0 && stiffness > 0.0) {
            return Err(Error::InvalidParameter(
                "mean reference area and stiffness must be positive".into(),
            ));
        }
        let rho = fluid.rho;
        let c_bar = (stiffness / rho).sqrt();
        let mut velocity = if s.velocity.is_empty() { 0.0 } else { mean(s.velocity) };
        // A (nearly) resting fluid has no velocity scale; use the wave speed instead.
        if !(velocity > 1e-12 * c_bar) {
            velocity = c_bar;
        }
        let time = s.length / velocity;
        let g_mean = if s.g.is_empty() { 0.0 } else { mean(s.g).abs() };
        // Without gravity any positive scale works; pick the one giving beta_bar = 1.
        let gravity = if g_mean > 0.0 { g_mean } else { velocity / time };
        Ok(Self {
            length: s.length,
            time,
            area,
            velocity,
            stiffness,
            gravity,
            rho,
            shapiro: velocity / c_bar,
            mu_bar: fluid.friction_coefficient() * time / area,
            beta_bar: gravity * time / velocity,
        })
    }

    /// Scales for a single vessel sampled at `centers` with initial states `init`.
    pub fn for_vessel(
        props: &VesselProperties,
        length: f64,
        centers: &[f64],
        init: &[State],
        fluid: &FluidParams,
    ) -> Result<Self> {
        let a0: Vec<f64> = centers.iter().map(|&x| props.sigma(x).a0).collect();
        let k: Vec<f64> = centers.iter().map(|&x| props.sigma(x).k).collect();
        let g: Vec<f64> = centers.iter().map(|&x| props.gravity(x)).collect();
        let vel: Vec<f64> = init.iter().zip(&a0).map(|(w, a0)| (w.q / a0).abs()).collect();
        Self::from_samples(ScalingSamples { length, a0: &a0, k: &k, g: &g, velocity: &vel }, fluid)
    }

    pub fn pressure(&self) -> f64 {
        self.rho * self.velocity * self.velocity
    }

    pub fn flow(&self) -> f64 {
        self.area * self.velocity
    }

    /// Resistance scale (pressure / flow).
    pub fn resistance(&self) -> f64 {
        self.pressure() / self.flow()
    }

    /// Compliance scale (flow * time / pressure).
    pub fn compliance(&self) -> f64 {
        self.flow() * self.time / self.pressure()
    }

    /// Nondimensional model: `rho = 1`, friction `mu_bar`.
    pub fn model(&self, dimensional: &Model) -> Result<Model> {
        Model::with_coefficients(dimensional.law, 1.0, self.mu_bar)
    }

    /// Nondimensional view of vessel properties.
    pub fn properties(&self, props: &VesselProperties) -> VesselProperties {
        let p = self.pressure();
        props.scaled(self.length, 1.0 / p, 1.0 / self.area, 1.0 / p, self.beta_bar / self.gravity)
    }

    pub fn to_nd(&self, w: State) -> State {
        State { a: w.a / self.area, q: w.q / self.flow() }
    }

    pub fn to_dim(&self, w: State) -> State {
        State { a: w.a * self.area, q: w.q * self.flow() }
    }
}
