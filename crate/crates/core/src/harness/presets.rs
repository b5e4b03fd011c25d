//! Benchmark problems on a single vessel, in SI units.

use crate::error::{Error, Result};
use crate::model::{FluidParams, Model, State};
use crate::properties::{PiecewiseField, Profile, Sigma, VesselProperties};
use crate::steady::Monotonicity;
use crate::tube_law::TubeLaw;

/// Initial data of a single-vessel problem (dimensional).
#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// Stationary profile through the trace `area` at `x = 0`, plus an optional area perturbation.
    StationaryFromInlet { area: f64, q: f64, perturbation: Option<Profile> },
    /// Stationary profile through a critical state sitting at the center of the cell containing `x`.
    StationaryFromCritical { x: f64, area: f64, q: f64 },
    /// Two constant states separated at `at`.
    Riemann { left: State, right: State, at: f64 },
}

/// Ghost-cell treatment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    /// Ghosts hold the stationary profile (or the initial states).
    Stationary,
    /// Ghost areas fixed, ghost flows driven by friction and gravity.
    SourceDriven,
    /// Stationary ghosts plus extrapolated interior fluctuations; lets waves leave.
    Transmissive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestCase {
    pub name: String,
    pub law: TubeLaw,
    pub fluid: FluidParams,
    pub props: VesselProperties,
    pub length: f64,
    pub cells: usize,
    pub t_end: f64,
    pub initial: InitialCondition,
    pub boundary: BoundaryKind,
    /// Orientation of the critical slope, for transcritical profiles.
    pub trend: Option<Monotonicity>,
}

impl TestCase {
    pub fn model(&self) -> Result<Model> {
        Model::new(self.law, self.fluid)
    }
}

pub const RHO: f64 = 1050.0;
pub const G_REF: f64 = 9.81;
const WB_LENGTH: f64 = 0.015;

fn wb_law() -> TubeLaw {
    TubeLaw::new(10.0, -1.5).expect("valid exponents")
}

fn a0_ref() -> f64 {
    0.00015 * 0.00015 * std::f64::consts::PI
}

/// `g(x) = g_ref (1 - x / (2L))`.
fn wb_gravity(length: f64) -> PiecewiseField {
    PiecewiseField::smooth(Profile::Linear { intercept: G_REF, slope: -G_REF / (2.0 * length) })
        .expect("valid profile")
}

fn jump_case(name: &str, q: f64, t_end: f64) -> TestCase {
    let l = WB_LENGTH;
    let (k, a0) = (100.0, a0_ref());
    let props = VesselProperties::new(
        PiecewiseField::step(k, 0.98 * k, 0.5 * l),
        PiecewiseField::step(a0, 0.98 * a0, 0.5 * l),
        PiecewiseField::constant(0.0),
        wb_gravity(l),
    )
    .expect("valid properties");
    TestCase {
        name: name.into(),
        law: wb_law(),
        fluid: FluidParams::si(RHO),
        props,
        length: l,
        cells: 100,
        t_end,
        initial: InitialCondition::StationaryFromInlet { area: a0, q, perturbation: None },
        boundary: BoundaryKind::Stationary,
        trend: None,
    }
}

/// Subcritical stationary flow across a jump in `K` and `A0`.
pub fn test1() -> TestCase {
    jump_case("test1", 4e-10, 1.0)
}

/// Supercritical stationary flow across the same jump.
pub fn test2() -> TestCase {
    jump_case("test2", 4e-6, 0.5)
}

fn linear(reference: f64, length: f64) -> PiecewiseField {
    PiecewiseField::smooth(Profile::Linear { intercept: reference, slope: 0.01 * reference / length })
        .expect("valid profile")
}

/// Subcritical stationary flow with smoothly varying properties.
pub fn test3() -> TestCase {
    let l = WB_LENGTH;
    let props = VesselProperties::new(linear(1000.0, l), linear(a0_ref(), l), linear(1000.0, l), wb_gravity(l))
        .expect("valid properties");
    TestCase {
        name: "test3".into(),
        law: wb_law(),
        fluid: FluidParams::si(RHO),
        props,
        length: l,
        cells: 100,
        t_end: 1.0,
        initial: InitialCondition::StationaryFromInlet { area: a0_ref(), q: 4e-10, perturbation: None },
        boundary: BoundaryKind::Stationary,
        trend: None,
    }
}

/// Test 3 plus a small Gaussian area pulse that leaves the domain.
pub fn test4() -> TestCase {
    let mut c = test3();
    c.name = "test4".into();
    if let InitialCondition::StationaryFromInlet { perturbation, .. } = &mut c.initial {
        *perturbation = Some(Profile::Gaussian { base: 0.0, amplitude: 1e-10, center: 0.0075, rate: 2e6 });
    }
    c
}

/// Center of the critical cell in the transcritical test on `cells` cells.
pub fn test5_critical_x(cells: usize) -> f64 {
    0.5 * WB_LENGTH + 0.5 * WB_LENGTH / cells as f64
}

/// Transcritical stationary flow through a critical point at a cell center.
///
/// The flow rate is the exact critical value at the throat (about 1.25232e-7),
/// and the external pressure gradient balances friction and gravity there.
pub fn test5_with_cells(cells: usize) -> TestCase {
    let l = WB_LENGTH;
    let law = wb_law();
    let fluid = FluidParams::si(RHO);
    let xc = test5_critical_x(cells);
    let rate = 4.0 * (1.0f64 / 1.1).ln();
    let (k_ref, a0r) = (100.0, a0_ref());
    let gauss = |amp: f64| {
        PiecewiseField::smooth(Profile::Gaussian { base: 0.0, amplitude: amp, center: xc, rate }).expect("valid")
    };
    let gravity = wb_gravity(l);
    let gc = gravity.value(xc);
    let ac = 1.1 * a0r;
    let c = (k_ref / RHO * law.a_dphi(1.1)).sqrt();
    let qc = ac * c;
    let fric = fluid.rho * fluid.friction_coefficient();
    let pe_slope = -(fric * qc / (ac * ac) - RHO * gc);
    let props = VesselProperties::new(
        gauss(k_ref),
        gauss(a0r),
        PiecewiseField::smooth(Profile::Linear { intercept: 0.0, slope: pe_slope }).expect("valid"),
        gravity,
    )
    .expect("valid properties");
    TestCase {
        name: "test5".into(),
        law,
        fluid,
        props,
        length: l,
        cells,
        t_end: 0.3,
        initial: InitialCondition::StationaryFromCritical { x: xc, area: ac, q: qc },
        boundary: BoundaryKind::Stationary,
        trend: Some(Monotonicity::Decreasing),
    }
}

pub fn test5() -> TestCase {
    test5_with_cells(100)
}

/// Smooth accuracy test: resting fluid in a vessel with a localized property bump, plus a pulse.
pub fn test6() -> TestCase {
    let (kl, a0l, pel) = (58725.0, 5e-4, 10000.0);
    let bump = |base: f64, amp: f64| {
        PiecewiseField::smooth(Profile::Gaussian { base, amplitude: amp, center: 2.5, rate: 10.0 }).expect("valid")
    };
    let props = VesselProperties::new(
        bump(kl, 100.0),
        bump(a0l, 1e-4),
        bump(pel, 100.0),
        PiecewiseField::constant(0.0),
    )
    .expect("valid properties");
    TestCase {
        name: "test6".into(),
        law: TubeLaw::arterial(),
        fluid: FluidParams::si(RHO),
        props,
        length: 5.0,
        cells: 200,
        t_end: 0.4,
        initial: InitialCondition::StationaryFromInlet {
            area: 2.0456 * a0l,
            q: 0.0,
            perturbation: Some(Profile::Gaussian { base: 0.0, amplitude: 1e-6, center: 1.0, rate: 40.0 }),
        },
        boundary: BoundaryKind::Transmissive,
        trend: None,
    }
}

/// Riemann problem with a property jump, friction and gravity.
pub fn test7() -> TestCase {
    let (l, xg) = (0.5, 0.25);
    let (k_ref, a0r, pe_ref) = (10.0, 1e-4, 66.661);
    let (kl, kr) = (5.0 * k_ref, 50.0 * k_ref);
    let (a0l, a0rr) = (1.1 * a0r, 1.2 * a0r);
    let (pel, per) = (pe_ref, 0.1 * pe_ref);
    let props = VesselProperties::new(
        PiecewiseField::step(kl, kr, xg),
        PiecewiseField::step(a0l, a0rr, xg),
        PiecewiseField::step(pel, per, xg),
        PiecewiseField::constant(G_REF),
    )
    .expect("valid properties");
    let (al, ar) = (1.5 * a0l, 1.1 * a0rr);
    TestCase {
        name: "test7".into(),
        law: wb_law(),
        fluid: FluidParams::si(RHO),
        props,
        length: l,
        cells: 1000,
        t_end: 0.03,
        initial: InitialCondition::Riemann { left: State::new(al, al * 1.8), right: State::new(ar, ar * 2.0), at: xg },
        boundary: BoundaryKind::SourceDriven,
        trend: None,
    }
}

/// Looks up a preset by name (`test1` .. `test7`, case-insensitive).
pub fn preset(name: &str) -> Result<TestCase> {
    match name.to_ascii_lowercase().replace(['_', '-', ' '], "").as_str() {
        "test1" => Ok(test1()),
        "test2" => Ok(test2()),
        "test3" => Ok(test3()),
        "test4" => Ok(test4()),
        "test5" => Ok(test5()),
        "test6" => Ok(test6()),
        "test7" => Ok(test7()),
        other => Err(Error::Config(format!("unknown preset '{other}'"))),
    }
}

/// Property vector at the left boundary, handy for sanity checks.
pub fn inlet_sigma(case: &TestCase) -> Sigma {
    case.props.sigma(0.0)
}
