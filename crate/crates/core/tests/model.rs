//! Tube law, pressure, eigenstructure, fluxes, sources, energy, steady slope
//! and scaling, checked against values computed by hand.

mod common;

use approx::assert_relative_eq;
use common::{rel, SteadyOde};
use hemowb::harness::presets;
use hemowb::model::{Branch, Regime};
use hemowb::scaling::Scaling;
use hemowb::steady::steady_slope;
use hemowb::{Error, FluidParams, Model, PiecewiseField, Profile, Sigma, State, TubeLaw, VesselProperties};

fn venous() -> TubeLaw {
    TubeLaw::new(10.0, -1.5).unwrap()
}

fn si_model() -> Model {
    Model::new(venous(), FluidParams::si(1050.0)).unwrap()
}

#[test]
fn tube_law_values() {
    let law = venous();
    assert_eq!(law.phi(1.0), 0.0);
    let direct = 1.1f64.powi(10) - 1.1f64.powf(-1.5);
    assert_relative_eq!(law.phi(1.1), direct, max_relative = 1e-14);
    assert_relative_eq!(law.phi(1.1), 1.726958, epsilon = 5e-7);
    let v = law.eval(1.0);
    assert_relative_eq!(v.big_phi_tilde, 10.0 / 11.0 - 3.0, max_relative = 1e-14);
    assert_relative_eq!(v.big_phi_tilde, -2.090909, epsilon = 1e-6);
    assert_relative_eq!(v.big_phi, 1.0 / 11.0 + 2.0, max_relative = 1e-14);
    assert_relative_eq!(v.dphi, 11.5, max_relative = 1e-14);
    assert_relative_eq!(v.d2phi, 90.0 - 3.75, max_relative = 1e-14);
}

#[test]
fn arterial_law_values() {
    let law = TubeLaw::arterial();
    let v = law.eval(2.25);
    assert_relative_eq!(v.phi, 0.5, max_relative = 1e-15);
    assert_relative_eq!(v.dphi, 0.5 / 1.5, max_relative = 1e-15);
    assert_relative_eq!(v.big_phi, 2.25 * 1.5 / 1.5 - 2.25, max_relative = 1e-15);
    assert_relative_eq!(v.big_phi_tilde, 2.25 * 1.5 / 3.0, max_relative = 1e-15);
}

#[test]
fn invalid_exponents_are_rejected() {
    assert!(matches!(TubeLaw::new(-1.0, 0.0), Err(Error::InvalidTubeLaw { .. })));
    assert!(matches!(TubeLaw::new(1.0, 0.5), Err(Error::InvalidTubeLaw { .. })));
    assert!(TubeLaw::new(f64::NAN, 0.0).is_err());
}

#[test]
fn pressure_examples() {
    let model = si_model();
    let a0 = 7.0686e-8;
    assert_eq!(model.pressure(a0, &Sigma::new(123.0, a0, 0.0)).unwrap(), 0.0);
    assert_eq!(model.pressure(a0, &Sigma::new(123.0, a0, 1000.0)).unwrap(), 1000.0);
    let p = model.pressure(1.1 * a0, &Sigma::new(100.0, a0, 0.0)).unwrap();
    assert_relative_eq!(p, 100.0 * (1.1f64.powi(10) - 1.1f64.powf(-1.5)), max_relative = 1e-13);
    assert_relative_eq!(p, 172.6958, epsilon = 5e-5);
    assert!(matches!(model.pressure(0.0, &Sigma::new(1.0, 1.0, 0.0)), Err(Error::NonPositiveArea { .. })));
    assert!(model.pressure(-1.0, &Sigma::new(1.0, 1.0, 0.0)).is_err());
}

#[test]
fn area_for_pressure_inverts_pressure() {
    let model = si_model();
    let s = Sigma::new(100.0, 7.0686e-8, 30.0);
    for p in [-200.0, 0.0, 30.0, 172.0, 5000.0] {
        let a = model.area_for_pressure(p, &s).unwrap();
        assert_relative_eq!(model.pressure(a, &s).unwrap(), p, epsilon = 1e-11 * p.abs().max(100.0));
    }
}

#[test]
fn eigenstructure_examples() {
    let model = si_model();
    let s = Sigma::new(100.0, 7.0686e-8, 0.0);
    let c = model.wave_speed(s.a0, &s).unwrap();
    assert_relative_eq!(c, (100.0f64 * 11.5 / 1050.0).sqrt(), max_relative = 1e-14);
    assert_relative_eq!(c, 1.046536, epsilon = 1e-6);
    let rest = State::new(s.a0, 0.0);
    assert_eq!(model.regime(&rest, &s).unwrap(), Regime::Subcritical);
    let (l1, l5) = model.eigenvalues(&rest, &s).unwrap();
    assert_eq!((l1, l5), (-c, c));
    let critical = State::new(s.a0, c * s.a0);
    assert_eq!(model.regime(&critical, &s).unwrap(), Regime::Critical);
    let fast = State::new(s.a0, 2.0 * c * s.a0);
    assert_eq!(model.regime(&fast, &s).unwrap(), Regime::Supercritical);
    assert_eq!(model.branch(&fast, &s).unwrap(), Branch::Supercritical);
    let (l1, l5) = model.eigenvalues(&fast, &s).unwrap();
    assert!(l1 < l5 && l1 > 0.0);
}

#[test]
fn flux_examples() {
    let model = si_model();
    let s = Sigma::new(100.0, 7.0686e-8, 0.0);
    let f = model.flux(&State::new(s.a0, 0.0), &s).unwrap();
    assert_eq!(f.a, 0.0);
    assert_relative_eq!(f.q, s.k * s.a0 / 1050.0 * (10.0 / 11.0 - 3.0), max_relative = 1e-14);
    let w = State::new(1.3 * s.a0, 2e-8);
    assert_eq!(model.flux(&w, &s).unwrap(), model.flux(&w, &s).unwrap());
    let expect = w.q * w.q / w.a + s.k * s.a0 / 1050.0 * venous().big_phi_tilde(1.3);
    assert_relative_eq!(model.flux(&w, &s).unwrap().q, expect, max_relative = 1e-14);
}

#[test]
fn algebraic_source_examples() {
    let model = si_model();
    let a = 7.0686e-8;
    assert_eq!(model.algebraic_source(&State::new(a, 0.0), 0.0).unwrap(), State::new(0.0, 0.0));
    assert_eq!(model.algebraic_source(&State::new(a, 0.0), 9.81).unwrap(), State::new(0.0, 9.81 * a));
    let coeff = 8.0 * std::f64::consts::PI * 0.0045 / 1050.0;
    assert_relative_eq!(model.friction, coeff, max_relative = 1e-15);
    assert_relative_eq!(coeff, 1.0771e-4, max_relative = 1e-3);
    let r = model.algebraic_source(&State::new(a, a), 0.0).unwrap();
    assert_relative_eq!(r.q, -coeff, max_relative = 1e-15);
}

#[test]
fn energy_examples() {
    let model = si_model();
    let s = Sigma::new(100.0, 7.0686e-8, 250.0);
    assert_eq!(model.energy(&State::new(s.a0, 0.0), &s).unwrap(), 250.0);
    let s0 = Sigma::new(100.0, s.a0, 0.0);
    assert_relative_eq!(model.energy(&State::new(s.a0, s.a0), &s0).unwrap(), 525.0, max_relative = 1e-14);
}

#[test]
fn critical_area_has_unit_froude() {
    let model = si_model();
    let s = Sigma::new(100.0, 7.0686e-8, 0.0);
    for q in [1e-9, 4e-8, 4e-6] {
        let ac = model.critical_area(q, &s).unwrap();
        assert_relative_eq!(model.froude(&State::new(ac, q), &s).unwrap(), 1.0, epsilon = 1e-12);
    }
    assert_eq!(model.critical_area(0.0, &s).unwrap(), 0.0);
}

#[test]
fn area_for_energy_picks_the_requested_branch() {
    let model = si_model();
    let s = Sigma::new(100.0, 7.0686e-8, 0.0);
    let q = 4e-8;
    let w = State::new(1.05 * s.a0, q);
    let gamma = model.energy(&w, &s).unwrap();
    let sub = model.area_for_energy(q, &s, gamma, Branch::Subcritical, None).unwrap();
    assert_relative_eq!(sub, w.a, max_relative = 1e-12);
    let sup = model.area_for_energy(q, &s, gamma, Branch::Supercritical, None).unwrap();
    assert!(sup < model.critical_area(q, &s).unwrap());
    assert_relative_eq!(model.energy(&State::new(sup, q), &s).unwrap(), gamma, max_relative = 1e-12);
    // Below the minimum over the branch there is no root.
    let ac = model.critical_area(q, &s).unwrap();
    let gmin = model.energy(&State::new(ac, q), &s).unwrap();
    let low = gmin - 1e-3 * gmin.abs().max(1.0);
    assert!(matches!(
        model.area_for_energy(q, &s, low, Branch::Subcritical, None),
        Err(Error::NoSteadyProfile(_))
    ));
}

fn field(intercept: f64, slope: f64) -> PiecewiseField {
    PiecewiseField::smooth(Profile::Linear { intercept, slope }).unwrap()
}

#[test]
fn steady_slope_examples() {
    let model = Model::with_coefficients(venous(), 1050.0, 0.0).unwrap();
    let flat = VesselProperties::uniform(100.0, 7e-8, 0.0);
    for a in [5e-8, 7e-8, 9e-8] {
        assert_eq!(steady_slope(&model, &flat, 0.3, a, 1e-8).unwrap(), 0.0);
    }
    // Rest state with linear pe only.
    let props = VesselProperties::new(field(100.0, 0.0), field(7e-8, 0.0), field(0.0, 40.0), field(0.0, 0.0)).unwrap();
    let area = 8e-8;
    let a = area / 7e-8;
    let expect = -area * 40.0 / (100.0 * venous().a_dphi(a));
    assert_relative_eq!(steady_slope(&model, &props, 0.2, area, 0.0).unwrap(), expect, max_relative = 1e-14);
    // Friction alone decelerates a subcritical flow.
    let viscous = si_model();
    assert!(steady_slope(&viscous, &flat, 0.3, 7e-8, 1e-8).unwrap() < 0.0);
    assert!(steady_slope(&viscous, &flat, 0.3, 7e-8, -1e-8).unwrap() > 0.0);
}

#[test]
fn steady_slope_matches_the_balance_law_oracle() {
    let model = si_model();
    let props = VesselProperties::new(field(1000.0, 700.0), field(7e-8, 5e-6), field(1000.0, 666.0), field(9.81, -327.0)).unwrap();
    let ode = SteadyOde { m: 10.0, n: -1.5, rho: 1050.0, drag: 8.0 * std::f64::consts::PI * 0.0045, q: 4e-10 };
    for (x, ratio) in [(0.001, 0.9), (0.007, 1.0), (0.014, 1.2)] {
        let s = props.sigma(x);
        let ds = props.dsigma(x);
        let area = ratio * s.a0;
        let oracle = ode.slope(area, s.k, s.a0, ds.k, ds.a0, ds.pe, props.gravity(x));
        let g = steady_slope(&model, &props, x, area, ode.q).unwrap();
        assert!(rel(g, oracle, oracle.abs()) < 1e-12, "x = {x}: {g} vs {oracle}");
    }
}

#[test]
fn steady_slope_errors_at_critical_states() {
    let model = si_model();
    let props = VesselProperties::uniform(100.0, 7e-8, 0.0);
    let s = props.sigma(0.0);
    let q = 4e-8;
    let ac = model.critical_area(q, &s).unwrap();
    assert!(matches!(steady_slope(&model, &props, 0.0, ac, q), Err(Error::CriticalSingularity { .. })));
}

#[test]
fn steady_slope_is_invariant_under_scaling() {
    let case = presets::test3();
    let model = case.model().unwrap();
    let centers: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) * case.length / 100.0).collect();
    let q = 4e-10;
    let init: Vec<State> = centers.iter().map(|&x| State::new(case.props.sigma(x).a0, q)).collect();
    let sc = Scaling::for_vessel(&case.props, case.length, &centers, &init, &case.fluid).unwrap();
    let nd_model = sc.model(&model).unwrap();
    let nd_props = sc.properties(&case.props);
    for (x, ratio) in [(0.0011, 0.95), (0.0075, 1.0), (0.0149, 1.07)] {
        let area = ratio * case.props.sigma(x).a0;
        let g = steady_slope(&model, &case.props, x, area, q).unwrap();
        let w = sc.to_nd(State::new(area, q));
        let g_nd = steady_slope(&nd_model, &nd_props, x / sc.length, w.a, w.q).unwrap();
        let back = g_nd * sc.area / sc.length;
        assert!(rel(back, g, g.abs()) < 1e-12, "x = {x}: {back} vs {g}");
    }
}

#[test]
fn scaling_examples() {
    let props = VesselProperties::new(field(100.0, 0.0), field(7e-8, 0.0), field(0.0, 0.0), field(9.81, 0.0)).unwrap();
    let centers = [0.001, 0.005, 0.01];
    let init = [State::new(7e-8, 4e-10); 3];
    let fluid = FluidParams::si(1050.0);
    let sc = Scaling::for_vessel(&props, 0.015, &centers, &init, &fluid).unwrap();
    assert_eq!(sc.area, 7e-8);
    assert_eq!(sc.stiffness, 100.0);
    assert_eq!(sc.gravity, 9.81);
    assert_relative_eq!(sc.velocity * sc.time, 0.015, max_relative = 1e-15);
    assert_relative_eq!(sc.velocity, 4e-10 / 7e-8, max_relative = 1e-15);
    for w in [State::new(7e-8, 4e-10), State::new(3.3e-8, -1e-9)] {
        let back = sc.to_dim(sc.to_nd(w));
        assert!(rel(back.a, w.a, w.a) <= 2.0 * f64::EPSILON);
        assert!(rel(back.q, w.q, w.q.abs()) <= 2.0 * f64::EPSILON);
    }
    // A resting fluid falls back to the wave speed and Sh = 1.
    let rest = [State::new(7e-8, 0.0); 3];
    let sc = Scaling::for_vessel(&props, 0.015, &centers, &rest, &fluid).unwrap();
    assert_relative_eq!(sc.velocity, (100.0f64 / 1050.0).sqrt(), max_relative = 1e-15);
    assert_relative_eq!(sc.shapiro, 1.0, max_relative = 1e-15);
}
