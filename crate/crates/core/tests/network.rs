//! Network building blocks: wall law, gravity along centrelines, the ADAN86
//! table, Riemann invariants, junction, boundary and Windkessel couplings.

mod common;

use std::path::PathBuf;

use common::{gauss_composite, rel};
use hemowb::network::coupling::{advance_capacitor, mass_residual, riemann_beta, solve_boundary, solve_junction, solve_rcr};
use hemowb::network::{venous_offset, EndTrace, NetworkTable, Polyline, Prescribed, Signal, Topology, WallLaw};
use hemowb::{Error, Model, Sigma, State, TubeLaw};
use nalgebra::Vector3;

fn adan86() -> NetworkTable {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/adan86.tsv");
    NetworkTable::load(&path).unwrap()
}

fn arterial() -> Model {
    Model::with_coefficients(TubeLaw::arterial(), 1.0, 0.0).unwrap()
}

// ---------------------------------------------------------------------------
// Geometry

#[test]
fn wall_law_constants_and_carotid_stiffness() {
    let w = WallLaw::default();
    assert_eq!((w.a, w.b, w.c, w.d), (0.2802, -5.053, 0.1324, -0.1114));
    assert_eq!(w.young, 2e6);
    let r0: f64 = 0.33;
    let h_over_r = 0.2802 * (-5.053 * r0).exp() + 0.1324 * (-0.1114 * r0).exp();
    let k = 2e6 * h_over_r / (1.0 - 0.25);
    assert!(rel(w.stiffness(r0).unwrap(), k, k) < 1e-15);
    // Pinned value for R0 = 0.33 cm.
    assert!((w.stiffness(r0).unwrap() - 4.813346e5).abs() < 1.0, "{}", w.stiffness(r0).unwrap());
    assert!(w.stiffness(0.0).is_err());
}

#[test]
fn venous_offset_examples() {
    assert_eq!(venous_offset(0.0, 1.05, 981.0), 0.0);
    assert!((venous_offset(100.0, 1.05, 981.0) - 103_005.0).abs() < 1e-9);
    assert!(venous_offset(-20.0, 1.05, 981.0) < 0.0);
}

fn knots(length: f64, cells: usize) -> Vec<f64> {
    (0..=cells).map(|i| length * i as f64 / cells as f64).collect()
}

#[test]
fn gravity_on_straight_vessels() {
    let down = Vector3::new(0.0, 0.0, -981.0);
    let vertical = Polyline::new(vec![Vector3::zeros(), Vector3::new(0.0, 0.0, -10.0)]).unwrap();
    let g = vertical.gravity_profile(down, 10.0, &knots(10.0, 7)).unwrap();
    for x in [0.0, 3.3, 10.0] {
        assert!((g.value(x) - 981.0).abs() < 1e-12);
    }
    let horizontal = Polyline::new(vec![Vector3::zeros(), Vector3::new(10.0, 0.0, 0.0)]).unwrap();
    let g = horizontal.gravity_profile(down, 10.0, &knots(10.0, 7)).unwrap();
    for x in [0.0, 3.3, 10.0] {
        assert!(g.value(x).abs() < 1e-12);
    }
}

#[test]
fn gravity_on_a_semicircle_integrates_to_the_height_drop() {
    let r = 5.0;
    let points: Vec<Vector3<f64>> = (0..=200)
        .map(|k| {
            let th = std::f64::consts::PI * k as f64 / 200.0;
            Vector3::new(r * th.sin(), 0.0, r * th.cos())
        })
        .collect();
    let line = Polyline::new(points).unwrap();
    let length = line.arc_length();
    let cells = 40;
    let g = line.gravity_profile(Vector3::new(0.0, 0.0, -981.0), length, &knots(length, cells)).unwrap();
    let integral = gauss_composite(|x| g.value(x), 0.0, length, cells);
    let dh = 2.0 * r;
    assert!(rel(integral, 981.0 * dh, 981.0 * dh) < 1e-6, "{integral} vs {}", 981.0 * dh);
    // Pointwise, g follows the tangent projection 981 sin(s / r).
    let worst = (0..=100)
        .map(|i| {
            let s = length * i as f64 / 100.0;
            (g.value(s) - 981.0 * (s / length * std::f64::consts::PI).sin()).abs()
        })
        .fold(0.0, f64::max);
    assert!(worst < 1e-2 * 981.0, "worst pointwise deviation {worst}");
}

#[test]
fn polyline_parsing() {
    let line = Polyline::parse("# x y z\n0 0 0\n3, 4, 0\n\n3 4 12\n").unwrap();
    assert!((line.arc_length() - 17.0).abs() < 1e-12);
    assert!(Polyline::parse("0 0 0\n").is_err());
    assert!(Polyline::parse("0 0\n1 1\n").is_err());
}

// ---------------------------------------------------------------------------
// Network table

#[test]
fn adan86_table_shape() {
    let t = adan86();
    assert_eq!(t.vessels.len(), 118);
    assert_eq!(t.terminal_count(), 45);
    let topo = Topology::new(&t);
    assert!(topo.is_connected(&t));
    let leaves: Vec<usize> = topo.leaves().iter().map(|&i| topo.node_id(i)).collect();
    assert!(leaves.contains(&102));
    assert_eq!(leaves.len(), 46);
    // Every free end other than the aortic root carries a terminal model.
    for &i in &topo.leaves() {
        if topo.node_id(i) == 102 {
            continue;
        }
        let (v, _) = topo.incident(i)[0];
        assert!(t.vessels[v].rcr.is_some(), "{}", t.vessels[v].name);
    }
    assert!(t.vessels.iter().all(|v| v.length > 0.0 && v.radius > 0.0));
}

#[test]
fn table_parse_errors() {
    assert!(matches!(NetworkTable::parse("a 0 1 2.0 0.1 - -"), Err(Error::Network(_))));
    assert!(matches!(NetworkTable::parse("a 0 1 2.0 0.1 1 - 3"), Err(Error::Network(_))));
    assert!(matches!(NetworkTable::parse("a 0 1 x 0.1 - - -"), Err(Error::Network(_))));
    let t = NetworkTable::parse("# header\na 0 1 2.0 0.1 - - -\nb 1 2 1.0 0.1 10 20 1e-6\n").unwrap();
    assert_eq!(t.vessels.len(), 2);
    assert_eq!(t.terminal_count(), 1);
}

#[test]
fn signals() {
    let table = Signal::Table { times: vec![0.0, 1.0, 2.0], values: vec![0.0, 10.0, 0.0], periodic: true };
    assert_eq!(table.value(0.5), 5.0);
    assert_eq!(table.value(2.5), 5.0);
    let hs = Signal::HalfSine { peak: 2.0, period: 1.0, systole: 0.3 };
    assert!((hs.value(0.15) - 2.0).abs() < 1e-15);
    assert_eq!(hs.value(0.5), 0.0);
    assert!((hs.value(1.15) - 2.0).abs() < 1e-12);
    assert!(Signal::Table { times: vec![1.0, 0.5], values: vec![0.0, 1.0], periodic: false }.validate().is_err());
}

// ---------------------------------------------------------------------------
// Riemann invariants

fn beta_oracle(model: &Model, from: f64, to: f64, s: &Sigma) -> f64 {
    let c = |a: f64| (s.k / model.rho * model.law.a_dphi(a / s.a0)).sqrt();
    gauss_composite(|a| c(a) / a, from, to, 400)
}

#[test]
fn beta_examples() {
    let s = Sigma::new(1.7, 0.9, 0.0);
    let model = arterial();
    assert_eq!(riemann_beta(&model, 1.1, 1.1, &s).unwrap(), 0.0);
    for (a1, a2) in [(0.5, 1.4), (1.0, 1.0 + 1e-9), (2.0, 0.3)] {
        let b = riemann_beta(&model, a1, a2, &s).unwrap();
        let closed = 4.0 * (model.wave_speed(a2, &s).unwrap() - model.wave_speed(a1, &s).unwrap());
        assert!((b - closed).abs() <= 1e-12 * closed.abs().max(1e-300) + 1e-15, "{b} vs {closed}");
        assert_eq!(b, -riemann_beta(&model, a2, a1, &s).unwrap());
    }
    let venous = Model::with_coefficients(TubeLaw::new(10.0, -1.5).unwrap(), 1.0, 0.0).unwrap();
    for (a1, a2) in [(0.5, 1.4), (1.2, 0.8)] {
        let b = riemann_beta(&venous, a1, a2, &s).unwrap();
        let o = beta_oracle(&venous, a1, a2, &s);
        assert!(rel(b, o, o.abs()) < 1e-12, "{b} vs {o}");
        let back = riemann_beta(&venous, a2, a1, &s).unwrap();
        assert!(rel(b, -back, b.abs()) < 1e-13);
    }
}

// ---------------------------------------------------------------------------
// Junctions

fn end(model: &Model, s: Sigma, ratio: f64, froude: f64, sign: f64) -> EndTrace {
    let a = ratio * s.a0;
    let c = model.wave_speed(a, &s).unwrap();
    EndTrace { state: State::new(a, froude * c * a), sigma: s, sign }
}

#[test]
fn collinear_pass_through() {
    let model = arterial();
    let s = Sigma::new(1.0, 1.0, 0.2);
    let w = State::new(1.1, 0.3);
    let ends = [EndTrace { state: w, sigma: s, sign: 1.0 }, EndTrace { state: w, sigma: s, sign: -1.0 }];
    let stars = solve_junction(&model, &ends, "test").unwrap();
    for st in &stars {
        assert!(rel(st.a, w.a, w.a) < 1e-15 && rel(st.q, w.q, w.q) < 1e-15, "{st:?}");
    }
}

#[test]
fn symmetric_bifurcation_at_rest() {
    let model = arterial();
    let parent = EndTrace { state: State::new(1.0, 0.0), sigma: Sigma::new(1.0, 1.0, 0.0), sign: 1.0 };
    let d = Sigma::new(1.3, 0.6, 0.0);
    let a = model.area_for_pressure(0.0, &d).unwrap();
    let child = EndTrace { state: State::new(a, 0.0), sigma: d, sign: -1.0 };
    let stars = solve_junction(&model, &[parent, child, child], "y").unwrap();
    for st in &stars {
        assert_eq!(st.q, 0.0);
    }
}

/// Independent solution: bisection on the common total pressure, each branch
/// on its own invariant, with beta from composite Gauss quadrature.
fn junction_oracle(model: &Model, ends: &[EndTrace]) -> Vec<State> {
    let on_branch = |e: &EndTrace, a: f64| {
        let w = e.state.velocity() - e.sign * beta_oracle(model, e.state.a, a, &e.sigma);
        let energy = e.sigma.k * model.law.phi(a / e.sigma.a0) + e.sigma.pe + 0.5 * model.rho * w * w;
        (a * w, energy)
    };
    let area_for = |e: &EndTrace, level: f64| {
        let (mut lo, mut hi) = (0.2 * e.state.a, 5.0 * e.state.a);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if on_branch(e, mid).1 < level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let mass = |level: f64| ends.iter().map(|e| e.sign * on_branch(e, area_for(e, level)).0).sum::<f64>();
    // Scan for a bracket, then bisect; the mass flux decreases with the level.
    let levels: Vec<f64> = (0..=400).map(|i| -2.0 + 4.0 * i as f64 / 400.0).collect();
    let k = levels.windows(2).position(|w| mass(w[0]) >= 0.0 && mass(w[1]) <= 0.0).expect("bracket");
    let (mut lo, mut hi) = (levels[k], levels[k + 1]);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let level = 0.5 * (lo + hi);
    ends.iter()
        .map(|e| {
            let a = area_for(e, level);
            State::new(a, on_branch(e, a).0)
        })
        .collect()
}

#[test]
fn three_branch_junction_matches_the_scan_oracle() {
    let model = arterial();
    let ends = [
        end(&model, Sigma::new(1.0, 1.0, 0.0), 1.05, 0.3, 1.0),
        end(&model, Sigma::new(1.4, 0.55, 0.05), 0.95, 0.1, -1.0),
        end(&model, Sigma::new(0.8, 0.6, -0.02), 1.1, 0.25, -1.0),
    ];
    let stars = solve_junction(&model, &ends, "tri").unwrap();
    let oracle = junction_oracle(&model, &ends);
    for (s, o) in stars.iter().zip(&oracle) {
        assert!(rel(s.a, o.a, o.a) < 1e-9, "{s:?} vs {o:?}");
        assert!((s.q - o.q).abs() < 1e-9 * o.q.abs().max(0.01), "{s:?} vs {o:?}");
    }
    assert!(mass_residual(&ends, &stars) <= 1e-12);
    // Equal total pressure and the outgoing invariants.
    let energies: Vec<f64> = ends.iter().zip(&stars).map(|(e, s)| model.energy(s, &e.sigma).unwrap()).collect();
    for e in &energies {
        assert!(rel(*e, energies[0], energies[0].abs().max(1.0)) <= 1e-10);
    }
    for (e, s) in ends.iter().zip(&stars) {
        let inv = s.velocity() - e.state.velocity() + e.sign * riemann_beta(&model, e.state.a, s.a, &e.sigma).unwrap();
        assert!(inv.abs() < 1e-12, "invariant residual {inv:e}");
    }
}

// ---------------------------------------------------------------------------
// Boundaries and terminals

#[test]
fn boundary_examples() {
    let model = Model::with_coefficients(TubeLaw::new(10.0, -1.5).unwrap(), 1.05, 0.0).unwrap();
    let s = Sigma::new(1e4, std::f64::consts::PI * 0.015 * 0.015, 0.0);
    let trace = EndTrace { state: State::new(s.a0 * 1.01, 4e-4), sigma: s, sign: -1.0 };
    let st = solve_boundary(&model, &trace, Prescribed::Flow(4e-4)).unwrap();
    assert_eq!(st.q, 4e-4);
    assert!(rel(st.a, trace.state.a, trace.state.a) < 1e-12);
    let st = solve_boundary(&model, &trace, Prescribed::Flow(5e-4)).unwrap();
    assert_eq!(st.q, 5e-4);
    let arterial = Model::with_coefficients(TubeLaw::arterial(), 1.05, 0.0).unwrap();
    let root = Sigma::new(WallLaw::default().stiffness(1.5).unwrap(), std::f64::consts::PI * 2.25, 1e5);
    let trace = EndTrace { state: State::new(root.a0, 0.0), sigma: root, sign: -1.0 };
    let st = solve_boundary(&arterial, &trace, Prescribed::Pressure(1e5)).unwrap();
    assert!((arterial.pressure(st.a, &root).unwrap() - 1e5).abs() < 1e-9);
    let st = solve_boundary(&arterial, &trace, Prescribed::Area(1.1 * root.a0)).unwrap();
    assert_eq!(st.a, 1.1 * root.a0);
}

#[test]
fn windkessel_steady_state_is_two() {
    let model = Model::with_coefficients(TubeLaw::new(10.0, -1.5).unwrap(), 1.05, 0.0).unwrap();
    let s = Sigma::new(1e4, std::f64::consts::PI * 0.015 * 0.015, 0.0);
    let (r_prox, r_dist, c) = (750.0, 4250.0, 3e-9);
    let q_in = 4e-4;
    let p_cap = q_in * r_dist;
    let p_out: f64 = q_in * (r_prox + r_dist);
    assert!((p_out - 2.0).abs() < 1e-15);
    // A trace already at the steady outlet state is returned, and P is a fixed point.
    let a = model.area_for_pressure(p_out, &s).unwrap();
    let trace = EndTrace { state: State::new(a, q_in), sigma: s, sign: 1.0 };
    let (st, dq_dp) = solve_rcr(&model, &trace, p_cap, r_prox).unwrap();
    assert!(rel(st.q, q_in, q_in) < 1e-10 && rel(st.a, a, a) < 1e-12);
    let p_next = advance_capacitor(p_cap, st.q, dq_dp, r_dist, c, 0.0, 1e-3);
    assert!(rel(p_next, p_cap, p_cap) < 1e-10);
}

#[test]
fn windkessel_limits() {
    let model = Model::with_coefficients(TubeLaw::new(10.0, -1.5).unwrap(), 1.05, 0.0).unwrap();
    let s = Sigma::new(1e4, std::f64::consts::PI * 0.015 * 0.015, 0.0);
    // Infinite compliance freezes the capacitor.
    assert_eq!(advance_capacitor(1.7, 3e-4, -1e-5, 4250.0, f64::INFINITY, 0.0, 0.1), 1.7);
    // Rest at the venous pressure stays at rest.
    let trace = EndTrace { state: State::new(model.area_for_pressure(0.0, &s).unwrap(), 0.0), sigma: s, sign: 1.0 };
    let (st, dq_dp) = solve_rcr(&model, &trace, 0.0, 750.0).unwrap();
    assert!(st.q.abs() < 1e-18, "{st:?}");
    assert!(advance_capacitor(0.0, st.q, dq_dp, 4250.0, 3e-9, 0.0, 1.0).abs() < 1e-15);
    // Exponential relaxation towards P_ven for a frozen flow is exact.
    let p = advance_capacitor(2.0, 0.0, 0.0, 10.0, 0.5, 1.0, 3.0);
    assert!((p - (1.0 + (-3.0f64 / 5.0).exp())).abs() < 1e-15);
}
