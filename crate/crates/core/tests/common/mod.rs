//! Oracles and property checks shared by the test targets.
#![allow(dead_code)]

use hemowb::flux::{ghr_fluctuations, hydrostatic_states, sigma0_candidates};
use hemowb::grid::Mesh;
use hemowb::network::coupling::{mass_residual, riemann_beta, solve_junction, EndTrace};
use hemowb::properties::{PiecewiseField, Profile};
use hemowb::scheme::{SchemeConfig, VesselScheme};
use hemowb::steady::jump_trace;
use hemowb::{Model, Sigma, State, TubeLaw, VesselProperties};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

pub type Check = Result<(), TestCaseError>;

/// Relative difference with an absolute floor.
pub fn rel(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale.max(f64::MIN_POSITIVE)
}

// ---------------------------------------------------------------------------
// Independent oracles

/// Dormand-Prince 5(4) with step control; integrates `y' = f(x, y)` from `x0` to `x1`.
pub fn rk45<F: Fn(f64, f64) -> f64>(f: F, x0: f64, y0: f64, x1: f64, tol: f64) -> f64 {
    const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] =
        [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];
    let dir = (x1 - x0).signum();
    let (mut x, mut y) = (x0, y0);
    let mut h = (x1 - x0) / 100.0;
    while (x1 - x) * dir > 0.0 {
        if (x + h - x1) * dir > 0.0 {
            h = x1 - x;
        }
        let mut k = [0.0; 7];
        for s in 0..7 {
            let yi = y + h * (0..s).map(|j| A[s][j] * k[j]).sum::<f64>();
            k[s] = f(x + C[s] * h, yi);
        }
        let y5 = y + h * (0..7).map(|s| B5[s] * k[s]).sum::<f64>();
        let y4 = y + h * (0..7).map(|s| B4[s] * k[s]).sum::<f64>();
        let err = (y5 - y4).abs() / (tol * y5.abs().max(1e-300));
        if err <= 1.0 {
            x += h;
            y = y5;
        }
        h *= (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
    }
    y
}

/// Slope of the stationary area from the balance laws, written out directly:
/// `A' (K a phi' - rho u^2) = rho g A - gamma pi mu q / A - A phi K' + K a^2 phi' A0' - A pe'`.
pub struct SteadyOde {
    pub m: f64,
    pub n: f64,
    pub rho: f64,
    /// `gamma pi mu`.
    pub drag: f64,
    pub q: f64,
}

impl SteadyOde {
    pub fn slope(&self, area: f64, k: f64, a0: f64, dk: f64, da0: f64, dpe: f64, g: f64) -> f64 {
        let (num, den) = self.terms(area, k, a0, dk, da0, dpe, g);
        num / den
    }

    /// Numerator and denominator of the slope.
    pub fn terms(&self, area: f64, k: f64, a0: f64, dk: f64, da0: f64, dpe: f64, g: f64) -> (f64, f64) {
        let a = area / a0;
        let phi = a.powf(self.m) - a.powf(self.n);
        let dphi = (self.m * a.powf(self.m) - self.n * a.powf(self.n)) / a;
        let u = self.q / area;
        let rhs = self.rho * g * area - self.drag * self.q / area - area * phi * dk + k * a * a * dphi * da0 - area * dpe;
        (rhs, k * a * dphi - self.rho * u * u)
    }

    /// Slope along `props` at `x`.
    pub fn slope_on(&self, props: &VesselProperties, x: f64, area: f64) -> f64 {
        let (num, den) = self.terms_on(props, x, area);
        num / den
    }

    pub fn terms_on(&self, props: &VesselProperties, x: f64, area: f64) -> (f64, f64) {
        let (s, ds) = (props.sigma(x), props.dsigma(x));
        self.terms(area, s.k, s.a0, ds.k, ds.a0, ds.pe, props.gravity(x))
    }
}

/// Composite 5-point Gauss-Legendre quadrature on `panels` equal panels.
pub fn gauss_composite<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    const X: [f64; 5] = [-0.906_179_845_938_664, -0.538_469_310_105_683_1, 0.0, 0.538_469_310_105_683_1, 0.906_179_845_938_664];
    const W: [f64; 5] =
        [0.236_926_885_056_189_1, 0.478_628_670_499_366_5, 0.568_888_888_888_888_9, 0.478_628_670_499_366_5, 0.236_926_885_056_189_1];
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let m = a + (p as f64 + 0.5) * h;
            0.5 * h * X.iter().zip(W).map(|(x, w)| w * f(m + 0.5 * h * x)).sum::<f64>()
        })
        .sum()
}

/// Least-squares slope of `log2(e)` against `-log2(n)`.
pub fn ls_order(cells: &[usize], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = cells.iter().map(|&n| (n as f64).log2()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.log2()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    -sxy / sxx
}

// ---------------------------------------------------------------------------
// Random inputs

pub fn laws() -> [TubeLaw; 2] {
    [TubeLaw::new(10.0, -1.5).unwrap(), TubeLaw::arterial()]
}

pub fn law_strategy() -> impl Strategy<Value = TubeLaw> {
    prop_oneof![Just(TubeLaw::new(10.0, -1.5).unwrap()), Just(TubeLaw::arterial())]
}

pub fn sigma_strategy() -> impl Strategy<Value = Sigma> {
    (0.5..2.0f64, 0.5..2.0f64, -0.5..0.5f64).prop_map(|(k, a0, pe)| Sigma::new(k, a0, pe))
}

/// A subcritical state for `sigma`: `A/A0` in `[0.7, 1.6]`, `|u| <= 0.6 c`.
pub fn subcritical(model: &Model, s: &Sigma, ratio: f64, froude: f64) -> State {
    let a = ratio * s.a0;
    let c = model.wave_speed(a, s).unwrap();
    State::new(a, froude * c * a)
}

pub fn nd_model(law: TubeLaw, friction: f64) -> Model {
    Model::with_coefficients(law, 1.0, friction).unwrap()
}

/// Smooth random properties on `[0, 1]` with linear `K`, `A0`, `pe`, `g`.
#[derive(Debug, Clone)]
pub struct SmoothCase {
    pub law: TubeLaw,
    pub friction: f64,
    pub k: (f64, f64),
    pub a0: (f64, f64),
    pub pe: (f64, f64),
    pub g: (f64, f64),
    pub ratio: f64,
    pub froude: f64,
}

pub fn smooth_case() -> impl Strategy<Value = SmoothCase> {
    (
        law_strategy(),
        0.0..0.2f64,
        (0.5..2.0f64, -0.3..0.3f64),
        (0.5..2.0f64, -0.3..0.3f64),
        (-0.2..0.2f64, -0.2..0.2f64),
        (-0.5..0.5f64, -0.5..0.5f64),
        0.8..1.4f64,
        -0.5..0.5f64,
    )
        .prop_map(|(law, friction, k, a0, pe, g, ratio, froude)| SmoothCase { law, friction, k, a0, pe, g, ratio, froude })
}

fn lin(p: (f64, f64)) -> PiecewiseField {
    PiecewiseField::smooth(Profile::Linear { intercept: p.0, slope: p.1 * p.0.abs().max(0.1) }).unwrap()
}

impl SmoothCase {
    pub fn props(&self) -> VesselProperties {
        VesselProperties::new(lin(self.k), lin(self.a0), lin(self.pe), lin(self.g)).unwrap()
    }

    /// Properties with a jump of relative size `jump` in `K`, `A0` and `pe` at `x = 0.5`.
    pub fn props_with_jump(&self, jump: f64) -> VesselProperties {
        let step = |p: (f64, f64), f: f64| {
            PiecewiseField::new(
                vec![0.5],
                vec![
                    Profile::Linear { intercept: p.0, slope: p.1 * p.0.abs().max(0.1) },
                    Profile::Linear { intercept: p.0 * f, slope: p.1 * p.0.abs().max(0.1) },
                ],
            )
            .unwrap()
        };
        VesselProperties::new(step(self.k, 1.0 + jump), step(self.a0, 1.0 - 0.5 * jump), step(self.pe, 1.0 + jump), lin(self.g))
            .unwrap()
    }

    pub fn scheme(&self, props: VesselProperties, cells: usize, order: u8) -> VesselScheme {
        let model = nd_model(self.law, self.friction);
        VesselScheme::new(model, props, Mesh::new(0.0, 1.0, cells, 2).unwrap(), SchemeConfig::new(order, true)).unwrap()
    }

    pub fn state_at(&self, scheme: &VesselScheme, j: usize) -> State {
        subcritical(&scheme.model, &scheme.cells[j].center.sigma, self.ratio, self.froude)
    }
}

// ---------------------------------------------------------------------------
// Property checks

/// `Phi(a) + Phi~(a) = a phi(a)`.
pub fn check_relacion(law: TubeLaw, a: f64) -> Check {
    let v = law.eval(a);
    let lhs = v.big_phi + v.big_phi_tilde;
    let rhs = a * v.phi;
    let scale = v.big_phi.abs().max(v.big_phi_tilde.abs()).max(rhs.abs());
    prop_assert!(rel(lhs, rhs, scale) <= 1e-13, "a = {a}: {lhs} vs {rhs}");
    Ok(())
}

/// Forward then backward across one cell returns the left trace.
pub fn check_reversibility(case: &SmoothCase, order: u8, cell: usize) -> Check {
    let s = case.scheme(case.props(), 20, order);
    let j = 2 + cell;
    let w = case.state_at(&s, j);
    let placeholder = vec![w; s.mesh.total()];
    let ctx = s.steady_context(&placeholder);
    let fwd = ctx.step_forward(j, w.a, w.q, None);
    prop_assume!(fwd.is_ok());
    let fwd = fwd.unwrap();
    let back = ctx.step_backward(j, fwd.right, w.q, None).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert!(rel(back.left, w.a, w.a) <= 1e-13, "left {} vs {}", back.left, w.a);
    Ok(())
}

/// Re-solving Problem P from any other cell with the profile's own average,
/// seeded by the stored profile, reproduces every trace bitwise.
pub fn check_idempotence(case: &SmoothCase, order: u8, base: usize, other: usize) -> Check {
    let s = case.scheme(case.props_with_jump(0.05), 20, order);
    let n = s.mesh.total();
    let w = case.state_at(&s, base);
    let placeholder = vec![w; n];
    let ctx = s.steady_context(&placeholder);
    let p = ctx.solve_problem(base, w, 0, n - 1, None);
    prop_assume!(p.as_ref().is_ok_and(|p| p.cells.iter().all(Option::is_some)));
    let p = p.unwrap();
    let avg = p.averages().unwrap();
    let ctx = s.steady_context(&avg);
    let again = ctx.solve_problem(other, avg[other], 0, n - 1, Some(&p)).map_err(|e| TestCaseError::fail(e.to_string()))?;
    for j in 0..n {
        let (a, b) = (p.get(j).unwrap(), again.get(j).unwrap());
        prop_assert_eq!(a.left.to_bits(), b.left.to_bits(), "left trace of cell {}", j);
        prop_assert_eq!(a.right.to_bits(), b.right.to_bits(), "right trace of cell {}", j);
    }
    Ok(())
}

/// At a declared jump the two traces of a profile have equal flow and energy.
pub fn check_jump_admissibility(case: &SmoothCase, order: u8, jump: f64) -> Check {
    let s = case.scheme(case.props_with_jump(jump), 20, order);
    let n = s.mesh.total();
    let w = case.state_at(&s, 2);
    let placeholder = vec![w; n];
    let p = s.steady_context(&placeholder).solve_problem(2, w, 0, n - 1, None);
    prop_assume!(p.as_ref().is_ok_and(|p| p.cells.iter().all(Option::is_some)));
    let p = p.unwrap();
    let jumps: Vec<usize> = (1..n).filter(|&j| s.cells[j].jump_left).collect();
    prop_assert_eq!(jumps.len(), 1);
    for j in jumps {
        let (l, r) = (p.get(j - 1).unwrap().right, p.get(j).unwrap().left);
        let gl = s.model.energy(&State::new(l, p.q), &s.cells[j - 1].sigma_right).unwrap();
        let gr = s.model.energy(&State::new(r, p.q), &s.cells[j].sigma_left).unwrap();
        prop_assert!((gl - gr).abs() <= 1e-12, "energy jump {:e}", gl - gr);
    }
    Ok(())
}

/// Without friction and gravity, and with properties constant between
/// jumps, the energy is the same at every trace and node of the profile.
/// (With smoothly varying properties the collocation profile carries the
/// truncation error of its tableau; see the steady-solver tests.)
pub fn check_energy_constancy(case: &SmoothCase, order: u8, jump: f64) -> Check {
    let mut c = case.clone();
    c.friction = 0.0;
    c.g = (0.0, 0.0);
    c.k.1 = 0.0;
    c.a0.1 = 0.0;
    c.pe.1 = 0.0;
    let s = c.scheme(c.props_with_jump(jump), 20, order);
    let n = s.mesh.total();
    let w = c.state_at(&s, 5);
    let placeholder = vec![w; n];
    let p = s.steady_context(&placeholder).solve_problem(5, w, 0, n - 1, None);
    prop_assume!(p.as_ref().is_ok_and(|p| p.cells.iter().all(Option::is_some)));
    let p = p.unwrap();
    let g0 = s.model.energy(&State::new(p.get(0).unwrap().left, p.q), &s.cells[0].sigma_left).unwrap();
    for j in 0..n {
        let cp = p.get(j).unwrap();
        let cell = &s.cells[j];
        let mut values = vec![(cp.left, cell.sigma_left), (cp.right, cell.sigma_right)];
        for m in 0..cell.n_nodes {
            values.push((cp.nodes[m], cell.nodes[m].sigma));
        }
        for (a, sigma) in values {
            let g = s.model.energy(&State::new(a, p.q), &sigma).unwrap();
            prop_assert!(rel(g, g0, g0.abs().max(1.0)) <= 1e-12, "cell {}: {} vs {}", j, g, g0);
        }
    }
    Ok(())
}

/// `D-(W, W) = D+(W, W) = 0`.
pub fn check_consistency(model: &Model, s: &Sigma, w: &State) -> Check {
    let f = ghr_fluctuations(model, w, s, w, s).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(f.minus, State::ZERO);
    prop_assert_eq!(f.plus, State::ZERO);
    Ok(())
}

/// Stationary pairs across a property jump produce no fluctuations.
pub fn check_wb_pair(model: &Model, sl: &Sigma, sr: &Sigma, wl: &State) -> Check {
    let ar = jump_trace(model, wl.a, wl.q, sl, sr);
    prop_assume!(ar.is_ok());
    let wr = State::new(ar.unwrap(), wl.q);
    let f = ghr_fluctuations(model, wl, sl, &wr, sr).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let norm = f.minus.max_abs().max(f.plus.max_abs());
    prop_assert!(norm <= 1e-12, "|D| = {:e}", norm);
    Ok(())
}

/// `D- + D+ = F(W0+) - F(W0-)` for the first admissible intermediate state.
pub fn check_sum_identity(model: &Model, sl: &Sigma, wl: &State, sr: &Sigma, wr: &State) -> Check {
    let f = ghr_fluctuations(model, wl, sl, wr, sr).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assume!(!f.fallback);
    let cands = sigma0_candidates(model, wl, sl, wr, sr).unwrap();
    let s0 = if sl == sr { *sl } else { *cands.iter().find(|s0| hydrostatic_states(model, wl, sl, wr, sr, s0).is_ok()).unwrap() };
    let (w0l, w0r) = hydrostatic_states(model, wl, sl, wr, sr, &s0).unwrap();
    let jump = model.flux(&w0r, &s0).unwrap() - model.flux(&w0l, &s0).unwrap();
    let sum = f.minus + f.plus;
    let scale = model.flux(&w0l, &s0).unwrap().max_abs().max(model.flux(&w0r, &s0).unwrap().max_abs());
    if f.minus == State::ZERO && f.plus == State::ZERO {
        // Snapped: the hydrostatic states agree to rounding.
        prop_assert!(jump.max_abs() <= 1e-12 * scale);
    } else {
        prop_assert!((sum - jump).max_abs() <= 1e-14 * scale, "sum {:?} vs {:?}", sum, jump);
    }
    Ok(())
}

/// One first-order step at CFL 0.5 from arbitrary positive data keeps `A > 0`.
pub fn check_hll_positivity(law: TubeLaw, data: &[(f64, f64)], well_balanced: bool) -> Check {
    let model = nd_model(law, 0.0);
    let n = data.len();
    let props = VesselProperties::uniform(1.0, 1.0, 0.0);
    let s = VesselScheme::new(model, props, Mesh::new(0.0, 1.0, n, 2).unwrap(), SchemeConfig::new(1, well_balanced)).unwrap();
    let sigma = Sigma::new(1.0, 1.0, 0.0);
    let mut full: Vec<State> = data
        .iter()
        .map(|&(a, fr)| {
            let c = model.wave_speed(a, &sigma).unwrap();
            State::new(a, fr * c * a)
        })
        .collect();
    let (first, last) = (full[0], full[n - 1]);
    full.splice(0..0, [first, first]);
    full.extend([last, last]);
    let smax = s.max_speed(&full, 0..full.len()).unwrap();
    let dt = 0.5 * s.mesh.dx() / smax;
    let rhs = s.rhs_with_ghosts(&full, None).map_err(|e| TestCaseError::fail(e.to_string()))?;
    for i in s.mesh.physical() {
        let a = full[i].a + dt * rhs[i].a;
        prop_assert!(a > 0.0, "cell {}: A = {:e}", i, a);
    }
    Ok(())
}

/// Random junction data: ends with properties, states and signs.
pub fn junction_ends(model: &Model, raw: &[(Sigma, f64, f64, bool)]) -> Vec<EndTrace> {
    raw.iter()
        .map(|(s, ratio, fr, outlet)| EndTrace {
            state: subcritical(model, s, *ratio, *fr),
            sigma: *s,
            sign: if *outlet { 1.0 } else { -1.0 },
        })
        .collect()
}

/// Permuting the branches permutes the star states (relative 1e-13) and the
/// solution conserves mass.
pub fn check_relabeling(model: &Model, ends: &[EndTrace], perm: &[usize]) -> Check {
    let a = solve_junction(model, ends, "j");
    prop_assume!(a.is_ok());
    let a = a.unwrap();
    prop_assert!(mass_residual(ends, &a) <= 1e-12);
    let permuted: Vec<EndTrace> = perm.iter().map(|&k| ends[k]).collect();
    let b = solve_junction(model, &permuted, "j").map_err(|e| TestCaseError::fail(e.to_string()))?;
    let qscale = a.iter().map(|w| w.q.abs()).fold(0.0, f64::max).max(1e-300);
    for (i, &k) in perm.iter().enumerate() {
        prop_assert!(rel(b[i].a, a[k].a, a[k].a) <= 1e-13, "area of branch {}", k);
        prop_assert!((b[i].q - a[k].q).abs() <= 1e-13 * qscale, "flow of branch {}", k);
    }
    Ok(())
}

/// Closed form `4 (c(A2) - c(A1))` against composite quadrature of `c / A`.
pub fn check_beta(model: &Model, s: &Sigma, a1: f64, a2: f64) -> Check {
    let lib = riemann_beta(model, a1, a2, s).unwrap();
    let quad = gauss_composite(|a| model.wave_speed(a, s).unwrap() / a, a1, a2, 400);
    let scale = lib.abs().max(model.wave_speed(a1, s).unwrap() * ((a2 / a1).ln().abs()));
    prop_assert!(rel(lib, quad, scale.max(1e-300)) <= 1e-12, "{lib} vs {quad}");
    Ok(())
}

// ---------------------------------------------------------------------------
// Running property checks outside the proptest macro

/// Runs `check` on `cases` deterministic samples of `strategy`; returns the
/// first failure message.
pub fn run_property<S: Strategy>(cases: u32, strategy: S, check: impl Fn(S::Value) -> Check) -> Result<(), String> {
    let config = Config { cases, max_global_rejects: 100 * cases, failure_persistence: None, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, check).map_err(|e| e.to_string())
}
