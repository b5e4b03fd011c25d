//! Construction of stationary profiles by Gauss-Legendre collocation.
//!
//! A stationary solution has constant flow rate `q` and an area solving
//! `A' = G(x, A)`. Across property jumps the area is continued by matching the
//! total energy on the same sub/supercritical branch; at a critical point the
//! slope comes from the L'Hopital expansion.

use crate::error::{Error, Result};
use crate::grid::CellGeometry;
use crate::model::{Model, SteadyTerms, State, REGIME_TOL};
use crate::properties::{Sigma, VesselProperties};

const NEWTON_TOL: f64 = 1e-14;
const NEWTON_MAX_ITER: usize = 50;
const NEWTON_MAX_HALVINGS: usize = 10;

/// Gauss-Legendre implicit Runge-Kutta tableau with one or two stages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ButcherTableau {
    pub stages: usize,
    pub a: [[f64; 2]; 2],
    pub b: [f64; 2],
    pub c: [f64; 2],
}

impl ButcherTableau {
    /// Implicit midpoint rule (order 2).
    pub fn gauss1() -> Self {
        Self { stages: 1, a: [[0.5, 0.0], [0.0, 0.0]], b: [1.0, 0.0], c: [0.5, 0.0] }
    }

    /// Two-stage Gauss method (order 4).
    pub fn gauss2() -> Self {
        let r = 3f64.sqrt() / 6.0;
        Self {
            stages: 2,
            a: [[0.25, 0.25 - r], [0.25 + r, 0.25]],
            b: [0.5, 0.5],
            c: [0.5 - r, 0.5 + r],
        }
    }

    /// Tableau matching a scheme of the given spatial order.
    pub fn for_order(order: u8) -> Self {
        if order >= 3 {
            Self::gauss2()
        } else {
            Self::gauss1()
        }
    }
}

/// Whether the area is locally increasing or decreasing; picks the critical slope root.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    Increasing,
    Decreasing,
}

/// Second-order expansion of the steady ODE at a critical point.
///
/// The slope `s = A'` solves `alpha s^2 + (m2 - m1) s - e = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalExpansion {
    pub alpha: f64,
    pub m1: f64,
    pub m2: f64,
    pub e: f64,
    /// Numerator of the steady slope divided by `rho`; must vanish for a smooth passage.
    pub compatibility: f64,
}

impl CriticalExpansion {
    /// Both roots: `[plus, minus]`. With `alpha < 0` the `plus` root is the smaller one.
    pub fn roots(&self) -> Result<[f64; 2]> {
        let b = self.m1 - self.m2;
        let disc = b * b + 4.0 * self.alpha * self.e;
        if disc < 0.0 || self.alpha == 0.0 {
            return Err(Error::NoSteadyProfile(format!(
                "no real slope through the critical point (discriminant {disc:e})"
            )));
        }
        let sq = disc.sqrt();
        Ok([(b + sq) / (2.0 * self.alpha), (b - sq) / (2.0 * self.alpha)])
    }

    /// `plus` root for a decreasing area, `minus` otherwise.
    pub fn slope(&self, trend: Monotonicity) -> Result<f64> {
        let [plus, minus] = self.roots()?;
        Ok(match trend {
            Monotonicity::Decreasing => plus,
            Monotonicity::Increasing => minus,
        })
    }
}

/// Expansion coefficients at `(A, q)` given properties and their derivatives.
#[allow(clippy::too_many_arguments)]
pub fn critical_expansion(
    model: &Model,
    area: f64,
    q: f64,
    s: &Sigma,
    ds: &Sigma,
    d2s: &Sigma,
    g: f64,
    dg: f64,
) -> Result<CriticalExpansion> {
    if !(area > 0.0) {
        return Err(Error::NonPositiveArea { area });
    }
    let rho = model.rho;
    let a = area / s.a0;
    let v = model.law.eval(a);
    let kr = s.k / s.a0;
    let f = rho * model.friction * q / area;
    let alpha = -kr * (3.0 * v.dphi + a * v.d2phi);
    let m1 = a * v.dphi * ds.k - kr * (a * v.dphi + a * a * v.d2phi) * ds.a0 - 2.0 * f / area;
    let m2 = -a * v.dphi * ds.k + kr * (a * v.dphi + a * a * v.d2phi) * ds.a0;
    let e = area * v.phi * d2s.k - s.k * a * a * v.dphi * d2s.a0 - 2.0 * a * a * v.dphi * ds.k * ds.a0
        + kr * a * a * (a * v.d2phi + 2.0 * v.dphi) * ds.a0 * ds.a0
        + area * d2s.pe
        - rho * area * dg;
    let t = model.steady_terms(area, q, s, ds, g)?;
    Ok(CriticalExpansion { alpha, m1, m2, e, compatibility: t.num / rho })
}

/// Steady slope `G(x, A)` for flow rate `q`; errors at critical states.
pub fn steady_slope(model: &Model, props: &VesselProperties, x: f64, area: f64, q: f64) -> Result<f64> {
    let seg = props.segment_at(x);
    let t = model.steady_terms(area, q, &props.sigma_on(seg, x), &props.dsigma_on(seg, x), props.gravity(x))?;
    if t.is_critical() {
        return Err(Error::CriticalSingularity { x });
    }
    Ok(t.slope())
}

/// Area across a property jump: same `q`, same total energy, same branch.
pub fn jump_trace(model: &Model, area: f64, q: f64, from: &Sigma, to: &Sigma) -> Result<f64> {
    if from == to {
        return Ok(area);
    }
    let w = State::new(area, q);
    let gamma = model.energy(&w, from)?;
    let branch = model.branch(&w, from)?;
    model.area_for_energy(q, to, gamma, branch, Some(area * to.a0 / from.a0))
}

/// Collocation solution restricted to one cell.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CellProfile {
    /// Areas at the collocation nodes (only the first `stages` entries are used).
    pub nodes: [f64; 2],
    /// Trace at the left interface, from inside the cell.
    pub left: f64,
    /// Trace at the right interface, from inside the cell.
    pub right: f64,
    /// Quadrature average `sum_m b_m nodes[m]`.
    pub average: f64,
}

/// Stationary profile over a contiguous block of cells; `None` where a sweep failed.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryProfile {
    pub q: f64,
    pub first: usize,
    pub cells: Vec<Option<CellProfile>>,
}

impl StationaryProfile {
    pub fn get(&self, j: usize) -> Option<&CellProfile> {
        if j < self.first {
            return None;
        }
        self.cells.get(j - self.first).and_then(|c| c.as_ref())
    }

    pub fn last(&self) -> usize {
        self.first + self.cells.len() - 1
    }

    /// Cell averages as conserved states, in cell order; `None` entries become errors.
    pub fn averages(&self) -> Result<Vec<State>> {
        self.cells
            .iter()
            .enumerate()
            .map(|(k, c)| {
                c.map(|c| State::new(c.average, self.q)).ok_or_else(|| {
                    Error::NoSteadyProfile(format!("profile undefined in cell {}", self.first + k))
                })
            })
            .collect()
    }
}

/// Everything needed to solve stationary problems on a fixed mesh.
#[derive(Debug, Clone, Copy)]
pub struct SteadyContext<'a> {
    pub model: &'a Model,
    pub props: &'a VesselProperties,
    pub cells: &'a [CellGeometry],
    pub tableau: &'a ButcherTableau,
    /// Current cell averages (same indexing as `cells`), used to orient critical slopes.
    pub averages: &'a [State],
    /// Forces the orientation of critical slopes when set.
    pub trend: Option<Monotonicity>,
}

/// Small dense solve with partial pivoting; `None` if singular.
fn solve_small(mut a: [[f64; 3]; 3], mut b: [f64; 3], n: usize) -> Option<[f64; 3]> {
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col] == 0.0 || !a[p][col].is_finite() {
            return None;
        }
        a.swap(p, col);
        b.swap(p, col);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

fn norm_inf(r: &[f64; 3], n: usize) -> f64 {
    r[..n].iter().fold(0.0, |m, v| m.max(v.abs()))
}

type Jacobian = [[f64; 3]; 3];

/// Damped Newton on at most three unknowns.
fn newton<F>(n: usize, x0: [f64; 3], mut eval: F) -> Result<[f64; 3]>
where
    F: FnMut(&[f64; 3]) -> Result<([f64; 3], Jacobian)>,
{
    let mut x = x0;
    let (mut r, mut jac) = eval(&x)?;
    let mut rn = norm_inf(&r, n);
    for _ in 0..NEWTON_MAX_ITER {
        let scale = norm_inf(&x, n).max(1.0);
        if rn <= NEWTON_TOL * scale {
            return Ok(x);
        }
        let step = solve_small(jac, r, n).ok_or(Error::NewtonFailed { iterations: 0, residual: rn })?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=NEWTON_MAX_HALVINGS {
            let mut xt = x;
            for i in 0..n {
                xt[i] -= lambda * step[i];
            }
            if let Ok((rt, jt)) = eval(&xt) {
                let rtn = norm_inf(&rt, n);
                if rtn.is_finite() && rtn < rn {
                    x = xt;
                    r = rt;
                    jac = jt;
                    rn = rtn;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            // Stalled at rounding level: accept if we are already very close.
            if rn <= 1e3 * NEWTON_TOL * scale {
                // Re-evaluate at x so callers see values consistent with the returned point.
                eval(&x)?;
                return Ok(x);
            }
            return Err(Error::NewtonFailed { iterations: NEWTON_MAX_ITER, residual: rn });
        }
    }
    let scale = norm_inf(&x, n).max(1.0);
    if rn <= NEWTON_TOL * scale {
        Ok(x)
    } else {
        Err(Error::NewtonFailed { iterations: NEWTON_MAX_ITER, residual: rn })
    }
}

/// The seed itself when Newton accepted it unchanged and it was built from
/// the same input up to the solver tolerance. Returning it verbatim makes
/// re-solves from stored profiles reproduce them bitwise.
fn reused(seed: Option<&CellProfile>, x: &[f64; 3], x0: &[f64; 3], seed_input: f64, input: f64) -> Option<CellProfile> {
    let s = seed?;
    let same = x == x0 && (seed_input - input).abs() <= NEWTON_TOL * input.abs().max(1.0);
    same.then_some(*s)
}

/// Slope, its derivative and the sign of the denominator at one node.
#[derive(Debug, Clone, Copy)]
struct NodeSlope {
    g: f64,
    dg: f64,
    den: f64,
}

impl<'a> SteadyContext<'a> {
    fn trend_for(&self, j: usize) -> Monotonicity {
        if let Some(t) = self.trend {
            return t;
        }
        if j >= 1 && j + 1 < self.averages.len() && self.averages[j + 1].a < self.averages[j - 1].a {
            Monotonicity::Decreasing
        } else if j >= 1 && j + 1 < self.averages.len() {
            Monotonicity::Increasing
        } else {
            Monotonicity::Decreasing
        }
    }

    fn expansion_at(&self, j: usize, x: f64, area: f64, q: f64) -> Result<CriticalExpansion> {
        let seg = self.cells[j].segment;
        let p = self.props;
        critical_expansion(
            self.model,
            area,
            q,
            &p.sigma_on(seg, x),
            &p.dsigma_on(seg, x),
            &p.d2sigma_on(seg, x),
            p.gravity(x),
            p.dgravity(x),
        )
    }

    /// `G` at node `m` of cell `j`, regularized at critical states.
    fn node_slope(&self, j: usize, m: usize, area: f64, q: f64) -> Result<NodeSlope> {
        let nd = &self.cells[j].nodes[m];
        let t: SteadyTerms = self.model.steady_terms(area, q, &nd.sigma, &nd.dsigma, nd.g)?;
        if t.is_critical() {
            let ce = self.expansion_at(j, nd.x, area, q)?;
            if ce.compatibility.abs() > REGIME_TOL {
                return Err(Error::CriticalSingularity { x: nd.x });
            }
            let s = ce.slope(self.trend_for(j))?;
            return Ok(NodeSlope { g: s, dg: 0.0, den: 0.0 });
        }
        Ok(NodeSlope { g: t.slope(), dg: t.slope_derivative(), den: t.den })
    }

    fn check_branch(&self, j: usize, slopes: &[NodeSlope; 2], expect: Option<f64>) -> Result<f64> {
        let ns = self.tableau.stages;
        let sign = slopes[0].den.signum();
        for s in &slopes[..ns] {
            if s.den != 0.0 && s.den.signum() != sign && sign != 0.0 {
                return Err(Error::NoSteadyProfile(format!("regime change inside cell {j}")));
            }
        }
        if let Some(e) = expect {
            if e != 0.0 && sign != 0.0 && e != sign {
                return Err(Error::NoSteadyProfile(format!("regime change entering cell {j}")));
            }
        }
        Ok(sign)
    }

    /// One collocation step from the left trace of cell `j`.
    pub fn step_forward(&self, j: usize, a_left: f64, q: f64, seed: Option<&CellProfile>) -> Result<CellProfile> {
        self.step_forward_checked(j, a_left, q, seed, None).map(|(c, _)| c)
    }

    fn step_forward_checked(
        &self,
        j: usize,
        a_left: f64,
        q: f64,
        seed: Option<&CellProfile>,
        expect: Option<f64>,
    ) -> Result<(CellProfile, f64)> {
        let tb = self.tableau;
        let ns = tb.stages;
        let dx = self.cells[j].dx;
        let mut last = [NodeSlope { g: 0.0, dg: 0.0, den: 0.0 }; 2];
        let x0 = match seed {
            Some(s) => [s.nodes[0], s.nodes[1], 0.0],
            None => [a_left; 3],
        };
        let x = newton(ns, x0, |x| {
            let mut r = [0.0; 3];
            let mut jac = [[0.0; 3]; 3];
            for m in 0..ns {
                last[m] = self.node_slope(j, m, x[m], q)?;
            }
            for m in 0..ns {
                r[m] = x[m] - a_left - dx * (0..ns).map(|k| tb.a[m][k] * last[k].g).sum::<f64>();
                for k in 0..ns {
                    jac[m][k] = if m == k { 1.0 } else { 0.0 } - dx * tb.a[m][k] * last[k].dg;
                }
            }
            Ok((r, jac))
        })?;
        let sign = self.check_branch(j, &last, expect)?;
        if let Some(s) = reused(seed, &x, &x0, seed.map_or(f64::NAN, |s| s.left), a_left) {
            return Ok((s, sign));
        }
        let right = a_left + dx * (0..ns).map(|k| tb.b[k] * last[k].g).sum::<f64>();
        Ok((self.finish(x, a_left, right), sign))
    }

    /// One collocation step backwards from the right trace of cell `j`.
    pub fn step_backward(&self, j: usize, a_right: f64, q: f64, seed: Option<&CellProfile>) -> Result<CellProfile> {
        self.step_backward_checked(j, a_right, q, seed, None).map(|(c, _)| c)
    }

    fn step_backward_checked(
        &self,
        j: usize,
        a_right: f64,
        q: f64,
        seed: Option<&CellProfile>,
        expect: Option<f64>,
    ) -> Result<(CellProfile, f64)> {
        let tb = self.tableau;
        let ns = tb.stages;
        let dx = self.cells[j].dx;
        let mut last = [NodeSlope { g: 0.0, dg: 0.0, den: 0.0 }; 2];
        let x0 = match seed {
            Some(s) => [s.nodes[0], s.nodes[1], 0.0],
            None => [a_right; 3],
        };
        let x = newton(ns, x0, |x| {
            let mut r = [0.0; 3];
            let mut jac = [[0.0; 3]; 3];
            for m in 0..ns {
                last[m] = self.node_slope(j, m, x[m], q)?;
            }
            for m in 0..ns {
                let rm = ns - 1 - m;
                r[m] = x[m] - a_right
                    + dx * (0..ns).map(|k| tb.a[rm][ns - 1 - k] * last[k].g).sum::<f64>();
                for k in 0..ns {
                    jac[m][k] = if m == k { 1.0 } else { 0.0 } + dx * tb.a[rm][ns - 1 - k] * last[k].dg;
                }
            }
            Ok((r, jac))
        })?;
        let sign = self.check_branch(j, &last, expect)?;
        if let Some(s) = reused(seed, &x, &x0, seed.map_or(f64::NAN, |s| s.right), a_right) {
            return Ok((s, sign));
        }
        let left = a_right - dx * (0..ns).map(|k| tb.b[k] * last[k].g).sum::<f64>();
        Ok((self.finish(x, left, a_right), sign))
    }

    /// Local stationary solution of cell `j` whose quadrature average equals `avg`.
    pub fn solve_averaged(&self, j: usize, avg: f64, q: f64, seed: Option<&CellProfile>) -> Result<CellProfile> {
        self.solve_averaged_signed(j, avg, q, seed).map(|(c, _)| c)
    }

    fn solve_averaged_signed(
        &self,
        j: usize,
        avg: f64,
        q: f64,
        seed: Option<&CellProfile>,
    ) -> Result<(CellProfile, f64)> {
        let tb = self.tableau;
        let ns = tb.stages;
        let dx = self.cells[j].dx;
        let mut last = [NodeSlope { g: 0.0, dg: 0.0, den: 0.0 }; 2];
        let mut x0 = [avg; 3];
        if let Some(s) = seed {
            x0[..ns].copy_from_slice(&s.nodes[..ns]);
            x0[ns] = s.left;
        }
        let x = newton(ns + 1, x0, |x| {
            let mut r = [0.0; 3];
            let mut jac = [[0.0; 3]; 3];
            let al = x[ns];
            for m in 0..ns {
                last[m] = self.node_slope(j, m, x[m], q)?;
            }
            for m in 0..ns {
                r[m] = x[m] - al - dx * (0..ns).map(|k| tb.a[m][k] * last[k].g).sum::<f64>();
                for k in 0..ns {
                    jac[m][k] = if m == k { 1.0 } else { 0.0 } - dx * tb.a[m][k] * last[k].dg;
                }
                jac[m][ns] = -1.0;
            }
            r[ns] = (0..ns).map(|k| tb.b[k] * x[k]).sum::<f64>() - avg;
            for k in 0..ns {
                jac[ns][k] = tb.b[k];
            }
            Ok((r, jac))
        })?;
        let sign = self.check_branch(j, &last, None)?;
        if let Some(s) = reused(seed, &x, &x0, seed.map_or(f64::NAN, |s| s.average), avg) {
            return Ok((s, sign));
        }
        let left = x[ns];
        let right = left + dx * (0..ns).map(|k| tb.b[k] * last[k].g).sum::<f64>();
        Ok((self.finish(x, left, right), sign))
    }

    fn finish(&self, x: [f64; 3], left: f64, right: f64) -> CellProfile {
        let ns = self.tableau.stages;
        let mut nodes = [0.0; 2];
        nodes[..ns].copy_from_slice(&x[..ns]);
        let average = (0..ns).map(|k| self.tableau.b[k] * nodes[k]).sum();
        CellProfile { nodes, left, right, average }
    }

    /// Linear profile through a critical cell average, or an error if the
    /// critical point is not a smooth transition.
    pub fn critical_cell(&self, j: usize, w: State) -> Result<CellProfile> {
        let cell = &self.cells[j];
        let xc = cell.x_center();
        let ce = self.expansion_at(j, xc, w.a, w.q)?;
        if ce.compatibility.abs() > REGIME_TOL {
            return Err(Error::NoSteadyProfile(format!(
                "critical state in cell {j} violates the compatibility relation ({:e})",
                ce.compatibility
            )));
        }
        let d = ce.slope(self.trend_for(j))?;
        let mut nodes = [0.0; 2];
        for m in 0..self.tableau.stages {
            nodes[m] = w.a + d * (cell.nodes[m].x - xc);
        }
        let average = (0..self.tableau.stages).map(|k| self.tableau.b[k] * nodes[k]).sum();
        Ok(CellProfile { nodes, left: w.a - 0.5 * d * cell.dx, right: w.a + 0.5 * d * cell.dx, average })
    }

    fn is_critical_cell(&self, j: usize, w: State) -> Result<bool> {
        let c = &self.cells[j].center;
        let t = self.model.steady_terms(w.a, w.q, &c.sigma, &c.dsigma, c.g)?;
        Ok(t.is_critical())
    }

    /// Problem P: the stationary profile through the average `w` of cell
    /// `base`, continued over cells `lo..=hi`.
    ///
    /// Fails only if the base cell has no profile; cells that cannot be
    /// reached by the sweeps are left as `None`.
    pub fn solve_problem(
        &self,
        base: usize,
        w: State,
        lo: usize,
        hi: usize,
        seed: Option<&StationaryProfile>,
    ) -> Result<StationaryProfile> {
        let q = w.q;
        let seed_at = |j: usize| seed.and_then(|s| s.get(j));
        let (center, sign) = if self.is_critical_cell(base, w)? {
            (self.critical_cell(base, w)?, 0.0)
        } else {
            self.solve_averaged_signed(base, w.a, q, seed_at(base))?
        };
        let mut cells = vec![None; hi - lo + 1];
        cells[base - lo] = Some(center);
        self.sweep(base, center, sign, q, hi, true, &mut cells, lo, seed_at);
        self.sweep(base, center, sign, q, lo, false, &mut cells, lo, seed_at);
        Ok(StationaryProfile { q, first: lo, cells })
    }

    #[allow(clippy::too_many_arguments)]
    fn sweep<'s>(
        &self,
        from: usize,
        start: CellProfile,
        sign: f64,
        q: f64,
        until: usize,
        forward: bool,
        cells: &mut [Option<CellProfile>],
        lo: usize,
        seed_at: impl Fn(usize) -> Option<&'s CellProfile>,
    ) {
        let mut prev = start;
        let mut sign = if sign == 0.0 { None } else { Some(sign) };
        let mut j = from;
        loop {
            if (forward && j >= until) || (!forward && j <= until) {
                break;
            }
            let next = if forward { j + 1 } else { j - 1 };
            let result = if forward {
                let mut a_in = prev.right;
                if self.cells[next].jump_left {
                    match jump_trace(self.model, a_in, q, &self.cells[j].sigma_right, &self.cells[next].sigma_left) {
                        Ok(a) => a_in = a,
                        Err(_) => break,
                    }
                    sign = None;
                }
                self.step_forward_checked(next, a_in, q, seed_at(next), sign)
            } else {
                let mut a_in = prev.left;
                if self.cells[j].jump_left {
                    match jump_trace(self.model, a_in, q, &self.cells[j].sigma_left, &self.cells[next].sigma_right) {
                        Ok(a) => a_in = a,
                        Err(_) => break,
                    }
                    sign = None;
                }
                self.step_backward_checked(next, a_in, q, seed_at(next), sign)
            };
            match result {
                Ok((c, s)) => {
                    cells[next - lo] = Some(c);
                    prev = c;
                    sign = if s == 0.0 { None } else { Some(s) };
                    j = next;
                }
                Err(_) => break,
            }
        }
    }

    /// Profile through a known trace at interface `iface` (the left face of
    /// cell `iface`), continued over `lo..=hi`. Used to build reference
    /// solutions from boundary data.
    pub fn profile_from_trace(&self, iface: usize, area: f64, q: f64, lo: usize, hi: usize) -> Result<StationaryProfile> {
        let mut cells = vec![None; hi - lo + 1];
        let first = self.step_forward(iface, area, q, None)?;
        cells[iface - lo] = Some(first);
        self.sweep(iface, first, 0.0, q, hi, true, &mut cells, lo, |_| None);
        if iface > lo {
            let mut a_in = area;
            if self.cells[iface].jump_left {
                a_in = jump_trace(self.model, area, q, &self.cells[iface].sigma_left, &self.cells[iface - 1].sigma_right)?;
            }
            let back = self.step_backward(iface - 1, a_in, q, None)?;
            cells[iface - 1 - lo] = Some(back);
            self.sweep(iface - 1, back, 0.0, q, lo, false, &mut cells, lo, |_| None);
        }
        let p = StationaryProfile { q, first: lo, cells };
        if p.cells.iter().any(|c| c.is_none()) {
            return Err(Error::NoSteadyProfile("profile could not be continued over the whole mesh".into()));
        }
        Ok(p)
    }
}
