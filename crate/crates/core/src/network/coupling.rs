//! Starred states at vessel ends: junction Riemann problems, prescribed
//! boundary values and three-element Windkessel terminals.
//!
//! Every solver keeps the outgoing Riemann invariant of each vessel,
//! `u* - u + s beta(A -> A*) = 0` with `beta = int c / A dA` and `s` the end
//! sign, so the star flow is a function of the star area alone.

use nalgebra::{DMatrix, DVector};

use super::geometry::dense_solve;
use crate::error::{Error, Result};
use crate::model::{Model, State};
use crate::properties::Sigma;

const TOL: f64 = 1e-13;
const MAX_ITER: usize = 100;
const MAX_HALVINGS: usize = 30;

/// Reconstructed state at one vessel end, with the properties there and the end sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndTrace {
    pub state: State,
    pub sigma: Sigma,
    /// `+1` at the outlet, `-1` at the inlet.
    pub sign: f64,
}

const GL_X: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL_W: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

fn gauss5<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    h * GL_X.iter().zip(GL_W).map(|(x, w)| w * f(m + h * x)).sum::<f64>()
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: usize) -> f64 {
    let m = 0.5 * (a + b);
    let (l, r) = (gauss5(f, a, m), gauss5(f, m, b));
    if depth == 0 || (l + r - whole).abs() <= tol * (l + r).abs().max(f64::MIN_POSITIVE) {
        return l + r;
    }
    adaptive(f, a, m, l, tol, depth - 1) + adaptive(f, m, b, r, tol, depth - 1)
}

/// `int_{from}^{to} c(A) / A dA`.
///
/// Closed form `4 (c(to) - c(from))` for the arterial law (`m = 1/2`, `n = 0`),
/// adaptive Gauss-Legendre quadrature otherwise.
pub fn riemann_beta(model: &Model, from: f64, to: f64, s: &Sigma) -> Result<f64> {
    if from == to {
        return Ok(0.0);
    }
    let (m, n) = (model.law.m(), model.law.n());
    if m == 0.5 && n == 0.0 {
        // 4 (c2 - c1) with c^2 = K sqrt(a) / (2 rho), rearranged to avoid cancellation.
        let (c1, c2) = (model.wave_speed(from, s)?, model.wave_speed(to, s)?);
        let (r1, r2) = ((from / s.a0).sqrt(), (to / s.a0).sqrt());
        let da = (to - from) / s.a0;
        return Ok(2.0 * s.k / model.rho * da / ((r1 + r2) * (c1 + c2)));
    }
    model.wave_speed(from, s)?;
    model.wave_speed(to, s)?;
    let f = |a: f64| model.wave_speed(a, s).map(|c| c / a).unwrap_or(f64::NAN);
    let whole = gauss5(&f, from, to);
    let v = adaptive(&f, from, to, whole, 1e-14, 30);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonPositiveArea { area: from.min(to) })
    }
}

/// Star velocity, flow and their area derivatives along the outgoing invariant of `end`.
struct Branch<'a> {
    model: &'a Model,
    end: &'a EndTrace,
}

struct BranchValues {
    q: f64,
    dq: f64,
    energy: f64,
    denergy: f64,
    pressure: f64,
    dpressure: f64,
}

impl Branch<'_> {
    fn eval(&self, a: f64) -> Result<BranchValues> {
        let m = self.model;
        let e = self.end;
        let s = &e.sigma;
        let u = e.state.velocity();
        let beta = riemann_beta(m, e.state.a, a, s)?;
        let c = m.wave_speed(a, s)?;
        let w = u - e.sign * beta;
        let pressure = m.pressure(a, s)?;
        let dpressure = s.k * m.law.dphi(a / s.a0) / s.a0;
        let dw = -e.sign * c / a;
        Ok(BranchValues {
            q: a * w,
            dq: w + a * dw,
            energy: pressure + 0.5 * m.rho * w * w,
            denergy: dpressure + m.rho * w * dw,
            pressure,
            dpressure,
        })
    }

    fn flow_scale(&self) -> f64 {
        let a = self.end.state.a;
        let c = self.model.wave_speed(a, &self.end.sigma).unwrap_or(0.0);
        a * c + self.end.state.q.abs()
    }
}

/// Solves the junction problem (mass conservation, equal total pressure,
/// outgoing invariants) for the star states, in the order of `ends`.
///
/// When the traces already solve the system to rounding they are returned
/// unchanged up to the mass projection, which keeps stationary states stationary.
pub fn solve_junction(model: &Model, ends: &[EndTrace], node: &str) -> Result<Vec<State>> {
    let n = ends.len();
    let fail = |reason: String| Error::Junction { node: node.to_string(), reason };
    if n < 2 {
        return Err(fail(format!("needs at least two vessel ends, got {n}")));
    }
    let jacobian = |vals: &[BranchValues]| {
        let mut jac = DMatrix::zeros(n, n);
        for k in 0..n {
            jac[(0, k)] = ends[k].sign * vals[k].dq;
        }
        for k in 1..n {
            jac[(k, 0)] = vals[0].denergy;
            jac[(k, k)] = -vals[k].denergy;
        }
        jac
    };
    let branches: Vec<Branch> = ends.iter().map(|end| Branch { model, end }).collect();
    let q_scale = branches.iter().map(Branch::flow_scale).fold(0.0, f64::max);
    let e_scale = ends.iter().map(|e| model.energy_scale(&e.state, &e.sigma)).fold(0.0, f64::max);
    let residual = |a: &[f64]| -> Result<(DVector<f64>, Vec<BranchValues>, f64)> {
        let vals: Vec<BranchValues> = branches.iter().zip(a).map(|(b, &a)| b.eval(a)).collect::<Result<_>>()?;
        let mut r = DVector::zeros(n);
        r[0] = ends.iter().zip(&vals).map(|(e, v)| e.sign * v.q).sum();
        for k in 1..n {
            r[k] = vals[0].energy - vals[k].energy;
        }
        let norm = (r[0] / q_scale).abs().max((1..n).map(|k| (r[k] / e_scale).abs()).fold(0.0, f64::max));
        Ok((r, vals, norm))
    };
    let mut a: Vec<f64> = ends.iter().map(|e| e.state.a).collect();
    let (mut r, mut vals, mut norm) = residual(&a)?;
    if norm <= TOL {
        return Ok(project_mass(ends, ends.iter().map(|e| e.state).collect()));
    }
    let mut it = 0;
    while norm > TOL {
        it += 1;
        if it > MAX_ITER {
            return Err(fail(format!("Newton did not converge (residual {norm:e})")));
        }
        let delta = dense_solve(jacobian(&vals), -r.clone()).ok_or_else(|| fail("singular Jacobian".into()))?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<f64> = a.iter().zip(delta.iter()).map(|(a, d)| a + lambda * d).collect();
            if trial.iter().all(|&x| x > 0.0) {
                if let Ok((rt, vt, nt)) = residual(&trial) {
                    if nt < norm {
                        a = trial;
                        r = rt;
                        vals = vt;
                        norm = nt;
                        accepted = true;
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            if norm <= 1e3 * TOL {
                break;
            }
            return Err(fail(format!("line search failed (residual {norm:e})")));
        }
    }
    // One more full step takes the iterate to rounding level, so the result
    // does not depend on where the tolerance test happened to stop (and hence
    // not on the order of the branches).
    if let Some(delta) = dense_solve(jacobian(&vals), -r) {
        let trial: Vec<f64> = a.iter().zip(delta.iter()).map(|(a, d)| a + d).collect();
        if trial.iter().all(|&x| x > 0.0) {
            if let Ok((_, vt, nt)) = residual(&trial) {
                if nt <= norm {
                    a = trial;
                    vals = vt;
                }
            }
        }
    }
    let stars = a.iter().zip(&vals).map(|(&a, v)| State::new(a, v.q)).collect();
    Ok(project_mass(ends, stars))
}

/// Removes the rounding-level mass imbalance from the star flows.
fn project_mass(ends: &[EndTrace], mut stars: Vec<State>) -> Vec<State> {
    let imbalance: f64 = ends.iter().zip(&stars).map(|(e, w)| e.sign * w.q).sum::<f64>() / ends.len() as f64;
    if imbalance != 0.0 {
        for (w, e) in stars.iter_mut().zip(ends) {
            w.q -= e.sign * imbalance;
        }
    }
    stars
}

/// `|sum s_k q_k|` relative to the largest branch flow (zero when all flows vanish).
pub fn mass_residual(ends: &[EndTrace], stars: &[State]) -> f64 {
    let sum: f64 = ends.iter().zip(stars).map(|(e, w)| e.sign * w.q).sum();
    let max = stars.iter().map(|w| w.q.abs()).fold(0.0, f64::max);
    if max > 0.0 {
        sum.abs() / max
    } else {
        sum.abs()
    }
}

/// Scalar Newton on the star area with step halving and positivity.
fn newton_area<F>(a0: f64, f: F, what: &str) -> Result<f64>
where
    F: Fn(f64) -> Result<(f64, f64, f64)>,
{
    // f returns (residual, derivative, scale).
    let mut a = a0;
    let (mut r, mut d, scale) = f(a)?;
    let mut it = 0;
    while r.abs() > TOL * scale {
        it += 1;
        if it > MAX_ITER {
            return Err(Error::Network(format!("{what}: Newton did not converge (residual {r:e})")));
        }
        let step = -r / d;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let t = a + lambda * step;
            if t > 0.0 {
                if let Ok((rt, dt, _)) = f(t) {
                    if rt.abs() < r.abs() {
                        a = t;
                        r = rt;
                        d = dt;
                        accepted = true;
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            if r.abs() <= 1e3 * TOL * scale {
                break;
            }
            return Err(Error::Network(format!("{what}: line search failed (residual {r:e})")));
        }
    }
    Ok(a)
}

/// Value imposed at a boundary end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Prescribed {
    Flow(f64),
    Pressure(f64),
    Area(f64),
}

/// Star state at a boundary end with one prescribed component.
pub fn solve_boundary(model: &Model, end: &EndTrace, value: Prescribed) -> Result<State> {
    let b = Branch { model, end };
    let area = match value {
        Prescribed::Area(a) => a,
        Prescribed::Pressure(p) => model.area_for_pressure(p, &end.sigma)?,
        Prescribed::Flow(q) => {
            let scale = b.flow_scale() + q.abs();
            newton_area(end.state.a, |a| {
                let v = b.eval(a)?;
                Ok((v.q - q, v.dq, scale))
            }, "flow boundary")?
        }
    };
    let v = b.eval(area)?;
    let q = match value {
        Prescribed::Flow(q) => q,
        _ => v.q,
    };
    Ok(State::new(area, q))
}

/// Star state at a terminal end coupled to a Windkessel with capacitor
/// pressure `p_cap` and proximal resistance `r_prox`, together with
/// `dq*/dP`, the sensitivity of the star flow (along the vessel axis) to the
/// capacitor pressure. The terminal sits at either end of the vessel.
pub fn solve_rcr(model: &Model, end: &EndTrace, p_cap: f64, r_prox: f64) -> Result<(State, f64)> {
    let b = Branch { model, end };
    let scale = model.energy_scale(&end.state, &end.sigma) + p_cap.abs();
    // The flow entering the terminal is `s q`.
    let s = end.sign;
    let a = newton_area(end.state.a, |a| {
        let v = b.eval(a)?;
        Ok((v.pressure - p_cap - r_prox * s * v.q, v.dpressure - r_prox * s * v.dq, scale))
    }, "terminal coupling")?;
    let v = b.eval(a)?;
    let df = v.dpressure - r_prox * s * v.dq;
    Ok((State::new(a, v.q), v.dq / df))
}

/// Capacitor pressure after `dt` of `C dP/dt = q(P) - (P - P_ven) / R_dist`,
/// integrated exactly for `q` linearized about the current `P`. Stable for
/// any step, which matters because `R C` is often far below the CFL step.
pub fn advance_capacitor(p: f64, q: f64, dq_dp: f64, r_dist: f64, compliance: f64, p_ven: f64, dt: f64) -> f64 {
    let rate = (q - (p - p_ven) / r_dist) / compliance;
    let lambda = (1.0 / r_dist - dq_dp) / compliance;
    if !(lambda > 0.0) {
        return p + dt * rate;
    }
    let p_eq = p + rate / lambda;
    p_eq + (p - p_eq) * (-lambda * dt).exp()
}
