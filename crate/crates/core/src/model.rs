//! Pointwise physics of the 1D model: pressure, fluxes, sources, wave speeds,
//! total energy and the algebraic pieces of the steady-state ODE.
//!
//! Every evaluator works in whatever consistent unit system the [`Model`] was
//! built in; the solvers always hand it nondimensional quantities.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::properties::Sigma;
use crate::tube_law::TubeLaw;

/// Tolerance used to classify a state as critical (`| |u|/c - 1 | < REGIME_TOL`).
pub const REGIME_TOL: f64 = 1e-8;

/// Velocity profile factor of the friction term.
pub const DEFAULT_GAMMA: f64 = 8.0;

/// Conserved variables `U = (A, q)`; also used for fluxes and rates of change.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct State {
    pub a: f64,
    pub q: f64,
}

impl State {
    pub const ZERO: State = State { a: 0.0, q: 0.0 };

    pub fn new(a: f64, q: f64) -> Self {
        Self { a, q }
    }

    pub fn velocity(&self) -> f64 {
        self.q / self.a
    }

    pub fn max_abs(&self) -> f64 {
        self.a.abs().max(self.q.abs())
    }
}

impl Add for State {
    type Output = State;
    fn add(self, o: State) -> State {
        State { a: self.a + o.a, q: self.q + o.q }
    }
}

impl Sub for State {
    type Output = State;
    fn sub(self, o: State) -> State {
        State { a: self.a - o.a, q: self.q - o.q }
    }
}

impl Mul<f64> for State {
    type Output = State;
    fn mul(self, s: f64) -> State {
        State { a: self.a * s, q: self.q * s }
    }
}

impl Neg for State {
    type Output = State;
    fn neg(self) -> State {
        State { a: -self.a, q: -self.q }
    }
}

impl AddAssign for State {
    fn add_assign(&mut self, o: State) {
        self.a += o.a;
        self.q += o.q;
    }
}

/// Blood density and viscosity in a consistent unit system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidParams {
    pub rho: f64,
    pub mu: f64,
    pub gamma: f64,
}

impl FluidParams {
    /// SI defaults: `mu = 0.0045 Pa s`, `gamma = 8`.
    pub fn si(rho: f64) -> Self {
        Self { rho, mu: 0.0045, gamma: DEFAULT_GAMMA }
    }

    /// CGS defaults: `mu = 0.045 P`, `gamma = 8`.
    pub fn cgs(rho: f64) -> Self {
        Self { rho, mu: 0.045, gamma: DEFAULT_GAMMA }
    }

    /// Coefficient `gamma pi mu / rho` multiplying `q / A` in the friction term.
    pub fn friction_coefficient(&self) -> f64 {
        self.gamma * std::f64::consts::PI * self.mu / self.rho
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

/// Solution branch of the energy equation for a fixed flow rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Subcritical,
    Supercritical,
}

/// Numerator and denominator of the steady slope `A' = -num / den`, with their
/// partial derivatives in `A` (at fixed `x`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyTerms {
    pub num: f64,
    pub den: f64,
    pub num_a: f64,
    pub den_a: f64,
    pub froude: f64,
}

impl SteadyTerms {
    pub fn is_critical(&self) -> bool {
        (self.froude - 1.0).abs() < REGIME_TOL
    }

    /// `G = -num / den`.
    pub fn slope(&self) -> f64 {
        -self.num / self.den
    }

    /// `dG/dA`.
    pub fn slope_derivative(&self) -> f64 {
        -(self.num_a * self.den - self.num * self.den_a) / (self.den * self.den)
    }
}

/// Tube law plus fluid constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model {
    pub law: TubeLaw,
    pub rho: f64,
    /// `gamma pi mu / rho`.
    pub friction: f64,
}

#[inline]
fn check_area(a: f64) -> Result<()> {
    if a > 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveArea { area: a })
    }
}

impl Model {
    pub fn new(law: TubeLaw, fluid: FluidParams) -> Result<Self> {
        Self::with_coefficients(law, fluid.rho, fluid.friction_coefficient())
    }

    pub fn with_coefficients(law: TubeLaw, rho: f64, friction: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidParameter(format!("density must be positive, got {rho}")));
        }
        if !(friction >= 0.0 && friction.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "friction coefficient must be non-negative, got {friction}"
            )));
        }
        Ok(Self { law, rho, friction })
    }

    /// Transmural pressure plus external pressure, `K phi(A/A0) + pe`.
    #[inline]
    pub fn pressure(&self, area: f64, s: &Sigma) -> Result<f64> {
        check_area(area)?;
        Ok(s.k * self.law.phi(area / s.a0) + s.pe)
    }

    /// Area giving pressure `p`; the tube law is strictly increasing so the root is unique.
    pub fn area_for_pressure(&self, p: f64, s: &Sigma) -> Result<f64> {
        let target = (p - s.pe) / s.k;
        let f = |a: f64| self.law.phi(a) - target;
        let (mut lo, mut hi) = (1.0, 1.0);
        let mut n = 0;
        while f(lo) > 0.0 {
            lo *= 0.5;
            n += 1;
            if n > 1100 {
                return Err(Error::InvalidParameter(format!(
                    "pressure {p} is below the range of the tube law"
                )));
            }
        }
        n = 0;
        while f(hi) < 0.0 {
            hi *= 2.0;
            n += 1;
            if n > 1100 {
                return Err(Error::InvalidParameter(format!("pressure {p} is out of range")));
            }
        }
        let a = safeguarded_root(lo, hi, 1.0_f64.clamp(lo, hi), |a| {
            (f(a), self.law.dphi(a))
        }, 1e-15 * (target.abs() + self.law.a_dphi(hi).max(1.0)))?;
        Ok(a * s.a0)
    }

    /// Wave speed `c = sqrt(K/rho * a phi'(a))`.
    #[inline]
    pub fn wave_speed(&self, area: f64, s: &Sigma) -> Result<f64> {
        check_area(area)?;
        Ok((s.k / self.rho * self.law.a_dphi(area / s.a0)).sqrt())
    }

    /// `(lambda_1, lambda_5) = (u - c, u + c)`.
    #[inline]
    pub fn eigenvalues(&self, w: &State, s: &Sigma) -> Result<(f64, f64)> {
        let c = self.wave_speed(w.a, s)?;
        let u = w.q / w.a;
        Ok((u - c, u + c))
    }

    /// Eigenvalues of the full system: the two acoustic ones and three zero
    /// eigenvalues of the stationary property fields.
    pub fn all_eigenvalues(&self, w: &State, s: &Sigma) -> Result<[f64; 5]> {
        let (l1, l5) = self.eigenvalues(w, s)?;
        Ok([l1, 0.0, 0.0, 0.0, l5])
    }

    /// `|u| / c`.
    #[inline]
    pub fn froude(&self, w: &State, s: &Sigma) -> Result<f64> {
        let c = self.wave_speed(w.a, s)?;
        Ok((w.q / w.a).abs() / c)
    }

    pub fn regime(&self, w: &State, s: &Sigma) -> Result<Regime> {
        let fr = self.froude(w, s)?;
        Ok(if (fr - 1.0).abs() < REGIME_TOL {
            Regime::Critical
        } else if fr < 1.0 {
            Regime::Subcritical
        } else {
            Regime::Supercritical
        })
    }

    /// Branch of `w`; critical states count as subcritical.
    pub fn branch(&self, w: &State, s: &Sigma) -> Result<Branch> {
        Ok(if self.froude(w, s)? <= 1.0 { Branch::Subcritical } else { Branch::Supercritical })
    }

    /// Conservative flux `F = (q, q^2/A + K A0/rho Phi~(A/A0))`.
    #[inline]
    pub fn flux(&self, w: &State, s: &Sigma) -> Result<State> {
        check_area(w.a)?;
        let a = w.a / s.a0;
        let pt = self.law.big_phi_tilde(a);
        Ok(State { a: w.q, q: w.q * w.q / w.a + s.k * s.a0 / self.rho * pt })
    }

    /// Algebraic source `R = (0, -f q/A + g A)` with `f = gamma pi mu / rho`.
    #[inline]
    pub fn algebraic_source(&self, w: &State, g: f64) -> Result<State> {
        check_area(w.a)?;
        Ok(State { a: 0.0, q: -self.friction * w.q / w.a + g * w.a })
    }

    /// Nonconservative source `S(W) . sigma_x`; only the momentum component is nonzero.
    #[inline]
    pub fn nonconservative_source(&self, w: &State, s: &Sigma, ds: &Sigma) -> Result<State> {
        check_area(w.a)?;
        let v = self.law.eval(w.a / s.a0);
        let mom = s.a0 / self.rho * v.big_phi * ds.k - s.k / self.rho * v.big_phi_tilde * ds.a0
            + w.a / self.rho * ds.pe;
        Ok(State { a: 0.0, q: mom })
    }

    /// Total energy `Gamma = rho/2 u^2 + K phi(A/A0) + pe`.
    #[inline]
    pub fn energy(&self, w: &State, s: &Sigma) -> Result<f64> {
        check_area(w.a)?;
        let u = w.q / w.a;
        Ok(0.5 * self.rho * u * u + s.k * self.law.phi(w.a / s.a0) + s.pe)
    }

    /// Sum of magnitudes of the terms in `Gamma`, used as a scale for tolerances.
    pub fn energy_scale(&self, w: &State, s: &Sigma) -> f64 {
        let a = w.a / s.a0;
        let u = w.q / w.a;
        let (am, an) = self.law.powers(a);
        0.5 * self.rho * u * u + s.k.abs() * (am + an) + s.pe.abs()
    }

    /// Numerator and denominator of the steady ODE slope at `(A, q)`.
    #[inline]
    pub fn steady_terms(
        &self,
        area: f64,
        q: f64,
        s: &Sigma,
        ds: &Sigma,
        g: f64,
    ) -> Result<SteadyTerms> {
        check_area(area)?;
        let rho = self.rho;
        let a = area / s.a0;
        let v = self.law.eval(a);
        let fq = rho * self.friction * q;
        let u2 = q * q / (area * area);
        let kr = s.k / s.a0;
        let num = area * v.phi * ds.k - s.k * a * a * v.dphi * ds.a0 + area * ds.pe + fq / area
            - rho * g * area;
        let den = -rho * u2 + s.k * a * v.dphi;
        let num_a = (v.phi + a * v.dphi) * ds.k - kr * (2.0 * a * v.dphi + a * a * v.d2phi) * ds.a0
            + ds.pe
            - fq / (area * area)
            - rho * g;
        let den_a = 2.0 * rho * u2 / area + kr * (v.dphi + a * v.d2phi);
        let c2 = s.k / rho * a * v.dphi;
        let froude = (u2 / c2).sqrt();
        Ok(SteadyTerms { num, den, num_a, den_a, froude })
    }

    /// Area at which `|u| = c` for flow rate `q`; zero when `q = 0`.
    pub fn critical_area(&self, q: f64, s: &Sigma) -> Result<f64> {
        if q == 0.0 {
            return Ok(0.0);
        }
        // u = c  <=>  rho q^2 / (K A0^2) = a^3 phi'(a) = m a^(m+2) - n a^(n+2), increasing in a.
        let (m, n) = (self.law.m(), self.law.n());
        let target = self.rho * q * q / (s.k * s.a0 * s.a0);
        if !(target > 0.0 && target.is_finite()) {
            return Err(Error::InvalidParameter("cannot locate the critical area".into()));
        }
        let h = |t: f64| {
            let a = t.exp();
            let (am, an) = self.law.powers(a);
            let pm = m * am * a * a;
            let pn = -n * an * a * a;
            let val = pm + pn;
            let dval = (m + 2.0) * pm + (n + 2.0) * pn;
            (val.ln() - target.ln(), dval / val)
        };
        let (mut lo, mut hi) = (-1.0, 1.0);
        while h(lo).0 > 0.0 {
            lo *= 2.0;
            if lo < -1e4 {
                return Err(Error::InvalidParameter("critical area underflow".into()));
            }
        }
        while h(hi).0 < 0.0 {
            hi *= 2.0;
            if hi > 1e4 {
                return Err(Error::InvalidParameter("critical area overflow".into()));
            }
        }
        let t = safeguarded_root(lo, hi, 0.5 * (lo + hi), h, 1e-15)?;
        Ok(t.exp() * s.a0)
    }

    /// Area `A` on `branch` with `rho/2 q^2/A^2 + K phi(A/A0) + pe = gamma`.
    ///
    /// Errors when the energy level lies below the minimum of the branch.
    pub fn area_for_energy(
        &self,
        q: f64,
        s: &Sigma,
        gamma: f64,
        branch: Branch,
        guess: Option<f64>,
    ) -> Result<f64> {
        let rho = self.rho;
        let b = 0.5 * rho * q * q / (s.a0 * s.a0);
        let target = gamma - s.pe;
        let f = |a: f64| {
            let (am, an) = self.law.powers(a);
            let val = b / (a * a) + s.k * (am - an) - target;
            let dval = -2.0 * b / (a * a * a) + s.k * (self.law.m() * am - self.law.n() * an) / a;
            (val, dval)
        };
        let ac = self.critical_area(q, s)? / s.a0;
        let scale = |a: f64| b / (a * a) + s.k.abs() * {
            let (am, an) = self.law.powers(a);
            am + an
        } + target.abs();
        let no_root = || {
            Error::NoSteadyProfile(format!(
                "energy level {gamma:e} is not reachable on the {branch:?} branch (q = {q:e})"
            ))
        };
        let (lo, hi) = match branch {
            Branch::Subcritical => {
                if ac > 0.0 && f(ac).0 > 0.0 {
                    return Err(no_root());
                }
                let mut hi = (2.0 * ac).max(2.0);
                let mut k = 0;
                while f(hi).0 < 0.0 {
                    hi *= 2.0;
                    k += 1;
                    if k > 2000 {
                        return Err(no_root());
                    }
                }
                let mut lo = if ac > 0.0 { ac } else { 0.5 };
                if ac == 0.0 {
                    k = 0;
                    while f(lo).0 > 0.0 {
                        lo *= 0.5;
                        k += 1;
                        if k > 1070 {
                            return Err(no_root());
                        }
                    }
                }
                (lo, hi)
            }
            Branch::Supercritical => {
                if ac == 0.0 || f(ac).0 > 0.0 {
                    return Err(no_root());
                }
                let mut lo = 0.5 * ac;
                let mut k = 0;
                while f(lo).0 < 0.0 {
                    lo *= 0.5;
                    k += 1;
                    if k > 1070 {
                        return Err(no_root());
                    }
                }
                (lo, ac)
            }
        };
        let start = guess.map(|g| g / s.a0).filter(|g| *g > lo && *g < hi).unwrap_or(0.5 * (lo + hi));
        let tol = 1e-15 * scale(start);
        let a = safeguarded_root(lo, hi, start, f, tol)?;
        Ok(a * s.a0)
    }
}

/// Newton iteration safeguarded by bisection on a bracketing interval.
///
/// `f` returns the value and derivative. Stops when `|f| <= tol` or the
/// bracket shrinks to a few ulps.
pub(crate) fn safeguarded_root<F>(mut lo: f64, mut hi: f64, start: f64, f: F, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> (f64, f64),
{
    let (flo, fhi) = (f(lo).0, f(hi).0);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::InvalidParameter("root is not bracketed".into()));
    }
    let increasing = fhi > 0.0;
    let mut x = start;
    let mut last = f64::INFINITY;
    for _ in 0..300 {
        let (fx, dfx) = f(x);
        if fx.abs() <= tol {
            return Ok(x);
        }
        if (fx > 0.0) == increasing {
            hi = x;
        } else {
            lo = x;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs()) {
            return Ok(x);
        }
        let newton = x - fx / dfx;
        let step_ok = newton.is_finite() && newton > lo && newton < hi && fx.abs() < 0.5 * last;
        last = fx.abs();
        x = if step_ok { newton } else { 0.5 * (lo + hi) };
    }
    Ok(x)
}
