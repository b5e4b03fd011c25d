//! Standard reconstruction operators (constant, MUSCL-minmod, CWENO3) and the
//! well-balanced reconstruction built on top of them.
//!
//! Reconstructions are returned as quadratics in the local coordinate
//! `xi = (x - x_i) / dx`, `xi in [-1/2, 1/2]`.

use crate::model::State;
use crate::steady::{CellProfile, StationaryProfile};

/// Relative size below which a fluctuation about the local stationary profile is treated as zero.
pub const FLUCT_SNAP: f64 = 1e-13;

/// `min(a, b)` if both positive, `max(a, b)` if both negative, else zero.
#[inline]
pub fn minmod(a: f64, b: f64) -> f64 {
    if a > 0.0 && b > 0.0 {
        a.min(b)
    } else if a < 0.0 && b < 0.0 {
        a.max(b)
    } else {
        0.0
    }
}

/// `c0 + c1 xi + c2 xi^2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quadratic {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Quadratic {
    pub fn constant(v: f64) -> Self {
        Self { c0: v, c1: 0.0, c2: 0.0 }
    }

    #[inline]
    pub fn eval(&self, xi: f64) -> f64 {
        self.c0 + xi * (self.c1 + xi * self.c2)
    }

    /// Exact cell average over `xi in [-1/2, 1/2]`.
    pub fn average(&self) -> f64 {
        self.c0 + self.c2 / 12.0
    }
}

/// Standard reconstruction operator; the order is that of the resulting scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StandardReconstruction {
    Constant,
    Muscl,
    Cweno3,
}

impl StandardReconstruction {
    pub fn for_order(order: u8) -> Self {
        match order {
            0 | 1 => Self::Constant,
            2 => Self::Muscl,
            _ => Self::Cweno3,
        }
    }

    pub fn stencil_radius(&self) -> usize {
        match self {
            Self::Constant => 0,
            _ => 1,
        }
    }

    /// Reconstruct from the averages of cells `i-1, i, i+1`; `eps` is the CWENO
    /// regularization (`dx^2`).
    #[inline]
    pub fn apply(&self, vm: f64, v0: f64, vp: f64, eps: f64) -> Quadratic {
        match self {
            Self::Constant => Quadratic::constant(v0),
            Self::Muscl => Quadratic { c0: v0, c1: minmod(v0 - vm, vp - v0), c2: 0.0 },
            Self::Cweno3 => cweno3(vm, v0, vp, eps),
        }
    }
}

/// Third-order central WENO with linear weights `(1/4, 1/2, 1/4)`.
pub fn cweno3(vm: f64, v0: f64, vp: f64, eps: f64) -> Quadratic {
    const D_SIDE: f64 = 0.25;
    const D_CENTRAL: f64 = 0.5;
    let d2 = vp - 2.0 * v0 + vm;
    let dl = v0 - vm;
    let dr = vp - v0;
    // Central polynomial P0 = (Popt - dL PL - dR PR) / d0.
    let p0 = Quadratic { c0: v0 - d2 / 12.0, c1: 0.5 * (vp - vm), c2: d2 };
    let beta_l = dl * dl;
    let beta_r = dr * dr;
    let beta_0 = p0.c1 * p0.c1 + 13.0 / 3.0 * p0.c2 * p0.c2;
    let al = D_SIDE / ((eps + beta_l) * (eps + beta_l));
    let ar = D_SIDE / ((eps + beta_r) * (eps + beta_r));
    let a0 = D_CENTRAL / ((eps + beta_0) * (eps + beta_0));
    let sum = al + ar + a0;
    let (wl, wr, w0) = (al / sum, ar / sum, a0 / sum);
    Quadratic {
        c0: w0 * p0.c0 + (wl + wr) * v0,
        c1: w0 * p0.c1 + wl * dl + wr * dr,
        c2: w0 * p0.c2,
    }
}

/// Reconstructed states of one cell at its faces and quadrature nodes.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CellTraces {
    pub left: State,
    pub right: State,
    pub nodes: [State; 2],
}

/// Result of reconstructing one cell.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CellReconstruction {
    /// `P_i` at faces and nodes.
    pub p: CellTraces,
    /// Stationary part `W*_i` when the well-balanced path succeeded.
    pub stationary: Option<CellTraces>,
}

/// Evaluates a pair of quadratics at faces and nodes.
fn traces_of(qa: &Quadratic, qq: &Quadratic, node_xi: &[f64]) -> CellTraces {
    let mut nodes = [State::ZERO; 2];
    for (m, &xi) in node_xi.iter().enumerate() {
        nodes[m] = State::new(qa.eval(xi), qq.eval(xi));
    }
    CellTraces {
        left: State::new(qa.eval(-0.5), qq.eval(-0.5)),
        right: State::new(qa.eval(0.5), qq.eval(0.5)),
        nodes,
    }
}

/// Standard reconstruction of cell `i` from `(U_{i-1}, U_i, U_{i+1})`.
///
/// Missing neighbours should be passed as copies of `U_i`.
pub fn standard_cell(
    kind: StandardReconstruction,
    um: State,
    u0: State,
    up: State,
    eps: f64,
    node_xi: &[f64],
) -> CellTraces {
    let qa = kind.apply(um.a, u0.a, up.a, eps);
    let qq = kind.apply(um.q, u0.q, up.q, eps);
    traces_of(&qa, &qq, node_xi)
}

/// Well-balanced reconstruction of cell `i`: stationary part from `profile`
/// plus a standard reconstruction of the fluctuations `U_j - U*_{i,j}`.
///
/// Neighbours outside `profile` (or outside the mesh) reuse the fluctuation of cell `i`.
pub fn well_balanced_cell(
    kind: StandardReconstruction,
    averages: &[State],
    i: usize,
    profile: &StationaryProfile,
    eps: f64,
    node_xi: &[f64],
) -> Option<CellReconstruction> {
    let own: &CellProfile = profile.get(i)?;
    let q = profile.q;
    let fluct = |j: usize, c: &CellProfile| {
        let d = averages[j] - State::new(c.average, q);
        // Differences at the level of the stationary solver tolerance are
        // rounding, not data; keeping them would let large pressure terms
        // amplify them in F(P) - F(W*).
        let snap = |v: f64, scale: f64| if v.abs() <= FLUCT_SNAP * scale { 0.0 } else { v };
        State::new(snap(d.a, averages[j].a.abs()), snap(d.q, averages[j].q.abs() + q.abs()))
    };
    let v0 = fluct(i, own);
    let neighbour = |j: Option<usize>| -> State {
        match j.and_then(|j| profile.get(j).map(|c| (j, c))) {
            Some((j, c)) if j < averages.len() => fluct(j, c),
            _ => v0,
        }
    };
    let (vm, vp) = if kind == StandardReconstruction::Constant {
        (v0, v0)
    } else {
        (neighbour(i.checked_sub(1)), neighbour(Some(i + 1)))
    };
    let fl = standard_cell(kind, vm, v0, vp, eps, node_xi);
    let mut star = CellTraces {
        left: State::new(own.left, q),
        right: State::new(own.right, q),
        nodes: [State::ZERO; 2],
    };
    for m in 0..node_xi.len() {
        star.nodes[m] = State::new(own.nodes[m], q);
    }
    let mut p = star;
    p.left += fl.left;
    p.right += fl.right;
    for m in 0..node_xi.len() {
        p.nodes[m] += fl.nodes[m];
    }
    Some(CellReconstruction { p, stationary: Some(star) })
}
