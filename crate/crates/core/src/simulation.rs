//! Time integration of a single vessel with ghost-cell boundary conditions.

use crate::error::{Error, Result};
use crate::model::State;
use crate::scheme::{ssp_step, ProfileCache, VesselScheme};

/// How the ghost layers are filled at every stage.
#[derive(Debug, Clone, PartialEq)]
pub enum GhostBoundary {
    /// Ghost averages held fixed, listed in cell order on each side.
    Fixed { left: Vec<State>, right: Vec<State> },
    /// Ghost areas fixed; ghost flow rates evolve by `q_t = -f q / A + g A`.
    /// Their values are the two extra unknowns of the simulation.
    SourceDriven { left_area: f64, right_area: f64 },
    /// Ghosts hold a stationary profile plus the fluctuation `U - U*` of the
    /// adjacent interior cells, extrapolated with a polynomial of `degree`
    /// (0 to 2). Outgoing waves leave with a reflection of order `degree + 1`.
    Transmissive {
        left: Vec<State>,
        right: Vec<State>,
        /// Stationary averages of the first and last `degree + 1` physical cells.
        left_interior: Vec<State>,
        right_interior: Vec<State>,
        degree: usize,
    },
}

/// Lagrange weights extrapolating values at `0, 1, 2` (nearest first) to `-k`.
fn extrapolation_weights(degree: usize, k: usize) -> [f64; 3] {
    let x = -(k as f64);
    match degree {
        0 => [1.0, 0.0, 0.0],
        1 => [1.0 - x, x, 0.0],
        _ => [0.5 * (x - 1.0) * (x - 2.0), -x * (x - 2.0), 0.5 * x * (x - 1.0)],
    }
}

/// Nondimensional state of a single-vessel run.
#[derive(Debug, Clone)]
pub struct VesselSimulation {
    pub scheme: VesselScheme,
    pub boundary: GhostBoundary,
    /// Averages of the physical cells.
    pub averages: Vec<State>,
    /// Extra ODE unknowns carried by the boundary treatment.
    pub extra: Vec<f64>,
    pub time: f64,
    pub steps: usize,
    cache: ProfileCache,
}

fn pack(avg: &[State], extra: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(2 * avg.len() + extra.len());
    for w in avg {
        v.push(w.a);
        v.push(w.q);
    }
    v.extend_from_slice(extra);
    v
}

fn unpack(v: &[f64], n: usize) -> (Vec<State>, &[f64]) {
    let avg = (0..n).map(|k| State::new(v[2 * k], v[2 * k + 1])).collect();
    (avg, &v[2 * n..])
}

/// Part of the fluctuation `d` about `base` carried by characteristics that
/// leave the domain through the given side (linearized at `base`).
fn outgoing_part(scheme: &VesselScheme, cell: usize, base: &State, d: State, left_side: bool) -> State {
    let sigma = &scheme.cells[cell].center.sigma;
    let Ok(c) = scheme.model.wave_speed(base.a, sigma) else {
        return d;
    };
    let u = base.velocity();
    // d = a1 (1, u - c) + a2 (1, u + c)
    let a2 = (d.q - (u - c) * d.a) / (2.0 * c);
    let a1 = d.a - a2;
    let keep = |lambda: f64| if left_side { lambda < 0.0 } else { lambda > 0.0 };
    let mut out = State::ZERO;
    if keep(u - c) {
        out += State::new(a1, a1 * (u - c));
    }
    if keep(u + c) {
        out += State::new(a2, a2 * (u + c));
    }
    out
}

fn with_ghosts(scheme: &VesselScheme, boundary: &GhostBoundary, avg: &[State], extra: &[f64]) -> Vec<State> {
    let g = scheme.mesh.ghosts;
    let mut full = Vec::with_capacity(avg.len() + 2 * g);
    match boundary {
        GhostBoundary::Fixed { left, right } => {
            full.extend_from_slice(left);
            full.extend_from_slice(avg);
            full.extend_from_slice(right);
        }
        GhostBoundary::SourceDriven { left_area, right_area } => {
            full.extend(std::iter::repeat_n(State::new(*left_area, extra[0]), g));
            full.extend_from_slice(avg);
            full.extend(std::iter::repeat_n(State::new(*right_area, extra[1]), g));
        }
        GhostBoundary::Transmissive { left, right, left_interior, right_interior, degree } => {
            let n = avg.len();
            let fl: Vec<State> = left_interior.iter().enumerate().map(|(k, s)| avg[k] - *s).collect();
            let fr: Vec<State> = right_interior.iter().enumerate().map(|(k, s)| avg[n - 1 - k] - *s).collect();
            let ghost = |fluct: &[State], k: usize, base: &State, cell: usize, left_side: bool| {
                let w = extrapolation_weights(*degree, k);
                let d = fluct.iter().zip(w).fold(State::ZERO, |acc, (f, w)| acc + *f * w);
                *base + outgoing_part(scheme, cell, base, d, left_side)
            };
            // left[g - 1] touches the domain.
            full.extend((0..g).map(|j| ghost(&fl, g - j, &left[j], j, true)));
            full.extend_from_slice(avg);
            full.extend((0..g).map(|j| ghost(&fr, j + 1, &right[j], g + n + j, false)));
        }
    }
    full
}

impl VesselSimulation {
    pub fn new(scheme: VesselScheme, boundary: GhostBoundary, averages: Vec<State>, extra: Vec<f64>) -> Result<Self> {
        let g = scheme.mesh.ghosts;
        if averages.len() != scheme.mesh.cells {
            return Err(Error::Mesh(format!(
                "{} initial averages for a mesh of {} cells",
                averages.len(),
                scheme.mesh.cells
            )));
        }
        match &boundary {
            GhostBoundary::Fixed { left, right } if left.len() != g || right.len() != g => {
                return Err(Error::Mesh(format!("fixed boundary needs {g} ghost states per side")));
            }
            GhostBoundary::SourceDriven { .. } if extra.len() != 2 => {
                return Err(Error::Mesh("source-driven boundary needs two ghost flow rates".into()));
            }
            GhostBoundary::Transmissive { left, right, left_interior, right_interior, degree } => {
                let m = degree + 1;
                if *degree > 2 || left.len() != g || right.len() != g || left_interior.len() != m || right_interior.len() != m || averages.len() < m {
                    return Err(Error::Mesh(format!(
                        "transmissive boundary needs {g} ghost states and {m} interior states per side"
                    )));
                }
            }
            _ => {}
        }
        let cache = vec![None; scheme.mesh.total()];
        Ok(Self { scheme, boundary, averages, extra, time: 0.0, steps: 0, cache })
    }

    /// Averages including the current ghost values.
    pub fn full_averages(&self) -> Vec<State> {
        with_ghosts(&self.scheme, &self.boundary, &self.averages, &self.extra)
    }

    pub fn time_step(&self) -> Result<f64> {
        self.scheme.time_step(&self.full_averages())
    }

    /// Advances by `dt` with the SSP integrator of the scheme's order.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        let n = self.averages.len();
        let u = pack(&self.averages, &self.extra);
        let Self { scheme, boundary, cache, time, .. } = self;
        let t = *time;
        let g = scheme.mesh.ghosts;
        let m = scheme.model;
        let (g_left, g_right) = (scheme.props.gravity(scheme.mesh.x0), scheme.props.gravity(scheme.mesh.x0 + scheme.mesh.length));
        let next = ssp_step(&u, dt, scheme.config.order, |v, dt| {
            let (avg, extra) = unpack(v, n);
            let full = with_ghosts(scheme, boundary, &avg, extra);
            let r = scheme.rhs_with_ghosts(&full, Some(cache))?;
            let mut out = v.to_vec();
            for k in 0..n {
                out[2 * k] += dt * r[g + k].a;
                out[2 * k + 1] += dt * r[g + k].q;
                if !(out[2 * k] > 0.0) {
                    return Err(Error::PositivityLoss { cell: k, area: out[2 * k], time: t });
                }
            }
            if let GhostBoundary::SourceDriven { left_area, right_area } = boundary {
                out[2 * n] += dt * m.algebraic_source(&State::new(*left_area, extra[0]), g_left)?.q;
                out[2 * n + 1] += dt * m.algebraic_source(&State::new(*right_area, extra[1]), g_right)?.q;
            }
            Ok(out)
        })?;
        let (avg, extra) = unpack(&next, n);
        self.extra = extra.to_vec();
        self.averages = avg;
        self.time += dt;
        self.steps += 1;
        Ok(())
    }

    /// Runs until `t_end`, shortening the last step to land on it exactly.
    /// `observe` is called after every step.
    pub fn run_until<F: FnMut(&VesselSimulation)>(&mut self, t_end: f64, mut observe: F) -> Result<()> {
        while self.time < t_end * (1.0 - 1e-14) {
            let dt = self.time_step()?.min(t_end - self.time);
            self.step(dt)?;
            observe(self);
        }
        Ok(())
    }
}
