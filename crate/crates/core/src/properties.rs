//! Closed-form vessel property fields `sigma = (K, A0, pe)` and gravity `g(x)`.
//!
//! Fields are piecewise smooth: a list of break points splits the vessel into
//! segments, each described by a closed-form [`Profile`]. Values, first and
//! second derivatives are exact on each segment, so quadrature nodes never see
//! finite-difference noise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Property vector `sigma = (K, A0, pe)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sigma {
    pub k: f64,
    pub a0: f64,
    pub pe: f64,
}

impl Sigma {
    pub fn new(k: f64, a0: f64, pe: f64) -> Self {
        Self { k, a0, pe }
    }

    pub fn midpoint(&self, other: &Sigma) -> Sigma {
        Sigma {
            k: 0.5 * (self.k + other.k),
            a0: 0.5 * (self.a0 + other.a0),
            pe: 0.5 * (self.pe + other.pe),
        }
    }
}

/// Smooth closed-form profile in physical coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Constant { value: f64 },
    /// `intercept + slope * x`.
    Linear { intercept: f64, slope: f64 },
    /// `base + amplitude * exp(-rate * (x - center)^2)`; `rate` may be negative.
    Gaussian { base: f64, amplitude: f64, center: f64, rate: f64 },
    /// Continuous piecewise-linear interpolant, held constant outside the knots.
    Tabulated { xs: Vec<f64>, ys: Vec<f64> },
}

impl Profile {
    pub fn constant(value: f64) -> Self {
        Profile::Constant { value }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            Profile::Constant { value } => *value,
            Profile::Linear { intercept, slope } => intercept + slope * x,
            Profile::Gaussian { base, amplitude, center, rate } => {
                let d = x - center;
                base + amplitude * (-rate * d * d).exp()
            }
            Profile::Tabulated { xs, ys } => {
                let (j, t) = locate(xs, x);
                if xs.len() == 1 {
                    ys[0]
                } else {
                    ys[j] + t * (ys[j + 1] - ys[j])
                }
            }
        }
    }

    pub fn d1(&self, x: f64) -> f64 {
        match self {
            Profile::Constant { .. } => 0.0,
            Profile::Linear { slope, .. } => *slope,
            Profile::Gaussian { amplitude, center, rate, .. } => {
                let d = x - center;
                amplitude * (-rate * d * d).exp() * (-2.0 * rate * d)
            }
            Profile::Tabulated { xs, ys } => {
                if xs.len() < 2 || x < xs[0] || x > xs[xs.len() - 1] {
                    return 0.0;
                }
                let (j, _) = locate(xs, x);
                (ys[j + 1] - ys[j]) / (xs[j + 1] - xs[j])
            }
        }
    }

    pub fn d2(&self, x: f64) -> f64 {
        match self {
            Profile::Gaussian { amplitude, center, rate, .. } => {
                let d = x - center;
                amplitude * (-rate * d * d).exp() * (4.0 * rate * rate * d * d - 2.0 * rate)
            }
            _ => 0.0,
        }
    }

    /// Exact integral from `a` to `b`; only needed for gravity potentials.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        match self {
            Profile::Constant { value } => value * (b - a),
            Profile::Linear { intercept, slope } => {
                intercept * (b - a) + 0.5 * slope * (b * b - a * a)
            }
            Profile::Tabulated { xs, .. } => {
                // Piecewise linear: split at knots and use the trapezoid rule, which is exact.
                let (lo, hi, sign) = if a <= b { (a, b, 1.0) } else { (b, a, -1.0) };
                let mut pts = vec![lo];
                pts.extend(xs.iter().copied().filter(|&x| x > lo && x < hi));
                pts.push(hi);
                let s: f64 = pts
                    .windows(2)
                    .map(|w| 0.5 * (w[1] - w[0]) * (self.value(w[0]) + self.value(w[1])))
                    .sum();
                sign * s
            }
            Profile::Gaussian { .. } => {
                // Composite Gauss-Legendre; accurate far beyond the needs of the callers.
                let n = 64;
                let h = (b - a) / n as f64;
                let r = 0.5 / 3f64.sqrt();
                (0..n)
                    .map(|j| {
                        let c = a + (j as f64 + 0.5) * h;
                        0.5 * h * (self.value(c - r * h) + self.value(c + r * h))
                    })
                    .sum()
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if let Profile::Tabulated { xs, ys } = self {
            if xs.is_empty() || xs.len() != ys.len() {
                return Err(Error::InvalidParameter(
                    "tabulated profile needs matching, non-empty abscissae and values".into(),
                ));
            }
            if xs.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidParameter(
                    "tabulated profile abscissae must be strictly increasing".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Segment index and local fraction for piecewise-linear lookup.
fn locate(xs: &[f64], x: f64) -> (usize, f64) {
    let n = xs.len();
    if n < 2 || x <= xs[0] {
        return (0, 0.0);
    }
    if x >= xs[n - 1] {
        return (n - 2, 1.0);
    }
    let j = xs.partition_point(|&v| v <= x) - 1;
    let j = j.min(n - 2);
    (j, (x - xs[j]) / (xs[j + 1] - xs[j]))
}

/// Piecewise-smooth field with jumps at `breaks`, optionally viewed in scaled coordinates.
///
/// In scaled form the field returns `v_scale * f(x * x_scale)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseField {
    breaks: Vec<f64>,
    pieces: Vec<Profile>,
    x_scale: f64,
    v_scale: f64,
}

impl PiecewiseField {
    pub fn smooth(profile: Profile) -> Result<Self> {
        Self::new(Vec::new(), vec![profile])
    }

    pub fn constant(value: f64) -> Self {
        Self {
            breaks: Vec::new(),
            pieces: vec![Profile::constant(value)],
            x_scale: 1.0,
            v_scale: 1.0,
        }
    }

    /// `pieces[j]` is active on `[breaks[j-1], breaks[j])`.
    pub fn new(breaks: Vec<f64>, pieces: Vec<Profile>) -> Result<Self> {
        if pieces.len() != breaks.len() + 1 {
            return Err(Error::InvalidParameter(format!(
                "piecewise field needs {} pieces for {} breaks, got {}",
                breaks.len() + 1,
                breaks.len(),
                pieces.len()
            )));
        }
        if breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("break points must be increasing".into()));
        }
        for p in &pieces {
            p.validate()?;
        }
        Ok(Self { breaks, pieces, x_scale: 1.0, v_scale: 1.0 })
    }

    /// Two constants with a jump at `at`.
    pub fn step(left: f64, right: f64, at: f64) -> Self {
        Self {
            breaks: vec![at],
            pieces: vec![Profile::constant(left), Profile::constant(right)],
            x_scale: 1.0,
            v_scale: 1.0,
        }
    }

    pub fn with_scaling(&self, x_scale: f64, v_scale: f64) -> Self {
        Self {
            breaks: self.breaks.clone(),
            pieces: self.pieces.clone(),
            x_scale: self.x_scale * x_scale,
            v_scale: self.v_scale * v_scale,
        }
    }

    /// Break points in this field's own coordinates.
    pub fn breaks(&self) -> Vec<f64> {
        self.breaks.iter().map(|b| b / self.x_scale).collect()
    }

    pub fn pieces(&self) -> &[Profile] {
        &self.pieces
    }

    /// Index of the piece containing `x`; a point on a break belongs to the right piece.
    pub fn piece_at(&self, x: f64) -> usize {
        let xp = x * self.x_scale;
        self.breaks.partition_point(|&b| b <= xp)
    }

    pub fn value_on(&self, piece: usize, x: f64) -> f64 {
        self.v_scale * self.pieces[piece].value(x * self.x_scale)
    }

    pub fn d1_on(&self, piece: usize, x: f64) -> f64 {
        self.v_scale * self.x_scale * self.pieces[piece].d1(x * self.x_scale)
    }

    pub fn d2_on(&self, piece: usize, x: f64) -> f64 {
        self.v_scale * self.x_scale * self.x_scale * self.pieces[piece].d2(x * self.x_scale)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.value_on(self.piece_at(x), x)
    }

    pub fn d1(&self, x: f64) -> f64 {
        self.d1_on(self.piece_at(x), x)
    }

    /// Exact integral over `[a, b]` for a field without breaks.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let piece = self.piece_at(0.5 * (a + b));
        self.v_scale * self.pieces[piece].integral(a * self.x_scale, b * self.x_scale)
            / self.x_scale
    }
}

/// Stiffness, reference area, external pressure and gravity along one vessel.
#[derive(Debug, Clone, PartialEq)]
pub struct VesselProperties {
    pub k: PiecewiseField,
    pub a0: PiecewiseField,
    pub pe: PiecewiseField,
    /// Tangential gravity component; must be continuous.
    pub g: PiecewiseField,
    breaks: Vec<f64>,
    /// Piece indices of `(k, a0, pe)` on each segment between breaks.
    segments: Vec<[usize; 3]>,
}

impl VesselProperties {
    pub fn new(
        k: PiecewiseField,
        a0: PiecewiseField,
        pe: PiecewiseField,
        g: PiecewiseField,
    ) -> Result<Self> {
        if !g.breaks.is_empty() {
            return Err(Error::InvalidParameter("gravity must not have jumps".into()));
        }
        let mut breaks: Vec<f64> = k.breaks();
        breaks.extend(a0.breaks());
        breaks.extend(pe.breaks());
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1e-300));
        let segments = (0..=breaks.len())
            .map(|s| {
                // Any point strictly inside the segment identifies the pieces.
                let x = match (s, breaks.len()) {
                    (_, 0) => 0.0,
                    (0, _) => breaks[0] - 1.0,
                    (s, n) if s == n => breaks[n - 1] + 1.0,
                    (s, _) => 0.5 * (breaks[s - 1] + breaks[s]),
                };
                [k.piece_at(x), a0.piece_at(x), pe.piece_at(x)]
            })
            .collect();
        Ok(Self { k, a0, pe, g, breaks, segments })
    }

    /// Constant properties, zero gravity.
    pub fn uniform(k: f64, a0: f64, pe: f64) -> Self {
        Self::new(
            PiecewiseField::constant(k),
            PiecewiseField::constant(a0),
            PiecewiseField::constant(pe),
            PiecewiseField::constant(0.0),
        )
        .expect("constant fields are valid")
    }

    /// Positions of property jumps, in this object's coordinates.
    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn segment_at(&self, x: f64) -> usize {
        self.breaks.partition_point(|&b| b <= x)
    }

    pub fn sigma_on(&self, segment: usize, x: f64) -> Sigma {
        let [pk, pa, pp] = self.segments[segment];
        Sigma {
            k: self.k.value_on(pk, x),
            a0: self.a0.value_on(pa, x),
            pe: self.pe.value_on(pp, x),
        }
    }

    pub fn dsigma_on(&self, segment: usize, x: f64) -> Sigma {
        let [pk, pa, pp] = self.segments[segment];
        Sigma { k: self.k.d1_on(pk, x), a0: self.a0.d1_on(pa, x), pe: self.pe.d1_on(pp, x) }
    }

    pub fn d2sigma_on(&self, segment: usize, x: f64) -> Sigma {
        let [pk, pa, pp] = self.segments[segment];
        Sigma { k: self.k.d2_on(pk, x), a0: self.a0.d2_on(pa, x), pe: self.pe.d2_on(pp, x) }
    }

    pub fn sigma(&self, x: f64) -> Sigma {
        self.sigma_on(self.segment_at(x), x)
    }

    pub fn dsigma(&self, x: f64) -> Sigma {
        self.dsigma_on(self.segment_at(x), x)
    }

    pub fn gravity(&self, x: f64) -> f64 {
        self.g.value_on(0, x)
    }

    pub fn dgravity(&self, x: f64) -> f64 {
        self.g.d1_on(0, x)
    }

    /// Scaled view: `x' = x / length`, `K' = K * k_scale`, and so on.
    pub fn scaled(
        &self,
        length: f64,
        k_scale: f64,
        a0_scale: f64,
        pe_scale: f64,
        g_scale: f64,
    ) -> Self {
        Self::new(
            self.k.with_scaling(length, k_scale),
            self.a0.with_scaling(length, a0_scale),
            self.pe.with_scaling(length, pe_scale),
            self.g.with_scaling(length, g_scale),
        )
        .expect("scaling preserves validity")
    }
}
