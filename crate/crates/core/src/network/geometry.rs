//! Vessel geometry: wall stiffness from radius, 3D centrelines, gravity
//! projected on them, and a synthetic upright body layout for networks that
//! ship without centreline data.

use nalgebra::{DMatrix, DVector, Vector3};

use super::topology::{NetworkTable, Topology};
use crate::error::{Error, Result};
use crate::properties::Profile;

/// Wall-thickness law `h0 / R0 = a exp(b R0) + c exp(d R0)` (R0 in cm).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallLaw {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    /// Young modulus [dyn/cm^2].
    pub young: f64,
    pub poisson: f64,
}

impl Default for WallLaw {
    fn default() -> Self {
        Self { a: 0.2802, b: -5.053, c: 0.1324, d: -0.1114, young: 2e6, poisson: 0.5 }
    }
}

impl WallLaw {
    pub fn thickness_ratio(&self, r0: f64) -> f64 {
        self.a * (self.b * r0).exp() + self.c * (self.d * r0).exp()
    }

    /// `K = E h0 / ((1 - nu^2) R0)`.
    pub fn stiffness(&self, r0: f64) -> Result<f64> {
        if !(r0 > 0.0) {
            return Err(Error::InvalidParameter(format!("reference radius must be positive, got {r0}")));
        }
        Ok(self.young * self.thickness_ratio(r0) / (1.0 - self.poisson * self.poisson))
    }
}

/// Venous pressure offset of a terminal at height difference `dh` below the
/// root (`dh > 0` means below): `rho g dh`.
pub fn venous_offset(dh: f64, rho: f64, g: f64) -> f64 {
    rho * g * dh
}

/// Ordered centreline points.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub points: Vec<Vector3<f64>>,
}

impl Polyline {
    pub fn new(points: Vec<Vector3<f64>>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidParameter("a polyline needs at least two points".into()));
        }
        Ok(Self { points })
    }

    /// One point per line, three whitespace- or comma-separated coordinates;
    /// blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let v: Vec<f64> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Network(format!("polyline line {}: {e}", n + 1)))?;
            if v.len() != 3 {
                return Err(Error::Network(format!("polyline line {}: expected 3 coordinates", n + 1)));
            }
            points.push(Vector3::new(v[0], v[1], v[2]));
        }
        Self::new(points)
    }

    /// Non-degenerate segments as `(start, unit direction, length)`.
    fn segments(&self) -> Vec<(Vector3<f64>, Vector3<f64>, f64)> {
        self.points
            .windows(2)
            .filter_map(|w| {
                let d = w[1] - w[0];
                let l = d.norm();
                (l > 0.0).then(|| (w[0], d / l, l))
            })
            .collect()
    }

    pub fn arc_length(&self) -> f64 {
        self.segments().iter().map(|s| s.2).sum()
    }

    pub fn start(&self) -> Vector3<f64> {
        self.points[0]
    }

    pub fn end(&self) -> Vector3<f64> {
        self.points[self.points.len() - 1]
    }

    /// Unit tangents at the vertices (mean of adjacent segment directions)
    /// with their arc-length positions.
    fn vertex_tangents(&self) -> Vec<(f64, Vector3<f64>)> {
        let segs = self.segments();
        let mut out = Vec::with_capacity(segs.len() + 1);
        let mut s = 0.0;
        for k in 0..=segs.len() {
            let t = match k {
                0 => segs[0].1,
                k if k == segs.len() => segs[k - 1].1,
                k => {
                    let m = segs[k - 1].1 + segs[k].1;
                    if m.norm() > 0.0 {
                        m.normalize()
                    } else {
                        segs[k].1
                    }
                }
            };
            out.push((s, t));
            if k < segs.len() {
                s += segs[k].2;
            }
        }
        out
    }

    /// Tangential component of the field `gravity` (e.g. `(0, 0, -981)`) as a
    /// continuous piecewise-linear function of arc length scaled to `length`,
    /// with knots at `knots` (increasing, from 0 to `length`; typically the
    /// cell interfaces, so that `g` is linear inside every cell).
    ///
    /// Knot values come from vertex tangents interpolated in arc length, then
    /// shifted by one constant so that the integral over the vessel equals
    /// `gravity . (end - start)` exactly. That keeps the hydrostatic pressure
    /// path independent around closed loops.
    pub fn gravity_profile(&self, gravity: Vector3<f64>, length: f64, knots: &[f64]) -> Result<Profile> {
        let segs = self.segments();
        if segs.is_empty() {
            return Err(Error::InvalidParameter("polyline has zero length".into()));
        }
        if knots.len() < 2 || knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("gravity knots must be increasing, at least two".into()));
        }
        let vt = self.vertex_tangents();
        let total: f64 = segs.iter().map(|s| s.2).sum();
        let scale = length / total;
        let value_at = |x: f64| -> f64 {
            let s = (x / scale).clamp(0.0, total);
            let k = vt.partition_point(|v| v.0 <= s).clamp(1, vt.len() - 1);
            let (s0, t0) = vt[k - 1];
            let (s1, t1) = vt[k];
            let f = if s1 > s0 { (s - s0) / (s1 - s0) } else { 0.0 };
            gravity.dot(&(t0 + (t1 - t0) * f))
        };
        let xs = knots.to_vec();
        let mut ys: Vec<f64> = xs.iter().map(|&x| value_at(x)).collect();
        let last = xs.len() - 1;
        let span = xs[last] - xs[0];
        let trapezoid: f64 = (0..last).map(|k| 0.5 * (xs[k + 1] - xs[k]) * (ys[k] + ys[k + 1])).sum();
        let exact = gravity.dot(&(self.end() - self.start())) * scale;
        let shift = (exact - trapezoid) / span;
        for y in &mut ys {
            *y += shift;
        }
        Ok(Profile::Tabulated { xs, ys })
    }
}

/// Curve from `a` to `b` bowed in the vertical plane through the chord, with
/// arc length `length` (to 1e-12) over `segments` pieces.
pub fn bowed_polyline(a: Vector3<f64>, b: Vector3<f64>, length: f64, segments: usize) -> Result<Polyline> {
    let d = b - a;
    let chord = d.norm();
    if !(chord < length) {
        return Err(Error::Network(format!("chord {chord} does not fit in a vessel of length {length}")));
    }
    let ez = Vector3::z();
    let dir = if chord > 0.0 { d / chord } else { Vector3::x() };
    let perp = ez - dir * ez.dot(&dir);
    let normal = if perp.norm() > 1e-9 { perp.normalize() } else { Vector3::x() };
    let n = segments.max(2);
    let build = |w: f64| -> Vec<Vector3<f64>> {
        (0..=n)
            .map(|k| {
                let s = k as f64 / n as f64;
                a + d * s + normal * (w * (std::f64::consts::PI * s).sin())
            })
            .collect()
    };
    let len = |w: f64| build(w).windows(2).map(|p| (p[1] - p[0]).norm()).sum::<f64>();
    let (mut lo, mut hi) = (0.0, length);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if len(mid) < length {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * length {
            break;
        }
    }
    Polyline::new(build(0.5 * (lo + hi)))
}

/// Intended course of a vessel in an upright body, by anatomical name:
/// `(pitch, heading)` where `pitch` is the sine of the elevation angle when
/// moving away from the heart and `heading` the horizontal direction angle.
fn course(name: &str) -> (f64, f64) {
    let n = name.to_ascii_lowercase();
    let has = |k: &str| n.contains(k);
    let side = if n.contains("_l_") || n.ends_with("_l") {
        0.0
    } else if n.contains("_r_") || n.ends_with("_r") {
        std::f64::consts::PI
    } else {
        0.5 * std::f64::consts::PI
    };
    let pitch = if has("aortic_arch") {
        0.1
    } else if has("thoracic_aorta") || has("abdominal_aorta") {
        -0.95
    } else if has("iliac") {
        -0.8
    } else if has("femoral") || has("popliteal") || has("tibial") || has("tibiofibular") {
        -0.95
    } else if has("brachiocephalic") {
        0.6
    } else if has("subclavian") {
        0.2
    } else if has("axillary") {
        -0.4
    } else if has("brachial") || has("radial") || has("ulnar") || has("inteross") {
        -0.9
    } else if has("carotid") || has("vertebral") {
        0.9
    } else if has("basilar") {
        0.5
    } else if has("cerebral") || has("communicating") {
        0.1
    } else if has("intercostal") {
        -0.1
    } else {
        -0.2
    };
    (pitch, side)
}

/// Weighted least-squares node positions: each vessel asks for a displacement
/// of 0.8 of its length along its intended course, and loops are closed by
/// compromise. Node `root` sits at the origin.
fn layout_nodes(table: &NetworkTable, topo: &Topology, root: usize) -> Result<Vec<Vector3<f64>>> {
    let nodes = topo.node_count();
    let depth = topo.path_distances(table, root);
    let unknown: Vec<usize> = (0..nodes).filter(|&k| k != root).collect();
    let index = |k: usize| unknown.iter().position(|&u| u == k);
    let m = unknown.len();
    let mut lhs = DMatrix::<f64>::zeros(m, m);
    let mut rhs = DMatrix::<f64>::zeros(m, 3);
    for v in &table.vessels {
        let (a, b) = (topo.node_index(v.inlet), topo.node_index(v.outlet));
        // Orient away from the root.
        let (from, to) = if depth[a] <= depth[b] { (a, b) } else { (b, a) };
        let (pitch, heading) = course(&v.name);
        let horiz = (1.0 - pitch * pitch).sqrt();
        let want = Vector3::new(horiz * heading.cos(), horiz * heading.sin(), pitch) * (0.8 * v.length);
        let w = 1.0 / v.length;
        let (ia, ib) = (index(from), index(to));
        if let Some(i) = ia {
            lhs[(i, i)] += w;
        }
        if let Some(j) = ib {
            lhs[(j, j)] += w;
        }
        if let (Some(i), Some(j)) = (ia, ib) {
            lhs[(i, j)] -= w;
            lhs[(j, i)] -= w;
        }
        for c in 0..3 {
            if let Some(j) = ib {
                rhs[(j, c)] += w * want[c];
            }
            if let Some(i) = ia {
                rhs[(i, c)] -= w * want[c];
            }
        }
    }
    let chol = lhs
        .cholesky()
        .ok_or_else(|| Error::Network("network is not connected".into()))?;
    let sol = chol.solve(&rhs);
    let mut pos = vec![Vector3::zeros(); nodes];
    for (r, &k) in unknown.iter().enumerate() {
        pos[k] = Vector3::new(sol[(r, 0)], sol[(r, 1)], sol[(r, 2)]);
    }
    // Loops can stretch a vessel beyond its length; pull such chords back to
    // MAX_CHORD of the length by alternating projections (root held fixed).
    for _ in 0..10_000 {
        let mut worst: f64 = 0.0;
        for v in &table.vessels {
            let (a, b) = (topo.node_index(v.inlet), topo.node_index(v.outlet));
            let d = pos[b] - pos[a];
            let chord = d.norm();
            let limit = MAX_CHORD * v.length;
            if chord <= limit {
                continue;
            }
            worst = worst.max(chord / v.length);
            let excess = d * ((chord - limit) / chord);
            match (a == root, b == root) {
                (true, _) => pos[b] -= excess,
                (_, true) => pos[a] += excess,
                _ => {
                    pos[a] += excess * 0.5;
                    pos[b] -= excess * 0.5;
                }
            }
        }
        if worst <= MAX_CHORD * (1.0 + 1e-9) {
            return Ok(pos);
        }
    }
    Err(Error::Network("synthetic layout could not fit every vessel between its nodes".into()))
}

const MAX_CHORD: f64 = 0.9;

/// Synthetic centrelines of an upright body for every vessel of `table`,
/// each running from its inlet node to its outlet node with the tabulated length.
pub fn synthetic_layout(table: &NetworkTable, topo: &Topology, root: usize) -> Result<Vec<Polyline>> {
    let pos = layout_nodes(table, topo, root)?;
    table
        .vessels
        .iter()
        .map(|v| {
            let (a, b) = (pos[topo.node_index(v.inlet)], pos[topo.node_index(v.outlet)]);
            let segments = ((v.length / 0.25).ceil() as usize).clamp(8, 200);
            bowed_polyline(a, b, v.length, segments)
                .map_err(|e| Error::Network(format!("vessel {}: {e}", v.name)))
        })
        .collect()
}

/// Solves `A x = b` for a small dense system; `None` when singular.
pub(crate) fn dense_solve(a: DMatrix<f64>, b: DVector<f64>) -> Option<DVector<f64>> {
    a.lu().solve(&b)
}
