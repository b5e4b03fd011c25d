//! Network description table and the incidence structure derived from it.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

/// Three-element Windkessel parameters (CGS).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcrParams {
    pub r_prox: f64,
    pub r_dist: f64,
    pub compliance: f64,
}

/// One row of the table: a 1D domain between two nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct VesselRecord {
    pub name: String,
    pub inlet: usize,
    pub outlet: usize,
    /// Length [cm].
    pub length: f64,
    /// Reference radius [cm].
    pub radius: f64,
    /// Terminal model; `None` for internal vessels.
    pub rcr: Option<RcrParams>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NetworkTable {
    pub vessels: Vec<VesselRecord>,
}

fn field<T: std::str::FromStr>(s: &str, what: &str, line: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e| Error::Network(format!("line {line}: bad {what} '{s}': {e}")))
}

impl NetworkTable {
    /// Whitespace-separated columns `name inlet outlet length radius r_prox r_dist compliance`,
    /// with `-` in the last three for internal vessels. `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut vessels = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let ln = n + 1;
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 8 {
                return Err(Error::Network(format!("line {ln}: expected 8 columns, found {}", cols.len())));
            }
            let rcr = match (cols[5], cols[6], cols[7]) {
                ("-", "-", "-") => None,
                (a, b, c) if a != "-" && b != "-" && c != "-" => Some(RcrParams {
                    r_prox: field(a, "proximal resistance", ln)?,
                    r_dist: field(b, "distal resistance", ln)?,
                    compliance: field(c, "compliance", ln)?,
                }),
                _ => return Err(Error::Network(format!("line {ln}: incomplete terminal model"))),
            };
            let v = VesselRecord {
                name: cols[0].to_string(),
                inlet: field(cols[1], "inlet node", ln)?,
                outlet: field(cols[2], "outlet node", ln)?,
                length: field(cols[3], "length", ln)?,
                radius: field(cols[4], "radius", ln)?,
                rcr,
            };
            if !(v.length > 0.0 && v.radius > 0.0) {
                return Err(Error::Network(format!("line {ln}: length and radius must be positive")));
            }
            if v.inlet == v.outlet {
                return Err(Error::Network(format!("line {ln}: vessel connects node {} to itself", v.inlet)));
            }
            if let Some(r) = &v.rcr {
                if !(r.r_prox > 0.0 && r.r_dist > 0.0 && r.compliance > 0.0) {
                    return Err(Error::Network(format!("line {ln}: terminal parameters must be positive")));
                }
            }
            vessels.push(v);
        }
        if vessels.is_empty() {
            return Err(Error::Network("network table has no vessels".into()));
        }
        Ok(Self { vessels })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn terminal_count(&self) -> usize {
        self.vessels.iter().filter(|v| v.rcr.is_some()).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum End {
    Inlet,
    Outlet,
}

impl End {
    /// Orientation sign: `+1` at the outlet (`x = L`), `-1` at the inlet.
    pub fn sign(self) -> f64 {
        match self {
            End::Inlet => -1.0,
            End::Outlet => 1.0,
        }
    }
}

/// Vessel ends meeting at each node.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    ids: Vec<usize>,
    incident: Vec<Vec<(usize, End)>>,
}

impl Topology {
    pub fn new(table: &NetworkTable) -> Self {
        let mut map: BTreeMap<usize, Vec<(usize, End)>> = BTreeMap::new();
        for (k, v) in table.vessels.iter().enumerate() {
            map.entry(v.inlet).or_default().push((k, End::Inlet));
            map.entry(v.outlet).or_default().push((k, End::Outlet));
        }
        let (ids, incident) = map.into_iter().unzip();
        Self { ids, incident }
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    /// Dense index of the node with label `id`.
    pub fn node_index(&self, id: usize) -> usize {
        self.ids.binary_search(&id).expect("node of the table")
    }

    pub fn try_node_index(&self, id: usize) -> Option<usize> {
        self.ids.binary_search(&id).ok()
    }

    pub fn node_id(&self, index: usize) -> usize {
        self.ids[index]
    }

    pub fn incident(&self, index: usize) -> &[(usize, End)] {
        &self.incident[index]
    }

    /// Nodes with a single vessel end.
    pub fn leaves(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&k| self.incident[k].len() == 1).collect()
    }

    /// Nodes shared by two or more vessel ends.
    pub fn junctions(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&k| self.incident[k].len() >= 2).collect()
    }

    fn other_end(table: &NetworkTable, vessel: usize, end: End) -> usize {
        match end {
            End::Inlet => table.vessels[vessel].outlet,
            End::Outlet => table.vessels[vessel].inlet,
        }
    }

    /// Shortest path length (along vessels) from `root` to every node; infinite when unreachable.
    pub fn path_distances(&self, table: &NetworkTable, root: usize) -> Vec<f64> {
        let n = self.node_count();
        let mut dist = vec![f64::INFINITY; n];
        let mut done = vec![false; n];
        dist[root] = 0.0;
        for _ in 0..n {
            let Some(u) = (0..n).filter(|&k| !done[k] && dist[k].is_finite()).min_by(|&a, &b| dist[a].total_cmp(&dist[b]))
            else {
                break;
            };
            done[u] = true;
            for &(v, end) in &self.incident[u] {
                let w = self.node_index(Self::other_end(table, v, end));
                let d = dist[u] + table.vessels[v].length;
                if d < dist[w] {
                    dist[w] = d;
                }
            }
        }
        dist
    }

    pub fn is_connected(&self, table: &NetworkTable) -> bool {
        self.path_distances(table, 0).iter().all(|d| d.is_finite())
    }

    /// Number of independent cycles, `E - V + 1` for a connected graph.
    pub fn cycle_count(&self, table: &NetworkTable) -> usize {
        (table.vessels.len() + 1).saturating_sub(self.node_count())
    }
}
