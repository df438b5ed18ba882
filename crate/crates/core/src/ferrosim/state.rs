use crate::error::{Error, Result};
use crate::geom::{Domain, Vec2};
use crate::lifting::{Grid, GridField};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Dirichlet data for `q` on the lattice boundary nodes.
///
/// The director datum has angle `d * 2 pi s / perimeter + phase(s)` at arc
/// length `s`; the q-datum is its square. Each boundary node takes the datum
/// at the foot of its nearest boundary point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryDatum {
    pub degree: i32,
    /// Boundary nodes sorted by the arc length of their feet.
    pub nodes: Vec<usize>,
    pub arcs: Vec<f64>,
    pub values: Vec<Vec2>,
}

impl BoundaryDatum {
    pub fn fixed_mask(&self, g: &Grid) -> Vec<bool> {
        let mut m = vec![false; g.len()];
        for &k in &self.nodes {
            m[k] = true;
        }
        m
    }

    /// Values written into a node-indexed array.
    pub fn install(&self, q: &mut [Vec2]) {
        for (&k, &v) in self.nodes.iter().zip(&self.values) {
            q[k] = v;
        }
    }
}

pub fn boundary_datum(domain: &Domain, g: &Grid, d: i32, phase: impl Fn(f64) -> f64) -> BoundaryDatum {
    let per = domain.perimeter();
    datum_from_angle(domain, g, d * 2, |s| 2.0 * (d as f64 * TAU * s / per + phase(s)))
}

/// Datum with q-angle `angle(s)`; `q_winding` is recorded as twice the degree field.
fn datum_from_angle(domain: &Domain, g: &Grid, q_winding: i32, angle: impl Fn(f64) -> f64) -> BoundaryDatum {
    let bd = g.boundary_nodes();
    let mut rows: Vec<(f64, usize)> = (0..g.len())
        .filter(|&k| bd[k])
        .map(|k| (domain.boundary_projection(g.node_pos(k)).arc, k))
        .collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let values = rows.iter().map(|&(s, _)| Vec2::from_angle(angle(s))).collect();
    BoundaryDatum {
        degree: q_winding.div_euclid(2),
        nodes: rows.iter().map(|r| r.1).collect(),
        arcs: rows.iter().map(|r| r.0).collect(),
        values,
    }
}

/// Domain, q-winding and constant director phase offset of the boundary datum.
///
/// The director datum of degree `d` has q-winding `2d`. Odd q-windings
/// describe q-maps that do not come from a director datum; they are allowed
/// for harmonic-map experiments.
#[derive(Clone, Debug)]
pub struct Problem {
    pub domain: Domain,
    pub q_winding: i32,
    pub phase: f64,
}

impl Problem {
    /// Director datum of degree `degree`.
    pub fn new(domain: Domain, degree: i32, phase: f64) -> Self {
        Self::with_q_winding(domain, 2 * degree, phase)
    }

    pub fn with_q_winding(domain: Domain, q_winding: i32, phase: f64) -> Self {
        Self {
            domain,
            q_winding,
            phase,
        }
    }

    /// Director degree, `None` for odd q-windings.
    pub fn degree(&self) -> Option<i32> {
        (self.q_winding % 2 == 0).then_some(self.q_winding / 2)
    }

    pub fn grid(&self, n: usize) -> Result<Grid> {
        Grid::for_domain(&self.domain, n)
    }

    /// Angle of the q-datum at arc length `s`, continuous in `s`.
    pub fn q_angle(&self, s: f64) -> f64 {
        self.q_winding as f64 * TAU * s / self.domain.perimeter() + 2.0 * self.phase
    }

    pub fn datum(&self, g: &Grid) -> BoundaryDatum {
        datum_from_angle(&self.domain, g, self.q_winding, |s| self.q_angle(s))
    }
}

/// Lattice state: the q-vector of `Q` and the magnetization `M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub q: GridField,
    pub m: GridField,
    /// Nodes carrying the Dirichlet datum for `q`.
    pub fixed: Vec<bool>,
}

impl State {
    /// Builds a state and writes the datum into `q`.
    pub fn new(mut q: GridField, m: GridField, datum: &BoundaryDatum) -> Result<Self> {
        if q.grid != m.grid {
            return Err(Error::Input("q and M live on different grids".into()));
        }
        datum.install(&mut q.values);
        let fixed = datum.fixed_mask(&q.grid);
        Ok(Self { q, m, fixed })
    }

    pub fn grid(&self) -> &Grid {
        &self.q.grid
    }

    /// Constant state `(q0, m0)` off the boundary.
    pub fn constant(g: &Grid, datum: &BoundaryDatum, q0: Vec2, m0: Vec2) -> Result<Self> {
        Self::new(GridField::constant(g, q0), GridField::constant(g, m0), datum)
    }

    /// Bilinear transfer to another grid of the same domain; the datum is reinstalled.
    pub fn resample(&self, g: &Grid, datum: &BoundaryDatum) -> Result<Self> {
        let q = GridField::from_fn(g, |x| sample(&self.q, x));
        let m = GridField::from_fn(g, |x| sample(&self.m, x));
        Self::new(q, m, datum)
    }
}

/// Bilinear interpolation over masked corners, renormalized by the weight of
/// the corners present; falls back to the nearest masked node.
pub fn sample(f: &GridField, x: Vec2) -> Vec2 {
    let g = &f.grid;
    let u = ((x.x - g.origin.x) / g.h).clamp(0.0, (g.nx - 1) as f64 - 1e-9);
    let v = ((x.y - g.origin.y) / g.h).clamp(0.0, (g.ny - 1) as f64 - 1e-9);
    let (i, j) = (u.floor() as usize, v.floor() as usize);
    let (a, b) = (u - i as f64, v - j as f64);
    let corners = [
        (g.idx(i, j), (1.0 - a) * (1.0 - b)),
        (g.idx(i + 1, j), a * (1.0 - b)),
        (g.idx(i, j + 1), (1.0 - a) * b),
        (g.idx(i + 1, j + 1), a * b),
    ];
    let mut acc = Vec2::new(0.0, 0.0);
    let mut w = 0.0;
    for (k, c) in corners {
        if g.mask[k] {
            acc = acc + f.values[k] * c;
            w += c;
        }
    }
    if w > 1e-12 {
        return acc / w;
    }
    match nearest_masked(g, x) {
        Some(k) => f.values[k],
        None => Vec2::new(0.0, 0.0),
    }
}

fn nearest_masked(g: &Grid, x: Vec2) -> Option<usize> {
    (0..g.len())
        .filter(|&k| g.mask[k])
        .min_by(|&a, &b| g.node_pos(a).dist(x).total_cmp(&g.node_pos(b).dist(x)))
}
