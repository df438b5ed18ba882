use super::params::Params;
use super::state::State;
use crate::cover::principal_root;
use crate::error::Result;
use crate::geom::Vec2;
use crate::lifting::{cell_winding, is_jump, jordan_decompose, Contacts, Decomposition, EdgeSet, Grid, GridField};
use serde::Serialize;

/// Wall edges of `M` chained into polylines.
#[derive(Clone, Debug, Serialize)]
pub struct WallReport {
    #[serde(skip)]
    pub edges: EdgeSet,
    #[serde(skip)]
    pub decomposition: Decomposition,
    /// Arcs first (cell center, dual-edge midpoints, cell center), then closed loops.
    pub polylines: Vec<Vec<Vec2>>,
    /// Anisotropy-corrected length of all polylines.
    pub length: f64,
    /// Cells with nonzero q-winding; walls may end there.
    pub defect_cells: Vec<usize>,
    /// Cells left with an odd number of wall sides by the `|u1|` threshold,
    /// tagged as extra endpoints.
    pub irregular_cells: Vec<usize>,
}

impl WallReport {
    /// The longest polyline, if any.
    pub fn main_polyline(&self) -> Option<&[Vec2]> {
        self.polylines
            .iter()
            .max_by(|a, b| poly_len(a).total_cmp(&poly_len(b)))
            .map(|p| p.as_slice())
    }
}

fn poly_len(p: &[Vec2]) -> f64 {
    p.windows(2).map(|w| w[0].dist(w[1])).sum()
}

/// Marks lattice edges across which `u1 = M . n` changes sign, with the frame
/// `n` continued from one end to the other, and `min |u1| < lambda / 2`.
/// Edges with a vanishing `q` at either end are skipped.
pub fn detect_wall(state: &State, p: &Params) -> Result<WallReport> {
    let g = state.grid();
    let (q, m) = (&state.q.values, &state.m.values);
    let mut edges = EdgeSet::empty(g);
    for e in g.mask_edges() {
        let (a, b) = g.edge_nodes(e);
        if q[a].norm2() == 0.0 || q[b].norm2() == 0.0 {
            continue;
        }
        let na = principal_root(q[a].normalized());
        let rb = principal_root(q[b].normalized());
        let nb = if is_jump(na, rb) { -rb } else { rb };
        let (ua, ub) = (m[a].dot(na), m[b].dot(nb));
        if crosses(ua, ub, p.lambda) {
            edges.insert(g, e);
        }
    }
    let defects: Vec<usize> = (0..g.cell_count())
        .filter(|&c| cell_winding(&state.q, c).is_some_and(|w| w != 0))
        .collect();
    chain(g, edges, defects)
}

/// Wall of a globally defined frame-coordinate field: edges where `u1`
/// changes sign with `min |u1| < lambda / 2`.
pub fn detect_wall_u(u: &GridField, lambda: f64) -> Result<WallReport> {
    let g = &u.grid;
    let mut edges = EdgeSet::empty(g);
    for e in g.mask_edges() {
        let (a, b) = g.edge_nodes(e);
        let (ua, ub) = (u.values[a].x, u.values[b].x);
        if crosses(ua, ub, lambda) {
            edges.insert(g, e);
        }
    }
    chain(g, edges, Vec::new())
}

/// Sign change with zero counted as positive, through the valley `|u1| < lambda / 2`.
fn crosses(ua: f64, ub: f64, lambda: f64) -> bool {
    (ua >= 0.0) != (ub >= 0.0) && ua.abs().min(ub.abs()) < 0.5 * lambda
}

fn chain(g: &Grid, edges: EdgeSet, defect_cells: Vec<usize>) -> Result<WallReport> {
    let mut contacts = Contacts::new(g, None, &defect_cells);
    let mut irregular = Vec::new();
    for c in 0..g.cell_count() {
        let deg = g.cell_sides(c).iter().filter(|&&e| edges.contains(g, e)).count();
        if deg % 2 == 1 && contacts.get(c).is_none() {
            irregular.push(c);
        }
    }
    if !irregular.is_empty() {
        let mut all = defect_cells.clone();
        all.extend_from_slice(&irregular);
        contacts = Contacts::new(g, None, &all);
    }
    let decomposition = jordan_decompose(g, &edges, &contacts)?;
    let mut polylines = Vec::new();
    for a in &decomposition.arcs {
        let mut pts = vec![g.cell_center(a.start.0)];
        pts.extend(a.edges.iter().map(|&e| g.edge_midpoint(e)));
        pts.push(g.cell_center(a.end.0));
        polylines.push(pts);
    }
    for (es, _) in &decomposition.loops {
        let mut pts: Vec<Vec2> = es.iter().map(|&e| g.edge_midpoint(e)).collect();
        pts.push(pts[0]);
        polylines.push(pts);
    }
    Ok(WallReport {
        length: decomposition.corrected_length(g),
        edges,
        decomposition,
        polylines,
        defect_cells,
        irregular_cells: irregular,
    })
}
