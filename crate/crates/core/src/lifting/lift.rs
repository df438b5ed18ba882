use super::grid::{Edge, EdgeSet, Grid, GridField, PixelSet};
use super::winding::{cell_winding, detect_singularities};
use crate::connection::{ConnSegment, Connection, EndTag};
use crate::cover::{principal_root, xi};
use crate::error::{Error, Result};
use crate::geom::{orient, Segment, Vec2};
use rand::Rng;
use std::collections::{BTreeMap, VecDeque};

/// Lattice edges crossed by a connection, with the cells each segment's band touches.
#[derive(Clone, Debug)]
pub struct CutBand {
    pub edges: EdgeSet,
    /// Cell id -> indices of the segments whose crossed edges border that cell.
    pub touches: BTreeMap<usize, Vec<usize>>,
}

/// Moves a coordinate off a lattice line, into the cell it floors to.
fn nudge(u: f64) -> f64 {
    let k = u.round();
    if (u - k).abs() < 1e-9 {
        if u >= k {
            k + 1e-6
        } else {
            k - 1e-6
        }
    } else {
        u
    }
}

fn to_lattice(g: &Grid, x: Vec2) -> Vec2 {
    Vec2::new((x.x - g.origin.x) / g.h, (x.y - g.origin.y) / g.h)
}

/// Edges whose endpoints lie on opposite sides of the segment's line, at a
/// crossing inside the segment. Points on the line count as the positive side.
/// Computed in lattice coordinates with endpoints moved off lattice lines.
pub fn rasterize_segment(g: &Grid, s: &Segment) -> Vec<Edge> {
    let p = to_lattice(g, s.p);
    let q = to_lattice(g, s.q);
    let (p, q) = (Vec2::new(nudge(p.x), nudge(p.y)), Vec2::new(nudge(q.x), nudge(q.y)));
    let lo_i = (p.x.min(q.x).floor() as i64 - 1).max(0) as usize;
    let hi_i = ((p.x.max(q.x).ceil() as i64 + 1).max(0) as usize).min(g.nx - 1);
    let lo_j = (p.y.min(q.y).floor() as i64 - 1).max(0) as usize;
    let hi_j = ((p.y.max(q.y).ceil() as i64 + 1).max(0) as usize).min(g.ny - 1);
    let side = |x: Vec2| orient(p, q, x) >= 0.0;
    let mut out = Vec::new();
    for j in lo_j..=hi_j {
        for i in lo_i..=hi_i {
            for axis in 0..2u8 {
                let e = Edge { i, j, axis };
                if (axis == 0 && i + 1 >= g.nx) || (axis == 1 && j + 1 >= g.ny) {
                    continue;
                }
                let a = Vec2::new(i as f64, j as f64);
                let b = if axis == 0 { a + Vec2::new(1.0, 0.0) } else { a + Vec2::new(0.0, 1.0) };
                if side(a) == side(b) {
                    continue;
                }
                let (op, oq) = (orient(a, b, p), orient(a, b, q));
                if op == oq {
                    continue;
                }
                let t = op / (op - oq);
                if (0.0..=1.0).contains(&t) {
                    out.push(e);
                }
            }
        }
    }
    out
}

impl CutBand {
    pub fn new(g: &Grid, cuts: &Connection) -> Self {
        let mut edges = EdgeSet::empty(g);
        let mut touches: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (k, cs) in cuts.segments.iter().enumerate() {
            for e in rasterize_segment(g, &cs.segment) {
                if !g.edge_in_mask(e) {
                    continue;
                }
                edges.toggle_id(g.edge_id(e));
                let (c1, c2) = g.edge_cells(e);
                for c in [c1, c2] {
                    let v = touches.entry(c).or_default();
                    if !v.contains(&k) {
                        v.push(k);
                    }
                }
            }
        }
        Self { edges, touches }
    }

    /// Band of `cuts` with each point endpoint moved to the nearest anchor within
    /// two lattice steps. Anchors are detected defect centers, so the band ends
    /// in the cell that carries the winding even when a defect sits on a
    /// lattice line.
    pub fn anchored(g: &Grid, cuts: &Connection, anchors: &[Vec2]) -> Self {
        let snap = |x: Vec2, tag: &EndTag| match tag {
            EndTag::Point(_) => anchors
                .iter()
                .copied()
                .filter(|a| a.dist(x) <= 2.0 * g.h)
                .min_by(|a, b| a.dist(x).total_cmp(&b.dist(x)))
                .unwrap_or(x),
            EndTag::Boundary(_) => x,
        };
        let moved = Connection {
            segments: cuts
                .segments
                .iter()
                .map(|cs| ConnSegment {
                    segment: Segment::new(snap(cs.segment.p, &cs.ends.0), snap(cs.segment.q, &cs.ends.1)),
                    ends: cs.ends,
                })
                .collect(),
            total_length: cuts.total_length,
        };
        Self::new(g, &moved)
    }

    pub fn empty(g: &Grid) -> Self {
        Self {
            edges: EdgeSet::empty(g),
            touches: BTreeMap::new(),
        }
    }

    /// Number of band edges among a cell's sides.
    pub fn cell_degree(&self, g: &Grid, c: usize) -> usize {
        g.cell_sides(c).iter().filter(|&&e| self.edges.contains(g, e)).count()
    }
}

/// Reference lifting of a q-field relative to a cut system.
#[derive(Clone, Debug)]
pub struct Lifting {
    /// Unit directors with `square(v) = q / |q|`.
    pub directors: GridField,
    pub jumps: EdgeSet,
    pub band: CutBand,
    /// Nodes excluded from roundtrip checks: 3x3 node blocks around each detected defect.
    pub core: Vec<bool>,
}

/// Whether the edge `a -> b` is a jump. Orthogonal directors are broken by the
/// sign of the cross product so that flipping one end always toggles the result.
#[inline]
pub fn is_jump(a: Vec2, b: Vec2) -> bool {
    let d = a.dot(b);
    d < 0.0 || (d == 0.0 && a.cross(b) < 0.0)
}

/// Edges between masked nodes whose directors point into opposite half-planes.
pub fn jump_set(directors: &GridField) -> EdgeSet {
    let g = &directors.grid;
    let mut j = EdgeSet::empty(g);
    for e in g.mask_edges() {
        let (a, b) = g.edge_nodes(e);
        if is_jump(directors.values[a], directors.values[b]) {
            j.insert(g, e);
        }
    }
    j
}

fn unit_or_default(q: Vec2) -> Vec2 {
    let r = q.norm();
    if r > 0.0 {
        q / r
    } else {
        Vec2::new(1.0, 0.0)
    }
}

/// Core nodes: the 3x3 block centred at the masked node nearest each defect.
pub fn defect_core(field: &GridField) -> Vec<bool> {
    let g = &field.grid;
    let mut core = vec![false; g.len()];
    for d in detect_singularities(field).defects {
        let u = ((d.center.x - g.origin.x) / g.h).round() as i64;
        let v = ((d.center.y - g.origin.y) / g.h).round() as i64;
        for dj in -1..=1 {
            for di in -1..=1 {
                let (a, b) = (u + di, v + dj);
                if a >= 0 && b >= 0 && (a as usize) < g.nx && (b as usize) < g.ny {
                    core[g.idx(a as usize, b as usize)] = true;
                }
            }
        }
    }
    core
}

/// Breadth-first half-angle continuation on the lattice with cut edges removed.
///
/// Fails with a parity error when a full cell's winding parity differs from
/// the parity of cut edges on its sides.
pub fn construct_lifting(field: &GridField, cuts: &Connection) -> Result<Lifting> {
    let g = &field.grid;
    let anchors: Vec<Vec2> = detect_singularities(field).non_orientable().map(|d| d.center).collect();
    let band = CutBand::anchored(g, cuts, &anchors);
    for c in 0..g.cell_count() {
        if let Some(w) = cell_winding(field, c) {
            let k = band.cell_degree(g, c);
            if (w.rem_euclid(2)) as usize != k % 2 {
                let (i, j) = g.cell_ij(c);
                return Err(Error::Parity {
                    i: i as i64,
                    j: j as i64,
                    winding: w,
                    crossings: k,
                });
            }
        }
    }
    let mut v = vec![Vec2::new(0.0, 0.0); g.len()];
    let mut seen = vec![false; g.len()];
    let mut queue = VecDeque::new();
    for root in 0..g.len() {
        if !g.mask[root] || seen[root] {
            continue;
        }
        seen[root] = true;
        v[root] = principal_root(unit_or_default(field.values[root]));
        queue.push_back(root);
        while let Some(a) = queue.pop_front() {
            let (i, j) = g.ij(a);
            let steps = [
                (i + 1 < g.nx).then(|| (a + 1, Edge { i, j, axis: 0 })),
                (i > 0).then(|| (a - 1, Edge { i: i - 1, j, axis: 0 })),
                (j + 1 < g.ny).then(|| (a + g.nx, Edge { i, j, axis: 1 })),
                (j > 0).then(|| (a - g.nx, Edge { i, j: j - 1, axis: 1 })),
            ];
            for (b, e) in steps.into_iter().flatten() {
                if !g.mask[b] || seen[b] || band.edges.contains(g, e) {
                    continue;
                }
                let r = principal_root(unit_or_default(field.values[b]));
                v[b] = if is_jump(v[a], r) { -r } else { r };
                seen[b] = true;
                queue.push_back(b);
            }
        }
    }
    let directors = GridField {
        grid: g.clone(),
        values: v,
    };
    let jumps = jump_set(&directors);
    Ok(Lifting {
        directors,
        jumps,
        band,
        core: defect_core(field),
    })
}

/// Edges separating an in-set node from an out-of-set masked node.
pub fn essential_boundary(g: &Grid, a: &PixelSet) -> EdgeSet {
    let mut out = EdgeSet::empty(g);
    for e in g.mask_edges() {
        let (x, y) = g.edge_nodes(e);
        if a.contains(x) != a.contains(y) {
            out.insert(g, e);
        }
    }
    out
}

/// `boundary(A xor B) == boundary(A) xor boundary(B)`, compared edge by edge.
pub fn symdiff_boundary_check(g: &Grid, a: &PixelSet, b: &PixelSet) -> bool {
    essential_boundary(g, &a.symmetric_difference(b))
        == essential_boundary(g, a).symmetric_difference(&essential_boundary(g, b))
}

/// `boundary(A) xor band(cuts)`.
pub fn la_edge_set(g: &Grid, a: &PixelSet, band: &CutBand) -> EdgeSet {
    essential_boundary(g, a).symmetric_difference(&band.edges)
}

/// Flips the reference lifting on `A`; returns the new directors and their jump set.
pub fn lifting_from_set(reference: &Lifting, a: &PixelSet) -> (GridField, EdgeSet) {
    let mut d = reference.directors.clone();
    for (k, v) in d.values.iter_mut().enumerate() {
        if a.contains(k) {
            *v = -*v;
        }
    }
    let j = jump_set(&d);
    (d, j)
}

/// Nodes where `v` is the deck image of the reference lifting, i.e. `xi(v, v_ref) < 0`.
pub fn set_from_lifting(reference: &Lifting, v: &GridField) -> Result<PixelSet> {
    let g = &reference.directors.grid;
    let mut a = PixelSet::empty(g);
    for k in 0..g.len() {
        if !g.mask[k] {
            continue;
        }
        let x = xi(v.values[k], reference.directors.values[k]);
        if x.abs() < 0.5 {
            return Err(Error::Mismatch { node: k, xi: x });
        }
        a.cells[k] = x < 0.0;
    }
    Ok(a)
}

/// Random pixel set mixing disks, rectangles, half-planes and salt noise.
pub fn random_pixel_set<R: Rng>(g: &Grid, rng: &mut R) -> PixelSet {
    let lo = g.origin;
    let span = g.h * (g.nx.max(g.ny) - 1) as f64;
    let shapes = rng.gen_range(1..=3);
    let mut set = PixelSet::empty(g);
    for _ in 0..shapes {
        let kind = rng.gen_range(0..4);
        let c = lo + Vec2::new(rng.gen::<f64>() * span, rng.gen::<f64>() * span);
        let part = match kind {
            0 => {
                let r = rng.gen_range(0.02..0.5) * span;
                PixelSet::from_fn(g, |x| x.dist(c) < r)
            }
            1 => {
                let (w, h) = (rng.gen_range(0.01..0.6) * span, rng.gen_range(0.01..0.6) * span);
                PixelSet::from_fn(g, |x| (x.x - c.x).abs() < w && (x.y - c.y).abs() < h)
            }
            2 => {
                let n = Vec2::from_angle(rng.gen_range(0.0..std::f64::consts::TAU));
                PixelSet::from_fn(g, |x| (x - c).dot(n) > 0.0)
            }
            _ => {
                let p = rng.gen_range(0.001..0.05);
                let noise: Vec<bool> = (0..g.len()).map(|_| rng.gen::<f64>() < p).collect();
                PixelSet {
                    cells: (0..g.len()).map(|k| g.mask[k] && noise[k]).collect(),
                }
            }
        };
        set = set.symmetric_difference(&part);
    }
    set
}
